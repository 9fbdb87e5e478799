#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace ocep::rdf {

namespace vocab {
inline constexpr std::string_view rdf_ns = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view rdfs_ns = "http://www.w3.org/2000/01/rdf-schema#";
inline constexpr std::string_view xsd_ns = "http://www.w3.org/2001/XMLSchema#";
inline constexpr std::string_view owl_ns = "http://www.w3.org/2002/07/owl#";
/// Canonical healthcare namespace (lowercase host, trailing slash).
inline constexpr std::string_view healthcare_ns = "http://healthcare.org/ppg/";

inline constexpr std::string_view rdf_type = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
inline constexpr std::string_view rdfs_label = "http://www.w3.org/2000/01/rdf-schema#label";
inline constexpr std::string_view rdfs_subclass_of =
    "http://www.w3.org/2000/01/rdf-schema#subClassOf";
inline constexpr std::string_view rdfs_class = "http://www.w3.org/2000/01/rdf-schema#Class";
inline constexpr std::string_view xsd_string = "http://www.w3.org/2001/XMLSchema#string";
inline constexpr std::string_view xsd_integer = "http://www.w3.org/2001/XMLSchema#integer";
inline constexpr std::string_view xsd_decimal = "http://www.w3.org/2001/XMLSchema#decimal";
inline constexpr std::string_view xsd_double = "http://www.w3.org/2001/XMLSchema#double";
inline constexpr std::string_view xsd_boolean = "http://www.w3.org/2001/XMLSchema#boolean";
inline constexpr std::string_view owl_class = "http://www.w3.org/2002/07/owl#Class";
inline constexpr std::string_view owl_thing = "http://www.w3.org/2002/07/owl#Thing";
inline constexpr std::string_view owl_object_property =
    "http://www.w3.org/2002/07/owl#ObjectProperty";
inline constexpr std::string_view owl_datatype_property =
    "http://www.w3.org/2002/07/owl#DatatypeProperty";
inline constexpr std::string_view owl_named_individual =
    "http://www.w3.org/2002/07/owl#NamedIndividual";

/// IRI in the canonical healthcare namespace.
std::string hc(std::string_view local);
}  // namespace vocab

enum class TermKind : std::uint8_t { iri, literal, blank };

/// An RDF term. Literals always carry a datatype (xsd:string when the
/// source had none); language tags are not modelled.
class Term {
public:
  /// Throws InvalidArgument for an empty IRI or one containing whitespace.
  static Term iri(std::string value);
  /// Throws InvalidArgument when an xsd:integer lexical form is not an integer.
  static Term literal(std::string lexical, std::string datatype = std::string(vocab::xsd_string));
  static Term integer(long long value);
  static Term blank(std::string label);

  TermKind kind() const noexcept { return kind_; }
  bool is_iri() const noexcept { return kind_ == TermKind::iri; }
  bool is_literal() const noexcept { return kind_ == TermKind::literal; }
  bool is_blank() const noexcept { return kind_ == TermKind::blank; }

  /// IRI text, literal lexical form, or blank-node label.
  const std::string& value() const noexcept { return value_; }
  /// Datatype IRI; empty for IRIs and blank nodes.
  const std::string& datatype() const noexcept { return datatype_; }

  /// Numeric value of an xsd:integer / decimal / double literal.
  std::optional<double> numeric() const;
  /// True for xsd:string literals.
  bool is_plain_string() const noexcept;

  /// N-Triples form: `<iri>`, `_:label`, `"lex"` or `"lex"^^<dt>`.
  std::string to_ntriples() const;

  friend bool operator==(const Term&, const Term&) = default;
  friend std::strong_ordering operator<=>(const Term&, const Term&) = default;

private:
  Term(TermKind kind, std::string value, std::string datatype)
      : kind_(kind), value_(std::move(value)), datatype_(std::move(datatype)) {}

  TermKind kind_ = TermKind::iri;
  std::string value_;
  std::string datatype_;
};

struct TermHash {
  std::size_t operator()(const Term& t) const noexcept;
};

/// FNV-1a, stable across platforms and runs (std::hash is not).
std::uint64_t stable_hash(std::string_view bytes) noexcept;

/// Escape a lexical form for use between double quotes.
std::string escape_literal(std::string_view lexical);

}  // namespace ocep::rdf

template <>
struct std::hash<ocep::rdf::Term> : ocep::rdf::TermHash {};

#include "ocep/rdf/term.hpp"

#include <charconv>
#include <cctype>
#include <cstdlib>

#include "ocep/error.hpp"

namespace ocep::rdf {

namespace vocab {
std::string hc(std::string_view local) {
  std::string out(healthcare_ns);
  out += local;
  return out;
}
}  // namespace vocab

namespace {

bool is_integer_lexical(std::string_view s) {
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) s.remove_prefix(1);
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace

Term Term::iri(std::string value) {
  if (value.empty()) throw InvalidArgument("empty IRI");
  for (char c : value)
    if (std::isspace(static_cast<unsigned char>(c)))
      throw InvalidArgument("IRI contains whitespace: " + value);
  return Term(TermKind::iri, std::move(value), {});
}

Term Term::literal(std::string lexical, std::string datatype) {
  if (datatype.empty()) datatype = std::string(vocab::xsd_string);
  if (datatype == vocab::xsd_integer && !is_integer_lexical(lexical))
    throw InvalidArgument("not an integer lexical form: \"" + lexical + "\"");
  return Term(TermKind::literal, std::move(lexical), std::move(datatype));
}

Term Term::integer(long long value) {
  return Term(TermKind::literal, std::to_string(value), std::string(vocab::xsd_integer));
}

Term Term::blank(std::string label) {
  if (label.empty()) throw InvalidArgument("empty blank node label");
  return Term(TermKind::blank, std::move(label), {});
}

std::optional<double> Term::numeric() const {
  if (kind_ != TermKind::literal) return std::nullopt;
  if (datatype_ != vocab::xsd_integer && datatype_ != vocab::xsd_decimal &&
      datatype_ != vocab::xsd_double)
    return std::nullopt;
  const char* begin = value_.c_str();
  if (*begin == '+') ++begin;
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') return std::nullopt;
  return v;
}

bool Term::is_plain_string() const noexcept {
  return kind_ == TermKind::literal && datatype_ == vocab::xsd_string;
}

std::string escape_literal(std::string_view lexical) {
  std::string out;
  out.reserve(lexical.size());
  for (char c : lexical) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

std::string Term::to_ntriples() const {
  switch (kind_) {
    case TermKind::iri: return "<" + value_ + ">";
    case TermKind::blank: return "_:" + value_;
    case TermKind::literal: {
      std::string out = "\"" + escape_literal(value_) + "\"";
      if (datatype_ != vocab::xsd_string) out += "^^<" + datatype_ + ">";
      return out;
    }
  }
  return {};
}

std::uint64_t stable_hash(std::string_view bytes) noexcept {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::size_t TermHash::operator()(const Term& t) const noexcept {
  std::size_t h = std::hash<std::string>{}(t.value());
  h ^= static_cast<std::size_t>(t.kind()) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  if (t.is_literal()) h ^= std::hash<std::string>{}(t.datatype()) * 31;
  return h;
}

}  // namespace ocep::rdf

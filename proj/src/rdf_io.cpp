#include "ocep/rdf/io.hpp"

#include <array>
#include <cctype>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "ocep/error.hpp"

namespace ocep::rdf {

namespace {

constexpr std::string_view kLegacyUpper = "http://Healthcare.org/ppg/";
constexpr std::string_view kLegacyNoSlash = "http://healthcare.org/ppg";

bool is_pn_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
         static_cast<unsigned char>(c) >= 0x80;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// Shared cursor for both grammars. Tracks line numbers for messages.
class Cursor {
public:
  Cursor(std::string_view text, std::size_t first_line) : s_(text), line_(first_line) {}

  bool done() const { return pos_ >= s_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < s_.size() ? s_[pos_ + ahead] : '\0';
  }
  char get() {
    char c = s_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }
  bool starts_with(std::string_view token) const { return s_.substr(pos_).starts_with(token); }
  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n && !done(); ++i) get();
  }
  std::size_t line() const { return line_; }
  std::string_view rest_of_line() const {
    auto end = s_.find('\n', pos_);
    return s_.substr(pos_, end == std::string_view::npos ? std::string_view::npos : end - pos_);
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(message, line_, std::string(rest_of_line()));
  }

  void skip_inline_ws() {
    while (!done() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) get();
  }

  // Whitespace, newlines and # comments.
  void skip_ws_and_comments() {
    while (!done()) {
      char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        get();
      } else if (c == '#') {
        while (!done() && peek() != '\n') get();
      } else {
        break;
      }
    }
  }

  std::string read_iriref() {
    if (peek() != '<') fail("expected '<'");
    get();
    std::string out;
    while (true) {
      if (done() || peek() == '\n') fail("unterminated IRI");
      char c = get();
      if (c == '>') break;
      if (c == ' ' || c == '\t') fail("whitespace inside IRI");
      if (c == '\\') fail("escape sequences in IRIs are not supported");
      out += c;
    }
    if (out.empty()) fail("empty IRI");
    return out;
  }

  std::string read_blank_label() {
    advance(2);  // "_:"
    std::string out;
    while (!done() && (is_pn_char(peek()) || (peek() == '.' && is_pn_char(peek(1))))) out += get();
    if (out.empty()) fail("empty blank node label");
    return out;
  }

  // Reads a "..." literal body with N-Triples escapes; cursor on the quote.
  std::string read_quoted() {
    get();
    std::string out;
    while (true) {
      if (done() || peek() == '\n') fail("unterminated literal");
      char c = get();
      if (c == '"') return out;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (done()) fail("unterminated literal");
      char e = get();
      switch (e) {
        case 't': out += '\t'; break;
        case 'n': out += '\n'; break;
        case 'r': out += '\r'; break;
        case 'b': out += '\b'; break;
        case 'f': out += '\f'; break;
        case '"': out += '"'; break;
        case '\'': out += '\''; break;
        case '\\': out += '\\'; break;
        case 'u':
        case 'U': {
          std::size_t digits = e == 'u' ? 4 : 8;
          std::uint32_t cp = 0;
          for (std::size_t i = 0; i < digits; ++i) {
            char h = done() ? '\0' : get();
            if (!std::isxdigit(static_cast<unsigned char>(h))) fail("bad unicode escape");
            cp = cp * 16 + static_cast<std::uint32_t>(std::isdigit(static_cast<unsigned char>(h))
                                                          ? h - '0'
                                                          : std::tolower(h) - 'a' + 10);
          }
          append_utf8(out, cp);
          break;
        }
        default: fail(std::string("unknown escape \\") + e);
      }
    }
  }

private:
  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t line_;
};

Term make_iri(std::string iri, const ReadOptions& options, const Cursor& cur) {
  if (options.legacy_namespaces) iri = canonical_iri(std::move(iri));
  try {
    return Term::iri(std::move(iri));
  } catch (const InvalidArgument& e) {
    cur.fail(e.what());
  }
}

Term make_literal(std::string lexical, std::string datatype, const Cursor& cur) {
  try {
    return Term::literal(std::move(lexical), std::move(datatype));
  } catch (const InvalidArgument& e) {
    cur.fail(e.what());
  }
}

Triple make_triple(Term s, Term p, Term o, const Cursor& cur) {
  try {
    return Triple(std::move(s), std::move(p), std::move(o));
  } catch (const InvalidArgument& e) {
    cur.fail(e.what());
  }
}

// ---- N-Triples ------------------------------------------------------------

Term nt_subject_or_object(Cursor& cur, const ReadOptions& options, bool allow_literal) {
  char c = cur.peek();
  if (c == '<') return make_iri(cur.read_iriref(), options, cur);
  if (c == '_' && cur.peek(1) == ':') return Term::blank(cur.read_blank_label());
  if (c == '"' && allow_literal) {
    std::string lexical = cur.read_quoted();
    std::string datatype;
    if (cur.starts_with("^^")) {
      cur.advance(2);
      datatype = make_iri(cur.read_iriref(), options, cur).value();
    } else if (cur.peek() == '@') {
      cur.fail("language-tagged literals are not supported");
    }
    return make_literal(std::move(lexical), std::move(datatype), cur);
  }
  if (c == '\0' || c == '\n') cur.fail("unexpected end of statement");
  cur.fail(std::string("unexpected character '") + c + "'");
}

}  // namespace

std::string canonical_iri(std::string iri) {
  if (iri.starts_with(kLegacyUpper))
    return std::string(vocab::healthcare_ns) + iri.substr(kLegacyUpper.size());
  if (iri.starts_with(kLegacyNoSlash) && !iri.starts_with(vocab::healthcare_ns))
    return std::string(vocab::healthcare_ns) + iri.substr(kLegacyNoSlash.size());
  return iri;
}

std::vector<Triple> parse_ntriples(std::string_view text, const ReadOptions& options) {
  std::vector<Triple> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    ++line_no;
    auto end = text.find('\n', start);
    std::string_view line =
        text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;

    Cursor cur(line, line_no);
    cur.skip_inline_ws();
    if (cur.done() || cur.peek() == '#') continue;

    Term s = nt_subject_or_object(cur, options, false);
    cur.skip_inline_ws();
    if (cur.peek() != '<') cur.fail("expected predicate IRI");
    Term p = make_iri(cur.read_iriref(), options, cur);
    cur.skip_inline_ws();
    Term o = nt_subject_or_object(cur, options, true);
    cur.skip_inline_ws();
    if (cur.peek() != '.') cur.fail("expected '.' at end of statement");
    cur.get();
    cur.skip_inline_ws();
    if (!cur.done() && cur.peek() != '#') cur.fail("trailing content after '.'");
    out.push_back(make_triple(std::move(s), std::move(p), std::move(o), cur));
  }
  return out;
}

namespace {

std::string slurp(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- Turtle subset --------------------------------------------------------

class TurtleReader {
public:
  TurtleReader(std::string_view text, const ReadOptions& options)
      : cur_(text, 1), options_(options) {}

  std::vector<Triple> run() {
    while (true) {
      cur_.skip_ws_and_comments();
      if (cur_.done()) break;
      if (cur_.starts_with("@prefix")) {
        cur_.advance(7);
        prefix_declaration(true);
      } else if (keyword_ahead("PREFIX")) {
        cur_.advance(6);
        prefix_declaration(false);
      } else if (cur_.starts_with("@base") || keyword_ahead("BASE")) {
        throw UnsupportedFeature("@base");
      } else {
        statement();
      }
    }
    return std::move(out_);
  }

private:
  bool keyword_ahead(std::string_view kw) const {
    for (std::size_t i = 0; i < kw.size(); ++i)
      if (std::toupper(static_cast<unsigned char>(cur_.peek(i))) != kw[i]) return false;
    return std::isspace(static_cast<unsigned char>(cur_.peek(kw.size())));
  }

  void prefix_declaration(bool needs_dot) {
    cur_.skip_ws_and_comments();
    std::string name;
    while (is_pn_char(cur_.peek())) name += cur_.get();
    if (cur_.peek() != ':') cur_.fail("expected ':' in prefix declaration");
    cur_.get();
    cur_.skip_ws_and_comments();
    std::string iri = cur_.read_iriref();
    if (options_.legacy_namespaces) iri = canonical_iri(std::move(iri));
    prefixes_[name] = std::move(iri);
    if (needs_dot) {
      cur_.skip_ws_and_comments();
      if (cur_.peek() != '.') cur_.fail("expected '.' after @prefix");
      cur_.get();
    }
  }

  void statement() {
    Term subject = subject_term();
    while (true) {
      cur_.skip_ws_and_comments();
      Term predicate = verb();
      while (true) {
        cur_.skip_ws_and_comments();
        Term object = object_term();
        out_.push_back(make_triple(subject, predicate, std::move(object), cur_));
        cur_.skip_ws_and_comments();
        if (cur_.peek() == ',') {
          cur_.get();
          continue;
        }
        break;
      }
      if (cur_.peek() == ';') {
        while (cur_.peek() == ';') {
          cur_.get();
          cur_.skip_ws_and_comments();
        }
        if (cur_.peek() == '.') break;
        continue;
      }
      break;
    }
    cur_.skip_ws_and_comments();
    if (cur_.peek() != '.') cur_.fail("expected '.' at end of statement");
    cur_.get();
  }

  void reject_unsupported() {
    char c = cur_.peek();
    if (c == '[') throw UnsupportedFeature("blank node property list");
    if (c == '(') throw UnsupportedFeature("collection");
    if (c == '\'') throw UnsupportedFeature("single-quoted literal");
    if (c == '{') throw UnsupportedFeature("graph block");
  }

  Term subject_term() {
    reject_unsupported();
    if (cur_.peek() == '"' || std::isdigit(static_cast<unsigned char>(cur_.peek())))
      cur_.fail("literal in subject position");
    return resource();
  }

  Term verb() {
    if (cur_.peek() == 'a' && !is_pn_char(cur_.peek(1)) && cur_.peek(1) != ':') {
      cur_.get();
      return Term::iri(std::string(vocab::rdf_type));
    }
    reject_unsupported();
    Term t = resource();
    if (!t.is_iri()) cur_.fail("predicate must be an IRI");
    return t;
  }

  Term object_term() {
    reject_unsupported();
    char c = cur_.peek();
    if (c == '"') return quoted_literal();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' ||
        (c == '.' && std::isdigit(static_cast<unsigned char>(cur_.peek(1)))))
      return numeric_literal();
    if (word_ahead("true")) {
      cur_.advance(4);
      return Term::literal("true", std::string(vocab::xsd_boolean));
    }
    if (word_ahead("false")) {
      cur_.advance(5);
      return Term::literal("false", std::string(vocab::xsd_boolean));
    }
    return resource();
  }

  bool word_ahead(std::string_view w) const {
    return cur_.starts_with(w) && !is_pn_char(cur_.peek(w.size())) && cur_.peek(w.size()) != ':';
  }

  Term resource() {
    char c = cur_.peek();
    if (c == '<') return make_iri(cur_.read_iriref(), options_, cur_);
    if (c == '_' && cur_.peek(1) == ':') return Term::blank(cur_.read_blank_label());
    if (is_pn_char(c) || c == ':') return prefixed_name();
    if (c == '\0') cur_.fail("unexpected end of input");
    cur_.fail(std::string("unexpected character '") + c + "'");
  }

  Term prefixed_name() {
    std::string prefix;
    while (is_pn_char(cur_.peek())) prefix += cur_.get();
    if (cur_.peek() != ':') cur_.fail("expected prefixed name, got '" + prefix + "'");
    cur_.get();
    std::string local;
    while (is_pn_char(cur_.peek()) || (cur_.peek() == '.' && is_pn_char(cur_.peek(1))))
      local += cur_.get();
    auto it = prefixes_.find(prefix);
    if (it == prefixes_.end()) cur_.fail("unknown prefix '" + prefix + "'");
    return make_iri(it->second + local, options_, cur_);
  }

  Term quoted_literal() {
    if (cur_.starts_with("\"\"\"")) throw UnsupportedFeature("long string literal");
    std::string lexical = cur_.read_quoted();
    std::string datatype;
    if (cur_.starts_with("^^")) {
      cur_.advance(2);
      Term dt = resource();
      if (!dt.is_iri()) cur_.fail("datatype must be an IRI");
      datatype = dt.value();
    } else if (cur_.peek() == '@') {
      throw UnsupportedFeature("language tag");
    }
    return make_literal(std::move(lexical), std::move(datatype), cur_);
  }

  Term numeric_literal() {
    std::string lexical;
    if (cur_.peek() == '+' || cur_.peek() == '-') lexical += cur_.get();
    bool digits = false;
    while (std::isdigit(static_cast<unsigned char>(cur_.peek()))) {
      lexical += cur_.get();
      digits = true;
    }
    std::string_view datatype = vocab::xsd_integer;
    if (cur_.peek() == '.' && std::isdigit(static_cast<unsigned char>(cur_.peek(1)))) {
      lexical += cur_.get();
      while (std::isdigit(static_cast<unsigned char>(cur_.peek()))) lexical += cur_.get();
      datatype = vocab::xsd_decimal;
      digits = true;
    }
    if (!digits) cur_.fail("malformed number");
    if (cur_.peek() == 'e' || cur_.peek() == 'E') {
      lexical += cur_.get();
      if (cur_.peek() == '+' || cur_.peek() == '-') lexical += cur_.get();
      if (!std::isdigit(static_cast<unsigned char>(cur_.peek()))) cur_.fail("malformed exponent");
      while (std::isdigit(static_cast<unsigned char>(cur_.peek()))) lexical += cur_.get();
      datatype = vocab::xsd_double;
    }
    return make_literal(std::move(lexical), std::string(datatype), cur_);
  }

  Cursor cur_;
  const ReadOptions& options_;
  std::map<std::string, std::string> prefixes_;
  std::vector<Triple> out_;
};

// ---- Serialization --------------------------------------------------------

struct PrefixEntry {
  std::string_view name;
  std::string_view iri;
};

constexpr std::array<PrefixEntry, 5> kPrefixes{{
    {"rdf", vocab::rdf_ns},
    {"rdfs", vocab::rdfs_ns},
    {"xsd", vocab::xsd_ns},
    {"owl", vocab::owl_ns},
    {"ssn", vocab::healthcare_ns},
}};

bool safe_local(std::string_view local) {
  if (local.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(local.front())) || local.front() == '_'))
    return false;
  for (char c : local)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  return true;
}

std::string turtle_iri(const std::string& iri) {
  for (const auto& p : kPrefixes) {
    if (iri.size() > p.iri.size() && iri.starts_with(p.iri)) {
      std::string_view local = std::string_view(iri).substr(p.iri.size());
      if (safe_local(local)) return std::string(p.name) + ":" + std::string(local);
    }
  }
  return "<" + iri + ">";
}

bool bare_integer(std::string_view lexical) {
  if (!lexical.empty() && (lexical.front() == '+' || lexical.front() == '-'))
    lexical.remove_prefix(1);
  if (lexical.empty()) return false;
  for (char c : lexical)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

std::string turtle_term(const Term& t) {
  switch (t.kind()) {
    case TermKind::iri: return turtle_iri(t.value());
    case TermKind::blank: return "_:" + t.value();
    case TermKind::literal:
      if (t.datatype() == vocab::xsd_integer && bare_integer(t.value())) return t.value();
      if (t.is_plain_string()) return "\"" + escape_literal(t.value()) + "\"";
      return "\"" + escape_literal(t.value()) + "\"^^" + turtle_iri(t.datatype());
  }
  return {};
}

void write_turtle(const TripleStore& store, std::ostream& out) {
  for (const auto& p : kPrefixes) out << "@prefix " << p.name << ": <" << p.iri << "> .\n";

  // Group by subject in order of first appearance.
  std::vector<const Term*> subjects;
  std::unordered_map<Term, std::vector<const Triple*>, TermHash> groups;
  for (const auto& t : store.triples()) {
    auto [it, fresh] = groups.try_emplace(t.subject());
    if (fresh) subjects.push_back(&t.subject());
    it->second.push_back(&t);
  }
  for (const Term* s : subjects) {
    out << "\n" << turtle_term(*s);
    const auto& triples = groups.at(*s);
    for (std::size_t i = 0; i < triples.size(); ++i) {
      const Triple& t = *triples[i];
      out << (i == 0 ? " " : " ;\n    ");
      out << (t.predicate().value() == vocab::rdf_type ? std::string("a")
                                                       : turtle_iri(t.predicate().value()));
      out << " " << turtle_term(t.object());
    }
    out << " .\n";
  }
}

}  // namespace

std::vector<Triple> parse_ntriples(std::istream& in, const ReadOptions& options) {
  return parse_ntriples(slurp(in), options);
}

std::vector<Triple> parse_turtle(std::string_view text, const ReadOptions& options) {
  return TurtleReader(text, options).run();
}

std::vector<Triple> parse_turtle(std::istream& in, const ReadOptions& options) {
  return parse_turtle(slurp(in), options);
}

std::vector<Triple> parse(std::string_view text, Format format, const ReadOptions& options) {
  return format == Format::ntriples ? parse_ntriples(text, options) : parse_turtle(text, options);
}

void serialize(const TripleStore& store, Format format, std::ostream& out) {
  if (format == Format::turtle) {
    write_turtle(store, out);
    return;
  }
  for (const auto& t : store.triples()) out << t.to_ntriples() << '\n';
}

std::string serialize(const TripleStore& store, Format format) {
  std::ostringstream out;
  serialize(store, format, out);
  return out.str();
}

Format format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".nt" ? Format::ntriples : Format::turtle;
}

TripleStore load_file(const std::filesystem::path& path, const ReadOptions& options) {
  std::string text;
  if (path == "-") {
    text = slurp(std::cin);
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    text = slurp(in);
  }
  auto triples = parse(text, format_for_path(path), options);
  return TripleStore(triples);
}

void save_file(const TripleStore& store, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  serialize(store, format_for_path(path), out);
}

}  // namespace ocep::rdf

#include <algorithm>
#include <cctype>

#include "ocep/error.hpp"
#include "ocep/query.hpp"

namespace ocep::query {

namespace {

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
         static_cast<unsigned char>(c) >= 0x80;
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

// Keywords that belong to SPARQL but not to the supported subset.
const char* unsupported_keyword(const std::string& word, std::string_view next_word) {
  static const char* const kSimple[] = {"OPTIONAL", "UNION",     "DISTINCT", "REDUCED", "OFFSET",
                                        "HAVING",   "MINUS",     "BIND",     "VALUES",  "SERVICE",
                                        "GRAPH",    "FROM",      "CONSTRUCT", "ASK",    "DESCRIBE",
                                        "BASE",     "NOT",       "EXISTS",   "INSERT",  "DELETE"};
  if (word == "ORDER") return next_word == "BY" ? "ORDER BY" : "ORDER";
  if (word == "GROUP") return next_word == "BY" ? "GROUP BY" : "GROUP";
  for (const char* k : kSimple)
    if (word == k) return k;
  return nullptr;
}

class QueryParser {
public:
  explicit QueryParser(std::string_view text) : s_(text) {}

  QueryPlan run() {
    prologue();
    expect_keyword("SELECT");
    select_clause();
    skip_ws();
    if (peek_keyword() == "WHERE") take_word();
    skip_ws();
    expect('{');
    group_body();
    expect('}');
    solution_modifiers();
    skip_ws();
    if (!done()) fail("unexpected trailing text");
    finish();
    return std::move(plan_);
  }

private:
  // ---- lexical helpers ----
  bool done() const { return pos_ >= s_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < s_.size() ? s_[pos_ + ahead] : '\0';
  }
  char get() { return s_[pos_++]; }

  [[noreturn]] void fail(const std::string& message) const {
    std::size_t line = 1 + static_cast<std::size_t>(
                               std::count(s_.begin(), s_.begin() + static_cast<long>(pos_), '\n'));
    auto end = s_.find('\n', pos_);
    throw ParseError(message, line,
                     std::string(s_.substr(pos_, end == std::string_view::npos ? 40 : end - pos_)));
  }

  void skip_ws() {
    while (!done()) {
      if (std::isspace(static_cast<unsigned char>(peek()))) {
        ++pos_;
      } else if (peek() == '#') {
        while (!done() && peek() != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  // Next bare word (letters only) without consuming it, upper-cased.
  std::string peek_keyword(std::size_t skip_words = 0) const {
    std::size_t p = pos_;
    std::string word;
    for (std::size_t k = 0; k <= skip_words; ++k) {
      while (p < s_.size() && std::isspace(static_cast<unsigned char>(s_[p]))) ++p;
      std::size_t start = p;
      while (p < s_.size() && std::isalpha(static_cast<unsigned char>(s_[p]))) ++p;
      if (p < s_.size() && (s_[p] == ':' || is_name_char(s_[p]))) return {};  // prefixed name
      word = upper(s_.substr(start, p - start));
    }
    return word;
  }

  std::string take_word() {
    skip_ws();
    std::string word;
    while (!done() && std::isalpha(static_cast<unsigned char>(peek()))) word += get();
    return upper(word);
  }

  void reject_if_unsupported() {
    std::string word = peek_keyword();
    if (word.empty()) return;
    if (const char* k = unsupported_keyword(word, peek_keyword(1))) throw UnsupportedFeature(k);
  }

  void expect_keyword(std::string_view kw) {
    reject_if_unsupported();
    if (take_word() != kw) fail("expected " + std::string(kw));
  }

  // ---- grammar ----
  void prologue() {
    while (true) {
      skip_ws();
      std::string kw = peek_keyword();
      if (kw == "BASE") throw UnsupportedFeature("BASE");
      if (kw != "PREFIX") return;
      take_word();
      skip_ws();
      std::string name;
      while (is_name_char(peek())) name += get();
      if (peek() != ':') fail("expected ':' after prefix name");
      ++pos_;
      skip_ws();
      plan_.prefixes[name] = iriref();
    }
  }

  void select_clause() {
    skip_ws();
    reject_if_unsupported();
    if (peek() == '*') {
      ++pos_;
      select_all_ = true;
      return;
    }
    while (true) {
      skip_ws();
      if (peek() == '(') throw UnsupportedFeature("SELECT expression");
      if (peek() != '?' && peek() != '$') break;
      plan_.select_vars.push_back(variable().name);
    }
    if (plan_.select_vars.empty()) fail("SELECT needs at least one variable or *");
  }

  void group_body() {
    while (true) {
      skip_ws();
      if (peek() == '}' || done()) return;
      if (peek() == '{') {
        // `{ ... } UNION { ... }` is reported as UNION, not as nesting.
        std::size_t depth = 0, p = pos_;
        for (; p < s_.size(); ++p) {
          if (s_[p] == '{') ++depth;
          if (s_[p] == '}' && --depth == 0) break;
        }
        const std::size_t saved = pos_;
        pos_ = std::min(p + 1, s_.size());
        const bool is_union = peek_keyword() == "UNION";
        pos_ = saved;
        throw UnsupportedFeature(is_union ? "UNION" : "nested group pattern");
      }
      std::string kw = peek_keyword();
      if (kw == "FILTER") {
        take_word();
        filter();
        skip_ws();
        if (peek() == '.') ++pos_;
        continue;
      }
      reject_if_unsupported();
      triples_block();
    }
  }

  void triples_block() {
    PatternTerm subject = term(false);
    while (true) {
      skip_ws();
      PatternTerm predicate = verb();
      while (true) {
        skip_ws();
        PatternTerm object = term(true);
        plan_.patterns.push_back({subject, predicate, std::move(object)});
        skip_ws();
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        break;
      }
      if (peek() == ';') {
        while (peek() == ';') {
          ++pos_;
          skip_ws();
        }
        if (peek() == '.' || peek() == '}') break;
        continue;
      }
      break;
    }
    skip_ws();
    if (peek() == '.') {
      ++pos_;
    } else if (peek() != '}' && peek_keyword() != "FILTER") {
      if (const char* k = unsupported_keyword(peek_keyword(), peek_keyword(1))) throw UnsupportedFeature(k);
      fail("expected '.', ';', ',' or '}' after triple pattern");
    }
  }

  PatternTerm verb() {
    if (peek() == 'a' && !is_name_char(peek(1)) && peek(1) != ':') {
      ++pos_;
      return rdf::Term::iri(std::string(rdf::vocab::rdf_type));
    }
    PatternTerm t = term(false);
    if (auto* term = std::get_if<rdf::Term>(&t); term && !term->is_iri())
      fail("predicate must be an IRI or variable");
    return t;
  }

  PatternTerm term(bool allow_literal) {
    skip_ws();
    char c = peek();
    if (c == '?' || c == '$') return variable();
    if (c == '<') return rdf::Term::iri(iriref());
    if (c == '[') throw UnsupportedFeature("blank node property list");
    if (c == '(') throw UnsupportedFeature("collection");
    if (c == '_' && peek(1) == ':') throw UnsupportedFeature("blank node in query");
    if (c == '"' || c == '\'' || std::isdigit(static_cast<unsigned char>(c)) || c == '-' ||
        c == '+') {
      if (!allow_literal) fail("literal not allowed here");
      return literal();
    }
    if (is_name_char(c) || c == ':') {
      std::string kw = peek_keyword();
      if (kw == "TRUE" || kw == "FALSE") {
        if (!allow_literal) fail("literal not allowed here");
        take_word();
        return rdf::Term::literal(kw == "TRUE" ? "true" : "false",
                                  std::string(rdf::vocab::xsd_boolean));
      }
      return rdf::Term::iri(prefixed_name());
    }
    if (done()) fail("unexpected end of query");
    fail(std::string("unexpected character '") + c + "'");
  }

  Var variable() {
    ++pos_;  // ? or $
    std::string name;
    while (is_name_char(peek())) name += get();
    if (name.empty()) fail("empty variable name");
    return Var{name};
  }

  std::string iriref() {
    if (peek() != '<') fail("expected IRI");
    ++pos_;
    std::string out;
    while (true) {
      if (done() || peek() == '\n') fail("unterminated IRI");
      char c = get();
      if (c == '>') break;
      if (std::isspace(static_cast<unsigned char>(c))) fail("whitespace inside IRI");
      out += c;
    }
    if (out.empty()) fail("empty IRI");
    return out;
  }

  std::string prefixed_name() {
    std::string prefix;
    while (is_name_char(peek())) prefix += get();
    if (peek() != ':') {
      std::string up = upper(prefix);
      if (const char* k = unsupported_keyword(up, peek_keyword())) throw UnsupportedFeature(k);
      fail("expected prefixed name, got '" + prefix + "'");
    }
    ++pos_;
    std::string local;
    while (is_name_char(peek()) || (peek() == '.' && is_name_char(peek(1)))) local += get();
    auto it = plan_.prefixes.find(prefix);
    if (it == plan_.prefixes.end()) fail("unknown prefix '" + prefix + "'");
    return it->second + local;
  }

  rdf::Term literal() {
    char c = peek();
    if (c == '"' || c == '\'') {
      char quote = get();
      if (peek() == quote && peek(1) == quote) throw UnsupportedFeature("long string literal");
      std::string lexical;
      while (true) {
        if (done() || peek() == '\n') fail("unterminated literal");
        char ch = get();
        if (ch == quote) break;
        if (ch == '\\') {
          if (done()) fail("unterminated literal");
          char e = get();
          switch (e) {
            case 'n': lexical += '\n'; break;
            case 't': lexical += '\t'; break;
            case 'r': lexical += '\r'; break;
            case '"': lexical += '"'; break;
            case '\'': lexical += '\''; break;
            case '\\': lexical += '\\'; break;
            default: fail(std::string("unsupported escape \\") + e);
          }
          continue;
        }
        lexical += ch;
      }
      std::string datatype;
      if (peek() == '^' && peek(1) == '^') {
        pos_ += 2;
        datatype = peek() == '<' ? iriref() : prefixed_name();
      } else if (peek() == '@') {
        throw UnsupportedFeature("language tag");
      }
      try {
        return rdf::Term::literal(std::move(lexical), std::move(datatype));
      } catch (const InvalidArgument& e) {
        fail(e.what());
      }
    }
    std::string lexical;
    if (peek() == '+' || peek() == '-') lexical += get();
    std::string_view datatype = rdf::vocab::xsd_integer;
    while (std::isdigit(static_cast<unsigned char>(peek()))) lexical += get();
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      lexical += get();
      while (std::isdigit(static_cast<unsigned char>(peek()))) lexical += get();
      datatype = rdf::vocab::xsd_decimal;
    }
    if (peek() == 'e' || peek() == 'E') {
      lexical += get();
      if (peek() == '+' || peek() == '-') lexical += get();
      while (std::isdigit(static_cast<unsigned char>(peek()))) lexical += get();
      datatype = rdf::vocab::xsd_double;
    }
    if (lexical.empty() || lexical == "+" || lexical == "-") fail("malformed number");
    return rdf::Term::literal(std::move(lexical), std::string(datatype));
  }

  std::optional<CompareOp> comparison_operator() {
    skip_ws();
    char c = peek();
    char n = peek(1);
    if (c == '<' && n == '=') return pos_ += 2, CompareOp::le;
    if (c == '>' && n == '=') return pos_ += 2, CompareOp::ge;
    if (c == '!' && n == '=') return pos_ += 2, CompareOp::ne;
    if (c == '<') return ++pos_, CompareOp::lt;
    if (c == '>') return ++pos_, CompareOp::gt;
    if (c == '=') return ++pos_, CompareOp::eq;
    return std::nullopt;
  }

  static CompareOp flipped(CompareOp op) {
    switch (op) {
      case CompareOp::lt: return CompareOp::gt;
      case CompareOp::le: return CompareOp::ge;
      case CompareOp::gt: return CompareOp::lt;
      case CompareOp::ge: return CompareOp::le;
      default: return op;
    }
  }

  void filter() {
    skip_ws();
    if (peek() != '(') {
      std::string fn;
      while (is_name_char(peek())) fn += get();
      throw UnsupportedFeature("FILTER function " + fn);
    }
    ++pos_;
    skip_ws();
    if (peek() == '(' || peek() == '!') throw UnsupportedFeature("compound FILTER expression");
    if (std::isalpha(static_cast<unsigned char>(peek())) && peek_keyword() != "TRUE" &&
        peek_keyword() != "FALSE") {
      std::size_t p = pos_;
      while (p < s_.size() && is_name_char(s_[p])) ++p;
      if (p < s_.size() && s_[p] == '(')
        throw UnsupportedFeature("FILTER function " + std::string(s_.substr(pos_, p - pos_)));
    }
    PatternTerm lhs = term(true);
    auto op = comparison_operator();
    if (!op) fail("expected comparison operator in FILTER");
    skip_ws();
    PatternTerm rhs = term(true);
    skip_ws();
    if ((peek() == '&' && peek(1) == '&') || (peek() == '|' && peek(1) == '|'))
      throw UnsupportedFeature("compound FILTER expression");
    expect(')');

    if (!is_var(lhs)) {
      if (!is_var(rhs)) fail("FILTER needs at least one variable");
      std::swap(lhs, rhs);
      *op = flipped(*op);
    }
    plan_.filters.push_back({std::get<Var>(lhs).name, *op, std::move(rhs)});
  }

  void solution_modifiers() {
    while (true) {
      skip_ws();
      if (done()) return;
      std::string kw = peek_keyword();
      if (kw == "LIMIT") {
        take_word();
        skip_ws();
        std::string digits;
        while (std::isdigit(static_cast<unsigned char>(peek()))) digits += get();
        if (digits.empty()) fail("LIMIT needs a non-negative integer");
        if (plan_.limit) fail("duplicate LIMIT");
        plan_.limit = std::stoull(digits);
        continue;
      }
      if (!kw.empty())
        if (const char* k = unsupported_keyword(kw, peek_keyword(1))) throw UnsupportedFeature(k);
      fail("unexpected text after WHERE clause");
    }
  }

  void finish() {
    auto vars = plan_.variables();
    auto known = [&](const std::string& v) {
      return std::find(vars.begin(), vars.end(), v) != vars.end();
    };
    if (plan_.patterns.empty()) fail("WHERE clause has no triple patterns");
    if (select_all_) plan_.select_vars = vars;
    for (const auto& v : plan_.select_vars)
      if (!known(v)) throw ParseError("SELECT variable ?" + v + " does not occur in any pattern");
    for (const auto& f : plan_.filters) {
      if (!known(f.variable))
        throw ParseError("FILTER variable ?" + f.variable + " does not occur in any pattern");
      if (auto* rhs = var_name(f.operand); rhs && !known(*rhs))
        throw ParseError("FILTER variable ?" + *rhs + " does not occur in any pattern");
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  QueryPlan plan_;
  bool select_all_ = false;
};

}  // namespace

bool is_var(const PatternTerm& t) { return std::holds_alternative<Var>(t); }

const std::string* var_name(const PatternTerm& t) {
  if (auto* v = std::get_if<Var>(&t)) return &v->name;
  return nullptr;
}

std::string to_string(const PatternTerm& t) {
  if (auto* v = std::get_if<Var>(&t)) return "?" + v->name;
  return std::get<rdf::Term>(t).to_ntriples();
}

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::lt: return "<";
    case CompareOp::le: return "<=";
    case CompareOp::gt: return ">";
    case CompareOp::ge: return ">=";
    case CompareOp::eq: return "=";
    case CompareOp::ne: return "!=";
  }
  return "?";
}

std::vector<std::string> QueryPlan::variables() const {
  std::vector<std::string> out;
  auto add = [&](const PatternTerm& t) {
    if (auto* n = var_name(t); n && std::find(out.begin(), out.end(), *n) == out.end())
      out.push_back(*n);
  };
  for (const auto& p : patterns) {
    add(p.subject);
    add(p.predicate);
    add(p.object);
  }
  return out;
}

std::optional<std::size_t> QueryPlan::slot_of(std::string_view name) const {
  auto vars = variables();
  auto it = std::find(vars.begin(), vars.end(), name);
  if (it == vars.end()) return std::nullopt;
  return static_cast<std::size_t>(it - vars.begin());
}

QueryPlan parse_query(std::string_view text) { return QueryParser(text).run(); }

}  // namespace ocep::query

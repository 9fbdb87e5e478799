#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "ocep/cep.hpp"
#include "ocep/error.hpp"

namespace ocep::cep {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

struct ParamInfo {
  Param param;
  std::string_view name;
  std::string_view range;
  std::initializer_list<std::string_view> aliases;
  std::initializer_list<std::string_view> units;  // lower case
};

const std::array<ParamInfo, kParamCount>& param_table() {
  static const std::array<ParamInfo, kParamCount> kTable{{
      {Param::hr, "hr", "HR", {"heartrate", "heart_rate"}, {"bpm", "beats/min"}},
      {Param::pulse, "pulse", "HR", {"pulserate", "pulse_rate"}, {"bpm", "beats/min"}},
      {Param::resp, "resp", "RR",
       {"rr", "respirationrate", "respiration_rate", "respiratoryrate", "respiration"},
       {"breaths/min", "/min", "brpm", "bpm"}},
      {Param::spo2, "spo2", "SpO2", {"oxygensaturation", "oxygen_saturation"}, {"%"}},
      {Param::pwv, "pwv", "PWV", {"pulsewavevelocity"}, {"m/s"}},
      {Param::prv, "prv", "PRV", {"pulseratevariability"}, {"ms"}},
      {Param::sbp, "sbp", "SBP", {"systolic"}, {"mmhg"}},
      {Param::dbp, "dbp", "DBP", {"diastolic"}, {"mmhg"}},
      {Param::hrv, "hrv", "HRV", {"heartratevariability"}, {"ms"}},
      {Param::pi, "pi", "PI", {"perfusionindex"}, {"%"}},
  }};
  return kTable;
}

const ParamInfo& info(Param p) { return param_table()[static_cast<std::size_t>(p)]; }

bool is_model_name(std::string_view name) {
  static const std::string_view kNames[] = {"constant", "step", "avg_confidence",
                                            "sma",      "wma",  "ewma"};
  return std::find(std::begin(kNames), std::end(kNames), lower(name)) != std::end(kNames);
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

class RuleParser {
public:
  explicit RuleParser(std::string_view text) : s_(text) {}

  Rule run() {
    Rule rule;
    rule.text = std::string(trim(s_));
    skip_ws();
    if (peek_word() == "rule") {
      take_word();
      skip_ws();
      std::string n;
      while (std::isdigit(static_cast<unsigned char>(peek()))) n += s_[pos_++];
      if (n.empty()) fail("expected rule number after 'Rule'");
      expect(':');
      rule.id = "R" + n;
    }
    expect_word("from");
    skip_ws();
    rule.source = identifier("stream name");
    maybe_window(rule);
    expect('[');
    condition(rule);
    expect(']');
    maybe_window(rule);
    expect_word("select");
    select_list(rule);
    expect_word("into");
    label(rule);
    skip_ws();
    if (peek() == ';') ++pos_;
    skip_ws();
    if (pos_ < s_.size()) fail("unexpected text after rule");
    return rule;
  }

private:
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError("column " + std::to_string(pos_ + 1) + ": " + message);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string peek_word() const {
    std::size_t p = pos_;
    while (p < s_.size() && std::isalpha(static_cast<unsigned char>(s_[p]))) ++p;
    return lower(s_.substr(pos_, p - pos_));
  }

  std::string take_word() {
    std::string w = peek_word();
    pos_ += w.size();
    return w;
  }

  void expect_word(std::string_view w) {
    skip_ws();
    if (peek_word() != w) fail("expected '" + std::string(w) + "'");
    take_word();
  }

  std::string identifier(std::string_view what) {
    std::size_t start = pos_;
    while (pos_ < s_.size() && is_ident_char(s_[pos_])) ++pos_;
    if (start == pos_) fail("expected " + std::string(what));
    return std::string(s_.substr(start, pos_ - start));
  }

  // Text up to the matching ')' of an already consumed '('.
  std::string_view parenthesized() {
    std::size_t depth = 1;
    std::size_t start = pos_;
    while (pos_ < s_.size()) {
      char c = s_[pos_++];
      if (c == '(') ++depth;
      if (c == ')' && --depth == 0) return s_.substr(start, pos_ - 1 - start);
    }
    fail("unbalanced parentheses");
  }

  void maybe_window(Rule& rule) {
    skip_ws();
    if (peek_word() != "window") return;
    if (rule.window) fail("duplicate window clause");
    take_word();
    expect('(');
    const std::size_t at = pos_;
    std::string_view body = parenthesized();
    try {
      rule.window = parse_window(body);
    } catch (const Error& e) {
      pos_ = at;
      fail(e.what());
    }
  }

  void condition(Rule& rule) {
    skip_ws();
    const std::size_t field_at = pos_;
    rule.condition.field = identifier("parameter name");
    auto param = find_param(rule.condition.field);
    if (!param) {
      pos_ = field_at;
      fail("unknown parameter '" + rule.condition.field + "'");
    }
    rule.condition.param = *param;

    skip_ws();
    const std::size_t op_at = pos_;
    std::string op;
    while (pos_ < s_.size() && std::string_view("<>=!~").find(s_[pos_]) != std::string_view::npos)
      op += s_[pos_++];
    if (op == "<") {
      rule.condition.op = Comparator::lt;
    } else if (op == ">") {
      rule.condition.op = Comparator::gt;
    } else if (op == "<=") {
      rule.condition.op = Comparator::le;
    } else if (op == ">=") {
      rule.condition.op = Comparator::ge;
    } else {
      pos_ = op_at;
      fail(op.empty() ? "expected comparator" : "unknown comparator '" + op + "'");
    }
    threshold(rule);
  }

  double number() {
    skip_ws();
    std::size_t start = pos_;
    if (peek() == '+' || peek() == '-') ++pos_;
    while (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.') ++pos_;
    double v = 0;
    const char* b = s_.data() + start;
    const char* e = s_.data() + pos_;
    auto res = std::from_chars(b + (*b == '+' ? 1 : 0), e, v);
    if (start == pos_ || res.ec != std::errc{} || res.ptr != e) {
      pos_ = start;
      fail("expected a number");
    }
    return v;
  }

  // Unit text up to `stop`, validated against the parameter.
  void unit(Rule& rule, char stop) {
    skip_ws();
    const std::size_t at = pos_;
    while (pos_ < s_.size() && s_[pos_] != stop) ++pos_;
    std::string u(trim(s_.substr(at, pos_ - at)));
    if (u.empty()) return;
    const auto& units = info(rule.condition.param).units;
    if (std::find(units.begin(), units.end(), lower(u)) == units.end()) {
      pos_ = at;
      fail("unit '" + u + "' does not fit " + rule.condition.field + " (expected " +
           std::string(*units.begin()) + ")");
    }
    rule.condition.unit = u;
  }

  void threshold(Rule& rule) {
    skip_ws();
    char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+') {
      rule.condition.threshold = number();
      unit(rule, ']');
      return;
    }
    const std::size_t name_at = pos_;
    std::string name = identifier("threshold");
    skip_ws();
    if (peek() != '(') {
      pos_ = name_at;
      fail("expected a number, 'name (value unit)' or a model such as ewma(n=5)");
    }
    ++pos_;
    if (is_model_name(name)) {
      std::string_view body = parenthesized();
      try {
        rule.condition.threshold = thresholds::parse_model(name + "(" + std::string(body) + ")");
      } catch (const Error& e) {
        pos_ = name_at;
        fail(e.what());
      }
      return;
    }
    rule.condition.threshold_name = name;
    rule.condition.threshold = number();
    unit(rule, ')');
    expect(')');
  }

  void select_list(Rule& rule) {
    while (true) {
      skip_ws();
      if (peek_word() == "insert") {
        take_word();
        break;
      }
      const std::size_t at = pos_;
      std::string field = identifier("select field or 'insert into'");
      std::string key = lower(field);
      if (!find_param(field) && key != "patientid" && key != "patient" && key != "ts" &&
          key != "timestamp") {
        pos_ = at;
        fail("unknown select field '" + field + "'");
      }
      rule.select.push_back(field);
      skip_ws();
      if (peek() == ',') ++pos_;
    }
    if (rule.select.empty()) fail("select needs at least one field");
  }

  void label(Rule& rule) {
    skip_ws();
    if (peek() == '(') {
      ++pos_;
      std::size_t start = pos_;
      while (pos_ < s_.size() && s_[pos_] != ')') ++pos_;
      if (pos_ >= s_.size()) fail("unterminated label");
      rule.label = std::string(trim(s_.substr(start, pos_ - start)));
      ++pos_;
    } else {
      rule.label = identifier("label");
    }
    if (rule.label.empty()) fail("empty label");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

std::int64_t parse_duration(std::string_view text) {
  text = trim(text);
  std::size_t i = 0;
  while (i < text.size() && (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.'))
    ++i;
  double v = 0;
  auto res = std::from_chars(text.data(), text.data() + i, v);
  if (i == 0 || res.ec != std::errc{} || res.ptr != text.data() + i)
    throw ParseError("bad duration '" + std::string(text) + "'");
  std::string u = lower(trim(text.substr(i)));
  double scale;
  if (u.empty() || u == "ms") {
    scale = 1;
  } else if (u == "s" || u == "sec") {
    scale = 1000;
  } else if (u == "min" || u == "m") {
    scale = 60000;
  } else {
    throw ParseError("unknown duration unit '" + u + "'");
  }
  return static_cast<std::int64_t>(std::llround(v * scale));
}

}  // namespace

std::string_view param_name(Param p) { return info(p).name; }

std::optional<Param> find_param(std::string_view name) {
  const std::string key = lower(name);
  for (const auto& i : param_table()) {
    if (key == i.name) return i.param;
    for (auto a : i.aliases)
      if (key == a) return i.param;
  }
  return std::nullopt;
}

const thresholds::ClinicalRange& range_of(Param p) { return thresholds::range_for(info(p).range); }

std::string_view to_string(Comparator c) {
  switch (c) {
    case Comparator::lt: return "<";
    case Comparator::gt: return ">";
    case Comparator::le: return "<=";
    case Comparator::ge: return ">=";
  }
  return "?";
}

bool holds(double value, Comparator c, double threshold) {
  switch (c) {
    case Comparator::lt: return value < threshold;
    case Comparator::gt: return value > threshold;
    case Comparator::le: return value <= threshold;
    case Comparator::ge: return value >= threshold;
  }
  return false;
}

void WindowSpec::validate() const {
  if (length_ms <= 0) throw InvalidArgument("window length must be positive");
  if (slide_ms <= 0 || slide_ms > length_ms)
    throw InvalidArgument("window slide must lie in (0, length]");
  if (kind == WindowKind::tumbling && slide_ms != length_ms)
    throw InvalidArgument("tumbling windows slide by their length");
}

WindowSpec WindowSpec::tumbling(std::int64_t length_ms) {
  WindowSpec w{WindowKind::tumbling, length_ms, length_ms};
  w.validate();
  return w;
}

WindowSpec WindowSpec::sliding(std::int64_t length_ms, std::int64_t slide_ms) {
  WindowSpec w{WindowKind::sliding, length_ms, slide_ms};
  w.validate();
  return w;
}

WindowSpec parse_window(std::string_view text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) parts.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) parts.push_back(std::move(cur));
  // Allow a unit separated from its number ("10 s").
  std::vector<std::string> merged;
  for (auto& p : parts) {
    if (!merged.empty() && !p.empty() && std::isalpha(static_cast<unsigned char>(p[0])) &&
        std::isdigit(static_cast<unsigned char>(merged.back().back())) && merged.size() > 1)
      merged.back() += p;
    else
      merged.push_back(p);
  }
  if (merged.empty()) throw ParseError("empty window spec");
  const std::string kind = lower(merged[0]);
  if (kind == "tumbling") {
    if (merged.size() != 2) throw ParseError("tumbling window takes one length");
    return WindowSpec::tumbling(parse_duration(merged[1]));
  }
  if (kind == "sliding") {
    if (merged.size() != 3) throw ParseError("sliding window takes a length and a slide");
    return WindowSpec::sliding(parse_duration(merged[1]), parse_duration(merged[2]));
  }
  throw ParseError("unknown window kind '" + merged[0] + "'");
}

std::string to_string(const WindowSpec& spec) {
  if (spec.kind == WindowKind::tumbling) return "tumbling " + std::to_string(spec.length_ms) + "ms";
  return "sliding " + std::to_string(spec.length_ms) + "ms " + std::to_string(spec.slide_ms) + "ms";
}

Rule parse_rule(std::string_view text) { return RuleParser(text).run(); }

std::vector<Rule> parse_rules(std::string_view text) {
  std::vector<Rule> out;
  std::string statement;
  std::size_t line = 1;
  std::size_t statement_line = 0;
  auto flush = [&] {
    if (trim(statement).empty()) {
      statement.clear();
      return;
    }
    try {
      out.push_back(parse_rule(statement));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), statement_line, std::string(trim(statement)));
    }
    statement.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == '#' || (c == '/' && i + 1 < text.size() && text[i + 1] == '/')) {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (c == '\n') ++line;
    if (!std::isspace(static_cast<unsigned char>(c)) && trim(statement).empty())
      statement_line = line;
    statement += c;
    ++i;
    if (c == ';') flush();
  }
  flush();
  return out;
}

}  // namespace ocep::cep

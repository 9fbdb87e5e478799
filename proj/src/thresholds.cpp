#include "ocep/thresholds.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>

#include "ocep/error.hpp"

namespace ocep::thresholds {

namespace {

std::span<const double> newest(std::span<const double> values, std::size_t p) {
  if (values.size() < p) throw InsufficientHistory(values.size(), p);
  return values.subspan(values.size() - p);
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void SampleHistory::push(std::int64_t tick, double value) {
  if (!ticks_.empty() && tick <= ticks_.back())
    throw OrderingError("sample tick " + std::to_string(tick) + " does not follow " +
                        std::to_string(ticks_.back()));
  ticks_.push_back(tick);
  values_.push_back(value);
}

SampleHistory::Sample SampleHistory::newest() const {
  if (values_.empty()) throw InsufficientHistory(0, 1);
  return {ticks_.back(), values_.back()};
}

double sma(std::span<const double> values, std::size_t p) {
  if (p < 1) throw InvalidArgument("sma window must be at least 1");
  auto w = newest(values, p);
  return std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(p);
}

double wma(std::span<const double> values, std::size_t p, WmaWeighting weighting) {
  const std::size_t offset = weighting == WmaWeighting::shifted ? 1 : 0;
  if (p < 2 - offset)
    throw InvalidArgument("wma window must be at least " + std::to_string(2 - offset));
  auto w = newest(values, p);
  double num = 0;
  double den = 0;
  // i = 1 is the newest sample.
  for (std::size_t i = 1; i <= p; ++i) {
    const double weight = static_cast<double>(p - i + offset);
    num += weight * w[p - i];
    den += weight;
  }
  return num / den;
}

double ewma_step(double previous, double current, double alpha) {
  if (!(alpha > 0 && alpha <= 1))
    throw InvalidArgument("ewma alpha must lie in (0, 1], got " + format_number(alpha));
  return alpha * current + (1 - alpha) * previous;
}

double alpha_from_n(std::size_t n) {
  if (n < 1) throw InvalidArgument("ewma n must be at least 1");
  return 2.0 / (static_cast<double>(n) + 1.0);
}

Ewma::Ewma(double alpha, std::optional<double> initial) : alpha_(alpha), value_(initial) {
  ewma_step(0, 0, alpha);  // validates alpha
}

double Ewma::update(double x) {
  value_ = value_ ? ewma_step(*value_, x, alpha_) : x;
  ++count_;
  return *value_;
}

double ewma(std::span<const double> values, double alpha, std::optional<double> initial) {
  Ewma acc(alpha, initial);
  for (double v : values) acc.update(v);
  if (!acc.value()) throw InsufficientHistory(0, 1);
  return *acc.value();
}

namespace {

void check_step(std::span<const double> boundaries, std::span<const double> values) {
  if (boundaries.size() < 2) throw InvalidArgument("step model needs at least two boundaries");
  if (values.size() != boundaries.size() - 1)
    throw InvalidArgument("step model needs exactly one value per interval");
  for (std::size_t i = 1; i < boundaries.size(); ++i)
    if (!(boundaries[i - 1] < boundaries[i]))
      throw InvalidArgument("step boundaries must be strictly increasing");
}

}  // namespace

double step_model(std::span<const double> boundaries, std::span<const double> values, double x) {
  check_step(boundaries, values);
  if (!(x >= boundaries.front() && x <= boundaries.back()))
    throw DomainError("step model argument " + format_number(x) + " outside [" +
                      format_number(boundaries.front()) + ", " + format_number(boundaries.back()) +
                      "]");
  // First boundary strictly greater than x closes x's interval.
  auto it = std::upper_bound(boundaries.begin(), boundaries.end(), x);
  std::size_t k = static_cast<std::size_t>(it - boundaries.begin());
  if (k == boundaries.size()) k = boundaries.size() - 1;  // x == last boundary
  return values[k - 1];
}

double avg_confidence(std::span<const double> values, std::size_t p, double z) {
  if (p < 2) throw InvalidArgument("avg_confidence window must be at least 2");
  auto w = newest(values, p);
  const double n = static_cast<double>(p);
  const double mean = std::accumulate(w.begin(), w.end(), 0.0) / n;
  double ss = 0;
  for (double v : w) ss += (v - mean) * (v - mean);
  const double s = std::sqrt(ss / (n - 1));
  return mean + z * s / std::sqrt(n);
}

// ---- model configuration ----------------------------------------------------

void validate(const ThresholdModel& model) {
  std::visit(
      [](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Constant>) {
          if (!std::isfinite(m.c)) throw InvalidArgument("constant threshold must be finite");
        } else if constexpr (std::is_same_v<M, Step>) {
          check_step(m.boundaries, m.values);
        } else if constexpr (std::is_same_v<M, AvgConfidence>) {
          if (m.p < 2) throw InvalidArgument("avg_confidence p must be at least 2");
        } else if constexpr (std::is_same_v<M, Sma>) {
          if (m.p < 1) throw InvalidArgument("sma p must be at least 1");
        } else if constexpr (std::is_same_v<M, Wma>) {
          if (m.p < (m.weighting == WmaWeighting::shifted ? 1u : 2u))
            throw InvalidArgument("wma p too small for its weighting");
        } else {
          ewma_step(0, 0, m.alpha);
        }
      },
      model);
}

namespace {

double parse_double(const std::string& key, std::string_view text) {
  double v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || !std::isfinite(v))
    throw ParseError("'" + key + "' expects a number, got '" + std::string(text) + "'");
  return v;
}

std::size_t parse_count(const std::string& key, std::string_view text) {
  std::size_t v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw ParseError("'" + key + "' expects a non-negative integer, got '" + std::string(text) +
                     "'");
  return v;
}

std::vector<double> parse_list(const std::string& key, std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    out.push_back(parse_double(key, text.substr(start, end - start)));
    start = end + 1;
  }
  return out;
}

// key=value pairs; the call form `name(k=v, k=v)` is rewritten first.
std::map<std::string, std::string> split_pairs(std::string_view text) {
  std::string normalized;
  if (auto open = text.find('('); open != std::string_view::npos) {
    auto close = text.rfind(')');
    if (close == std::string_view::npos || close < open)
      throw ParseError("unbalanced parentheses in model '" + std::string(text) + "'");
    for (char c : text.substr(close + 1))
      if (!std::isspace(static_cast<unsigned char>(c)))
        throw ParseError("unexpected text after model call '" + std::string(text) + "'");
    normalized = "model=" + std::string(text.substr(0, open)) + " ";
    for (char c : text.substr(open + 1, close - open - 1)) normalized += c == ',' ? ' ' : c;
    // Lists inside a call use ';' ("step(boundaries=0;10;20 values=1;2)").
    for (auto& c : normalized)
      if (c == ';') c = ',';
  } else {
    normalized = std::string(text);
  }

  std::map<std::string, std::string> out;
  std::size_t i = 0;
  while (i < normalized.size()) {
    while (i < normalized.size() && std::isspace(static_cast<unsigned char>(normalized[i]))) ++i;
    if (i >= normalized.size()) break;
    std::size_t start = i;
    while (i < normalized.size() && !std::isspace(static_cast<unsigned char>(normalized[i]))) ++i;
    std::string token = normalized.substr(start, i - start);
    auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == token.size())
      throw ParseError("expected key=value, got '" + token + "'");
    std::string key = lower(token.substr(0, eq));
    if (!out.emplace(key, token.substr(eq + 1)).second)
      throw ParseError("duplicate key '" + key + "'");
  }
  return out;
}

}  // namespace

ThresholdModel parse_model(std::string_view text) {
  auto pairs = split_pairs(text);
  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = pairs.find(key);
    if (it == pairs.end()) return std::nullopt;
    std::string v = it->second;
    pairs.erase(it);
    return v;
  };
  auto need = [&](const std::string& key, const std::string& model) {
    auto v = take(key);
    if (!v) throw ParseError("model " + model + " requires '" + key + "'");
    return *v;
  };

  auto name_opt = take("model");
  if (!name_opt) throw ParseError("missing 'model' key in '" + std::string(text) + "'");
  const std::string name = lower(*name_opt);

  ThresholdModel model;
  if (name == "constant") {
    model = Constant{parse_double("c", need("c", name))};
  } else if (name == "step") {
    model = Step{parse_list("boundaries", need("boundaries", name)),
                 parse_list("values", need("values", name))};
  } else if (name == "avg_confidence") {
    model = AvgConfidence{parse_count("p", need("p", name)), parse_double("z", need("z", name))};
  } else if (name == "sma") {
    model = Sma{parse_count("p", need("p", name))};
  } else if (name == "wma") {
    Wma w{parse_count("p", need("p", name))};
    if (auto weighting = take("weighting")) {
      if (*weighting == "zero_oldest") {
        w.weighting = WmaWeighting::zero_oldest;
      } else if (*weighting == "shifted") {
        w.weighting = WmaWeighting::shifted;
      } else {
        throw ParseError("wma weighting must be zero_oldest or shifted, got '" + *weighting + "'");
      }
    }
    model = w;
  } else if (name == "ewma") {
    EwmaModel e{};
    auto n = take("n");
    auto alpha = take("alpha");
    if (n && alpha) throw ParseError("ewma takes either n or alpha, not both");
    if (n) {
      e.n = parse_count("n", *n);
      e.alpha = alpha_from_n(*e.n);
    } else if (alpha) {
      e.alpha = parse_double("alpha", *alpha);
    } else {
      throw ParseError("model ewma requires 'n' or 'alpha'");
    }
    if (auto initial = take("initial"); initial && *initial != "first")
      e.initial = parse_double("initial", *initial);
    model = e;
  } else {
    throw ParseError("unknown threshold model '" + *name_opt + "'");
  }
  if (!pairs.empty())
    throw ParseError("unknown key '" + pairs.begin()->first + "' for model " + name);
  validate(model);
  return model;
}

namespace {

std::string join(const std::vector<double>& xs, char sep) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += format_number(xs[i]);
  }
  return out;
}

}  // namespace

std::string to_string(const ThresholdModel& model) {
  return std::visit(
      [](const auto& m) -> std::string {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Constant>) {
          return "model=constant c=" + format_number(m.c);
        } else if constexpr (std::is_same_v<M, Step>) {
          return "model=step boundaries=" + join(m.boundaries, ',') +
                 " values=" + join(m.values, ',');
        } else if constexpr (std::is_same_v<M, AvgConfidence>) {
          return "model=avg_confidence p=" + std::to_string(m.p) + " z=" + format_number(m.z);
        } else if constexpr (std::is_same_v<M, Sma>) {
          return "model=sma p=" + std::to_string(m.p);
        } else if constexpr (std::is_same_v<M, Wma>) {
          return "model=wma p=" + std::to_string(m.p) + " weighting=" +
                 (m.weighting == WmaWeighting::shifted ? "shifted" : "zero_oldest");
        } else {
          std::string out = "model=ewma ";
          out += m.n ? "n=" + std::to_string(*m.n) : "alpha=" + format_number(m.alpha);
          out += " initial=" + (m.initial ? format_number(*m.initial) : std::string("first"));
          return out;
        }
      },
      model);
}

std::string describe(const ThresholdModel& model) {
  return std::visit(
      [](const auto& m) -> std::string {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Constant>) {
          return format_number(m.c);
        } else if constexpr (std::is_same_v<M, Step>) {
          return "step(boundaries=" + join(m.boundaries, ';') + ", values=" + join(m.values, ';') +
                 ")";
        } else if constexpr (std::is_same_v<M, AvgConfidence>) {
          return "avg_confidence(p=" + std::to_string(m.p) + ", z=" + format_number(m.z) + ")";
        } else if constexpr (std::is_same_v<M, Sma>) {
          return "sma(p=" + std::to_string(m.p) + ")";
        } else if constexpr (std::is_same_v<M, Wma>) {
          return "wma(p=" + std::to_string(m.p) +
                 (m.weighting == WmaWeighting::shifted ? ", weighting=shifted)" : ")");
        } else {
          std::string out = "ewma(";
          out += m.n ? "n=" + std::to_string(*m.n) : "alpha=" + format_number(m.alpha);
          if (m.initial) out += ", initial=" + format_number(*m.initial);
          return out + ")";
        }
      },
      model);
}

std::size_t required_history(const ThresholdModel& model) {
  return std::visit(
      [](const auto& m) -> std::size_t {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Constant> || std::is_same_v<M, Step>) {
          return 0;
        } else if constexpr (std::is_same_v<M, EwmaModel>) {
          return m.initial ? 0 : 1;
        } else {
          return m.p;
        }
      },
      model);
}

double evaluate(const ThresholdModel& model, std::span<const double> history, double x) {
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Constant>) {
          return m.c;
        } else if constexpr (std::is_same_v<M, Step>) {
          return step_model(m.boundaries, m.values, x);
        } else if constexpr (std::is_same_v<M, AvgConfidence>) {
          return avg_confidence(history, m.p, m.z);
        } else if constexpr (std::is_same_v<M, Sma>) {
          return sma(history, m.p);
        } else if constexpr (std::is_same_v<M, Wma>) {
          return wma(history, m.p, m.weighting);
        } else {
          return ewma(history, m.alpha, m.initial);
        }
      },
      model);
}

// ---- clinical ranges ----------------------------------------------------------

std::string_view to_string(RiskLevel level) {
  switch (level) {
    case RiskLevel::low: return "low";
    case RiskLevel::moderate: return "moderate";
    case RiskLevel::high: return "high";
  }
  return "?";
}

Interval ClinicalRange::normal() const {
  if (rising) return {-INFINITY, normal_limit, false, true};
  return {normal_limit, INFINITY, true, false};
}

Interval ClinicalRange::moderate() const {
  if (rising) return {normal_limit, moderate_limit, false, true};
  return {moderate_limit, normal_limit, true, false};
}

Interval ClinicalRange::high() const {
  if (rising) return {moderate_limit, INFINITY, false, false};
  return {-INFINITY, moderate_limit, false, false};
}

std::span<const ClinicalRange> clinical_ranges() {
  static const std::array<ClinicalRange, 9> kRanges{{
      {"HR", "BPM", true, 100, 120},
      {"SpO2", "%", false, 95, 90},
      {"PWV", "m/s", true, 9, 12},
      {"PRV", "ms", false, 50, 30},
      {"RR", "breaths/min", true, 20, 24},
      {"SBP", "mmHg", true, 120, 140},
      {"DBP", "mmHg", true, 80, 90},
      {"HRV", "ms", false, 50, 30},
      {"PI", "%", false, 2, 0.5},
  }};
  return kRanges;
}

const ClinicalRange& range_for(std::string_view parameter) {
  static const std::map<std::string, std::string> kAliases{
      {"heartrate", "hr"},         {"heart_rate", "hr"},   {"pulse", "hr"},
      {"resp", "rr"},              {"respirationrate", "rr"},
      {"respiration_rate", "rr"},  {"oxygensaturation", "spo2"},
      {"oxygen_saturation", "spo2"}};
  std::string key = lower(parameter);
  if (auto it = kAliases.find(key); it != kAliases.end()) key = it->second;
  for (const auto& r : clinical_ranges())
    if (lower(r.parameter) == key) return r;
  throw InvalidArgument("no clinical range for parameter '" + std::string(parameter) + "'");
}

RiskLevel classify(const ClinicalRange& range, double value) {
  if (std::isnan(value)) throw DomainError("cannot classify NaN for " + range.parameter);
  if (range.normal().contains(value)) return RiskLevel::low;
  if (range.moderate().contains(value)) return RiskLevel::moderate;
  return RiskLevel::high;
}

RiskLevel classify(std::string_view parameter, double value) {
  return classify(range_for(parameter), value);
}

}  // namespace ocep::thresholds

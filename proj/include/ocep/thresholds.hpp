#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ocep::thresholds {

/// Samples of one parameter, oldest first. Ticks must strictly increase.
class SampleHistory {
public:
  struct Sample {
    std::int64_t tick;
    double value;
  };

  /// Throws OrderingError when tick does not exceed the newest tick.
  void push(std::int64_t tick, double value);
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const std::int64_t> ticks() const noexcept { return ticks_; }
  Sample newest() const;

private:
  std::vector<std::int64_t> ticks_;
  std::vector<double> values_;
};

// All window functions read the newest p entries of `values` (newest last)
// and throw InsufficientHistory when fewer are available.

double sma(std::span<const double> values, std::size_t p);

/// Weighting used by wma. `zero_oldest` gives the newest sample weight p-1
/// and the oldest weight 0; `shifted` uses p..1 instead.
enum class WmaWeighting { zero_oldest, shifted };

/// `zero_oldest` requires p >= 2 (the weights sum to zero at p = 1).
double wma(std::span<const double> values, std::size_t p,
           WmaWeighting weighting = WmaWeighting::zero_oldest);

/// alpha*current + (1-alpha)*previous; alpha must lie in (0, 1].
double ewma_step(double previous, double current, double alpha);

/// 2/(n+1); n >= 1.
double alpha_from_n(std::size_t n);

/// Incremental EWMA for one stream. Starts at `initial`, or at the first
/// observation when none is given.
class Ewma {
public:
  explicit Ewma(double alpha, std::optional<double> initial = std::nullopt);

  double update(double x);
  /// nullopt before the first update when no initial value was given.
  std::optional<double> value() const noexcept { return value_; }
  std::size_t count() const noexcept { return count_; }
  double alpha() const noexcept { return alpha_; }

private:
  double alpha_;
  std::optional<double> value_;
  std::size_t count_ = 0;
};

/// EWMA over a whole series (oldest first). Throws InsufficientHistory on
/// an empty series without an initial value.
double ewma(std::span<const double> values, double alpha,
            std::optional<double> initial = std::nullopt);

/// Piecewise constant: values[k] on [b[k], b[k+1]), last interval closed.
/// Throws InvalidArgument for malformed boundaries and DomainError when x
/// is outside [b.front(), b.back()].
double step_model(std::span<const double> boundaries, std::span<const double> values, double x);

/// mean + z * s / sqrt(p) over the newest p values, s the sample standard
/// deviation. p >= 2.
double avg_confidence(std::span<const double> values, std::size_t p, double z);

// ---- model configuration ----------------------------------------------------

struct Constant {
  double c;
};
struct Step {
  std::vector<double> boundaries;
  std::vector<double> values;
};
struct AvgConfidence {
  std::size_t p;
  double z;
};
struct Sma {
  std::size_t p;
};
struct Wma {
  std::size_t p;
  WmaWeighting weighting = WmaWeighting::zero_oldest;
};
struct EwmaModel {
  double alpha;
  /// Set when configured through n; kept for printing.
  std::optional<std::size_t> n;
  /// nullopt starts from the first observation.
  std::optional<double> initial;
};

using ThresholdModel = std::variant<Constant, Step, AvgConfidence, Sma, Wma, EwmaModel>;

/// Throws InvalidArgument when the parameters violate the model's
/// constraints (p >= 1, wma p >= 2, 0 < alpha <= 1, step shape).
void validate(const ThresholdModel& model);

/// Parses `model=ewma n=5 initial=first` (key=value pairs separated by
/// whitespace) or the call form `ewma(n=5)`. Keys per model:
///   constant c | step boundaries=a,b,.. values=v,..
///   avg_confidence p z | sma p | wma p [weighting=zero_oldest|shifted]
///   ewma (n | alpha) [initial=first|<number>]
/// Throws ParseError on unknown models or keys, InvalidArgument on
/// out-of-range values.
ThresholdModel parse_model(std::string_view text);

/// Key-value form accepted by parse_model.
std::string to_string(const ThresholdModel& model);
/// Short form such as `ewma(n=5)` for messages and event output.
std::string describe(const ThresholdModel& model);

/// History length the model needs before it yields a value (0 for
/// constant and step).
std::size_t required_history(const ThresholdModel& model);

/// Threshold from a value history (oldest first). `x` is the step model's
/// argument and is ignored by the other models.
double evaluate(const ThresholdModel& model, std::span<const double> history, double x = 0);

// ---- clinical ranges ----------------------------------------------------------

enum class RiskLevel { low = 0, moderate = 1, high = 2 };

std::string_view to_string(RiskLevel level);

struct Interval {
  double lo;
  double hi;
  bool lo_closed = true;
  bool hi_closed = true;
  bool contains(double x) const {
    return (lo_closed ? x >= lo : x > lo) && (hi_closed ? x <= hi : x < hi);
  }
};

/// One row of the clinical reference table. `rising` parameters become
/// riskier as they increase (HR); the others as they decrease (SpO2).
/// Values beyond the normal range in the safe direction classify low.
struct ClinicalRange {
  std::string parameter;
  std::string unit;
  bool rising;
  double normal_limit;    // last value still normal
  double moderate_limit;  // last value still moderate

  Interval normal() const;
  Interval moderate() const;
  Interval high() const;
};

/// HR, SpO2, PWV, PRV, RR, SBP, DBP, HRV, PI.
std::span<const ClinicalRange> clinical_ranges();

/// Case-insensitive lookup by parameter name or a common alias
/// (heartRate, RESP, respirationRate, oxygenSaturation). Throws
/// InvalidArgument naming the parameter when unknown.
const ClinicalRange& range_for(std::string_view parameter);

/// Boundary values resolve toward the less severe class.
RiskLevel classify(const ClinicalRange& range, double value);
RiskLevel classify(std::string_view parameter, double value);

}  // namespace ocep::thresholds

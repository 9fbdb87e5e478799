#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "ocep/rdf/triple_store.hpp"
#include "ocep/thresholds.hpp"

namespace ocep::cep {

/// Event schema. The first four come from the PPG monitor; the rest are
/// optional extended parameters with clinical ranges.
enum class Param : std::size_t { hr, pulse, resp, spo2, pwv, prv, sbp, dbp, hrv, pi };
inline constexpr std::size_t kParamCount = 10;

/// Canonical field name ("hr", "spo2", ...).
std::string_view param_name(Param p);
/// Accepts canonical names and the long forms used in rule text
/// (heartRate, respirationRate, oxygenSaturation, SpO2, ...).
std::optional<Param> find_param(std::string_view name);
/// Clinical range used for classification of the parameter.
const thresholds::ClinicalRange& range_of(Param p);

struct VitalEvent {
  std::int64_t ts = 0;  // milliseconds
  std::string patient;
  std::array<std::optional<double>, kParamCount> values{};

  std::optional<double>& operator[](Param p) { return values[static_cast<std::size_t>(p)]; }
  const std::optional<double>& operator[](Param p) const {
    return values[static_cast<std::size_t>(p)];
  }
  friend bool operator==(const VitalEvent&, const VitalEvent&) = default;
};

enum class Comparator { lt, gt, le, ge };
std::string_view to_string(Comparator c);
bool holds(double value, Comparator c, double threshold);

enum class WindowKind { tumbling, sliding };

struct WindowSpec {
  WindowKind kind = WindowKind::tumbling;
  std::int64_t length_ms = 0;
  /// Equals length_ms for tumbling windows.
  std::int64_t slide_ms = 0;

  /// Throws InvalidArgument unless length > 0 and 0 < slide <= length.
  void validate() const;
  static WindowSpec tumbling(std::int64_t length_ms);
  static WindowSpec sliding(std::int64_t length_ms, std::int64_t slide_ms);
  friend bool operator==(const WindowSpec&, const WindowSpec&) = default;
};

/// Parses "tumbling 10s", "sliding 10s 5s" (',' separators and the units
/// ms, s, min allowed; a bare number is milliseconds).
WindowSpec parse_window(std::string_view text);
std::string to_string(const WindowSpec& spec);

using Threshold = std::variant<double, thresholds::ThresholdModel>;

struct Condition {
  Param param;
  std::string field;  // as written in the rule
  Comparator op;
  Threshold threshold;
  /// Name in `heartRate_threshold (100 BPM)`, unit if one was given.
  std::string threshold_name;
  std::string unit;
};

struct Rule {
  /// "R<n>" when the text starts with `Rule <n>:`; otherwise assigned on
  /// deployment.
  std::string id;
  std::string source;
  Condition condition;
  std::vector<std::string> select;
  std::string label;
  /// With a window the condition compares the window mean of the
  /// parameter (current tumbling bucket, or trailing sliding interval).
  std::optional<WindowSpec> window;
  std::string text;
};

/// `[Rule n:] from <Stream> [window(<spec>)] [ <param> <op> <threshold> ]
///  [window(<spec>)] select <f>, ... insert into (<Label>);`
/// Threshold: `100`, `100 BPM`, `name (100 BPM)` or a model call such as
/// `ewma(n=5)`. Units are checked against the parameter.
/// Throws ParseError with the column of the offending token.
Rule parse_rule(std::string_view text);

/// One rule per `;`-terminated statement; `#` and `//` start comments.
std::vector<Rule> parse_rules(std::string_view text);

struct DerivedEvent {
  std::int64_t ts = 0;
  std::string patient;
  std::string label;
  std::string rule_id;
  /// Compared value (window mean for windowed rules) and threshold used.
  double value = 0;
  double threshold = 0;
  /// Selected fields rendered as text, in select order.
  std::vector<std::pair<std::string, std::string>> selected;

  friend bool operator==(const DerivedEvent&, const DerivedEvent&) = default;
};

struct DeployResult {
  std::string id;
  double latency_seconds;
};

/// Rule evaluation engine. Deployed rules live in an immutable snapshot
/// that deploy() replaces under a mutex, so each event is evaluated
/// against exactly one rule set. Ingestion is serialized; deploy() may be
/// called from other threads at any time.
class Engine {
public:
  Engine() = default;
  explicit Engine(std::span<const Rule> rules);

  /// Throws InvalidArgument when the id is already deployed; the engine
  /// is unchanged in that case.
  DeployResult deploy(Rule rule);
  bool undeploy(std::string_view id);
  std::vector<Rule> rules() const;
  std::size_t rule_count() const;

  /// Every rule whose condition holds fires once. Throws OrderingError if
  /// ts precedes the patient's previous event. `stream` restricts
  /// evaluation to rules whose source matches; empty means all rules.
  std::vector<DerivedEvent> ingest(const VitalEvent& event, std::string_view stream = {});

  std::size_t events_processed() const;

private:
  struct EwmaCache {
    thresholds::Ewma acc;
    std::size_t consumed = 0;
  };
  struct PatientState {
    std::int64_t last_ts = 0;
    bool seen = false;
    std::array<std::vector<double>, kParamCount> history;
    std::array<std::vector<std::int64_t>, kParamCount> history_ts;
    std::map<std::string, EwmaCache> ewma;
  };
  using RuleSet = std::vector<Rule>;

  std::shared_ptr<const RuleSet> snapshot() const;
  std::optional<double> observed(const Rule& rule, const PatientState& state,
                                 const VitalEvent& event) const;
  std::optional<double> threshold_for(const Rule& rule, PatientState& state) const;

  mutable std::mutex rules_mutex_;
  std::shared_ptr<const RuleSet> rules_ = std::make_shared<RuleSet>();
  std::size_t next_id_ = 1;

  mutable std::mutex ingest_mutex_;
  std::unordered_map<std::string, PatientState> patients_;
  std::size_t processed_ = 0;
};

/// Windowed AND over derived streams: emits `label` for a patient when
/// events labelled `first` and `second` occur within `within_ms` of each
/// other. Each arrival pairs with the latest event of the other label.
class Correlator {
public:
  Correlator(std::string first, std::string second, std::int64_t within_ms, std::string label);
  std::optional<DerivedEvent> push(const DerivedEvent& event);

private:
  std::string first_;
  std::string second_;
  std::int64_t within_ms_;
  std::string label_;
  std::map<std::string, std::int64_t> last_first_;
  std::map<std::string, std::int64_t> last_second_;
};

// ---- windows ----------------------------------------------------------------

struct WindowRow {
  std::int64_t start_ms;
  std::int64_t end_ms;
  std::size_t events;
  std::size_t derived;
  double processing_seconds;
  /// False for trailing windows that extend past the end of the stream.
  bool complete;
};

/// Runs the events through a fresh engine with `rules` and reports per
/// window. Windows start at multiples of the slide from the first event's
/// bucket; the stream ends at the first multiple of the slide after the
/// last event.
std::vector<WindowRow> window_stats(std::span<const VitalEvent> events, const WindowSpec& spec,
                                    std::span<const Rule> rules);
std::string window_csv(std::span<const WindowRow> rows);

// ---- cohort -------------------------------------------------------------------

struct PatientStream {
  std::string id;
  std::vector<VitalEvent> events;
  /// Ground truth: true for diseased. nullopt is excluded from accuracy.
  std::optional<bool> diseased;
};

enum class Outcome { diseased, disease_free, undetected };
std::string_view to_string(Outcome o);

struct PatientOutcome {
  std::string patient;
  Outcome outcome;
  /// Labels of qualifying firings with the worst band of their values.
  std::map<std::string, thresholds::RiskLevel> labels;
  /// Worst clinical band seen on any event and parameter.
  thresholds::RiskLevel risk;
  std::optional<bool> correct;
};

struct CohortReport {
  std::vector<PatientOutcome> patients;
  std::size_t diseased = 0;
  std::size_t disease_free = 0;
  std::size_t undetected = 0;
  std::size_t correct = 0;
  std::size_t labelled = 0;

  double accuracy() const;
  /// Patients per label and risk band.
  std::map<std::string, std::array<std::size_t, 3>> risk_distribution() const;
  std::string to_csv() const;
  std::string risk_csv() const;
  std::string summary() const;
};

/// A patient is diseased when some rule fires on a value in the moderate
/// or high band of its parameter, disease-free when every event is in the
/// normal band for every parameter present, and undetected otherwise.
/// Throws InvalidArgument for an empty cohort or a patient without events.
CohortReport classify_cohort(std::span<const PatientStream> patients, std::span<const Rule> rules);

struct CohortRecipe {
  std::size_t diseased = 60;
  std::size_t disease_free = 9;
  /// Out-of-normal values no rule covers; labelled diseased.
  std::size_t borderline = 12;
  std::size_t events_per_patient = 30;
  std::uint64_t seed = 42;
};

/// Synthetic cohort with the recipe's composition, patients shuffled.
std::vector<PatientStream> build_cohort(const CohortRecipe& recipe);

/// Rules 1-3 plus hypoxemia (spo2 < 90) and tachypnea (resp > 24).
std::vector<Rule> default_rules();

// ---- output -------------------------------------------------------------------

/// Subject IRI `<ns>Event_<patient>_<ts>_<rule>`.
std::string event_iri(const DerivedEvent& e, std::string_view ns);

/// rdf:type DetectedEvent, hasLabel, hasTimestamp, triggeredBy per event.
std::vector<rdf::Triple> emit_rdf(std::span<const DerivedEvent> events,
                                  std::string_view namespace_iri);

/// Newline-delimited JSON with fields ts, patient and the parameter names.
/// Throws ParseError with the line number on bad input.
std::vector<VitalEvent> read_events(std::istream& in);
std::vector<VitalEvent> parse_events(std::string_view text);
void write_events(std::ostream& out, std::span<const VitalEvent> events);
void write_derived(std::ostream& out, std::span<const DerivedEvent> events);

/// Flattened cohort events ordered by (ts, patient).
std::vector<VitalEvent> flatten(std::span<const PatientStream> patients);

// ---- deployment under load ------------------------------------------------------

struct DeployMeasurement {
  std::string rule;
  std::size_t load_eps;
  double deploy_seconds;
  /// Probe event after deployment fired the rule.
  bool active;
  /// Events ingested by the load generator while the tier ran.
  std::size_t background_events;
};

struct LoadOptions {
  /// Background time before each deployment.
  std::chrono::milliseconds warmup{50};
  std::uint64_t seed = 7;
};

/// For each tier a fresh engine ingests synthetic events at the tier's
/// rate on a background thread while every rule is deployed in turn.
std::vector<DeployMeasurement> measure_deployments(std::span<const Rule> rules,
                                                   std::span<const std::size_t> tiers,
                                                   const LoadOptions& options = {});

/// `rule,load_eps,deploy_seconds`.
std::string deployment_csv(std::span<const DeployMeasurement> rows);
/// Pivot with one row per rule and one column per tier.
std::string deployment_table(std::span<const DeployMeasurement> rows);

}  // namespace ocep::cep

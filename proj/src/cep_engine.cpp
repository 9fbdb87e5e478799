#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include <nlohmann/json.hpp>

#include "ocep/cep.hpp"
#include "ocep/error.hpp"
#include "ocep/random.hpp"

namespace ocep::cep {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::string format_number(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) return std::to_string(static_cast<long long>(v));
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

// ---- engine -------------------------------------------------------------------

Engine::Engine(std::span<const Rule> rules) {
  for (const auto& r : rules) deploy(r);
}

std::shared_ptr<const Engine::RuleSet> Engine::snapshot() const {
  std::lock_guard lock(rules_mutex_);
  return rules_;
}

DeployResult Engine::deploy(Rule rule) {
  const auto t0 = Clock::now();
  if (rule.window) rule.window->validate();
  if (auto* model = std::get_if<thresholds::ThresholdModel>(&rule.condition.threshold))
    thresholds::validate(*model);

  std::lock_guard lock(rules_mutex_);
  auto exists = [&](const std::string& id) {
    return std::any_of(rules_->begin(), rules_->end(),
                       [&](const Rule& r) { return r.id == id; });
  };
  if (rule.id.empty()) {
    while (exists("R" + std::to_string(next_id_))) ++next_id_;
    rule.id = "R" + std::to_string(next_id_++);
  } else if (exists(rule.id)) {
    throw InvalidArgument("rule " + rule.id + " is already deployed");
  }
  auto next = std::make_shared<RuleSet>(*rules_);
  next->push_back(std::move(rule));
  const std::string id = next->back().id;
  rules_ = std::move(next);
  return {id, std::chrono::duration<double>(Clock::now() - t0).count()};
}

bool Engine::undeploy(std::string_view id) {
  std::lock_guard lock(rules_mutex_);
  auto next = std::make_shared<RuleSet>(*rules_);
  auto removed = std::erase_if(*next, [&](const Rule& r) { return r.id == id; });
  if (removed == 0) return false;
  rules_ = std::move(next);
  return true;
}

std::vector<Rule> Engine::rules() const { return *snapshot(); }

std::size_t Engine::rule_count() const { return snapshot()->size(); }

std::size_t Engine::events_processed() const {
  std::lock_guard lock(ingest_mutex_);
  return processed_;
}

std::optional<double> Engine::observed(const Rule& rule, const PatientState& state,
                                       const VitalEvent& event) const {
  const Param p = rule.condition.param;
  const auto& current = event[p];
  if (!current) return std::nullopt;
  if (!rule.window) return *current;

  const auto k = static_cast<std::size_t>(p);
  const auto& ts = state.history_ts[k];
  const auto& vs = state.history[k];
  std::int64_t from;
  if (rule.window->kind == WindowKind::tumbling) {
    from = floor_div(event.ts, rule.window->length_ms) * rule.window->length_ms;  // inclusive
  } else {
    from = event.ts - rule.window->length_ms + 1;  // trailing (ts - length, ts]
  }
  auto it = std::lower_bound(ts.begin(), ts.end(), from);
  double sum = *current;
  std::size_t n = 1;
  for (auto i = static_cast<std::size_t>(it - ts.begin()); i < vs.size(); ++i) {
    sum += vs[i];
    ++n;
  }
  return sum / static_cast<double>(n);
}

std::optional<double> Engine::threshold_for(const Rule& rule, PatientState& state) const {
  if (auto* c = std::get_if<double>(&rule.condition.threshold)) return *c;
  const auto& model = std::get<thresholds::ThresholdModel>(rule.condition.threshold);
  const auto& history = state.history[static_cast<std::size_t>(rule.condition.param)];
  if (history.size() < thresholds::required_history(model)) return std::nullopt;

  if (auto* e = std::get_if<thresholds::EwmaModel>(&model)) {
    // Incremental: the cache has consumed a prefix of the history.
    const std::string key = std::string(param_name(rule.condition.param)) + "|" +
                            thresholds::to_string(model);
    auto it = state.ewma.find(key);
    if (it == state.ewma.end())
      it = state.ewma.emplace(key, EwmaCache{thresholds::Ewma(e->alpha, e->initial), 0}).first;
    auto& cache = it->second;
    for (; cache.consumed < history.size(); ++cache.consumed)
      cache.acc.update(history[cache.consumed]);
    return cache.acc.value();
  }
  try {
    // Step models are indexed by the previous sample's time; others ignore x.
    const auto& ts = state.history_ts[static_cast<std::size_t>(rule.condition.param)];
    return thresholds::evaluate(model, history,
                                ts.empty() ? 0.0 : static_cast<double>(ts.back()));
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

std::vector<DerivedEvent> Engine::ingest(const VitalEvent& event, std::string_view stream) {
  std::lock_guard lock(ingest_mutex_);
  // The rule set is fixed for the whole event.
  const auto rules = snapshot();

  PatientState& state = patients_[event.patient];
  if (state.seen && event.ts < state.last_ts)
    throw OrderingError("event for patient " + event.patient + " at " + std::to_string(event.ts) +
                        " precedes " + std::to_string(state.last_ts));

  std::vector<DerivedEvent> out;
  for (const auto& rule : *rules) {
    if (!stream.empty() && !iequals(rule.source, stream)) continue;
    auto value = observed(rule, state, event);
    if (!value) continue;
    auto threshold = threshold_for(rule, state);
    if (!threshold || !holds(*value, rule.condition.op, *threshold)) continue;

    DerivedEvent d{event.ts, event.patient, rule.label, rule.id, *value, *threshold, {}};
    for (const auto& field : rule.select) {
      std::string text;
      if (auto p = find_param(field)) {
        if (event[*p]) text = format_number(*event[*p]);
      } else if (iequals(field, "ts") || iequals(field, "timestamp")) {
        text = std::to_string(event.ts);
      } else {
        text = event.patient;
      }
      d.selected.emplace_back(field, std::move(text));
    }
    out.push_back(std::move(d));
  }

  state.seen = true;
  state.last_ts = event.ts;
  for (std::size_t k = 0; k < kParamCount; ++k) {
    if (!event.values[k]) continue;
    state.history[k].push_back(*event.values[k]);
    state.history_ts[k].push_back(event.ts);
  }
  ++processed_;
  return out;
}

// ---- correlation ----------------------------------------------------------------

Correlator::Correlator(std::string first, std::string second, std::int64_t within_ms,
                       std::string label)
    : first_(std::move(first)),
      second_(std::move(second)),
      within_ms_(within_ms),
      label_(std::move(label)) {
  if (within_ms_ < 0) throw InvalidArgument("correlation window must be non-negative");
}

std::optional<DerivedEvent> Correlator::push(const DerivedEvent& event) {
  std::map<std::string, std::int64_t>* mine = nullptr;
  std::map<std::string, std::int64_t>* other = nullptr;
  if (event.label == first_) {
    mine = &last_first_;
    other = &last_second_;
  } else if (event.label == second_) {
    mine = &last_second_;
    other = &last_first_;
  } else {
    return std::nullopt;
  }
  (*mine)[event.patient] = event.ts;
  auto it = other->find(event.patient);
  if (it == other->end() || std::llabs(event.ts - it->second) > within_ms_) return std::nullopt;
  DerivedEvent out;
  out.ts = event.ts;
  out.patient = event.patient;
  out.label = label_;
  out.rule_id = "corr(" + first_ + "," + second_ + ")";
  out.value = event.value;
  out.threshold = event.threshold;
  return out;
}

// ---- windows ----------------------------------------------------------------------

std::vector<WindowRow> window_stats(std::span<const VitalEvent> events, const WindowSpec& spec,
                                    std::span<const Rule> rules) {
  spec.validate();
  if (events.empty()) return {};

  struct Sample {
    std::int64_t ts;
    double seconds;
    std::size_t derived;
  };
  Engine engine(rules);
  std::vector<Sample> samples;
  samples.reserve(events.size());
  for (const auto& e : events) {
    const auto t0 = Clock::now();
    const std::size_t derived = engine.ingest(e).size();
    samples.push_back({e.ts, std::chrono::duration<double>(Clock::now() - t0).count(), derived});
  }
  std::stable_sort(samples.begin(), samples.end(),
                   [](const Sample& a, const Sample& b) { return a.ts < b.ts; });

  const std::int64_t slide = spec.slide_ms;
  const std::int64_t first = floor_div(samples.front().ts, slide) * slide;
  const std::int64_t end = (floor_div(samples.back().ts, slide) + 1) * slide;
  std::vector<WindowRow> rows;
  for (std::int64_t start = first; start < end; start += slide) {
    WindowRow row{start, start + spec.length_ms, 0, 0, 0.0, start + spec.length_ms <= end};
    auto lo = std::lower_bound(samples.begin(), samples.end(), start,
                               [](const Sample& s, std::int64_t t) { return s.ts < t; });
    for (auto it = lo; it != samples.end() && it->ts < row.end_ms; ++it) {
      ++row.events;
      row.derived += it->derived;
      row.processing_seconds += it->seconds;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string window_csv(std::span<const WindowRow> rows) {
  std::ostringstream out;
  out << "start_ms,end_ms,events,derived,processing_seconds,complete\n";
  char buf[32];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.6f", r.processing_seconds);
    out << r.start_ms << ',' << r.end_ms << ',' << r.events << ',' << r.derived << ',' << buf
        << ',' << (r.complete ? "true" : "false") << '\n';
  }
  return out.str();
}

// ---- RDF and NDJSON -----------------------------------------------------------------

std::string event_iri(const DerivedEvent& e, std::string_view ns) {
  return std::string(ns) + "Event_" + e.patient + "_" + std::to_string(e.ts) + "_" + e.rule_id;
}

std::vector<rdf::Triple> emit_rdf(std::span<const DerivedEvent> events,
                                  std::string_view namespace_iri) {
  using rdf::Term;
  const std::string ns(namespace_iri);
  const Term type = Term::iri(std::string(rdf::vocab::rdf_type));
  const Term detected = Term::iri(ns + "DetectedEvent");
  const Term has_label = Term::iri(ns + "hasLabel");
  const Term has_ts = Term::iri(ns + "hasTimestamp");
  const Term triggered_by = Term::iri(ns + "triggeredBy");
  std::vector<rdf::Triple> out;
  out.reserve(events.size() * 4);
  for (const auto& e : events) {
    Term subject = Term::iri(event_iri(e, ns));
    out.emplace_back(subject, type, detected);
    out.emplace_back(subject, has_label, Term::literal(e.label));
    out.emplace_back(subject, has_ts, Term::integer(e.ts));
    out.emplace_back(subject, triggered_by, Term::literal(e.rule_id));
  }
  return out;
}

namespace {

VitalEvent event_from_json(const nlohmann::json& j, std::size_t line, const std::string& text) {
  if (!j.is_object()) throw ParseError("expected a JSON object", line, text);
  VitalEvent e;
  auto ts = j.find("ts");
  if (ts == j.end() || !ts->is_number_integer())
    throw ParseError("field ts must be an integer", line, text);
  e.ts = ts->get<std::int64_t>();
  auto patient = j.find("patient");
  if (patient == j.end()) throw ParseError("missing field patient", line, text);
  if (patient->is_string()) {
    e.patient = patient->get<std::string>();
  } else if (patient->is_number_integer()) {
    e.patient = std::to_string(patient->get<long long>());
  } else {
    throw ParseError("field patient must be a string", line, text);
  }
  if (e.patient.empty()) throw ParseError("field patient is empty", line, text);
  for (std::size_t k = 0; k < kParamCount; ++k) {
    auto name = std::string(param_name(static_cast<Param>(k)));
    auto it = j.find(name);
    if (it == j.end() || it->is_null()) continue;
    if (!it->is_number()) throw ParseError("field " + name + " must be a number", line, text);
    e.values[k] = it->get<double>();
  }
  return e;
}

}  // namespace

std::vector<VitalEvent> read_events(std::istream& in) {
  std::vector<VitalEvent> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), n, line);
    }
    out.push_back(event_from_json(j, n, line));
  }
  return out;
}

std::vector<VitalEvent> parse_events(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_events(in);
}

void write_events(std::ostream& out, std::span<const VitalEvent> events) {
  for (const auto& e : events) {
    nlohmann::ordered_json j;
    j["ts"] = e.ts;
    j["patient"] = e.patient;
    for (std::size_t k = 0; k < kParamCount; ++k)
      if (e.values[k]) j[std::string(param_name(static_cast<Param>(k)))] = *e.values[k];
    out << j.dump() << '\n';
  }
}

void write_derived(std::ostream& out, std::span<const DerivedEvent> events) {
  for (const auto& e : events) {
    nlohmann::ordered_json j;
    j["ts"] = e.ts;
    j["patient"] = e.patient;
    j["label"] = e.label;
    j["rule"] = e.rule_id;
    j["value"] = e.value;
    j["threshold"] = e.threshold;
    for (const auto& [field, value] : e.selected) j["select"][field] = value;
    out << j.dump() << '\n';
  }
}

std::vector<VitalEvent> flatten(std::span<const PatientStream> patients) {
  std::vector<VitalEvent> out;
  for (const auto& p : patients) out.insert(out.end(), p.events.begin(), p.events.end());
  std::stable_sort(out.begin(), out.end(), [](const VitalEvent& a, const VitalEvent& b) {
    return std::tie(a.ts, a.patient) < std::tie(b.ts, b.patient);
  });
  return out;
}

// ---- deployment under load ---------------------------------------------------------

namespace {

// An event that satisfies a constant-threshold rule, or nullopt.
std::optional<VitalEvent> probe_for(const Rule& rule, std::int64_t ts) {
  auto* c = std::get_if<double>(&rule.condition.threshold);
  if (!c) return std::nullopt;
  VitalEvent e;
  e.ts = ts;
  e.patient = "probe-" + rule.id;
  double v = *c;
  switch (rule.condition.op) {
    case Comparator::lt: v -= 1; break;
    case Comparator::gt: v += 1; break;
    default: break;
  }
  e[rule.condition.param] = v;
  return e;
}

}  // namespace

std::vector<DeployMeasurement> measure_deployments(std::span<const Rule> rules,
                                                   std::span<const std::size_t> tiers,
                                                   const LoadOptions& options) {
  std::vector<DeployMeasurement> out;
  for (std::size_t eps : tiers) {
    Engine engine;
    std::atomic<bool> stop{false};
    std::atomic<std::size_t> produced{0};
    std::exception_ptr load_error;

    std::thread load([&, eps] {
      if (eps == 0) return;
      try {
        Rng rng(options.seed + eps);
        constexpr std::size_t kPatients = 64;
        std::int64_t ts = 0;
        const auto start = Clock::now();
        std::size_t sent = 0;
        while (!stop.load()) {
          const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
          auto due = static_cast<std::size_t>(elapsed * static_cast<double>(eps));
          // Never burst more than 10 ms of backlog after a stall.
          if (due > sent + eps / 100 + 1) sent = due - eps / 100 - 1;
          for (; sent < due && !stop.load(); ++sent) {
            VitalEvent e;
            e.ts = ++ts;
            e.patient = "load-" + std::to_string(rng.below(kPatients));
            e[Param::hr] = rng.uniform(55, 140);
            e[Param::pulse] = *e[Param::hr];
            e[Param::resp] = rng.uniform(10, 28);
            e[Param::spo2] = rng.uniform(85, 100);
            engine.ingest(e);
            produced.fetch_add(1);
          }
          std::this_thread::sleep_for(std::chrono::microseconds(500));
        }
      } catch (...) {
        load_error = std::current_exception();
      }
    });

    std::int64_t probe_ts = 0;
    try {
      for (const auto& rule : rules) {
        std::this_thread::sleep_for(options.warmup);
        DeployResult result = engine.deploy(rule);
        Rule deployed = rule;
        deployed.id = result.id;
        bool active;
        if (auto probe = probe_for(deployed, ++probe_ts)) {
          auto fired = engine.ingest(*probe);
          active = std::any_of(fired.begin(), fired.end(),
                               [&](const DerivedEvent& d) { return d.rule_id == result.id; });
        } else {
          auto now = engine.rules();
          active = std::any_of(now.begin(), now.end(),
                               [&](const Rule& r) { return r.id == result.id; });
        }
        out.push_back({result.id, eps, result.latency_seconds, active, produced.load()});
      }
    } catch (...) {
      stop = true;
      load.join();
      throw;
    }
    stop = true;
    load.join();
    if (load_error) std::rethrow_exception(load_error);
  }
  return out;
}

std::string deployment_csv(std::span<const DeployMeasurement> rows) {
  std::string out = "rule,load_eps,deploy_seconds\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.9f", r.deploy_seconds);
    out += r.rule + ',' + std::to_string(r.load_eps) + ',' + buf + '\n';
  }
  return out;
}

std::string deployment_table(std::span<const DeployMeasurement> rows) {
  std::vector<std::string> rules;
  std::vector<std::size_t> tiers;
  for (const auto& r : rows) {
    if (std::find(rules.begin(), rules.end(), r.rule) == rules.end()) rules.push_back(r.rule);
    if (std::find(tiers.begin(), tiers.end(), r.load_eps) == tiers.end())
      tiers.push_back(r.load_eps);
  }
  std::string out = "Rules / Events";
  char buf[64];
  for (auto t : tiers) {
    std::snprintf(buf, sizeof buf, "  %14s", (std::to_string(t) + " eps").c_str());
    out += buf;
  }
  out += '\n';
  for (const auto& rule : rules) {
    std::snprintf(buf, sizeof buf, "%-14s", rule.c_str());
    out += buf;
    for (auto t : tiers) {
      auto it = std::find_if(rows.begin(), rows.end(), [&](const DeployMeasurement& m) {
        return m.rule == rule && m.load_eps == t;
      });
      if (it == rows.end()) {
        std::snprintf(buf, sizeof buf, "  %14s", "-");
      } else {
        std::snprintf(buf, sizeof buf, "  %12.3fus", it->deploy_seconds * 1e6);
      }
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace ocep::cep

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "ocep/cep.hpp"
#include "ocep/error.hpp"
#include "ocep/random.hpp"

namespace ocep::cep {

using thresholds::RiskLevel;

namespace {

constexpr std::string_view kDefaultRules = R"(Rule 1: from Heart_Rate [heartRate < heartRate_threshold (100 BPM)] select heartRate, patientId, insert into (Less chances of Tachycardia);
Rule 2: from Heart_Rate [heartRate > heartRate_threshold (100 BPM)] select heartRate, patientId, insert into (Moderate chances of Tachycardia);
Rule 3: from Heart_Rate [heartRate > heartRate_threshold (120 BPM)] select heartRate, patientId, insert into (Tachycardia);
Rule 4: from SpO2 [spo2 < spo2_threshold (90 %)] select spo2, patientId, insert into (Hypoxemia);
Rule 5: from Respiration [respirationRate > respiration_threshold (24 breaths/min)] select respirationRate, patientId, insert into (Tachypnea);
)";

RiskLevel worse(RiskLevel a, RiskLevel b) { return std::max(a, b); }

}  // namespace

std::vector<Rule> default_rules() { return parse_rules(kDefaultRules); }

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::diseased: return "diseased";
    case Outcome::disease_free: return "disease-free";
    case Outcome::undetected: return "undetected";
  }
  return "?";
}

CohortReport classify_cohort(std::span<const PatientStream> patients, std::span<const Rule> rules) {
  if (patients.empty()) throw InvalidArgument("empty cohort");
  CohortReport report;
  for (const auto& patient : patients) {
    if (patient.events.empty())
      throw InvalidArgument("patient " + patient.id + " has no events");

    Engine engine(rules);
    PatientOutcome outcome{patient.id, Outcome::undetected, {}, RiskLevel::low, std::nullopt};
    bool all_normal = true;
    for (const auto& event : patient.events) {
      for (std::size_t k = 0; k < kParamCount; ++k) {
        if (!event.values[k]) continue;
        auto level = thresholds::classify(range_of(static_cast<Param>(k)), *event.values[k]);
        outcome.risk = worse(outcome.risk, level);
        if (level != RiskLevel::low) all_normal = false;
      }
      for (const auto& d : engine.ingest(event)) {
        // Firings on in-range values (Rule 1 style) are not findings.
        const Rule* rule = nullptr;
        for (const auto& r : rules)
          if (r.id == d.rule_id || (r.id.empty() && r.label == d.label)) rule = &r;
        const Param p = rule ? rule->condition.param : Param::hr;
        const auto level = thresholds::classify(range_of(p), d.value);
        if (level == RiskLevel::low) continue;
        auto [it, fresh] = outcome.labels.try_emplace(d.label, level);
        if (!fresh) it->second = worse(it->second, level);
      }
    }
    if (!outcome.labels.empty()) {
      outcome.outcome = Outcome::diseased;
      ++report.diseased;
    } else if (all_normal) {
      outcome.outcome = Outcome::disease_free;
      ++report.disease_free;
    } else {
      ++report.undetected;
    }
    if (patient.diseased) {
      ++report.labelled;
      const bool ok = (*patient.diseased && outcome.outcome == Outcome::diseased) ||
                      (!*patient.diseased && outcome.outcome == Outcome::disease_free);
      outcome.correct = ok;
      if (ok) ++report.correct;
    }
    report.patients.push_back(std::move(outcome));
  }
  return report;
}

double CohortReport::accuracy() const {
  return labelled == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(labelled);
}

std::map<std::string, std::array<std::size_t, 3>> CohortReport::risk_distribution() const {
  std::map<std::string, std::array<std::size_t, 3>> out;
  for (const auto& p : patients)
    for (const auto& [label, level] : p.labels) ++out[label][static_cast<std::size_t>(level)];
  return out;
}

std::string CohortReport::to_csv() const {
  std::ostringstream out;
  out << "patient,outcome,labels,risk,correct\n";
  for (const auto& p : patients) {
    std::string labels;
    for (const auto& [label, level] : p.labels) {
      if (!labels.empty()) labels += ';';
      labels += label;
    }
    out << p.patient << ',' << to_string(p.outcome) << ',' << labels << ','
        << thresholds::to_string(p.risk) << ','
        << (p.correct ? (*p.correct ? "true" : "false") : "") << '\n';
  }
  return out.str();
}

std::string CohortReport::risk_csv() const {
  std::ostringstream out;
  out << "label,low,moderate,high\n";
  for (const auto& [label, counts] : risk_distribution())
    out << label << ',' << counts[0] << ',' << counts[1] << ',' << counts[2] << '\n';
  return out.str();
}

std::string CohortReport::summary() const {
  char buf[128];
  std::ostringstream out;
  out << "patients: " << patients.size() << '\n'
      << "diseased: " << diseased << '\n'
      << "disease-free: " << disease_free << '\n'
      << "undetected: " << undetected << '\n';
  std::snprintf(buf, sizeof buf, "accuracy: %zu/%zu = %.2f%%\n", correct, labelled,
                accuracy() * 100);
  out << buf;
  return out.str();
}

std::vector<PatientStream> build_cohort(const CohortRecipe& recipe) {
  if (recipe.events_per_patient == 0) throw InvalidArgument("events_per_patient must be positive");
  Rng rng(recipe.seed);
  enum class Kind { diseased, free, borderline };
  std::vector<Kind> kinds;
  kinds.insert(kinds.end(), recipe.diseased, Kind::diseased);
  kinds.insert(kinds.end(), recipe.disease_free, Kind::free);
  kinds.insert(kinds.end(), recipe.borderline, Kind::borderline);
  for (std::size_t i = kinds.size(); i > 1; --i) std::swap(kinds[i - 1], kinds[rng.below(i)]);

  const std::size_t n = recipe.events_per_patient;
  std::vector<PatientStream> out;
  char id[32];
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    std::snprintf(id, sizeof id, "P%03zu", i + 1);
    PatientStream p{id, {}, kinds[i] != Kind::free};
    for (std::size_t t = 0; t < n; ++t) {
      VitalEvent e;
      e.ts = static_cast<std::int64_t>(t) * 1000;
      e.patient = id;
      const double hr = static_cast<double>(rng.between(65, 95));
      e[Param::hr] = hr;
      e[Param::pulse] = hr + static_cast<double>(rng.between(-1, 1));
      e[Param::resp] = static_cast<double>(rng.between(13, 19));
      e[Param::spo2] = static_cast<double>(rng.between(96, 99));
      p.events.push_back(e);
    }
    // Abnormal episodes overwrite a few consecutive samples.
    auto episode = [&](auto&& apply) {
      const std::size_t len = 1 + rng.below(std::min<std::size_t>(5, n));
      const std::size_t start = rng.below(n - len + 1);
      for (std::size_t t = start; t < start + len; ++t) apply(p.events[t]);
    };
    if (kinds[i] == Kind::diseased) {
      switch (rng.below(3)) {
        case 0:
          episode([&](VitalEvent& e) {
            e[Param::hr] = static_cast<double>(rng.between(105, 145));
            e[Param::pulse] = *e[Param::hr];
          });
          break;
        case 1:
          episode([&](VitalEvent& e) { e[Param::spo2] = static_cast<double>(rng.between(82, 89)); });
          break;
        default:
          episode([&](VitalEvent& e) { e[Param::resp] = static_cast<double>(rng.between(25, 32)); });
          break;
      }
    } else if (kinds[i] == Kind::borderline) {
      // Moderate band values that no deployed rule covers.
      if (rng.chance(0.5)) {
        episode([&](VitalEvent& e) { e[Param::spo2] = static_cast<double>(rng.between(91, 94)); });
      } else {
        episode([&](VitalEvent& e) { e[Param::resp] = static_cast<double>(rng.between(21, 23)); });
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace ocep::cep

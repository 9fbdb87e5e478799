#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "embedded.hpp"
#include "ocep/error.hpp"
#include "ocep/kb.hpp"
#include "ocep/ppg.hpp"
#include "ocep/random.hpp"
#include "ocep/rdf/io.hpp"

namespace ocep::kb {

using rdf::Term;
using rdf::Triple;
using rdf::TriplePatternFilter;
namespace vocab = rdf::vocab;

namespace {

Term iri(std::string_view text) { return Term::iri(std::string(text)); }
Term hc(std::string_view local) { return Term::iri(vocab::hc(local)); }

std::string numbered(std::string_view prefix, std::size_t i, std::size_t width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", static_cast<int>(width), i);
  return std::string(prefix) + buf;
}

std::size_t digits(std::size_t n) { return std::to_string(n).size(); }

// Distinct sample of k indexes below n, in draw order.
std::vector<std::size_t> sample(Rng& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  k = std::min(k, n);
  for (std::size_t i = 0; i < k; ++i) std::swap(all[i], all[i + rng.below(n - i)]);
  all.resize(k);
  return all;
}

}  // namespace

std::string_view embedded(std::string_view name) {
  for (const auto& f : detail::embedded_files())
    if (f.name == name) return f.text;
  throw InvalidArgument("no embedded file named " + std::string(name));
}

std::vector<std::string> embedded_names() {
  std::vector<std::string> out;
  for (const auto& f : detail::embedded_files()) out.emplace_back(f.name);
  return out;
}

rdf::TripleStore load_sample_kb() {
  return rdf::TripleStore(rdf::parse_turtle(embedded("sample_kb.ttl")));
}

rdf::TripleStore load_ssn_subset() {
  return rdf::TripleStore(rdf::parse_turtle(embedded("ssn_subset.ttl")));
}

std::vector<std::string> validate_kb(const rdf::TripleStore& store) {
  const Term type = iri(vocab::rdf_type);
  const Term label = iri(vocab::rdfs_label);
  const Term disease = hc("Disease");
  const Term drug = hc("Drug");
  std::vector<std::string> problems;

  auto typed = [&](const Term& s, const Term& cls) {
    return store.contains(Triple(s, type, cls));
  };
  auto has_label = [&](const Term& s) {
    return !store.match_ids({s, label, std::nullopt}).empty();
  };

  for (std::string_view prop : {"treatedBy", "recommendedMedication"}) {
    for (const auto& t : store.match({std::nullopt, hc(prop), std::nullopt})) {
      if (!typed(t.subject(), disease))
        problems.push_back(t.subject().to_ntriples() + " uses " + std::string(prop) +
                           " but is not a Disease");
      if (!t.object().is_iri() || !typed(t.object(), drug))
        problems.push_back(t.object().to_ntriples() + " is the " + std::string(prop) +
                           " target of " + t.subject().to_ntriples() + " but is not a Drug");
    }
  }
  for (const Term& cls : {disease, drug})
    for (const auto& t : store.match({std::nullopt, type, cls}))
      if (!has_label(t.subject()))
        problems.push_back(t.subject().to_ntriples() + " has no label");
  return problems;
}

rdf::TripleStore generate_kb(std::size_t diseases, std::size_t drugs, std::uint64_t seed) {
  if (diseases == 0 || drugs == 0) throw InvalidArgument("generate_kb needs at least one disease and one drug");
  Rng rng(seed);
  const Term type = iri(vocab::rdf_type);
  const Term label = iri(vocab::rdfs_label);
  const Term treated_by = hc("treatedBy");
  const Term recommended = hc("recommendedMedication");
  const Term side_effect = hc("hasSideEffect");
  const std::size_t effect_pool = std::max<std::size_t>(8, drugs / 2);

  rdf::TripleStore store;
  std::vector<Term> drug_terms;
  for (std::size_t j = 1; j <= drugs; ++j) {
    const std::string name = numbered("Drug_", j, digits(drugs));
    Term d = hc(name);
    store.insert(Triple(d, type, hc("Drug")));
    store.insert(Triple(d, label, Term::literal("Drug " + std::to_string(j))));
    for (std::size_t e : sample(rng, effect_pool, 1 + rng.below(3)))
      store.insert(Triple(d, side_effect, Term::literal("Side effect " + std::to_string(e + 1))));
    drug_terms.push_back(std::move(d));
  }
  for (std::size_t i = 1; i <= diseases; ++i) {
    Term d = hc(numbered("Disease_", i, digits(diseases)));
    store.insert(Triple(d, type, hc("Disease")));
    store.insert(Triple(d, label, Term::literal("Disease " + std::to_string(i))));
    const auto picks = sample(rng, drugs, 1 + rng.below(3));
    for (std::size_t k = 0; k < picks.size(); ++k) {
      store.insert(Triple(d, treated_by, drug_terms[picks[k]]));
      // The first pick is always recommended, later ones half the time.
      if (k == 0 || rng.chance(0.5)) store.insert(Triple(d, recommended, drug_terms[picks[k]]));
    }
  }
  return store;
}

rdf::TripleStore generate_bench_store(const BenchStoreSpec& spec) {
  rdf::TripleStore store = load_sample_kb();
  const Term type = iri(vocab::rdf_type);
  const Term label = iri(vocab::rdfs_label);
  const Term recommended = hc("recommendedMedication");

  struct Condition {
    std::string label;
    std::vector<Term> medications;
  };
  std::vector<Condition> conditions;
  std::size_t tachycardia = 0;
  for (const auto& t : store.match({std::nullopt, type, hc("Disease")})) {
    Condition c;
    for (const auto& l : store.match({t.subject(), label, std::nullopt})) c.label = l.object().value();
    for (const auto& m : store.match({t.subject(), recommended, std::nullopt}))
      c.medications.push_back(m.object());
    if (c.medications.empty()) continue;
    if (c.label == "Tachycardia") tachycardia = conditions.size();
    conditions.push_back(std::move(c));
  }
  if (conditions.empty()) throw InternalError("sample KB has no treatable disease");
  std::vector<Term> all_drugs;
  for (const auto& t : store.match({std::nullopt, type, hc("Drug")})) all_drugs.push_back(t.subject());

  Rng rng(spec.seed);
  const std::size_t width = digits(std::max<std::size_t>(spec.patients, 1));
  for (std::size_t i = 1; i <= spec.patients; ++i) {
    const std::string id = numbered("P", i, width);
    const Term patient = hc("Patient_" + id);
    const Condition& c = rng.chance(0.3) ? conditions[tachycardia]
                                         : conditions[rng.below(conditions.size())];
    const bool tachy = &c == &conditions[tachycardia];
    const long long hr = tachy ? rng.between(95, 150) : rng.between(58, 110);
    store.insert(Triple(patient, type, hc("Patient")));
    store.insert(Triple(patient, hc("hasHeartRate"), Term::integer(hr)));
    store.insert(Triple(patient, hc("hasCondition"), Term::literal(c.label)));
    store.insert(Triple(patient, hc("takesMedication"), c.medications[rng.below(c.medications.size())]));
    if (rng.chance(0.2))
      store.insert(Triple(patient, hc("takesMedication"), all_drugs[rng.below(all_drugs.size())]));

    if (spec.samples_per_patient == 0) continue;
    ppg::RecordingProfile profile;
    profile.hr = static_cast<double>(hr);
    profile.spo2 = rng.chance(0.2) ? 93 : 97;
    const auto records = ppg::synthesize_recording(spec.samples_per_patient, rng.next(), profile);
    store.insert_all(ppg::convert(records, id));
  }
  return store;
}

std::vector<query::BenchQuery> bench_queries() {
  std::vector<query::BenchQuery> out;
  for (int q = 1; q <= 5; ++q) {
    const std::string label = "Q" + std::to_string(q);
    out.push_back({label, query::parse_query(embedded("bench/" + label + ".rq"))});
  }
  return out;
}

std::vector<Recommendation> recommendations(const rdf::TripleStore& store,
                                            std::string_view disease_label) {
  const std::string text =
      "PREFIX hc: <" + std::string(vocab::healthcare_ns) +
      ">\nPREFIX rdfs: <" + std::string(vocab::rdfs_ns) +
      ">\nSELECT ?medicationLabel ?sideEffect WHERE {\n"
      "  ?disease a hc:Disease ; rdfs:label " +
      Term::literal(std::string(disease_label)).to_ntriples() +
      " ; hc:recommendedMedication ?medication .\n"
      "  ?medication rdfs:label ?medicationLabel ; hc:hasSideEffect ?sideEffect .\n}\n";
  const auto result = query::execute_reference(store, query::parse_query(text));

  std::map<std::string, std::set<std::string>> grouped;
  for (const auto& row : result.rows) grouped[row[0].value()].insert(row[1].value());
  std::vector<Recommendation> out;
  for (auto& [medication, effects] : grouped)
    out.push_back({medication, std::vector<std::string>(effects.begin(), effects.end())});
  return out;
}

}  // namespace ocep::kb

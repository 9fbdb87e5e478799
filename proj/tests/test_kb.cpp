#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "ocep/error.hpp"
#include "ocep/kb.hpp"
#include "ocep/query.hpp"
#include "ocep/random.hpp"
#include "ocep/rdf/io.hpp"

using namespace ocep;
using namespace ocep::kb;

namespace {

const std::string kPrefixes =
    "@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .\n"
    "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n"
    "@prefix owl: <http://www.w3.org/2002/07/owl#> .\n"
    "@prefix : <http://example.org/o#> .\n";

rdf::TripleStore ttl(const std::string& body) { return rdf::TripleStore(rdf::parse_turtle(kPrefixes + body)); }

query::ResultSet run(const rdf::TripleStore& store, std::string_view query_name) {
  return query::execute_reference(store, query::parse_query(embedded(query_name)));
}

std::set<std::string> values(const query::ResultSet& r, std::string_view column) {
  std::set<std::string> out;
  for (const auto& t : r.column(column)) out.insert(t.value());
  return out;
}

std::size_t count_diseases(const rdf::TripleStore& store) {
  std::set<std::string> out;
  const std::string disease = rdf::vocab::hc("Disease");
  for (const auto& t : store.triples())
    if (t.predicate().value() == rdf::vocab::rdf_type && t.object().value() == disease)
      out.insert(t.subject().value());
  return out.size();
}

}  // namespace

TEST(SampleKb, EightyOneDiseasesAndValid) {
  auto store = load_sample_kb();
  EXPECT_EQ(count_diseases(store), 81u);
  EXPECT_TRUE(validate_kb(store).empty());
}

TEST(SampleKb, TableEightNineRows) {
  auto r = run(load_sample_kb(), "disease_drugs.rq");
  EXPECT_EQ(r.size(), 9u);
  EXPECT_EQ(r.columns.size(), 2u);
}

TEST(SampleKb, TableNineHypoxemia) {
  auto r = run(load_sample_kb(), "hypoxemia_medications.rq");
  std::set<std::string> meds;
  for (const auto& t : r.column("medication")) meds.insert(t.value());
  EXPECT_EQ(meds, (std::set<std::string>{rdf::vocab::hc("Supplemental_Oxygen"), rdf::vocab::hc("Albuterol")}));
  EXPECT_EQ(values(r, "sideEffect"),
            (std::set<std::string>{"Dry Nose", "Headache", "Tremors", "Increased Heart Rate"}));

  auto recs = recommendations(load_sample_kb(), "Hypoxemia");
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].medication, "Albuterol");
  EXPECT_EQ(recs[0].side_effects, (std::vector<std::string>{"Increased Heart Rate", "Tremors"}));
  EXPECT_EQ(recs[1].medication, "Supplemental Oxygen");
  EXPECT_EQ(recs[1].side_effects, (std::vector<std::string>{"Dry Nose", "Headache"}));
  EXPECT_TRUE(recommendations(load_sample_kb(), "No such disease").empty());
}

TEST(Validate, ReportsBrokenEntries) {
  auto store = load_sample_kb();
  store.insert(rdf::Triple(rdf::Term::iri(rdf::vocab::hc("Hypoxemia")), rdf::Term::iri(rdf::vocab::hc("treatedBy")),
                           rdf::Term::iri(rdf::vocab::hc("Unknown_Drug"))));
  auto problems = validate_kb(store);
  ASSERT_FALSE(problems.empty());
  EXPECT_NE(problems[0].find("Unknown_Drug"), std::string::npos);
}

TEST(Generator, DeterministicAndValid) {
  auto a = generate_kb(81, 200, 9);
  auto b = generate_kb(81, 200, 9);
  EXPECT_EQ(rdf::serialize(a, rdf::Format::ntriples), rdf::serialize(b, rdf::Format::ntriples));
  EXPECT_NE(rdf::serialize(a, rdf::Format::ntriples),
            rdf::serialize(generate_kb(81, 200, 10), rdf::Format::ntriples));
  EXPECT_EQ(count_diseases(a), 81u);
  EXPECT_TRUE(validate_kb(a).empty());
  EXPECT_EQ(run(a, "disease_drugs.rq").size(), 9u);

  auto minimal = generate_kb(1, 1, 3);
  EXPECT_TRUE(validate_kb(minimal).empty());
  auto pairs = query::execute_reference(minimal, query::parse_query(R"(
    PREFIX hc: <http://healthcare.org/ppg/>
    SELECT ?d ?m WHERE { ?d hc:treatedBy ?m . })"));
  EXPECT_EQ(pairs.size(), 1u);
  EXPECT_THROW(generate_kb(0, 1, 1), InvalidArgument);
  EXPECT_THROW(generate_kb(1, 0, 1), InvalidArgument);
}

TEST(Generator, BenchStoreAnswersAllQueries) {
  BenchStoreSpec spec;
  spec.patients = 12;
  spec.samples_per_patient = 20;
  auto store = generate_bench_store(spec);
  auto queries = bench_queries();
  ASSERT_EQ(queries.size(), 5u);
  for (const auto& q : queries) EXPECT_FALSE(query::execute_reference(store, q.plan).empty()) << q.label;
}

TEST(Embedded, Names) {
  auto names = embedded_names();
  for (const char* n : {"sample_kb.ttl", "ssn_subset.ttl", "disease_drugs.rq", "bench/Q1.rq", "vital_rules.rules"})
    EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
  EXPECT_THROW(embedded("nope.ttl"), InvalidArgument);
}

TEST(Summary, EmptyStore) {
  auto s = summarize_ontology(rdf::TripleStore{});
  EXPECT_EQ(s, OntologySummary{});
  EXPECT_THROW(compute_metrics(s), DomainError);
}

TEST(Summary, Chain) {
  auto s = summarize_ontology(ttl(R"(
    :A a owl:Class . :B a owl:Class . :C a owl:Class .
    :A rdfs:subClassOf :B . :B rdfs:subClassOf :C .
  )"));
  EXPECT_EQ(s.classes, 3u);
  EXPECT_EQ(s.subclass_axioms, 2u);
  EXPECT_EQ(s.leaf_classes, 1u);
  EXPECT_EQ(s.total_paths, 1u);
  EXPECT_EQ(s.breadth, (std::vector<std::size_t>{1, 1, 1}));
  EXPECT_EQ(s.max_depth, 2u);
}

TEST(Summary, TwoParentsGiveTwoPaths) {
  auto s = summarize_ontology(ttl(R"(
    :R a owl:Class . :P a owl:Class . :Q a owl:Class . :L a owl:Class .
    :P rdfs:subClassOf :R . :Q rdfs:subClassOf :R .
    :L rdfs:subClassOf :P, :Q .
  )"));
  EXPECT_EQ(s.subclass_axioms, 4u);
  EXPECT_EQ(s.leaf_classes, 1u);
  EXPECT_EQ(s.total_paths, 2u);
}

TEST(Summary, CountsEveryKind) {
  auto s = summarize_ontology(ttl(R"(
    :Sensor a owl:Class . :Device a owl:Class . :Patient a owl:Class .
    :Sensor rdfs:subClassOf :Device .
    :Device rdfs:subClassOf owl:Thing .
    :observes a owl:ObjectProperty .
    :hasValue a owl:DatatypeProperty . :hasUnit a owl:DatatypeProperty .
    :s1 a owl:NamedIndividual, :Sensor .
    :s2 a :Sensor .
    :p1 a :Patient .
  )"));
  EXPECT_EQ(s.classes, 3u);
  EXPECT_EQ(s.subclass_axioms, 1u);
  EXPECT_EQ(s.object_properties, 1u);
  EXPECT_EQ(s.data_properties, 2u);
  EXPECT_EQ(s.individuals, 3u);
  EXPECT_EQ(s.classes_with_instances, 2u);
  EXPECT_EQ(s.leaf_classes, 2u);
  EXPECT_EQ(s.axioms, 12u);

  auto m = compute_metrics(s);
  EXPECT_DOUBLE_EQ(m.attribute_richness, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.inheritance_richness, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.relationship_richness, 0.5);
  EXPECT_DOUBLE_EQ(m.class_richness, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.average_population, 1.0);
  EXPECT_DOUBLE_EQ(m.axiom_class_ratio, 4.0);
  EXPECT_DOUBLE_EQ(m.class_relation_ratio, 1.5);
  EXPECT_EQ(m.absolute_leaf_cardinality, 2u);
  EXPECT_EQ(m.total_paths, s.total_paths);
}

TEST(Summary, CycleNamesAClass) {
  try {
    summarize_ontology(ttl(R"(
      :A a owl:Class . :B a owl:Class . :C a owl:Class .
      :A rdfs:subClassOf :B . :B rdfs:subClassOf :C . :C rdfs:subClassOf :A .
    )"));
    FAIL();
  } catch (const CycleError& e) {
    const std::set<std::string> cycle{"http://example.org/o#A", "http://example.org/o#B", "http://example.org/o#C"};
    EXPECT_TRUE(cycle.count(e.class_name())) << e.class_name();
  }
}

TEST(Metrics, DegenerateRelations) {
  OntologySummary s;
  s.classes = 4;
  auto m = compute_metrics(s);
  EXPECT_TRUE(m.degenerate_relations);
  EXPECT_EQ(m.relationship_richness, 0.0);
  EXPECT_EQ(m.class_relation_ratio, 0.0);
}

TEST(Metrics, RelationshipIdentity) {
  Rng rng(6);
  for (int trial = 0; trial < 500; ++trial) {
    OntologySummary s;
    s.classes = 1 + rng.below(300);
    s.subclass_axioms = rng.below(300);
    s.object_properties = rng.below(50);
    s.data_properties = rng.below(50);
    s.classes_with_instances = rng.below(s.classes + 1);
    if (s.subclass_axioms + s.object_properties == 0) continue;
    auto m = compute_metrics(s);
    const double h = static_cast<double>(s.subclass_axioms);
    EXPECT_NEAR(m.relationship_richness + h / (h + static_cast<double>(s.object_properties)), 1.0, 1e-12);
    EXPECT_GE(m.relationship_richness, 0.0);
    EXPECT_LE(m.relationship_richness, 1.0);
    EXPECT_LE(m.class_richness, 1.0);
  }
}

TEST(Metrics, InvariantUnderReordering) {
  auto store = generate_ontology(OntologyShape{});
  auto triples = store.triples();
  std::vector<rdf::Triple> shuffled(triples.begin(), triples.end());
  Rng rng(2);
  for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
  auto a = summarize_ontology(store);
  auto b = summarize_ontology(rdf::TripleStore(shuffled));
  EXPECT_EQ(a, b);
  EXPECT_EQ(metrics_csv(a, compute_metrics(a)), metrics_csv(b, compute_metrics(b)));
}

TEST(Metrics, GeneratedOntologyMatchesCounts) {
  auto s = summarize_ontology(generate_ontology(OntologyShape{}));
  EXPECT_EQ(s.classes, 125u);
  EXPECT_EQ(s.data_properties, 28u);
  EXPECT_EQ(s.object_properties, 10u);
  EXPECT_EQ(s.individuals, 81u);
  EXPECT_EQ(s.subclass_axioms, 123u);
  EXPECT_EQ(s.classes_with_instances, 11u);
  EXPECT_EQ(s.leaf_classes, 99u);
  EXPECT_EQ(s.axioms, 2250u);

  auto m = compute_metrics(s);
  EXPECT_NEAR(m.attribute_richness, 0.224, 1e-12);
  EXPECT_NEAR(m.inheritance_richness, 0.984, 1e-12);
  EXPECT_NEAR(m.relationship_richness, 0.075188, 5e-7);
  EXPECT_NEAR(m.class_richness, 0.088, 1e-12);
  EXPECT_NEAR(m.class_relation_ratio, 0.93985, 5e-6);
  EXPECT_EQ(m.absolute_leaf_cardinality, 99u);
  // These two follow the stated counts and differ from the reference values.
  EXPECT_NEAR(m.axiom_class_ratio, 18.0, 1e-12);
  EXPECT_NEAR(m.average_population, 0.648, 1e-12);
}

TEST(Metrics, SsnSubsetAndReports) {
  auto s = summarize_ontology(load_ssn_subset());
  EXPECT_GT(s.classes, 0u);
  EXPECT_LE(s.classes_with_instances, s.classes);
  EXPECT_LE(s.leaf_classes, s.classes);
  auto m = compute_metrics(s);
  const auto csv = metrics_csv(s, m);
  EXPECT_EQ(csv.rfind("metric,value\n", 0), 0u);
  EXPECT_NE(csv.find("attribute_richness,"), std::string::npos);
  EXPECT_NE(metrics_table(s, m).find("attribute_richness"), std::string::npos);
}

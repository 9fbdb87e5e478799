#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ocep/query.hpp"
#include "ocep/rdf/triple_store.hpp"

namespace ocep::kb {

/// Files compiled into the library: "sample_kb.ttl", "ssn_subset.ttl",
/// "tachycardia_patients.rq", "disease_drugs.rq", "hypoxemia_medications.rq", "bench/Q1.rq" .. "bench/Q5.rq".
/// Throws InvalidArgument for an unknown name.
std::string_view embedded(std::string_view name);
std::vector<std::string> embedded_names();

/// The bundled drug/disease knowledge base (81 diseases).
rdf::TripleStore load_sample_kb();
/// The bundled SSN-subset schema.
rdf::TripleStore load_ssn_subset();

/// Problems with the entry invariants: every treatedBy and
/// recommendedMedication target is typed Drug, every subject of those
/// properties is typed Disease, and every disease and drug has a label.
/// Empty when the store is valid.
std::vector<std::string> validate_kb(const rdf::TripleStore& store);

/// Deterministic synthetic KB in the bundled KB's vocabulary. Every
/// disease gets 1-3 drugs and every drug 1-3 side effects.
/// Throws InvalidArgument when a count is zero.
rdf::TripleStore generate_kb(std::size_t diseases, std::size_t drugs, std::uint64_t seed);

struct BenchStoreSpec {
  std::size_t patients = 50;
  std::size_t samples_per_patient = 120;
  std::uint64_t seed = 11;
};

/// Patients (heart rate, condition, medication) plus their PPG samples,
/// on top of the sample KB. Input for the benchmark queries.
rdf::TripleStore generate_bench_store(const BenchStoreSpec& spec);

/// The five benchmark queries, labelled Q1..Q5.
std::vector<query::BenchQuery> bench_queries();

struct Recommendation {
  std::string medication;  // label
  std::vector<std::string> side_effects;
};

/// Medications recommended for the disease with this label and their side
/// effects, sorted by medication label then side effect.
std::vector<Recommendation> recommendations(const rdf::TripleStore& store,
                                            std::string_view disease_label);

// ---- ontology metrics ------------------------------------------------------------

struct OntologySummary {
  std::size_t classes = 0;             // C
  std::size_t data_properties = 0;     // DP
  std::size_t object_properties = 0;   // OP
  std::size_t individuals = 0;         // I
  std::size_t subclass_axioms = 0;     // H
  std::size_t classes_with_instances = 0;
  std::size_t axioms = 0;  // every triple counts as one axiom
  std::size_t leaf_classes = 0;
  /// Classes per depth level; roots are level 0, depth is the shortest
  /// distance from a root.
  std::vector<std::size_t> breadth;
  std::size_t total_paths = 0;
  std::size_t max_depth = 0;

  friend bool operator==(const OntologySummary&, const OntologySummary&) = default;
};

/// Counts from the triples alone. Classes are subjects typed owl:Class or
/// rdfs:Class plus both ends of rdfs:subClassOf (owl:Thing and blank
/// nodes excluded). Individuals are subjects typed owl:NamedIndividual or
/// typed with one of the classes. A class with several parents adds one
/// root-to-leaf path per parent chain. Throws CycleError naming a class
/// on a subclass cycle.
OntologySummary summarize_ontology(const rdf::TripleStore& store);

struct SchemaMetrics {
  double attribute_richness = 0;      // DP / C
  double inheritance_richness = 0;    // H / C
  double relationship_richness = 0;   // OP / (H + OP)
  double class_richness = 0;          // Ci / C
  double average_population = 0;      // I / C
  double axiom_class_ratio = 0;       // axioms / C
  double class_relation_ratio = 0;    // C / (H + OP)
  std::size_t absolute_leaf_cardinality = 0;
  double average_breadth = 0;         // mean classes per level
  std::size_t total_paths = 0;
  /// H + OP == 0: the two ratios over it are reported as 0.
  bool degenerate_relations = false;
};

/// Throws DomainError when C == 0.
SchemaMetrics compute_metrics(const OntologySummary& summary);

/// Aligned two-column text, or CSV with header `metric,value`.
std::string metrics_table(const OntologySummary& summary, const SchemaMetrics& metrics);
std::string metrics_csv(const OntologySummary& summary, const SchemaMetrics& metrics);

struct OntologyShape {
  std::size_t classes = 125;
  std::size_t roots = 2;
  std::size_t leaves = 99;
  std::size_t object_properties = 10;
  std::size_t data_properties = 28;
  std::size_t individuals = 81;
  std::size_t classes_with_instances = 11;
  /// Total triple count, reached with rdfs:comment annotations on classes.
  /// 0 leaves the store unpadded.
  std::size_t axioms = 2250;
  std::uint64_t seed = 5;
};

/// Forest-shaped ontology with exactly the requested counts (H = classes -
/// roots). Throws InvalidArgument for unreachable shapes, including an
/// axiom target below the unpadded triple count.
rdf::TripleStore generate_ontology(const OntologyShape& shape);

}  // namespace ocep::kb

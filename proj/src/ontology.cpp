#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "ocep/error.hpp"
#include "ocep/kb.hpp"
#include "ocep/random.hpp"

namespace ocep::kb {

using rdf::Term;
using rdf::Triple;
namespace vocab = rdf::vocab;

namespace {

Term iri(std::string_view text) { return Term::iri(std::string(text)); }

bool usable_class(const Term& t) { return t.is_iri() && t.value() != vocab::owl_thing; }

}  // namespace

OntologySummary summarize_ontology(const rdf::TripleStore& store) {
  const Term type = iri(vocab::rdf_type);
  const Term subclass = iri(vocab::rdfs_subclass_of);

  std::set<std::string> classes;
  for (std::string_view cls : {vocab::owl_class, vocab::rdfs_class})
    for (const auto& t : store.match({std::nullopt, type, iri(cls)}))
      if (usable_class(t.subject())) classes.insert(t.subject().value());

  std::set<std::pair<std::string, std::string>> edges;  // (child, parent)
  for (const auto& t : store.match({std::nullopt, subclass, std::nullopt})) {
    if (usable_class(t.subject())) classes.insert(t.subject().value());
    if (usable_class(t.object())) classes.insert(t.object().value());
    if (usable_class(t.subject()) && usable_class(t.object()))
      edges.emplace(t.subject().value(), t.object().value());
  }

  std::set<std::string> object_props, data_props;
  for (const auto& t : store.match({std::nullopt, type, iri(vocab::owl_object_property)}))
    object_props.insert(t.subject().value());
  for (const auto& t : store.match({std::nullopt, type, iri(vocab::owl_datatype_property)}))
    data_props.insert(t.subject().value());

  std::set<std::string> individuals, populated;
  for (const auto& t : store.match({std::nullopt, type, std::nullopt})) {
    const std::string& s = t.subject().value();
    if (classes.count(s) || object_props.count(s) || data_props.count(s)) continue;
    const bool named = t.object().value() == vocab::owl_named_individual;
    const bool of_class = t.object().is_iri() && classes.count(t.object().value());
    if (named || of_class) individuals.insert(s);
    if (of_class) populated.insert(t.object().value());
  }

  OntologySummary out;
  out.classes = classes.size();
  out.subclass_axioms = edges.size();
  out.object_properties = object_props.size();
  out.data_properties = data_props.size();
  out.individuals = individuals.size();
  out.classes_with_instances = populated.size();
  out.axioms = store.size();

  std::map<std::string, std::vector<std::string>> parents, children;
  for (const auto& [child, parent] : edges) {
    parents[child].push_back(parent);
    children[parent].push_back(child);
  }

  // Colour DFS over child -> parent edges; a grey hit is a cycle.
  std::map<std::string, int> colour;
  std::function<void(const std::string&)> visit = [&](const std::string& c) {
    colour[c] = 1;
    for (const auto& p : parents[c]) {
      if (colour[p] == 1) throw CycleError(p);
      if (colour[p] == 0) visit(p);
    }
    colour[c] = 2;
  };
  for (const auto& c : classes)
    if (colour[c] == 0) visit(c);

  std::map<std::string, std::size_t> depth;
  std::vector<std::string> frontier;
  for (const auto& c : classes)
    if (parents[c].empty()) {
      depth[c] = 0;
      frontier.push_back(c);
    }
  while (!frontier.empty()) {
    out.breadth.push_back(frontier.size());
    std::vector<std::string> next;
    for (const auto& c : frontier)
      for (const auto& child : children[c])
        if (depth.emplace(child, out.breadth.size()).second) next.push_back(child);
    frontier = std::move(next);
  }
  out.max_depth = out.breadth.empty() ? 0 : out.breadth.size() - 1;

  std::map<std::string, std::size_t> paths;  // root-to-class path counts
  std::function<std::size_t(const std::string&)> count = [&](const std::string& c) {
    if (auto it = paths.find(c); it != paths.end()) return it->second;
    std::size_t n = parents[c].empty() ? 1 : 0;
    for (const auto& p : parents[c]) n += count(p);
    return paths[c] = n;
  };
  for (const auto& c : classes)
    if (children[c].empty()) {
      ++out.leaf_classes;
      out.total_paths += count(c);
    }
  return out;
}

SchemaMetrics compute_metrics(const OntologySummary& s) {
  if (s.classes == 0) throw DomainError("schema metrics are undefined for an ontology with no classes");
  const double c = static_cast<double>(s.classes);
  SchemaMetrics m;
  m.attribute_richness = static_cast<double>(s.data_properties) / c;
  m.inheritance_richness = static_cast<double>(s.subclass_axioms) / c;
  m.class_richness = static_cast<double>(s.classes_with_instances) / c;
  m.average_population = static_cast<double>(s.individuals) / c;
  m.axiom_class_ratio = static_cast<double>(s.axioms) / c;
  const std::size_t relations = s.subclass_axioms + s.object_properties;
  if (relations == 0) {
    m.degenerate_relations = true;
  } else {
    m.relationship_richness = static_cast<double>(s.object_properties) / static_cast<double>(relations);
    m.class_relation_ratio = c / static_cast<double>(relations);
  }
  m.absolute_leaf_cardinality = s.leaf_classes;
  if (!s.breadth.empty())
    m.average_breadth = static_cast<double>(s.classes) / static_cast<double>(s.breadth.size());
  m.total_paths = s.total_paths;
  return m;
}

namespace {

std::vector<std::pair<std::string, std::string>> metric_rows(const OntologySummary& s,
                                                             const SchemaMetrics& m) {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  std::string breadth;
  for (auto b : s.breadth) {
    if (!breadth.empty()) breadth += ';';
    breadth += std::to_string(b);
  }
  return {
      {"class_count", std::to_string(s.classes)},
      {"data_property_count", std::to_string(s.data_properties)},
      {"object_property_count", std::to_string(s.object_properties)},
      {"individual_count", std::to_string(s.individuals)},
      {"subclass_axiom_count", std::to_string(s.subclass_axioms)},
      {"classes_with_instances", std::to_string(s.classes_with_instances)},
      {"axiom_count", std::to_string(s.axioms)},
      {"breadth_per_level", breadth},
      {"attribute_richness", num(m.attribute_richness)},
      {"inheritance_richness", num(m.inheritance_richness)},
      {"relationship_richness", num(m.relationship_richness)},
      {"class_richness", num(m.class_richness)},
      {"average_population", num(m.average_population)},
      {"axiom_class_ratio", num(m.axiom_class_ratio)},
      {"class_relation_ratio", num(m.class_relation_ratio)},
      {"absolute_leaf_cardinality", std::to_string(m.absolute_leaf_cardinality)},
      {"average_breadth", num(m.average_breadth)},
      {"total_paths", std::to_string(m.total_paths)},
      {"degenerate_relations", m.degenerate_relations ? "true" : "false"},
  };
}

}  // namespace

std::string metrics_table(const OntologySummary& summary, const SchemaMetrics& metrics) {
  const auto rows = metric_rows(summary, metrics);
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.first.size());
  std::ostringstream out;
  for (const auto& [k, v] : rows) out << k << std::string(width - k.size() + 2, ' ') << v << '\n';
  return out.str();
}

std::string metrics_csv(const OntologySummary& summary, const SchemaMetrics& metrics) {
  std::ostringstream out;
  out << "metric,value\n";
  for (const auto& [k, v] : metric_rows(summary, metrics)) out << k << ',' << v << '\n';
  return out.str();
}

rdf::TripleStore generate_ontology(const OntologyShape& shape) {
  const std::size_t c = shape.classes, r = shape.roots, l = shape.leaves;
  if (c == 0) {
    if (r || l || shape.individuals || shape.classes_with_instances)
      throw InvalidArgument("an ontology without classes has no roots, leaves or individuals");
  } else if (r == 0 || r > l || l > c || (l == c && r != c)) {
    throw InvalidArgument("no forest has " + std::to_string(c) + " classes, " + std::to_string(r) +
                          " roots and " + std::to_string(l) + " leaves");
  }
  if (shape.classes_with_instances > std::min(c, shape.individuals) ||
      (shape.individuals > 0 && shape.classes_with_instances == 0))
    throw InvalidArgument("classes_with_instances must be between 1 and min(classes, individuals)");

  Rng rng(shape.seed);
  auto name = [](std::string_view prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%03zu", i + 1);
    return vocab::hc(std::string(prefix) + buf);
  };

  // Internal classes come first. The first min(r, internal) of them are
  // roots; the rest hang under an earlier internal class. Leaves then fill
  // every childless internal class before spreading at random.
  const std::size_t internal = c - l;
  const std::size_t internal_roots = std::min(r, internal);
  std::vector<std::size_t> parent(c, c);  // c = no parent
  std::vector<bool> has_child(c, false);
  for (std::size_t k = internal_roots; k < internal; ++k) {
    parent[k] = rng.below(k);
    has_child[parent[k]] = true;
  }
  std::size_t childless = 0;
  for (std::size_t k = 0; k < internal; ++k) childless += !has_child[k];
  const std::size_t hanging = l - (r - internal_roots);
  if (childless > hanging) {
    // Random attachment left too many internal classes bare; use chains.
    std::fill(has_child.begin(), has_child.end(), false);
    for (std::size_t k = internal_roots; k < internal; ++k) {
      parent[k] = k - internal_roots;
      has_child[parent[k]] = true;
    }
  }
  std::size_t next_leaf = internal;
  for (std::size_t k = 0; k < internal; ++k)
    if (!has_child[k]) parent[next_leaf++] = k;
  for (; next_leaf < internal + hanging; ++next_leaf) parent[next_leaf] = rng.below(internal);
  // Remaining leaves (internal + hanging .. c) are standalone roots.

  const Term type = iri(vocab::rdf_type);
  const Term owl_class = iri(vocab::owl_class);
  const Term label = iri(vocab::rdfs_label);
  const Term subclass = iri(vocab::rdfs_subclass_of);
  const Term domain = iri(std::string(vocab::rdfs_ns) + "domain");
  const Term range = iri(std::string(vocab::rdfs_ns) + "range");

  rdf::TripleStore store;
  std::vector<Term> cls;
  for (std::size_t k = 0; k < c; ++k) {
    cls.push_back(Term::iri(name("Class_", k)));
    store.insert(Triple(cls[k], type, owl_class));
    store.insert(Triple(cls[k], label, Term::literal("Class " + std::to_string(k + 1))));
  }
  for (std::size_t k = 0; k < c; ++k)
    if (parent[k] < c) store.insert(Triple(cls[k], subclass, cls[parent[k]]));

  for (std::size_t k = 0; k < shape.object_properties; ++k) {
    Term p = Term::iri(name("objectProperty_", k));
    store.insert(Triple(p, type, iri(vocab::owl_object_property)));
    if (c) {
      store.insert(Triple(p, domain, cls[rng.below(c)]));
      store.insert(Triple(p, range, cls[rng.below(c)]));
    }
  }
  for (std::size_t k = 0; k < shape.data_properties; ++k) {
    Term p = Term::iri(name("dataProperty_", k));
    store.insert(Triple(p, type, iri(vocab::owl_datatype_property)));
    if (c) {
      store.insert(Triple(p, domain, cls[rng.below(c)]));
      store.insert(Triple(p, range, iri(vocab::xsd_integer)));
    }
  }

  std::vector<std::size_t> populated(c);
  for (std::size_t k = 0; k < c; ++k) populated[k] = k;
  for (std::size_t k = 0; k < shape.classes_with_instances; ++k)
    std::swap(populated[k], populated[k + rng.below(c - k)]);
  populated.resize(shape.classes_with_instances);
  for (std::size_t k = 0; k < shape.individuals; ++k) {
    Term ind = Term::iri(name("Individual_", k));
    const std::size_t target = k < populated.size() ? populated[k] : populated[rng.below(populated.size())];
    store.insert(Triple(ind, type, iri(vocab::owl_named_individual)));
    store.insert(Triple(ind, type, cls[target]));
  }

  if (shape.axioms > 0) {
    if (store.size() > shape.axioms)
      throw InvalidArgument("axiom target " + std::to_string(shape.axioms) + " is below the " +
                            std::to_string(store.size()) + " structural triples");
    if (store.size() < shape.axioms && c == 0)
      throw InvalidArgument("padding needs at least one class");
    const Term comment = iri(std::string(vocab::rdfs_ns) + "comment");
    for (std::size_t n = 0; store.size() < shape.axioms; ++n)
      store.insert(Triple(cls[n % c], comment, Term::literal("note " + std::to_string(n + 1))));
  }
  return store;
}

}  // namespace ocep::kb

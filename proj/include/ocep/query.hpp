#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ocep/rdf/triple_store.hpp"

namespace ocep::query {

struct Var {
  std::string name;  // without the leading '?'
  friend bool operator==(const Var&, const Var&) = default;
};

/// One position of a triple pattern: a variable or a concrete term.
using PatternTerm = std::variant<Var, rdf::Term>;

bool is_var(const PatternTerm& t);
const std::string* var_name(const PatternTerm& t);
std::string to_string(const PatternTerm& t);

struct TriplePattern {
  PatternTerm subject;
  PatternTerm predicate;
  PatternTerm object;
  friend bool operator==(const TriplePattern&, const TriplePattern&) = default;
};

enum class CompareOp { lt, le, gt, ge, eq, ne };

std::string_view to_string(CompareOp op);

/// `variable op operand`, where operand is a literal or another variable.
struct Comparison {
  std::string variable;
  CompareOp op;
  PatternTerm operand;
  friend bool operator==(const Comparison&, const Comparison&) = default;
};

/// Filter semantics shared by both executors. Numeric literals compare
/// numerically; two xsd:string literals compare lexically; otherwise
/// `=` and `!=` use term identity and ordering comparisons are false
/// (a type error removes the solution instead of raising).
bool compare_terms(const rdf::Term& lhs, CompareOp op, const rdf::Term& rhs);

/// Parsed query in the supported subset: PREFIX, SELECT (vars or *),
/// WHERE with `.`-separated patterns and `;`/`,` lists, single-comparison
/// FILTERs and LIMIT.
struct QueryPlan {
  std::map<std::string, std::string> prefixes;
  std::vector<std::string> select_vars;
  std::vector<TriplePattern> patterns;
  std::vector<Comparison> filters;
  std::optional<std::size_t> limit;

  /// Pattern variables in order of first appearance. Binding slots use
  /// this numbering.
  std::vector<std::string> variables() const;
  std::optional<std::size_t> slot_of(std::string_view name) const;
};

/// Throws ParseError (including unknown prefixes and unbound SELECT or
/// FILTER variables) and UnsupportedFeature for keywords outside the
/// subset such as OPTIONAL, UNION or ORDER BY.
QueryPlan parse_query(std::string_view text);

/// Patterns sharing one subject position.
struct StarGroup {
  PatternTerm root;
  std::vector<TriplePattern> patterns;
  std::vector<std::size_t> pattern_indexes;  // positions in QueryPlan::patterns

  /// Variables mentioned anywhere in the star, first appearance order.
  std::vector<std::string> variables() const;
};

/// Star `star` joins the accumulated result on `shared` (empty means
/// cartesian product).
struct JoinStep {
  std::size_t star;
  std::vector<std::string> shared;
};

struct StarDecomposition {
  std::vector<StarGroup> stars;
  std::size_t first = 0;
  std::vector<JoinStep> joins;
};

/// Groups patterns by subject position (in order of first appearance) and
/// greedily schedules joins: next is the lowest-numbered star sharing a
/// variable with what has been joined so far.
StarDecomposition decompose_stars(const QueryPlan& plan);

/// Solution mapping. Slots follow QueryPlan::variables(); nullptr is
/// unbound. Terms point into the store the binding was produced from.
struct Binding {
  std::vector<const rdf::Term*> slots;
};

/// Map output: (subject, predicate-object). Points into the chunk.
struct MapEmission {
  const rdf::Term* key;
  const rdf::Term* predicate;
  const rdf::Term* object;
};

/// All values collected for one subject across every mapped chunk.
struct KeyGroup {
  const rdf::Term* key;
  std::vector<MapEmission> values;
};

/// Emits the chunk's triples whose predicate occurs in the star (every
/// triple when a pattern has a variable predicate), keyed by subject.
std::vector<MapEmission> map_phase(const rdf::TripleStore& chunk, const StarGroup& star);

/// Groups emissions by key. Keys appear in first-seen order.
std::vector<KeyGroup> group_by_key(std::span<const std::vector<MapEmission>> emissions);

/// One binding per consistent combination of collected pairs that
/// satisfies every star pattern and every filter whose variables the star
/// binds.
std::vector<Binding> reduce_phase(std::span<const KeyGroup> grouped, const StarGroup& star,
                                  const QueryPlan& plan, std::span<const Comparison> filters);

/// Projected rows in canonical order (lexicographic over the N-Triples
/// form of each column), truncated to the limit.
struct ResultSet {
  std::vector<std::string> columns;
  std::vector<std::vector<rdf::Term>> rows;

  std::size_t size() const noexcept { return rows.size(); }
  bool empty() const noexcept { return rows.empty(); }
  /// Values of one column, in row order.
  std::vector<rdf::Term> column(std::string_view name) const;

  /// Tab-separated, header first, terms in N-Triples form.
  std::string to_tsv() const;
  std::string to_csv() const;

  friend bool operator==(const ResultSet&, const ResultSet&) = default;
};

/// Sorts rows canonically and applies the limit.
void canonicalize(ResultSet& result, std::optional<std::size_t> limit);

/// Map/group/reduce per star over the chunks (map and reduce run on up
/// to `parallelism` threads), then hash-join the star results, apply
/// residual filters, project, sort and limit. Output does not depend on
/// the chunking or the thread count.
ResultSet execute(const rdf::ChunkedStore& chunked, const QueryPlan& plan,
                  std::size_t parallelism = 1);

/// Nested-loop evaluation over an unpartitioned store. Same contract as
/// execute; used as its oracle.
ResultSet execute_reference(const rdf::TripleStore& store, const QueryPlan& plan);

// ---- benchmark harness ----------------------------------------------------

struct BenchQuery {
  std::string label;
  QueryPlan plan;
};

/// 0-based chunk indexes plus a 1-based display label such as "1+2".
struct ChunkCombo {
  std::vector<std::size_t> chunks;
  std::string label;
};

/// "1;2;3" or "1+2;2+3;5+2" (1-based chunk numbers, ',' also accepted
/// inside a combo).
std::vector<ChunkCombo> parse_combos(std::string_view spec);

struct BenchCell {
  std::string query;
  std::string combo;
  double median_seconds;
  std::size_t rows;
};

struct BenchReport {
  std::vector<BenchCell> cells;

  /// Header `query,combo,median_seconds,rows`.
  std::string to_csv() const;
  /// Pivot: one row per query, one column per combo, median seconds.
  std::string to_table() const;
};

BenchReport bench(const rdf::ChunkedStore& chunked, std::span<const BenchQuery> queries,
                  std::span<const ChunkCombo> combos, std::size_t repeats,
                  std::size_t parallelism = 1);

}  // namespace ocep::query

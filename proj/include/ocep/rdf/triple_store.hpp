#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ocep/rdf/term.hpp"

namespace ocep::rdf {

/// An RDF statement. The constructor enforces the positional rules:
/// subject is an IRI or blank node, predicate is an IRI.
class Triple {
public:
  Triple(Term subject, Term predicate, Term object);

  const Term& subject() const noexcept { return subject_; }
  const Term& predicate() const noexcept { return predicate_; }
  const Term& object() const noexcept { return object_; }

  std::string to_ntriples() const;

  friend bool operator==(const Triple&, const Triple&) = default;
  friend std::strong_ordering operator<=>(const Triple&, const Triple&) = default;

private:
  Term subject_;
  Term predicate_;
  Term object_;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept;
};

/// Each position is either a concrete term or a wildcard (nullopt).
struct TriplePatternFilter {
  std::optional<Term> subject;
  std::optional<Term> predicate;
  std::optional<Term> object;

  bool matches(const Triple& t) const;
};

/// In-memory triple set with subject, predicate and object indexes.
/// Insertion order is kept and drives serialization order. Not
/// synchronized: load first, then share read-only.
class TripleStore {
public:
  TripleStore() = default;
  explicit TripleStore(std::span<const Triple> triples);

  /// Returns false (and changes nothing) if the triple is already present.
  bool insert(const Triple& triple);
  void insert_all(std::span<const Triple> triples);

  bool contains(const Triple& triple) const;
  std::size_t size() const noexcept { return triples_.size(); }
  bool empty() const noexcept { return triples_.empty(); }
  std::span<const Triple> triples() const noexcept { return triples_; }

  /// Positions in triples() matching the pattern, ascending. Scans the
  /// shortest candidate list among the bound positions' indexes.
  std::vector<std::size_t> match_ids(const TriplePatternFilter& pattern) const;
  std::vector<Triple> match(const TriplePatternFilter& pattern) const;

  std::optional<std::size_t> chunk_id() const noexcept { return chunk_id_; }
  void set_chunk_id(std::optional<std::size_t> id) noexcept { chunk_id_ = id; }

  /// Same triple set, ignoring order and chunk id.
  bool same_triples(const TripleStore& other) const;

private:
  using Index = std::unordered_map<Term, std::vector<std::size_t>, TermHash>;

  std::vector<Triple> triples_;
  std::unordered_set<Triple, TripleHash> present_;
  Index by_subject_;
  Index by_predicate_;
  Index by_object_;
  std::optional<std::size_t> chunk_id_;
};

/// Subject-hash partition of a store into k disjoint chunks. All triples
/// of one subject land in the same chunk.
class ChunkedStore {
public:
  ChunkedStore() = default;
  explicit ChunkedStore(std::vector<TripleStore> chunks) : chunks_(std::move(chunks)) {}

  std::size_t chunk_count() const noexcept { return chunks_.size(); }
  const TripleStore& chunk(std::size_t i) const { return chunks_.at(i); }
  std::span<const TripleStore> chunks() const noexcept { return chunks_; }
  std::size_t total_size() const noexcept;

  /// Sub-store made of the given 0-based chunk indexes, in the given order.
  ChunkedStore select(std::span<const std::size_t> indexes) const;

private:
  std::vector<TripleStore> chunks_;
};

/// Chunk a subject belongs to among k chunks.
std::size_t chunk_of(const Term& subject, std::size_t k) noexcept;

/// Throws InvalidArgument when k == 0.
ChunkedStore partition(const TripleStore& store, std::size_t k);

/// Union of the selected chunks (0-based indexes).
TripleStore merge(const ChunkedStore& chunked, std::span<const std::size_t> indexes);
TripleStore merge_all(const ChunkedStore& chunked);

}  // namespace ocep::rdf

template <>
struct std::hash<ocep::rdf::Triple> : ocep::rdf::TripleHash {};

#include "ocep/rdf/triple_store.hpp"

#include <algorithm>

#include "ocep/error.hpp"

namespace ocep::rdf {

Triple::Triple(Term subject, Term predicate, Term object)
    : subject_(std::move(subject)), predicate_(std::move(predicate)), object_(std::move(object)) {
  if (subject_.is_literal()) throw InvalidArgument("literal in subject position");
  if (!predicate_.is_iri()) throw InvalidArgument("predicate must be an IRI");
}

std::string Triple::to_ntriples() const {
  return subject_.to_ntriples() + " " + predicate_.to_ntriples() + " " + object_.to_ntriples() +
         " .";
}

std::size_t TripleHash::operator()(const Triple& t) const noexcept {
  TermHash h;
  std::size_t seed = h(t.subject());
  seed ^= h(t.predicate()) + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2);
  seed ^= h(t.object()) + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2);
  return seed;
}

bool TriplePatternFilter::matches(const Triple& t) const {
  return (!subject || *subject == t.subject()) && (!predicate || *predicate == t.predicate()) &&
         (!object || *object == t.object());
}

TripleStore::TripleStore(std::span<const Triple> triples) { insert_all(triples); }

bool TripleStore::insert(const Triple& triple) {
  if (!present_.insert(triple).second) return false;
  const std::size_t id = triples_.size();
  triples_.push_back(triple);
  by_subject_[triple.subject()].push_back(id);
  by_predicate_[triple.predicate()].push_back(id);
  by_object_[triple.object()].push_back(id);
  return true;
}

void TripleStore::insert_all(std::span<const Triple> triples) {
  for (const auto& t : triples) insert(t);
}

bool TripleStore::contains(const Triple& triple) const { return present_.contains(triple); }

std::vector<std::size_t> TripleStore::match_ids(const TriplePatternFilter& pattern) const {
  static const std::vector<std::size_t> kNone;
  const std::vector<std::size_t>* best = nullptr;
  auto consider = [&](const Index& index, const std::optional<Term>& key) {
    if (!key) return;
    auto it = index.find(*key);
    const auto* list = it == index.end() ? &kNone : &it->second;
    if (!best || list->size() < best->size()) best = list;
  };
  consider(by_subject_, pattern.subject);
  consider(by_predicate_, pattern.predicate);
  consider(by_object_, pattern.object);

  std::vector<std::size_t> out;
  if (!best) {
    out.resize(triples_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
    return out;
  }
  for (std::size_t id : *best)
    if (pattern.matches(triples_[id])) out.push_back(id);
  return out;
}

std::vector<Triple> TripleStore::match(const TriplePatternFilter& pattern) const {
  std::vector<Triple> out;
  for (std::size_t id : match_ids(pattern)) out.push_back(triples_[id]);
  return out;
}

bool TripleStore::same_triples(const TripleStore& other) const {
  if (size() != other.size()) return false;
  return std::all_of(triples_.begin(), triples_.end(),
                     [&](const Triple& t) { return other.contains(t); });
}

std::size_t ChunkedStore::total_size() const noexcept {
  std::size_t n = 0;
  for (const auto& c : chunks_) n += c.size();
  return n;
}

ChunkedStore ChunkedStore::select(std::span<const std::size_t> indexes) const {
  std::vector<TripleStore> picked;
  picked.reserve(indexes.size());
  for (std::size_t i : indexes) picked.push_back(chunk(i));
  return ChunkedStore(std::move(picked));
}

std::size_t chunk_of(const Term& subject, std::size_t k) noexcept {
  return static_cast<std::size_t>(stable_hash(subject.to_ntriples()) % k);
}

ChunkedStore partition(const TripleStore& store, std::size_t k) {
  if (k == 0) throw InvalidArgument("chunk count must be at least 1");
  std::vector<TripleStore> chunks(k);
  for (std::size_t i = 0; i < k; ++i) chunks[i].set_chunk_id(i);
  for (const auto& t : store.triples()) chunks[chunk_of(t.subject(), k)].insert(t);
  return ChunkedStore(std::move(chunks));
}

TripleStore merge(const ChunkedStore& chunked, std::span<const std::size_t> indexes) {
  TripleStore out;
  for (std::size_t i : indexes) out.insert_all(chunked.chunk(i).triples());
  return out;
}

TripleStore merge_all(const ChunkedStore& chunked) {
  TripleStore out;
  for (const auto& c : chunked.chunks()) out.insert_all(c.triples());
  return out;
}

}  // namespace ocep::rdf

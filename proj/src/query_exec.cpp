#include <algorithm>
#include <unordered_map>

#include "ocep/error.hpp"
#include "ocep/parallel.hpp"
#include "ocep/query.hpp"

namespace ocep::query {

using rdf::Term;

bool compare_terms(const Term& lhs, CompareOp op, const Term& rhs) {
  int cmp;
  auto a = lhs.numeric();
  auto b = rhs.numeric();
  if (a && b) {
    cmp = *a < *b ? -1 : (*a > *b ? 1 : 0);
  } else if (lhs.is_plain_string() && rhs.is_plain_string()) {
    cmp = lhs.value().compare(rhs.value());
    cmp = cmp < 0 ? -1 : (cmp > 0 ? 1 : 0);
  } else {
    if (op == CompareOp::eq) return lhs == rhs;
    if (op == CompareOp::ne) return lhs != rhs;
    return false;
  }
  switch (op) {
    case CompareOp::lt: return cmp < 0;
    case CompareOp::le: return cmp <= 0;
    case CompareOp::gt: return cmp > 0;
    case CompareOp::ge: return cmp >= 0;
    case CompareOp::eq: return cmp == 0;
    case CompareOp::ne: return cmp != 0;
  }
  return false;
}

std::vector<std::string> StarGroup::variables() const {
  std::vector<std::string> out;
  auto add = [&](const PatternTerm& t) {
    if (auto* n = var_name(t); n && std::find(out.begin(), out.end(), *n) == out.end())
      out.push_back(*n);
  };
  add(root);
  for (const auto& p : patterns) {
    add(p.predicate);
    add(p.object);
  }
  return out;
}

StarDecomposition decompose_stars(const QueryPlan& plan) {
  StarDecomposition d;
  for (std::size_t i = 0; i < plan.patterns.size(); ++i) {
    const auto& p = plan.patterns[i];
    auto it = std::find_if(d.stars.begin(), d.stars.end(),
                           [&](const StarGroup& s) { return s.root == p.subject; });
    if (it == d.stars.end()) {
      d.stars.push_back({p.subject, {}, {}});
      it = std::prev(d.stars.end());
    }
    it->patterns.push_back(p);
    it->pattern_indexes.push_back(i);
  }
  if (d.stars.empty()) return d;

  std::vector<std::string> joined = d.stars[0].variables();
  std::vector<bool> done(d.stars.size(), false);
  done[0] = true;
  for (std::size_t round = 1; round < d.stars.size(); ++round) {
    std::optional<JoinStep> step;
    for (std::size_t s = 0; s < d.stars.size() && !step; ++s) {
      if (done[s]) continue;
      std::vector<std::string> shared;
      for (const auto& v : d.stars[s].variables())
        if (std::find(joined.begin(), joined.end(), v) != joined.end()) shared.push_back(v);
      if (!shared.empty()) step = JoinStep{s, std::move(shared)};
    }
    if (!step) {
      // Disconnected star: cartesian product with the lowest remaining one.
      auto s = static_cast<std::size_t>(std::find(done.begin(), done.end(), false) - done.begin());
      step = JoinStep{s, {}};
    }
    done[step->star] = true;
    for (const auto& v : d.stars[step->star].variables())
      if (std::find(joined.begin(), joined.end(), v) == joined.end()) joined.push_back(v);
    d.joins.push_back(std::move(*step));
  }
  return d;
}

namespace {

// Resolved form of a filter against binding slots.
struct SlotFilter {
  std::size_t lhs;
  CompareOp op;
  std::optional<std::size_t> rhs_slot;
  const Term* rhs_term = nullptr;
};

SlotFilter resolve(const QueryPlan& plan, const Comparison& f) {
  SlotFilter out{*plan.slot_of(f.variable), f.op, std::nullopt, nullptr};
  if (auto* n = var_name(f.operand)) {
    out.rhs_slot = *plan.slot_of(*n);
  } else {
    out.rhs_term = &std::get<Term>(f.operand);
  }
  return out;
}

// nullopt while a filter variable is still unbound.
std::optional<bool> evaluate(const SlotFilter& f, const std::vector<const Term*>& slots) {
  const Term* lhs = slots[f.lhs];
  const Term* rhs = f.rhs_slot ? slots[*f.rhs_slot] : f.rhs_term;
  if (!lhs || !rhs) return std::nullopt;
  return compare_terms(*lhs, f.op, *rhs);
}

struct SlotPattern {
  // Either a slot (variable) or a concrete term.
  std::optional<std::size_t> slot;
  const Term* term = nullptr;
};

SlotPattern resolve(const QueryPlan& plan, const PatternTerm& t) {
  if (auto* n = var_name(t)) return {*plan.slot_of(*n), nullptr};
  return {std::nullopt, &std::get<Term>(t)};
}

// Binds `value` at position p; records newly bound slots for undo.
bool unify(const SlotPattern& p, const Term* value, std::vector<const Term*>& slots,
           std::vector<std::size_t>& undo) {
  if (!p.slot) return *p.term == *value;
  const Term*& cur = slots[*p.slot];
  if (cur) return *cur == *value;
  cur = value;
  undo.push_back(*p.slot);
  return true;
}

struct RowKeyHash {
  std::size_t operator()(const std::vector<const Term*>& key) const noexcept {
    std::size_t h = 0x9e3779b97f4a7c15ULL;
    for (const Term* t : key) h = (h * 1099511628211ULL) ^ rdf::TermHash{}(*t);
    return h;
  }
};

struct RowKeyEq {
  bool operator()(const std::vector<const Term*>& a,
                  const std::vector<const Term*>& b) const noexcept {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!(*a[i] == *b[i])) return false;
    return true;
  }
};

struct TermPtrHash {
  std::size_t operator()(const Term* t) const noexcept { return rdf::TermHash{}(*t); }
};
struct TermPtrEq {
  bool operator()(const Term* a, const Term* b) const noexcept { return *a == *b; }
};

ResultSet project(const QueryPlan& plan, const std::vector<Binding>& bindings) {
  ResultSet result;
  result.columns = plan.select_vars;
  std::vector<std::size_t> slots;
  for (const auto& v : plan.select_vars) slots.push_back(*plan.slot_of(v));
  result.rows.reserve(bindings.size());
  for (const auto& b : bindings) {
    std::vector<Term> row;
    row.reserve(slots.size());
    for (auto s : slots) {
      if (!b.slots[s]) throw InternalError("projected variable left unbound");
      row.push_back(*b.slots[s]);
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

std::vector<Binding> hash_join(std::vector<Binding> left, const std::vector<Binding>& right,
                               const std::vector<std::size_t>& shared) {
  std::vector<Binding> out;
  auto merge_into = [](Binding merged, const Binding& r) {
    for (std::size_t i = 0; i < merged.slots.size(); ++i)
      if (!merged.slots[i]) merged.slots[i] = r.slots[i];
    return merged;
  };
  if (shared.empty()) {
    out.reserve(left.size() * right.size());
    for (const auto& l : left)
      for (const auto& r : right) out.push_back(merge_into(l, r));
    return out;
  }
  auto key_of = [&](const Binding& b, const char* side) {
    std::vector<const Term*> key;
    key.reserve(shared.size());
    for (auto s : shared) {
      if (!b.slots[s])
        throw InternalError(std::string("join variable unbound on the ") + side + " side");
      key.push_back(b.slots[s]);
    }
    return key;
  };
  std::unordered_map<std::vector<const Term*>, std::vector<std::size_t>, RowKeyHash, RowKeyEq>
      table;
  for (std::size_t i = 0; i < right.size(); ++i) table[key_of(right[i], "right")].push_back(i);
  for (const auto& l : left) {
    auto it = table.find(key_of(l, "left"));
    if (it == table.end()) continue;
    for (auto i : it->second) out.push_back(merge_into(l, right[i]));
  }
  return out;
}

}  // namespace

std::vector<MapEmission> map_phase(const rdf::TripleStore& chunk, const StarGroup& star) {
  bool any_predicate = false;
  std::vector<const Term*> predicates;
  for (const auto& p : star.patterns) {
    if (is_var(p.predicate)) {
      any_predicate = true;
    } else {
      predicates.push_back(&std::get<Term>(p.predicate));
    }
  }
  const Term* root = is_var(star.root) ? nullptr : &std::get<Term>(star.root);

  std::vector<MapEmission> out;
  for (const auto& t : chunk.triples()) {
    if (root && !(t.subject() == *root)) continue;
    bool wanted = any_predicate || std::any_of(predicates.begin(), predicates.end(),
                                               [&](const Term* p) { return *p == t.predicate(); });
    if (wanted) out.push_back({&t.subject(), &t.predicate(), &t.object()});
  }
  return out;
}

std::vector<KeyGroup> group_by_key(std::span<const std::vector<MapEmission>> emissions) {
  std::vector<KeyGroup> out;
  std::unordered_map<const Term*, std::size_t, TermPtrHash, TermPtrEq> index;
  for (const auto& list : emissions) {
    for (const auto& e : list) {
      auto [it, fresh] = index.try_emplace(e.key, out.size());
      if (fresh) out.push_back({e.key, {}});
      out[it->second].values.push_back(e);
    }
  }
  return out;
}

std::vector<Binding> reduce_phase(std::span<const KeyGroup> grouped, const StarGroup& star,
                                  const QueryPlan& plan, std::span<const Comparison> filters) {
  const std::size_t width = plan.variables().size();
  const SlotPattern root = resolve(plan, star.root);
  std::vector<std::pair<SlotPattern, SlotPattern>> patterns;
  for (const auto& p : star.patterns)
    patterns.emplace_back(resolve(plan, p.predicate), resolve(plan, p.object));
  std::vector<SlotFilter> slot_filters;
  for (const auto& f : filters) slot_filters.push_back(resolve(plan, f));

  std::vector<Binding> out;
  std::vector<const Term*> slots(width, nullptr);
  std::vector<std::size_t> undo;

  for (const auto& group : grouped) {
    std::fill(slots.begin(), slots.end(), nullptr);
    undo.clear();
    if (!unify(root, group.key, slots, undo)) continue;

    // Depth-first over patterns; each level picks one collected pair.
    auto search = [&](auto& self, std::size_t depth) -> void {
      if (depth == patterns.size()) {
        for (const auto& f : slot_filters)
          if (evaluate(f, slots) == false) return;
        out.push_back({slots});
        return;
      }
      const auto& [pred, obj] = patterns[depth];
      for (const auto& e : group.values) {
        const std::size_t mark = undo.size();
        if (unify(pred, e.predicate, slots, undo) && unify(obj, e.object, slots, undo)) {
          bool rejected = false;
          for (const auto& f : slot_filters)
            if (evaluate(f, slots) == false) {
              rejected = true;
              break;
            }
          if (!rejected) self(self, depth + 1);
        }
        while (undo.size() > mark) {
          slots[undo.back()] = nullptr;
          undo.pop_back();
        }
      }
    };
    search(search, 0);
  }
  return out;
}

ResultSet execute(const rdf::ChunkedStore& chunked, const QueryPlan& plan,
                  std::size_t parallelism) {
  if (plan.limit == 0u || plan.patterns.empty()) {
    ResultSet empty;
    empty.columns = plan.select_vars;
    return empty;
  }
  const std::size_t workers = resolve_workers(parallelism);
  const StarDecomposition d = decompose_stars(plan);
  const std::size_t n_stars = d.stars.size();
  const std::size_t n_chunks = chunked.chunk_count();

  // Filters go to the first star binding all their variables.
  std::vector<std::vector<Comparison>> pushed(n_stars);
  std::vector<Comparison> residual;
  for (const auto& f : plan.filters) {
    std::vector<std::string> needed{f.variable};
    if (auto* n = var_name(f.operand)) needed.push_back(*n);
    bool placed = false;
    for (std::size_t s = 0; s < n_stars && !placed; ++s) {
      auto vars = d.stars[s].variables();
      if (std::all_of(needed.begin(), needed.end(), [&](const std::string& v) {
            return std::find(vars.begin(), vars.end(), v) != vars.end();
          })) {
        pushed[s].push_back(f);
        placed = true;
      }
    }
    if (!placed) residual.push_back(f);
  }

  // Map: one task per (star, chunk).
  std::vector<std::vector<std::vector<MapEmission>>> emitted(
      n_stars, std::vector<std::vector<MapEmission>>(n_chunks));
  parallel_for(n_stars * n_chunks, workers, [&](std::size_t task) {
    const std::size_t s = task / n_chunks;
    const std::size_t c = task % n_chunks;
    emitted[s][c] = map_phase(chunked.chunk(c), d.stars[s]);
  });

  // Group (barrier), then reduce over contiguous key ranges.
  std::vector<std::vector<Binding>> star_results(n_stars);
  for (std::size_t s = 0; s < n_stars; ++s) {
    const std::vector<KeyGroup> grouped = group_by_key(emitted[s]);
    const std::size_t parts = std::max<std::size_t>(1, std::min(workers, grouped.size()));
    std::vector<std::vector<Binding>> partial(parts);
    parallel_for(parts, workers, [&](std::size_t part) {
      const std::size_t lo = grouped.size() * part / parts;
      const std::size_t hi = grouped.size() * (part + 1) / parts;
      partial[part] = reduce_phase(std::span(grouped).subspan(lo, hi - lo), d.stars[s], plan,
                                   pushed[s]);
    });
    for (auto& p : partial)
      star_results[s].insert(star_results[s].end(), std::make_move_iterator(p.begin()),
                             std::make_move_iterator(p.end()));
  }

  std::vector<Binding> acc = std::move(star_results[d.first]);
  for (const auto& step : d.joins) {
    if (acc.empty()) break;
    std::vector<std::size_t> shared;
    for (const auto& v : step.shared) shared.push_back(*plan.slot_of(v));
    acc = hash_join(std::move(acc), star_results[step.star], shared);
  }

  if (!residual.empty()) {
    std::vector<SlotFilter> slot_filters;
    for (const auto& f : residual) slot_filters.push_back(resolve(plan, f));
    std::erase_if(acc, [&](const Binding& b) {
      for (const auto& f : slot_filters) {
        auto ok = evaluate(f, b.slots);
        if (!ok) throw InternalError("filter variable unbound after joins");
        if (!*ok) return true;
      }
      return false;
    });
  }

  ResultSet result = project(plan, acc);
  canonicalize(result, plan.limit);
  return result;
}

ResultSet execute_reference(const rdf::TripleStore& store, const QueryPlan& plan) {
  using Solution = std::map<std::string, Term>;
  std::vector<Solution> solutions(1);
  if (plan.limit == 0u) solutions.clear();

  for (const auto& pattern : plan.patterns) {
    std::vector<Solution> next;
    for (const auto& sol : solutions) {
      auto concrete = [&](const PatternTerm& t) -> std::optional<Term> {
        if (auto* n = var_name(t)) {
          auto it = sol.find(*n);
          if (it == sol.end()) return std::nullopt;
          return it->second;
        }
        return std::get<Term>(t);
      };
      rdf::TriplePatternFilter filter{concrete(pattern.subject), concrete(pattern.predicate),
                                      concrete(pattern.object)};
      for (auto id : store.match_ids(filter)) {
        const auto& t = store.triples()[id];
        Solution extended = sol;
        bool ok = true;
        auto bind = [&](const PatternTerm& p, const Term& value) {
          auto* n = var_name(p);
          if (!n) return;
          auto [it, fresh] = extended.try_emplace(*n, value);
          if (!fresh && !(it->second == value)) ok = false;
        };
        bind(pattern.subject, t.subject());
        bind(pattern.predicate, t.predicate());
        bind(pattern.object, t.object());
        if (ok) next.push_back(std::move(extended));
      }
    }
    solutions = std::move(next);
  }

  ResultSet result;
  result.columns = plan.select_vars;
  for (const auto& sol : solutions) {
    bool keep = true;
    for (const auto& f : plan.filters) {
      const Term& lhs = sol.at(f.variable);
      const Term& rhs = is_var(f.operand) ? sol.at(std::get<Var>(f.operand).name)
                                          : std::get<Term>(f.operand);
      if (!compare_terms(lhs, f.op, rhs)) {
        keep = false;
        break;
      }
    }
    if (!keep) continue;
    std::vector<Term> row;
    for (const auto& v : plan.select_vars) row.push_back(sol.at(v));
    result.rows.push_back(std::move(row));
  }
  canonicalize(result, plan.limit);
  return result;
}

void canonicalize(ResultSet& result, std::optional<std::size_t> limit) {
  std::vector<std::pair<std::vector<std::string>, std::size_t>> keys;
  keys.reserve(result.rows.size());
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    std::vector<std::string> key;
    key.reserve(result.rows[i].size());
    for (const auto& t : result.rows[i]) key.push_back(t.to_ntriples());
    keys.emplace_back(std::move(key), i);
  }
  std::sort(keys.begin(), keys.end());
  std::vector<std::vector<Term>> rows;
  const std::size_t n = limit ? std::min(*limit, keys.size()) : keys.size();
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) rows.push_back(std::move(result.rows[keys[i].second]));
  result.rows = std::move(rows);
}

std::vector<Term> ResultSet::column(std::string_view name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw InvalidArgument("no column ?" + std::string(name));
  const auto idx = static_cast<std::size_t>(it - columns.begin());
  std::vector<Term> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[idx]);
  return out;
}

std::string ResultSet::to_tsv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out += '\t';
    out += '?' + columns[i];
  }
  out += '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += '\t';
      out += r[i].to_ntriples();
    }
    out += '\n';
  }
  return out;
}

std::string ResultSet::to_csv() const {
  auto cell = [](const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + '"';
  };
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out += ',';
    out += cell(columns[i]);
  }
  out += '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      out += cell(r[i].value());
    }
    out += '\n';
  }
  return out;
}

}  // namespace ocep::query

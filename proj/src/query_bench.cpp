#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>

#include "ocep/error.hpp"
#include "ocep/query.hpp"

namespace ocep::query {

std::vector<ChunkCombo> parse_combos(std::string_view spec) {
  std::vector<ChunkCombo> out;
  std::size_t start = 0;
  while (start <= spec.size()) {
    auto end = spec.find(';', start);
    if (end == std::string_view::npos) end = spec.size();
    std::string_view part = spec.substr(start, end - start);
    start = end + 1;

    ChunkCombo combo;
    std::string number;
    auto flush = [&] {
      if (number.empty()) throw InvalidArgument("empty chunk number in combo '" + std::string(part) + "'");
      const unsigned long n = std::stoul(number);
      if (n == 0) throw InvalidArgument("chunk numbers are 1-based");
      combo.chunks.push_back(n - 1);
      if (!combo.label.empty()) combo.label += '+';
      combo.label += std::to_string(n);
      number.clear();
    };
    for (char c : part) {
      if (c == ' ' || c == '\t') continue;
      if (c >= '0' && c <= '9') {
        number += c;
      } else if (c == '+' || c == ',') {
        flush();
      } else {
        throw InvalidArgument("bad character '" + std::string(1, c) + "' in combo list");
      }
    }
    if (number.empty() && combo.chunks.empty()) {
      if (end == spec.size()) break;  // tolerate a trailing ';'
      throw InvalidArgument("empty combo in '" + std::string(spec) + "'");
    }
    flush();
    out.push_back(std::move(combo));
  }
  if (out.empty()) throw InvalidArgument("no chunk combos given");
  return out;
}

BenchReport bench(const rdf::ChunkedStore& chunked, std::span<const BenchQuery> queries,
                  std::span<const ChunkCombo> combos, std::size_t repeats,
                  std::size_t parallelism) {
  if (repeats == 0) throw InvalidArgument("repeats must be at least 1");
  for (const auto& combo : combos)
    for (auto c : combo.chunks)
      if (c >= chunked.chunk_count())
        throw InvalidArgument("combo " + combo.label + " names chunk " + std::to_string(c + 1) +
                              " but the store has " + std::to_string(chunked.chunk_count()));

  BenchReport report;
  for (const auto& q : queries) {
    for (const auto& combo : combos) {
      const rdf::ChunkedStore subset = chunked.select(combo.chunks);
      std::vector<double> times;
      std::size_t rows = 0;
      for (std::size_t r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        rows = execute(subset, q.plan, parallelism).size();
        const auto t1 = std::chrono::steady_clock::now();
        times.push_back(std::chrono::duration<double>(t1 - t0).count());
      }
      std::sort(times.begin(), times.end());
      const std::size_t m = times.size();
      const double median = m % 2 ? times[m / 2] : (times[m / 2 - 1] + times[m / 2]) / 2;
      report.cells.push_back({q.label, combo.label, median, rows});
    }
  }
  return report;
}

std::string BenchReport::to_csv() const {
  std::string out = "query,combo,median_seconds,rows\n";
  char buf[64];
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof buf, "%.6f", c.median_seconds);
    out += c.query + ',' + c.combo + ',' + buf + ',' + std::to_string(c.rows) + '\n';
  }
  return out;
}

std::string BenchReport::to_table() const {
  std::vector<std::string> queries, combos;
  std::map<std::pair<std::string, std::string>, double> value;
  for (const auto& c : cells) {
    if (std::find(queries.begin(), queries.end(), c.query) == queries.end())
      queries.push_back(c.query);
    if (std::find(combos.begin(), combos.end(), c.combo) == combos.end())
      combos.push_back(c.combo);
    value[{c.query, c.combo}] = c.median_seconds;
  }
  std::size_t w0 = 5;
  for (const auto& q : queries) w0 = std::max(w0, q.size());
  std::string out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(w0), "Query");
  out += buf;
  for (const auto& c : combos) {
    std::snprintf(buf, sizeof buf, "  %12s", ("Chunk " + c).c_str());
    out += buf;
  }
  out += '\n';
  for (const auto& q : queries) {
    std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(w0), q.c_str());
    out += buf;
    for (const auto& c : combos) {
      auto it = value.find({q, c});
      if (it == value.end()) {
        std::snprintf(buf, sizeof buf, "  %12s", "-");
      } else {
        std::snprintf(buf, sizeof buf, "  %12.6f", it->second);
      }
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace ocep::query

#include "ocep/ppg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "ocep/error.hpp"
#include "ocep/random.hpp"

namespace ocep::ppg {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// "Time [s]" -> "time", " SpO2" -> "spo2".
std::string normalize_header(std::string_view cell) {
  cell = trim(cell);
  if (auto bracket = cell.find('['); bracket != std::string_view::npos)
    cell = trim(cell.substr(0, bracket));
  std::string out(cell);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::optional<double> parse_number(std::string_view cell) {
  std::string buf(cell);
  const char* begin = buf.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v)) return std::nullopt;
  return v;
}

double round_half_up(double x) { return std::floor(x + 0.5); }

std::string format_value(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) return std::to_string(static_cast<long long>(v));
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string_view column_name(Vital v) {
  switch (v) {
    case Vital::hr: return "HR";
    case Vital::pulse: return "PULSE";
    case Vital::resp: return "RESP";
    case Vital::spo2: return "SpO2";
  }
  return {};
}

std::string_view property_name(Vital v) {
  switch (v) {
    case Vital::hr: return "hasHR";
    case Vital::pulse: return "hasPULSE";
    case Vital::resp: return "hasRESP";
    case Vital::spo2: return "hasSpO2";
  }
  return {};
}

bool PPGRecord::complete() const {
  return std::all_of(values.begin(), values.end(), [](const auto& v) { return v.has_value(); });
}

std::vector<PPGRecord> parse_csv(std::string_view text) {
  std::vector<PPGRecord> out;
  auto lines = split(text, '\n');

  std::size_t line_no = 0;
  std::size_t header_line = 0;
  std::optional<std::size_t> time_col;
  std::array<std::optional<std::size_t>, 4> vital_col{};
  std::size_t width = 0;

  for (auto raw : lines) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    auto cells = split(line, ',');

    if (header_line == 0) {
      header_line = line_no;
      width = cells.size();
      for (std::size_t i = 0; i < cells.size(); ++i) {
        std::string name = normalize_header(cells[i]);
        if (name == "time") time_col = i;
        for (Vital v : kVitals)
          if (name == normalize_header(column_name(v))) vital_col[static_cast<std::size_t>(v)] = i;
      }
      if (!time_col) throw SchemaError("missing required column Time");
      for (Vital v : kVitals)
        if (!vital_col[static_cast<std::size_t>(v)])
          throw SchemaError("missing required column " + std::string(column_name(v)));
      continue;
    }

    if (cells.size() < width)
      throw ParseError("expected " + std::to_string(width) + " fields, got " +
                           std::to_string(cells.size()),
                       line_no, std::string(line));

    PPGRecord rec;
    auto time_cell = trim(cells[*time_col]);
    auto t = parse_number(time_cell);
    if (!t || *t < 0 || *t != std::floor(*t))
      throw ParseError("column Time: expected a non-negative integer, got '" +
                           std::string(time_cell) + "'",
                       line_no, std::string(line));
    rec.time = static_cast<std::int64_t>(*t);
    for (Vital v : kVitals) {
      auto cell = trim(cells[*vital_col[static_cast<std::size_t>(v)]]);
      if (cell.empty()) continue;
      auto value = parse_number(cell);
      if (!value)
        throw ParseError("column " + std::string(column_name(v)) + ": not a number '" +
                             std::string(cell) + "'",
                         line_no, std::string(line));
      rec[v] = *value;
    }
    out.push_back(rec);
  }
  return out;
}

std::vector<PPGRecord> preprocess(std::vector<PPGRecord> records, const PreprocessConfig& config) {
  for (std::size_t i = 1; i < records.size(); ++i)
    if (records[i].time <= records[i - 1].time)
      throw InvalidArgument("record times must be strictly increasing (time " +
                            std::to_string(records[i].time) + " after " +
                            std::to_string(records[i - 1].time) + ")");
  if (records.empty()) return records;

  for (Vital v : kVitals) {
    const Interval bounds = config.bounds[static_cast<std::size_t>(v)];
    if (!(bounds.lo <= bounds.hi)) throw InvalidArgument("empty plausibility interval");

    std::vector<std::size_t> present;
    for (std::size_t i = 0; i < records.size(); ++i) {
      auto& cell = records[i][v];
      if (cell && !bounds.contains(*cell)) cell.reset();
      if (cell) present.push_back(i);
    }
    if (present.empty())
      throw SchemaError("column " + std::string(column_name(v)) + " has no usable values");

    // Fill from the original present samples only.
    std::size_t next = 0;  // index into present of the first present sample >= i
    for (std::size_t i = 0; i < records.size(); ++i) {
      while (next < present.size() && present[next] < i) ++next;
      if (next < present.size() && present[next] == i) continue;
      const bool has_prev = next > 0;
      const bool has_next = next < present.size();
      double filled;
      if (has_prev && has_next) {
        const auto& a = records[present[next - 1]];
        const auto& b = records[present[next]];
        if (config.imputation == Imputation::forward_fill) {
          filled = *a[v];
        } else {
          const double frac = static_cast<double>(records[i].time - a.time) /
                              static_cast<double>(b.time - a.time);
          filled = *a[v] + (*b[v] - *a[v]) * frac;
        }
      } else if (has_prev) {
        filled = *records[present[next - 1]][v];
      } else {
        filled = *records[present[next]][v];
      }
      records[i][v] = filled;
    }
    if (config.round_to_integer)
      for (auto& r : records) r[v] = round_half_up(*r[v]);
  }
  return records;
}

std::string sample_iri(std::string_view patient_id, std::int64_t time,
                       std::string_view namespace_iri) {
  std::string iri(namespace_iri);
  iri += "Time_";
  if (!patient_id.empty()) {
    iri += patient_id;
    iri += '_';
  }
  iri += std::to_string(time);
  return iri;
}

std::vector<rdf::Triple> convert(const std::vector<PPGRecord>& records, std::string_view patient_id,
                                 const ConvertOptions& options) {
  using rdf::Term;
  const std::string& ns = options.namespace_iri;
  const Term type = Term::iri(std::string(rdf::vocab::rdf_type));
  const Term ppg_data = Term::iri(ns + "PPGData");
  const Term has_time = Term::iri(ns + "hasTime");
  std::array<Term, 4> props{Term::iri(ns + "hasHR"), Term::iri(ns + "hasPULSE"),
                            Term::iri(ns + "hasRESP"), Term::iri(ns + "hasSpO2")};

  auto value_term = [&](double v) {
    if (options.allow_decimals && v != std::floor(v))
      return Term::literal(format_value(v), std::string(rdf::vocab::xsd_decimal));
    return Term::integer(static_cast<long long>(round_half_up(v)));
  };

  std::vector<rdf::Triple> out;
  out.reserve(records.size() * 6);
  for (const auto& r : records) {
    if (!r.complete())
      throw InvalidArgument("record at time " + std::to_string(r.time) +
                            " has missing values; preprocess first");
    Term subject = Term::iri(sample_iri(patient_id, r.time, ns));
    out.emplace_back(subject, type, ppg_data);
    out.emplace_back(subject, has_time, Term::integer(r.time));
    for (Vital v : kVitals) out.emplace_back(subject, props[static_cast<std::size_t>(v)], value_term(*r[v]));
  }
  return out;
}

std::string to_csv(const std::vector<PPGRecord>& records) {
  std::ostringstream out;
  out << "Time,HR,PULSE,RESP,SpO2\n";
  for (const auto& r : records) {
    out << r.time;
    for (Vital v : kVitals) {
      out << ',';
      if (r[v]) out << format_value(*r[v]);
    }
    out << '\n';
  }
  return out.str();
}

std::string export_normalized(const std::vector<PPGRecord>& records) {
  std::array<double, 4> lo{}, hi{};
  lo.fill(INFINITY);
  hi.fill(-INFINITY);
  for (const auto& r : records)
    for (Vital v : kVitals)
      if (r[v]) {
        auto k = static_cast<std::size_t>(v);
        lo[k] = std::min(lo[k], *r[v]);
        hi[k] = std::max(hi[k], *r[v]);
      }
  std::ostringstream out;
  out << "Time,HR,PULSE,RESP,SpO2\n";
  for (const auto& r : records) {
    out << r.time;
    for (Vital v : kVitals) {
      auto k = static_cast<std::size_t>(v);
      out << ',';
      if (!r[v]) continue;
      const double span = hi[k] - lo[k];
      out << format_value(span > 0 ? (*r[v] - lo[k]) / span : 0.0);
    }
    out << '\n';
  }
  return out.str();
}

std::vector<PPGRecord> synthesize_recording(std::size_t seconds, std::uint64_t seed,
                                            const RecordingProfile& profile) {
  Rng rng(seed);
  std::vector<PPGRecord> out;
  out.reserve(seconds);
  double hr_drift = 0;
  for (std::size_t t = 0; t < seconds; ++t) {
    hr_drift = 0.8 * hr_drift + 0.2 * profile.hr_jitter * rng.normal();
    PPGRecord r;
    r.time = static_cast<std::int64_t>(t);
    const double hr = std::round(profile.hr + hr_drift);
    r[Vital::hr] = hr;
    r[Vital::pulse] = std::round(hr + rng.normal() * 0.7);
    r[Vital::resp] = std::round(profile.resp + rng.normal() * 0.8);
    r[Vital::spo2] = std::min(100.0, std::round(profile.spo2 + rng.normal() * 0.6));
    for (Vital v : kVitals) {
      if (rng.chance(profile.missing_rate)) {
        r[v].reset();
      } else if (rng.chance(profile.spike_rate)) {
        r[v] = rng.chance(0.5) ? 400.0 : 0.0;
      }
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace ocep::ppg

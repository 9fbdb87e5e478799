#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ocep/rdf/triple_store.hpp"

namespace ocep::ppg {

/// The four per-second vitals of a PPG recording, in column order.
enum class Vital : std::size_t { hr = 0, pulse = 1, resp = 2, spo2 = 3 };

inline constexpr std::array<Vital, 4> kVitals{Vital::hr, Vital::pulse, Vital::resp, Vital::spo2};

/// CSV column header for a vital ("HR", "PULSE", "RESP", "SpO2").
std::string_view column_name(Vital v);
/// RDF property local name ("hasHR", ...).
std::string_view property_name(Vital v);

struct Interval {
  double lo;
  double hi;
  bool contains(double x) const { return lo <= x && x <= hi; }
};

/// One sample row. A vital is nullopt when the cell was empty.
struct PPGRecord {
  std::int64_t time = 0;
  std::array<std::optional<double>, 4> values{};

  std::optional<double>& operator[](Vital v) { return values[static_cast<std::size_t>(v)]; }
  const std::optional<double>& operator[](Vital v) const {
    return values[static_cast<std::size_t>(v)];
  }
  bool complete() const;

  friend bool operator==(const PPGRecord&, const PPGRecord&) = default;
};

enum class Imputation { linear, forward_fill };

struct PreprocessConfig {
  Imputation imputation = Imputation::linear;
  /// Plausibility bounds; values outside are treated as missing.
  std::array<Interval, 4> bounds{{{20, 250}, {20, 250}, {4, 60}, {50, 100}}};
  /// Round filled and raw values half-up to integers (xsd:integer output).
  bool round_to_integer = true;
  /// Only consulted by export_normalized; RDF output stays in clinical units.
  bool normalize_export = false;
};

/// Header must name Time, HR, PULSE, RESP and SpO2 (any order,
/// case-insensitive, bracketed units such as "Time [s]" allowed).
/// Other columns are ignored. Empty cells become nullopt; an empty
/// document yields no records.
/// Throws SchemaError for a missing column and ParseError for a
/// non-numeric cell or non-integral time.
std::vector<PPGRecord> parse_csv(std::string_view text);

/// Fills gaps and replaces implausible values. Interior gaps are linearly
/// interpolated in time between the nearest present neighbours; leading
/// and trailing gaps copy the nearest present value.
/// Throws InvalidArgument if times are not strictly increasing and
/// SchemaError if a vital is missing in every record.
std::vector<PPGRecord> preprocess(std::vector<PPGRecord> records,
                                  const PreprocessConfig& config = {});

struct ConvertOptions {
  std::string namespace_iri = std::string(rdf::vocab::healthcare_ns);
  /// Emit xsd:decimal for non-integral values instead of rounding.
  bool allow_decimals = false;
};

/// Subject IRI for one sample: `<ns>Time_<t>`, or `<ns>Time_<patient>_<t>`
/// when patient_id is not empty.
std::string sample_iri(std::string_view patient_id, std::int64_t time,
                       std::string_view namespace_iri);

/// Six triples per record: rdf:type PPGData plus hasTime, hasHR,
/// hasPULSE, hasRESP, hasSpO2. Throws InvalidArgument on an incomplete
/// record.
std::vector<rdf::Triple> convert(const std::vector<PPGRecord>& records, std::string_view patient_id,
                                 const ConvertOptions& options = {});

/// Min-max normalized copy of the vitals as CSV text, each column scaled
/// to [0,1] independently (constant columns map to 0).
std::string export_normalized(const std::vector<PPGRecord>& records);

std::string to_csv(const std::vector<PPGRecord>& records);

/// Shape of a synthetic recording.
struct RecordingProfile {
  double hr = 80;
  double resp = 16;
  double spo2 = 97;
  double hr_jitter = 4;
  /// Fraction of cells blanked and fraction replaced by spikes.
  double missing_rate = 0.0;
  double spike_rate = 0.0;
};

/// Deterministic 1 Hz stand-in for a BIDMC numerics file.
std::vector<PPGRecord> synthesize_recording(std::size_t seconds, std::uint64_t seed,
                                            const RecordingProfile& profile = {});

}  // namespace ocep::ppg

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ocep/rdf/triple_store.hpp"

namespace ocep::rdf {

enum class Format { ntriples, turtle };

struct ReadOptions {
  /// Rewrite the legacy spellings `http://Healthcare.org/ppg/` and
  /// `http://healthcare.org/ppg` (no slash) to the canonical namespace.
  bool legacy_namespaces = false;
};

/// Canonical form of an IRI under ReadOptions::legacy_namespaces.
std::string canonical_iri(std::string iri);

/// Line-oriented N-Triples. Errors carry the 1-based line number.
std::vector<Triple> parse_ntriples(std::string_view text, const ReadOptions& options = {});
std::vector<Triple> parse_ntriples(std::istream& in, const ReadOptions& options = {});

/// Turtle subset: @prefix, prefixed names, `a`, `;` and `,` lists, IRIs,
/// blank-node labels, quoted literals with optional ^^datatype, bare
/// integers, decimals and booleans. Anything else raises
/// UnsupportedFeature naming the construct.
std::vector<Triple> parse_turtle(std::string_view text, const ReadOptions& options = {});
std::vector<Triple> parse_turtle(std::istream& in, const ReadOptions& options = {});

std::vector<Triple> parse(std::string_view text, Format format, const ReadOptions& options = {});

std::string serialize(const TripleStore& store, Format format);
void serialize(const TripleStore& store, Format format, std::ostream& out);

/// `.nt` means N-Triples, everything else Turtle.
Format format_for_path(const std::filesystem::path& path);

/// Reads a file ("-" for standard input) into a store.
TripleStore load_file(const std::filesystem::path& path, const ReadOptions& options = {});
void save_file(const TripleStore& store, const std::filesystem::path& path);

}  // namespace ocep::rdf

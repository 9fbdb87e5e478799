// Command-line front end for the whole pipeline.
//
// Exit codes: 0 success, 1 usage error, 2 data or processing error.
// Inputs named `builtin:<name>` read the files compiled into the library
// (see `ocep builtin`).

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ocep/cep.hpp"
#include "ocep/error.hpp"
#include "ocep/kb.hpp"
#include "ocep/ppg.hpp"
#include "ocep/query.hpp"
#include "ocep/rdf/io.hpp"
#include "ocep/stream_bus.hpp"

namespace fs = std::filesystem;
using namespace ocep;

namespace {

constexpr std::string_view kBuiltin = "builtin:";
constexpr std::uint64_t kDefaultSeed = 42;

bool is_builtin(std::string_view path) { return path.substr(0, kBuiltin.size()) == kBuiltin; }

std::string read_text(const std::string& path) {
  if (is_builtin(path)) return std::string(kb::embedded(path.substr(kBuiltin.size())));
  std::ostringstream buf;
  if (path == "-") {
    buf << std::cin.rdbuf();
    return buf.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  buf << in.rdbuf();
  return buf.str();
}

rdf::TripleStore load_store(const std::string& path, bool legacy) {
  rdf::ReadOptions options{legacy};
  if (is_builtin(path))
    return rdf::TripleStore(rdf::parse_turtle(read_text(path), options));
  return rdf::load_file(path, options);
}

// Writes to the path, or standard output for "" and "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

const CLI::Validator kInput(
    [](std::string& value) -> std::string {
      if (value == "-" || is_builtin(value) || fs::exists(value)) return {};
      return "no such file: " + value;
    },
    "FILE");

std::vector<std::size_t> parse_tiers(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v < 0) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      throw InvalidArgument("bad load tier '" + item + "'");
    }
  }
  if (out.empty()) throw InvalidArgument("no load tiers given");
  return out;
}

// ---- subcommands ------------------------------------------------------------

struct ConvertArgs {
  std::string input, patient, output = "-";
  std::string imputation = "linear";
  bool decimals = false;
};

int run_convert(const ConvertArgs& a) {
  auto records = ppg::parse_csv(read_text(a.input));
  ppg::PreprocessConfig config;
  config.imputation = a.imputation == "ffill" ? ppg::Imputation::forward_fill : ppg::Imputation::linear;
  config.round_to_integer = !a.decimals;
  if (!records.empty()) records = ppg::preprocess(std::move(records), config);
  ppg::ConvertOptions options;
  options.allow_decimals = a.decimals;
  rdf::TripleStore store(ppg::convert(records, a.patient, options));
  if (a.output == "-") {
    rdf::serialize(store, rdf::Format::turtle, std::cout);
  } else {
    rdf::save_file(store, a.output);
    std::cerr << store.size() << " triples from " << records.size() << " rows\n";
  }
  return 0;
}

struct LoadArgs {
  std::vector<std::string> inputs;
  std::string output;
  bool legacy = false;
};

int run_load(const LoadArgs& a) {
  rdf::TripleStore store;
  for (const auto& path : a.inputs) store.insert_all(load_store(path, a.legacy).triples());
  if (!a.output.empty()) {
    if (a.output == "-")
      rdf::serialize(store, rdf::Format::ntriples, std::cout);
    else
      rdf::save_file(store, a.output);
  }
  (a.output == "-" ? std::cerr : std::cout) << store.size() << " triples\n";
  return 0;
}

struct QueryArgs {
  std::vector<std::string> stores;
  std::string query;
  std::size_t chunks = 1;
  std::size_t parallelism = 1;
  std::string format = "tsv";
  bool legacy = false;
};

int run_query(const QueryArgs& a) {
  const auto plan = query::parse_query(read_text(a.query));
  rdf::TripleStore store;
  for (const auto& path : a.stores) store.insert_all(load_store(path, a.legacy).triples());
  const auto result = query::execute(rdf::partition(store, a.chunks), plan, a.parallelism);
  std::cout << (a.format == "csv" ? result.to_csv() : result.to_tsv());
  return 0;
}

struct BenchArgs {
  std::vector<std::string> stores;
  std::string queries;
  std::size_t chunks = 5;
  std::string combos = "1;2;3;4;5";
  std::size_t repeats = 3;
  std::size_t parallelism = 1;
  std::size_t patients = 50;
  std::size_t samples = 120;
  std::uint64_t seed = kDefaultSeed;
  std::string format = "csv";
  std::string output;
};

int run_bench(const BenchArgs& a) {
  std::vector<query::BenchQuery> queries;
  if (a.queries.empty()) {
    queries = kb::bench_queries();
  } else {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(a.queries))
      if (entry.path().extension() == ".rq") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files)
      queries.push_back({f.stem().string(), query::parse_query(read_text(f.string()))});
    if (queries.empty()) throw InvalidArgument("no .rq files in " + a.queries);
  }
  rdf::TripleStore store;
  if (a.stores.empty()) {
    store = kb::generate_bench_store({a.patients, a.samples, a.seed});
  } else {
    for (const auto& path : a.stores) store.insert_all(load_store(path, false).triples());
  }
  const auto combos = query::parse_combos(a.combos);
  const auto report = query::bench(rdf::partition(store, a.chunks), queries, combos, a.repeats, a.parallelism);
  emit(a.output, a.format == "table" ? report.to_table() : report.to_csv());
  return 0;
}

struct CepArgs {
  std::string rules = "builtin:vital_rules.rules";
  std::string events;
  std::size_t synthetic = 0;
  std::uint64_t seed = kDefaultSeed;
  std::string output = "-";
  std::string rdf_out;
  std::string window;
  std::string window_csv;
  std::string loads;
  std::string report;
};

int run_cep(const CepArgs& a) {
  const auto rules = cep::parse_rules(read_text(a.rules));
  std::vector<cep::VitalEvent> events;
  if (!a.events.empty()) {
    events = cep::parse_events(read_text(a.events));
  } else if (a.synthetic > 0) {
    cep::CohortRecipe recipe;
    recipe.seed = a.seed;
    const std::size_t cohort = recipe.diseased + recipe.disease_free + recipe.borderline;
    recipe.events_per_patient = (a.synthetic + cohort - 1) / cohort;
    events = cep::flatten(cep::build_cohort(recipe));
    if (events.size() > a.synthetic) events.resize(a.synthetic);
  }

  cep::Engine engine(rules);
  std::vector<cep::DerivedEvent> derived;
  for (const auto& e : events) {
    auto fired = engine.ingest(e);
    derived.insert(derived.end(), fired.begin(), fired.end());
  }
  if (a.output == "-") {
    cep::write_derived(std::cout, derived);
  } else {
    std::ofstream out(a.output, std::ios::binary);
    if (!out) throw Error("cannot write " + a.output);
    cep::write_derived(out, derived);
  }
  if (!a.rdf_out.empty()) {
    rdf::TripleStore store(cep::emit_rdf(derived, rdf::vocab::healthcare_ns));
    rdf::save_file(store, a.rdf_out);
  }
  if (!a.window.empty()) {
    const auto rows = cep::window_stats(events, cep::parse_window(a.window), rules);
    emit(a.window_csv.empty() ? "-" : a.window_csv, cep::window_csv(rows));
  }
  std::cerr << events.size() << " events, " << derived.size() << " derived\n";

  if (!a.loads.empty()) {
    if (rules.empty()) throw InvalidArgument("--loads needs at least one rule");
    const auto tiers = parse_tiers(a.loads);
    const auto rows = cep::measure_deployments(rules, tiers);
    std::cerr << cep::deployment_table(rows);
    if (!a.report.empty()) emit(a.report, cep::deployment_csv(rows));
  }
  return 0;
}

struct CohortArgs {
  std::size_t patients = 81;
  std::size_t events = 30;
  std::uint64_t seed = kDefaultSeed;
  std::string rules;
  std::string csv;
  std::string risk_csv;
};

int run_cohort(const CohortArgs& a) {
  if (a.patients == 0) throw InvalidArgument("--patients must be positive");
  // The 60/12/9 split, scaled down with the remainder going disease-free.
  cep::CohortRecipe recipe;
  recipe.diseased = a.patients * 60 / 81;
  recipe.borderline = a.patients * 12 / 81;
  recipe.disease_free = a.patients - recipe.diseased - recipe.borderline;
  recipe.events_per_patient = a.events;
  recipe.seed = a.seed;
  const auto rules = a.rules.empty() ? cep::default_rules() : cep::parse_rules(read_text(a.rules));
  const auto cohort = cep::build_cohort(recipe);
  const auto report = cep::classify_cohort(cohort, rules);
  std::cout << report.summary();
  for (const auto& [label, counts] : report.risk_distribution())
    std::cout << "  " << label << ": low " << counts[0] << ", moderate " << counts[1] << ", high "
              << counts[2] << '\n';
  if (!a.csv.empty()) emit(a.csv, report.to_csv());
  if (!a.risk_csv.empty()) emit(a.risk_csv, report.risk_csv());
  return 0;
}

struct DemoArgs {
  bus::DemoConfig config;
  std::string fail = "B";
  std::string format = "text";
};

int run_stream_demo(DemoArgs a) {
  if (a.fail != "none") {
    a.config.fail = bus::parse_broker(a.fail);
    if (!a.config.fail || *a.config.fail >= a.config.brokers)
      throw InvalidArgument("no broker named " + a.fail);
  }
  const auto report = bus::run_demo(a.config);
  std::cout << (a.format == "csv" ? report.to_csv() : report.to_text());
  if (report.unavailable > 0) {
    std::cerr << "error: " << report.unavailable << " records rejected: " << report.first_error << '\n';
    return 2;
  }
  return report.exactly_once() && report.consistent ? 0 : 2;
}

struct MetricsArgs {
  std::string input = "builtin:ssn_subset.ttl";
  std::string format = "text";
};

int run_metrics(const MetricsArgs& a) {
  const auto summary = kb::summarize_ontology(load_store(a.input, false));
  kb::SchemaMetrics metrics;
  if (summary.classes == 0) {
    metrics.degenerate_relations = true;
    std::cerr << "warning: no classes; metrics are undefined and reported as 0\n";
  } else {
    metrics = kb::compute_metrics(summary);
  }
  std::cout << (a.format == "csv" ? kb::metrics_csv(summary, metrics)
                                  : kb::metrics_table(summary, metrics));
  return 0;
}

struct KbArgs {
  std::size_t diseases = 81, drugs = 200;
  std::uint64_t seed = kDefaultSeed;
  std::string output = "-";
  std::string input;
  kb::OntologyShape shape;
};

void write_store(const rdf::TripleStore& store, const std::string& path) {
  if (path == "-")
    rdf::serialize(store, rdf::Format::turtle, std::cout);
  else
    rdf::save_file(store, path);
}

int run_rules(const std::string& path) {
  const auto rules = cep::parse_rules(read_text(path));
  std::cout << "id,param,op,threshold,label,window\n";
  for (const auto& r : rules) {
    std::string threshold;
    if (const double* v = std::get_if<double>(&r.condition.threshold)) {
      std::ostringstream s;
      s << *v;
      threshold = s.str();
    } else {
      threshold = thresholds::to_string(std::get<thresholds::ThresholdModel>(r.condition.threshold));
    }
    std::cout << r.id << ',' << cep::param_name(r.condition.param) << ','
              << cep::to_string(r.condition.op) << ",\"" << threshold << "\",\"" << r.label << "\","
              << (r.window ? cep::to_string(*r.window) : "") << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ontology-driven PPG monitoring pipeline"};
  app.require_subcommand(1);

  ConvertArgs convert;
  auto* c = app.add_subcommand("convert", "Preprocess a PPG CSV and convert it to RDF");
  c->add_option("input", convert.input, "CSV file")->required()->check(kInput);
  c->add_option("-p,--patient", convert.patient, "Patient id used in subject IRIs");
  c->add_option("-o,--output", convert.output, "Output file (.ttl or .nt); - for stdout");
  c->add_option("--imputation", convert.imputation)->check(CLI::IsMember({"linear", "ffill"}));
  c->add_flag("--decimals", convert.decimals, "Keep fractional values as xsd:decimal");

  LoadArgs load;
  auto* l = app.add_subcommand("load", "Parse RDF files, report the triple count, optionally re-serialize");
  l->add_option("inputs", load.inputs, "Turtle or N-Triples files")->required()->check(kInput);
  l->add_option("-o,--output", load.output, "Write the merged store (.ttl or .nt); - for N-Triples on stdout");
  l->add_flag("--legacy-namespaces", load.legacy, "Rewrite legacy healthcare namespace spellings");

  QueryArgs q;
  auto* qc = app.add_subcommand("query", "Run a query over a partitioned store");
  qc->add_option("-s,--store", q.stores, "RDF files to load")->required()->check(kInput);
  qc->add_option("-q,--query", q.query, "Query file")->required()->check(kInput);
  qc->add_option("-k,--chunks", q.chunks)->check(CLI::PositiveNumber);
  qc->add_option("-j,--parallelism", q.parallelism, "Worker threads (0 = hardware)");
  qc->add_option("--format", q.format)->check(CLI::IsMember({"tsv", "csv"}));
  qc->add_flag("--legacy-namespaces", q.legacy);

  BenchArgs b;
  auto* bc = app.add_subcommand("bench", "Time queries over chunk combinations");
  bc->add_option("-s,--store", b.stores, "RDF files (default: generated bench store)")->check(kInput);
  bc->add_option("--queries", b.queries, "Directory of .rq files (default: built-in Q1-Q5)")
      ->check(CLI::ExistingDirectory);
  bc->add_option("-k,--chunks", b.chunks)->check(CLI::PositiveNumber);
  bc->add_option("--combos", b.combos, "1-based chunk combos, e.g. \"1+2;2+3\"");
  bc->add_option("--repeats", b.repeats)->check(CLI::PositiveNumber);
  bc->add_option("-j,--parallelism", b.parallelism);
  bc->add_option("--patients", b.patients, "Generated store: patient count");
  bc->add_option("--samples", b.samples, "Generated store: PPG samples per patient");
  bc->add_option("--seed", b.seed);
  bc->add_option("--format", b.format)->check(CLI::IsMember({"csv", "table"}));
  bc->add_option("-o,--output", b.output);

  CepArgs ce;
  auto* cc = app.add_subcommand("cep", "Run rules over an event stream");
  cc->add_option("-r,--rules", ce.rules, "Rules file")->check(kInput);
  cc->add_option("-e,--events", ce.events, "NDJSON events; - for stdin")->check(kInput);
  cc->add_option("--synthetic", ce.synthetic, "Generate this many cohort events instead");
  cc->add_option("--seed", ce.seed);
  cc->add_option("-o,--output", ce.output, "Derived events as NDJSON");
  cc->add_option("--rdf", ce.rdf_out, "Also write derived events as RDF");
  cc->add_option("--window", ce.window, "Window stats, e.g. \"tumbling 10s\"");
  cc->add_option("--window-csv", ce.window_csv);
  cc->add_option("--loads", ce.loads, "Deployment tiers in events/s, e.g. 0,8000,16000");
  cc->add_option("--report", ce.report, "Deployment latency CSV");

  std::string rules_path;
  auto* rc = app.add_subcommand("rules", "Parse a rules file and list the rules as CSV");
  rc->add_option("file", rules_path)->required()->check(kInput);

  CohortArgs co;
  auto* coc = app.add_subcommand("cohort", "Build and classify a synthetic cohort");
  coc->add_option("--patients", co.patients);
  coc->add_option("--events", co.events, "Events per patient")->check(CLI::PositiveNumber);
  coc->add_option("--seed", co.seed);
  coc->add_option("-r,--rules", co.rules, "Rules file (default: built-in rules)")->check(kInput);
  coc->add_option("--csv", co.csv, "Per-patient CSV");
  coc->add_option("--risk-csv", co.risk_csv, "Risk distribution CSV");

  DemoArgs d;
  d.config.seed = kDefaultSeed;
  auto* dc = app.add_subcommand("stream-demo", "Replicated log demo with an optional broker failure");
  dc->add_option("--brokers", d.config.brokers)->check(CLI::PositiveNumber);
  dc->add_option("--replication", d.config.replication)->check(CLI::PositiveNumber);
  dc->add_option("--partitions", d.config.partitions)->check(CLI::PositiveNumber);
  dc->add_option("--events", d.config.events);
  dc->add_option("--fail", d.fail, "Broker to fail (letter or index), or none");
  dc->add_option("--fail-after", d.config.fail_after)->check(CLI::Range(0.0, 1.0));
  dc->add_option("--recover-after", d.config.recover_after)->check(CLI::Range(0.0, 1.0));
  dc->add_option("--sink", d.config.sink, "N-Triples sink target");
  dc->add_option("--sink-batch", d.config.sink_batch)->check(CLI::PositiveNumber);
  dc->add_option("--seed", d.config.seed);
  dc->add_option("--format", d.format)->check(CLI::IsMember({"text", "csv"}));

  MetricsArgs m;
  auto* mc = app.add_subcommand("metrics", "Ontology schema metrics");
  mc->add_option("input", m.input, "Ontology file (default: built-in SSN subset)")->check(kInput);
  mc->add_option("--format", m.format)->check(CLI::IsMember({"text", "csv"}));

  KbArgs k;
  auto* kc = app.add_subcommand("kb", "Knowledge-base utilities");
  kc->require_subcommand(1);
  auto* kg = kc->add_subcommand("generate", "Synthetic drug/disease KB");
  kg->add_option("--diseases", k.diseases)->check(CLI::PositiveNumber);
  kg->add_option("--drugs", k.drugs)->check(CLI::PositiveNumber);
  kg->add_option("--seed", k.seed);
  kg->add_option("-o,--output", k.output);
  auto* ko = kc->add_subcommand("ontology", "Synthetic ontology with given counts");
  ko->add_option("--classes", k.shape.classes);
  ko->add_option("--roots", k.shape.roots);
  ko->add_option("--leaves", k.shape.leaves);
  ko->add_option("--object-properties", k.shape.object_properties);
  ko->add_option("--data-properties", k.shape.data_properties);
  ko->add_option("--individuals", k.shape.individuals);
  ko->add_option("--populated-classes", k.shape.classes_with_instances);
  ko->add_option("--axioms", k.shape.axioms, "Total triples (0: no padding)");
  ko->add_option("--seed", k.shape.seed);
  ko->add_option("-o,--output", k.output);
  auto* kv = kc->add_subcommand("validate", "Check KB entry invariants");
  kv->add_option("input", k.input)->required()->check(kInput);
  auto* kbench = kc->add_subcommand("bench-store", "Patients, PPG samples and the sample KB");
  BenchArgs bs;
  kbench->add_option("--patients", bs.patients);
  kbench->add_option("--samples", bs.samples);
  kbench->add_option("--seed", bs.seed);
  kbench->add_option("-o,--output", k.output);

  app.add_subcommand("builtin", "List the built-in files")->callback([] {
    for (const auto& n : kb::embedded_names()) std::cout << kBuiltin << n << '\n';
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*c) return run_convert(convert);
    if (*l) return run_load(load);
    if (*qc) return run_query(q);
    if (*bc) return run_bench(b);
    if (*cc) return run_cep(ce);
    if (*rc) return run_rules(rules_path);
    if (*coc) return run_cohort(co);
    if (*dc) return run_stream_demo(d);
    if (*mc) return run_metrics(m);
    if (*kg) {
      write_store(kb::generate_kb(k.diseases, k.drugs, k.seed), k.output);
      return 0;
    }
    if (*ko) {
      write_store(kb::generate_ontology(k.shape), k.output);
      return 0;
    }
    if (*kv) {
      const auto problems = kb::validate_kb(load_store(k.input, false));
      for (const auto& p : problems) std::cerr << p << '\n';
      std::cout << (problems.empty() ? "valid\n" : "invalid\n");
      return problems.empty() ? 0 : 2;
    }
    if (*kbench) {
      write_store(kb::generate_bench_store({bs.patients, bs.samples, bs.seed}), k.output);
      return 0;
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

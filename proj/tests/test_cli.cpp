#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ocep/random.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += (c == '\n');
  return n;
}

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    ocep::Rng rng(reinterpret_cast<std::uintptr_t>(this) ^ static_cast<std::uint64_t>(::getpid()));
    dir_ = fs::temp_directory_path() / ("ocep_cli_" + std::to_string(rng.next()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path file(const std::string& name, const std::string& content) const {
    const auto p = dir_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }
  fs::path path(const std::string& name) const { return dir_ / name; }

  Outcome run(const std::string& args) const {
    const auto out = dir_ / "stdout", err = dir_ / "stderr";
    const std::string cmd = std::string("\"") + OCEP_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                            err.string() + "\"";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  }

  fs::path dir_;
};

const std::string kSampleCsv = std::string(OCEP_DATA_DIR) + "/samples/ppg_sample.csv";

}  // namespace

TEST_F(Cli, ConvertSixTriplesPerRow) {
  auto r = run("convert \"" + kSampleCsv + "\" -p P1 -o \"" + path("out.nt").string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  const std::size_t rows = lines(slurp(kSampleCsv)) - 1;
  EXPECT_EQ(lines(slurp(path("out.nt"))), 6 * rows);

  auto loaded = run("load \"" + path("out.nt").string() + "\"");
  EXPECT_EQ(loaded.code, 0);
  EXPECT_NE(loaded.out.find(std::to_string(6 * rows)), std::string::npos);
}

TEST_F(Cli, ConvertErrors) {
  auto missing = run("convert \"" + file("m.csv", "Time,HR,RESP,SpO2\n1,80,16,97\n").string() + "\" -o -");
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("PULSE"), std::string::npos);

  auto empty = run("convert \"" + file("e.csv", "").string() + "\" -o \"" + path("e.ttl").string() + "\"");
  EXPECT_EQ(empty.code, 0) << empty.err;

  EXPECT_EQ(run("convert").code, 1);
  EXPECT_EQ(run("convert /no/such/file.csv").code, 1);
}

TEST_F(Cli, QueryIsChunkInvariant) {
  auto one = run("query -s builtin:sample_kb.ttl -q builtin:disease_drugs.rq -k 1");
  auto five = run("query -s builtin:sample_kb.ttl -q builtin:disease_drugs.rq -k 5 -j 3");
  ASSERT_EQ(one.code, 0) << one.err;
  EXPECT_EQ(one.out, five.out);
  EXPECT_EQ(lines(one.out), 10u);

  auto bad = run("query -s builtin:sample_kb.ttl -q \"" + file("bad.rq", "SELECT ?x WHERE { ?x ?p ?o } ORDER BY ?x").string() + "\"");
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("ORDER BY"), std::string::npos);
}

TEST_F(Cli, BenchShapes) {
  auto t10 = run("bench --patients 4 --samples 10 --combos \"1;2;3;4;5\"");
  ASSERT_EQ(t10.code, 0) << t10.err;
  EXPECT_EQ(lines(t10.out), 26u);

  auto t11 = run("bench --patients 4 --samples 10 --combos \"1+2;2+3;3+4;4+5;5+2\" --repeats 3");
  ASSERT_EQ(t11.code, 0) << t11.err;
  for (const char* combo : {"1+2", "2+3", "3+4", "4+5", "5+2"}) EXPECT_NE(t11.out.find(combo), std::string::npos);
  EXPECT_EQ(run("bench --combos \"1+9\"").code, 2);
}

TEST_F(Cli, CepRulesAndReports) {
  auto empty = run("cep -r \"" + file("none.rules", "# no rules\n").string() + "\" --synthetic 50 -o -");
  EXPECT_EQ(empty.code, 0) << empty.err;
  EXPECT_TRUE(empty.out.empty());

  const auto events = file("ev.ndjson", "{\"ts\":1,\"patient\":\"P1\",\"hr\":95}\n"
                                         "{\"ts\":2,\"patient\":\"P1\",\"hr\":110}\n"
                                         "{\"ts\":3,\"patient\":\"P1\",\"hr\":125}\n");
  auto fired = run("cep -e \"" + events.string() + "\" -o -");
  ASSERT_EQ(fired.code, 0) << fired.err;
  EXPECT_EQ(lines(fired.out), 4u);
  EXPECT_NE(fired.out.find("Less chances of Tachycardia"), std::string::npos);

  auto loads = run("cep --synthetic 200 -o \"" + path("d.ndjson").string() + "\" --loads 0,2000 --report \"" +
                   path("deploy.csv").string() + "\"");
  ASSERT_EQ(loads.code, 0) << loads.err;
  EXPECT_EQ(lines(slurp(path("deploy.csv"))), 1u + 5u * 2u);

  auto unordered = run("cep -e \"" + file("bad.ndjson", "{\"ts\":5,\"patient\":\"A\",\"hr\":90}\n"
                                                       "{\"ts\":4,\"patient\":\"A\",\"hr\":90}\n").string() + "\"");
  EXPECT_EQ(unordered.code, 2);
  EXPECT_EQ(run("cep -r \"" + file("bad.rules", "from X [hr ~ 5] select hr insert into (L);").string() + "\"").code, 2);
}

TEST_F(Cli, Cohort) {
  auto a = run("cohort --seed 3");
  auto b = run("cohort --seed 3");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("accuracy: 69/81"), std::string::npos);
  auto single = run("cohort --patients 1");
  EXPECT_NE(single.out.find("100.00%"), std::string::npos);
}

TEST_F(Cli, StreamDemo) {
  auto ok = run("stream-demo --fail B --sink \"" + path("sink.nt").string() + "\"");
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_NE(ok.out.find("exactly once: yes"), std::string::npos);
  EXPECT_EQ(lines(slurp(path("sink.nt"))), 1000u);

  EXPECT_EQ(run("stream-demo --fail none").code, 0);
  auto down = run("stream-demo --replication 1 --fail A");
  EXPECT_EQ(down.code, 2);
  EXPECT_NE(down.err.find("no live in-sync replica"), std::string::npos);
}

TEST_F(Cli, Metrics) {
  auto builtin = run("metrics");
  ASSERT_EQ(builtin.code, 0) << builtin.err;
  EXPECT_NE(builtin.out.find("attribute_richness"), std::string::npos);

  auto empty = run("metrics \"" + file("empty.ttl", "").string() + "\" --format csv");
  EXPECT_EQ(empty.code, 0);
  EXPECT_NE(empty.out.find("degenerate"), std::string::npos);

  auto cyclic = run("metrics \"" +
                    file("cycle.ttl",
                         "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n"
                         "<http://x/A> rdfs:subClassOf <http://x/B> .\n<http://x/B> rdfs:subClassOf <http://x/A> .\n")
                        .string() +
                    "\"");
  EXPECT_EQ(cyclic.code, 2);
  EXPECT_NE(cyclic.err.find("cycle"), std::string::npos);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("query -q builtin:disease_drugs.rq").code, 1);
  EXPECT_EQ(run("builtin").code, 0);
}

#include <doctest.h>

#include <fstream>
#include <iterator>
#include <sstream>

#include "cli.hpp"
#include "geoflood/stats.hpp"
#include "geoflood/store.hpp"
#include "test_support.hpp"

using nlohmann::json;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args, const std::string& input = "") {
  args.insert(args.begin(), "geoflood");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::istringstream in(input);
  std::ostringstream out, err;
  Run r;
  r.code = geoflood::cli::run_cli(static_cast<int>(argv.size()), argv.data(), in, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

/// Every stage of the pipeline into `dir`.
void full_chain(const std::filesystem::path& dir) {
  const auto s = (dir / "store").string();
  const auto d = dir.string();
  REQUIRE(run({"synth", "--n", "3000", "--seed", "5", "--out", d + "/raw.ndjson", "--fixture-out",
               d + "/fixture.json", "--labels-out", d + "/labels.csv"})
              .code == 0);
  REQUIRE(run({"ingest", "--input", d + "/raw.ndjson", "--store", s}).code == 0);
  REQUIRE(run({"annotate", "--store", s, "--fixture", d + "/fixture.json"}).code == 0);
  REQUIRE(run({"postfilter", "--store", s}).code == 0);
  REQUIRE(run({"report", "--store", s, "--out", d + "/report.json"}).code == 0);
  REQUIRE(run({"stats", "--store", s, "--kind", "pbbox", "--out", d + "/stats.json",
               "--scatter-out", d + "/scatter.csv"})
              .code == 0);
  REQUIRE(run({"density", "--store", s, "--cell", "0.05", "--format", "csv", "--out",
               d + "/density.csv"})
              .code == 0);
  REQUIRE(run({"embed", "--store", s, "--labels", d + "/labels.csv", "--dim", "64", "--out",
               d + "/emb.tsv"})
              .code == 0);
  const auto al = run({"al-run", "--labels", d + "/labels.csv", "--embeddings", d + "/emb.tsv",
                       "--strategy", "all", "--test-count", "20", "--budget", "40", "--epochs",
                       "5", "--out", d + "/curves"});
  INFO(al.err);
  REQUIRE(al.code == 0);
}

}  // namespace

TEST_CASE("help lists every option of every subcommand") {
  geoflood::cli::Options o;
  const auto app = geoflood::cli::build_cli(o);
  const auto top = run({"--help"});
  CHECK(top.code == 0);
  for (const auto* sub : app->get_subcommands({})) {
    CAPTURE(sub->get_name());
    CHECK(top.out.find(sub->get_name()) != std::string::npos);
    const auto r = run({sub->get_name(), "--help"});
    CHECK(r.code == 0);
    for (const auto* opt : sub->get_options()) {
      for (const auto& name : opt->get_lnames()) {
        CAPTURE(name);
        CHECK(r.out.find("--" + name) != std::string::npos);
      }
    }
  }
}

TEST_CASE("exit codes") {
  testing::TempDir dir("cli_codes");
  const auto s = (dir.path() / "s").string();
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"stats"}).code == 2);
  CHECK(run({"stats", "--store", s, "--kind", "geotag"}).code == 2);
  CHECK(run({"synth", "--n", "ten"}).code == 2);
  CHECK(run({"annotate", "--store", s, "--geocoder", "live"}).code == 2);
  const auto missing = run({"report", "--store", s});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("error") != std::string::npos);

  const auto bad = run({"ingest", "--store", s}, "{\"id_str\": \"1\"\nnot json\n");
  CHECK(bad.code == 0);
  const auto rep = geoflood::read_json(dir.path() / "s" / "ingest_report.json");
  CHECK(rep["error_lines"] == 2);
}

TEST_CASE("full chain is reproducible byte for byte") {
  testing::TempDir a("cli_a"), b("cli_b");
  full_chain(a.path());
  full_chain(b.path());
  for (const char* f : {"store/tweets.ndjson", "store/annotations.ndjson", "store/places.ndjson",
                        "store/annotations.raw.ndjson", "store/places.raw.ndjson",
                        "store/ingest_report.json", "store/annotate_report.json",
                        "store/filter_report.json", "report.json", "stats.json", "scatter.csv",
                        "density.csv", "emb.tsv", "curves/curve_random.csv",
                        "curves/curve_uncertainty.csv", "curves/curve_hierarchical.csv"}) {
    CAPTURE(f);
    const auto x = slurp(a.path() / f);
    CHECK_FALSE(x.empty());
    CHECK(x == slurp(b.path() / f));
  }

  const auto store = geoflood::load_store(a.path() / "store");
  const auto pf = geoflood::place_frequencies(store.set, geoflood::AnnotationKind::PBBox);
  const auto stats = json::parse(slurp(a.path() / "stats.json"));
  CHECK(stats == geoflood::correlate_loglog(pf).to_json());

  const auto report = json::parse(slurp(a.path() / "report.json"));
  CHECK(report["tweets"] == store.tweets.size());
  CHECK(report["annotations"]["kept"]["total"] == store.set.annotations.size());
}

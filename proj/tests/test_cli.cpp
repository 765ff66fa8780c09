#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "renalci/pgm.hpp"
#include "renalci/serialize.hpp"
#include "support.hpp"

using namespace renalci;
namespace fs = std::filesystem;

namespace {

const std::string kCli = RENALCI_CLI_PATH;

int cli(const std::string& args) { return test::run_cli(kCli, args); }

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

Json load(const fs::path& p) { return parse_json(read_file(p), p.string()); }

struct Workspace {
  fs::path dir = test::temp_dir("cli");
  ~Workspace() { fs::remove_all(dir); }
};

const char* kSmallSpec = R"({"width": 400, "height": 350, "n_glomeruli": 6, "n_gs": 2,
  "n_fc": 1, "n_tubules": 10, "p_if": 0.2, "p_ta": 0.3})";

}  // namespace

TEST_CASE("version and usage errors") {
  CHECK(cli("--version") == 0);
  CHECK(cli("") == 1);
  CHECK(cli("frobnicate") == 1);
  CHECK(cli("survival cox") == 1);
}

TEST_CASE("synth slide scores back to its truth through every input path") {
  Workspace ws;
  const fs::path spec = ws.dir / "spec.json";
  write_text(spec, kSmallSpec);
  const fs::path s = ws.dir / "s";
  REQUIRE(cli("--seed 4 --out " + q(s) + " synth slide --spec " + q(spec) + " --patch 128") == 0);
  const Json truth = load(s / "truth.json")["result"]["truth"];

  for (const std::string& input :
       {"--manifest " + q(s / "tiled" / "manifest.json"), "--raster " + q(s / "slide.pgm"),
        "--fusion " + q(s / "masks" / "fusion.json")}) {
    const fs::path o = ws.dir / "score";
    fs::remove_all(o);
    REQUIRE(cli("--out " + q(o) + " score --patch 100 " + input) == 0);
    const Json rep = load(o / "score.json");
    CHECK(rep["result"]["patients"][0]["result"] == truth);
    CHECK(rep["provenance"]["inputs"].size() >= 1);
    CHECK(fs::exists(o / "patients.csv"));
  }

  REQUIRE(cli("--out " + q(ws.dir / "st.pgm") + " stitch --manifest " +
              q(s / "tiled" / "manifest.json")) == 0);
  CHECK(read_file(ws.dir / "st.pgm") == read_file(s / "slide.pgm"));
  REQUIRE(cli("--out " + q(ws.dir / "fz") + " fuse --spec " + q(s / "masks" / "fusion.json")) == 0);
  CHECK(read_file(ws.dir / "fz" / "fused.pgm") == read_file(s / "slide.pgm"));
}

TEST_CASE("outputs are byte-identical across reruns and job counts") {
  Workspace ws;
  const fs::path spec = ws.dir / "spec.json";
  write_text(spec, kSmallSpec);
  const std::vector<std::string> commands = {
      "synth slide --spec " + q(spec) + " --patch 64",
      "synth cohort --n 150",
  };
  for (const auto& c : commands) {
    const fs::path a = ws.dir / "a", b = ws.dir / "b", c3 = ws.dir / "c";
    for (const auto& d : {a, b, c3}) fs::remove_all(d);
    REQUIRE(cli("--seed 7 --jobs 1 --out " + q(a) + " " + c) == 0);
    REQUIRE(cli("--seed 7 --jobs 1 --out " + q(b) + " " + c) == 0);
    REQUIRE(cli("--seed 7 --jobs 3 --out " + q(c3) + " " + c) == 0);
    const auto sa = test::snapshot(a);
    CHECK(!sa.empty());
    CHECK(test::snapshot(b) == sa);
    CHECK(test::snapshot(c3) == sa);
  }

  REQUIRE(cli("--seed 3 --out " + q(ws.dir / "cohort") + " synth cohort --n 300") == 0);
  const fs::path cohort = ws.dir / "cohort" / "cohort.csv";
  const std::vector<std::string> analyses = {
      "survival km --cohort " + q(cohort) + " --strata x",
      "survival cox --cohort " + q(cohort),
      "survival auc --cohort " + q(cohort) + " --cox x --horizon 5 --resamples 300",
  };
  for (const auto& c : analyses) {
    const fs::path a = ws.dir / "ra", b = ws.dir / "rb";
    fs::remove_all(a);
    fs::remove_all(b);
    REQUIRE(cli("--seed 11 --jobs 1 --out " + q(a) + " " + c) == 0);
    REQUIRE(cli("--seed 11 --jobs 4 --out " + q(b) + " " + c) == 0);
    CHECK(test::snapshot(b) == test::snapshot(a));
  }
}

TEST_CASE("cox report recovers the generating hazard ratio") {
  Workspace ws;
  REQUIRE(cli("--seed 1 --out " + q(ws.dir) + " synth cohort --n 1500") == 0);
  REQUIRE(cli("--out " + q(ws.dir / "fit") + " survival cox --cohort " +
              q(ws.dir / "cohort.csv") + " --ties breslow") == 0);
  const Json fit = load(ws.dir / "fit" / "cox.json")["result"];
  const double hr = fit["coefficients"][0]["hazard_ratio"].get<double>();
  CHECK(hr > 1.6);
  CHECK(hr < 2.5);
  CHECK(fit["ties"] == "breslow");
}

TEST_CASE("config file supplies subcommand options") {
  Workspace ws;
  REQUIRE(cli("--out " + q(ws.dir) + " synth cohort --n 100") == 0);
  const fs::path cfg = ws.dir / "cfg.json";
  write_text(cfg, R"({"survival": {"cox": {"ties": "breslow"}}})");
  REQUIRE(cli("--config " + q(cfg) + " --out " + q(ws.dir / "fit") + " survival cox --cohort " +
              q(ws.dir / "cohort.csv")) == 0);
  CHECK(load(ws.dir / "fit" / "cox.json")["result"]["ties"] == "breslow");
}

TEST_CASE("exit codes and no partial outputs") {
  Workspace ws;
  const fs::path o = ws.dir / "o";
  CHECK(cli("--out " + q(o) + " score --raster " + q(ws.dir / "missing.pgm")) == 1);
  CHECK_FALSE(fs::exists(o / "score.json"));
  CHECK(test::snapshot(o).empty());

  write_text(ws.dir / "bad.csv", "subject_id,time_years,event,x\na,1,1\n");
  CHECK(cli("--out " + q(o) + " survival cox --cohort " + q(ws.dir / "bad.csv")) == 1);

  // perfectly separated covariate: the fit diverges
  std::string sep = "subject_id,time_years,event,x\n";
  for (int i = 0; i < 20; ++i) {
    sep += "s" + std::to_string(i) + "," + std::to_string(i + 1) + ",1," + (i < 10 ? "1" : "0") +
           "\n";
  }
  write_text(ws.dir / "sep.csv", sep);
  CHECK(cli("--out " + q(o) + " survival cox --cohort " + q(ws.dir / "sep.csv")) == 2);
  CHECK(test::snapshot(o).empty());

  // one scorable slide and one without glomeruli
  const fs::path spec = ws.dir / "spec.json";
  write_text(spec, kSmallSpec);
  REQUIRE(cli("--out " + q(ws.dir / "s") + " synth slide --spec " + q(spec)) == 0);
  std::string empty = "P5\n50 50\n255\n" + std::string(2500, '\0');
  write_text(ws.dir / "empty.pgm", empty);
  CHECK(cli("--out " + q(o) + " score --raster " + q(ws.dir / "s" / "slide.pgm") + " --raster " +
            q(ws.dir / "empty.pgm")) == 3);
  const Json rep = load(o / "score.json");
  CHECK(rep["result"]["n_failed"] == 1);
  fs::remove_all(o);
  CHECK(cli("--out " + q(o) + " score --raster " + q(ws.dir / "empty.pgm")) == 2);
  CHECK(fs::exists(o / "score.json"));
}

TEST_CASE("eval commands") {
  Workspace ws;
  fs::create_directories(ws.dir / "pred");
  fs::create_directories(ws.dir / "truth");
  std::mt19937_64 rng(3);
  for (int i = 0; i < 4; ++i) {
    const auto r = test::random_raster(rng, 64, 48, 12, 0.0);
    const auto name = "img" + std::to_string(i) + ".pgm";
    write_raster(r, ws.dir / "pred" / name);
    write_raster(r, ws.dir / "truth" / name);
  }
  REQUIRE(cli("--out " + q(ws.dir / "d") + " eval dice --pred " + q(ws.dir / "pred") +
              " --truth " + q(ws.dir / "truth") + " --resamples 100") == 0);
  const Json d = load(ws.dir / "d" / "dice.json")["result"];
  CHECK(d["average"].get<double>() == 1.0);

  write_text(ws.dir / "a.csv", "id,ci\np1,3\np2,5\np3,1\np4,8\np5,6\n");
  write_text(ws.dir / "b.csv", "id,ci\np3,2\np1,4\np2,5\np5,7\np4,9\n");
  REQUIRE(cli("--out " + q(ws.dir / "sp") + " eval spearman --a " + q(ws.dir / "a.csv") +
              " --b " + q(ws.dir / "b.csv") + " --column ci") == 0);
  const Json sp = load(ws.dir / "sp" / "spearman.json")["result"];
  CHECK(sp["rho"].get<double>() == doctest::Approx(1.0));
  CHECK(sp["p_method"] == "exact permutation");
  REQUIRE(cli("--out " + q(ws.dir / "k") + " eval kappa --a " + q(ws.dir / "a.csv") + " --b " +
              q(ws.dir / "a.csv") + " --column ci") == 0);
}

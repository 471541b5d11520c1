#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "gwf/cli.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kBin = GABORWF_BIN;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("gwf_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
  std::string operator/(const std::string& name) const {
    return (path / name).string();
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

std::string write_cfg(const TempDir& dir, const std::string& name,
                      const std::string& text) {
  const std::string path = dir / name;
  std::ofstream out(path, std::ios::trunc);
  REQUIRE(out.good());
  out << text;
  return path;
}

struct Cmd {
  int code = -1;
  std::string out, err;
};

// run a shell command, capturing exit code, stdout and stderr
Cmd shell(const TempDir& io, const std::string& cmd) {
  const std::string so = io / "cmd_stdout.txt", se = io / "cmd_stderr.txt";
  const int rc = std::system((cmd + " >'" + so + "' 2>'" + se + "'").c_str());
  Cmd r;
  if (rc != -1 && WIFEXITED(rc)) r.code = WEXITSTATUS(rc);
  r.out = slurp(so);
  r.err = slurp(se);
  return r;
}

Cmd run_tool(const TempDir& io, const std::string& args) {
  return shell(io, "'" + kBin + "' " + args);
}

bool has(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("version flag") {
  TempDir d;
  Cmd r = run_tool(d, "--version");
  CHECK(r.code == 0);
  CHECK(has(r.out, "gaborwf 1.0.0"));
}

TEST_CASE("config and schema errors exit with code 2") {
  TempDir d;

  SUBCASE("unreadable path") {
    Cmd r = run_tool(d, "run '" + (d / "does_not_exist.json") + "'");
    CHECK(r.code == 2);
    CHECK(has(r.err, "cannot read config"));
  }

  SUBCASE("malformed json is line-anchored") {
    std::string cfg = write_cfg(d, "bad.json",
                                "{\n  \"experiment\": \"stft\",\n}\n");
    Cmd r = run_tool(d, "run '" + cfg + "'");
    CHECK(r.code == 2);
    CHECK(has(r.err, "bad.json:3:"));
    CHECK(has(r.err, "parse error"));
  }

  SUBCASE("unknown key is line-anchored") {
    std::string cfg = write_cfg(d, "unknown.json", R"({
  "experiment": "wavefront",
  "grid": {"n_points": 16384, "extent": 128.0},
  "signal": {"kind": "delta"},
  "bogus": 1
})");
    Cmd r = run_tool(d, "run '" + cfg + "'");
    CHECK(r.code == 2);
    CHECK(has(r.err, ":5: unknown key \"bogus\""));
  }

  SUBCASE("unknown experiment") {
    std::string cfg = write_cfg(d, "exp.json", R"({"experiment": "nope"})");
    Cmd r = run_tool(d, "run '" + cfg + "'");
    CHECK(r.code == 2);
    CHECK(has(r.err, "must be one of"));
  }

  SUBCASE("out-of-range value") {
    std::string cfg = write_cfg(d, "range.json", R"({
  "experiment": "wavefront",
  "grid": {"n_points": 16384, "extent": 128.0},
  "signal": {"kind": "delta"},
  "wf": {"n_bins": 8}
})");
    Cmd r = run_tool(d, "run '" + cfg + "'");
    CHECK(r.code == 2);
    CHECK(has(r.err, "outside [16, 512]"));
  }

  SUBCASE("missing required signal parameter") {
    std::string cfg = write_cfg(d, "param.json", R"({
  "experiment": "wavefront",
  "grid": {"n_points": 16384, "extent": 128.0},
  "signal": {"kind": "plane_wave"}
})");
    Cmd r = run_tool(d, "run '" + cfg + "'");
    CHECK(r.code == 2);
    CHECK(has(r.err, "requires param \"xi0\""));
  }

  SUBCASE("grid size must be a power of two") {
    std::string cfg = write_cfg(d, "pow2.json", R"({
  "experiment": "wavefront",
  "grid": {"n_points": 100, "extent": 128.0},
  "signal": {"kind": "delta"}
})");
    Cmd r = run_tool(d, "run '" + cfg + "'");
    CHECK(r.code == 2);
    CHECK(has(r.err, "power of two"));
  }

  SUBCASE("full-lattice csv export is size-guarded") {
    std::string cfg = write_cfg(d, "full.json", R"({
  "experiment": "stft",
  "grid": {"n_points": 1024, "extent": 32.0},
  "signal": {"kind": "delta"},
  "lattice": {"type": "full"}
})");
    Cmd r = run_tool(d, "run '" + cfg + "'");
    CHECK(r.code == 2);
    CHECK(has(r.err, "too large"));
  }
}

TEST_CASE("normalize_config fills defaults and is idempotent") {
  json raw = json::parse(R"({
    "experiment": "propagate",
    "grid": {"n_points": 1024, "extent": 32.0},
    "signal": {"kind": "delta", "params": {"x0": 0.5}},
    "hamiltonian": {"kind": "free"},
    "times": [0.25, 0.5]
  })");
  json n1 = gwf::cli::normalize_config(raw);
  CHECK(n1.at("window") == "gaussian");
  CHECK(n1.at("wf").at("n_bins") == 64);
  CHECK(n1.at("wf").at("p") == "inf");
  CHECK(n1.at("taper_evolved") == true);  // default for the free particle
  CHECK(n1.at("n_steps_per_unit") == 2000);
  json n2 = gwf::cli::normalize_config(n1);
  CHECK(n1 == n2);

  CHECK_THROWS_AS(gwf::cli::normalize_config(json{{"experiment", "stft"}}),
                  gwf::cli::ConfigError);
  json clash = json::parse(R"({
    "experiment": "gabor-matrix",
    "grid": {"n_points": 256, "extent": 16.0},
    "hamiltonian": {"kind": "ho"},
    "times": [0.5],
    "wrong_flow": "ho"
  })");
  try {
    gwf::cli::normalize_config(clash);
    FAIL("expected ConfigError");
  } catch (const gwf::cli::ConfigError& e) {
    CHECK(e.token == "wrong_flow");
  }
}

TEST_CASE("wavefront run emits the estimate, csv and manifest") {
  TempDir d;
  std::string cfg = write_cfg(d, "wf.json", R"({
  "experiment": "wavefront",
  "grid": {"n_points": 16384, "extent": 128.0},
  "signal": {"kind": "delta"}
})");
  const std::string outdir = d / "out";
  Cmd r = run_tool(d, "run '" + cfg + "' --output-dir '" + outdir + "'");
  CHECK(r.code == 0);
  CHECK(has(r.out, "[PASS] wavefront-estimate"));

  json rep = json::parse(slurp(outdir + "/wavefront.json"));
  // a point mass concentrates along the two frequency half-axes
  CHECK(rep.at("arcs").size() == 2);
  CHECK(rep.at("in_bins").size() >= 2);
  CHECK(rep.at("in_bins").size() <= 14);
  CHECK(rep.at("signal").at("kind") == "delta");

  json manifest = json::parse(slurp(outdir + "/manifest.json"));
  CHECK(manifest.at("tool") == "gaborwf");
  CHECK(manifest.at("experiment") == "wavefront");
  CHECK(manifest.at("checks").at(0).at("name") == "wavefront-estimate");
  CHECK(manifest.at("checks").at(0).at("pass") == true);
  std::vector<std::string> arts = manifest.at("artifacts");
  CHECK(arts == std::vector<std::string>{"bins.csv", "normalized_config.json",
                                         "wavefront.json"});
}

TEST_CASE("verify-suite reruns are byte-identical") {
  TempDir d;
  std::string cfg = write_cfg(d, "suite.json",
                              R"({"experiment": "verify-suite", "checks": ["flow-algebra"]})");
  const std::string o1 = d / "r1", o2 = d / "r2";
  Cmd r1 = run_tool(d, "run '" + cfg + "' --output-dir '" + o1 + "'");
  Cmd r2 = run_tool(d, "run '" + cfg + "' --output-dir '" + o2 + "'");
  CHECK(r1.code == 0);
  CHECK(r2.code == 0);
  CHECK(has(r1.out, "flow-algebra"));
  for (const std::string f :
       {"manifest.json", "normalized_config.json", "flow-algebra/flow-algebra.json"}) {
    const std::string a = slurp(o1 + "/" + f), b = slurp(o2 + "/" + f);
    CHECK(!a.empty());
    CHECK(a == b);
  }
}

TEST_CASE("failing numeric check exits 1 and is named on stderr") {
  TempDir d;
  std::string cfg = write_cfg(d, "flow.json", R"({
  "experiment": "flow",
  "hamiltonian": {"kind": "ho"},
  "tolerances": {"closed_form": 0.0}
})");
  const std::string outdir = d / "out";
  Cmd r = run_tool(d, "run '" + cfg + "' --output-dir '" + outdir + "'");
  CHECK(r.code == 1);
  CHECK(has(r.out, "[FAIL] flow-closed-form"));
  CHECK(has(r.err, "failed checks: "));
  CHECK(has(r.err, "flow-closed-form"));
  json manifest = json::parse(slurp(outdir + "/manifest.json"));
  bool found_fail = false;
  for (const auto& c : manifest.at("checks"))
    if (c.at("name") == "flow-closed-form") found_fail = !c.at("pass").get<bool>();
  CHECK(found_fail);
}

TEST_CASE("seed override is applied and recorded") {
  TempDir d;
  std::string cfg = write_cfg(d, "flow.json", R"({
  "experiment": "flow",
  "hamiltonian": {"kind": "ho"},
  "seed": 7
})");
  const std::string outdir = d / "out";
  Cmd r = run_tool(d, "run '" + cfg + "' --output-dir '" + outdir + "' --seed 123");
  CHECK(r.code == 0);
  json manifest = json::parse(slurp(outdir + "/manifest.json"));
  CHECK(manifest.at("seed") == 123);
  json norm = json::parse(slurp(outdir + "/normalized_config.json"));
  CHECK(norm.at("seed") == 123);
}

TEST_CASE("output dir falls back to the environment") {
  TempDir d;
  std::string cfg = write_cfg(d, "stft.json", R"({
  "experiment": "stft",
  "grid": {"n_points": 128, "extent": 16.0},
  "signal": {"kind": "delta"},
  "lattice": {"radius": 2.0, "stride": 0.5}
})");
  const std::string outdir = d / "envout";
  Cmd r = shell(d, "TOOL_OUTPUT_DIR='" + outdir + "' '" + kBin + "' run '" +
                       cfg + "' --jobs 4");
  CHECK(r.code == 0);
  CHECK(has(r.out, "[PASS] stft-direct-consistency"));
  CHECK(fs::exists(outdir + "/manifest.json"));
  CHECK(fs::file_size(outdir + "/stft.f64") > 0);
  CHECK(fs::exists(outdir + "/stft_abs.csv"));
}

TEST_CASE("propagate run saves snapshots and estimates") {
  TempDir d;
  std::string cfg = write_cfg(d, "prop.json", R"({
  "experiment": "propagate",
  "grid": {"n_points": 16384, "extent": 128.0},
  "signal": {"kind": "delta"},
  "hamiltonian": {"kind": "free"},
  "times": [0.25],
  "verify": false
})");
  const std::string outdir = d / "out";
  Cmd r = run_tool(d, "run '" + cfg + "' --output-dir '" + outdir + "'");
  CHECK(r.code == 0);
  CHECK(has(r.out, "[PASS] propagate-run"));
  CHECK(fs::file_size(outdir + "/u0.f64") > 0);
  CHECK(fs::file_size(outdir + "/snapshot_0.f64") > 0);
  json rep = json::parse(slurp(outdir + "/propagate.json"));
  CHECK(rep.at("times").size() == 1);
  CHECK(rep.at("times").at(0).at("t").get<double>() == 0.25);
  CHECK(rep.at("times").at(0).at("wf").at("in_bins").size() >= 2);
}

TEST_CASE("gabor-matrix run falsifies the wrong flow") {
  TempDir d;
  // half an oscillator period: the identity flow misplaces every center
  // by 2|w|, far enough to flatten all displacement shells
  std::string cfg = write_cfg(d, "gm.json", R"({
  "experiment": "gabor-matrix",
  "grid": {"n_points": 256, "extent": 16.0},
  "hamiltonian": {"kind": "ho"},
  "times": [3.141592653589793],
  "lattice": {"radius": 3.0, "stride": 0.5},
  "wrong_flow": "identity",
  "min_s_hat": 4.0,
  "save_matrix": true
})");
  const std::string outdir = d / "out";
  Cmd r = run_tool(d, "run '" + cfg + "' --output-dir '" + outdir + "'");
  CHECK(r.code == 0);
  CHECK(has(r.out, "[PASS] envelope-violations"));
  CHECK(has(r.out, "[PASS] envelope-exponent"));
  CHECK(has(r.out, "[PASS] falsification"));
  CHECK(fs::file_size(outdir + "/gabor_0.f64") > 0);
  CHECK(fs::exists(outdir + "/shells_0.csv"));
  json fits = json::parse(slurp(outdir + "/gabor_fits.json"));
  CHECK(fits.at(0).at("fit").at("violations") == 0);
  CHECK(fits.at(0).at("fit").at("s_hat").get<double>() >= 4.0);
  CHECK(fits.at(0).at("falsification").at("falsified") == true);
  CHECK(fits.at(0).at("falsification").at("drop").get<double>() >= 1.0);
}

TEST_CASE("dyson run reports a geometric term ladder") {
  TempDir d;
  // spread-out initial state: the sin^mu perturbation nearly vanishes on
  // states concentrated at the origin, which would starve the term ladder
  std::string cfg = write_cfg(d, "dyson.json", R"({
  "experiment": "dyson",
  "grid": {"n_points": 256, "extent": 16.0},
  "signal": {"kind": "constant", "taper": true}
})");
  const std::string outdir = d / "out";
  Cmd r = run_tool(d, "run '" + cfg + "' --output-dir '" + outdir + "'");
  CHECK(r.code == 0);
  CHECK(has(r.out, "[PASS] dyson-ratio-test"));
  json rep = json::parse(slurp(outdir + "/dyson.json"));
  REQUIRE(rep.at("term_norms").size() == 4);  // orders 0..3
  CHECK(rep.at("term_norms").at(0).get<double>() == doctest::Approx(1.0).epsilon(1e-6));
  REQUIRE(rep.at("ratio_factors").size() == 3);
  for (const auto& f : rep.at("ratio_factors")) {
    CHECK(f.get<double>() >= 1.0 / 3.0);
    CHECK(f.get<double>() <= 3.0);
  }
  CHECK(fs::file_size(outdir + "/dyson_u.f64") > 0);
}

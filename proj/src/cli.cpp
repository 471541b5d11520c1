#include "gwf/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "gwf/core.hpp"
#include "gwf/experiments.hpp"
#include "gwf/flow.hpp"
#include "gwf/gabormatrix.hpp"
#include "gwf/propagator.hpp"
#include "gwf/serialize.hpp"
#include "gwf/stft.hpp"
#include "gwf/version.hpp"
#include "gwf/wavefront.hpp"

namespace gwf::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fm(const char* format, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, format);
  std::vsnprintf(buf, sizeof buf, format, ap);
  va_end(ap);
  return buf;
}

[[noreturn]] void fail(const std::string& msg, const std::string& token = "") {
  throw ConfigError(msg, token);
}

// ---------------------------------------------------------------- schema ---

void check_keys(const json& obj, const std::string& ctx,
                const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(ctx + " must be a JSON object", ctx);
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      fail("unknown key \"" + it.key() + "\" in " + ctx, it.key());
}

const json& want(const json& obj, const std::string& key,
                 const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(ctx + " requires key \"" + key + "\"", key);
  return *it;
}

double num_in(const json& v, const std::string& key, double lo, double hi) {
  if (!v.is_number()) fail("\"" + key + "\" must be a number", key);
  const double d = v.get<double>();
  if (!(d >= lo && d <= hi))
    fail(fm("\"%s\" = %g outside [%g, %g]", key.c_str(), d, lo, hi), key);
  return d;
}

int int_in(const json& v, const std::string& key, long lo, long hi) {
  if (!v.is_number_integer()) fail("\"" + key + "\" must be an integer", key);
  const long d = v.get<long>();
  if (d < lo || d > hi)
    fail(fm("\"%s\" = %ld outside [%ld, %ld]", key.c_str(), d, lo, hi), key);
  return static_cast<int>(d);
}

double opt_num(const json& obj, const std::string& key, double def, double lo,
               double hi) {
  auto it = obj.find(key);
  return it == obj.end() ? def : num_in(*it, key, lo, hi);
}

int opt_int(const json& obj, const std::string& key, long def, long lo,
            long hi) {
  auto it = obj.find(key);
  return it == obj.end() ? static_cast<int>(def) : int_in(*it, key, lo, hi);
}

bool opt_bool(const json& obj, const std::string& key, bool def) {
  auto it = obj.find(key);
  if (it == obj.end()) return def;
  if (!it->is_boolean()) fail("\"" + key + "\" must be a boolean", key);
  return it->get<bool>();
}

std::string opt_enum(const json& obj, const std::string& key,
                     const std::string& def,
                     const std::set<std::string>& values) {
  auto it = obj.find(key);
  if (it == obj.end()) return def;
  if (!it->is_string() || !values.count(it->get<std::string>())) {
    std::string opts;
    for (const auto& v : values) opts += (opts.empty() ? "" : ", ") + v;
    fail("\"" + key + "\" must be one of {" + opts + "}", key);
  }
  return it->get<std::string>();
}

json norm_grid(const json& cfg, const std::string& ctx) {
  const json& g = want(cfg, "grid", ctx);
  check_keys(g, "grid", {"n_points", "extent"});
  const int n = int_in(want(g, "n_points", "grid"), "n_points", 8, 1 << 20);
  if (n & (n - 1)) fail("\"n_points\" must be a power of two", "n_points");
  const double extent = num_in(want(g, "extent", "grid"), "extent", 1e-6, 16384.0);
  return json{{"n_points", n}, {"extent", json_real(extent)}};
}

GridSpec grid_of(const json& g) {
  return make_grid(g.at("n_points").get<int>(), g.at("extent").get<double>());
}

json norm_signal(const json& cfg, const std::string& ctx) {
  const json& s = want(cfg, "signal", ctx);
  check_keys(s, "signal", {"kind", "params", "taper"});
  const std::string kind =
      opt_enum(s, "kind", "", {"delta", "plane_wave", "chirp",
                               "ho_ground_state", "constant", "gaussian_chirp"});
  if (kind.empty()) fail("signal requires key \"kind\"", "kind");
  static const std::map<std::string, std::pair<std::set<std::string>,
                                               std::set<std::string>>>
      kind_params = {
          {"delta", {{}, {"x0"}}},
          {"plane_wave", {{"xi0"}, {}}},
          {"chirp", {{"c"}, {}}},
          {"ho_ground_state", {{}, {}}},
          {"constant", {{}, {}}},
          {"gaussian_chirp", {{"c", "sigma"}, {}}},
      };
  const auto& [required, optional] = kind_params.at(kind);
  json params = json::object();
  const json src = s.value("params", json::object());
  std::set<std::string> allowed = required;
  allowed.insert(optional.begin(), optional.end());
  check_keys(src, "signal.params", allowed);
  for (const auto& key : required)
    if (!src.contains(key))
      fail("signal kind \"" + kind + "\" requires param \"" + key + "\"", key);
  for (auto it = src.begin(); it != src.end(); ++it)
    params[it.key()] = json_real(num_in(*it, it.key(), -1e6, 1e6));
  if (kind == "gaussian_chirp" && params.at("sigma").get<double>() <= 0)
    fail("\"sigma\" must be positive", "sigma");
  return json{{"kind", kind},
              {"params", params},
              {"taper", opt_bool(s, "taper", false)}};
}

SampledSignal signal_of(const GridSpec& grid, const json& s) {
  std::map<std::string, double> params;
  for (auto it = s.at("params").begin(); it != s.at("params").end(); ++it)
    params[it.key()] = it->get<double>();
  SampledSignal f = make_test_signal(grid, s.at("kind").get<std::string>(), params);
  if (s.at("taper").get<bool>()) f = apply_taper(f);
  return f;
}

json norm_window(const json& cfg) {
  return opt_enum(cfg, "window", "gaussian",
                  {"gaussian", "gaussian_normalized", "hermite1"});
}

Window window_of(const GridSpec& grid, const json& w) {
  const std::string name = w.get<std::string>();
  if (name == "gaussian") return make_gaussian_window(grid);
  if (name == "gaussian_normalized") return make_gaussian_window(grid, true);
  return make_hermite_window(grid);
}

json norm_wf(const json& cfg) {
  const json w = cfg.value("wf", json::object());
  check_keys(w, "wf",
             {"mode", "n_bins", "guard_bins", "inner_radius", "R_max",
              "r_threshold", "p", "r", "ratio_threshold", "floor_rel",
              "stride"});
  json out;
  out["mode"] = opt_enum(w, "mode", "smooth", {"smooth", "weighted"});
  out["n_bins"] = opt_int(w, "n_bins", 64, 16, 512);
  out["guard_bins"] = opt_int(w, "guard_bins", 1, 0, 8);
  out["inner_radius"] = json_real(opt_num(w, "inner_radius", 2.0, 0.5, 64.0));
  out["R_max"] = json_real(opt_num(w, "R_max", 32.0, 4.0, 4096.0));
  out["r_threshold"] = json_real(opt_num(w, "r_threshold", 6.0, 0.1, 64.0));
  auto ip = w.find("p");
  if (ip == w.end() || (ip->is_string() && *ip == "inf"))
    out["p"] = "inf";
  else
    out["p"] = json_real(num_in(*ip, "p", 1.0, 64.0));
  out["r"] = json_real(opt_num(w, "r", 0.0, -20.0, 20.0));
  out["ratio_threshold"] = json_real(opt_num(w, "ratio_threshold", 0.9, 0.1, 10.0));
  out["floor_rel"] = json_real(opt_num(w, "floor_rel", 1e-4, 1e-12, 1.0));
  out["stride"] = json_real(opt_num(w, "stride", 0.5, 1e-3, 8.0));
  return out;
}

WFParams wf_of(const json& w) {
  WFParams p;
  p.mode = w.at("mode").get<std::string>();
  p.n_bins = w.at("n_bins").get<int>();
  p.guard_bins = w.at("guard_bins").get<int>();
  p.inner_radius = w.at("inner_radius").get<double>();
  p.R_max = w.at("R_max").get<double>();
  p.r_threshold = w.at("r_threshold").get<double>();
  p.p = w.at("p").is_string() ? std::numeric_limits<double>::infinity()
                              : w.at("p").get<double>();
  p.r = w.at("r").get<double>();
  p.ratio_threshold = w.at("ratio_threshold").get<double>();
  p.floor_rel = w.at("floor_rel").get<double>();
  p.stride = w.at("stride").get<double>();
  return p;
}

json norm_times(const json& cfg, const std::string& ctx) {
  const json& ts = want(cfg, "times", ctx);
  if (!ts.is_array() || ts.empty() || ts.size() > 16)
    fail("\"times\" must be a non-empty array of at most 16 reals", "times");
  json out = json::array();
  for (const auto& t : ts) out.push_back(json_real(num_in(t, "times", -10.0, 10.0)));
  return out;
}

json norm_hamiltonian(const json& cfg, const std::string& ctx,
                      const std::set<std::string>& kinds, const json& grid) {
  const json& h = want(cfg, "hamiltonian", ctx);
  check_keys(h, "hamiltonian", {"kind", "coupling", "mu", "x0"});
  const std::string kind = opt_enum(h, "kind", "", kinds);
  if (kind.empty()) fail("hamiltonian requires key \"kind\"", "kind");
  json out{{"kind", kind}};
  if (kind == "perturbed") {
    out["coupling"] = json_real(opt_num(h, "coupling", 1.0, 0.0, 10.0));
    out["mu"] = json_real(opt_num(h, "mu", 3.0, 1.0 + 1e-9, 10.0));
  } else if (h.contains("coupling") || h.contains("mu")) {
    fail("\"coupling\"/\"mu\" only apply to the perturbed oscillator",
         "coupling");
  }
  if (kind == "translation") {
    const double x0 = opt_num(h, "x0", 0.5, -1e4, 1e4);
    const GridSpec g = grid_of(grid);
    if (std::abs(x0 / g.dx() - std::lround(x0 / g.dx())) > 1e-6)
      fail(fm("\"x0\" = %g is not a multiple of the grid spacing %g", x0,
              g.dx()), "x0");
    out["x0"] = json_real(x0);
  } else if (h.contains("x0")) {
    fail("\"x0\" only applies to the translation potential", "x0");
  }
  return out;
}

// ------------------------------------------------- per-experiment schemas ---

json normalize_stft(const json& cfg) {
  json out;
  out["grid"] = norm_grid(cfg, "stft");
  out["signal"] = norm_signal(cfg, "stft");
  out["window"] = norm_window(cfg);
  const json lat = cfg.value("lattice", json::object());
  check_keys(lat, "lattice", {"type", "radius", "stride"});
  const std::string type = opt_enum(lat, "type", "box", {"box", "full"});
  json nlat{{"type", type}};
  long n_rows;
  const GridSpec grid = grid_of(out["grid"]);
  if (type == "box") {
    const double radius = opt_num(lat, "radius", 6.0, 0.1, 1e4);
    const double stride = opt_num(lat, "stride", 0.5, 1e-4, 1e3);
    nlat["radius"] = json_real(radius);
    nlat["stride"] = json_real(stride);
    const long k = 2 * static_cast<long>(std::ceil(radius / stride)) + 1;
    n_rows = k * k;
  } else {
    if (lat.contains("radius") || lat.contains("stride"))
      fail("\"radius\"/\"stride\" only apply to box lattices", "radius");
    n_rows = static_cast<long>(grid.n_points) * grid.n_points;
  }
  out["lattice"] = nlat;
  out["emit_csv"] = opt_bool(cfg, "emit_csv", true);
  if (out["emit_csv"].get<bool>() && n_rows > 200000)
    fail(fm("csv export of %ld lattice points is too large; set emit_csv "
            "false or shrink the lattice", n_rows), "emit_csv");
  return out;
}

json normalize_wavefront(const json& cfg) {
  json out;
  out["grid"] = norm_grid(cfg, "wavefront");
  out["signal"] = norm_signal(cfg, "wavefront");
  out["window"] = norm_window(cfg);
  out["wf"] = norm_wf(cfg);
  return out;
}

json normalize_flow(const json& cfg) {
  json out;
  const json& h = want(cfg, "hamiltonian", "flow");
  check_keys(h, "hamiltonian", {"kind"});
  out["hamiltonian"] =
      json{{"kind", opt_enum(h, "kind", "ho", {"free", "ho", "quartic"})}};
  out["t_max"] = json_real(opt_num(cfg, "t_max", 3.0, 1e-3, 5.0));
  out["radius"] = json_real(opt_num(cfg, "radius", 10.0, 0.5, 50.0));
  out["n_samples"] = opt_int(cfg, "n_samples", 20, 1, 500);
  out["seed"] = opt_int(cfg, "seed", 7, 0, 1L << 31);
  const json tol = cfg.value("tolerances", json::object());
  check_keys(tol, "tolerances",
             {"closed_form", "group_law", "symplecticity", "homogeneity"});
  json ntol;
  ntol["closed_form"] = json_real(opt_num(tol, "closed_form", 1e-8, 0.0, 1.0));
  ntol["group_law"] = json_real(opt_num(tol, "group_law", 1e-7, 0.0, 1.0));
  ntol["symplecticity"] =
      json_real(opt_num(tol, "symplecticity", 1e-6, 0.0, 1.0));
  ntol["homogeneity"] = json_real(opt_num(tol, "homogeneity", 1e-6, 0.0, 1.0));
  out["tolerances"] = ntol;
  return out;
}

json normalize_propagate(const json& cfg) {
  json out;
  out["grid"] = norm_grid(cfg, "propagate");
  out["signal"] = norm_signal(cfg, "propagate");
  out["window"] = norm_window(cfg);
  out["wf"] = norm_wf(cfg);
  out["hamiltonian"] = norm_hamiltonian(
      cfg, "propagate", {"free", "ho", "perturbed", "translation"},
      out["grid"]);
  out["times"] = norm_times(cfg, "propagate");
  out["n_steps_per_unit"] = opt_int(cfg, "n_steps_per_unit", 2000, 200, 100000);
  const std::string kind = out["hamiltonian"]["kind"].get<std::string>();
  out["taper_evolved"] = opt_bool(cfg, "taper_evolved",
                                  kind == "free" || kind == "translation");
  out["verify"] = opt_bool(cfg, "verify", true);
  out["save_snapshots"] = opt_bool(cfg, "save_snapshots", true);
  return out;
}

json normalize_gabor_matrix(const json& cfg) {
  json out;
  out["grid"] = norm_grid(cfg, "gabor-matrix");
  out["window"] = norm_window(cfg);
  out["hamiltonian"] =
      norm_hamiltonian(cfg, "gabor-matrix", {"ho", "perturbed"}, out["grid"]);
  out["times"] = norm_times(cfg, "gabor-matrix");
  const json lat = cfg.value("lattice", json::object());
  check_keys(lat, "lattice", {"radius", "stride"});
  out["lattice"] =
      json{{"radius", json_real(opt_num(lat, "radius", 6.0, 0.5, 64.0))},
           {"stride", json_real(opt_num(lat, "stride", 0.5, 1e-2, 8.0))}};
  out["flow"] = opt_enum(cfg, "flow", "ho", {"ho", "free", "identity"});
  out["wrong_flow"] =
      opt_enum(cfg, "wrong_flow", "none", {"none", "ho", "free", "identity"});
  if (out["wrong_flow"] == out["flow"])
    fail("\"wrong_flow\" must differ from \"flow\"", "wrong_flow");
  out["min_s_hat"] = json_real(opt_num(cfg, "min_s_hat", 0.0, 0.0, 64.0));
  out["save_matrix"] = opt_bool(cfg, "save_matrix", false);
  return out;
}

json normalize_dyson(const json& cfg) {
  json out;
  out["grid"] = norm_grid(cfg, "dyson");
  out["signal"] = norm_signal(cfg, "dyson");
  out["coupling"] = json_real(opt_num(cfg, "coupling", 0.1, 1e-6, 1.0));
  out["mu"] = json_real(opt_num(cfg, "mu", 3.0, 1.0 + 1e-9, 10.0));
  out["t"] = json_real(opt_num(cfg, "t", 0.2, 1e-3, 2.0));
  out["n_terms"] = opt_int(cfg, "n_terms", 3, 0, 4);
  out["quad_points"] = opt_int(cfg, "quad_points", 64, 8, 1024);
  return out;
}

json normalize_verify_suite(const json& cfg) {
  json out;
  const auto& names = acceptance_check_names();
  json checks = json::array();
  if (cfg.contains("checks")) {
    const json& cs = cfg.at("checks");
    if (!cs.is_array() || cs.empty())
      fail("\"checks\" must be a non-empty array of check names", "checks");
    for (const auto& c : cs) {
      if (!c.is_string() ||
          std::find(names.begin(), names.end(), c.get<std::string>()) ==
              names.end())
        fail("unknown check \"" + (c.is_string() ? c.get<std::string>() : "?") +
             "\"", "checks");
      checks.push_back(c.get<std::string>());
    }
  } else {
    for (const auto& n : names) checks.push_back(n);
  }
  out["checks"] = checks;
  return out;
}

// ---------------------------------------------------------------- runners ---

struct RunContext {
  fs::path outdir;
  json checks = json::array();
  std::vector<std::string> artifacts;

  void note(const std::string& file) { artifacts.push_back(file); }
  bool record(const std::string& name, bool pass) {
    checks.push_back(json{{"name", name}, {"pass", pass}});
    std::printf("[%s] %s\n", pass ? "PASS" : "FAIL", name.c_str());
    return pass;
  }
  void write_json(const std::string& file, const json& j) {
    std::ofstream out(outdir / file, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + file);
    out << dump_json(j);
    note(file);
  }
};

json wf_report(const WFEstimate& est) { return wf_to_json(est); }

bool run_stft_exp(const json& cfg, RunContext& ctx) {
  const GridSpec grid = grid_of(cfg.at("grid"));
  const SampledSignal f = signal_of(grid, cfg.at("signal"));
  const Window g = window_of(grid, cfg.at("window"));
  const json& lat_cfg = cfg.at("lattice");
  const TFLattice lat =
      lat_cfg.at("type") == "full"
          ? full_lattice(grid)
          : box_lattice(grid, lat_cfg.at("radius").get<double>(),
                        lat_cfg.at("radius").get<double>(),
                        lat_cfg.at("stride").get<double>());
  const TFArray F = stft(f, g, lat);
  save_tfarray(F, (ctx.outdir / "stft").string());
  ctx.note("stft.json");
  ctx.note("stft.f64");

  if (cfg.at("emit_csv").get<bool>()) {
    const Eigen::Index nx = lat.x_points.size(), nxi = lat.xi_points.size();
    RMat rows(nx * nxi, 3);
    Eigen::Index p = 0;
    for (Eigen::Index i = 0; i < nx; ++i)
      for (Eigen::Index j = 0; j < nxi; ++j, ++p) {
        rows(p, 0) = lat.x_points[i];
        rows(p, 1) = lat.xi_points[j];
        rows(p, 2) = std::abs(F.values(i, j));
      }
    write_csv((ctx.outdir / "stft_abs.csv").string(), {"x", "xi", "abs_V"},
              rows);
    ctx.note("stft_abs.csv");
  }

  // spot-check the FFT path against direct quadrature on a few points
  TFLattice probe;
  const Eigen::Index nx = lat.x_points.size(), nxi = lat.xi_points.size();
  probe.x_points = RVec(2);
  probe.x_points << lat.x_points[0], lat.x_points[nx / 2];
  probe.xi_points = RVec(2);
  probe.xi_points << lat.xi_points[0], lat.xi_points[nxi / 2];
  const TFArray D = stft_direct(f, g, probe);
  double dev = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const Eigen::Index i = a == 0 ? 0 : nx / 2, j = b == 0 ? 0 : nxi / 2;
      dev = std::max(dev, std::abs(D.values(a, b) - F.values(i, j)));
    }
  return ctx.record("stft-direct-consistency", dev <= 1e-8);
}

bool run_wavefront_exp(const json& cfg, RunContext& ctx) {
  const GridSpec grid = grid_of(cfg.at("grid"));
  const SampledSignal f = signal_of(grid, cfg.at("signal"));
  const Window g = window_of(grid, cfg.at("window"));
  const WFEstimate est = estimate_wf(f, g, wf_of(cfg.at("wf")));
  json rep = wf_report(est);
  rep["signal"] = cfg.at("signal");
  ctx.write_json("wavefront.json", rep);

  RMat rows(static_cast<Eigen::Index>(est.bins.size()), 4);
  for (size_t b = 0; b < est.bins.size(); ++b) {
    rows(b, 0) = est.bins[b].angle;
    rows(b, 1) = est.bins[b].score;
    rows(b, 2) = est.bins[b].exponent_hat;
    rows(b, 3) = est.bins[b].in_wf ? 1.0 : 0.0;
  }
  write_csv((ctx.outdir / "bins.csv").string(),
            {"angle", "score", "exponent_hat", "in_wf"}, rows);
  ctx.note("bins.csv");
  return ctx.record("wavefront-estimate", true);
}

bool run_flow_exp(const json& cfg, RunContext& ctx) {
  const std::string kind = cfg.at("hamiltonian").at("kind").get<std::string>();
  const HamiltonianSpec spec = kind == "free"   ? make_free_hamiltonian()
                               : kind == "ho"   ? make_ho_hamiltonian()
                                                : make_quartic_hamiltonian();
  const double t_max = cfg.at("t_max").get<double>();
  const double radius = cfg.at("radius").get<double>();
  const int n_samples = cfg.at("n_samples").get<int>();
  const json& tol = cfg.at("tolerances");
  std::mt19937_64 rng(cfg.at("seed").get<long>());
  auto uni = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  auto draw_w = [&] {
    RVec w(2);
    w << uni(-radius, radius), uni(-radius, radius);
    return w;
  };

  double dev_closed = 0.0, dev_group = 0.0, dev_sympl = 0.0, dev_homog = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const RVec w = draw_w();
    const double t = uni(-t_max, t_max);
    if (kind != "quartic") {
      const FlowMap closed =
          kind == "free" ? make_free_flow(t) : make_ho_flow(t);
      dev_closed = std::max(dev_closed,
                            (flow_apply(make_numeric_flow(spec, t), w) -
                             flow_apply(closed, w))
                                .cwiseAbs()
                                .maxCoeff());
    }
    dev_group = std::max(
        dev_group, group_law_check(spec, t / 2, uni(-t_max, t_max) / 2, {w})
                       .max_deviation);
    dev_sympl = std::max(
        dev_sympl, symplectic_defect(flow_jacobian(make_numeric_flow(spec, t), w)));
    if (kind == "quartic") {
      RVec radii(2);
      radii << 8.0, 10.0;
      const double th = uni(0, kTwoPi);
      RVec dir(2);
      dir << std::cos(th), std::sin(th);
      dev_homog = std::max(
          dev_homog, homogeneity_check(make_numeric_flow(spec, t / 4), radii,
                                       {dir})
                         .max_deviation);
    }
  }

  json rep;
  rep["hamiltonian"] = kind;
  rep["group_law"] = json_real(dev_group);
  rep["symplecticity"] = json_real(dev_sympl);
  if (kind != "quartic") rep["closed_form"] = json_real(dev_closed);
  if (kind == "quartic") rep["homogeneity"] = json_real(dev_homog);
  ctx.write_json("flow.json", rep);

  bool ok = ctx.record("flow-group-law",
                       dev_group <= tol.at("group_law").get<double>());
  ok &= ctx.record("flow-symplecticity",
                   dev_sympl <= tol.at("symplecticity").get<double>());
  if (kind != "quartic")
    ok &= ctx.record("flow-closed-form",
                     dev_closed <= tol.at("closed_form").get<double>());
  if (kind == "quartic")
    ok &= ctx.record("flow-homogeneity",
                     dev_homog <= tol.at("homogeneity").get<double>());
  return ok;
}

bool run_propagate_exp(const json& cfg, RunContext& ctx) {
  const GridSpec grid = grid_of(cfg.at("grid"));
  const SampledSignal u0 = signal_of(grid, cfg.at("signal"));
  const Window g = window_of(grid, cfg.at("window"));
  const WFParams prm = wf_of(cfg.at("wf"));
  const json& ham = cfg.at("hamiltonian");
  const std::string kind = ham.at("kind").get<std::string>();
  const bool verify = cfg.at("verify").get<bool>();
  const bool taper_evolved = cfg.at("taper_evolved").get<bool>();
  const int nspu = cfg.at("n_steps_per_unit").get<int>();
  const double db = kTwoPi / prm.n_bins;

  save_signal(u0, (ctx.outdir / "u0").string());
  ctx.note("u0.json");
  ctx.note("u0.f64");

  WFEstimate est0;
  if (verify) est0 = estimate_wf(u0, g, prm);

  auto evolve = [&](double t) -> SampledSignal {
    if (kind == "free") return evolve_exact_free(u0, t);
    if (kind == "translation")
      return evolve_translation_potential(evolve_exact_free(u0, t), t,
                                          ham.at("x0").get<double>());
    const int steps = std::max<long>(
        1, static_cast<long>(std::ceil(std::abs(t) * nspu)));
    const EvolutionSpec es =
        kind == "ho" ? make_ho_spec(t, steps)
                     : make_perturbed_ho_spec(t, steps,
                                              ham.at("coupling").get<double>(),
                                              ham.at("mu").get<double>());
    return evolve_split_step(u0, es);
  };

  bool ok = true;
  json times_rep = json::array();
  const json& times = cfg.at("times");
  for (size_t i = 0; i < times.size(); ++i) {
    const double t = times[i].get<double>();
    const SampledSignal ut = evolve(t);
    if (cfg.at("save_snapshots").get<bool>()) {
      const std::string base = fm("snapshot_%zu", i);
      save_snapshot(ut, t, (ctx.outdir / base).string());
      ctx.note(base + ".json");
      ctx.note(base + ".f64");
    }
    const SampledSignal probe = taper_evolved ? apply_taper(ut) : ut;
    const WFEstimate estT = estimate_wf(probe, g, prm);
    json entry;
    entry["t"] = json_real(t);
    entry["wf"] = wf_report(estT);
    if (verify) {
      const FlowMap chi = (kind == "free" || kind == "translation")
                              ? make_free_flow(t)
                              : make_ho_flow(t);
      const WFEstimate mapped = map_wf(est0, chi);
      const double d = wf_distance(estT, mapped);
      entry["mapped_in_bins"] = mapped.in_bins();
      entry["distance_bins"] = json_real(d / db);
      ok &= ctx.record(fm("propagation[t=%g]", t), d <= 2.0 * db + 1e-9);
    }
    times_rep.push_back(std::move(entry));
  }
  json rep;
  rep["hamiltonian"] = ham;
  if (verify) rep["wf_u0"] = wf_report(est0);
  rep["times"] = std::move(times_rep);
  ctx.write_json("propagate.json", rep);
  if (!verify) ok &= ctx.record("propagate-run", true);
  return ok;
}

bool run_gabor_matrix_exp(const json& cfg, RunContext& ctx) {
  const GridSpec grid = grid_of(cfg.at("grid"));
  const Window g = window_of(grid, cfg.at("window"));
  const json& ham = cfg.at("hamiltonian");
  const TimeEvolution U =
      ham.at("kind") == "ho"
          ? spectral_evolution(get_cached_ho_propagator(grid))
          : spectral_evolution(get_cached_perturbed_propagator(
                grid, ham.at("coupling").get<double>()));
  const double radius = cfg.at("lattice").at("radius").get<double>();
  const double stride = cfg.at("lattice").at("stride").get<double>();
  const auto w_pts = phase_box_lattice(radius, stride);
  const long k = std::lround(radius / stride);
  RVec vals(2 * k + 1);
  for (long i = -k; i <= k; ++i) vals[i + k] = i * stride;

  auto flow_of = [](const std::string& name, double t) {
    if (name == "ho") return make_ho_flow(t);
    if (name == "free") return make_free_flow(t);
    return make_free_flow(0.0);  // identity
  };

  const double min_s = cfg.at("min_s_hat").get<double>();
  const std::string wrong = cfg.at("wrong_flow").get<std::string>();
  bool ok = true;
  json rep = json::array();
  const json& times = cfg.at("times");
  for (size_t i = 0; i < times.size(); ++i) {
    const double t = times[i].get<double>();
    const auto K = sample_gabor_matrix(grid, U, g, w_pts, vals, vals, t);
    if (cfg.at("save_matrix").get<bool>()) {
      const std::string base = fm("gabor_%zu", i);
      save_gabor_matrix(K, (ctx.outdir / base).string());
      ctx.note(base + ".json");
      ctx.note(base + ".f64");
    }
    const FlowMap chi = flow_of(cfg.at("flow").get<std::string>(), t);
    const EnvelopeFit fit = fit_envelope(K, chi);
    json entry;
    entry["t"] = json_real(t);
    entry["fit"] = envelope_fit_to_json(fit);
    RMat shell_rows(fit.shell_max.size(), 2);
    for (int m = 0; m < fit.shell_max.size(); ++m) {
      shell_rows(m, 0) = fit.m_min + m;
      shell_rows(m, 1) = fit.shell_max[m];
    }
    const std::string csv = fm("shells_%zu.csv", i);
    write_csv((ctx.outdir / csv).string(), {"m", "shell_max"}, shell_rows);
    ctx.note(csv);

    ok &= ctx.record(fm("envelope-violations[t=%g]", t), fit.violations == 0);
    ok &= ctx.record(fm("envelope-exponent[t=%g]", t), fit.s_hat >= min_s);
    if (wrong != "none") {
      const auto rf = wrongflow_falsification(K, chi, flow_of(wrong, t));
      entry["falsification"] = json{{"drop", json_real(rf.drop)},
                                    {"falsified", rf.falsified},
                                    {"wrong_s_hat", json_real(rf.wrong_fit.s_hat)}};
      ok &= ctx.record(fm("falsification[t=%g]", t), rf.falsified);
    }
    rep.push_back(std::move(entry));
  }
  ctx.write_json("gabor_fits.json", rep);
  return ok;
}

bool run_dyson_exp(const json& cfg, RunContext& ctx) {
  const GridSpec grid = grid_of(cfg.at("grid"));
  SampledSignal u0 = signal_of(grid, cfg.at("signal"));
  const double nrm = l2_norm(u0);
  if (nrm == 0.0) throw std::runtime_error("dyson: zero initial state");
  u0.values /= nrm;
  const double coupling = cfg.at("coupling").get<double>();
  const double mu = cfg.at("mu").get<double>();
  const double t = cfg.at("t").get<double>();
  const TimeEvolution A = spectral_evolution(get_cached_ho_propagator(grid));
  const OperatorHandle B =
      multiplication_operator(grid, [coupling, mu](double x) {
        return cd(coupling * std::pow(std::abs(std::sin(x)), mu), 0.0);
      });
  const DysonSpec spec{cfg.at("n_terms").get<int>(),
                       cfg.at("quad_points").get<int>()};
  const DysonResult res = dyson_phillips_apply(u0, t, A, B, spec);

  json rep;
  rep["t"] = json_real(t);
  rep["norm_change"] = json_real(res.norm_change);
  json norms = json::array();
  for (double v : res.term_norms) norms.push_back(json_real(v));
  rep["term_norms"] = norms;
  bool ratios_ok = true;
  json factors = json::array();
  for (size_t n = 1; n < res.term_norms.size(); ++n) {
    const double ratio = res.term_norms[n] / res.term_norms[n - 1];
    const double factor = ratio / (t * coupling / n);
    factors.push_back(json_real(factor));
    ratios_ok = ratios_ok && factor >= 1.0 / 3.0 && factor <= 3.0;
  }
  rep["ratio_factors"] = factors;
  ctx.write_json("dyson.json", rep);
  save_signal(res.u, (ctx.outdir / "dyson_u").string());
  ctx.note("dyson_u.json");
  ctx.note("dyson_u.f64");
  bool ok = true;
  if (spec.n_terms >= 1) ok &= ctx.record("dyson-ratio-test", ratios_ok);
  else ok &= ctx.record("dyson-run", true);
  return ok;
}

bool run_verify_suite_exp(const json& cfg, RunContext& ctx) {
  bool ok = true;
  for (const auto& name_j : cfg.at("checks")) {
    const std::string name = name_j.get<std::string>();
    const fs::path sub = ctx.outdir / name;
    fs::create_directories(sub);
    const CheckResult res = run_acceptance_check(name, sub.string());
    ctx.note(name + "/" + name + ".json");
    std::printf("[%s] %s  measured=%.6e threshold=%.6e  (%.1f s)\n",
                res.pass ? "PASS" : "FAIL", name.c_str(), res.measured,
                res.threshold, res.seconds);
    ctx.checks.push_back(json{{"name", name}, {"pass", res.pass}});
    ok &= res.pass;
  }
  return ok;
}

}  // namespace

json normalize_config(const json& raw) {
  if (!raw.is_object()) fail("config must be a JSON object");
  static const std::set<std::string> experiments = {
      "stft", "wavefront", "flow", "propagate",
      "gabor-matrix", "dyson", "verify-suite"};
  const json& exp_j = want(raw, "experiment", "config");
  if (!exp_j.is_string() || !experiments.count(exp_j.get<std::string>()))
    fail("\"experiment\" must be one of stft, wavefront, flow, propagate, "
         "gabor-matrix, dyson, verify-suite", "experiment");
  const std::string exp = exp_j.get<std::string>();

  static const std::map<std::string, std::set<std::string>> allowed_keys = {
      {"stft", {"grid", "signal", "window", "lattice", "emit_csv"}},
      {"wavefront", {"grid", "signal", "window", "wf"}},
      {"flow", {"hamiltonian", "t_max", "radius", "n_samples", "seed",
                "tolerances"}},
      {"propagate", {"grid", "signal", "window", "wf", "hamiltonian", "times",
                     "n_steps_per_unit", "taper_evolved", "verify",
                     "save_snapshots"}},
      {"gabor-matrix", {"grid", "window", "hamiltonian", "times", "lattice",
                        "flow", "wrong_flow", "min_s_hat", "save_matrix"}},
      {"dyson", {"grid", "signal", "coupling", "mu", "t", "n_terms",
                 "quad_points"}},
      {"verify-suite", {"checks"}},
  };
  std::set<std::string> allowed = allowed_keys.at(exp);
  allowed.insert("experiment");
  allowed.insert("output_dir");
  allowed.insert("label");
  check_keys(raw, "config", allowed);

  json out;
  out["experiment"] = exp;
  if (raw.contains("output_dir")) {
    if (!raw.at("output_dir").is_string())
      fail("\"output_dir\" must be a string", "output_dir");
    out["output_dir"] = raw.at("output_dir").get<std::string>();
  } else {
    out["output_dir"] = "";
  }
  if (raw.contains("label")) {
    if (!raw.at("label").is_string()) fail("\"label\" must be a string", "label");
    out["label"] = raw.at("label").get<std::string>();
  } else {
    out["label"] = "";
  }

  json body;
  if (exp == "stft") body = normalize_stft(raw);
  else if (exp == "wavefront") body = normalize_wavefront(raw);
  else if (exp == "flow") body = normalize_flow(raw);
  else if (exp == "propagate") body = normalize_propagate(raw);
  else if (exp == "gabor-matrix") body = normalize_gabor_matrix(raw);
  else if (exp == "dyson") body = normalize_dyson(raw);
  else body = normalize_verify_suite(raw);
  for (auto it = body.begin(); it != body.end(); ++it) out[it.key()] = *it;
  return out;
}

namespace {

int line_of(const std::string& text, std::size_t pos) {
  int line = 1;
  for (std::size_t i = 0; i < pos && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

int line_of_token(const std::string& text, const std::string& token) {
  if (token.empty()) return 1;
  std::size_t pos = text.find("\"" + token + "\"");
  if (pos == std::string::npos) pos = text.find(token);
  if (pos == std::string::npos) return 1;
  return line_of(text, pos);
}

}  // namespace

int run(const RunOptions& opts) {
  std::string raw_text;
  {
    std::ifstream in(opts.config_path, std::ios::binary);
    if (!in) {
      std::fprintf(stderr, "%s:1: cannot read config\n",
                   opts.config_path.c_str());
      return 2;
    }
    raw_text.assign(std::istreambuf_iterator<char>(in),
                    std::istreambuf_iterator<char>());
  }

  json raw;
  try {
    raw = json::parse(raw_text);
  } catch (const json::parse_error& e) {
    std::fprintf(stderr, "%s:%d: %s\n", opts.config_path.c_str(),
                 line_of(raw_text, e.byte), e.what());
    return 2;
  }

  json cfg;
  try {
    cfg = normalize_config(raw);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "%s:%d: %s\n", opts.config_path.c_str(),
                 line_of_token(raw_text, e.token), e.what());
    return 2;
  }
  if (opts.seed >= 0 && cfg.at("experiment") == "flow") cfg["seed"] = opts.seed;

  std::string outdir = opts.output_dir;
  if (outdir.empty()) outdir = cfg.at("output_dir").get<std::string>();
  if (outdir.empty()) {
    const char* env = std::getenv("TOOL_OUTPUT_DIR");
    if (env != nullptr) outdir = env;
  }
  if (outdir.empty()) outdir = "out";

  RunContext ctx;
  ctx.outdir = outdir;
  std::error_code ec;
  fs::create_directories(ctx.outdir, ec);
  if (ec) {
    std::fprintf(stderr, "%s:1: cannot create output dir %s\n",
                 opts.config_path.c_str(), outdir.c_str());
    return 2;
  }
  ctx.write_json("normalized_config.json", cfg);

  const std::string exp = cfg.at("experiment").get<std::string>();
  bool ok;
  try {
    if (exp == "stft") ok = run_stft_exp(cfg, ctx);
    else if (exp == "wavefront") ok = run_wavefront_exp(cfg, ctx);
    else if (exp == "flow") ok = run_flow_exp(cfg, ctx);
    else if (exp == "propagate") ok = run_propagate_exp(cfg, ctx);
    else if (exp == "gabor-matrix") ok = run_gabor_matrix_exp(cfg, ctx);
    else if (exp == "dyson") ok = run_dyson_exp(cfg, ctx);
    else ok = run_verify_suite_exp(cfg, ctx);
  } catch (const std::exception& e) {
    ctx.checks.push_back(json{{"name", exp + "-error"}, {"pass", false}});
    std::fprintf(stderr, "check failed: %s: %s\n", exp.c_str(), e.what());
    ok = false;
  }

  json manifest;
  manifest["tool"] = kToolName;
  manifest["version"] = kToolVersion;
  manifest["experiment"] = exp;
  manifest["config_hash"] = fm("fnv1a64:%016llx",
                               static_cast<unsigned long long>(fnv1a64(raw_text)));
  if (exp == "flow") manifest["seed"] = cfg.at("seed").get<long>();
  std::sort(ctx.artifacts.begin(), ctx.artifacts.end());
  manifest["artifacts"] = ctx.artifacts;
  manifest["checks"] = ctx.checks;
  {
    std::ofstream out(ctx.outdir / "manifest.json", std::ios::trunc);
    out << dump_json(manifest);
  }
  std::printf("manifest: %s\n", (ctx.outdir / "manifest.json").string().c_str());

  if (!ok) {
    std::string failed;
    for (const auto& c : ctx.checks)
      if (!c.at("pass").get<bool>())
        failed += (failed.empty() ? "" : ", ") + c.at("name").get<std::string>();
    std::fprintf(stderr, "failed checks: %s\n", failed.c_str());
    return 1;
  }
  return 0;
}

}  // namespace gwf::cli

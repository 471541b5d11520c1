#include "gwf/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

#include "gwf/core.hpp"
#include "gwf/flow.hpp"
#include "gwf/gabormatrix.hpp"
#include "gwf/modspace.hpp"
#include "gwf/propagator.hpp"
#include "gwf/serialize.hpp"
#include "gwf/stft.hpp"
#include "gwf/wavefront.hpp"

namespace gwf {
namespace {

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

std::string fm(const char* format, ...) {
  char buf[768];
  va_list ap;
  va_start(ap, format);
  std::vsnprintf(buf, sizeof buf, format, ap);
  va_end(ap);
  return buf;
}

RVec arange_inclusive(double lo, double hi, double step) {
  const int count = static_cast<int>(std::lround((hi - lo) / step)) + 1;
  RVec v(count);
  for (int i = 0; i < count; ++i) v[i] = lo + i * step;
  return v;
}

std::vector<PhasePoint> square_lattice(const RVec& vals) {
  std::vector<PhasePoint> pts;
  pts.reserve(static_cast<size_t>(vals.size()) * vals.size());
  for (int i = 0; i < vals.size(); ++i)
    for (int j = 0; j < vals.size(); ++j)
      pts.push_back(PhasePoint{vals[i], vals[j]});
  return pts;
}

// |V_g(e^{i pi c x^2})|(x, xi) for the unnormalized Gaussian window.
double chirp_modulus(double c, double x, double xi) {
  const double d = xi - c * x;
  return std::pow(1.0 + c * c, -0.25) * std::exp(-kPi * d * d / (1.0 + c * c));
}

CheckResult check_chirp_stft() {
  Stopwatch sw;
  CheckResult r;
  r.name = "chirp-stft-closed-form";
  r.threshold = 1e-6;
  const GridSpec grid = make_grid(2048, 64.0);
  const Window g = make_gaussian_window(grid);
  TFLattice lat;
  lat.x_points = arange_inclusive(-4.0, 4.0, 0.25);
  lat.xi_points = arange_inclusive(-8.0, 8.0, 0.25);
  double worst = 0.0;
  for (double c : {1.0, -2.0}) {
    const TFArray F = stft(make_chirp(grid, c), g, lat);
    for (int i = 0; i < lat.x_points.size(); ++i)
      for (int j = 0; j < lat.xi_points.size(); ++j) {
        const double err = std::abs(
            std::abs(F.values(i, j)) -
            chirp_modulus(c, lat.x_points[i], lat.xi_points[j]));
        worst = std::max(worst, err);
      }
  }
  const double secs = sw.seconds();
  r.measured = worst;
  r.pass = worst <= r.threshold && secs < 5.0;
  r.detail = fm("sup err %.3e over c in {1,-2} on 33x65 lattice; budget 5 s",
                worst);
  return r;
}

CheckResult check_ho_gabor() {
  Stopwatch sw;
  CheckResult r;
  r.name = "oscillator-gabor-envelope";
  r.threshold = 5e-3;
  const GridSpec grid = make_grid(1024, 32.0);
  const Window g = make_gaussian_window(grid);
  const RVec vals = arange_inclusive(-6.0, 6.0, 0.5);
  const auto w_pts = square_lattice(vals);
  const int nw = static_cast<int>(w_pts.size());

  CMat states(grid.n_points, nw);
  for (int i = 0; i < nw; ++i)
    states.col(i) = tf_shift(g.signal, w_pts[i]).values;
  const EvolutionSpec spec = make_ho_spec(2.5, 5000);
  auto snaps =
      evolve_split_step_snapshots(grid, states, spec, {600, 2000, 5000});

  const std::pair<long, double> marks[] = {{600, 0.3}, {2000, 1.0}, {5000, 2.5}};
  double worst = 0.0;
  std::string per_t;
  for (const auto& [step, t] : marks) {
    const CMat& evolved = snaps.at(step);
    TimeEvolution frozen{"precomputed",
                         [&evolved](const CMat&, double) { return evolved; },
                         nullptr};
    const auto K = sample_gabor_matrix(grid, frozen, g, w_pts, vals, vals, t);
    const FlowMap chi = make_ho_flow(t);
    double err_t = 0.0;
    for (int wi = 0; wi < nw; ++wi) {
      const PhasePoint cw = flow_apply(chi, w_pts[wi]);
      for (int ix = 0; ix < vals.size(); ++ix)
        for (int k = 0; k < vals.size(); ++k) {
          const double ddx = vals[ix] - cw.x, ddxi = vals[k] - cw.xi;
          const double closed =
              std::exp(-0.5 * kPi * (ddx * ddx + ddxi * ddxi)) / std::sqrt(2.0);
          const double got =
              std::abs(K.values(wi, ix * vals.size() + k));
          err_t = std::max(err_t, std::abs(got - closed));
        }
    }
    per_t += fm(" t=%.1f:%.2e", t, err_t);
    worst = std::max(worst, err_t);
  }
  const double secs = sw.seconds();
  r.measured = worst;
  r.pass = worst <= r.threshold && secs < 60.0;
  r.detail = fm("sup err vs 2^{-1/2}e^{-(pi/2)|z-chi_t(w)|^2}:%s; %.1f s "
                "(budget 60 s)",
                per_t.c_str(), secs);
  return r;
}

CheckResult check_perturbed_envelope() {
  CheckResult r;
  r.name = "perturbed-envelope-falsification";
  r.threshold = 2.0;  // minimum admissible s_hat
  const GridSpec grid = make_grid(1024, 32.0);
  const Window g = make_gaussian_window(grid);
  const RVec vals = arange_inclusive(-6.0, 6.0, 0.5);
  const auto w_pts = square_lattice(vals);
  const TimeEvolution U =
      spectral_evolution(get_cached_perturbed_propagator(grid, 1.0));

  bool all = true;
  double min_s = std::numeric_limits<double>::infinity();
  std::string detail;
  for (double t : {0.5, 1.0}) {
    const auto K = sample_gabor_matrix(grid, U, g, w_pts, vals, vals, t);
    const auto rep =
        wrongflow_falsification(K, make_ho_flow(t), make_free_flow(t));
    const bool ok = rep.true_fit.violations == 0 && rep.true_fit.s_hat >= 2.0 &&
                    rep.drop >= 1.0 && rep.falsified;
    all = all && ok;
    min_s = std::min(min_s, rep.true_fit.s_hat);
    detail += fm(" t=%.1f: s_hat=%.3f C_hat=%.3e viol=%d wrong=%.3f drop=%.2f;",
                 t, rep.true_fit.s_hat, rep.true_fit.C_hat,
                 rep.true_fit.violations, rep.wrong_fit.s_hat, rep.drop);
  }
  r.measured = min_s;
  r.pass = all;
  r.detail = "V = pi x^2 + |sin x|^3:" + detail;
  return r;
}

CheckResult check_wavefront_propagation() {
  CheckResult r;
  r.name = "wavefront-propagation";
  r.threshold = 2.0;  // bins
  const WFParams prm;
  const double db = kTwoPi / prm.n_bins;
  double worst_bins = 0.0;
  bool all = true;
  std::string detail;
  auto record = [&](const char* tag, double t, const WFEstimate& est0,
                    const WFEstimate& estT, const FlowMap& chi) {
    const WFEstimate mapped = map_wf(est0, chi);
    const double d = wf_distance(estT, mapped);
    const bool ok = d <= 2.0 * db + 1e-9;
    all = all && ok;
    worst_bins = std::max(worst_bins, d / db);
    detail += fm(" %s t=%.1f: %.3f bins;", tag, t, d / db);
  };

  {  // free particle + delta, exact evolution, tapered before estimation
    const GridSpec grid = make_grid(131072, 1024.0);
    const Window g = make_gaussian_window(grid);
    const SampledSignal u0 = make_delta(grid);
    const WFEstimate est0 = estimate_wf(u0, g, prm);
    for (double t : {0.5, 1.0}) {
      const SampledSignal ut = apply_taper(evolve_exact_free(u0, t));
      record("free+delta", t, est0, estimate_wf(ut, g, prm),
             make_free_flow(t));
    }
  }
  {  // harmonic oscillator + tapered constant
    const GridSpec grid = make_grid(16384, 128.0);
    const Window g = make_gaussian_window(grid);
    const SampledSignal u0 = apply_taper(make_constant(grid));
    const WFEstimate est0 = estimate_wf(u0, g, prm);
    auto snaps = evolve_split_step_snapshots(grid, u0.values, make_ho_spec(1.0, 2000),
                                             {1000, 2000});
    for (const auto& [step, t] :
         {std::pair<long, double>{1000, 0.5}, {2000, 1.0}}) {
      const SampledSignal ut{grid, snaps.at(step).col(0), "evolved"};
      record("ho+const", t, est0, estimate_wf(ut, g, prm), make_ho_flow(t));
    }
  }
  {  // perturbed oscillator + gaussian chirp; smooth part drives the flow
    const GridSpec grid = make_grid(16384, 128.0);
    const Window g = make_gaussian_window(grid);
    const SampledSignal u0 = make_gaussian_chirp(grid, 3.0, 10.0);
    const WFEstimate est0 = estimate_wf(u0, g, prm);
    auto snaps = evolve_split_step_snapshots(
        grid, u0.values, make_perturbed_ho_spec(1.0, 2000, 1.0), {1000, 2000});
    for (const auto& [step, t] :
         {std::pair<long, double>{1000, 0.5}, {2000, 1.0}}) {
      const SampledSignal ut{grid, snaps.at(step).col(0), "evolved"};
      record("perturbed+chirp", t, est0, estimate_wf(ut, g, prm),
             make_ho_flow(t));
    }
  }
  r.measured = worst_bins;
  r.pass = all;
  r.detail = "Hausdorff(estimated WF(u_t), chi_t(WF(u_0))):" + detail;
  return r;
}

CheckResult check_sin_cubed_decay() {
  CheckResult r;
  r.name = "sin-cubed-symbol-decay";
  r.threshold = 4.5;  // admissible band [3.5, 4.5]
  const SymbolSampler sym = make_sin_mu_symbol(3.0);
  const SymbolSupParams params;
  const auto scan = symbol_stft_sup(sym, params);
  const DecayFit fit = fit_decay(scan.radii, scan.values, 2, 6);
  r.measured = fit.exponent_hat;
  r.pass = fit.exponent_hat >= 3.5 && fit.exponent_hat <= 4.5;
  std::string shells;
  for (int m = 0; m < fit.shell_max.size(); ++m)
    shells += fm(" %.3e", fit.shell_max[m]);
  r.detail = fm("fitted exponent %.3f (band [3.5,4.5]), C_hat %.3e, shells "
                "[4,128):%s",
                fit.exponent_hat, fit.constant_hat, shells.c_str());
  return r;
}

CheckResult check_flow_algebra() {
  CheckResult r;
  r.name = "flow-algebra";
  r.threshold = 1.0;  // max over sub-checks of measured / tolerance
  std::mt19937_64 rng(7);
  auto uni = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  const HamiltonianSpec ho = make_ho_hamiltonian();
  const HamiltonianSpec quartic = make_quartic_hamiltonian();

  double dev_closed = 0.0;
  for (int i = 0; i < 40; ++i) {
    RVec w(2);
    w << uni(-10, 10), uni(-10, 10);
    const double t = uni(-3, 3);
    const RVec num = flow_apply(make_numeric_flow(ho, t), w);
    const RVec cls = flow_apply(make_ho_flow(t), w);
    dev_closed = std::max(dev_closed, (num - cls).cwiseAbs().maxCoeff());
  }

  double dev_group = 0.0;
  for (int i = 0; i < 20; ++i) {
    RVec w(2);
    w << uni(-8, 8), uni(-8, 8);
    const double t1 = uni(-2.5, 2.5), t2 = uni(-2.5, 2.5);
    dev_group = std::max(
        dev_group, group_law_check(ho, t1, t2, {w}).max_deviation);
  }

  double dev_sympl = 0.0;
  for (int i = 0; i < 20; ++i) {
    RVec w(2);
    w << uni(-10, 10), uni(-10, 10);
    const double t = uni(-3, 3);
    dev_sympl = std::max(
        dev_sympl,
        symplectic_defect(flow_jacobian(make_numeric_flow(ho, t), w)));
  }
  double dev_sympl_q = 0.0;
  for (int i = 0; i < 12; ++i) {
    RVec w(2);
    w << uni(5, 12) * (uni(0, 1) < 0.5 ? -1 : 1),
        uni(5, 12) * (uni(0, 1) < 0.5 ? -1 : 1);
    const double t = uni(-1, 1);
    dev_sympl_q = std::max(
        dev_sympl_q,
        symplectic_defect(flow_jacobian(make_numeric_flow(quartic, t), w)));
  }

  double dev_homog = 0.0;
  RVec radii(2);
  radii << 8.0, 10.0;
  for (int i = 0; i < 8; ++i) {
    const double t = uni(-0.5, 0.5), th = uni(0, kTwoPi);
    RVec dir(2);
    dir << std::cos(th), std::sin(th);
    dev_homog = std::max(
        dev_homog,
        homogeneity_check(make_numeric_flow(quartic, t), radii, {dir})
            .max_deviation);
  }

  double dev_energy = 0.0;
  for (int i = 0; i < 10; ++i) {
    RVec w(2);
    w << uni(-8, 8), uni(-8, 8);
    const double t = uni(-1, 1);
    const RVec z = flow_apply(make_numeric_flow(quartic, t), w);
    const double aw = quartic.eval(w);
    dev_energy = std::max(dev_energy,
                          std::abs(quartic.eval(z) - aw) / (1.0 + std::abs(aw)));
  }

  const double ratios[] = {dev_closed / 1e-8,  dev_group / 1e-7,
                           dev_sympl / 1e-6,   dev_sympl_q / 1e-6,
                           dev_homog / 1e-6,   dev_energy / 1e-6};
  double worst = 0.0;
  for (double q : ratios) worst = std::max(worst, q);
  r.measured = worst;
  r.pass = worst <= 1.0;
  r.detail = fm("closed-form dev %.2e (tol 1e-8); group law %.2e (1e-7); "
                "symplecticity ho %.2e quartic %.2e (1e-6); homogeneity %.2e "
                "(1e-6); energy %.2e (1e-6)",
                dev_closed, dev_group, dev_sympl, dev_sympl_q, dev_homog,
                dev_energy);
  return r;
}

CheckResult check_dyson() {
  CheckResult r;
  r.name = "dyson-consistency";
  const double t = 0.2, bmax = 0.1;
  r.threshold = 10.0 * std::pow(t * bmax, 4) / 24.0;
  const GridSpec grid = make_grid(1024, 32.0);
  const TimeEvolution A = spectral_evolution(get_cached_ho_propagator(grid));
  const OperatorHandle B = multiplication_operator(grid, [](double x) {
    return cd(0.1 * std::pow(std::abs(std::sin(x)), 3.0), 0.0);
  });
  SampledSignal u0 = tf_shift(make_ho_ground_state(grid), {50.0 / 32.0, 0.0});
  u0.values /= l2_norm(u0);

  const DysonResult res = dyson_phillips_apply(u0, t, A, B, DysonSpec{3, 256});
  const SampledSignal ref =
      evolve_split_step(u0, make_perturbed_ho_spec(t, 40000, 0.1));
  const double err =
      std::sqrt(grid.dx()) * (res.u.values - ref.values).norm();

  bool ratios_ok = true;
  std::string ratio_txt;
  for (int n = 1; n <= 3; ++n) {
    const double ratio = res.term_norms[n] / res.term_norms[n - 1];
    const double factor = ratio / (t * bmax / n);
    ratios_ok = ratios_ok && factor >= 1.0 / 3.0 && factor <= 3.0;
    ratio_txt += fm(" %.3f", factor);
  }
  r.measured = err;
  r.pass = err <= r.threshold && ratios_ok;
  r.detail = fm("||Q_3 u0 - reference|| = %.3e (tol %.3e); term norms "
                "%.2e/%.2e/%.2e/%.2e; ratio-vs-t^n/n! factors%s (band "
                "[1/3,3])",
                err, r.threshold, res.term_norms[0], res.term_norms[1],
                res.term_norms[2], res.term_norms[3], ratio_txt.c_str());
  return r;
}

CheckResult check_inversion_unitarity() {
  CheckResult r;
  r.name = "inversion-unitarity";
  r.threshold = 1.0;  // max over sub-checks of measured / tolerance

  // STFT inversion on a dense random signal
  double stft_inv;
  {
    const GridSpec gs = make_grid(256, 16.0);
    const Window G = make_gaussian_window(gs);
    std::mt19937_64 rng(0);
    std::normal_distribution<double> nd;
    SampledSignal f{gs, CVec(gs.n_points), "random"};
    for (int i = 0; i < gs.n_points; ++i) f.values[i] = cd(nd(rng), nd(rng));
    const TFArray V = stft(f, G, full_lattice(gs));
    SampledSignal rec = stft_adjoint(V, G);
    rec.values /= G.l2_norm * G.l2_norm;
    stft_inv = (rec.values - f.values).norm() / f.values.norm();
  }

  const GridSpec grid = make_grid(1024, 32.0);
  const SampledSignal u0 = make_ho_ground_state(grid);
  const SampledSignal gw = make_gaussian_window(grid).signal;
  SampledSignal mix{grid, u0.values, "coherent-mix"};
  mix.values += tf_shift(gw, {1.0, 1.0}).values;
  mix.values += tf_shift(gw, {-2.0, 0.5}).values;
  const double mix_norm = l2_norm(mix);

  const SampledSignal uf = evolve_split_step(mix, make_ho_spec(0.7, 1400));
  const SampledSignal ub = evolve_split_step(uf, make_ho_spec(-0.7, 1400));
  const double split_inv =
      std::sqrt(grid.dx()) * (ub.values - mix.values).norm() / mix_norm;

  const SampledSignal u5 = evolve_split_step(mix, make_ho_spec(5.0, 10000));
  const double drift = std::abs(l2_norm(u5) - mix_norm) / 5.0;

  const SampledSignal ut = evolve_split_step(u0, make_ho_spec(1.0, 2000));
  const cd ph = inner(ut, u0) / inner(u0, u0);
  const double phase_err = std::abs(std::arg(ph) - 0.5);

  const SampledSignal u2 =
      evolve_split_step(mix, make_ho_spec(kTwoPi, 6284));
  const double period_err =
      std::sqrt(grid.dx()) * (u2.values + mix.values).norm() / mix_norm;

  const double ratios[] = {stft_inv / 1e-9, split_inv / 1e-9, drift / 1e-8,
                           phase_err / 1e-4, period_err / 1e-3};
  double worst = 0.0;
  for (double q : ratios) worst = std::max(worst, q);
  r.measured = worst;
  r.pass = worst <= 1.0;
  r.detail = fm("stft inversion %.2e (tol 1e-9); split-step inversion %.2e "
                "(1e-9); norm drift/unit-t %.2e (1e-8); gs phase err %.2e "
                "(1e-4); U(2pi)+Id %.2e (1e-3)",
                stft_inv, split_inv, drift, phase_err, period_err);
  return r;
}

CheckResult check_window_independence() {
  CheckResult r;
  r.name = "window-independence";
  r.threshold = 1.0;  // bins
  const GridSpec grid = make_grid(16384, 128.0);
  const Window gw = make_gaussian_window(grid, true);
  const Window hw = make_hermite_window(grid);
  const WFParams prm;
  const double db = kTwoPi / prm.n_bins;

  struct Case {
    const char* tag;
    SampledSignal sig;
  };
  const Case cases[] = {
      {"delta", make_delta(grid)},
      {"plane(2)", apply_taper(make_plane_wave(grid, 2.0))},
      {"chirp(1)", apply_taper(make_chirp(grid, 1.0))},
      {"chirp(-2)", apply_taper(make_chirp(grid, -2.0))},
  };
  double worst = 0.0;
  bool all = true;
  std::string detail;
  for (const auto& c : cases) {
    const WFEstimate eg = estimate_wf(c.sig, gw, prm);
    const WFEstimate eh = estimate_wf(c.sig, hw, prm);
    const double d = wf_distance(eg, eh);
    all = all && d <= db + 1e-9;
    worst = std::max(worst, d / db);
    detail += fm(" %s: %.2f bins;", c.tag, d / db);
  }
  r.measured = worst;
  r.pass = all;
  r.detail = "gaussian vs first-hermite window WF distance:" + detail;
  return r;
}

void write_report(const std::string& dir, const CheckResult& r) {
  if (dir.empty()) return;
  nlohmann::json j;
  j["name"] = r.name;
  j["pass"] = r.pass;
  j["measured"] = json_real(r.measured);
  j["threshold"] = json_real(r.threshold);
  j["detail"] = r.detail;
  std::ofstream out(dir + "/" + r.name + ".json", std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write report in " + dir);
  out << dump_json(j);
}

}  // namespace

const std::vector<std::string>& acceptance_check_names() {
  static const std::vector<std::string> names = {
      "chirp-stft-closed-form",  "oscillator-gabor-envelope",
      "perturbed-envelope-falsification", "wavefront-propagation",
      "sin-cubed-symbol-decay",  "flow-algebra",
      "dyson-consistency",       "inversion-unitarity",
      "window-independence"};
  return names;
}

CheckResult run_acceptance_check(const std::string& name,
                                 const std::string& artifacts_dir) {
  Stopwatch sw;
  CheckResult r;
  if (name == "chirp-stft-closed-form") r = check_chirp_stft();
  else if (name == "oscillator-gabor-envelope") r = check_ho_gabor();
  else if (name == "perturbed-envelope-falsification")
    r = check_perturbed_envelope();
  else if (name == "wavefront-propagation") r = check_wavefront_propagation();
  else if (name == "sin-cubed-symbol-decay") r = check_sin_cubed_decay();
  else if (name == "flow-algebra") r = check_flow_algebra();
  else if (name == "dyson-consistency") r = check_dyson();
  else if (name == "inversion-unitarity") r = check_inversion_unitarity();
  else if (name == "window-independence") r = check_window_independence();
  else
    throw std::invalid_argument("unknown acceptance check: " + name);
  r.seconds = sw.seconds();
  write_report(artifacts_dir, r);
  return r;
}

}  // namespace gwf

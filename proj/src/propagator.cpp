#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>

#include "gwf/propagator.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <tuple>

#include "gwf/fft.hpp"

namespace gwf {

namespace {

constexpr int kColumnBlock = 64;  // split-step block stays inside L2

RVec plain_freqs(const GridSpec& grid) {
  RVec xi(grid.n_points);
  for (int k = 0; k < grid.n_points; ++k)
    xi(k) = (k < grid.n_points / 2 ? k : k - grid.n_points) * grid.dxi();
  return xi;
}

void validate_split_spec(const GridSpec& grid, const EvolutionSpec& spec,
                         CVec& phK_over_n, CVec& phVh, CVec& phV) {
  if (!spec.kinetic_multiplier || !spec.potential)
    throw std::invalid_argument("split-step: spec needs multiplier and potential");
  if (spec.has_pseudo_perturbation)
    throw std::invalid_argument(
        "split-step: pseudodifferential perturbations need the Dyson path");
  const long floor_steps =
      std::max<long>(1, std::lround(std::ceil(std::abs(spec.t) * 200.0)));
  if (spec.n_steps < floor_steps)
    throw std::invalid_argument(
        "split-step: n_steps below the 200-steps-per-unit-time floor");

  const int n = grid.n_points;
  const double dt = spec.t / spec.n_steps;
  RVec xi = plain_freqs(grid);
  phK_over_n.resize(n);
  for (int k = 0; k < n; ++k)
    phK_over_n(k) =
        std::polar(1.0 / n, dt * spec.kinetic_multiplier(xi(k)));
  phVh.resize(n);
  phV.resize(n);
  for (int i = 0; i < n; ++i) {
    cd v = spec.potential(grid.x(i));
    if (v.imag() != 0.0)
      throw std::invalid_argument(
          "split-step: complex potential requires the Dyson path");
    phVh(i) = std::polar(1.0, 0.5 * dt * v.real());
    phV(i) = phVh(i) * phVh(i);
  }
}

}  // namespace

EvolutionSpec make_ho_spec(double t, int n_steps) {
  EvolutionSpec s;
  s.kinetic_multiplier = [](double xi) { return kPi * xi * xi; };
  s.potential = [](double x) { return cd(kPi * x * x, 0.0); };
  s.t = t;
  s.n_steps = n_steps;
  return s;
}

EvolutionSpec make_perturbed_ho_spec(double t, int n_steps, double coupling,
                                     double mu) {
  EvolutionSpec s = make_ho_spec(t, n_steps);
  s.potential = [coupling, mu](double x) {
    return cd(kPi * x * x +
                  coupling * std::pow(std::abs(std::sin(x)), mu),
              0.0);
  };
  return s;
}

SampledSignal evolve_exact_free(const SampledSignal& u0, double t) {
  SampledSignal F = fourier(u0);
  for (int k = 0; k < F.grid.n_points; ++k) {
    double xi = F.grid.xi(k);
    F.values(k) *= std::polar(1.0, -4.0 * kPi * kPi * t * xi * xi);
  }
  return inverse_fourier(F);
}

std::map<long, CMat> evolve_split_step_snapshots(
    const GridSpec& grid, const CMat& u0, const EvolutionSpec& spec,
    const std::vector<long>& snapshot_steps) {
  if (u0.rows() != grid.n_points)
    throw std::invalid_argument("split-step: batch row count != grid size");
  CVec phK_over_n, phVh, phV;
  validate_split_spec(grid, spec, phK_over_n, phVh, phV);
  for (long s : snapshot_steps)
    if (s < 1 || s > spec.n_steps)
      throw std::invalid_argument("split-step: snapshot step out of range");

  const int n = grid.n_points;
  const int cols = static_cast<int>(u0.cols());
  std::map<long, CMat> out;
  for (long s : snapshot_steps) out[s] = CMat(n, cols);

  CMat state = u0;
  for (int j0 = 0; j0 < cols; j0 += kColumnBlock) {
    const int b = std::min(kColumnBlock, cols - j0);
    auto blk = state.middleCols(j0, b);
    blk.array().colwise() *= phVh.array();  // enter the first Strang half
    for (long s = 1; s <= spec.n_steps; ++s) {
      fft::dft_raw(blk.data(), n, b, fft::kForward);
      blk.array().colwise() *= phK_over_n.array();
      fft::dft_raw(blk.data(), n, b, fft::kBackward);
      if (s == spec.n_steps) {
        blk.array().colwise() *= phVh.array();
        if (auto it = out.find(s); it != out.end())
          it->second.middleCols(j0, b) = blk;
      } else {
        if (auto it = out.find(s); it != out.end())
          it->second.middleCols(j0, b) =
              (blk.array().colwise() * phVh.array()).matrix();
        blk.array().colwise() *= phV.array();  // merged half steps
      }
    }
  }
  if (snapshot_steps.empty()) out[spec.n_steps] = std::move(state);
  return out;
}

CMat evolve_split_step_batch(const GridSpec& grid, const CMat& u0,
                             const EvolutionSpec& spec) {
  auto out = evolve_split_step_snapshots(grid, u0, spec, {});
  return std::move(out.at(spec.n_steps));
}

SampledSignal evolve_split_step(const SampledSignal& u0,
                                const EvolutionSpec& spec) {
  CMat batch = evolve_split_step_batch(u0.grid, u0.values, spec);
  return SampledSignal{u0.grid, CVec(batch.col(0)), u0.label};
}

SampledSignal evolve_translation_potential(const SampledSignal& u0, double t,
                                           double x0) {
  const GridSpec& grid = u0.grid;
  int m = snap_index(grid, x0);
  if (std::abs(x0 - m * grid.dx()) > 1e-9 * std::max(1.0, std::abs(x0)))
    throw std::invalid_argument("translation potential: x0 must be on-grid");
  SampledSignal F = fourier(u0);
  for (int k = 0; k < grid.n_points; ++k) {
    double xi = grid.xi(k);
    F.values(k) *= std::exp(cd(0.0, t) * std::polar(1.0, -kTwoPi * x0 * xi));
  }
  return inverse_fourier(F);
}

SpectralPropagator::SpectralPropagator(
    const GridSpec& grid, const std::function<double(double)>& m_of_xi,
    const std::function<double(double)>& v_of_x)
    : grid_(grid) {
  const int n = grid.n_points;
  RVec sgn(n);
  for (int i = 0; i < n; ++i) sgn(i) = (i & 1) ? -1.0 : 1.0;
  const double extra = ((n / 2) % 2 == 1) ? -1.0 : 1.0;
  const double c = extra / std::sqrt(static_cast<double>(n));

  // centered unitary DFT U_F applied to the identity, columnwise
  CMat H = CMat::Zero(n, n);
  for (int j = 0; j < n; ++j) H(j, j) = sgn(j);
  fft::dft_columns_inplace(H, fft::kForward);
  for (int i = 0; i < n; ++i) H.row(i) *= c * sgn(i) * m_of_xi(grid.xi(i));
  // apply U_F^H = U_F^{-1} to the scaled transform, again by FFT
  for (int i = 0; i < n; ++i) H.row(i) *= sgn(i);
  fft::dft_columns_inplace(H, fft::kBackward);
  for (int i = 0; i < n; ++i) H.row(i) *= c * sgn(i);
  for (int i = 0; i < n; ++i) H(i, i) += v_of_x(grid.x(i));
  H = (0.5 * (H + H.adjoint())).eval();

  lam_.resize(n);
  int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n, H.data(), n,
                            lam_.data());
  if (info != 0)
    throw std::runtime_error("spectral propagator: eigensolver failed");
  eigvecs_ = std::move(H);
}

CVec SpectralPropagator::apply(const CVec& u, double t) const {
  CVec coef = eigvecs_.adjoint() * u;
  for (int i = 0; i < coef.size(); ++i)
    coef(i) *= std::polar(1.0, t * lam_(i));
  return eigvecs_ * coef;
}

CMat SpectralPropagator::apply_batch(const CMat& u, double t) const {
  CMat coef = eigvecs_.adjoint() * u;
  for (int i = 0; i < coef.rows(); ++i)
    coef.row(i) *= std::polar(1.0, t * lam_(i));
  return eigvecs_ * coef;
}

CMat SpectralPropagator::apply_at_times(const CMat& u, const RVec& times) const {
  if (times.size() != u.cols())
    throw std::invalid_argument("apply_at_times: one time per column required");
  CMat coef = eigvecs_.adjoint() * u;
  for (int j = 0; j < coef.cols(); ++j)
    for (int i = 0; i < coef.rows(); ++i)
      coef(i, j) *= std::polar(1.0, times(j) * lam_(i));
  return eigvecs_ * coef;
}

namespace {

std::mutex g_prop_mutex;

}  // namespace

std::shared_ptr<const SpectralPropagator> get_cached_ho_propagator(
    const GridSpec& grid) {
  static std::map<std::pair<int, double>,
                  std::shared_ptr<const SpectralPropagator>>
      cache;
  std::lock_guard<std::mutex> lock(g_prop_mutex);
  auto key = std::make_pair(grid.n_points, grid.extent);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto p = std::make_shared<const SpectralPropagator>(
      grid, [](double xi) { return kPi * xi * xi; },
      [](double x) { return kPi * x * x; });
  cache.emplace(key, p);
  return p;
}

std::shared_ptr<const SpectralPropagator> get_cached_perturbed_propagator(
    const GridSpec& grid, double coupling) {
  static std::map<std::tuple<int, double, double>,
                  std::shared_ptr<const SpectralPropagator>>
      cache;
  std::lock_guard<std::mutex> lock(g_prop_mutex);
  auto key = std::make_tuple(grid.n_points, grid.extent, coupling);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto p = std::make_shared<const SpectralPropagator>(
      grid, [](double xi) { return kPi * xi * xi; },
      [coupling](double x) {
        double s = std::abs(std::sin(x));
        return kPi * x * x + coupling * s * s * s;
      });
  cache.emplace(key, p);
  return p;
}

TimeEvolution free_evolution(const GridSpec& grid) {
  RVec xi = plain_freqs(grid);
  const int n = grid.n_points;
  TimeEvolution ev;
  ev.label = "free";
  ev.apply = [grid, xi, n](const CMat& u, double t) {
    CMat work = u;
    fft::dft_columns_inplace(work, fft::kForward);
    CVec ph(n);
    for (int k = 0; k < n; ++k)
      ph(k) = std::polar(1.0 / n, -4.0 * kPi * kPi * t * xi(k) * xi(k));
    work.array().colwise() *= ph.array();
    fft::dft_columns_inplace(work, fft::kBackward);
    return work;
  };
  ev.apply_at_times = [grid, xi, n](const CMat& u, const RVec& times) {
    if (times.size() != u.cols())
      throw std::invalid_argument("apply_at_times: one time per column required");
    CMat work = u;
    fft::dft_columns_inplace(work, fft::kForward);
    for (int j = 0; j < work.cols(); ++j)
      for (int k = 0; k < n; ++k)
        work(k, j) *=
            std::polar(1.0 / n, -4.0 * kPi * kPi * times(j) * xi(k) * xi(k));
    fft::dft_columns_inplace(work, fft::kBackward);
    return work;
  };
  return ev;
}

TimeEvolution spectral_evolution(std::shared_ptr<const SpectralPropagator> p) {
  TimeEvolution ev;
  ev.label = "spectral";
  ev.apply = [p](const CMat& u, double t) { return p->apply_batch(u, t); };
  ev.apply_at_times = [p](const CMat& u, const RVec& times) {
    return p->apply_at_times(u, times);
  };
  return ev;
}

TimeEvolution identity_evolution() {
  TimeEvolution ev;
  ev.label = "identity";
  ev.apply = [](const CMat& u, double) { return u; };
  ev.apply_at_times = [](const CMat& u, const RVec&) { return u; };
  return ev;
}

OperatorHandle multiplication_operator(const GridSpec& grid,
                                       const std::function<cd(double)>& b) {
  CVec samples(grid.n_points);
  for (int i = 0; i < grid.n_points; ++i) samples(i) = b(grid.x(i));
  return [samples](const CMat& u) {
    CMat out = u;
    out.array().colwise() *= samples.array();
    return out;
  };
}

OperatorHandle modulation_operator(const GridSpec& grid, double xi0) {
  return multiplication_operator(
      grid, [xi0](double x) { return std::polar(1.0, kTwoPi * xi0 * x); });
}

OperatorHandle conjugated_perturbation(const OperatorHandle& B, double s,
                                       const TimeEvolution& A) {
  return [B, s, A](const CMat& u) {
    return A.apply(B(A.apply(u, s)), -s);
  };
}

OperatorHandle conjugated_perturbation(const OperatorHandle& B, double s,
                                       EvolutionContext ctx,
                                       const GridSpec& grid) {
  TimeEvolution A = ctx == EvolutionContext::kFreeParticle
                        ? free_evolution(grid)
                        : spectral_evolution(get_cached_ho_propagator(grid));
  return conjugated_perturbation(B, s, A);
}

DysonResult dyson_phillips_apply(const SampledSignal& u0, double t,
                                 const TimeEvolution& A,
                                 const OperatorHandle& B,
                                 const DysonSpec& spec) {
  if (t < 0.0)
    throw std::invalid_argument("dyson: t must be >= 0");
  if (spec.n_terms < 0 || spec.n_terms > 4)
    throw std::invalid_argument("dyson: n_terms must lie in [0, 4]");
  if (spec.quad_points_per_level < 8)
    throw std::invalid_argument("dyson: need >= 8 quadrature points per level");

  const GridSpec& grid = u0.grid;
  const int n = grid.n_points;
  const int q = spec.quad_points_per_level;
  const double ds = t / q;
  RVec s_nodes(q + 1), neg_nodes(q + 1);
  for (int j = 0; j <= q; ++j) {
    s_nodes(j) = t * j / q;
    neg_nodes(j) = -s_nodes(j);
  }

  const double u0_norm = l2_norm(u0);
  CMat level = u0.values.replicate(1, q + 1);  // G_0(s_j) = u0
  CVec w = u0.values;                          // running sum of i^n G_n(t)
  DysonResult res;
  res.term_norms.push_back(u0_norm);

  cd coef(1.0, 0.0);
  for (int lvl = 1; lvl <= spec.n_terms; ++lvl) {
    CMat integrand =
        A.apply_at_times(B(A.apply_at_times(level, s_nodes)), neg_nodes);
    CMat next(n, q + 1);
    next.col(0).setZero();
    for (int j = 1; j <= q; ++j)
      next.col(j) = next.col(j - 1) +
                    (ds / 2.0) * (integrand.col(j) + integrand.col(j - 1));
    level = std::move(next);
    coef *= cd(0.0, 1.0);
    res.term_norms.push_back(std::sqrt(grid.dx()) * level.col(q).norm());
    w += coef * level.col(q);
  }

  CMat out = A.apply(w, t);
  res.u = SampledSignal{grid, CVec(out.col(0)), u0.label};
  res.norm_change = u0_norm > 0.0 ? l2_norm(res.u) / u0_norm - 1.0 : 0.0;
  return res;
}

}  // namespace gwf

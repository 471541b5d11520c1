#include "gwf/modspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gwf/fft.hpp"

namespace gwf {

double peetre_weight(double x, double xi) {
  return std::sqrt(1.0 + x * x + xi * xi);
}

double mod_norm(const SampledSignal& f, const Window& g, const WeightParams& w) {
  if (!(w.p >= 1.0)) throw std::invalid_argument("mod_norm: p must be >= 1");
  if (!std::isfinite(w.r)) throw std::invalid_argument("mod_norm: r must be finite");
  const GridSpec& grid = f.grid;
  TFArray V = stft(f, g, full_lattice(grid));
  if (!V.values.allFinite())
    throw std::runtime_error("mod_norm: STFT produced non-finite values");
  const int n = grid.n_points;
  if (std::isinf(w.p)) {
    double sup = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double wt = std::pow(peetre_weight(grid.x(i), grid.xi(j)), w.r);
        sup = std::max(sup, std::abs(V.values(i, j)) * wt);
      }
    return sup;
  }
  const double cell = grid.dx() * grid.dxi();
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double wt = std::pow(peetre_weight(grid.x(i), grid.xi(j)), w.r);
      acc += std::pow(std::abs(V.values(i, j)) * wt, w.p) * cell;
    }
  return std::pow(acc, 1.0 / w.p);
}

double bump_phi(double r) { return smooth_step_down(r - 1.0); }

SymbolSampler make_sin_mu_symbol(double mu) {
  if (!(mu > 1.0))
    throw std::invalid_argument("sin_mu symbol: mu must be > 1");
  SymbolSampler s;
  s.evaluator = [mu](double x, double) {
    return cd(std::pow(std::abs(std::sin(x)), mu), 0.0);
  };
  s.factor_x = [mu](double x) {
    return cd(std::pow(std::abs(std::sin(x)), mu), 0.0);
  };
  s.factor_xi = [](double) { return cd(1.0, 0.0); };
  s.period_x = kPi;
  s.smoothness_label = "sin_mu";
  return s;
}

SymbolSampler make_potential_symbol(std::function<double(double)> V,
                                    const std::string& label) {
  SymbolSampler s;
  s.evaluator = [V](double x, double) { return cd(V(x), 0.0); };
  s.factor_x = [V](double x) { return cd(V(x), 0.0); };
  s.factor_xi = [](double) { return cd(1.0, 0.0); };
  s.smoothness_label = label;
  return s;
}

SymbolSampler make_homog_cutoff_symbol() {
  SymbolSampler s;
  s.evaluator = [](double x, double xi) {
    double r2 = x * x + xi * xi;
    return cd(r2 * smooth_step_down((std::sqrt(r2) - 2.0) / 2.0), 0.0);
  };
  s.smoothness_label = "homog2_cutoff";
  return s;
}

std::pair<SymbolSampler, SymbolSampler> make_example4_split() {
  auto h = [](double x, double xi) {
    return std::sqrt(x * x * x * x + xi * xi * xi * xi);
  };
  SymbolSampler a, sigma;
  a.evaluator = [h](double x, double xi) {
    return cd((1.0 - bump_phi(std::hypot(x, xi))) * h(x, xi), 0.0);
  };
  a.smoothness_label = "example4_a";
  sigma.evaluator = [h](double x, double xi) {
    return cd(bump_phi(std::hypot(x, xi)) * h(x, xi), 0.0);
  };
  sigma.smoothness_label = "example4_sigma";
  return {a, sigma};
}

namespace {

DecayFit fit_from_shells(RVec shell_max, int m_min) {
  const int span = static_cast<int>(shell_max.size());
  DecayFit fit;
  fit.m_min = m_min;
  fit.m_max = m_min + span - 1;
  fit.shell_max = shell_max;

  if (shell_max.maxCoeff() <= 0.0)
    throw std::runtime_error("fit_decay: all shells are zero, fit undefined");
  for (int i = 0; i < span; ++i)
    if (!(shell_max(i) > 0.0))
      throw std::runtime_error("fit_decay: empty dyadic shell " +
                               std::to_string(m_min + i));

  // least squares on log2(max) vs shell index
  RVec lg(span);
  for (int i = 0; i < span; ++i) lg(i) = std::log2(shell_max(i));
  double mbar = (span - 1) / 2.0, lbar = lg.mean();
  double num = 0.0, den = 0.0;
  for (int i = 0; i < span; ++i) {
    num += (i - mbar) * (lg(i) - lbar);
    den += (i - mbar) * (i - mbar);
  }
  double slope = num / den;
  fit.exponent_hat = -slope;
  double ss = 0.0;
  for (int i = 0; i < span; ++i) {
    double pred = lbar + slope * (i - mbar);
    ss += (lg(i) - pred) * (lg(i) - pred);
  }
  fit.residual = std::sqrt(ss / span);

  // super-polynomial: the per-shell decrement accelerates across the range
  double d_first = lg(0) - lg(1);
  double d_last = lg(span - 2) - lg(span - 1);
  fit.superpolynomial = d_last > d_first + 1.5;
  return fit;
}

}  // namespace

DecayFit fit_decay(const RVec& radii, const RVec& values, int m_min, int m_max) {
  if (radii.size() != values.size())
    throw std::invalid_argument("fit_decay: radii/values length mismatch");
  const int span = m_max - m_min + 1;
  if (span < 4)
    throw std::invalid_argument("fit_decay: need at least 4 dyadic shells");
  RVec shell_max = RVec::Zero(span);
  const double lo = std::ldexp(1.0, m_min), hi = std::ldexp(1.0, m_max + 1);
  for (Eigen::Index i = 0; i < radii.size(); ++i) {
    double r = radii(i);
    if (r < lo || r >= hi) continue;
    int m = static_cast<int>(std::floor(std::log2(r)));
    m = std::clamp(m, m_min, m_max);
    shell_max(m - m_min) = std::max(shell_max(m - m_min), values(i));
  }
  DecayFit fit = fit_from_shells(shell_max, m_min);
  double c = 0.0;
  for (Eigen::Index i = 0; i < radii.size(); ++i) {
    double r = radii(i);
    if (r < lo || r >= hi) continue;
    c = std::max(c, values(i) * std::pow(1.0 + r * r, fit.exponent_hat / 2.0));
  }
  fit.constant_hat = c;
  return fit;
}

DecayFit fit_decay_shells(const RVec& shell_max, int m_min) {
  if (shell_max.size() < 4)
    throw std::invalid_argument("fit_decay: need at least 4 dyadic shells");
  DecayFit fit = fit_from_shells(shell_max, m_min);
  double c = 0.0;  // conservative: envelope pinned at each shell's right edge
  for (int i = 0; i < shell_max.size(); ++i) {
    double r = std::ldexp(1.0, m_min + i + 1);
    c = std::max(c, shell_max(i) * std::pow(1.0 + r * r, fit.exponent_hat / 2.0));
  }
  fit.constant_hat = c;
  return fit;
}

namespace {

void check_row_boundary(const SampledSignal& work) {
  // spatial outer-2% mass of the windowed product; nonzero means the sup box
  // or grid is too small for the window's decay
  double total = work.values.squaredNorm();
  if (total <= 0.0) return;
  const double edge = 0.98 * work.grid.extent / 2;
  double outer = 0.0;
  for (int v = 0; v < work.grid.n_points; ++v)
    if (std::abs(work.grid.x(v)) >= edge) outer += std::norm(work.values(v));
  if (outer / total > 1e-10)
    throw std::runtime_error(
        "symbol_stft_sup: sampling box too small for the window decay");
}

SymbolSupScan separable_scan(const SymbolSampler& sigma,
                             const SymbolSupParams& params) {
  const GridSpec grid = make_grid(params.grid.n_points, params.grid.extent);
  Window g = make_gaussian_window(grid, true);
  SampledSignal f{grid, CVec(grid.n_points), sigma.smoothness_label};
  for (int v = 0; v < grid.n_points; ++v)
    f.values(v) = sigma.factor_x(grid.x(v));

  double lo = params.x_lo, hi = params.x_hi;
  if (sigma.period_x > 0.0) {  // one period plus a 13-stride margin each side
    lo = -13.0 * params.x_stride;
    hi = sigma.period_x + 13.0 * params.x_stride;
  }
  std::vector<double> xs;
  for (double x = lo; x <= hi + 1e-12; x += params.x_stride)
    xs.push_back(grid.dx() * snap_index(grid, x));
  if (xs.empty()) xs.push_back(0.0);

  for (double x : std::vector<double>{xs.front(), xs.back()}) {
    SampledSignal work{grid, CVec(grid.n_points), "probe"};
    int m = ((snap_index(grid, x) % grid.n_points) + grid.n_points) % grid.n_points;
    for (int v = 0; v < grid.n_points; ++v) {
      int src = v - m;
      if (src < 0) src += grid.n_points;
      work.values(v) = f.values(v) * std::conj(g.signal.values(src));
    }
    check_row_boundary(work);
  }

  RVec x_points = Eigen::Map<const RVec>(xs.data(), xs.size());
  TFArray V = stft(f, g, TFLattice{x_points, grid.xi_axis()});

  SymbolSupScan scan;
  scan.mode = "separable-1d";
  scan.zeta = grid.xi_axis();
  scan.G = V.values.cwiseAbs().colwise().maxCoeff().transpose();
  scan.radii = scan.zeta.cwiseAbs();
  scan.values = scan.G;
  return scan;
}

SymbolSupScan dense_scan(const SymbolSampler& sigma,
                         const SymbolSupParams& params) {
  const GridSpec g2 = make_grid(params.grid2_n, params.grid2_extent);
  const int n = g2.n_points;
  const double d = g2.dx();

  CMat S(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) S(i, j) = sigma.evaluator(g2.x(i), g2.x(j));
  RVec psi1(n);  // tensor Gaussian window, normalized on the 2-D grid
  for (int i = 0; i < n; ++i)
    psi1(i) = std::sqrt(2.0) * std::exp(-kPi * g2.x(i) * g2.x(i));
  const double psi_norm = std::sqrt((psi1 * psi1.transpose()).squaredNorm()) * d;
  psi1 /= std::sqrt(psi_norm);

  std::vector<int> offsets;
  for (double a = -params.z_radius; a <= params.z_radius + 1e-12;
       a += params.z_stride)
    offsets.push_back(((snap_index(g2, a) % n) + n) % n);

  // frequency of FFT bin k (standard wraparound order)
  auto bin_freq = [&](int k) {
    return (k <= n / 2 ? k : k - n) * g2.dxi();
  };

  RMat G = RMat::Zero(n, n);
  CMat work(n, n);
  for (int ma : offsets)
    for (int mb : offsets) {
      for (int i = 0; i < n; ++i) {
        int si = i - ma;
        if (si < 0) si += n;
        for (int j = 0; j < n; ++j) {
          int sj = j - mb;
          if (sj < 0) sj += n;
          work(i, j) = S(i, j) * psi1(si) * psi1(sj);
        }
      }
      {  // boundary check on both marginals of the windowed product
        RVec row = work.cwiseAbs2().rowwise().sum();
        RVec col = work.cwiseAbs2().colwise().sum().transpose();
        double tot = row.sum();
        if (tot > 0.0) {
          double outer = 0.0;
          const double edge = 0.98 * g2.extent / 2;
          for (int i = 0; i < n; ++i)
            if (std::abs(g2.x(i)) >= edge) outer += row(i) + col(i);
          if (outer / tot > 1e-10)
            throw std::runtime_error(
                "symbol_stft_sup: sampling box too small for the window decay");
        }
      }
      fft::dft2_inplace(work, fft::kForward);
      for (int k1 = 0; k1 < n; ++k1)
        for (int k2 = 0; k2 < n; ++k2)
          G(k1, k2) = std::max(G(k1, k2), d * d * std::abs(work(k1, k2)));
    }

  SymbolSupScan scan;
  scan.mode = "dense-2d";
  std::vector<double> radii, values;
  radii.reserve(static_cast<size_t>(n) * n);
  values.reserve(static_cast<size_t>(n) * n);
  for (int k1 = 0; k1 < n; ++k1)
    for (int k2 = 0; k2 < n; ++k2) {
      double r = std::hypot(bin_freq(k1), bin_freq(k2));
      if (r >= g2.nyquist()) continue;  // skip anisotropic corner coverage
      radii.push_back(r);
      values.push_back(G(k1, k2));
    }
  scan.radii = Eigen::Map<const RVec>(radii.data(), radii.size());
  scan.values = Eigen::Map<const RVec>(values.data(), values.size());
  return scan;
}

}  // namespace

SymbolSupScan symbol_stft_sup(const SymbolSampler& sigma,
                              const SymbolSupParams& params) {
  if (!sigma.evaluator && !sigma.separable())
    throw std::invalid_argument("symbol_stft_sup: symbol has no evaluator");
  if (sigma.separable()) return separable_scan(sigma, params);
  return dense_scan(sigma, params);
}

}  // namespace gwf

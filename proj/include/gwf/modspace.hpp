#pragma once

// Modulation-space norms, polynomial weights, and decay estimation for symbol
// classes: dyadic-shell envelopes |V_psi sigma(z, zeta)| <= C <zeta>^{-s}
// fitted over 2^m <= |zeta| < 2^{m+1}. Membership is decided by the fitted
// exponent, never pointwise.

#include <functional>
#include <string>
#include <utility>

#include "gwf/core.hpp"
#include "gwf/stft.hpp"

namespace gwf {

struct WeightParams {
  double r = 0.0;  // signed polynomial order of <z>^r
  double p = 2.0;  // Lebesgue exponent in [1, inf]
};

// <z> = sqrt(1 + x^2 + xi^2)
double peetre_weight(double x, double xi);

// Riemann sum (sup for p = inf) of |V_g f(z)|^p <z>^{pr} over the full
// lattice, then the p-th root.
double mod_norm(const SampledSignal& f, const Window& g, const WeightParams& w);

struct SymbolSampler {
  std::function<cd(double, double)> evaluator;  // sigma(x, xi)
  std::string smoothness_label;
  // Optional tensor factorization sigma(x, xi) = factor_x(x) * factor_xi(xi);
  // when present the 4-D STFT reduces to two 1-D scans.
  std::function<cd(double)> factor_x;
  std::function<cd(double)> factor_xi;
  double period_x = 0.0;  // > 0 when factor_x is periodic with this period

  bool separable() const { return static_cast<bool>(factor_x); }
};

// Standard C^inf bump profile: 1 for r <= 1, 0 for r >= 2.
double bump_phi(double r);

SymbolSampler make_sin_mu_symbol(double mu);  // |sin x|^mu, requires mu > 1
SymbolSampler make_potential_symbol(std::function<double(double)> V,
                                    const std::string& label);
SymbolSampler make_homog_cutoff_symbol();  // |z|^2 times a smooth cutoff

// Splits h(x,xi) = (x^4 + xi^4)^{1/2} into (a, sigma) with a = (1 - phi)h
// smooth-homogeneous away from 0 and sigma = phi h supported in |z| <= 2.
std::pair<SymbolSampler, SymbolSampler> make_example4_split();

struct DecayFit {
  double exponent_hat = 0.0;   // -slope of log2(shell max) per dyadic shell
  double constant_hat = 0.0;   // envelope constant dominating all fitted samples
  double residual = 0.0;       // RMS of the log-linear fit
  int m_min = 0, m_max = 0;    // dyadic shell range used
  bool superpolynomial = false;  // decay accelerates across the shell range
  RVec shell_max;              // per-shell maxima, index m - m_min
};

// Fit from raw (radius, value) samples; every shell in [m_min, m_max] must be
// populated with a nonzero maximum and the range must span >= 4 shells.
DecayFit fit_decay(const RVec& radii, const RVec& values, int m_min, int m_max);

// Fit from precomputed shell maxima (shell m_min first).
DecayFit fit_decay_shells(const RVec& shell_max, int m_min);

struct SymbolSupParams {
  // separable path: 1-D grid carrying the x-factor
  GridSpec grid{8192, 16.0};
  double x_lo = 0.0, x_hi = 0.0;  // x-sup box when the symbol is not periodic
  double x_stride = 1.0 / 32.0;
  // dense path: 2-D grid and z-lattice
  int grid2_n = 1024;
  double grid2_extent = 16.0;
  double z_radius = 4.0;
  double z_stride = 2.0;
};

struct SymbolSupScan {
  std::string mode;  // "separable-1d" or "dense-2d"
  RVec zeta;         // separable path only: signed scalar frequency axis
  RVec G;            // separable path only: sup_x |V_g factor_x|
  RVec radii;        // |zeta| for every retained sample (both paths)
  RVec values;       // G(zeta) samples matching `radii`
};

// G(zeta) = sup over sampled z of |V_psi sigma(z, zeta)|. Separable symbols
// use the 1-D reduction (periodic symbols scan one period plus margin);
// everything else runs the dense 2-D transform on a small grid.
SymbolSupScan symbol_stft_sup(const SymbolSampler& sigma,
                              const SymbolSupParams& params);

}  // namespace gwf

#pragma once

// Gabor matrix of a propagator U:
//   k(t, w, z) = <U(t) pi(w) g, pi(z) g> = V_g(U(t) pi(w) g)(z)
// sampled on phase-space lattices, plus the power-law envelope fit
// |k| <= C <z - chi_t(w)>^{-s} and its wrong-flow negative control.

#include <string>
#include <vector>

#include "gwf/core.hpp"
#include "gwf/flow.hpp"
#include "gwf/propagator.hpp"
#include "gwf/stft.hpp"

namespace gwf {

// Square lattice {-radius, ..., radius}^2 with the given stride, x-major.
std::vector<PhasePoint> phase_box_lattice(double radius, double stride);

struct GaborMatrixSample {
  GridSpec grid;
  double t = 0.0;
  std::vector<PhasePoint> w_lattice;
  RVec z_x_axis, z_xi_axis;  // z runs x-major: z index = ix * n_xi + ixi
  CMat values;               // indexed (w, z)
  std::string window_label;
  std::vector<int> flagged_rows;  // w rows whose evolved state touches the boundary

  std::vector<PhasePoint> z_lattice() const;
};

// Evolves every pi(w) g in one batch, then STFT-samples all z per x-column.
// Rows whose evolved state has boundary mass > 1e-8 (spatial or frequency)
// are flagged rather than rejected.
GaborMatrixSample sample_gabor_matrix(const GridSpec& grid,
                                      const TimeEvolution& U, const Window& g,
                                      const std::vector<PhasePoint>& w_lattice,
                                      const RVec& z_x_axis,
                                      const RVec& z_xi_axis, double t);

struct EnvelopeFit {
  double s_hat = 0.0;
  double C_hat = 0.0;        // dominates every sample at exponent s_hat
  int violations = 0;        // samples above the fitted envelope (0 by design)
  bool superpolynomial = false;
  double residual = 0.0;
  int m_min = 0;
  RVec shell_max;            // dyadic shells of |z - chi_t(w)| from m = m_min
};

// Requires >= 4 populated dyadic displacement shells.
EnvelopeFit fit_envelope(const GaborMatrixSample& sample, const FlowMap& chi);

struct FalsificationReport {
  EnvelopeFit true_fit;
  EnvelopeFit wrong_fit;
  double drop = 0.0;            // true s_hat minus wrong s_hat
  bool falsified = false;       // drop >= 1 with genuinely different flows
  bool wrong_equals_true = false;  // "not falsified" control flag
};

FalsificationReport wrongflow_falsification(const GaborMatrixSample& sample,
                                            const FlowMap& chi_true,
                                            const FlowMap& chi_wrong);

}  // namespace gwf

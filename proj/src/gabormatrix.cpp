#include "gwf/gabormatrix.hpp"

#include <algorithm>
#include <cmath>

#include "gwf/fft.hpp"
#include "gwf/modspace.hpp"

namespace gwf {

std::vector<PhasePoint> phase_box_lattice(double radius, double stride) {
  if (!(stride > 0.0 && radius >= stride))
    throw std::invalid_argument("phase_box_lattice: need 0 < stride <= radius");
  std::vector<PhasePoint> pts;
  long k = std::lround(radius / stride);
  for (long i = -k; i <= k; ++i)
    for (long j = -k; j <= k; ++j)
      pts.push_back(PhasePoint{i * stride, j * stride});
  return pts;
}

std::vector<PhasePoint> GaborMatrixSample::z_lattice() const {
  std::vector<PhasePoint> pts;
  pts.reserve(static_cast<size_t>(z_x_axis.size()) * z_xi_axis.size());
  for (int i = 0; i < z_x_axis.size(); ++i)
    for (int j = 0; j < z_xi_axis.size(); ++j)
      pts.push_back(PhasePoint{z_x_axis(i), z_xi_axis(j)});
  return pts;
}

GaborMatrixSample sample_gabor_matrix(const GridSpec& grid,
                                      const TimeEvolution& U, const Window& g,
                                      const std::vector<PhasePoint>& w_lattice,
                                      const RVec& z_x_axis,
                                      const RVec& z_xi_axis, double t) {
  if (!(grid == g.signal.grid))
    throw std::invalid_argument("gabor matrix: window grid mismatch");
  if (w_lattice.empty() || z_x_axis.size() == 0 || z_xi_axis.size() == 0)
    throw std::invalid_argument("gabor matrix: empty lattice");
  const int n = grid.n_points;
  const int nw = static_cast<int>(w_lattice.size());
  const int nzx = static_cast<int>(z_x_axis.size());
  const int nzxi = static_cast<int>(z_xi_axis.size());

  CMat states(n, nw);
  for (int i = 0; i < nw; ++i)
    states.col(i) = tf_shift(g.signal, w_lattice[i]).values;
  states = U.apply(states, t);

  GaborMatrixSample out;
  out.grid = grid;
  out.t = t;
  out.w_lattice = w_lattice;
  out.z_x_axis = z_x_axis;
  out.z_xi_axis = z_xi_axis;
  out.window_label = g.signal.label;
  out.values.resize(nw, nzx * nzxi);

  // boundary flags: spatial band directly, frequency band via one batch FFT
  {
    const double xedge = 0.98 * grid.extent / 2;
    const double kedge = 0.98 * grid.nyquist();
    RVec xi_plain(n);
    for (int k = 0; k < n; ++k)
      xi_plain(k) = (k < n / 2 ? k : k - n) * grid.dxi();
    CMat spec = states;
    fft::dft_columns_inplace(spec, fft::kForward);
    for (int i = 0; i < nw; ++i) {
      double tot_x = states.col(i).squaredNorm();
      double tot_k = spec.col(i).squaredNorm();
      double out_x = 0.0, out_k = 0.0;
      for (int v = 0; v < n; ++v) {
        if (std::abs(grid.x(v)) >= xedge) out_x += std::norm(states(v, i));
        if (std::abs(xi_plain(v)) >= kedge) out_k += std::norm(spec(v, i));
      }
      if (tot_x > 0.0 &&
          (out_x / tot_x > 1e-8 || (tot_k > 0.0 && out_k / tot_k > 1e-8)))
        out.flagged_rows.push_back(i);
    }
  }

  RVec sgn(n);
  for (int v = 0; v < n; ++v) sgn(v) = (v & 1) ? -1.0 : 1.0;
  const double extra = ((n / 2) % 2 == 1) ? -1.0 : 1.0;
  std::vector<int> xi_idx(nzxi);
  for (int k = 0; k < nzxi; ++k) {
    long idx = std::lround(z_xi_axis(k) * grid.extent);
    if (std::abs(z_xi_axis(k) * grid.extent - static_cast<double>(idx)) > 1e-6 ||
        idx < -n / 2 || idx >= n / 2)
      throw std::invalid_argument("gabor matrix: z frequency off-grid");
    xi_idx[k] = static_cast<int>(idx) + n / 2;
  }

  CMat work(n, nw);
  for (int j = 0; j < nzx; ++j) {
    const int m =
        ((snap_index(grid, out.z_x_axis(j)) % n) + n) % n;
    if (std::abs(out.z_x_axis(j) - grid.dx() * snap_index(grid, out.z_x_axis(j))) >
        1e-6 * grid.dx())
      throw std::invalid_argument("gabor matrix: z position off-grid");
    CVec gm(n);
    for (int v = 0; v < n; ++v) {
      int src = v - m;
      if (src < 0) src += n;
      gm(v) = sgn(v) * std::conj(g.signal.values(src));
    }
    work = states;
    work.array().colwise() *= gm.array();
    fft::dft_columns_inplace(work, fft::kForward);
    for (int k = 0; k < nzxi; ++k) {
      const int idx = xi_idx[k];
      const double s = extra * grid.dx() * sgn(idx);
      out.values.col(j * nzxi + k) = s * work.row(idx).transpose();
    }
  }
  return out;
}

EnvelopeFit fit_envelope(const GaborMatrixSample& sample, const FlowMap& chi) {
  const int nw = static_cast<int>(sample.w_lattice.size());
  const auto z_pts = sample.z_lattice();
  const int nz = static_cast<int>(z_pts.size());

  RMat dist(nw, nz);
  for (int i = 0; i < nw; ++i) {
    PhasePoint cw = flow_apply(chi, sample.w_lattice[i]);
    for (int j = 0; j < nz; ++j)
      dist(i, j) = std::hypot(z_pts[j].x - cw.x, z_pts[j].xi - cw.xi);
  }

  const double dmax = dist.maxCoeff();
  const int m_hi = static_cast<int>(std::floor(std::log2(dmax + 1e-9)));
  if (m_hi < 3)
    throw std::runtime_error(
        "fit_envelope: lattice too small, need >= 4 dyadic displacement shells");
  RVec shell_max = RVec::Zero(m_hi + 1);
  for (int i = 0; i < nw; ++i)
    for (int j = 0; j < nz; ++j) {
      double d = dist(i, j);
      if (d < 1.0 || d >= std::ldexp(1.0, m_hi + 1)) continue;
      int m = static_cast<int>(std::floor(std::log2(d)));
      shell_max(m) = std::max(shell_max(m),
                              std::abs(sample.values(i, j)));
    }
  for (int m = 0; m <= m_hi; ++m)
    if (!(shell_max(m) > 0.0))
      throw std::runtime_error("fit_envelope: unpopulated displacement shell " +
                               std::to_string(m));

  DecayFit base = fit_decay_shells(shell_max, 0);
  EnvelopeFit fit;
  fit.s_hat = base.exponent_hat;
  fit.superpolynomial = base.superpolynomial;
  fit.residual = base.residual;
  fit.m_min = 0;
  fit.shell_max = shell_max;

  // envelope constant dominating every sample, near-diagonal included
  double c = 0.0;
  for (int i = 0; i < nw; ++i)
    for (int j = 0; j < nz; ++j)
      c = std::max(c, std::abs(sample.values(i, j)) *
                          std::pow(1.0 + dist(i, j) * dist(i, j),
                                   fit.s_hat / 2.0));
  fit.C_hat = c;
  int viol = 0;
  for (int i = 0; i < nw; ++i)
    for (int j = 0; j < nz; ++j) {
      double env = fit.C_hat *
                   std::pow(1.0 + dist(i, j) * dist(i, j), -fit.s_hat / 2.0);
      if (std::abs(sample.values(i, j)) > env * (1.0 + 1e-12)) ++viol;
    }
  fit.violations = viol;
  return fit;
}

FalsificationReport wrongflow_falsification(const GaborMatrixSample& sample,
                                            const FlowMap& chi_true,
                                            const FlowMap& chi_wrong) {
  FalsificationReport rep;
  double probe_dev = 0.0;
  for (const PhasePoint& w : sample.w_lattice) {
    PhasePoint a = flow_apply(chi_true, w);
    PhasePoint b = flow_apply(chi_wrong, w);
    probe_dev = std::max(probe_dev, std::hypot(a.x - b.x, a.xi - b.xi));
  }
  rep.wrong_equals_true = probe_dev < 1e-9;
  rep.true_fit = fit_envelope(sample, chi_true);
  rep.wrong_fit = fit_envelope(sample, chi_wrong);
  rep.drop = rep.true_fit.s_hat - rep.wrong_fit.s_hat;
  rep.falsified = !rep.wrong_equals_true && rep.drop >= 1.0;
  return rep;
}

}  // namespace gwf

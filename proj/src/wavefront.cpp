#include "gwf/wavefront.hpp"

#include <algorithm>
#include <cmath>

namespace gwf {

namespace {

double angle_dist(double a, double b) {
  double d = std::fmod(std::abs(a - b), 2.0 * kPi);
  return std::min(d, 2.0 * kPi - d);
}

// least-squares exponent over consecutive dyadic shells (no zero guard: the
// caller only fits strictly positive statistics)
double shell_exponent(const std::vector<double>& vals) {
  const int n = static_cast<int>(vals.size());
  double mbar = (n - 1) / 2.0, lbar = 0.0;
  std::vector<double> lg(n);
  for (int i = 0; i < n; ++i) {
    lg[i] = std::log2(std::max(vals[i], 1e-300));
    lbar += lg[i] / n;
  }
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    num += (i - mbar) * (lg[i] - lbar);
    den += (i - mbar) * (i - mbar);
  }
  return -num / den;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::vector<int> WFEstimate::in_bins() const {
  std::vector<int> out;
  for (int b = 0; b < static_cast<int>(bins.size()); ++b)
    if (bins[b].in_wf) out.push_back(b);
  return out;
}

std::vector<std::pair<int, int>> WFEstimate::arcs() const {
  const int n = static_cast<int>(bins.size());
  std::vector<std::pair<int, int>> out;
  int total = 0;
  for (const WFBin& b : bins) total += b.in_wf ? 1 : 0;
  if (total == 0) return out;
  if (total == n) {
    out.emplace_back(0, n - 1);
    return out;
  }
  for (int b = 0; b < n; ++b) {
    if (!bins[b].in_wf || bins[(b + n - 1) % n].in_wf) continue;
    int len = 1;
    while (bins[(b + len) % n].in_wf) ++len;
    out.emplace_back(b, (b + len - 1) % n);
  }
  return out;
}

ConeProfile cone_shell_profile(const TFArray& F, const Cone& cone, double p,
                               double r) {
  if (std::abs(cone.direction.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("cone_shell_profile: direction must be unit");
  if (!(cone.half_angle > 0.0 && cone.half_angle <= kPi / 2))
    throw std::invalid_argument("cone_shell_profile: half_angle out of range");
  const double reach_x = F.lattice.x_points.cwiseAbs().maxCoeff();
  const double reach_xi = F.lattice.xi_points.cwiseAbs().maxCoeff();
  if (std::min(reach_x, reach_xi) < 0.98 * 32.0)
    throw std::invalid_argument("cone_shell_profile: lattice must reach radius 32");

  const double th0 = std::atan2(cone.direction(1), cone.direction(0));
  const int m_min = 1, m_max = 4;  // shells [2,4) ... [16,32)
  ConeProfile prof;
  prof.m_min = m_min;
  prof.p = p;
  prof.r = r;
  prof.shell_vals = RVec::Zero(m_max - m_min + 1);
  std::vector<bool> hit(m_max - m_min + 1, false);

  double dx_lat = F.lattice.x_points.size() > 1
                      ? F.lattice.x_points(1) - F.lattice.x_points(0)
                      : 1.0;
  double dxi_lat = F.lattice.xi_points.size() > 1
                       ? F.lattice.xi_points(1) - F.lattice.xi_points(0)
                       : 1.0;

  for (int i = 0; i < F.lattice.x_points.size(); ++i)
    for (int j = 0; j < F.lattice.xi_points.size(); ++j) {
      double x = F.lattice.x_points(i), xi = F.lattice.xi_points(j);
      double rad = std::hypot(x, xi);
      if (rad < 2.0 || rad >= 32.0) continue;
      if (angle_dist(std::atan2(xi, x), th0) > cone.half_angle) continue;
      int m = std::clamp(static_cast<int>(std::floor(std::log2(rad))), m_min, m_max);
      double v = std::abs(F.values(i, j));
      int idx = m - m_min;
      hit[idx] = true;
      if (std::isinf(p)) {
        prof.shell_vals(idx) = std::max(prof.shell_vals(idx), v);
      } else {
        double w = std::pow(1.0 + rad * rad, p * r / 2.0);
        prof.shell_vals(idx) += std::pow(v, p) * w * dx_lat * dxi_lat;
      }
    }
  for (bool h : hit)
    if (!h)
      throw std::runtime_error(
          "cone_shell_profile: empty cone/shell intersection (cone too narrow)");
  return prof;
}

WFEstimate estimate_wf(const SampledSignal& f, const Window& g,
                       const WFParams& params) {
  const GridSpec& grid = f.grid;
  if (params.n_bins < 16)
    throw std::invalid_argument("estimate_wf: need n_bins >= 16");
  if (!(params.R_max / params.inner_radius >= 8.0))
    throw std::invalid_argument("estimate_wf: need R_max/inner_radius >= 8");
  if (params.R_max > 0.6 * grid.extent / 2)
    throw std::invalid_argument(
        "estimate_wf: estimation disk too close to the box edge");
  if (params.R_max > 0.6 * grid.nyquist())
    throw std::invalid_argument(
        "estimate_wf: estimation disk too close to the band edge");
  if (params.mode != "smooth" && params.mode != "weighted")
    throw std::invalid_argument("estimate_wf: unknown mode");

  WFEstimate est;
  est.r_param = params.mode == "smooth" ? params.r_threshold : params.r;
  est.p_param = params.mode == "smooth"
                    ? std::numeric_limits<double>::infinity()
                    : params.p;
  est.inner_radius = params.inner_radius;
  est.R_max = params.R_max;

  BoundaryMass bm = boundary_mass(f);
  if (bm.spatial > 1e-6) est.flags.push_back("boundary_spatial");
  if (bm.frequency > 1e-6) est.flags.push_back("boundary_frequency");
  if (bm.spatial > 1e-6 && bm.frequency > 1e-6)
    throw std::runtime_error(
        "estimate_wf: unreliable truncation, signal mass sits on both the "
        "spatial and the frequency boundary");

  TFLattice lat = box_lattice(grid, params.R_max, params.R_max, params.stride);
  RMat V = stft(f, g, lat).values.cwiseAbs();
  const int nl = static_cast<int>(lat.x_points.size());
  const double gmax = V.maxCoeff();

  const int m_min = static_cast<int>(std::lround(std::log2(params.inner_radius)));
  const int m_max = static_cast<int>(std::lround(std::log2(params.R_max))) - 1;
  const int n_shells = m_max - m_min + 1;
  const double db = 2.0 * kPi / params.n_bins;
  const double halfw = (0.5 + params.guard_bins) * db;
  const double cell = params.stride * params.stride;

  est.bins.resize(params.n_bins);
  for (int b = 0; b < params.n_bins; ++b) {
    WFBin& bin = est.bins[b];
    bin.angle = (b + 0.5) * db;

    std::vector<std::vector<double>> shell_pts(n_shells);
    for (int i = 0; i < nl; ++i)
      for (int j = 0; j < nl; ++j) {
        double x = lat.x_points(i), xi = lat.xi_points(j);
        double rad = std::hypot(x, xi);
        if (rad < params.inner_radius || rad >= params.R_max) continue;
        if (angle_dist(std::atan2(xi, x), bin.angle) > halfw) continue;
        int m = std::clamp(static_cast<int>(std::floor(std::log2(rad))), m_min,
                           m_max);
        if (std::isinf(params.p) || params.mode == "smooth") {
          shell_pts[m - m_min].push_back(V(i, j));
        } else {
          double w = std::pow(1.0 + rad * rad, params.p * params.r / 2.0);
          shell_pts[m - m_min].push_back(std::pow(V(i, j), params.p) * w * cell);
        }
      }

    bool ok = true;
    std::vector<double> vals(n_shells);
    for (int s = 0; s < n_shells; ++s) {
      if (shell_pts[s].empty()) {
        ok = false;
        break;
      }
      if (params.mode == "smooth" || std::isinf(params.p)) {
        vals[s] = *std::max_element(shell_pts[s].begin(), shell_pts[s].end());
      } else {
        double acc = 0.0;
        for (double v : shell_pts[s]) acc += v;
        vals[s] = acc;
      }
    }
    if (!ok) continue;  // cone narrower than the lattice resolution here

    bin.score = gmax > 0.0 ? *std::max_element(vals.begin(), vals.end()) / gmax
                           : 0.0;
    if (params.mode == "smooth") {
      bin.exponent_hat = shell_exponent(vals);
      bin.in_wf = bin.score >= params.floor_rel &&
                  bin.exponent_hat < params.r_threshold;
    } else {
      std::vector<double> ratios(n_shells - 1);
      for (int s = 0; s + 1 < n_shells; ++s)
        ratios[s] = vals[s + 1] / std::max(vals[s], 1e-300);
      bin.in_wf = bin.score >= params.floor_rel * params.floor_rel &&
                  median_of(ratios) >= params.ratio_threshold;
    }
  }
  return est;
}

WFEstimate map_wf(const WFEstimate& est, const FlowMap& chi, double R_hom) {
  const int n = static_cast<int>(est.bins.size());
  const double db = 2.0 * kPi / n;
  WFEstimate out = est;
  for (int b = 0; b < n; ++b) {
    out.bins[b].in_wf = false;
    out.bins[b].score = 0.0;
    out.bins[b].exponent_hat = std::numeric_limits<double>::infinity();
    out.bins[b].angle = (b + 0.5) * db;
  }
  for (int b = 0; b < n; ++b) {
    if (!est.bins[b].in_wf) continue;
    RVec w(2);
    w << R_hom * std::cos(est.bins[b].angle), R_hom * std::sin(est.bins[b].angle);
    RVec z = flow_apply(chi, w);
    double rad = z.norm();
    if (rad <= 1e-12)
      throw std::runtime_error("map_wf: flow maps a WF direction to zero");
    double a = std::fmod(std::atan2(z(1), z(0)) + 2.0 * kPi, 2.0 * kPi);
    int tb = static_cast<int>(std::floor(a / db)) % n;
    out.bins[tb].in_wf = true;
    out.bins[tb].score = std::max(out.bins[tb].score, est.bins[b].score);
    out.bins[tb].exponent_hat =
        std::min(out.bins[tb].exponent_hat, est.bins[b].exponent_hat);
  }
  return out;
}

double wf_distance(const WFEstimate& a, const WFEstimate& b) {
  if (a.bins.size() != b.bins.size())
    throw std::invalid_argument("wf_distance: bin counts differ");
  std::vector<double> A, B;
  for (const WFBin& bin : a.bins)
    if (bin.in_wf) A.push_back(bin.angle);
  for (const WFBin& bin : b.bins)
    if (bin.in_wf) B.push_back(bin.angle);
  if (A.empty() && B.empty()) return 0.0;
  if (A.empty() || B.empty()) return kPi;
  auto one_sided = [](const std::vector<double>& u, const std::vector<double>& v) {
    double worst = 0.0;
    for (double a : u) {
      double best = std::numeric_limits<double>::infinity();
      for (double b : v) best = std::min(best, angle_dist(a, b));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_sided(A, B), one_sided(B, A));
}

}  // namespace gwf

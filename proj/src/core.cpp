#include "gwf/core.hpp"

#include <array>
#include <cmath>

#include "gwf/fft.hpp"

namespace gwf {

RVec GridSpec::x_axis() const {
  RVec v(n_points);
  for (int n = 0; n < n_points; ++n) v(n) = x(n);
  return v;
}

RVec GridSpec::xi_axis() const {
  RVec v(n_points);
  for (int k = 0; k < n_points; ++k) v(k) = xi(k);
  return v;
}

GridSpec make_grid(int n_points, double extent) {
  if (n_points < 8 || (n_points & (n_points - 1)) != 0)
    throw std::invalid_argument("grid: n_points must be a power of two >= 8");
  if (!(extent > 0.0) || !std::isfinite(extent))
    throw std::invalid_argument("grid: extent must be positive and finite");
  return GridSpec{n_points, extent};
}

double l2_norm(const SampledSignal& f) {
  return std::sqrt(f.grid.dx()) * f.values.norm();
}

cd inner(const SampledSignal& f, const SampledSignal& g) {
  if (!(f.grid == g.grid)) throw std::invalid_argument("inner: grid mismatch");
  return f.grid.dx() * g.values.dot(f.values);  // Eigen dot conjugates its caller
}

Window make_window(SampledSignal s) {
  double nrm = l2_norm(s);
  if (!(nrm > 0.0) || !std::isfinite(nrm))
    throw std::invalid_argument("window: signal must have positive finite norm");
  return Window{std::move(s), nrm};
}

Window make_gaussian_window(const GridSpec& grid, bool normalize) {
  SampledSignal s{grid, CVec(grid.n_points), "gaussian"};
  for (int n = 0; n < grid.n_points; ++n) {
    double x = grid.x(n);
    s.values(n) = std::exp(-kPi * x * x);
  }
  if (normalize) s.values /= l2_norm(s);
  return make_window(std::move(s));
}

Window make_hermite_window(const GridSpec& grid) {
  SampledSignal s{grid, CVec(grid.n_points), "hermite1"};
  const double c = std::pow(2.0, 0.25) * 2.0 * std::sqrt(kPi);
  for (int n = 0; n < grid.n_points; ++n) {
    double x = grid.x(n);
    s.values(n) = c * x * std::exp(-kPi * x * x);
  }
  s.values /= l2_norm(s);
  return make_window(std::move(s));
}

int snap_index(const GridSpec& grid, double x) {
  return static_cast<int>(std::lround(x / grid.dx()));
}

SampledSignal make_delta(const GridSpec& grid, double x0) {
  SampledSignal s{grid, CVec::Zero(grid.n_points), "delta"};
  int idx = grid.n_points / 2 + snap_index(grid, x0);
  if (idx < 0 || idx >= grid.n_points)
    throw std::out_of_range("delta: x0 outside the grid");
  s.values(idx) = 1.0 / grid.dx();  // unit discrete mass
  return s;
}

SampledSignal make_plane_wave(const GridSpec& grid, double xi0) {
  SampledSignal s{grid, CVec(grid.n_points), "plane_wave"};
  for (int n = 0; n < grid.n_points; ++n)
    s.values(n) = std::polar(1.0, kTwoPi * xi0 * grid.x(n));
  return s;
}

SampledSignal make_chirp(const GridSpec& grid, double c) {
  SampledSignal s{grid, CVec(grid.n_points), "chirp"};
  for (int n = 0; n < grid.n_points; ++n) {
    double x = grid.x(n);
    s.values(n) = std::polar(1.0, kPi * c * x * x);
  }
  return s;
}

SampledSignal make_ho_ground_state(const GridSpec& grid) {
  SampledSignal s{grid, CVec(grid.n_points), "ho_ground_state"};
  const double c = std::pow(2.0, 0.25);
  for (int n = 0; n < grid.n_points; ++n) {
    double x = grid.x(n);
    s.values(n) = c * std::exp(-kPi * x * x);
  }
  return s;
}

SampledSignal make_constant(const GridSpec& grid) {
  return SampledSignal{grid, CVec::Ones(grid.n_points), "constant"};
}

SampledSignal make_gaussian_chirp(const GridSpec& grid, double c, double sigma) {
  SampledSignal s{grid, CVec(grid.n_points), "gaussian_chirp"};
  for (int n = 0; n < grid.n_points; ++n) {
    double x = grid.x(n);
    s.values(n) =
        std::polar(std::exp(-kPi * (x / sigma) * (x / sigma)), kPi * c * x * x);
  }
  return s;
}

namespace {

double need_param(const std::map<std::string, double>& params,
                  const std::string& key, const std::string& kind) {
  auto it = params.find(key);
  if (it == params.end())
    throw std::invalid_argument("make_test_signal: kind '" + kind +
                                "' needs parameter '" + key + "'");
  return it->second;
}

}  // namespace

SampledSignal make_test_signal(const GridSpec& grid, const std::string& kind,
                               const std::map<std::string, double>& params) {
  if (kind == "delta") {
    auto it = params.find("x0");
    return make_delta(grid, it == params.end() ? 0.0 : it->second);
  }
  if (kind == "plane_wave") return make_plane_wave(grid, need_param(params, "xi0", kind));
  if (kind == "chirp") return make_chirp(grid, need_param(params, "c", kind));
  if (kind == "ho_ground_state") return make_ho_ground_state(grid);
  if (kind == "constant") return make_constant(grid);
  if (kind == "gaussian_chirp")
    return make_gaussian_chirp(grid, need_param(params, "c", kind),
                               need_param(params, "sigma", kind));
  throw std::invalid_argument("make_test_signal: unknown kind '" + kind + "'");
}

SampledSignal tf_shift(const SampledSignal& f, const PhasePoint& z) {
  const GridSpec& grid = f.grid;
  if (std::abs(z.x) >= grid.extent / 2)
    throw std::out_of_range("tf_shift: |x| must be < L/2");
  if (std::abs(z.xi) >= grid.nyquist())
    throw std::out_of_range("tf_shift: |xi| must be < Nyquist");
  const int n = grid.n_points;
  const int m = ((snap_index(grid, z.x) % n) + n) % n;
  const long l = std::lround(z.xi * grid.extent);  // snapped frequency index
  const double xis = static_cast<double>(l) / grid.extent;
  SampledSignal out{grid, CVec(n), f.label};
  for (int i = 0; i < n; ++i) {
    int src = i - m;
    if (src < 0) src += n;
    out.values(i) = f.values(src) * std::polar(1.0, kTwoPi * xis * grid.x(i));
  }
  return out;
}

namespace {

// Centered DFT by sign conjugation:
//   F(xi_k) = dx * (-1)^k * FFT[(-1)^n f_n]_k, with a global flip when N/2 is
//   odd (never triggered for power-of-two N >= 8; kept for the general rule).
void flip_odd(CVec& v) {
  for (Eigen::Index i = 1; i < v.size(); i += 2) v(i) = -v(i);
}

}  // namespace

SampledSignal fourier(const SampledSignal& f) {
  const int n = f.grid.n_points;
  SampledSignal out{f.grid, f.values, f.label};
  flip_odd(out.values);
  fft::dft_inplace(out.values, fft::kForward);
  flip_odd(out.values);
  double scale = f.grid.dx();
  if ((n / 2) % 2 == 1) scale = -scale;
  out.values *= scale;
  return out;
}

SampledSignal inverse_fourier(const SampledSignal& F) {
  const int n = F.grid.n_points;
  SampledSignal out{F.grid, F.values, F.label};
  flip_odd(out.values);
  fft::dft_inplace(out.values, fft::kBackward);
  flip_odd(out.values);
  double scale = 1.0 / (F.grid.dx() * n);
  if ((n / 2) % 2 == 1) scale = -scale;
  out.values *= scale;
  return out;
}

namespace {

double bump(double u) {
  double s = 1.0 - u * u;
  return s > 0.0 ? std::exp(-1.0 / s) : 0.0;
}

// Cumulative integral of the bump over [-1, 1], tabulated once by composite
// Simpson; queried through a cubic Hermite patch (the derivative is the bump
// itself, so the interpolant is C^1-exact and accurate to ~1e-13).
struct BumpTable {
  static constexpr int kIntervals = 4096;
  std::array<double, kIntervals + 1> cum{};
  double total = 0.0;

  BumpTable() {
    const double h = 2.0 / kIntervals;
    cum[0] = 0.0;
    for (int i = 0; i < kIntervals; ++i) {
      double u0 = -1.0 + i * h;
      cum[i + 1] = cum[i] + h / 6.0 * (bump(u0) + 4.0 * bump(u0 + h / 2) + bump(u0 + h));
    }
    total = cum[kIntervals];
  }
};

const BumpTable& bump_table() {
  static const BumpTable t;
  return t;
}

}  // namespace

double smooth_step_down(double t) {
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  const auto& T = bump_table();
  const double h = 2.0 / BumpTable::kIntervals;
  double pos = (2.0 * t - 1.0 + 1.0) / h;
  int i = std::min(static_cast<int>(pos), BumpTable::kIntervals - 1);
  double s = pos - i;
  double u0 = -1.0 + i * h;
  double y0 = T.cum[i], y1 = T.cum[i + 1];
  double d0 = bump(u0), d1 = bump(u0 + h);
  double s2 = s * s, s3 = s2 * s;
  double B = (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 +
             (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * d1;
  return 1.0 - B / T.total;
}

double smooth_step_down_deriv(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return -2.0 * bump(2.0 * t - 1.0) / bump_table().total;
}

SampledSignal apply_taper(const SampledSignal& f, double lo, double hi) {
  if (!(0.0 < lo && lo < hi && hi <= 1.0))
    throw std::invalid_argument("apply_taper: need 0 < lo < hi <= 1");
  const GridSpec& grid = f.grid;
  const double a = lo * grid.extent / 2, b = hi * grid.extent / 2;
  SampledSignal out{grid, f.values, f.label};
  for (int n = 0; n < grid.n_points; ++n) {
    double ax = std::abs(grid.x(n));
    if (ax >= b)
      out.values(n) = 0.0;
    else if (ax > a)
      out.values(n) *= smooth_step_down((ax - a) / (b - a));
  }
  return out;
}

BoundaryMass boundary_mass(const SampledSignal& f) {
  const GridSpec& grid = f.grid;
  BoundaryMass bm;
  double total = f.values.squaredNorm();
  if (total <= 0.0) return bm;
  const double xedge = 0.98 * grid.extent / 2;
  double outer = 0.0;
  for (int n = 0; n < grid.n_points; ++n)
    if (std::abs(grid.x(n)) >= xedge) outer += std::norm(f.values(n));
  bm.spatial = outer / total;

  SampledSignal F = fourier(f);
  double ftotal = F.values.squaredNorm();
  const double kedge = 0.98 * grid.nyquist();
  outer = 0.0;
  for (int k = 0; k < grid.n_points; ++k)
    if (std::abs(grid.xi(k)) >= kedge) outer += std::norm(F.values(k));
  bm.frequency = ftotal > 0.0 ? outer / ftotal : 0.0;
  return bm;
}

}  // namespace gwf

#pragma once
// Grids, windows, elementary signals, the centered Fourier transform, and
// time-frequency shifts.
//
// Conventions used throughout the toolkit:
//   spatial grid    x_n  = (n - N/2) * dx,   dx = L/N,   n = 0..N-1
//   frequency grid  xi_k = (k - N/2) / L,    Nyquist = N/(2L)
//   fourier         (Ff)(xi)  = dx * sum_n f(x_n) e^{-2 pi i xi x_n}
//   tf_shift        pi(z)f = M_eta T_x f,  (pi(z)f)(v) = e^{2 pi i v eta} f(v-x)
// Signals are periodic on [-L/2, L/2); all signal-level computation is 1-D.

#include <complex>
#include <map>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace gwf {

using cd = std::complex<double>;
using RVec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

struct GridSpec {
  int n_points = 0;
  double extent = 0.0;  // L; the grid covers [-L/2, L/2)

  double dx() const { return extent / n_points; }
  double dxi() const { return 1.0 / extent; }
  double nyquist() const { return n_points / (2.0 * extent); }
  double x(int n) const { return (n - n_points / 2) * dx(); }
  double xi(int k) const { return (k - n_points / 2) / extent; }
  RVec x_axis() const;
  RVec xi_axis() const;

  bool operator==(const GridSpec&) const = default;
};

// Validates: n_points a power of two >= 8, extent > 0.
GridSpec make_grid(int n_points, double extent);

struct SampledSignal {
  GridSpec grid;
  CVec values;
  std::string label;
};

struct Window {
  SampledSignal signal;
  double l2_norm = 0.0;
};

// A d=1 phase-space point. Signal-level machinery is one-dimensional; the flow
// module accepts raw 2d-vectors for general dimension.
struct PhasePoint {
  double x = 0.0;
  double xi = 0.0;
};

double l2_norm(const SampledSignal& f);
// <f,g> = dx * sum f conj(g)
cd inner(const SampledSignal& f, const SampledSignal& g);

// Wraps a signal as a window, computing the stored norm. Rejects zero signals.
Window make_window(SampledSignal s);
Window make_gaussian_window(const GridSpec& grid, bool normalize = false);
// First Hermite function 2^{1/4} 2 sqrt(pi) x e^{-pi x^2}, renormalized to unit
// discrete norm. Needed by the window-independence checks.
Window make_hermite_window(const GridSpec& grid);

SampledSignal make_delta(const GridSpec& grid, double x0 = 0.0);
SampledSignal make_plane_wave(const GridSpec& grid, double xi0);
SampledSignal make_chirp(const GridSpec& grid, double c);
SampledSignal make_ho_ground_state(const GridSpec& grid);
SampledSignal make_constant(const GridSpec& grid);
SampledSignal make_gaussian_chirp(const GridSpec& grid, double c, double sigma);

// Dispatch by kind name; params as needed per kind:
//   delta(x0), plane_wave(xi0), chirp(c), ho_ground_state, constant,
//   gaussian_chirp(c, sigma)
SampledSignal make_test_signal(const GridSpec& grid, const std::string& kind,
                               const std::map<std::string, double>& params = {});

int snap_index(const GridSpec& grid, double x);  // round(x / dx)

// pi(z) f = M_xi T_x f. Translation is circular with nearest-grid-point
// snapping of both components (x to dx, xi to 1/L); |x| must be < L/2.
SampledSignal tf_shift(const SampledSignal& f, const PhasePoint& z);

SampledSignal fourier(const SampledSignal& f);
SampledSignal inverse_fourier(const SampledSignal& F);

// C-infinity step: 1 for t <= 0, 0 for t >= 1 (bump-integral profile).
double smooth_step_down(double t);
double smooth_step_down_deriv(double t);

// C-infinity spatial taper: 1 on |x| <= lo*L/2, 0 on |x| >= hi*L/2. The
// default support ends before the outer-2% band probed by boundary_mass, so
// tapered signals always pass that check.
SampledSignal apply_taper(const SampledSignal& f, double lo = 0.90, double hi = 0.975);

// Relative L2 mass in the outer 2% bands: |x| >= 0.98*L/2, |xi| >= 0.98*Nyquist.
struct BoundaryMass {
  double spatial = 0.0;
  double frequency = 0.0;
};
BoundaryMass boundary_mass(const SampledSignal& f);

}  // namespace gwf

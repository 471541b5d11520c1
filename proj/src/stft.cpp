#include "gwf/stft.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gwf/fft.hpp"

namespace gwf {

namespace {

constexpr int kColumnBlock = 256;  // keeps the batched FFT working set small

int checked_x_index(const GridSpec& grid, double x) {
  int m = snap_index(grid, x);
  if (std::abs(x - m * grid.dx()) > 1e-6 * grid.dx())
    throw std::invalid_argument("stft: lattice x-point is off-grid");
  return ((m % grid.n_points) + grid.n_points) % grid.n_points;
}

int checked_xi_index(const GridSpec& grid, double xi) {
  long k = std::lround(xi * grid.extent);
  if (std::abs(xi * grid.extent - static_cast<double>(k)) > 1e-6)
    throw std::invalid_argument("stft: lattice xi-point is off-grid");
  if (k < -grid.n_points / 2 || k >= grid.n_points / 2)
    throw std::invalid_argument("stft: lattice xi-point beyond Nyquist");
  return static_cast<int>(k) + grid.n_points / 2;
}

void check_lattice(const TFLattice& lat) {
  if (lat.x_points.size() == 0 || lat.xi_points.size() == 0)
    throw std::invalid_argument("stft: empty lattice");
}

}  // namespace

TFLattice full_lattice(const GridSpec& grid) {
  return TFLattice{grid.x_axis(), grid.xi_axis()};
}

TFLattice box_lattice(const GridSpec& grid, double x_radius, double xi_radius,
                      double stride) {
  if (!(stride > 0.0)) throw std::invalid_argument("box_lattice: stride must be positive");
  auto make_axis = [&](double radius, double cell) {
    // keep points strictly inside the radius, snapped onto multiples of `cell`
    long steps = std::lround(stride / cell);
    if (steps < 1 || std::abs(stride - steps * cell) > 1e-9 * cell)
      throw std::invalid_argument("box_lattice: stride is not a grid multiple");
    long k = static_cast<long>(std::ceil(radius / stride)) - 1;
    if (k < 0) throw std::invalid_argument("box_lattice: radius smaller than stride");
    RVec axis(2 * k + 1);
    for (long j = -k; j <= k; ++j) axis(j + k) = static_cast<double>(j * steps) * cell;
    return axis;
  };
  TFLattice lat{make_axis(x_radius, grid.dx()), make_axis(xi_radius, grid.dxi())};
  if (lat.x_points(lat.x_points.size() - 1) >= grid.extent / 2 ||
      lat.xi_points(lat.xi_points.size() - 1) >= grid.nyquist())
    throw std::invalid_argument("box_lattice: box exceeds the grid");
  return lat;
}

TFArray stft(const SampledSignal& f, const Window& g, const TFLattice& lat) {
  if (!(f.grid == g.signal.grid))
    throw std::invalid_argument("stft: signal and window grids differ");
  check_lattice(lat);
  const GridSpec& grid = f.grid;
  const int n = grid.n_points;
  const int nx = static_cast<int>(lat.x_points.size());
  const int nxi = static_cast<int>(lat.xi_points.size());

  std::vector<int> xi_idx(nxi);
  for (int k = 0; k < nxi; ++k) xi_idx[k] = checked_xi_index(grid, lat.xi_points(k));

  const double flip = ((n / 2) % 2 == 1) ? -1.0 : 1.0;
  TFArray out{grid, lat, CMat(nx, nxi), g.signal.label};

  CMat work(n, std::min(nx, kColumnBlock));
  for (int j0 = 0; j0 < nx; j0 += kColumnBlock) {
    const int b = std::min(kColumnBlock, nx - j0);
    if (work.cols() != b) work.resize(n, b);
    for (int j = 0; j < b; ++j) {
      const int m = checked_x_index(grid, lat.x_points(j0 + j));
      for (int v = 0; v < n; ++v) {
        int src = v - m;
        if (src < 0) src += n;
        cd val = f.values(v) * std::conj(g.signal.values(src));
        work(v, j) = (v & 1) ? -val : val;  // pre-twiddle for the centered DFT
      }
    }
    fft::dft_columns_inplace(work, fft::kForward);
    for (int j = 0; j < b; ++j)
      for (int k = 0; k < nxi; ++k) {
        int idx = xi_idx[k];
        double s = (idx & 1) ? -flip : flip;
        out.values(j0 + j, k) = grid.dx() * s * work(idx, j);
      }
  }
  return out;
}

TFArray stft_direct(const SampledSignal& f, const Window& g,
                    const TFLattice& lat) {
  if (!(f.grid == g.signal.grid))
    throw std::invalid_argument("stft: signal and window grids differ");
  check_lattice(lat);
  const GridSpec& grid = f.grid;
  const int n = grid.n_points;
  TFArray out{grid, lat, CMat(lat.x_points.size(), lat.xi_points.size()),
              g.signal.label};
  for (int j = 0; j < lat.x_points.size(); ++j) {
    const int m = checked_x_index(grid, lat.x_points(j));
    for (int k = 0; k < lat.xi_points.size(); ++k) {
      checked_xi_index(grid, lat.xi_points(k));
      cd acc = 0.0;
      for (int v = 0; v < n; ++v) {
        int src = v - m;
        if (src < 0) src += n;
        acc += f.values(v) * std::conj(g.signal.values(src)) *
               std::polar(1.0, -kTwoPi * lat.xi_points(k) * grid.x(v));
      }
      out.values(j, k) = grid.dx() * acc;
    }
  }
  return out;
}

SampledSignal stft_adjoint(const TFArray& F, const Window& g) {
  const GridSpec& grid = F.grid;
  if (!(grid == g.signal.grid))
    throw std::invalid_argument("stft_adjoint: window grid differs");
  const int n = grid.n_points;
  const bool full = F.lattice.x_points.size() == n &&
                    F.lattice.xi_points.size() == n &&
                    (F.lattice.x_points - grid.x_axis()).cwiseAbs().maxCoeff() < 1e-9 &&
                    (F.lattice.xi_points - grid.xi_axis()).cwiseAbs().maxCoeff() < 1e-9;
  if (!full)
    throw std::invalid_argument(
        "stft_adjoint: partial lattice refused (inversion needs the full lattice)");

  const double flip = ((n / 2) % 2 == 1) ? -1.0 : 1.0;
  SampledSignal out{grid, CVec::Zero(n), F.window_label};
  CMat work(n, std::min(n, kColumnBlock));
  for (int j0 = 0; j0 < n; j0 += kColumnBlock) {
    const int b = std::min(kColumnBlock, n - j0);
    if (work.cols() != b) work.resize(n, b);
    for (int j = 0; j < b; ++j)
      for (int l = 0; l < n; ++l) {
        cd val = F.values(j0 + j, l);
        work(l, j) = (l & 1) ? -val : val;
      }
    fft::dft_columns_inplace(work, fft::kBackward);
    // column j now holds dxi * sum_l F(x_j, xi_l) e^{2 pi i xi_l v} up to the
    // centered-transform sign pattern; accumulate against the shifted window.
    const double scale = flip / (grid.dx() * n);
    for (int j = 0; j < b; ++j) {
      const int m = ((snap_index(grid, F.lattice.x_points(j0 + j)) % n) + n) % n;
      for (int v = 0; v < n; ++v) {
        int src = v - m;
        if (src < 0) src += n;
        double s = (v & 1) ? -scale : scale;
        out.values(v) += s * work(v, j) * g.signal.values(src);
      }
    }
  }
  out.values *= grid.dx();
  return out;
}

WindowChangeReport window_change_check(const SampledSignal& f, const Window& g0,
                                       const Window& g1, const Window& gamma) {
  const GridSpec& grid = f.grid;
  WindowChangeReport rep;
  rep.pair_inner_abs = std::abs(inner(gamma.signal, g1.signal));
  if (rep.pair_inner_abs <= 1e-8)
    throw std::invalid_argument(
        "window_change_check: degenerate pair, |<gamma, g1>| <= 1e-8");

  const int n = grid.n_points;
  TFLattice lat = full_lattice(grid);
  RMat lhs = stft(f, g0, lat).values.cwiseAbs();
  RMat a = stft(f, g1, lat).values.cwiseAbs();
  RMat b = stft(gamma.signal, g0, lat).values.cwiseAbs();

  // zero-padded linear convolution on the doubled lattice
  const int p = 2 * n;
  CMat A = CMat::Zero(p, p), B = CMat::Zero(p, p);
  A.topLeftCorner(n, n) = a.cast<cd>();
  B.topLeftCorner(n, n) = b.cast<cd>();
  fft::dft2_inplace(A, fft::kForward);
  fft::dft2_inplace(B, fft::kForward);
  A = A.cwiseProduct(B);
  fft::dft2_inplace(A, fft::kBackward);
  const double cell = grid.dx() * grid.dxi() / (static_cast<double>(p) * p);

  rep.max_lhs = lhs.maxCoeff();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double rhs = cell * A(i + n / 2, j + n / 2).real() / rep.pair_inner_abs;
      rep.max_violation = std::max(rep.max_violation, lhs(i, j) - rhs);
    }
  rep.max_violation = std::max(rep.max_violation, 0.0);
  return rep;
}

}  // namespace gwf

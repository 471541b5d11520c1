#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

#include "gwf/core.hpp"

using namespace gwf;

namespace {

CVec random_signal(const GridSpec& grid, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  CVec v(grid.n_points);
  for (int i = 0; i < grid.n_points; ++i) v(i) = cd(gauss(rng), gauss(rng));
  return v;
}

}  // namespace

TEST_CASE("grid validation and axes") {
  CHECK_THROWS_AS(make_grid(0, 16.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(100, 16.0), std::invalid_argument);  // not a power of two
  CHECK_THROWS_AS(make_grid(4, 16.0), std::invalid_argument);    // below minimum
  CHECK_THROWS_AS(make_grid(256, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(256, -2.0), std::invalid_argument);

  GridSpec g = make_grid(256, 16.0);
  CHECK(g.dx() == doctest::Approx(16.0 / 256).epsilon(1e-15));
  CHECK(g.dxi() == doctest::Approx(1.0 / 16.0).epsilon(1e-15));
  CHECK(g.nyquist() == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(g.x(128) == 0.0);            // center index
  CHECK(g.x(0) == -8.0);             // left edge
  CHECK(g.xi(128) == 0.0);
  RVec xs = g.x_axis(), xis = g.xi_axis();
  REQUIRE(xs.size() == 256);
  CHECK(xs(1) - xs(0) == doctest::Approx(g.dx()).epsilon(1e-15));
  CHECK(xis(255) == doctest::Approx(g.nyquist() - g.dxi()).epsilon(1e-12));
}

TEST_CASE("gaussian window values and norms") {
  GridSpec g = make_grid(1024, 32.0);
  Window w = make_gaussian_window(g);
  CHECK(w.signal.values(512).real() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(w.signal.values(512).imag() == 0.0);
  // continuum norm: integral of e^{-2 pi x^2} is 2^{-1/2}
  CHECK(w.l2_norm == doctest::Approx(std::pow(2.0, -0.25)).epsilon(1e-8));
  CHECK(l2_norm(w.signal) == doctest::Approx(w.l2_norm).epsilon(1e-12));

  Window wn = make_gaussian_window(g, true);
  CHECK(wn.l2_norm == doctest::Approx(1.0).epsilon(1e-12));

  Window h = make_hermite_window(g);
  CHECK(h.l2_norm == doctest::Approx(1.0).epsilon(1e-12));
  // odd function: value at the center is zero
  CHECK(std::abs(h.signal.values(512)) <= 1e-14);

  SampledSignal zero{g, CVec::Zero(g.n_points), "zero"};
  CHECK_THROWS_AS(make_window(zero), std::invalid_argument);
}

TEST_CASE("elementary signals") {
  GridSpec g = make_grid(512, 16.0);

  SampledSignal d = make_delta(g, 0.0);
  cd mass = d.values.sum() * g.dx();
  CHECK(std::abs(mass - 1.0) <= 1e-12);

  SampledSignal c = make_chirp(g, 1.0);
  CHECK(std::abs(c.values(256) - 1.0) <= 1e-15);
  CHECK(std::abs(std::abs(c.values(100)) - 1.0) <= 1e-12);

  SampledSignal gs = make_ho_ground_state(g);
  CHECK(l2_norm(gs) == doctest::Approx(1.0).epsilon(1e-8));

  SampledSignal pw = make_plane_wave(g, 2.0);
  CHECK(std::abs(std::abs(pw.values(17)) - 1.0) <= 1e-12);

  CHECK(make_constant(g).values(3) == cd(1.0, 0.0));

  // dispatch by name, including required-parameter enforcement
  SampledSignal d2 = make_test_signal(g, "delta", {{"x0", 1.0}});
  CHECK(std::abs(d2.values(256 + 32) * g.dx() - 1.0) <= 1e-12);
  CHECK_THROWS_AS(make_test_signal(g, "no_such_kind", {}), std::invalid_argument);
  CHECK_THROWS_AS(make_test_signal(g, "plane_wave", {}), std::invalid_argument);
}

TEST_CASE("tf_shift basics and unitarity") {
  GridSpec g = make_grid(256, 16.0);
  SampledSignal f{g, random_signal(g, 11), "rand"};

  SampledSignal same = tf_shift(f, {0.0, 0.0});
  CHECK((same.values - f.values).cwiseAbs().maxCoeff() <= 1e-15);

  SampledSignal d = make_delta(g, 0.0);
  SampledSignal moved = tf_shift(d, {1.5, 0.0});
  int idx = 128 + snap_index(g, 1.5);
  CHECK(std::abs(moved.values(idx) - cd(1.0 / g.dx(), 0.0)) <= 1e-12);

  SampledSignal shifted = tf_shift(f, {2.25, 1.5});
  CHECK(l2_norm(shifted) == doctest::Approx(l2_norm(f)).epsilon(1e-12));

  CHECK_THROWS_AS(tf_shift(f, {8.0, 0.0}), std::out_of_range);
  CHECK_THROWS_AS(tf_shift(f, {0.0, 8.0}), std::out_of_range);
}

TEST_CASE("commutation phase of modulation and translation") {
  GridSpec g = make_grid(256, 16.0);
  SampledSignal f{g, random_signal(g, 5), "rand"};
  const double x0 = 1.25, eta = 0.75;  // both on-grid

  SampledSignal lhs = tf_shift(f, {x0, eta});                      // M T f
  SampledSignal rhs = tf_shift(tf_shift(f, {0.0, eta}), {x0, 0.0});  // T M f
  cd phase = std::exp(cd(0.0, kTwoPi * x0 * eta));
  CHECK((lhs.values - phase * rhs.values).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("fourier closed forms and roundtrip") {
  GridSpec g = make_grid(1024, 32.0);

  Window w = make_gaussian_window(g);
  SampledSignal F = fourier(w.signal);
  double worst = 0.0;
  for (int k = 0; k < g.n_points; ++k) {
    double xi = g.xi(k);
    if (std::abs(xi) > 8.0) continue;
    worst = std::max(worst, std::abs(F.values(k) - std::exp(-kPi * xi * xi)));
  }
  CHECK(worst <= 1e-8);

  SampledSignal d = make_delta(g, 0.0);
  SampledSignal Fd = fourier(d);
  CHECK((Fd.values.array() - 1.0).abs().maxCoeff() <= 1e-10);

  SampledSignal pw = make_plane_wave(g, 2.0);
  SampledSignal Fpw = fourier(pw);
  int k0 = 512 + 64;  // xi = 2 on this grid
  CHECK(std::abs(Fpw.values(k0) - cd(1.0 / g.dxi(), 0.0)) <= 1e-9 / g.dxi());
  Fpw.values(k0) = 0.0;
  CHECK(Fpw.values.cwiseAbs().maxCoeff() <= 1e-9 / g.dxi());

  SampledSignal f{g, random_signal(g, 42), "rand"};
  SampledSignal back = inverse_fourier(fourier(f));
  CHECK((back.values - f.values).cwiseAbs().maxCoeff() / f.values.cwiseAbs().maxCoeff() <= 1e-12);

  // Plancherel under the dx / dxi quadrature weights
  double lhs = l2_norm(f);
  SampledSignal Ff = fourier(f);
  double rhs = std::sqrt(Ff.values.squaredNorm() * g.dxi());
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("inner product conventions") {
  GridSpec g = make_grid(256, 16.0);
  SampledSignal f{g, random_signal(g, 1), "f"};
  SampledSignal h{g, random_signal(g, 2), "h"};
  cd a = inner(f, h), b = inner(h, f);
  CHECK(std::abs(a - std::conj(b)) <= 1e-12 * std::abs(a));
  CHECK(std::abs(inner(f, f).real() - l2_norm(f) * l2_norm(f)) <= 1e-12);
  CHECK(std::abs(inner(f, f).imag()) <= 1e-14 * std::abs(inner(f, f).real()));
}

TEST_CASE("smooth step profile") {
  CHECK(smooth_step_down(-0.5) == 1.0);
  CHECK(smooth_step_down(0.0) == 1.0);
  CHECK(smooth_step_down(1.0) == 0.0);
  CHECK(smooth_step_down(2.0) == 0.0);
  CHECK(smooth_step_down(0.5) == doctest::Approx(0.5).epsilon(1e-9));

  double prev = 1.0;
  for (int i = 1; i <= 40; ++i) {
    double v = smooth_step_down(i / 40.0);
    CHECK(v <= prev + 1e-15);
    prev = v;
  }

  // derivative consistent with a central difference
  for (double t : {0.2, 0.5, 0.8}) {
    const double h = 1e-6;
    double fd = (smooth_step_down(t + h) - smooth_step_down(t - h)) / (2 * h);
    CHECK(smooth_step_down_deriv(t) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("taper support and boundary mass") {
  GridSpec g = make_grid(1024, 64.0);
  SampledSignal one = make_constant(g);
  SampledSignal tapered = apply_taper(one);
  for (int n = 0; n < g.n_points; ++n) {
    double ax = std::abs(g.x(n));
    if (ax <= 0.90 * 32.0) CHECK(tapered.values(n) == cd(1.0, 0.0));
    if (ax >= 0.975 * 32.0) CHECK(tapered.values(n) == cd(0.0, 0.0));
  }
  BoundaryMass bm = boundary_mass(tapered);
  CHECK(bm.spatial == 0.0);
  CHECK(bm.frequency <= 1e-8);

  // a bare impulse is flat in frequency: the outer-2% band holds ~2% of mass
  BoundaryMass bd = boundary_mass(make_delta(g, 0.0));
  CHECK(bd.spatial == 0.0);
  CHECK(bd.frequency == doctest::Approx(0.02).epsilon(0.15));

  CHECK_THROWS_AS(apply_taper(one, 0.9, 0.8), std::invalid_argument);
}

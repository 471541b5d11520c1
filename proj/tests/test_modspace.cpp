#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

#include "gwf/core.hpp"
#include "gwf/modspace.hpp"

using namespace gwf;

TEST_CASE("modulation norm basics") {
  GridSpec g = make_grid(256, 16.0);
  Window w = make_gaussian_window(g);

  SampledSignal zero{g, CVec::Zero(g.n_points), "zero"};
  CHECK(mod_norm(zero, w, {0.0, 2.0}) == 0.0);

  // p = 2, r = 0 collapses to the Moyal identity
  SampledSignal f = make_ho_ground_state(g);
  CHECK(mod_norm(f, w, {0.0, 2.0}) ==
        doctest::Approx(w.l2_norm * l2_norm(f)).epsilon(1e-6));

  // the sup norm of V_g(delta) is the window maximum
  SampledSignal d = make_delta(g, 0.0);
  double inf = std::numeric_limits<double>::infinity();
  CHECK(mod_norm(d, w, {0.0, inf}) == doctest::Approx(1.0).epsilon(1e-10));

  CHECK_THROWS_AS(mod_norm(f, w, {0.0, 0.5}), std::invalid_argument);
}

TEST_CASE("modulation norm is monotone in the weight order") {
  GridSpec g = make_grid(256, 16.0);
  Window w = make_gaussian_window(g);
  SampledSignal f = make_gaussian_chirp(g, 1.0, 2.0);
  double n0 = mod_norm(f, w, {-1.0, 2.0});
  double n1 = mod_norm(f, w, {0.0, 2.0});
  double n2 = mod_norm(f, w, {1.5, 2.0});
  CHECK(n0 <= n1);
  CHECK(n1 <= n2);
}

TEST_CASE("peetre weight moderation") {
  CHECK(peetre_weight(0.0, 0.0) == 1.0);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uni(-20.0, 20.0);
  for (int trial = 0; trial < 200; ++trial) {
    double zx = uni(rng), zxi = uni(rng), wx = uni(rng), wxi = uni(rng);
    for (double q : {-2.0, 1.0, 3.0}) {
      double lhs = std::pow(peetre_weight(zx + wx, zxi + wxi), q);
      double rhs = std::pow(peetre_weight(zx, zxi), std::abs(q)) *
                   std::pow(peetre_weight(wx, wxi), q);
      CHECK(lhs <= rhs * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("bump profile endpoints") {
  CHECK(bump_phi(0.0) == 1.0);
  CHECK(bump_phi(1.0) == 1.0);
  CHECK(bump_phi(2.0) == 0.0);
  CHECK(bump_phi(5.0) == 0.0);
  double mid = bump_phi(1.5);
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);
}

TEST_CASE("symbol constructors") {
  SymbolSampler s3 = make_sin_mu_symbol(3.0);
  CHECK(std::abs(s3.evaluator(kPi / 2, 0.7) - 1.0) <= 1e-12);
  CHECK(s3.separable());
  CHECK(s3.period_x == doctest::Approx(kPi).epsilon(1e-12));
  CHECK_THROWS_AS(make_sin_mu_symbol(1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_sin_mu_symbol(0.5), std::invalid_argument);

  auto [a, sigma] = make_example4_split();
  auto h = [](double x, double xi) {
    return std::sqrt(x * x * x * x + xi * xi * xi * xi);
  };
  for (double x : {0.3, 1.2, -2.5, 4.0})
    for (double xi : {0.0, 0.9, -3.1}) {
      cd sum = a.evaluator(x, xi) + sigma.evaluator(x, xi);
      CHECK(std::abs(sum - h(x, xi)) <= 1e-12 * (1.0 + h(x, xi)));
    }
  // sigma lives in |z| <= 2; a agrees with h exactly outside
  CHECK(std::abs(sigma.evaluator(2.1, 0.0)) == 0.0);
  CHECK(std::abs(sigma.evaluator(1.8, 1.2)) == 0.0);
  CHECK(std::abs(a.evaluator(3.0, -1.0) - h(3.0, -1.0)) == 0.0);
  // and a vanishes inside the unit ball where the cutoff is total
  CHECK(std::abs(a.evaluator(0.5, 0.3)) == 0.0);
}

TEST_CASE("decay fit on synthetic power law") {
  // shells start at r = 4 where <r>^{-3} is already close to r^{-3}; the
  // lowest dyadic shells would drag the slope visibly below 3, and the
  // remaining <r>-vs-r curvature still biases it a few percent low
  const int n = 400;
  RVec radii(n), values(n);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uni(4.0, 64.0);
  for (int i = 0; i < n; ++i) {
    double r = i < 4 ? std::ldexp(1.0, 2 + i) : uni(rng);  // pin shell edges
    radii(i) = r;
    values(i) = std::pow(1.0 + r * r, -1.5);  // <r>^{-3}
  }
  DecayFit fit = fit_decay(radii, values, 2, 5);
  CHECK(fit.exponent_hat == doctest::Approx(3.0).epsilon(0.15 / 3.0));
  CHECK(fit.constant_hat > 0.0);
  // the envelope dominates every sample
  for (int i = 0; i < n; ++i)
    CHECK(values(i) <=
          fit.constant_hat * std::pow(1.0 + radii(i) * radii(i), -fit.exponent_hat / 2) + 1e-12);
  CHECK_FALSE(fit.superpolynomial);
}

TEST_CASE("decay fit flags super-polynomial decay") {
  const int n = 600;
  RVec radii(n), values(n);
  for (int i = 0; i < n; ++i) {
    double r = 1.0 + (31.0 * i) / (n - 1);
    radii(i) = r;
    values(i) = std::exp(-r);
  }
  DecayFit fit = fit_decay(radii, values, 0, 4);
  CHECK(fit.superpolynomial);
  CHECK(fit.exponent_hat > 3.0);
}

TEST_CASE("decay fit rejects degenerate input") {
  RVec radii(10), values(10);
  for (int i = 0; i < 10; ++i) { radii(i) = 1.0 + 3.0 * i; values(i) = 0.0; }
  CHECK_THROWS_AS(fit_decay(radii, values, 0, 4), std::runtime_error);

  RVec r2(3), v2(3);
  r2 << 1.0, 2.0, 4.0;
  v2 << 1.0, 0.5, 0.2;
  CHECK_THROWS_AS(fit_decay(r2, v2, 0, 2), std::invalid_argument);  // < 4 shells

  // a shell with no samples in range
  RVec r3(8), v3(8);
  r3 << 1.1, 1.2, 2.2, 2.4, 4.5, 4.7, 9.0, 9.5;  // nothing in [16, 32)
  for (int i = 0; i < 8; ++i) v3(i) = 1.0 / (1.0 + r3(i));
  CHECK_THROWS_AS(fit_decay(r3, v3, 0, 4), std::runtime_error);
}

TEST_CASE("symbol scan of the constant symbol") {
  SymbolSampler one = make_potential_symbol([](double) { return 1.0; }, "smooth");
  SymbolSupParams params;
  SymbolSupScan scan = symbol_stft_sup(one, params);
  CHECK(scan.mode == "separable-1d");
  REQUIRE(scan.radii.size() > 0);
  // the 1-d scan of the constant is the window's own fourier transform
  double worst = 0.0;
  for (int i = 0; i < scan.radii.size(); ++i) {
    double r = scan.radii(i);
    if (r > 6.0) continue;  // below double-precision underflow of the target
    double expect = std::pow(2.0, 0.25) * std::exp(-kPi * r * r);
    worst = std::max(worst, std::abs(scan.values(i) - expect));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("symbol scan of the cubed sine potential") {
  SymbolSupScan scan = symbol_stft_sup(make_sin_mu_symbol(3.0), SymbolSupParams{});
  DecayFit fit = fit_decay(scan.radii, scan.values, 2, 6);  // shells 4 .. 128
  CHECK(fit.exponent_hat >= 3.5);
  CHECK(fit.exponent_hat <= 4.5);
}

TEST_CASE("symbol scan of a schwartz potential is super-polynomial") {
  SymbolSampler gs = make_potential_symbol(
      [](double x) { return std::exp(-kPi * x * x); }, "schwartz");
  SymbolSupScan scan = symbol_stft_sup(gs, SymbolSupParams{});
  DecayFit fit = fit_decay(scan.radii, scan.values, -1, 2);  // shells 0.5 .. 8
  CHECK(fit.superpolynomial);
}

TEST_CASE("symbol scan of the homogeneous cutoff symbol") {
  SymbolSupScan scan = symbol_stft_sup(make_homog_cutoff_symbol(), SymbolSupParams{});
  CHECK(scan.mode == "dense-2d");
  DecayFit fit = fit_decay(scan.radii, scan.values, 1, 4);  // shells 2 .. 32
  CHECK(fit.exponent_hat >= 3.5);
}

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "gwf/core.hpp"
#include "gwf/flow.hpp"
#include "gwf/stft.hpp"
#include "gwf/wavefront.hpp"

using namespace gwf;

namespace {

GridSpec wf_grid() { return make_grid(16384, 128.0); }

int bin_of(double angle, int n_bins) {
  double a = std::fmod(angle, kTwoPi);
  if (a < 0) a += kTwoPi;
  return static_cast<int>(a / (kTwoPi / n_bins)) % n_bins;
}

// every in-bin of est lies within slack bins of the target angle or its antipode
void check_two_sided_arc(const WFEstimate& est, double angle, int slack) {
  const int n = static_cast<int>(est.bins.size());
  std::vector<int> in = est.in_bins();
  REQUIRE(!in.empty());
  int b0 = bin_of(angle, n), b1 = bin_of(angle + kPi, n);
  bool saw0 = false, saw1 = false;
  for (int b : in) {
    int d0 = std::min(std::abs(b - b0), n - std::abs(b - b0));
    int d1 = std::min(std::abs(b - b1), n - std::abs(b - b1));
    CHECK(std::min(d0, d1) <= slack);
    saw0 = saw0 || d0 <= slack;
    saw1 = saw1 || d1 <= slack;
  }
  CHECK(saw0);
  CHECK(saw1);
}

WFEstimate synthetic(int n_bins, const std::vector<int>& in) {
  WFEstimate est;
  est.bins.resize(n_bins);
  for (int i = 0; i < n_bins; ++i)
    est.bins[i].angle = (i + 0.5) * kTwoPi / n_bins;
  for (int b : in) est.bins[b].in_wf = true;
  return est;
}

}  // namespace

TEST_CASE("cone shell profiles of the delta transform") {
  GridSpec g = wf_grid();
  Window w = make_gaussian_window(g);
  TFArray F = stft(make_delta(g, 0.0), w, box_lattice(g, 32.0, 32.0, 0.5));

  ConeProfile along_x = cone_shell_profile(F, {RVec{{1.0, 0.0}}, 0.3},
                                           std::numeric_limits<double>::infinity(), 0.0);
  REQUIRE(along_x.shell_vals.size() == 4);  // shells [2,4) .. [16,32)
  CHECK(along_x.shell_vals(0) <= 4e-6);  // e^{-pi 2^2} at the inner shell edge
  CHECK(along_x.shell_vals(1) <= 1e-20);
  CHECK(along_x.shell_vals(1) <= along_x.shell_vals(0));

  ConeProfile along_xi = cone_shell_profile(F, {RVec{{0.0, 1.0}}, 0.3},
                                            std::numeric_limits<double>::infinity(), 0.0);
  for (int m = 0; m < along_xi.shell_vals.size(); ++m)
    CHECK(along_xi.shell_vals(m) == doctest::Approx(1.0).epsilon(1e-10));

  TFArray zero = F;
  zero.values.setZero();
  ConeProfile empty = cone_shell_profile(zero, {RVec{{0.0, 1.0}}, 0.3},
                                         std::numeric_limits<double>::infinity(), 0.0);
  CHECK(empty.shell_vals.cwiseAbs().maxCoeff() == 0.0);

  // a cone narrower than the lattice's angular resolution has empty shells
  CHECK_THROWS_AS(cone_shell_profile(F, {RVec{{std::sqrt(0.5), std::sqrt(0.5)}}, 1e-4},
                                     std::numeric_limits<double>::infinity(), 0.0),
                  std::runtime_error);

  TFArray small = stft(make_delta(g, 0.0), w, box_lattice(g, 8.0, 8.0, 0.5));
  CHECK_THROWS_AS(cone_shell_profile(small, {RVec{{0.0, 1.0}}, 0.3},
                                     std::numeric_limits<double>::infinity(), 0.0),
                  std::invalid_argument);
}

TEST_CASE("wavefront of the elementary signals") {
  GridSpec g = wf_grid();
  Window w = make_gaussian_window(g);
  WFParams params;

  WFEstimate d = estimate_wf(make_delta(g, 0.0), w, params);
  check_two_sided_arc(d, kPi / 2, 1);
  CHECK(d.in_bins().size() <= 6);

  WFEstimate pw = estimate_wf(make_plane_wave(g, 2.0), w, params);
  check_two_sided_arc(pw, 0.0, 1);

  WFEstimate ch = estimate_wf(apply_taper(make_chirp(g, 2.0)), w, params);
  check_two_sided_arc(ch, std::atan2(2.0, 1.0), 1);
}

TEST_CASE("smooth signals have empty wavefront") {
  GridSpec g = wf_grid();
  Window w = make_gaussian_window(g);
  WFParams params;
  CHECK(estimate_wf(make_ho_ground_state(g), w, params).in_bins().empty());
  SampledSignal gauss = make_gaussian_window(g).signal;
  CHECK(estimate_wf(gauss, w, params).in_bins().empty());
}

TEST_CASE("weighted mode agrees on the delta") {
  GridSpec g = wf_grid();
  Window w = make_gaussian_window(g);
  WFParams params;
  params.mode = "weighted";
  params.p = 2.0;
  params.r = 1.0;
  WFEstimate d = estimate_wf(make_delta(g, 0.0), w, params);
  check_two_sided_arc(d, kPi / 2, 1);
  std::vector<int> in = d.in_bins();
  CHECK(std::find(in.begin(), in.end(), 0) == in.end());
  CHECK(std::find(in.begin(), in.end(), 32) == in.end());
}

TEST_CASE("shift invariance of the estimated set") {
  GridSpec g = wf_grid();
  Window w = make_gaussian_window(g);
  WFParams params;
  WFEstimate base = estimate_wf(make_delta(g, 0.0), w, params);
  WFEstimate moved = estimate_wf(tf_shift(make_delta(g, 0.0), {1.5, 1.0}), w, params);
  CHECK(base.in_bins() == moved.in_bins());

  SampledSignal c = apply_taper(make_chirp(g, 1.0));
  WFEstimate cb = estimate_wf(c, w, params);
  WFEstimate cm = estimate_wf(tf_shift(c, {1.5, 1.0}), w, params);
  CHECK(cb.in_bins() == cm.in_bins());
}

TEST_CASE("truncation guard fires only when both bands load") {
  GridSpec g = wf_grid();
  Window w = make_gaussian_window(g);
  WFParams params;

  // a plane wave at 98.4% of Nyquist fills the frequency band; being constant
  // in x it fills the spatial band too
  CHECK_THROWS_AS(estimate_wf(make_plane_wave(g, 63.0), w, params), std::runtime_error);

  // an interior plane wave only loads the spatial band: flagged, not fatal
  WFEstimate pw = estimate_wf(make_plane_wave(g, 2.0), w, params);
  bool spatial_flag = false;
  for (const std::string& f : pw.flags) spatial_flag |= f == "boundary_spatial";
  CHECK(spatial_flag);
}

TEST_CASE("microlocality of a smooth multiplier") {
  GridSpec g = wf_grid();
  Window w = make_gaussian_window(g);
  WFParams params;
  SampledSignal f = apply_taper(make_chirp(g, 1.0));
  SampledSignal mf = f;
  for (int n = 0; n < g.n_points; ++n)
    mf.values(n) *= 2.0 + std::sin(g.x(n));

  std::vector<int> base = estimate_wf(f, w, params).in_bins();
  std::vector<int> mapped = estimate_wf(mf, w, params).in_bins();
  const int n_bins = params.n_bins;
  for (int b : mapped) {
    int best = n_bins;
    for (int a : base)
      best = std::min(best, std::min(std::abs(b - a), n_bins - std::abs(b - a)));
    CHECK(best <= 1);
  }
}

TEST_CASE("mapping estimates through flows") {
  GridSpec g = wf_grid();
  Window w = make_gaussian_window(g);
  WFParams params;
  WFEstimate d = estimate_wf(make_delta(g, 0.0), w, params);

  WFEstimate same = map_wf(d, make_free_flow(0.0));
  CHECK(same.in_bins() == d.in_bins());

  // free flow tilts the vertical delta directions toward (4 pi t, 1)
  const double t = 0.25;
  WFEstimate pushed = map_wf(d, make_free_flow(t));
  check_two_sided_arc(pushed, std::atan2(1.0, 4.0 * kPi * t), 2);

  WFEstimate pw = estimate_wf(make_plane_wave(g, 2.0), w, params);
  WFEstimate rotated = map_wf(pw, make_ho_flow(0.7));
  check_two_sided_arc(rotated, 0.7, 2);
}

TEST_CASE("wavefront distance") {
  WFEstimate a = synthetic(64, {10, 11});
  WFEstimate b = synthetic(64, {11, 12});
  const double binw = kTwoPi / 64;
  CHECK(wf_distance(a, a) == 0.0);
  CHECK(wf_distance(a, b) == doctest::Approx(binw).epsilon(1e-12));

  WFEstimate axes_xi = synthetic(64, {16, 48});
  WFEstimate axes_x = synthetic(64, {0, 32});
  CHECK(wf_distance(axes_xi, axes_x) ==
        doctest::Approx(kPi / 2).epsilon(2.0 * binw / (kPi / 2)));

  WFEstimate empty = synthetic(64, {});
  CHECK(wf_distance(empty, empty) == 0.0);
  CHECK(wf_distance(empty, a) == doctest::Approx(kPi).epsilon(1e-12));

  WFEstimate other = synthetic(32, {1});
  CHECK_THROWS_AS(wf_distance(a, other), std::invalid_argument);
}

TEST_CASE("arc extraction merges adjacent bins circularly") {
  WFEstimate est = synthetic(64, {0, 1, 2, 63, 30, 31});
  auto arcs = est.arcs();
  REQUIRE(arcs.size() == 2);
  // the wrap-around run is reported once, starting at bin 63
  bool wrap = false, mid = false;
  for (auto [first, last] : arcs) {
    if (first == 63 && last == 2) wrap = true;
    if (first == 30 && last == 31) mid = true;
  }
  CHECK(wrap);
  CHECK(mid);
}

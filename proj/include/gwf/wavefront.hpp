#pragma once

// Gabor wave front set estimation in d = 1: the phase-space sphere is an
// angular partition of the circle into equal half-open bins, and a bin is in
// the wave front set when the STFT magnitude fails to decay along its cone.
// Smooth mode fits a polynomial exponent per cone; weighted mode tests
// geometric decay of weighted shell sums.

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gwf/core.hpp"
#include "gwf/flow.hpp"
#include "gwf/stft.hpp"

namespace gwf {

struct Cone {
  RVec direction;     // unit vector in R^2
  double half_angle;  // radians, in (0, pi/2]
};

struct WFParams {
  std::string mode = "smooth";  // "smooth" or "weighted"
  int n_bins = 64;
  int guard_bins = 1;          // cones get a guard band this many bins wide
  double inner_radius = 2.0;   // smallest dyadic shell edge
  double R_max = 32.0;         // estimation disk radius
  double r_threshold = 6.0;    // smooth mode: in WF iff exponent < threshold
  double p = std::numeric_limits<double>::infinity();
  double r = 0.0;
  double ratio_threshold = 0.9;  // weighted mode geometric-decay cutoff
  double floor_rel = 1e-4;       // cones below this relative floor are clean
  double stride = 0.5;           // phase-space sampling stride
};

struct WFBin {
  double angle = 0.0;  // bin center
  double score = 0.0;  // shell statistic relative to the global maximum
  double exponent_hat = std::numeric_limits<double>::infinity();
  bool in_wf = false;
};

struct WFEstimate {
  std::vector<WFBin> bins;
  double r_param = 0.0;
  double p_param = std::numeric_limits<double>::infinity();
  double inner_radius = 2.0;
  double R_max = 32.0;
  std::vector<std::string> flags;

  std::vector<int> in_bins() const;
  // maximal circular runs of adjacent in-WF bins, as [first, last] bin pairs
  std::vector<std::pair<int, int>> arcs() const;
};

struct ConeProfile {
  RVec shell_vals;  // per-dyadic-shell max (p = inf) or weighted sum
  int m_min = 1;
  double p = std::numeric_limits<double>::infinity();
  double r = 0.0;
};

// Shell statistics of |F| restricted to the cone, shells [2,4) ... [16,32).
// The lattice must reach radius 32 in both axis directions.
ConeProfile cone_shell_profile(const TFArray& F, const Cone& cone, double p,
                               double r);

WFEstimate estimate_wf(const SampledSignal& f, const Window& g,
                       const WFParams& params);

// Pushes every in-WF direction through w -> chi(R_hom w)/|chi(R_hom w)| and
// re-bins; scores and exponents follow their directions.
WFEstimate map_wf(const WFEstimate& est, const FlowMap& chi,
                  double R_hom = 100.0);

// Symmetric Hausdorff angular distance between the two in-WF bin-center sets;
// pi when exactly one set is empty, 0 when both are.
double wf_distance(const WFEstimate& a, const WFEstimate& b);

}  // namespace gwf

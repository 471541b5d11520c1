#pragma once

// Short-time Fourier transform on phase-space lattices:
//   V_g f(x, xi) = dx * sum_v f(v) conj(g(v - x)) e^{-2 pi i xi v}
// with translations taken circularly on the periodic grid. Lattice points must
// lie on the grid (x on the sample points, xi on multiples of 1/L).

#include <string>

#include "gwf/core.hpp"

namespace gwf {

struct TFLattice {
  RVec x_points;   // sorted, on-grid spatial points
  RVec xi_points;  // sorted, on-grid frequencies in [-Nyquist, Nyquist)
};

// All n spatial points crossed with all n frequencies of the grid.
TFLattice full_lattice(const GridSpec& grid);

// Symmetric box around the origin with the given stride; points are kept
// strictly inside the radii and snapped exactly onto the grid.
TFLattice box_lattice(const GridSpec& grid, double x_radius, double xi_radius,
                      double stride);

struct TFArray {
  GridSpec grid;
  TFLattice lattice;
  CMat values;  // indexed (x, xi): rows follow x_points, columns xi_points
  std::string window_label;
};

// FFT path: one length-n transform per lattice row.
TFArray stft(const SampledSignal& f, const Window& g, const TFLattice& lat);

// Direct quadrature reference (O(n^2) per row); for cross-checks at small n.
TFArray stft_direct(const SampledSignal& f, const Window& g,
                    const TFLattice& lat);

// Adjoint V_g^* as a Riemann sum. Requires the full lattice; on it,
// (1/||g||^2) V_g^* V_g is the identity to ~1e-9.
SampledSignal stft_adjoint(const TFArray& F, const Window& g);

struct WindowChangeReport {
  double pair_inner_abs = 0.0;  // |<gamma, g1>|
  double max_lhs = 0.0;         // max |V_{g0} f|
  double max_violation = 0.0;   // max over lattice of (lhs - rhs), clamped at 0
};

// Checks |V_{g0} f| <= (1/|<gamma,g1>|) (|V_{g1} f| * |V_{g0} gamma|) on the
// full lattice; the convolution is zero-padded (no wraparound).
WindowChangeReport window_change_check(const SampledSignal& f, const Window& g0,
                                       const Window& g1, const Window& gamma);

}  // namespace gwf

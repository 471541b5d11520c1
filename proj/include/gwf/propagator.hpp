#pragma once

// Schrödinger propagators e^{itH} for H = m(D) + V(x):
//  - exact Fourier-multiplier path for the free particle,
//  - Strang split-step for real potentials,
//  - dense spectral path (exact up to eigensolver accuracy) for reference
//    solutions and for e^{isA} conjugations,
//  - truncated Dyson series for bounded perturbations B of a solvable A.
// Batch variants treat matrix columns as independent states.

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "gwf/core.hpp"

namespace gwf {

struct EvolutionSpec {
  std::function<double(double)> kinetic_multiplier;  // m(xi)
  std::function<cd(double)> potential;               // V(x)
  bool has_pseudo_perturbation = false;  // split-step refuses when set
  double t = 0.0;
  int n_steps = 0;  // must be >= max(1, ceil(|t| * 200))
};

EvolutionSpec make_ho_spec(double t, int n_steps);
// V = pi x^2 + coupling |sin x|^mu
EvolutionSpec make_perturbed_ho_spec(double t, int n_steps, double coupling,
                                     double mu = 3.0);

SampledSignal evolve_exact_free(const SampledSignal& u0, double t);

SampledSignal evolve_split_step(const SampledSignal& u0,
                                const EvolutionSpec& spec);
CMat evolve_split_step_batch(const GridSpec& grid, const CMat& u0,
                             const EvolutionSpec& spec);
// Snapshots are taken after the listed step counts (each must be in
// [1, n_steps]); the map holds the completed Strang state at those steps.
std::map<long, CMat> evolve_split_step_snapshots(
    const GridSpec& grid, const CMat& u0, const EvolutionSpec& spec,
    const std::vector<long>& snapshot_steps);

// Fourier multiplier exp(i t e^{-2 pi i x0 xi}); x0 must be on-grid. Not
// unitary: the multiplier modulus is e^{t sin(2 pi x0 xi)}.
SampledSignal evolve_translation_potential(const SampledSignal& u0, double t,
                                           double x0);

// Dense H = m(D) + V(x) on the grid, diagonalized once; apply() is exactly
// unitary for real V.
class SpectralPropagator {
 public:
  SpectralPropagator(const GridSpec& grid,
                     const std::function<double(double)>& m_of_xi,
                     const std::function<double(double)>& v_of_x);

  const GridSpec& grid() const { return grid_; }
  const RVec& eigenvalues() const { return lam_; }

  CVec apply(const CVec& u, double t) const;            // e^{itH} u
  CMat apply_batch(const CMat& u, double t) const;
  CMat apply_at_times(const CMat& u, const RVec& times) const;  // per column

 private:
  GridSpec grid_;
  RVec lam_;
  CMat eigvecs_;
};

std::shared_ptr<const SpectralPropagator> get_cached_ho_propagator(
    const GridSpec& grid);
std::shared_ptr<const SpectralPropagator> get_cached_perturbed_propagator(
    const GridSpec& grid, double coupling);

// Evolution handle abstracting "apply e^{itA}" for the Dyson path and the
// Gabor-matrix sampler.
struct TimeEvolution {
  std::string label;
  std::function<CMat(const CMat&, double)> apply;
  std::function<CMat(const CMat&, const RVec&)> apply_at_times;
};

TimeEvolution free_evolution(const GridSpec& grid);
TimeEvolution spectral_evolution(std::shared_ptr<const SpectralPropagator> p);
TimeEvolution identity_evolution();

// Bounded operator acting columnwise on a batch.
using OperatorHandle = std::function<CMat(const CMat&)>;

OperatorHandle multiplication_operator(const GridSpec& grid,
                                       const std::function<cd(double)>& b);
OperatorHandle modulation_operator(const GridSpec& grid, double xi0);

// B(s) = e^{-isA} B e^{isA}
OperatorHandle conjugated_perturbation(const OperatorHandle& B, double s,
                                       const TimeEvolution& A);

enum class EvolutionContext { kFreeParticle, kHarmonicOscillator };
OperatorHandle conjugated_perturbation(const OperatorHandle& B, double s,
                                       EvolutionContext ctx,
                                       const GridSpec& grid);

struct DysonSpec {
  int n_terms = 3;               // in [0, 4]
  int quad_points_per_level = 16;  // >= 8
};

struct DysonResult {
  SampledSignal u;                 // e^{itA} Q(t) u0
  std::vector<double> term_norms;  // ||G_n(t)||_2, n = 0..n_terms
  double norm_change = 0.0;        // ||u|| / ||u0|| - 1 (non-unitarity record)
};

// Truncated interaction-picture series Q(t) = sum_n i^n G_n(t) with
// G_n(s) = int_0^s B(r) G_{n-1}(r) dr, iterated trapezoid on a shared grid.
DysonResult dyson_phillips_apply(const SampledSignal& u0, double t,
                                 const TimeEvolution& A,
                                 const OperatorHandle& B,
                                 const DysonSpec& spec);

}  // namespace gwf

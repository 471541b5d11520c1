#pragma once

// Hamiltonian phase-space flows chi_t solving
//   2 pi x' = -grad_xi a(x, xi),  2 pi xi' = grad_x a(x, xi)
// with closed forms for the free particle and the harmonic oscillator and a
// fixed-step RK4 integrator for general degree-2-homogeneous symbols. States
// are stacked (x_1..x_d, xi_1..xi_d).

#include <functional>
#include <string>
#include <vector>

#include "gwf/core.hpp"

namespace gwf {

struct HamiltonianSpec {
  int dim = 1;
  std::function<double(const RVec&)> eval;  // symbol a(z)
  std::function<RVec(const RVec&)> grad;    // exact gradient of a
  double homogeneity_degree = 2.0;
  double cutoff_radius = 0.0;  // symbol smoothed inside this radius
  std::string label;
};

HamiltonianSpec make_free_hamiltonian(int dim = 1);  // a = -4 pi^2 |xi|^2
HamiltonianSpec make_ho_hamiltonian(int dim = 1);    // a = pi (|x|^2 + |xi|^2)
// (1 - phi(|z|)) (x^4 + xi^4)^{1/2} with the standard bump phi; d = 1
HamiltonianSpec make_quartic_hamiltonian();

struct HamiltonianValidation {
  double max_homogeneity_dev = 0.0;  // relative, on rays with |z| >= cutoff
  double max_gradient_dev = 0.0;     // relative, versus central differences
};

HamiltonianValidation validate_hamiltonian(const HamiltonianSpec& spec,
                                           const std::vector<RVec>& points);

enum class FlowKind { kClosedFormFree, kClosedFormHO, kNumeric };

struct FlowMap {
  FlowKind kind = FlowKind::kClosedFormFree;
  double t = 0.0;
  double step = 1e-3;  // numeric kind only; must be <= 1e-2
  HamiltonianSpec spec;
  int dim() const { return kind == FlowKind::kNumeric ? spec.dim : dim_; }
  int dim_ = 1;
};

FlowMap make_free_flow(double t, int dim = 1);
FlowMap make_ho_flow(double t, int dim = 1);
FlowMap make_numeric_flow(const HamiltonianSpec& spec, double t,
                          double step = 1e-3);

RVec flow_apply(const FlowMap& chi, const RVec& w);
PhasePoint flow_apply(const FlowMap& chi, const PhasePoint& w);

// Closed forms are exact; the numeric kind uses central differences with
// h = 1e-4 * max(1, |w|).
RMat flow_jacobian(const FlowMap& chi, const RVec& w);

// || J^T Omega J - Omega ||_max for the standard symplectic form
double symplectic_defect(const RMat& jacobian);

struct FlowCheckReport {
  double max_deviation = 0.0;
};

// max over samples of |chi_t(chi_t'(w)) - chi_{t+t'}(w)| / (1 + |w|)
FlowCheckReport group_law_check(const HamiltonianSpec& spec, double t,
                                double t_prime, const std::vector<RVec>& points,
                                double step = 1e-3);

// max relative deviation of chi_t(lambda w)/lambda from chi_t(w) over
// lambda in {2, 4}; radii must clear 4x the cutoff radius
FlowCheckReport homogeneity_check(const FlowMap& chi, const RVec& radii,
                                  const std::vector<RVec>& directions);

}  // namespace gwf

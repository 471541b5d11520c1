#include "gwf/flow.hpp"

#include <cmath>

namespace gwf {

HamiltonianSpec make_free_hamiltonian(int dim) {
  HamiltonianSpec s;
  s.dim = dim;
  s.label = "free";
  s.eval = [dim](const RVec& z) {
    return -4.0 * kPi * kPi * z.tail(dim).squaredNorm();
  };
  s.grad = [dim](const RVec& z) {
    RVec g = RVec::Zero(2 * dim);
    g.tail(dim) = -8.0 * kPi * kPi * z.tail(dim);
    return g;
  };
  return s;
}

HamiltonianSpec make_ho_hamiltonian(int dim) {
  HamiltonianSpec s;
  s.dim = dim;
  s.label = "harmonic_oscillator";
  s.eval = [](const RVec& z) { return kPi * z.squaredNorm(); };
  s.grad = [](const RVec& z) { return RVec(2.0 * kPi * z); };
  return s;
}

HamiltonianSpec make_quartic_hamiltonian() {
  HamiltonianSpec s;
  s.dim = 1;
  s.cutoff_radius = 2.0;
  s.label = "quartic_cutoff";
  auto h = [](double x, double xi) {
    return std::sqrt(x * x * x * x + xi * xi * xi * xi);
  };
  s.eval = [h](const RVec& z) {
    double r = z.norm();
    return (1.0 - smooth_step_down(r - 1.0)) * h(z(0), z(1));
  };
  s.grad = [h](const RVec& z) {
    double x = z(0), xi = z(1), r = z.norm();
    RVec g = RVec::Zero(2);
    if (r < 1.0) return g;  // symbol vanishes identically inside the bump
    double hv = h(x, xi);
    double phi = smooth_step_down(r - 1.0);
    double dphi = smooth_step_down_deriv(r - 1.0);
    g(0) = -dphi * (x / r) * hv + (1.0 - phi) * 2.0 * x * x * x / hv;
    g(1) = -dphi * (xi / r) * hv + (1.0 - phi) * 2.0 * xi * xi * xi / hv;
    return g;
  };
  return s;
}

HamiltonianValidation validate_hamiltonian(const HamiltonianSpec& spec,
                                           const std::vector<RVec>& points) {
  HamiltonianValidation rep;
  const double lams[] = {1.0, 1.5, 2.0, 3.0, 4.0};
  for (const RVec& w : points) {
    double r = w.norm();
    if (r > spec.cutoff_radius && r > 0.0) {
      double a1 = spec.eval(w);
      for (double lam : lams) {
        double al = spec.eval(RVec(lam * w));
        double scale = std::pow(lam, spec.homogeneity_degree);
        double dev = std::abs(al - scale * a1) /
                     std::max(scale * std::abs(a1), 1e-300);
        rep.max_homogeneity_dev = std::max(rep.max_homogeneity_dev, dev);
      }
    }
    RVec g = spec.grad(w);
    double h = 1e-5 * std::max(1.0, r);
    for (int i = 0; i < 2 * spec.dim; ++i) {
      RVec wp = w, wm = w;
      wp(i) += h;
      wm(i) -= h;
      double fd = (spec.eval(wp) - spec.eval(wm)) / (2.0 * h);
      double dev = std::abs(g(i) - fd) / std::max(1.0, std::abs(fd));
      rep.max_gradient_dev = std::max(rep.max_gradient_dev, dev);
    }
  }
  return rep;
}

FlowMap make_free_flow(double t, int dim) {
  FlowMap f;
  f.kind = FlowKind::kClosedFormFree;
  f.t = t;
  f.dim_ = dim;
  return f;
}

FlowMap make_ho_flow(double t, int dim) {
  FlowMap f;
  f.kind = FlowKind::kClosedFormHO;
  f.t = t;
  f.dim_ = dim;
  return f;
}

FlowMap make_numeric_flow(const HamiltonianSpec& spec, double t, double step) {
  if (!(step > 0.0 && step <= 1e-2))
    throw std::invalid_argument("numeric flow: need 0 < step <= 1e-2");
  if (!spec.eval || !spec.grad)
    throw std::invalid_argument("numeric flow: spec needs eval and grad");
  FlowMap f;
  f.kind = FlowKind::kNumeric;
  f.t = t;
  f.step = step;
  f.spec = spec;
  return f;
}

namespace {

RVec hamilton_field(const HamiltonianSpec& spec, const RVec& z) {
  RVec g = spec.grad(z);
  const int d = spec.dim;
  RVec f(2 * d);
  f.head(d) = -g.tail(d) / kTwoPi;
  f.tail(d) = g.head(d) / kTwoPi;
  return f;
}

RVec rk4_flow(const HamiltonianSpec& spec, double t, double step, RVec z) {
  long n_steps = std::lround(std::ceil(std::abs(t) / step));
  if (n_steps == 0) return z;
  const double h = t / static_cast<double>(n_steps);
  for (long s = 0; s < n_steps; ++s) {
    RVec k1 = hamilton_field(spec, z);
    RVec k2 = hamilton_field(spec, RVec(z + 0.5 * h * k1));
    RVec k3 = hamilton_field(spec, RVec(z + 0.5 * h * k2));
    RVec k4 = hamilton_field(spec, RVec(z + h * k3));
    z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!z.allFinite())
      throw std::runtime_error("numeric flow: state blew up during integration");
  }
  return z;
}

}  // namespace

RVec flow_apply(const FlowMap& chi, const RVec& w) {
  const int d = chi.dim();
  if (w.size() != 2 * d)
    throw std::invalid_argument("flow_apply: state has wrong dimension");
  switch (chi.kind) {
    case FlowKind::kClosedFormFree: {
      RVec out = w;
      out.head(d) += 4.0 * kPi * chi.t * w.tail(d);
      return out;
    }
    case FlowKind::kClosedFormHO: {
      const double c = std::cos(chi.t), s = std::sin(chi.t);
      RVec out(2 * d);
      out.head(d) = c * w.head(d) - s * w.tail(d);
      out.tail(d) = s * w.head(d) + c * w.tail(d);
      return out;
    }
    case FlowKind::kNumeric:
      return rk4_flow(chi.spec, chi.t, chi.step, w);
  }
  throw std::logic_error("flow_apply: unknown kind");
}

PhasePoint flow_apply(const FlowMap& chi, const PhasePoint& w) {
  RVec v(2);
  v << w.x, w.xi;
  RVec out = flow_apply(chi, v);
  return PhasePoint{out(0), out(1)};
}

RMat flow_jacobian(const FlowMap& chi, const RVec& w) {
  const int d = chi.dim();
  RMat J(2 * d, 2 * d);
  switch (chi.kind) {
    case FlowKind::kClosedFormFree:
      J.setIdentity();
      J.topRightCorner(d, d) = 4.0 * kPi * chi.t * RMat::Identity(d, d);
      return J;
    case FlowKind::kClosedFormHO: {
      const double c = std::cos(chi.t), s = std::sin(chi.t);
      J.topLeftCorner(d, d) = c * RMat::Identity(d, d);
      J.topRightCorner(d, d) = -s * RMat::Identity(d, d);
      J.bottomLeftCorner(d, d) = s * RMat::Identity(d, d);
      J.bottomRightCorner(d, d) = c * RMat::Identity(d, d);
      return J;
    }
    case FlowKind::kNumeric: {
      const double h = 1e-4 * std::max(1.0, w.norm());
      for (int i = 0; i < 2 * d; ++i) {
        RVec wp = w, wm = w;
        wp(i) += h;
        wm(i) -= h;
        J.col(i) = (flow_apply(chi, wp) - flow_apply(chi, wm)) / (2.0 * h);
      }
      return J;
    }
  }
  throw std::logic_error("flow_jacobian: unknown kind");
}

double symplectic_defect(const RMat& jacobian) {
  const int d = static_cast<int>(jacobian.rows()) / 2;
  RMat omega = RMat::Zero(2 * d, 2 * d);
  omega.topRightCorner(d, d) = RMat::Identity(d, d);
  omega.bottomLeftCorner(d, d) = -RMat::Identity(d, d);
  return (jacobian.transpose() * omega * jacobian - omega)
      .cwiseAbs()
      .maxCoeff();
}

FlowCheckReport group_law_check(const HamiltonianSpec& spec, double t,
                                double t_prime, const std::vector<RVec>& points,
                                double step) {
  if (std::abs(t) > 5.0 || std::abs(t_prime) > 5.0)
    throw std::invalid_argument("group_law_check: |t|, |t'| must be <= 5");
  FlowMap f1 = make_numeric_flow(spec, t, step);
  FlowMap f2 = make_numeric_flow(spec, t_prime, step);
  FlowMap f12 = make_numeric_flow(spec, t + t_prime, step);
  FlowCheckReport rep;
  for (const RVec& w : points) {
    RVec a = flow_apply(f1, flow_apply(f2, w));
    RVec b = flow_apply(f12, w);
    rep.max_deviation =
        std::max(rep.max_deviation, (a - b).norm() / (1.0 + w.norm()));
  }
  return rep;
}

FlowCheckReport homogeneity_check(const FlowMap& chi, const RVec& radii,
                                  const std::vector<RVec>& directions) {
  const double cutoff =
      chi.kind == FlowKind::kNumeric ? chi.spec.cutoff_radius : 0.0;
  FlowCheckReport rep;
  for (int i = 0; i < radii.size(); ++i) {
    double r = radii(i);
    if (r < 4.0 * cutoff)
      throw std::invalid_argument("homogeneity_check: radius below 4x cutoff");
    for (const RVec& u : directions) {
      RVec w = r * u / u.norm();
      RVec base = flow_apply(chi, w);
      for (double lam : {2.0, 4.0}) {
        RVec scaled = flow_apply(chi, RVec(lam * w)) / lam;
        rep.max_deviation = std::max(
            rep.max_deviation, (scaled - base).norm() / (1.0 + base.norm()));
      }
    }
  }
  return rep;
}

}  // namespace gwf

#include "rolling/cutoff.hpp"

#include <cmath>

#include "rolling/errors.hpp"

namespace rolling {

namespace {

// e^{-1/u} for u > 0, extended by 0. All derivatives vanish at 0, which is
// what makes the glued step smooth.
double glue(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }

// Normalized Frobenius distance from the identity. The normalization by
// sqrt(dim) makes dist(x/n) -> 1 from inside the flat region as n grows
// (for unipotent x the cross term satisfies tr x = dim), so the rescaled
// truncations exhaust every bounded matrix family.
double identity_distance(const Eigen::MatrixXd& x) {
  const int d = static_cast<int>(x.rows());
  return (x - Eigen::MatrixXd::Identity(d, d)).norm() /
         std::sqrt(static_cast<double>(d));
}

constexpr double kFlatRadius = 1.0;   // dist below this: value 1
constexpr double kZeroRadius = 2.0;   // dist beyond this: value 0

}  // namespace

double smooth_step(double t) {
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  const double a = glue(t);
  const double b = glue(1.0 - t);
  return b / (a + b);
}

double smooth_step_derivative(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double a = glue(t);
  const double b = glue(1.0 - t);
  const double s = a + b;
  return -(a * b) * (1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t))) / (s * s);
}

void validate_cutoff_spec(const CutoffSpec& spec) {
  if (!(spec.m > 0.0)) {
    throw ConfigError("cutoff: m must be positive");
  }
  if (spec.n < 1) {
    throw ConfigError("cutoff: n must be a positive integer");
  }
  if (!(spec.transition_width > 0.0)) {
    throw ConfigError("cutoff: transition_width must be positive");
  }
  if (spec.transition_width > spec.m) {
    throw ConfigError("cutoff: transition_width must not exceed m");
  }
}

ScalarField make_phi_m(const GroupModel&, double m, double transition_width) {
  if (!(m > 0.0)) {
    throw ConfigError("make_phi_m: m must be positive");
  }
  const double width = transition_width > 0.0 ? transition_width : 0.5 * m;
  ScalarField field;
  field.label = "phi_m";
  field.value = [m, width](const Eigen::VectorXd& x) {
    return smooth_step((x.norm() - m) / width);
  };
  field.gradient = [m, width](const Eigen::VectorXd& x) {
    const double r = x.norm();
    const double slope = smooth_step_derivative((r - m) / width) / width;
    if (slope == 0.0 || r == 0.0) {
      return Eigen::VectorXd::Zero(x.size()).eval();
    }
    return ((slope / r) * x).eval();
  };
  return field;
}

MatrixCutoff make_psi(double scale) {
  if (!(scale > 0.0)) {
    throw ConfigError("make_psi: scale must be positive");
  }
  MatrixCutoff psi;
  psi.scale = scale;
  psi.value = [scale](const Eigen::MatrixXd& x) {
    return smooth_step((identity_distance(scale * x) - kFlatRadius) /
                       (kZeroRadius - kFlatRadius));
  };
  psi.directional = [scale](const Eigen::MatrixXd& x,
                            const Eigen::MatrixXd& a) {
    const int d = static_cast<int>(x.rows());
    const Eigen::MatrixXd y =
        scale * x - Eigen::MatrixXd::Identity(d, d);
    const double dist = y.norm() / std::sqrt(static_cast<double>(d));
    const double slope = smooth_step_derivative((dist - kFlatRadius) /
                                                (kZeroRadius - kFlatRadius)) /
                         (kZeroRadius - kFlatRadius);
    // Guard before dividing by ||y||: in the flat regions (identity included)
    // the derivative is exactly zero.
    if (slope == 0.0 || dist == 0.0) return 0.0;
    const double ddist =
        (y.array() * a.array()).sum() * scale /
        (y.norm() * std::sqrt(static_cast<double>(d)));
    return slope * ddist;
  };
  return psi;
}

namespace {

// Hat gradient of a (value-only) coefficient recomputed at arbitrary points,
// used by the mixed-derivative table. Each row of the table differentiates
// the hat gradient along one left-invariant direction.
Eigen::MatrixXd mixed_by_differences(
    const LieAlgebraSpec& alg,
    const std::function<AlgebraVector(const AlgebraVector&)>& hat_grad_at,
    const AlgebraVector& x) {
  constexpr double eps = 1e-4;
  const int d = alg.dim();
  Eigen::MatrixXd table(d, d);
  AlgebraVector dir = AlgebraVector::Zero(d);
  for (int i = 0; i < d; ++i) {
    dir[i] = eps;
    const AlgebraVector plus = hat_grad_at(bch_log_product(alg, x, dir));
    dir[i] = -eps;
    const AlgebraVector minus = hat_grad_at(bch_log_product(alg, x, dir));
    dir[i] = 0.0;
    table.row(i) = ((plus - minus) / (2.0 * eps)).transpose();
  }
  return table;
}

}  // namespace

CoefficientField make_coefficient(const GroupModel& model,
                                  const std::string& kind,
                                  const CutoffSpec& spec) {
  validate_cutoff_spec(spec);
  if (kind == "full") {
    CoefficientField u = trivial_coefficient();
    u.label = "full";
    return u;
  }
  if (kind != "v" && kind != "u_m" && kind != "v_n") {
    throw ConfigError("unknown coefficient kind '" + kind +
                      "' (expected full, u_m, v, or v_n)");
  }

  const LieAlgebraSpec& alg = model.algebra;
  const int d = alg.dim();
  const MatrixCutoff psi =
      make_psi(kind == "v_n" ? 1.0 / static_cast<double>(spec.n) : 1.0);
  const bool with_phi = (kind == "u_m");
  const ScalarField phi = make_phi_m(model, spec.m, spec.transition_width);
  const GroupModel model_copy = model;

  CoefficientField u;
  u.label = kind;
  u.trivial = false;

  u.value = [psi, phi, with_phi](const GroupPoint& g,
                                 const Eigen::MatrixXd& adj) {
    double val = psi.value(adj);
    if (with_phi) val *= phi.value(g.x);
    return val;
  };

  // <grad(g), X_i> = psi'(Ad)[ad_i Ad] (times phi, plus psi times the analytic
  // phi part, when the group truncation participates).
  auto hat_grad = [psi, phi, with_phi, model_copy, d](
                      const GroupPoint& g, const Eigen::MatrixXd& adj) {
    const LieAlgebraSpec& a = model_copy.algebra;
    AlgebraVector grad(d);
    for (int i = 0; i < d; ++i) {
      grad[i] = psi.directional(adj, a.ad_basis(i) * adj);
    }
    if (with_phi) {
      const double psi_val = psi.value(adj);
      const AlgebraVector phi_grad = hat_gradient(model_copy, phi, g);
      grad = phi.value(g.x) * grad + psi_val * phi_grad;
    }
    return grad;
  };
  u.hat_gradient = hat_grad;

  u.mixed = [hat_grad, model_copy](const GroupPoint& g,
                                   const Eigen::MatrixXd&) {
    const LieAlgebraSpec& a = model_copy.algebra;
    auto hat_grad_at = [&](const AlgebraVector& x) {
      const GroupPoint point{x};
      return hat_grad(point, exp_ad(a, x));
    };
    return mixed_by_differences(a, hat_grad_at, g.x);
  };
  return u;
}

}  // namespace rolling

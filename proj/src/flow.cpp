#include "rolling/flow.hpp"

#include <cmath>
#include <cstddef>

#include "rolling/errors.hpp"

namespace rolling {

namespace {

// Embeds per-generator values (one row of an increments/slopes matrix) into
// a full algebra vector.
AlgebraVector embed_generators(const GroupModel& model,
                               const Eigen::MatrixXd& rows, int j) {
  AlgebraVector v = AlgebraVector::Zero(model.algebra.dim());
  for (std::size_t i = 0; i < model.generators.size(); ++i) {
    v[model.generators[i]] += rows(j, static_cast<int>(i));
  }
  return v;
}

void require_compatible(const GroupModel& model, const PathGrid& grid,
                        int path_k, const char* where) {
  if (path_k != static_cast<int>(model.generators.size())) {
    throw ContractViolation(std::string(where) +
                            ": path component count does not match the "
                            "model's generator count");
  }
  if (grid.n_steps <= 0) {
    throw ContractViolation(std::string(where) + ": empty grid");
  }
}

}  // namespace

Scheme parse_scheme(const std::string& name) {
  if (name == "geometric-euler") return Scheme::GeometricEuler;
  if (name == "geometric-heun") return Scheme::GeometricHeun;
  throw ConfigError("unknown scheme '" + name +
                    "' (expected geometric-euler or geometric-heun)");
}

const char* scheme_name(Scheme scheme) {
  return scheme == Scheme::GeometricEuler ? "geometric-euler"
                                          : "geometric-heun";
}

CoefficientField trivial_coefficient() {
  CoefficientField u;
  u.label = "one";
  u.trivial = true;
  u.value = [](const GroupPoint&, const Eigen::MatrixXd&) { return 1.0; };
  u.hat_gradient = [](const GroupPoint& g, const Eigen::MatrixXd&) {
    return AlgebraVector::Zero(g.x.size()).eval();
  };
  u.mixed = [](const GroupPoint& g, const Eigen::MatrixXd&) {
    return Eigen::MatrixXd::Zero(g.x.size(), g.x.size()).eval();
  };
  return u;
}

FlowTrajectory solve_rolling(const GroupModel& model, const CoefficientField& u,
                             const BrownianPath& omega, Scheme scheme) {
  require_compatible(model, omega.grid, omega.k, "solve_rolling");
  if (!u.value) {
    throw ContractViolation("solve_rolling: coefficient has no value closure");
  }
  const LieAlgebraSpec& alg = model.algebra;
  const int n = omega.grid.n_steps;

  FlowTrajectory traj;
  traj.grid = omega.grid;
  traj.states.reserve(static_cast<std::size_t>(n) + 1);
  traj.adjoints.reserve(static_cast<std::size_t>(n) + 1);
  traj.u_state.reserve(static_cast<std::size_t>(n) + 1);
  traj.u_predictor.reserve(static_cast<std::size_t>(n));

  traj.states.push_back(identity(model));
  traj.adjoints.push_back(Eigen::MatrixXd::Identity(alg.dim(), alg.dim()));
  traj.u_state.push_back(
      u.trivial ? 1.0 : u.value(traj.states.back(), traj.adjoints.back()));
  if (traj.u_state.back() <= 0.0) traj.coefficient_hit_zero = true;

  for (int j = 0; j < n; ++j) {
    const AlgebraVector db = embed_generators(model, omega.increments, j);
    const double c = traj.u_state.back();

    double c_pred = c;
    if (!u.trivial && scheme == Scheme::GeometricHeun) {
      const GroupPoint predictor{
          bch_log_product(alg, traj.states.back().x, (c * db).eval())};
      c_pred = u.value(predictor, exp_ad(alg, predictor.x));
      if (c_pred <= 0.0) traj.coefficient_hit_zero = true;
    }
    traj.u_predictor.push_back(c_pred);

    const double effective =
        scheme == Scheme::GeometricHeun ? 0.5 * (c + c_pred) : c;
    GroupPoint next{
        bch_log_product(alg, traj.states.back().x, (effective * db).eval())};

    const double norm = next.x.lpNorm<Eigen::Infinity>();
    if (!(norm <= kBlowupThreshold)) {
      throw BlowupError(static_cast<std::size_t>(j) + 1, norm);
    }

    traj.adjoints.push_back(exp_ad(alg, next.x));
    traj.states.push_back(std::move(next));
    traj.u_state.push_back(
        u.trivial ? 1.0 : u.value(traj.states.back(), traj.adjoints.back()));
    if (traj.u_state.back() <= 0.0) traj.coefficient_hit_zero = true;
  }
  return traj;
}

std::vector<Eigen::MatrixXd> solve_adjoint(const GroupModel& model,
                                           const FlowTrajectory& traj,
                                           const BrownianPath& omega) {
  require_compatible(model, omega.grid, omega.k, "solve_adjoint");
  if (omega.grid.n_steps != traj.grid.n_steps) {
    throw ContractViolation("solve_adjoint: trajectory and path grids differ");
  }
  const LieAlgebraSpec& alg = model.algebra;
  const int d = alg.dim();
  const int n = omega.grid.n_steps;

  std::vector<Eigen::MatrixXd> w;
  w.reserve(static_cast<std::size_t>(n) + 1);
  w.push_back(Eigen::MatrixXd::Identity(d, d));
  for (int j = 0; j < n; ++j) {
    const Eigen::MatrixXd m =
        ad_matrix(alg, embed_generators(model, omega.increments, j));
    const double c = traj.u_state[static_cast<std::size_t>(j)];
    const double c_pred = traj.u_predictor[static_cast<std::size_t>(j)];
    const Eigen::MatrixXd cm = c * m;
    Eigen::MatrixXd step = Eigen::MatrixXd::Identity(d, d);
    step += 0.5 * (c + c_pred) * m;
    step += 0.5 * (cm * cm);
    w.push_back(w.back() * step);
  }
  return w;
}

VariationProcess solve_theta(const GroupModel& model, const CoefficientField& u,
                             const FlowTrajectory& traj,
                             const BrownianPath& omega,
                             const CameronMartinPath& h) {
  require_compatible(model, omega.grid, omega.k, "solve_theta");
  if (h.k != omega.k || h.grid.n_steps != omega.grid.n_steps ||
      omega.grid.n_steps != traj.grid.n_steps) {
    throw ContractViolation("solve_theta: grid or component mismatch");
  }
  if (!u.trivial && (!u.hat_gradient || !u.mixed)) {
    throw ContractViolation(
        "solve_theta: nontrivial coefficient needs hat_gradient and mixed "
        "closures");
  }
  const LieAlgebraSpec& alg = model.algebra;
  const int d = alg.dim();
  const int n = omega.grid.n_steps;
  const double dt = omega.grid.dt;

  VariationProcess theta;
  theta.grid = omega.grid;
  theta.values.reserve(static_cast<std::size_t>(n) + 1);
  theta.values.push_back(AlgebraVector::Zero(d));

  for (int j = 0; j < n; ++j) {
    const AlgebraVector& prev = theta.values.back();
    const Eigen::MatrixXd& w = traj.adjoints[static_cast<std::size_t>(j)];
    const AlgebraVector vh = embed_generators(model, h.slopes, j);
    AlgebraVector next = prev + dt * traj.u_state[static_cast<std::size_t>(j)] *
                                    (w * vh);
    if (!u.trivial) {
      const GroupPoint& state = traj.states[static_cast<std::size_t>(j)];
      const AlgebraVector grad = u.hat_gradient(state, w);
      const AlgebraVector db = embed_generators(model, omega.increments, j);
      next += grad.dot(prev) * (w * db);

      const Eigen::MatrixXd mix = u.mixed(state, w);
      AlgebraVector correction = AlgebraVector::Zero(d);
      for (int i : model.generators) {
        correction[i] = mix.row(i).dot(prev);
      }
      next += 0.5 * dt * (w * correction);
    }
    theta.values.push_back(std::move(next));
  }
  return theta;
}

VariationProcess solve_Theta(const GroupModel& model,
                             const FlowTrajectory& traj,
                             const CameronMartinPath& h) {
  require_compatible(model, h.grid, h.k, "solve_Theta");
  if (h.grid.n_steps != traj.grid.n_steps) {
    throw ContractViolation("solve_Theta: trajectory and path grids differ");
  }
  const int d = model.algebra.dim();
  const int n = h.grid.n_steps;
  const double dt = h.grid.dt;

  VariationProcess big;
  big.grid = h.grid;
  big.values.reserve(static_cast<std::size_t>(n) + 1);
  big.values.push_back(AlgebraVector::Zero(d));
  for (int j = 0; j < n; ++j) {
    const AlgebraVector vh = embed_generators(model, h.slopes, j);
    const Eigen::MatrixXd mid =
        0.5 * (traj.adjoints[static_cast<std::size_t>(j)] +
               traj.adjoints[static_cast<std::size_t>(j) + 1]);
    big.values.push_back(big.values.back() + dt * (mid * vh));
  }
  return big;
}

}  // namespace rolling

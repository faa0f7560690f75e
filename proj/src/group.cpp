#include "rolling/group.hpp"

#include <cmath>

namespace rolling {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractViolation(msg);
}

void check_point(const GroupModel& model, const GroupPoint& g,
                 const char* where) {
  require(g.x.size() == model.algebra.dim(),
          std::string(where) + ": point dimension mismatch");
}

// I (+/-) ad_x/2 + ad_x^2/12, the truncated Bernoulli transport shared by
// both frames. The cubic Bernoulli number vanishes and ad_x^4 = 0 up to
// step 4, so these three terms are exact.
Eigen::MatrixXd bernoulli_frame(const LieAlgebraSpec& alg,
                                const Eigen::VectorXd& x, double sign) {
  Eigen::MatrixXd ad = ad_matrix(alg, x);
  Eigen::MatrixXd frame = Eigen::MatrixXd::Identity(alg.dim(), alg.dim());
  frame.noalias() += (sign * 0.5) * ad;
  frame.noalias() += (ad * ad) / 12.0;
  return frame;
}

}  // namespace

GroupPoint identity(const GroupModel& model) {
  return GroupPoint{Eigen::VectorXd::Zero(model.algebra.dim())};
}

GroupPoint multiply(const GroupModel& model, const GroupPoint& a,
                    const GroupPoint& b) {
  check_point(model, a, "multiply");
  check_point(model, b, "multiply");
  return GroupPoint{bch_log_product(model.algebra, a.x, b.x)};
}

GroupPoint inverse(const GroupModel& model, const GroupPoint& g) {
  check_point(model, g, "inverse");
  return GroupPoint{-g.x};
}

Eigen::MatrixXd adjoint_of(const GroupModel& model, const GroupPoint& g) {
  check_point(model, g, "adjoint_of");
  return exp_ad(model.algebra, g.x);
}

Eigen::MatrixXd left_frame(const GroupModel& model, const GroupPoint& g) {
  check_point(model, g, "left_frame");
  return bernoulli_frame(model.algebra, g.x, +1.0);
}

Eigen::MatrixXd right_frame(const GroupModel& model, const GroupPoint& g) {
  check_point(model, g, "right_frame");
  return bernoulli_frame(model.algebra, g.x, -1.0);
}

AlgebraVector left_invariant_field(const GroupModel& model, int i,
                                   const GroupPoint& g) {
  require(i >= 0 && i < model.algebra.dim(),
          "left_invariant_field: basis index out of range");
  return left_frame(model, g).col(i);
}

AlgebraVector right_invariant_field(const GroupModel& model, int i,
                                    const GroupPoint& g) {
  require(i >= 0 && i < model.algebra.dim(),
          "right_invariant_field: basis index out of range");
  return right_frame(model, g).col(i);
}

namespace {

AlgebraVector frame_gradient(const GroupModel& model, const ScalarField& f,
                             const GroupPoint& g, double fd_epsilon,
                             bool left_translation) {
  require(static_cast<bool>(f.value), "gradient: scalar field has no value map");
  require(fd_epsilon > 0.0, "gradient: fd_epsilon must be positive");
  const int d = model.algebra.dim();
  if (f.gradient) {
    const Eigen::VectorXd grad = f.gradient(g.x);
    require(grad.size() == d, "gradient: analytic gradient dimension mismatch");
    const Eigen::MatrixXd frame = left_translation ? right_frame(model, g)
                                                   : left_frame(model, g);
    return frame.transpose() * grad;
  }
  // Central differences along the group translation itself, so the fallback
  // matches the definition rather than a chart-gradient chain rule.
  AlgebraVector result(d);
  AlgebraVector dir = AlgebraVector::Zero(d);
  for (int i = 0; i < d; ++i) {
    dir[i] = fd_epsilon;
    const AlgebraVector plus =
        left_translation ? bch_log_product(model.algebra, dir, g.x)
                         : bch_log_product(model.algebra, g.x, dir);
    dir[i] = -fd_epsilon;
    const AlgebraVector minus =
        left_translation ? bch_log_product(model.algebra, dir, g.x)
                         : bch_log_product(model.algebra, g.x, dir);
    dir[i] = 0.0;
    result[i] = (f.value(plus) - f.value(minus)) / (2.0 * fd_epsilon);
  }
  return result;
}

}  // namespace

AlgebraVector hat_gradient(const GroupModel& model, const ScalarField& f,
                           const GroupPoint& g, double fd_epsilon) {
  check_point(model, g, "hat_gradient");
  return frame_gradient(model, f, g, fd_epsilon, /*left_translation=*/true);
}

AlgebraVector tilde_gradient(const GroupModel& model, const ScalarField& f,
                             const GroupPoint& g, double fd_epsilon) {
  check_point(model, g, "tilde_gradient");
  return frame_gradient(model, f, g, fd_epsilon, /*left_translation=*/false);
}

GroupModel make_model(const std::string& label) {
  const std::string abelian_prefix = "abelian:";
  const std::string custom_prefix = "custom:";
  if (label.rfind(abelian_prefix, 0) == 0) {
    const std::string arg = label.substr(abelian_prefix.size());
    int k = 0;
    try {
      std::size_t consumed = 0;
      k = std::stoi(arg, &consumed);
      if (consumed != arg.size()) k = 0;
    } catch (const std::exception&) {
      k = 0;
    }
    if (k < 1) throw ConfigError("abelian model needs a positive dimension: " + label);
    std::vector<int> generators;
    for (int i = 0; i < k; ++i) generators.push_back(i);
    return GroupModel{label, LieAlgebraSpec(k, 1, {}), std::move(generators)};
  }
  if (label == "heisenberg") {
    return GroupModel{label, LieAlgebraSpec(3, 2, {BracketEntry{1, 2, 3, 1.0}}),
                      {0, 1}};
  }
  if (label == "paper-example") {
    return GroupModel{
        label,
        LieAlgebraSpec(4, 3,
                       {BracketEntry{1, 2, 3, 1.0}, BracketEntry{1, 3, 4, 1.0}}),
        {0, 1}};
  }
  if (label.rfind(custom_prefix, 0) == 0) {
    const std::string path = label.substr(custom_prefix.size());
    AlgebraDefinition def = load_algebra_definition(path);
    return GroupModel{label, std::move(def.algebra), std::move(def.generators)};
  }
  throw ConfigError("unknown model label: " + label +
                    " (expected abelian:<k>, heisenberg, paper-example, or "
                    "custom:<file>)");
}

}  // namespace rolling

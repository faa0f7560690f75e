#ifndef ROLLING_GROUP_HPP
#define ROLLING_GROUP_HPP

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "rolling/algebra.hpp"

namespace rolling {

// Point of the simply connected nilpotent group in exponential coordinates
// of the first kind: the identity is the zero vector and inversion is
// negation. The chart is global, so every group operation is polynomial.
struct GroupPoint {
  Eigen::VectorXd x;
};

// A group together with the subset of basis directions that drive the noise
// (d_1..d_k in 0-based form).
struct GroupModel {
  std::string label;
  LieAlgebraSpec algebra;
  std::vector<int> generators;
};

GroupPoint identity(const GroupModel& model);

// exp(x) exp(y) pulled back through log, i.e. BCH on coordinates.
GroupPoint multiply(const GroupModel& model, const GroupPoint& a,
                    const GroupPoint& b);

GroupPoint inverse(const GroupModel& model, const GroupPoint& g);

// Ad_g = exp(ad_{log g}) acting on the algebra.
Eigen::MatrixXd adjoint_of(const GroupModel& model, const GroupPoint& g);

// Frames of invariant vector fields in coordinates. Column i of the matrix
// is the coordinate expression of the field through X_i at g. Both are the
// Bernoulli-series transports truncated at the (vanishing) step, exact for
// nilpotency step <= 4:
//   left-invariant  (d/de at 0 of g exp(e X_i)):  I + ad_x/2 + ad_x^2/12
//   right-invariant (d/de at 0 of exp(e X_i) g):  I - ad_x/2 + ad_x^2/12
Eigen::MatrixXd left_frame(const GroupModel& model, const GroupPoint& g);
Eigen::MatrixXd right_frame(const GroupModel& model, const GroupPoint& g);

AlgebraVector left_invariant_field(const GroupModel& model, int i,
                                   const GroupPoint& g);
AlgebraVector right_invariant_field(const GroupModel& model, int i,
                                    const GroupPoint& g);

// Smooth scalar observable in coordinates. `gradient` may be empty; gradient
// consumers then fall back to central differences along group translations.
struct ScalarField {
  std::string label;
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
};

// Gradient with respect to the right-invariant frame: component i equals the
// derivative of f along right_invariant_field(i, .) at g, i.e.
// d/de at 0 of f(exp(e X_i) g).
AlgebraVector hat_gradient(const GroupModel& model, const ScalarField& f,
                           const GroupPoint& g, double fd_epsilon = 1e-5);

// Gradient with respect to the left-invariant frame: component i is
// d/de at 0 of f(g exp(e X_i)).
AlgebraVector tilde_gradient(const GroupModel& model, const ScalarField& f,
                             const GroupPoint& g, double fd_epsilon = 1e-5);

// Resolves a model label: "abelian:<k>", "heisenberg", "paper-example", or
// "custom:<algebra definition file>". Throws ConfigError on unknown labels.
GroupModel make_model(const std::string& label);

}  // namespace rolling

#endif

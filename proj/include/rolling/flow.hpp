#ifndef ROLLING_FLOW_HPP
#define ROLLING_FLOW_HPP

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "rolling/group.hpp"
#include "rolling/wiener.hpp"

namespace rolling {

// Exponential one-step integrators for the group-valued equation
// d xi = xi o (u(xi) db). Both advance by right-multiplying a single
// exponential per step; heun re-evaluates the coefficient at a predictor
// state and averages, which supplies the Stratonovich correction that the
// frozen-coefficient euler step misses when u is state dependent. For
// u == 1 the corrector degenerates and the two coincide exactly.
enum class Scheme { GeometricEuler, GeometricHeun };

// "geometric-euler" / "geometric-heun"; throws ConfigError otherwise.
Scheme parse_scheme(const std::string& name);
const char* scheme_name(Scheme scheme);

// Scalar coefficient multiplying the driving fields. Evaluations receive the
// group point together with its adjoint matrix, which the integrators have
// already computed, so adjoint-based coefficients never redo the exponential.
struct CoefficientField {
  std::string label;
  // Identically one. Integrators and the variation solver take shortcuts
  // (no gradient or mixed-derivative evaluations).
  bool trivial = false;
  std::function<double(const GroupPoint&, const Eigen::MatrixXd&)> value;
  // Component i is the derivative of u along e^{eps X_i} g (all basis
  // directions, not only generators).
  std::function<AlgebraVector(const GroupPoint&, const Eigen::MatrixXd&)>
      hat_gradient;
  // mixed(i, l): derivative along g e^{eps X_i} of component l of
  // hat_gradient, i.e. the left derivative of the right derivative. Only the
  // generator rows are consumed by the variation drift.
  std::function<Eigen::MatrixXd(const GroupPoint&, const Eigen::MatrixXd&)>
      mixed;
};

CoefficientField trivial_coefficient();

// Any state coordinate reaching this magnitude aborts the path.
inline constexpr double kBlowupThreshold = 1e9;

// One simulated path of the group state, with the per-step data every
// downstream solver consumes: adjoint matrices of the visited states and the
// coefficient values seen by the integrator (predictor values included so
// the matrix cross-check can replay heun steps exactly).
struct FlowTrajectory {
  PathGrid grid;
  std::vector<GroupPoint> states;         // n_steps + 1, states[0] = identity
  std::vector<Eigen::MatrixXd> adjoints;  // adjoint_of(states[j])
  std::vector<double> u_state;            // u at states[j], n_steps + 1
  std::vector<double> u_predictor;        // n_steps; equals u_state[j] for euler
  bool coefficient_hit_zero = false;      // u vanished at some visited state
};

// Integrates the rolling equation along one Brownian path. Throws
// BlowupError when a coordinate passes kBlowupThreshold or stops being
// finite.
FlowTrajectory solve_rolling(const GroupModel& model, const CoefficientField& u,
                             const BrownianPath& omega, Scheme scheme);

// Second route to the adjoint process: advances W directly in matrix space
// from the cached coefficient stream,
//   W*      = W_j (I + c_j M_j),
//   W_{j+1} = W_j (I + (c_j + c*_j)/2 M_j + (c_j M_j)^2 / 2),
// with M_j = sum_i ad_{X_i} db^i_j and c the trajectory's coefficient
// values. Independent of adjoint_of(), so it cross-checks the flow.
std::vector<Eigen::MatrixXd> solve_adjoint(const GroupModel& model,
                                           const FlowTrajectory& traj,
                                           const BrownianPath& omega);

// Algebra-valued companion process on the same grid; values[0] = 0.
struct VariationProcess {
  PathGrid grid;
  std::vector<AlgebraVector> values;  // n_steps + 1
};

// First variation of f-statistics under a Cameron-Martin tilt of the noise,
// for a general coefficient. Euler-Maruyama in the variation:
//   theta_{j+1} = theta_j
//     + <grad_u(eta_j), theta_j> W_j db_j
//     + u(eta_j) W_j hdot_j dt
//     + (1/2) sum_{i in generators} mixed(i, .) theta_j W_j X_i dt
// where W is the trajectory's adjoint and hdot_j collects the generator
// slopes. For the trivial coefficient this reduces to the left-point sum of
// W_j hdot_j dt.
VariationProcess solve_theta(const GroupModel& model, const CoefficientField& u,
                             const FlowTrajectory& traj,
                             const BrownianPath& omega,
                             const CameronMartinPath& h);

// The u == 1 variation integrated by the midpoint rule in the adjoint:
//   Theta_{j+1} = Theta_j + (W_j + W_{j+1})/2 hdot_j dt.
VariationProcess solve_Theta(const GroupModel& model,
                             const FlowTrajectory& traj,
                             const CameronMartinPath& h);

}  // namespace rolling

#endif

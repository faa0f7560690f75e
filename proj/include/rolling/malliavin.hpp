#ifndef ROLLING_MALLIAVIN_HPP
#define ROLLING_MALLIAVIN_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rolling/cutoff.hpp"
#include "rolling/flow.hpp"
#include "rolling/group.hpp"
#include "rolling/wiener.hpp"

namespace rolling {

// |formula - oracle| / max(1, |oracle|).
double relative_error(double formula_value, double oracle_value);

struct DerivativeReport {
  double formula_value = 0.0;
  double oracle_value = 0.0;
  double rel_error = 0.0;
  double epsilon = 0.0;
  int n_steps = 0;
};

// Directional derivative of f(state at t_index) under a Cameron-Martin tilt,
// evaluated by the explicit pairing <hat_gradient(f, xi_t), Theta_t> with
// Theta from solve_Theta. The trajectory must come from the constant-one
// coefficient, for which Theta is the exact first variation.
double derivative_formula(const GroupModel& model, const ScalarField& f,
                          const FlowTrajectory& flow,
                          const CameronMartinPath& h, int t_index);

// Same pairing against a precomputed variation process (solve_Theta or
// solve_theta), so cutoff flows can reuse it as a diagnostic.
double derivative_formula(const GroupModel& model, const ScalarField& f,
                          const FlowTrajectory& flow,
                          const VariationProcess& variation, int t_index);

// The defining difference quotient: re-integrates the flow on omega shifted
// by +/- eps along h and takes the central difference at t_index. Both shifted
// flows share the base increments, so this is the common-path oracle.
double derivative_fd_oracle(const GroupModel& model, const ScalarField& f,
                            const CoefficientField& u, const BrownianPath& omega,
                            const CameronMartinPath& h, int t_index, double eps,
                            Scheme scheme);

// (4 D_{eps/2} - D_eps) / 3: cancels the O(eps^2) term of the central
// difference, used as the reference in the eps-scaling study.
double richardson_oracle(const GroupModel& model, const ScalarField& f,
                         const CoefficientField& u, const BrownianPath& omega,
                         const CameronMartinPath& h, int t_index, double eps,
                         Scheme scheme);

// Formula-vs-oracle comparison on one path for the constant-one coefficient.
DerivativeReport derivative_report(const GroupModel& model, const ScalarField& f,
                                   const BrownianPath& omega,
                                   const CameronMartinPath& h, int t_index,
                                   double eps, Scheme scheme);

// Component i of the derivative kernel at (s, t):
//   <hat_gradient(f, xi_t), sum_{l < min(s,t)} (W_l + W_{l+1})/2 X_{d_i} dt>.
// Constant in s past t; zero at s = 0.
double kernel_D(const GroupModel& model, const ScalarField& f,
                const FlowTrajectory& flow, int generator_slot, int s_index,
                int t_index);

// Pairs the kernel increments with the direction slopes,
// sum_j sum_i (K_i(s_{j+1}) - K_i(s_j)) hdot^i_j; algebraically identical to
// derivative_formula, so agreement is a pure grid identity.
double kernel_reconstruction(const GroupModel& model, const ScalarField& f,
                             const FlowTrajectory& flow,
                             const CameronMartinPath& h, int t_index);

// Derivative of the discrete area coordinate on the 3-dimensional step-2
// model in closed form, (1/2) h^1_t b^2_t - sum_j (b^2_j + b^2_{j+1})/2
// hdot^1_j dt. Valid for directions whose second slope vanishes; throws
// ContractViolation otherwise.
double area_derivative_closed_form(const BrownianPath& omega,
                                   const CameronMartinPath& h, int t_index);

// Nested central difference along two directions (second-order smoke check):
// d/d eps2 of [d/d eps1 f(state at t_index)] with both derivatives taken by
// common-path central differences.
double second_order_fd(const GroupModel& model, const ScalarField& f,
                       const CoefficientField& u, const BrownianPath& omega,
                       const CameronMartinPath& h1, const CameronMartinPath& h2,
                       int t_index, double eps, Scheme scheme);

struct IbpReport {
  double lhs_mean = 0.0;        // E[(d_h F) G]
  double lhs_stderr = 0.0;
  double rhs_mean = 0.0;        // E[F d_h^* G]
  double rhs_stderr = 0.0;
  double difference = 0.0;      // lhs_mean - rhs_mean
  double stderr_of_mean = 0.0;  // standard error of the per-path difference
  double z = 0.0;               // |difference| in standard-error units
  int n_paths = 0;
  bool pass = false;            // |difference| <= 3 standard errors
};

// Monte Carlo check of the duality (d_h F, G) = (F, d_h^* G) on common
// paths sampled from (seed, path_index).
IbpReport ibp_statistic(const CylinderFunctional& f, const CylinderFunctional& g,
                        const CameronMartinPath& h, int n_paths,
                        std::uint64_t seed, int threads);

// One per-path sample of a paired-process distance: the grid sup together
// with freeze flags of the two flows involved. Samplers may throw
// BlowupError; those paths are excluded and counted.
struct PairSample {
  double sup = 0.0;
  bool frozen_truncated = false;
  bool frozen_baseline = false;
};
using PairSampler = std::function<PairSample(std::uint64_t path_index)>;

struct StudyRow {
  std::string kind;
  std::string model;
  double p = 0.0;
  double parameter = 0.0;
  double estimate = 0.0;        // MC mean of sup^p over included paths
  double stderr_of_mean = 0.0;
  int n_paths = 0;              // requested paths
  int excluded_paths = 0;       // aborted by blowup
  double frozen_truncated_fraction = 0.0;
  double frozen_baseline_fraction = 0.0;
};

// Runs the sampler over path indices and reduces sup^p; deterministic in
// (sampler, n_paths) regardless of threads.
StudyRow lp_sup_distance(const PairSampler& sampler, double p, int n_paths,
                         int threads);

// Paired-system convergence study. Kinds:
//   eta_m:     |f(state^{u_m}) - f(state^{v})|      (group cutoff removed)
//   adjoint_m: Frobenius distance of the two adjoint processes
//   theta_m:   first-variation processes of the same two flows
//   Theta_n:   variation of the v_n flow against the constant-one flow,
//              both integrated by solve_theta
// Parameters are the m (or n) values, ascending; both flows of a pair share
// the driving path.
struct StudySetup {
  std::string kind;
  GroupModel model;
  std::vector<double> p_list = {2.0, 4.0};
  std::vector<double> parameters;
  int n_steps = 2048;
  int n_paths = 2000;
  std::uint64_t seed = 0;
  int threads = 1;
  double transition_width = -1.0;  // <= 0: m/2 per parameter
  Scheme scheme = Scheme::GeometricHeun;
  ScalarField f;                                 // eta_m only
  std::function<double(double, int)> h_slope;    // theta kinds only
};

std::vector<StudyRow> run_convergence_study(const StudySetup& setup);

}  // namespace rolling

#endif

#ifndef ROLLING_CUTOFF_HPP
#define ROLLING_CUTOFF_HPP

#include <Eigen/Dense>
#include <functional>
#include <string>

#include "rolling/flow.hpp"
#include "rolling/group.hpp"

namespace rolling {

// Classical C-infinity step glued from e^{-1/x}: 1 on (-inf, 0], 0 on
// [1, inf), strictly decreasing in between.
double smooth_step(double t);
double smooth_step_derivative(double t);

// Parameters of the truncation family. `m` bounds the group region kept by
// phi_m, `n` rescales the adjoint argument of psi, `transition_width` is the
// band over which phi_m falls from 1 to 0.
struct CutoffSpec {
  double m = 2.0;
  int n = 1;
  double transition_width = 1.0;
};

// m > 0, n >= 1, 0 < transition_width <= m. Throws ConfigError otherwise.
void validate_cutoff_spec(const CutoffSpec& spec);

// phi_m(g) = S((|g| - m) / transition_width) on coordinate norm |g|:
// identically 1 on {|g| <= m}, 0 beyond m + transition_width, gradient
// analytic. Width defaults to m/2, which keeps the derivative bound
// |phi_m'| <= 2 sup|S'| / m uniform over large m.
ScalarField make_phi_m(const GroupModel& model, double m,
                       double transition_width = -1.0);

// Truncation on matrices: value(x) = S((dist(x) - 1) / 1) where dist is the
// dimension-normalized Frobenius distance from the identity,
// dist(x) = ||x - I||_F / sqrt(dim). Equals 1 for dist <= 1, 0 for
// dist >= 2. `directional(x, A)` is d/d eps at 0 of value(x + eps A),
// computed analytically. `scale` premultiplies the argument: make_psi(1.0/n)
// evaluates psi(x/n) with the chain factor 1/n folded into directional.
struct MatrixCutoff {
  double scale = 1.0;
  std::function<double(const Eigen::MatrixXd&)> value;
  std::function<double(const Eigen::MatrixXd&, const Eigen::MatrixXd&)>
      directional;
};

MatrixCutoff make_psi(double scale = 1.0);

// Assembles the coefficient fields used by the experiments:
//   full: u == 1 with zero derivatives (the untruncated equation),
//   v:    psi(Ad_g),
//   u_m:  phi_m(g) * psi(Ad_g),
//   v_n:  psi(Ad_g / n).
// First derivatives follow the product/chain rules through the adjoint,
//   <grad_v(g), X_i> = psi'(Ad_g)[ad_{X_i} Ad_g],
// and the mixed table is built from central differences of the hat gradient
// along left-invariant directions (eps = 1e-4). Throws ConfigError on an
// unknown kind.
CoefficientField make_coefficient(const GroupModel& model,
                                  const std::string& kind,
                                  const CutoffSpec& spec);

}  // namespace rolling

#endif

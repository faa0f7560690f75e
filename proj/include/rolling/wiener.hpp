#ifndef ROLLING_WIENER_HPP
#define ROLLING_WIENER_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "rolling/errors.hpp"

namespace rolling {

// Uniform dyadic partition of [0, 1]. n_steps must be a power of two so
// refinement studies can couple resolutions by aggregating increments.
struct PathGrid {
  int n_steps = 0;
  double dt = 0.0;

  double time(int j) const { return static_cast<double>(j) * dt; }
};

PathGrid make_grid(int n_steps);

// Discretized k-dimensional Brownian path: increments row j holds
// b_{t_{j+1}} - b_{t_j}; values row j holds b_{t_j} (values row 0 is zero).
struct BrownianPath {
  PathGrid grid;
  int k = 0;
  Eigen::MatrixXd increments;  // n_steps x k
  Eigen::MatrixXd values;      // (n_steps + 1) x k
};

// Piecewise-linear Cameron-Martin direction: constant slope per cell.
struct CameronMartinPath {
  PathGrid grid;
  int k = 0;
  Eigen::MatrixXd slopes;  // n_steps x k
  Eigen::MatrixXd values;  // (n_steps + 1) x k
};

// Deterministic per-path normal stream. The stream is a pure function of
// (seed, path_index): worker scheduling can never change a path's draws.
// Normals come from an explicit Box-Muller transform on 53-bit uniforms
// because std::normal_distribution's draw sequence is implementation
// defined, which would break byte-identical reruns across toolchains.
class PathRng {
public:
  PathRng(std::uint64_t seed, std::uint64_t path_index);

  double uniform01();  // [0, 1)
  double gauss();      // standard normal

private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Increments are N(0, dt I_k), filled in (step, component) order.
BrownianPath sample_brownian(const PathGrid& grid, int k, std::uint64_t seed,
                             std::uint64_t path_index);

// Aggregates increments in groups of `factor` (a power of two dividing
// n_steps) to produce the same path on a coarser dyadic grid.
BrownianPath coarsen_path(const BrownianPath& omega, int factor);

// slope(t, component) sampled at cell midpoints defines the direction.
CameronMartinPath make_cm_path(const PathGrid& grid, int k,
                               const std::function<double(double, int)>& slope);

// <h1, h2>_H = integral of hdot1 . hdot2 dt (exact for piecewise-constant
// slopes).
double cm_inner(const CameronMartinPath& h1, const CameronMartinPath& h2);
double cm_energy(const CameronMartinPath& h);

// omega + eps h at the increment level: each increment gains
// eps * slope * dt, exactly.
BrownianPath shift_path(const BrownianPath& omega, const CameronMartinPath& h,
                        double eps);

// integral of hdot . db over [0, 1]: sum_j slope_j . (b_{j+1} - b_j).
double wiener_integral(const CameronMartinPath& h, const BrownianPath& omega);

// Smooth cylinder functional F(omega) = f(omega_{t_1}, .., omega_{t_m}).
// `partial(args, i)` is the gradient of f in its i-th R^k argument; it may
// be empty for value-only functionals.
struct CylinderFunctional {
  std::string label;
  std::vector<double> times;  // strictly increasing, in (0, 1]
  std::function<double(const std::vector<Eigen::VectorXd>&)> value;
  std::function<Eigen::VectorXd(const std::vector<Eigen::VectorXd>&,
                                std::size_t)>
      partial;
};

// Maps each evaluation time to its grid index; throws ContractViolation if a
// time is off-grid, out of (0, 1], or not strictly increasing.
std::vector<int> cylinder_grid_indices(const CylinderFunctional& f,
                                       const PathGrid& grid);

double cylinder_value(const CylinderFunctional& f, const BrownianPath& omega);

// Directional (Cameron-Martin) derivative
//   d_h F = sum_i grad_i f(omega_{t_1}, ..) . h_{t_i}.
// Throws ContractViolation when partials are missing.
double cylinder_partial(const CylinderFunctional& f, const BrownianPath& omega,
                        const CameronMartinPath& h);

// Adjoint directional operator d_h^* G = -d_h G + G . integral of hdot db.
double dh_star(const CylinderFunctional& g, const BrownianPath& omega,
               const CameronMartinPath& h);

}  // namespace rolling

#endif

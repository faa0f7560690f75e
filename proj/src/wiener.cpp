#include "rolling/wiener.hpp"

#include <cmath>

namespace rolling {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractViolation(msg);
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

PathGrid make_grid(int n_steps) {
  require(is_power_of_two(n_steps), "grid size must be a power of two");
  return PathGrid{n_steps, 1.0 / static_cast<double>(n_steps)};
}

PathRng::PathRng(std::uint64_t seed, std::uint64_t path_index)
    : gen_(splitmix64(splitmix64(seed) ^
                      splitmix64(path_index * 0xD1B54A32D192ED03ULL + 1))) {}

double PathRng::uniform01() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double PathRng::gauss() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(kTwoPi * u2);
  has_spare_ = true;
  return r * std::cos(kTwoPi * u2);
}

BrownianPath sample_brownian(const PathGrid& grid, int k, std::uint64_t seed,
                             std::uint64_t path_index) {
  require(k >= 1, "sample_brownian: k must be >= 1");
  require(grid.n_steps >= 1, "sample_brownian: empty grid");
  BrownianPath omega;
  omega.grid = grid;
  omega.k = k;
  omega.increments.resize(grid.n_steps, k);
  omega.values.resize(grid.n_steps + 1, k);
  omega.values.row(0).setZero();
  PathRng rng(seed, path_index);
  const double scale = std::sqrt(grid.dt);
  for (int j = 0; j < grid.n_steps; ++j) {
    for (int c = 0; c < k; ++c) omega.increments(j, c) = scale * rng.gauss();
    omega.values.row(j + 1) = omega.values.row(j) + omega.increments.row(j);
  }
  return omega;
}

BrownianPath coarsen_path(const BrownianPath& omega, int factor) {
  require(factor >= 1 && is_power_of_two(factor),
          "coarsen_path: factor must be a power of two");
  require(omega.grid.n_steps % factor == 0,
          "coarsen_path: factor must divide the grid");
  if (factor == 1) return omega;
  BrownianPath out;
  out.grid = make_grid(omega.grid.n_steps / factor);
  out.k = omega.k;
  out.increments = Eigen::MatrixXd::Zero(out.grid.n_steps, omega.k);
  out.values.resize(out.grid.n_steps + 1, omega.k);
  out.values.row(0).setZero();
  for (int j = 0; j < out.grid.n_steps; ++j) {
    for (int s = 0; s < factor; ++s)
      out.increments.row(j) += omega.increments.row(j * factor + s);
    out.values.row(j + 1) = out.values.row(j) + out.increments.row(j);
  }
  return out;
}

CameronMartinPath make_cm_path(
    const PathGrid& grid, int k,
    const std::function<double(double, int)>& slope) {
  require(k >= 1, "make_cm_path: k must be >= 1");
  require(static_cast<bool>(slope), "make_cm_path: slope function is empty");
  CameronMartinPath h;
  h.grid = grid;
  h.k = k;
  h.slopes.resize(grid.n_steps, k);
  h.values.resize(grid.n_steps + 1, k);
  h.values.row(0).setZero();
  for (int j = 0; j < grid.n_steps; ++j) {
    const double t_mid = (static_cast<double>(j) + 0.5) * grid.dt;
    for (int c = 0; c < k; ++c) h.slopes(j, c) = slope(t_mid, c);
    h.values.row(j + 1) = h.values.row(j) + grid.dt * h.slopes.row(j);
  }
  return h;
}

double cm_inner(const CameronMartinPath& h1, const CameronMartinPath& h2) {
  require(h1.grid.n_steps == h2.grid.n_steps && h1.k == h2.k,
          "cm_inner: grid or component mismatch");
  return h1.grid.dt * (h1.slopes.cwiseProduct(h2.slopes)).sum();
}

double cm_energy(const CameronMartinPath& h) { return cm_inner(h, h); }

BrownianPath shift_path(const BrownianPath& omega, const CameronMartinPath& h,
                        double eps) {
  require(omega.grid.n_steps == h.grid.n_steps && omega.k == h.k,
          "shift_path: grid or component mismatch");
  BrownianPath out;
  out.grid = omega.grid;
  out.k = omega.k;
  out.increments = omega.increments + (eps * omega.grid.dt) * h.slopes;
  out.values.resize(omega.grid.n_steps + 1, omega.k);
  out.values.row(0).setZero();
  for (int j = 0; j < omega.grid.n_steps; ++j)
    out.values.row(j + 1) = out.values.row(j) + out.increments.row(j);
  return out;
}

double wiener_integral(const CameronMartinPath& h, const BrownianPath& omega) {
  require(omega.grid.n_steps == h.grid.n_steps && omega.k == h.k,
          "wiener_integral: grid or component mismatch");
  return (h.slopes.cwiseProduct(omega.increments)).sum();
}

std::vector<int> cylinder_grid_indices(const CylinderFunctional& f,
                                       const PathGrid& grid) {
  require(!f.times.empty(), "cylinder functional has no evaluation times");
  std::vector<int> indices;
  double prev = 0.0;
  for (const double t : f.times) {
    require(t > 0.0 && t <= 1.0, "cylinder time outside (0, 1]: " + f.label);
    require(t > prev, "cylinder times must be strictly increasing: " + f.label);
    prev = t;
    const double pos = t * static_cast<double>(grid.n_steps);
    const double rounded = std::round(pos);
    require(std::abs(pos - rounded) <= 1e-9 * grid.n_steps,
            "cylinder time off the grid: " + f.label);
    indices.push_back(static_cast<int>(rounded));
  }
  return indices;
}

namespace {

std::vector<Eigen::VectorXd> gather_arguments(const CylinderFunctional& f,
                                              const BrownianPath& omega) {
  std::vector<Eigen::VectorXd> args;
  for (const int idx : cylinder_grid_indices(f, omega.grid))
    args.push_back(omega.values.row(idx).transpose());
  return args;
}

}  // namespace

double cylinder_value(const CylinderFunctional& f, const BrownianPath& omega) {
  require(static_cast<bool>(f.value),
          "cylinder functional has no value map: " + f.label);
  return f.value(gather_arguments(f, omega));
}

double cylinder_partial(const CylinderFunctional& f, const BrownianPath& omega,
                        const CameronMartinPath& h) {
  require(static_cast<bool>(f.partial),
          "cylinder functional has no partial derivatives: " + f.label);
  require(omega.grid.n_steps == h.grid.n_steps && omega.k == h.k,
          "cylinder_partial: grid or component mismatch");
  const std::vector<int> indices = cylinder_grid_indices(f, omega.grid);
  const std::vector<Eigen::VectorXd> args = gather_arguments(f, omega);
  double result = 0.0;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const Eigen::VectorXd grad = f.partial(args, i);
    require(grad.size() == omega.k,
            "cylinder partial has wrong dimension: " + f.label);
    result += grad.dot(h.values.row(indices[i]).transpose());
  }
  return result;
}

double dh_star(const CylinderFunctional& g, const BrownianPath& omega,
               const CameronMartinPath& h) {
  return -cylinder_partial(g, omega, h) +
         cylinder_value(g, omega) * wiener_integral(h, omega);
}

}  // namespace rolling

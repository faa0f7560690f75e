#ifndef ROLLING_RUNNER_HPP
#define ROLLING_RUNNER_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rolling/config.hpp"
#include "rolling/flow.hpp"
#include "rolling/group.hpp"
#include "rolling/malliavin.hpp"

namespace rolling {

// Grid index of evaluation time t; throws ConfigError when t is off-grid.
int resolve_time_index(double t, int n_steps);

// One formula-vs-oracle comparison from the derivative battery.
// closed_form_error is filled only for the configuration with an exact
// discrete closed form (the step-2 area coordinate under the first-component
// direction).
struct BatteryRow {
  std::string model;
  std::string f;
  std::string h;
  int path = 0;
  double formula = 0.0;
  double oracle = 0.0;
  double rel_error = 0.0;
  std::optional<double> closed_form_error;
};

struct BatterySummary {
  std::string model;
  std::string f;
  std::string h;
  int n_paths = 0;
  int excluded_paths = 0;
  double median_rel_error = 0.0;
  double p95_rel_error = 0.0;
  std::optional<double> max_closed_form_error;
};

struct BatteryResult {
  std::vector<BatteryRow> rows;
  int n_paths = 0;
  int excluded_paths = 0;
};

// Runs the constant-coefficient derivative battery on one model: per path,
// one base flow plus two shifted flows per direction, every (f, h) pairing
// evaluated at t_index. Paths whose base or shifted flow blows up are
// dropped and counted in excluded_paths.
BatteryResult run_derivative_battery(
    const GroupModel& model, const std::vector<std::string>& f_labels,
    const std::vector<std::string>& h_labels, int n_steps, int t_index,
    double eps, int n_paths, std::uint64_t seed, int threads, Scheme scheme);

std::vector<BatterySummary> summarize_battery(const BatteryResult& result);

// Two-route adjoint comparison: for each step count, RMS over paths of the
// sup Frobenius distance between adjoint_of(states) and the matrix
// recursion, on noise coarsened from the finest grid so every resolution
// sees the same Brownian path. `rate` is the least-squares slope of
// log2 error against -log2 n_steps.
struct CrosscheckPoint {
  int n_steps = 0;
  double rms_sup_error = 0.0;
};

struct CrosscheckResult {
  std::vector<CrosscheckPoint> points;
  double rate = 0.0;
  int n_paths = 0;
};

CrosscheckResult adjoint_crosscheck(const GroupModel& model,
                                    const std::vector<int>& steps_list,
                                    int n_paths, std::uint64_t seed,
                                    int threads);

// Subcommand entry points. Each writes config.json and manifest.json into
// the output directory next to its tables. Returned exit codes: 0 pass,
// 3 statistical failure, 4 blowups beyond 1% of paths. Config problems
// throw ConfigError (mapped to exit 2 by the binary).
int cmd_simulate(const ExperimentConfig& config);
int cmd_verify_derivative(const ExperimentConfig& config);
int cmd_cutoff_study(const ExperimentConfig& config);
int cmd_ibp(const ExperimentConfig& config);
int cmd_adjoint_crosscheck(const ExperimentConfig& config);

}  // namespace rolling

#endif

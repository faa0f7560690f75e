#include "rolling/malliavin.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rolling/errors.hpp"
#include "rolling/mc.hpp"

namespace rolling {

namespace {

void require_time_index(int t_index, int n_steps, const char* where) {
  if (t_index < 0 || t_index > n_steps) {
    throw ContractViolation(std::string(where) + ": time index off the grid");
  }
}

}  // namespace

double relative_error(double formula_value, double oracle_value) {
  return std::abs(formula_value - oracle_value) /
         std::max(1.0, std::abs(oracle_value));
}

double derivative_formula(const GroupModel& model, const ScalarField& f,
                          const FlowTrajectory& flow,
                          const VariationProcess& variation, int t_index) {
  require_time_index(t_index, flow.grid.n_steps, "derivative_formula");
  if (variation.grid.n_steps != flow.grid.n_steps) {
    throw ContractViolation("derivative_formula: variation grid mismatch");
  }
  const AlgebraVector grad =
      hat_gradient(model, f, flow.states[static_cast<std::size_t>(t_index)]);
  return grad.dot(variation.values[static_cast<std::size_t>(t_index)]);
}

double derivative_formula(const GroupModel& model, const ScalarField& f,
                          const FlowTrajectory& flow,
                          const CameronMartinPath& h, int t_index) {
  return derivative_formula(model, f, flow, solve_Theta(model, flow, h),
                            t_index);
}

double derivative_fd_oracle(const GroupModel& model, const ScalarField& f,
                            const CoefficientField& u, const BrownianPath& omega,
                            const CameronMartinPath& h, int t_index, double eps,
                            Scheme scheme) {
  require_time_index(t_index, omega.grid.n_steps, "derivative_fd_oracle");
  if (!(eps > 0.0)) {
    throw ContractViolation("derivative_fd_oracle: eps must be positive");
  }
  const FlowTrajectory plus =
      solve_rolling(model, u, shift_path(omega, h, eps), scheme);
  const FlowTrajectory minus =
      solve_rolling(model, u, shift_path(omega, h, -eps), scheme);
  const std::size_t t = static_cast<std::size_t>(t_index);
  return (f.value(plus.states[t].x) - f.value(minus.states[t].x)) /
         (2.0 * eps);
}

double richardson_oracle(const GroupModel& model, const ScalarField& f,
                         const CoefficientField& u, const BrownianPath& omega,
                         const CameronMartinPath& h, int t_index, double eps,
                         Scheme scheme) {
  const double coarse =
      derivative_fd_oracle(model, f, u, omega, h, t_index, eps, scheme);
  const double fine =
      derivative_fd_oracle(model, f, u, omega, h, t_index, 0.5 * eps, scheme);
  return (4.0 * fine - coarse) / 3.0;
}

DerivativeReport derivative_report(const GroupModel& model, const ScalarField& f,
                                   const BrownianPath& omega,
                                   const CameronMartinPath& h, int t_index,
                                   double eps, Scheme scheme) {
  const CoefficientField one = trivial_coefficient();
  const FlowTrajectory flow = solve_rolling(model, one, omega, scheme);
  DerivativeReport report;
  report.formula_value = derivative_formula(model, f, flow, h, t_index);
  report.oracle_value =
      derivative_fd_oracle(model, f, one, omega, h, t_index, eps, scheme);
  report.rel_error = relative_error(report.formula_value, report.oracle_value);
  report.epsilon = eps;
  report.n_steps = omega.grid.n_steps;
  return report;
}

double kernel_D(const GroupModel& model, const ScalarField& f,
                const FlowTrajectory& flow, int generator_slot, int s_index,
                int t_index) {
  require_time_index(t_index, flow.grid.n_steps, "kernel_D");
  require_time_index(s_index, flow.grid.n_steps, "kernel_D");
  if (generator_slot < 0 ||
      generator_slot >= static_cast<int>(model.generators.size())) {
    throw ContractViolation("kernel_D: generator slot out of range");
  }
  const int column = model.generators[static_cast<std::size_t>(generator_slot)];
  const int upto = std::min(s_index, t_index);
  const double dt = flow.grid.dt;

  AlgebraVector window = AlgebraVector::Zero(model.algebra.dim());
  for (int l = 0; l < upto; ++l) {
    window += (0.5 * dt) *
              (flow.adjoints[static_cast<std::size_t>(l)].col(column) +
               flow.adjoints[static_cast<std::size_t>(l) + 1].col(column));
  }
  const AlgebraVector grad =
      hat_gradient(model, f, flow.states[static_cast<std::size_t>(t_index)]);
  return grad.dot(window);
}

double kernel_reconstruction(const GroupModel& model, const ScalarField& f,
                             const FlowTrajectory& flow,
                             const CameronMartinPath& h, int t_index) {
  require_time_index(t_index, flow.grid.n_steps, "kernel_reconstruction");
  if (h.grid.n_steps != flow.grid.n_steps ||
      h.k != static_cast<int>(model.generators.size())) {
    throw ContractViolation("kernel_reconstruction: direction mismatch");
  }
  const AlgebraVector grad =
      hat_gradient(model, f, flow.states[static_cast<std::size_t>(t_index)]);
  const double dt = flow.grid.dt;
  double total = 0.0;
  for (int j = 0; j < t_index; ++j) {
    for (std::size_t i = 0; i < model.generators.size(); ++i) {
      const int column = model.generators[i];
      const double increment =
          0.5 * dt *
          grad.dot(flow.adjoints[static_cast<std::size_t>(j)].col(column) +
                   flow.adjoints[static_cast<std::size_t>(j) + 1].col(column));
      total += increment * h.slopes(j, static_cast<int>(i));
    }
  }
  return total;
}

double area_derivative_closed_form(const BrownianPath& omega,
                                   const CameronMartinPath& h, int t_index) {
  require_time_index(t_index, omega.grid.n_steps, "area_derivative_closed_form");
  if (omega.k != 2 || h.k != 2) {
    throw ContractViolation(
        "area_derivative_closed_form: needs two-component paths");
  }
  for (int j = 0; j < h.grid.n_steps; ++j) {
    if (h.slopes(j, 1) != 0.0) {
      throw ContractViolation(
          "area_derivative_closed_form: second slope must vanish");
    }
  }
  const double dt = omega.grid.dt;
  double quadrature = 0.0;
  for (int j = 0; j < t_index; ++j) {
    quadrature += 0.5 * (omega.values(j, 1) + omega.values(j + 1, 1)) *
                  h.slopes(j, 0) * dt;
  }
  return 0.5 * h.values(t_index, 0) * omega.values(t_index, 1) - quadrature;
}

double second_order_fd(const GroupModel& model, const ScalarField& f,
                       const CoefficientField& u, const BrownianPath& omega,
                       const CameronMartinPath& h1, const CameronMartinPath& h2,
                       int t_index, double eps, Scheme scheme) {
  const double plus = derivative_fd_oracle(
      model, f, u, shift_path(omega, h2, eps), h1, t_index, eps, scheme);
  const double minus = derivative_fd_oracle(
      model, f, u, shift_path(omega, h2, -eps), h1, t_index, eps, scheme);
  return (plus - minus) / (2.0 * eps);
}

IbpReport ibp_statistic(const CylinderFunctional& f, const CylinderFunctional& g,
                        const CameronMartinPath& h, int n_paths,
                        std::uint64_t seed, int threads) {
  if (n_paths < 1) {
    throw ContractViolation("ibp_statistic: need at least one path");
  }
  std::vector<double> lhs(static_cast<std::size_t>(n_paths));
  std::vector<double> rhs(static_cast<std::size_t>(n_paths));
  parallel_for(static_cast<std::size_t>(n_paths),
               resolve_thread_count(threads), [&](std::size_t i) {
                 const BrownianPath omega =
                     sample_brownian(h.grid, h.k, seed, i);
                 lhs[i] = cylinder_partial(f, omega, h) *
                          cylinder_value(g, omega);
                 rhs[i] = cylinder_value(f, omega) * dh_star(g, omega, h);
               });
  std::vector<double> diff(lhs.size());
  for (std::size_t i = 0; i < lhs.size(); ++i) diff[i] = lhs[i] - rhs[i];

  IbpReport report;
  const MeanStderr l = mean_stderr(lhs);
  const MeanStderr r = mean_stderr(rhs);
  report.lhs_mean = l.mean;
  report.lhs_stderr = l.stderr_of_mean;
  report.rhs_mean = r.mean;
  report.rhs_stderr = r.stderr_of_mean;
  const MeanStderr d = mean_stderr(diff);
  report.difference = d.mean;
  report.stderr_of_mean = d.stderr_of_mean;
  report.n_paths = n_paths;
  if (d.stderr_of_mean > 0.0) {
    report.z = std::abs(d.mean) / d.stderr_of_mean;
    report.pass = report.z <= 3.0;
  } else {
    report.z = 0.0;
    report.pass = d.mean == 0.0;
  }
  return report;
}

namespace {

struct SupSamples {
  std::vector<double> sups;  // included paths, in path order
  int excluded = 0;
  double frozen_truncated = 0.0;  // fractions over included paths
  double frozen_baseline = 0.0;
};

SupSamples collect_sup_samples(const PairSampler& sampler, int n_paths,
                               int threads) {
  std::vector<std::optional<PairSample>> slots(
      static_cast<std::size_t>(n_paths));
  parallel_for(static_cast<std::size_t>(n_paths),
               resolve_thread_count(threads), [&](std::size_t i) {
                 try {
                   slots[i] = sampler(i);
                 } catch (const BlowupError&) {
                   slots[i] = std::nullopt;
                 }
               });
  SupSamples out;
  int frozen_t = 0;
  int frozen_b = 0;
  for (const auto& slot : slots) {
    if (!slot.has_value()) {
      ++out.excluded;
      continue;
    }
    out.sups.push_back(slot->sup);
    frozen_t += slot->frozen_truncated ? 1 : 0;
    frozen_b += slot->frozen_baseline ? 1 : 0;
  }
  if (!out.sups.empty()) {
    const double n = static_cast<double>(out.sups.size());
    out.frozen_truncated = frozen_t / n;
    out.frozen_baseline = frozen_b / n;
  }
  return out;
}

StudyRow reduce_to_row(const SupSamples& samples, double p, int n_paths) {
  StudyRow row;
  row.p = p;
  row.n_paths = n_paths;
  row.excluded_paths = samples.excluded;
  row.frozen_truncated_fraction = samples.frozen_truncated;
  row.frozen_baseline_fraction = samples.frozen_baseline;
  std::vector<double> powered(samples.sups.size());
  for (std::size_t i = 0; i < samples.sups.size(); ++i) {
    powered[i] = std::pow(samples.sups[i], p);
  }
  const MeanStderr stats = mean_stderr(powered);
  row.estimate = stats.mean;
  row.stderr_of_mean = stats.stderr_of_mean;
  return row;
}

void require_p_list(const std::vector<double>& p_list) {
  if (p_list.empty()) {
    throw ConfigError("convergence study: empty p list");
  }
  for (double p : p_list) {
    if (p != 2.0 && p != 4.0) {
      throw ConfigError("convergence study: p must be 2 or 4");
    }
  }
}

}  // namespace

StudyRow lp_sup_distance(const PairSampler& sampler, double p, int n_paths,
                         int threads) {
  require_p_list({p});
  if (n_paths < 1) {
    throw ContractViolation("lp_sup_distance: need at least one path");
  }
  return reduce_to_row(collect_sup_samples(sampler, n_paths, threads), p,
                       n_paths);
}

std::vector<StudyRow> run_convergence_study(const StudySetup& setup) {
  static const std::set<std::string> kinds = {"eta_m", "adjoint_m", "theta_m",
                                              "Theta_n"};
  if (kinds.count(setup.kind) == 0) {
    throw ConfigError("unknown study kind '" + setup.kind + "'");
  }
  require_p_list(setup.p_list);
  if (setup.parameters.empty()) {
    throw ConfigError("convergence study: empty parameter list");
  }
  if (!std::is_sorted(setup.parameters.begin(), setup.parameters.end())) {
    throw ConfigError("convergence study: parameters must be ascending");
  }
  if (setup.n_paths < 2) {
    throw ConfigError("convergence study: need at least two paths");
  }
  const bool theta_kind =
      setup.kind == "theta_m" || setup.kind == "Theta_n";
  if (theta_kind && !setup.h_slope) {
    throw ConfigError("convergence study: kind " + setup.kind +
                      " needs a direction");
  }
  if (setup.kind == "eta_m" && !setup.f.value) {
    throw ConfigError("convergence study: kind eta_m needs an observable");
  }

  const GroupModel& model = setup.model;
  const int k = static_cast<int>(model.generators.size());
  const PathGrid grid = make_grid(setup.n_steps);
  CameronMartinPath h;
  if (theta_kind) h = make_cm_path(grid, k, setup.h_slope);

  std::vector<SupSamples> per_parameter;
  per_parameter.reserve(setup.parameters.size());

  for (double parameter : setup.parameters) {
    CoefficientField truncated;
    CoefficientField baseline;
    if (setup.kind == "Theta_n") {
      const double rounded = std::round(parameter);
      if (rounded != parameter || parameter < 1.0) {
        throw ConfigError("convergence study: Theta_n parameters must be "
                          "positive integers");
      }
      CutoffSpec spec;
      spec.n = static_cast<int>(rounded);
      truncated = make_coefficient(model, "v_n", spec);
      baseline = trivial_coefficient();
    } else {
      CutoffSpec spec;
      spec.m = parameter;
      spec.transition_width = setup.transition_width > 0.0
                                  ? setup.transition_width
                                  : 0.5 * parameter;
      truncated = make_coefficient(model, "u_m", spec);
      baseline = make_coefficient(model, "v", spec);
    }

    PairSampler sampler = [&](std::uint64_t path_index) {
      const BrownianPath omega =
          sample_brownian(grid, k, setup.seed, path_index);
      const FlowTrajectory a =
          solve_rolling(model, truncated, omega, setup.scheme);
      const FlowTrajectory b =
          solve_rolling(model, baseline, omega, setup.scheme);
      PairSample sample;
      sample.frozen_truncated = a.coefficient_hit_zero;
      sample.frozen_baseline = b.coefficient_hit_zero;
      const std::size_t count = a.states.size();
      if (setup.kind == "eta_m") {
        for (std::size_t j = 0; j < count; ++j) {
          sample.sup = std::max(sample.sup,
                                std::abs(setup.f.value(a.states[j].x) -
                                         setup.f.value(b.states[j].x)));
        }
      } else if (setup.kind == "adjoint_m") {
        for (std::size_t j = 0; j < count; ++j) {
          sample.sup =
              std::max(sample.sup, (a.adjoints[j] - b.adjoints[j]).norm());
        }
      } else {
        const VariationProcess ta =
            solve_theta(model, truncated, a, omega, h);
        const VariationProcess tb = solve_theta(model, baseline, b, omega, h);
        for (std::size_t j = 0; j < count; ++j) {
          sample.sup =
              std::max(sample.sup, (ta.values[j] - tb.values[j]).norm());
        }
      }
      return sample;
    };
    per_parameter.push_back(
        collect_sup_samples(sampler, setup.n_paths, setup.threads));
  }

  std::vector<StudyRow> rows;
  rows.reserve(setup.p_list.size() * setup.parameters.size());
  for (double p : setup.p_list) {
    for (std::size_t i = 0; i < setup.parameters.size(); ++i) {
      StudyRow row = reduce_to_row(per_parameter[i], p, setup.n_paths);
      row.kind = setup.kind;
      row.model = model.label;
      row.parameter = setup.parameters[i];
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace rolling

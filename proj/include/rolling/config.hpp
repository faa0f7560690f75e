#ifndef ROLLING_CONFIG_HPP
#define ROLLING_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rolling/cutoff.hpp"

namespace rolling {

// Resolved experiment configuration shared by every subcommand. Unused
// fields are simply ignored by commands that do not consume them; all of
// them are echoed into the output directory so a run is reproducible from
// its artifacts alone.
struct ExperimentConfig {
  std::string model = "heisenberg";
  std::string coefficient = "full";  // full | u_m | v | v_n
  CutoffSpec cutoff;                 // cutoff.transition_width < 0: use m/2
  int n_steps = 4096;
  std::uint64_t seed = 12345;
  int paths = 100;
  std::vector<double> p_list = {2.0, 4.0};
  // Study parameters (m or n values). Empty: per-kind defaults
  // ({1,2,4,8} for the m kinds, {1,2,4,8,16} for Theta_n).
  std::vector<double> parameters;
  std::vector<std::string> kinds = {"eta_m", "adjoint_m", "theta_m",
                                    "Theta_n"};
  std::vector<std::string> f_labels = {"coord-last", "poly-quad", "gauss"};
  std::vector<std::string> h_labels = {"linear", "sine", "bump"};
  std::string study_f = "coord-last";  // observable for eta_m studies
  std::string study_h = "linear";      // direction for the theta studies
  double t = 1.0;                      // evaluation time in (0, 1]
  double epsilon = 1e-5;               // oracle difference step
  std::string scheme = "geometric-euler";
  std::string out = "out";
  int threads = 0;  // 0: ROLLING_LAB_THREADS, then hardware concurrency
  std::vector<int> steps_list = {1024, 2048, 4096, 8192};
};

// Parses a JSON config file. Keys absent from the file keep their defaults;
// unknown keys are rejected. Throws ConfigError on unreadable or malformed
// input.
ExperimentConfig load_config_file(const std::string& path);

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> paths;
  std::optional<int> n_steps;
  std::optional<std::string> out;
  std::optional<int> threads;
};

void apply_overrides(ExperimentConfig& config, const ConfigOverrides& over);

// Materializes derived defaults (transition width) and validates every
// field, resolving the model once to catch bad labels early. Throws
// ConfigError with a field-specific message.
void finalize_config(ExperimentConfig& config);

// Exact resolved configuration, defaults included, in a stable key order.
nlohmann::ordered_json config_to_json(const ExperimentConfig& config);

// Manifest written to every output directory: resolved config, seed, and
// library version. Deliberately carries no timestamps or host details so
// reruns are byte-identical.
std::string manifest_text(const ExperimentConfig& config);

}  // namespace rolling

#endif

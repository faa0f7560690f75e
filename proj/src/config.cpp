#include "rolling/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "rolling/bundled.hpp"
#include "rolling/errors.hpp"
#include "rolling/flow.hpp"
#include "rolling/group.hpp"
#include "rolling/version.hpp"

namespace rolling {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& object, const std::set<std::string>& known,
                         const std::string& where) {
  for (auto it = object.begin(); it != object.end(); ++it) {
    if (known.count(it.key()) == 0) {
      throw ConfigError("unknown config key '" + it.key() + "' in " + where);
    }
  }
}

template <class T>
void read_field(const json& object, const char* key, T& into) {
  if (!object.contains(key)) return;
  try {
    into = object.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key +
                      "' has the wrong type");
  }
}

bool power_of_two(long long v) { return v >= 1 && (v & (v - 1)) == 0; }

}  // namespace

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot read config file '" + path + "'");
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " +
                      e.what());
  }
  if (!j.is_object()) {
    throw ConfigError("config file '" + path + "' must hold a JSON object");
  }

  static const std::set<std::string> known = {
      "model",   "coefficient", "cutoff",  "n_steps",  "seed",
      "paths",   "p_list",      "parameters", "kinds", "f",
      "h",       "study_f",     "study_h", "t",        "epsilon",
      "scheme",  "out",         "threads", "steps_list"};
  reject_unknown_keys(j, known, "the top level");

  ExperimentConfig config;
  read_field(j, "model", config.model);
  read_field(j, "coefficient", config.coefficient);
  if (j.contains("cutoff")) {
    const json& c = j.at("cutoff");
    if (!c.is_object()) {
      throw ConfigError("config key 'cutoff' must be an object");
    }
    reject_unknown_keys(c, {"m", "n", "transition_width"}, "'cutoff'");
    read_field(c, "m", config.cutoff.m);
    read_field(c, "n", config.cutoff.n);
    double width = -1.0;
    read_field(c, "transition_width", width);
    config.cutoff.transition_width = c.contains("transition_width")
                                         ? width
                                         : -1.0;
  } else {
    config.cutoff.transition_width = -1.0;
  }
  read_field(j, "n_steps", config.n_steps);
  read_field(j, "seed", config.seed);
  read_field(j, "paths", config.paths);
  read_field(j, "p_list", config.p_list);
  read_field(j, "parameters", config.parameters);
  read_field(j, "kinds", config.kinds);
  read_field(j, "f", config.f_labels);
  read_field(j, "h", config.h_labels);
  read_field(j, "study_f", config.study_f);
  read_field(j, "study_h", config.study_h);
  read_field(j, "t", config.t);
  read_field(j, "epsilon", config.epsilon);
  read_field(j, "scheme", config.scheme);
  read_field(j, "out", config.out);
  read_field(j, "threads", config.threads);
  read_field(j, "steps_list", config.steps_list);
  return config;
}

void apply_overrides(ExperimentConfig& config, const ConfigOverrides& over) {
  if (over.seed) config.seed = *over.seed;
  if (over.paths) config.paths = *over.paths;
  if (over.n_steps) config.n_steps = *over.n_steps;
  if (over.out) config.out = *over.out;
  if (over.threads) config.threads = *over.threads;
}

void finalize_config(ExperimentConfig& config) {
  // Resolves the label once so a bad model (or unreadable custom file)
  // fails before any simulation.
  make_model(config.model);
  parse_scheme(config.scheme);

  static const std::set<std::string> coefficient_kinds = {"full", "u_m", "v",
                                                          "v_n"};
  if (coefficient_kinds.count(config.coefficient) == 0) {
    throw ConfigError("unknown coefficient kind '" + config.coefficient + "'");
  }

  if (config.cutoff.transition_width < 0.0) {
    config.cutoff.transition_width = 0.5 * config.cutoff.m;
  }
  validate_cutoff_spec(config.cutoff);

  if (!power_of_two(config.n_steps) || config.n_steps < 2) {
    throw ConfigError("n_steps must be a power of two, at least 2");
  }
  if (config.paths < 0) {
    throw ConfigError("paths must be nonnegative");
  }
  if (config.p_list.empty()) {
    throw ConfigError("p_list must not be empty");
  }
  for (double p : config.p_list) {
    if (p != 2.0 && p != 4.0) {
      throw ConfigError("p_list entries must be 2 or 4");
    }
  }
  if (!config.parameters.empty()) {
    if (!std::is_sorted(config.parameters.begin(), config.parameters.end())) {
      throw ConfigError("parameters must be ascending");
    }
    if (config.parameters.front() <= 0.0) {
      throw ConfigError("parameters must be positive");
    }
  }
  static const std::set<std::string> study_kinds = {"eta_m", "adjoint_m",
                                                    "theta_m", "Theta_n"};
  if (config.kinds.empty()) {
    throw ConfigError("kinds must not be empty");
  }
  for (const std::string& kind : config.kinds) {
    if (study_kinds.count(kind) == 0) {
      throw ConfigError("unknown study kind '" + kind + "'");
    }
  }
  if (config.f_labels.empty() || config.h_labels.empty()) {
    throw ConfigError("f and h selections must not be empty");
  }
  for (const std::string& label : config.f_labels) {
    make_observable(label, 2);
  }
  for (const std::string& label : config.h_labels) {
    make_direction_slope(label, 2);
  }
  make_observable(config.study_f, 2);
  make_direction_slope(config.study_h, 2);

  if (!(config.t > 0.0 && config.t <= 1.0)) {
    throw ConfigError("t must lie in (0, 1]");
  }
  if (!(config.epsilon > 0.0)) {
    throw ConfigError("epsilon must be positive");
  }
  if (config.threads < 0) {
    throw ConfigError("threads must be nonnegative (0 = auto)");
  }
  if (config.out.empty()) {
    throw ConfigError("output directory must not be empty");
  }
  if (config.steps_list.empty()) {
    throw ConfigError("steps_list must not be empty");
  }
  for (int steps : config.steps_list) {
    if (!power_of_two(steps) || steps < 2) {
      throw ConfigError("steps_list entries must be powers of two, at least 2");
    }
  }
  if (!std::is_sorted(config.steps_list.begin(), config.steps_list.end()) ||
      std::adjacent_find(config.steps_list.begin(), config.steps_list.end()) !=
          config.steps_list.end()) {
    throw ConfigError("steps_list must be strictly ascending");
  }
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& config) {
  nlohmann::ordered_json j;
  j["model"] = config.model;
  j["coefficient"] = config.coefficient;
  j["cutoff"] = {{"m", config.cutoff.m},
                 {"n", config.cutoff.n},
                 {"transition_width", config.cutoff.transition_width}};
  j["n_steps"] = config.n_steps;
  j["seed"] = config.seed;
  j["paths"] = config.paths;
  j["p_list"] = config.p_list;
  j["parameters"] = config.parameters;
  j["kinds"] = config.kinds;
  j["f"] = config.f_labels;
  j["h"] = config.h_labels;
  j["study_f"] = config.study_f;
  j["study_h"] = config.study_h;
  j["t"] = config.t;
  j["epsilon"] = config.epsilon;
  j["scheme"] = config.scheme;
  j["out"] = config.out;
  j["threads"] = config.threads;
  j["steps_list"] = config.steps_list;
  return j;
}

std::string manifest_text(const ExperimentConfig& config) {
  nlohmann::ordered_json manifest;
  manifest["library_version"] = kLibraryVersion;
  manifest["seed"] = config.seed;
  manifest["config"] = config_to_json(config);
  return manifest.dump(2) + "\n";
}

}  // namespace rolling

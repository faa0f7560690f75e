#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "rolling/config.hpp"
#include "rolling/errors.hpp"
#include "rolling/io.hpp"
#include "rolling/runner.hpp"

using namespace rolling;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& leaf) {
  const fs::path dir = fs::temp_directory_path() / "rolling-lab-tests" / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<std::string> csv_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = text.find("\r\n", pos);
    REQUIRE(end != std::string::npos);  // every line must be CRLF-terminated
    lines.push_back(text.substr(pos, end - pos));
    pos = end + 2;
  }
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  return fields;
}

ExperimentConfig base_config(const fs::path& out) {
  ExperimentConfig config;
  config.model = "abelian:2";
  config.n_steps = 64;
  config.paths = 3;
  config.seed = 77;
  config.threads = 1;
  config.out = out.string();
  finalize_config(config);
  return config;
}

}  // namespace

TEST_CASE("time resolution maps onto the grid") {
  CHECK(resolve_time_index(1.0, 256) == 256);
  CHECK(resolve_time_index(0.5, 256) == 128);
  CHECK(resolve_time_index(0.25, 4) == 1);
  CHECK(resolve_time_index(0.2500000001, 4) == 1);
  CHECK_THROWS_AS(resolve_time_index(0.3, 4), ConfigError);
  CHECK_THROWS_AS(resolve_time_index(0.0, 64), ConfigError);
  CHECK_THROWS_AS(resolve_time_index(-0.5, 64), ConfigError);
  CHECK_THROWS_AS(resolve_time_index(1.5, 64), ConfigError);
}

TEST_CASE("config files populate fields and reject junk") {
  const fs::path dir = fresh_dir("config");
  const fs::path good = dir / "good.json";
  write_text_file(good, R"({
    "model": "abelian:2",
    "cutoff": {"m": 4.0},
    "n_steps": 256,
    "seed": 99,
    "paths": 7,
    "f": ["gauss"],
    "h": ["linear", "sine"],
    "scheme": "geometric-heun",
    "t": 0.5,
    "out": "results"
  })");
  ExperimentConfig config = load_config_file(good.string());
  CHECK(config.model == "abelian:2");
  CHECK(config.cutoff.m == 4.0);
  CHECK(config.cutoff.transition_width == -1.0);  // not yet materialized
  CHECK(config.n_steps == 256);
  CHECK(config.seed == 99);
  CHECK(config.paths == 7);
  CHECK(config.f_labels == std::vector<std::string>{"gauss"});
  CHECK(config.h_labels == std::vector<std::string>{"linear", "sine"});
  CHECK(config.scheme == "geometric-heun");
  CHECK(config.t == 0.5);
  CHECK(config.out == "results");

  finalize_config(config);
  CHECK(config.cutoff.transition_width == 2.0);  // default half the radius

  const fs::path unknown = dir / "unknown.json";
  write_text_file(unknown, R"({"modell": "x"})");
  CHECK_THROWS_AS(load_config_file(unknown.string()), ConfigError);

  const fs::path badtype = dir / "badtype.json";
  write_text_file(badtype, R"({"n_steps": "many"})");
  CHECK_THROWS_AS(load_config_file(badtype.string()), ConfigError);

  const fs::path badcutoff = dir / "badcutoff.json";
  write_text_file(badcutoff, R"({"cutoff": {"q": 1}})");
  CHECK_THROWS_AS(load_config_file(badcutoff.string()), ConfigError);

  const fs::path nonobject = dir / "nonobject.json";
  write_text_file(nonobject, "[1, 2]");
  CHECK_THROWS_AS(load_config_file(nonobject.string()), ConfigError);

  const fs::path garbled = dir / "garbled.json";
  write_text_file(garbled, "{nope");
  CHECK_THROWS_AS(load_config_file(garbled.string()), ConfigError);

  CHECK_THROWS_AS(load_config_file((dir / "missing.json").string()),
                  ConfigError);
}

TEST_CASE("overrides replace only the supplied fields") {
  ExperimentConfig config;
  ConfigOverrides over;
  over.seed = 5;
  over.paths = 9;
  over.out = std::string("elsewhere");
  apply_overrides(config, over);
  CHECK(config.seed == 5);
  CHECK(config.paths == 9);
  CHECK(config.out == "elsewhere");
  CHECK(config.n_steps == 4096);  // untouched default
  CHECK(config.threads == 0);
}

TEST_CASE("finalize rejects out-of-contract fields") {
  const auto expect_reject = [](auto&& mutate) {
    ExperimentConfig config;
    mutate(config);
    CHECK_THROWS_AS(finalize_config(config), ConfigError);
  };
  expect_reject([](ExperimentConfig& c) { c.model = "nonsense"; });
  expect_reject([](ExperimentConfig& c) { c.coefficient = "w_m"; });
  expect_reject([](ExperimentConfig& c) { c.n_steps = 100; });
  expect_reject([](ExperimentConfig& c) { c.n_steps = 0; });
  expect_reject([](ExperimentConfig& c) { c.paths = -1; });
  expect_reject([](ExperimentConfig& c) { c.p_list = {3.0}; });
  expect_reject([](ExperimentConfig& c) { c.p_list.clear(); });
  expect_reject([](ExperimentConfig& c) { c.parameters = {2.0, 1.0}; });
  expect_reject([](ExperimentConfig& c) { c.parameters = {-1.0}; });
  expect_reject([](ExperimentConfig& c) { c.kinds = {"zeta_m"}; });
  expect_reject([](ExperimentConfig& c) { c.kinds.clear(); });
  expect_reject([](ExperimentConfig& c) { c.f_labels = {"unknown"}; });
  expect_reject([](ExperimentConfig& c) { c.h_labels.clear(); });
  expect_reject([](ExperimentConfig& c) { c.t = 0.0; });
  expect_reject([](ExperimentConfig& c) { c.t = 1.5; });
  expect_reject([](ExperimentConfig& c) { c.epsilon = 0.0; });
  expect_reject([](ExperimentConfig& c) { c.scheme = "rk4"; });
  expect_reject([](ExperimentConfig& c) { c.threads = -1; });
  expect_reject([](ExperimentConfig& c) { c.out.clear(); });
  expect_reject([](ExperimentConfig& c) { c.steps_list = {128, 64}; });
  expect_reject([](ExperimentConfig& c) { c.steps_list = {96}; });
  expect_reject([](ExperimentConfig& c) { c.steps_list.clear(); });
}

TEST_CASE("number formatting round-trips and stays stable") {
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(0.1) == "0.10000000000000001");
  for (const double v : {3.141592653589793, 1e-300, -2.5e17, 0.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("tables serialize as RFC-4180 CSV with a JSON mirror") {
  const fs::path dir = fresh_dir("io");
  Table table;
  table.columns = {"name", "weird,col", "count", "score"};
  table.rows.push_back({text_cell("plain"), text_cell("say \"hi\", ok"),
                        int_cell(42), real_cell(0.1)});
  table.rows.push_back(
      {text_cell(""), text_cell("fine"), int_cell(-1), real_cell(2.0)});
  write_table(dir, "demo", table);

  CHECK(fs::exists(dir / "demo.csv"));
  CHECK(fs::exists(dir / "demo.json"));

  const std::string csv = slurp(dir / "demo.csv");
  // Every newline is part of a CRLF pair.
  for (std::size_t i = 0; i < csv.size(); ++i) {
    if (csv[i] == '\n') {
      REQUIRE(i > 0);
      CHECK(csv[i - 1] == '\r');
    }
  }
  const std::vector<std::string> lines = csv_lines(csv);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "name,\"weird,col\",count,score");
  CHECK(lines[1] ==
        "plain,\"say \"\"hi\"\", ok\",42,0.10000000000000001");
  CHECK(lines[2] == ",fine,-1,2");

  const nlohmann::json mirror = nlohmann::json::parse(slurp(dir / "demo.json"));
  REQUIRE(mirror.is_array());
  REQUIRE(mirror.size() == 2);
  CHECK(mirror[0].at("name") == "plain");
  CHECK(mirror[0].at("count").is_number_integer());
  CHECK(mirror[0].at("count") == 42);
  CHECK(mirror[0].at("score").get<double>() == 0.1);
  CHECK(mirror[1].at("name") == "");
}

TEST_CASE("derivative battery shape, accuracy, and thread invariance") {
  const GroupModel model = make_model("heisenberg");
  const std::vector<std::string> fs_list = {"coord-last", "gauss"};
  const std::vector<std::string> hs_list = {"linear", "sine"};
  const BatteryResult result = run_derivative_battery(
      model, fs_list, hs_list, 256, 256, 1e-5, 5, 31, 1,
      Scheme::GeometricEuler);
  CHECK(result.n_paths == 5);
  CHECK(result.excluded_paths == 0);
  REQUIRE(result.rows.size() == 5 * 2 * 2);
  for (const BatteryRow& row : result.rows) {
    CHECK(row.rel_error == relative_error(row.formula, row.oracle));
    const bool closed = row.f == "coord-last" && row.h == "linear";
    CHECK(row.closed_form_error.has_value() == closed);
  }

  const std::vector<BatterySummary> summaries = summarize_battery(result);
  REQUIRE(summaries.size() == 4);
  CHECK(summaries[0].f == "coord-last");
  CHECK(summaries[0].h == "linear");
  REQUIRE(summaries[0].max_closed_form_error.has_value());
  CHECK(*summaries[0].max_closed_form_error <= 1e-10);
  for (const BatterySummary& summary : summaries) {
    CHECK(summary.n_paths == 5);
    CHECK(summary.median_rel_error <= 1e-3);
    CHECK(summary.p95_rel_error <= 1e-2);
    CHECK(summary.median_rel_error <= summary.p95_rel_error);
  }

  const BatteryResult threaded = run_derivative_battery(
      model, fs_list, hs_list, 256, 256, 1e-5, 5, 31, 3,
      Scheme::GeometricEuler);
  REQUIRE(threaded.rows.size() == result.rows.size());
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    CHECK(threaded.rows[i].formula == result.rows[i].formula);
    CHECK(threaded.rows[i].oracle == result.rows[i].oracle);
    CHECK(threaded.rows[i].path == result.rows[i].path);
  }
}

TEST_CASE("simulate writes reproducible per-path tables") {
  const fs::path dir = fresh_dir("simulate");
  const ExperimentConfig config = base_config(dir);
  CHECK(cmd_simulate(config) == 0);

  for (const char* name :
       {"config.json", "manifest.json", "driving_00000.csv",
        "driving_00002.json", "trajectory_00000.csv", "trajectory_00002.csv",
        "paths_summary.csv", "paths_summary.json"}) {
    CAPTURE(name);
    CHECK(fs::exists(dir / name));
  }

  const std::vector<std::string> driving =
      csv_lines(slurp(dir / "driving_00001.csv"));
  const std::vector<std::string> trajectory =
      csv_lines(slurp(dir / "trajectory_00001.csv"));
  REQUIRE(driving.size() == 66);  // header + 65 grid rows
  REQUIRE(trajectory.size() == 66);
  CHECK(driving[0] == "t,b0,b1");
  CHECK(trajectory[0] == "t,x0,x1,w00,w01,w10,w11");
  // The flat model with the constant coefficient reproduces the driving
  // path, so the printed coordinates agree character for character.
  for (std::size_t row = 1; row < driving.size(); ++row) {
    const std::vector<std::string> b = split_fields(driving[row]);
    const std::vector<std::string> x = split_fields(trajectory[row]);
    REQUIRE(b.size() == 3);
    REQUIRE(x.size() == 7);
    CHECK(b[0] == x[0]);
    CHECK(b[1] == x[1]);
    CHECK(b[2] == x[2]);
    CHECK(x[3] == "1");  // identity adjoint on the flat model
    CHECK(x[4] == "0");
  }

  const std::vector<std::string> summary =
      csv_lines(slurp(dir / "paths_summary.csv"));
  REQUIRE(summary.size() == 4);
  CHECK(split_fields(summary[0])[0] == "path");
  for (std::size_t row = 1; row < summary.size(); ++row) {
    CHECK(split_fields(summary[row])[1] == "ok");
  }

  // Rerunning the identical configuration reproduces every byte.
  const std::string before = slurp(dir / "driving_00002.csv") +
                             slurp(dir / "trajectory_00002.csv") +
                             slurp(dir / "paths_summary.csv") +
                             slurp(dir / "config.json") +
                             slurp(dir / "manifest.json");
  CHECK(cmd_simulate(config) == 0);
  const std::string after = slurp(dir / "driving_00002.csv") +
                            slurp(dir / "trajectory_00002.csv") +
                            slurp(dir / "paths_summary.csv") +
                            slurp(dir / "config.json") +
                            slurp(dir / "manifest.json");
  CHECK(before == after);

  // The worker count must not leak into the numbers.
  const fs::path dir2 = fresh_dir("simulate-threads");
  ExperimentConfig threaded = base_config(dir2);
  threaded.threads = 3;
  CHECK(cmd_simulate(threaded) == 0);
  CHECK(slurp(dir2 / "trajectory_00001.csv") ==
        slurp(dir / "trajectory_00001.csv"));
  CHECK(slurp(dir2 / "paths_summary.csv") == slurp(dir / "paths_summary.csv"));
}

TEST_CASE("simulate with zero paths records only the run context") {
  const fs::path dir = fresh_dir("simulate-empty");
  ExperimentConfig config = base_config(dir);
  config.paths = 0;
  CHECK(cmd_simulate(config) == 0);
  CHECK(fs::exists(dir / "config.json"));
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK_FALSE(fs::exists(dir / "driving_00000.csv"));
}

TEST_CASE("commands reject demands below their statistical floor") {
  const fs::path dir = fresh_dir("floors");
  ExperimentConfig config = base_config(dir);
  config.paths = 0;
  CHECK_THROWS_AS(cmd_verify_derivative(config), ConfigError);
  config.paths = 999;
  CHECK_THROWS_AS(cmd_ibp(config), ConfigError);
  config.paths = 63;
  CHECK_THROWS_AS(cmd_adjoint_crosscheck(config), ConfigError);
}

TEST_CASE("verify-derivative passes on the flat model and writes its tables") {
  const fs::path dir = fresh_dir("verify");
  ExperimentConfig config = base_config(dir);
  config.paths = 4;
  config.f_labels = {"gauss"};
  config.h_labels = {"linear"};
  CHECK(cmd_verify_derivative(config) == 0);
  CHECK(fs::exists(dir / "derivative_reports.csv"));
  CHECK(fs::exists(dir / "derivative_summary.csv"));
  const std::vector<std::string> reports =
      csv_lines(slurp(dir / "derivative_reports.csv"));
  CHECK(reports.size() == 1 + 4);  // one row per path
}

TEST_CASE("cutoff study emits per-parameter tables and verdicts") {
  const fs::path dir = fresh_dir("study");
  ExperimentConfig config = base_config(dir);
  config.model = "heisenberg";
  config.n_steps = 128;
  config.paths = 100;
  config.kinds = {"eta_m"};
  config.parameters = {1.0, 8.0};
  config.p_list = {2.0};
  config.study_f = "gauss";
  finalize_config(config);
  CHECK(cmd_cutoff_study(config) == 0);
  CHECK(fs::exists(dir / "study_eta_m_p2.csv"));
  CHECK(fs::exists(dir / "verdicts.csv"));
  CHECK(fs::exists(dir / "frozen_paths.csv"));

  const std::vector<std::string> rows =
      csv_lines(slurp(dir / "study_eta_m_p2.csv"));
  REQUIRE(rows.size() == 3);  // header + one row per parameter
  const std::vector<std::string> first = split_fields(rows[1]);
  const std::vector<std::string> last = split_fields(rows[2]);
  CHECK(first[0] == "eta_m");
  CHECK(first[1] == "heisenberg");
  // Saturated radius: the distance vanishes identically.
  CHECK(last[4] == "0");
}

TEST_CASE("duality command runs the bundled battery at its floor") {
  const fs::path dir = fresh_dir("ibp");
  ExperimentConfig config = base_config(dir);
  config.paths = 1000;
  CHECK(cmd_ibp(config) == 0);
  const std::vector<std::string> rows = csv_lines(slurp(dir / "ibp.csv"));
  CHECK(rows.size() >= 1 + 6);  // header + the bundled triples
}

TEST_CASE("adjoint crosscheck command fits a first-order rate") {
  // Needs a model of nilpotency step 3: below that the quadratic term of the
  // matrix update vanishes and the two routes coincide exactly, leaving no
  // error to fit a rate against.
  const fs::path dir = fresh_dir("crosscheck");
  ExperimentConfig config = base_config(dir);
  config.model = "paper-example";
  config.paths = 64;
  config.steps_list = {64, 128, 256};
  finalize_config(config);
  CHECK(cmd_adjoint_crosscheck(config) == 0);
  CHECK(fs::exists(dir / "crosscheck_points.csv"));
  const std::vector<std::string> summary =
      csv_lines(slurp(dir / "crosscheck_summary.csv"));
  REQUIRE(summary.size() == 2);
  const std::vector<std::string> fields = split_fields(summary[1]);
  const double rate = std::stod(fields[0]);
  CHECK(rate >= 0.6);
  CHECK(rate <= 1.4);
}

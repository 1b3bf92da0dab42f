#include <filesystem>
#include <fstream>

#include "doctest.h"

#include "narrowchannel/experiments.hpp"

using namespace nchan;
using nlohmann::json;

namespace {

json bernoulli_env_json() {
  return {{"block_length", 1.0},
          {"mixing_range", 2.0},
          {"width_law", {{"kind", "two_point"}, {"a", 1.0}, {"b", 2.0}, {"p", 0.5}}},
          {"smoothing", "piecewise-constant"},
          {"wing_prob", 0.0},
          {"n0", 1.0},
          {"A1", 1.0},
          {"l_min", 1.0},
          {"l_max", 2.0},
          {"seed", 11},
          {"phase_shift", true}};
}

}  // namespace

TEST_CASE("unknown experiment kinds are usage errors") {
  CHECK_THROWS_AS(run_experiment({{"kind", "made-up"}}), ConfigError);
  CHECK_THROWS_AS(run_experiment(json::object()), ConfigError);
}

TEST_CASE("estimate-K experiment emits the documented CSV and reproduces itself") {
  json cfg{{"kind", "estimate-K"}, {"environment", bernoulli_env_json()},
           {"t_max", 2.0},         {"t_step", 0.25},
           {"S", 500.0},           {"seed", 123}};
  const ExperimentResult r1 = run_experiment(cfg);
  CHECK(r1.csv_header == std::vector<std::string>{"t", "K", "stderr"});
  CHECK(r1.csv_rows.size() >= 9);
  CHECK(r1.summary.at("K0").get<double>() == doctest::Approx(1.0));
  const ExperimentResult r2 = run_experiment(cfg);
  CHECK(r1.summary.dump() == r2.summary.dump());
  CHECK(r1.manifest.at("config").at("kind") == "estimate-K");
}

TEST_CASE("validate-geometry experiment reports per-check entries") {
  json cfg{{"kind", "validate-geometry"}, {"environment", bernoulli_env_json()},
           {"x_left", -5.0},              {"x_right", 5.0}};
  const ExperimentResult r = run_experiment(cfg);
  CHECK(r.summary.at("all_pass").get<bool>());
  CHECK(r.csv_rows.size() >= 4);
}

TEST_CASE("oracle-compare experiment stays within the dual-route tolerance") {
  json cfg{{"kind", "oracle-compare"}, {"n_shapes", 3}, {"beta", 1.0},
           {"a", 5.0},                 {"seed", 5},     {"bvp_h", 2e-3}};
  const ExperimentResult r = run_experiment(cfg);
  CHECK(r.summary.at("max_rel_diff").get<double>() < 1e-3);
  CHECK(r.csv_rows.size() == 3);
}

TEST_CASE("graph-mc experiment summarizes occupations") {
  json cfg{{"kind", "graph-mc"},
           {"environment", bernoulli_env_json()},
           {"x_left", -16.0},
           {"x_right", 6.0},
           {"beta", 1.0},
           {"a", 2.0},
           {"dt", 1e-3},
           {"n_paths", 100},
           {"seed", 3}};
  const ExperimentResult r = run_experiment(cfg);
  CHECK(r.summary.at("tau").at("n").get<int>() == 100);
  CHECK(r.csv_rows.size() == 100);
  CHECK(r.summary.at("wing_time").at("mean").get<double>() == 0.0);
}

TEST_CASE("write_outputs produces the three artifacts and rejects empty tables") {
  json cfg{{"kind", "estimate-K"}, {"environment", bernoulli_env_json()},
           {"t_max", 1.0},         {"t_step", 0.5},
           {"S", 200.0}};
  const ExperimentResult r = run_experiment(cfg);
  const std::string dir = (std::filesystem::temp_directory_path() / "nchan_exp_test").string();
  std::filesystem::remove_all(dir);
  write_outputs(r, dir);
  CHECK(std::filesystem::exists(dir + "/manifest.json"));
  CHECK(std::filesystem::exists(dir + "/summary.json"));
  CHECK(std::filesystem::exists(dir + "/results.csv"));
  std::ifstream csv(dir + "/results.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "t,K,stderr");

  ExperimentResult empty = r;
  empty.csv_rows.clear();
  CHECK_THROWS(write_outputs(empty, dir));
  std::filesystem::remove_all(dir);
}

TEST_CASE("channel file input feeds the sde experiment") {
  const ChannelSpec spec = constant_channel(1.0, -3.0, 3.0);
  json cfg{{"kind", "sde-mc"}, {"channel", spec.to_json()}, {"beta", 1.0},
           {"a", 1.0},         {"epsilon", 0.3},            {"n_paths", 50},
           {"seed", 2}};
  const ExperimentResult r = run_experiment(cfg);
  CHECK(r.summary.at("sigma").at("n").get<int>() == 50);
  CHECK(r.summary.at("sigma").at("mean").get<double>() > 0.3);
}

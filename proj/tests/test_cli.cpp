// End-to-end checks of the channelsim binary: exit codes, artifacts, seeding.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;

const std::string kBin = CHANNELSIM_BIN;
const fs::path kTmp = TEST_TMP_DIR;

int run(const std::string& args) {
  const std::string cmd = kBin + " " + args + " >" + (kTmp / "stdout.txt").string() + " 2>" +
                          (kTmp / "stderr.txt").string();
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

fs::path write_config(const nlohmann::json& j, const std::string& name) {
  fs::create_directories(kTmp);
  const fs::path p = kTmp / name;
  std::ofstream out(p);
  out << j.dump(2);
  return p;
}

nlohmann::json small_env() {
  return {{"block_length", 1.0},
          {"mixing_range", 2.0},
          {"width_law", {{"kind", "two_point"}, {"a", 1.0}, {"b", 2.0}, {"p", 0.5}}},
          {"smoothing", "piecewise-constant"},
          {"wing_prob", 0.0},
          {"n0", 1.0},
          {"A1", 1.0},
          {"l_min", 1.0},
          {"l_max", 2.0},
          {"seed", 4},
          {"phase_shift", true}};
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  nlohmann::json j;
  in >> j;
  return j;
}

}  // namespace

TEST_CASE("usage errors exit with status 2") {
  fs::create_directories(kTmp);
  CHECK(run("definitely-not-a-kind --config nowhere.json") == 2);
  CHECK(run("estimate-K") == 2);                         // missing --config
  CHECK(run("estimate-K --config nowhere.json") == 2);   // unreadable config
}

TEST_CASE("estimate-K end to end: artifacts, determinism, seed overrides") {
  const auto cfg = write_config(
      {{"environment", small_env()}, {"t_max", 1.0}, {"t_step", 0.25}, {"S", 400.0}},
      "k_config.json");
  const fs::path out1 = kTmp / "run1";
  const fs::path out2 = kTmp / "run2";
  REQUIRE(run("estimate-K --config " + cfg.string() + " --out " + out1.string()) == 0);
  REQUIRE(run("estimate-K --config " + cfg.string() + " --out " + out2.string()) == 0);
  CHECK(fs::exists(out1 / "manifest.json"));
  CHECK(fs::exists(out1 / "results.csv"));
  CHECK(fs::exists(out1 / "summary.json"));

  std::ifstream csv(out1 / "results.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "t,K,stderr");

  const auto s1 = read_json(out1 / "summary.json");
  const auto s2 = read_json(out2 / "summary.json");
  CHECK(s1.dump() == s2.dump());

  const fs::path out3 = kTmp / "run3";
  REQUIRE(run("estimate-K --config " + cfg.string() + " --out " + out3.string() + " --seed 777") == 0);
  const auto m3 = read_json(out3 / "manifest.json");
  CHECK(m3.at("config").at("seed").get<long long>() == 777);

  setenv("CHANNELSIM_SEED", "4242", 1);
  const fs::path out4 = kTmp / "run4";
  REQUIRE(run("estimate-K --config " + cfg.string() + " --out " + out4.string()) == 0);
  unsetenv("CHANNELSIM_SEED");
  const auto m4 = read_json(out4 / "manifest.json");
  CHECK(m4.at("config").at("seed").get<long long>() == 4242);
}

TEST_CASE("validate-geometry end to end") {
  auto cfg_json = nlohmann::json{{"environment", small_env()}, {"x_left", -4.0}, {"x_right", 4.0}};
  const auto cfg = write_config(cfg_json, "geom_config.json");
  const fs::path out = kTmp / "geom_out";
  REQUIRE(run("validate-geometry --config " + cfg.string() + " --out " + out.string()) == 0);
  const auto summary = read_json(out / "summary.json");
  CHECK(summary.at("all_pass").get<bool>());
}

TEST_CASE("version flag") {
  fs::create_directories(kTmp);
  CHECK(run("--version") == 0);
}

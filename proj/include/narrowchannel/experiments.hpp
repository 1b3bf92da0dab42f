#pragma once

// Config-driven experiment pipelines: one entry point per CLI subcommand.
// Every run produces a manifest (resolved config + tool version), a results
// table, and a numeric summary; identical configs reproduce identical
// summaries byte for byte.

#include <stdexcept>
#include <string>
#include <vector>

#include "narrowchannel/geometry.hpp"

#include "json.hpp"

namespace nchan {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ExperimentResult {
  nlohmann::json manifest;
  nlohmann::json summary;
  std::vector<std::string> csv_header;
  std::vector<std::vector<std::string>> csv_rows;
};

// Runs the experiment described by `config`. Malformed configs raise
// ConfigError (usage errors); numeric faults raise std::runtime_error.
ExperimentResult run_experiment(nlohmann::json config);

// Writes manifest.json, summary.json, results.csv under out_dir.
void write_outputs(const ExperimentResult& result, const std::string& out_dir);

// A seeded smooth wingless test shape (width tabulated on a 0.5 knot grid).
ChannelSpec random_smooth_shape(std::uint64_t seed, double x_lo, double x_hi, double l_lo,
                                double l_hi);

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace nchan

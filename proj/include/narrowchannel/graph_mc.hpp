#pragma once

// Monte Carlo of the limiting diffusion on the metric graph: Euler steps with
// drift beta + l'/(2l) inside edges, width-weighted Walsh relocation at
// interior vertices (time charge h^2), reflection at pocket tips.

#include <cstdint>
#include <utility>
#include <vector>

#include "narrowchannel/graph.hpp"

namespace nchan {

struct SimParams {
  double dt = 1e-4;
  double h_vertex = 0.0;     // 0: use 3*sqrt(dt)
  double beta = 1.0;
  double drift_clamp = 0.0;  // 0: use 10/sqrt(dt)
  std::uint64_t seed = 1;
  int n_paths = 1000;
  int n_threads = 0;  // 0: hardware concurrency
  int thin = 0;       // keep every thin-th position (0: keep none)

  SimParams resolved() const;  // defaults filled in; throws on bad values
};

struct ExitSample {
  double tau = 0.0;
  double main_time = 0.0;
  double wing_time = 0.0;
  double vertex_charge = 0.0;  // share of tau charged by vertex excursions
  long relocations = 0;
  std::vector<std::pair<double, int>> path;  // (x, edge) thinned samples
};

struct MeanStderr {
  double mean = 0.0;
  double se = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;  // 95% normal CI
  int n = 0;
};

struct OccupationSummary {
  MeanStderr tau, main, wing;
  double wing_fraction = 0.0;
};

// One path with an explicit per-path seed; deterministic.
ExitSample simulate_exit(const MetricGraph& g, GraphPoint start, double a, const SimParams& params,
                         std::uint64_t path_seed);

// n_paths paths with seeds derived from params.seed, computed concurrently but
// returned in path order (results do not depend on the thread count).
std::vector<ExitSample> run_exit_paths(const MetricGraph& g, GraphPoint start, double a,
                                       const SimParams& params);

MeanStderr mean_exit_time(const MetricGraph& g, GraphPoint start, double a,
                          const SimParams& params);
OccupationSummary wing_occupation(const MetricGraph& g, GraphPoint start, double a,
                                  const SimParams& params);

MeanStderr summarize(const std::vector<double>& xs);

}  // namespace nchan

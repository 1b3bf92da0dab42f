#pragma once

// Finite-epsilon Monte Carlo of the reflected diffusion in the 2-D channel:
// Euler increments (V dt + dW1, dW2/eps) with projection back onto the domain
// along the co-normal (eps*n1, n2). Accumulated projection corrections stand
// in for the boundary local time.

#include <cstdint>
#include <vector>

#include "narrowchannel/geometry.hpp"
#include "narrowchannel/graph_mc.hpp"

namespace nchan {

struct VField {
  double beta = 1.0;
  double z_amp = 0.0;  // cosine modulation across each component, mean beta
  double operator()(const ChannelSpec& spec, double x, double z) const;
};

struct SdeParams {
  double epsilon = 0.1;
  double dt = 0.0;  // 0: epsilon^2 / 40
  VField V;
  std::uint64_t seed = 1;
  int n_paths = 100;
  int n_threads = 0;
  double corner_rounding = 0.0;  // 0: l_min / 20
  int thin = 0;

  SdeParams resolved(double l_min) const;  // throws unless dt <= epsilon^2/10
};

struct ReflectedPath {
  double sigma = 0.0;        // first time x >= a
  double push_accum = 0.0;   // total projection correction (local-time proxy)
  long steps = 0;
  std::vector<Vec2> samples;
};

// One projected Euler move. Throws std::runtime_error (step-too-large) when
// the displacement cannot be resolved against the local geometry.
std::pair<Vec2, double> step_project(const ChannelSpec& spec, Vec2 from, Vec2 displacement,
                                     double epsilon, double corner_rounding = 0.0);

ReflectedPath simulate_exit_2d(const ChannelSpec& spec, Vec2 start, double a,
                               const SdeParams& params, std::uint64_t path_seed);

std::vector<ReflectedPath> run_sde_paths(const ChannelSpec& spec, Vec2 start, double a,
                                         const SdeParams& params);

struct SdeSummary {
  MeanStderr sigma;
  double mean_push = 0.0;
};
SdeSummary run_sde(const ChannelSpec& spec, Vec2 start, double a, const SdeParams& params);

struct CompareReport {
  MeanStderr sde_sigma;
  MeanStderr graph_tau;
  double ks = 0.0;  // two-sample Kolmogorov-Smirnov statistic
};

// Runs the 2-D simulation and the graph-limit simulation side by side.
// Requires params.V.beta == graph_params.beta.
CompareReport compare_to_graph(const ChannelSpec& spec, Vec2 start, double a,
                               const SdeParams& params, const SimParams& graph_params);

double ks_statistic(std::vector<double> a, std::vector<double> b);

}  // namespace nchan

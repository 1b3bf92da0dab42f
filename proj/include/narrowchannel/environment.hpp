#pragma once

// Random channel generator: i.i.d. blocks of length block_length (independence
// beyond the declared mixing range is structural) with a uniform global phase
// restoring stationarity. Wing marks are drawn per block. Also the environment
// statistics feeding the transport-speed formulas: the width-ratio kernel K(t)
// and the joint wing moment.

#include <cstdint>
#include <vector>

#include "narrowchannel/estimates.hpp"
#include "narrowchannel/geometry.hpp"
#include "narrowchannel/rng.hpp"

#include "json.hpp"

namespace nchan {

struct ValueLaw {
  enum class Kind { Point, TwoPoint, Uniform };
  Kind kind = Kind::Point;
  double a = 1.0;  // Point: the value; TwoPoint: first value; Uniform: low end
  double b = 1.0;  // TwoPoint: second value; Uniform: high end
  double p = 0.5;  // TwoPoint: probability of b

  double sample(rng::Stream& s) const;
  double min() const;
  double max() const;

  static ValueLaw point(double v) { return {Kind::Point, v, v, 0.0}; }
  static ValueLaw two_point(double a, double b, double p = 0.5) { return {Kind::TwoPoint, a, b, p}; }
  static ValueLaw uniform(double lo, double hi) { return {Kind::Uniform, lo, hi, 0.0}; }

  nlohmann::json to_json() const;
  static ValueLaw from_json(const nlohmann::json& j);
};

struct WingLaw {
  ValueLaw level_law = ValueLaw::point(1.0);
  ValueLaw r_abs_law = ValueLaw::point(1.0);
  double p_r_positive = 1.0;
  double p_above = 1.0;
  double offset_frac = 0.5;  // attachment position within the block, in (0,1)
  double tip_radius = 0.0;
  double pitch = 0.05;

  nlohmann::json to_json() const;
  static WingLaw from_json(const nlohmann::json& j);
};

struct EnvironmentParams {
  double block_length = 1.0;
  double mixing_range = 2.0;  // M: dependence never reaches past this range
  ValueLaw width_law = ValueLaw::point(1.0);
  Interp smoothing = Interp::Pchip;  // Steps = piecewise-constant jump channel
  double wing_prob = 0.0;
  WingLaw wing_law;
  double n0 = 1.0;  // max wings per unit length
  double A1 = 1.0;  // bound on |r| and sup l_wing
  double l_min = 0.5;
  double l_max = 2.0;
  std::uint64_t seed = 1;
  bool phase_shift = true;

  void validate() const;  // throws std::invalid_argument on inconsistent bounds
  nlohmann::json to_json() const;
  static EnvironmentParams from_json(const nlohmann::json& j);
};

// Main-channel width alone (wings never change l0 in this construction).
Piecewise sample_l0(const EnvironmentParams& params, double x0, double x1);

// Full channel sample; deterministic in (params, x0, x1). Wings whose span
// would stick out of the window are dropped.
ChannelSpec sample_environment(const EnvironmentParams& params, double x0, double x1);

// Spatial ergodic estimator of K(t) = E[l0(s) / l0(s+t)] over one sample of
// length S (per ensemble member), with circular-block-bootstrap errors.
// Throws std::invalid_argument if S <= max(t_grid).
KEstimate estimate_K(const EnvironmentParams& params, const std::vector<double>& t_grid, double S,
                     int ensemble = 1);

// Monte Carlo estimates of E n and the joint wing term
//   E[ sign(r) int_0^r l_wing e^{2 beta t} dt * int_0^inf e^{-2 beta y}/l0 dy ]
// with the y-integral truncated where e^{-2 beta T}/l_min < 1e-10 and the tail
// replaced by its midpoint bound. Throws for beta <= 0.
WingMoments wing_moment_estimates(const EnvironmentParams& params, double beta, int n_samples);

}  // namespace nchan

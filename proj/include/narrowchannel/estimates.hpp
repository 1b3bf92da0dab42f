#pragma once

// Estimate records passed between the environment estimators, the closed-form
// transport-speed assembly, and the experiment runner.

#include <vector>

namespace nchan {

struct KEstimate {
  std::vector<double> t;        // increasing, t[0] == 0
  std::vector<double> K;        // width-ratio kernel estimates
  std::vector<double> stderr_;  // block-bootstrap standard errors
  double sample_length = 0.0;   // S of the spatial ergodic average
  double ratio_bound = 0.0;     // l_max / l_min, bounds K pointwise
  int ensemble = 1;
};

struct WingMoments {
  double e_n = 0.0;              // mean wings per unit length
  double e_n_stderr = 0.0;
  double wing_term = 0.0;        // E[ sign(r) W * C ] joint estimate
  double wing_term_stderr = 0.0;
  double trunc_bound = 0.0;      // contribution bound of the truncated y-tail
  double beta = 0.0;
  int n_samples = 0;
};

struct SpeedEstimate {
  double inverse_speed = 0.0;  // limit of sigma((-inf,a])/a
  double stderr_ = 0.0;        // combined standard error
  double first_term = 0.0;     // 2 * int_0^inf K(t) e^{-2 beta t} dt
  double first_term_stderr = 0.0;
  double first_term_tail = 0.0;      // value assigned to the truncated K tail
  double first_term_tail_bound = 0.0;
  double wing_contrib = 0.0;   // 2 * E n * wing_term
  double e_n = 0.0;
  double wing_term = 0.0;
  double wing_trunc_bound = 0.0;
  double beta = 0.0;
};

}  // namespace nchan

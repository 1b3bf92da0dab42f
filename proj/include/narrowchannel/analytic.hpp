#pragma once

// Closed-form exit-time and occupation-time evaluators on width functions,
// the scale/speed function pair, the transport-speed assembly, and a
// finite-difference boundary-value oracle on the metric graph.

#include <limits>
#include <memory>
#include <vector>

#include "narrowchannel/estimates.hpp"
#include "narrowchannel/graph.hpp"
#include "narrowchannel/piecewise.hpp"
#include "narrowchannel/quadrature.hpp"

namespace nchan {

struct QuadResult {
  double value = 0.0;
  double tail_bound = 0.0;  // bound on the truncated left-tail contribution
  bool degenerate = false;  // a <= 0 case
};

// Mean time for the one-line width-l diffusion started at 0 to reach a > 0:
//   u(0) = 2 int_0^a dy/l(y) int_0^y l(t) e^{-2 beta (y-t)} dt
//        + 2 int_{-T}^0 l(t) e^{2 beta t} dt * int_0^a e^{-2 beta y}/l(y) dy.
// Throws std::invalid_argument for beta <= 0.
QuadResult exit_time_quadrature(const WidthFn& l, double beta, double a, double left_tail_T = 15.0,
                                double tol = 1e-10);

// Expected pocket occupation M(q, r, a); pass a = +inf for the a -> inf limit.
// l_wing is evaluated in absolute x over the span [min(q,q+r), max(q,q+r)].
// Throws std::invalid_argument for beta <= 0 or q > a.
double wing_time_formula(const WidthFn& l_wing, double q, double r, const WidthFn& l0, double beta,
                         double a = std::numeric_limits<double>::infinity(), double tol = 1e-10);

// Assembles the inverse transport speed from a K estimate and wing moments:
// 2 int_0^inf K e^{-2 beta t} dt + 2 E n E[sign(r) W C]. The K integral is
// exact for the piecewise-linear interpolant of the grid values; the tail
// beyond the grid uses the last K value, with an uncertainty bound from the
// recorded ratio bound. Refuses (std::invalid_argument) without a ratio bound.
SpeedEstimate inverse_speed(const KEstimate& K, double e_n, double e_n_stderr, double wing_term,
                            double wing_term_stderr, double wing_trunc_bound, double beta);

inline SpeedEstimate inverse_speed(const KEstimate& K, const WingMoments& m, double beta) {
  return inverse_speed(K, m.e_n, m.e_n_stderr, m.wing_term, m.wing_term_stderr, m.trunc_bound,
                       beta);
}

// Scale and speed functions of the edge generator, plus the driftless pair.
class ScaleSpeed {
 public:
  static ScaleSpeed make(const WidthFn& l, double beta, double lo, double hi, double tol = 1e-10);
  double u(double x) const;  // int_0^x e^{-2 beta y} / l dy
  double v(double x) const;  // 2 int_0^x l e^{2 beta y} dy
  double q(double x) const;  // int_0^x dy / l
  double r(double x) const;  // 2 int_0^x l dy
  double beta() const { return beta_; }

 private:
  std::shared_ptr<quad::Cumulative> u_, v_, q_, r_;
  double x0_ = 0.0, beta_ = 0.0;
};

enum class SourceSel { All, MainOnly, WingOnly };

struct BvpSolution {
  struct EdgeGrid {
    int edge = -1;
    std::vector<double> x, u;
  };
  std::vector<EdgeGrid> grids;  // indexed by edge id (possibly empty entries)
  double at(int edge, double x) const;
  double on_main(const MetricGraph& g, double x) const;
};

// Solves L_k u = -1 on selected edges (0 elsewhere), u = 0 at x = a on the
// main line and at the (deep) left window end, Eq.-(4) flux balance at
// interior vertices, l u' -> 0 at wing tips. Requires e^{2 beta x_lo} < 1e-12.
BvpSolution solve_exit_bvp(const MetricGraph& g, double beta, double a, SourceSel source,
                           double h_target = 1e-3);

}  // namespace nchan

#pragma once

// Adaptive composite Simpson quadrature. Integrands here are smooth between
// breakpoints (knot kinks, width jumps), so breakpoints are mandatory panel
// boundaries and the adaptive rule only ever sees smooth pieces.

#include <functional>
#include <vector>

namespace nchan::quad {

struct Opts {
  double tol = 1e-10;   // absolute tolerance for the whole integral
  int max_depth = 30;   // recursion guard
};

using Fn = std::function<double(double)>;

// Plain adaptive Simpson on [a, b]; f must be smooth on the open interval.
double adaptive_simpson(const Fn& f, double a, double b, const Opts& opts = {});

// Composite adaptive Simpson over [a, b] split at every breakpoint strictly
// inside (a, b). Evaluations at panel ends are nudged inward so one-sided
// limits at jumps are picked up from the correct side.
double integrate(const Fn& f, double a, double b, const std::vector<double>& breaks,
                 const Opts& opts = {});

// Cumulative integral F(x) = int_{x0}^{x} f, with prefix sums cached at panel
// boundaries; partial panels are integrated on demand.
class Cumulative {
 public:
  Cumulative(Fn f, double x0, double x1, std::vector<double> breaks, Opts opts = {});
  double upto(double x) const;  // x in [x0, x1]
  double total() const { return prefix_.back(); }

 private:
  Fn f_;
  std::vector<double> bounds_;   // panel boundaries, bounds_[0] = x0
  std::vector<double> prefix_;   // prefix_[i] = int_{x0}^{bounds_[i]} f
  Opts opts_;
};

// Sorted breakpoints of `breaks` restricted to the open interval (a, b).
std::vector<double> clip_breaks(const std::vector<double>& breaks, double a, double b);

}  // namespace nchan::quad

#pragma once

// Piecewise-smooth scalar functions of x: shape-preserving cubics (or steps)
// between isolated jumps, with explicit one-sided limits at each jump. This is
// the storage format for channel boundaries and width functions.

#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "narrowchannel/pchip.hpp"

namespace nchan {

struct Jump {
  double x;
  double left;
  double right;
};

enum class Interp { Pchip, Steps };

class Piecewise {
 public:
  Piecewise() = default;

  // Knots strictly increasing; jumps strictly inside (knots.front, knots.back),
  // sorted. With Interp::Steps the value on [knots[i], knots[i+1]) is values[i]
  // and the jump list is derived from value changes.
  static Piecewise tabulated(std::vector<double> knots, std::vector<double> values,
                             std::vector<Jump> jumps = {}, Interp interp = Interp::Pchip);
  static Piecewise constant(double value, double lo, double hi);

  double operator()(double x) const;  // right-continuous at jumps
  double left_limit(double x) const;
  double right_limit(double x) const { return (*this)(x); }
  double derivative(double x) const;  // inside smooth pieces

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double min_value() const;
  double max_value() const;

  const std::vector<Jump>& jumps() const { return jumps_; }
  // Knot kinks plus jump locations, sorted: mandatory quadrature panel cuts.
  const std::vector<double>& breakpoints() const { return breaks_; }

  // Original tabulation (for serialization round-trips).
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }
  Interp interp() const { return interp_; }

  // g(x) = this(x) + c, exact on the shared tabulation.
  Piecewise shifted(double c) const;

 private:
  struct Segment {
    double x0, x1;
    Pchip curve;     // empty when step_value is used
    bool is_step = false;
    double step_value = 0.0;
  };
  std::size_t segment_index(double x) const;

  std::vector<double> knots_, values_;
  std::vector<Jump> jumps_;
  std::vector<Segment> segments_;
  std::vector<double> breaks_;
  Interp interp_ = Interp::Pchip;
  double lo_ = 0.0, hi_ = 0.0;
};

// Lightweight width-function view: what quadrature and solvers consume.
struct WidthFn {
  std::function<double(double)> value;  // right-continuous
  std::function<double(double)> left;   // left limit
  std::vector<double> breaks;           // sorted kinks + jumps
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  double operator()(double x) const { return value(x); }
};

WidthFn make_width(std::shared_ptr<const Piecewise> f);
WidthFn constant_width(double c, double lo, double hi);
WidthFn width_from_callable(std::function<double(double)> f, double lo, double hi,
                            std::vector<double> breaks = {});

}  // namespace nchan

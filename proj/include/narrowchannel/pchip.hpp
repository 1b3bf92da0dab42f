#pragma once

// Shape-preserving cubic interpolation (Fritsch-Carlson). The interpolant is
// C^1 and never overshoots the data, so widths tabulated inside [l_min, l_max]
// stay inside [l_min, l_max].

#include <cstddef>
#include <vector>

namespace nchan {

class Pchip {
 public:
  Pchip() = default;
  // Knots must be strictly increasing; sizes must match and be >= 1.
  Pchip(std::vector<double> knots, std::vector<double> values);

  double operator()(double x) const;
  double derivative(double x) const;

  const std::vector<double>& knots() const { return x_; }
  const std::vector<double>& values() const { return y_; }
  double min_value() const;
  double max_value() const;
  bool empty() const { return x_.empty(); }

 private:
  std::size_t segment(double x) const;
  std::vector<double> x_, y_, d_;  // knots, values, knot derivatives
};

}  // namespace nchan

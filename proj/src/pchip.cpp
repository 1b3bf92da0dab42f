#include "narrowchannel/pchip.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nchan {

namespace {

double sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

// One-sided endpoint slope, clipped so monotonicity near the boundary is kept.
double endpoint_slope(double h0, double h1, double s0, double s1) {
  double d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
  if (sign(d) != sign(s0)) {
    d = 0.0;
  } else if (sign(s0) != sign(s1) && std::abs(d) > 3.0 * std::abs(s0)) {
    d = 3.0 * s0;
  }
  return d;
}

}  // namespace

Pchip::Pchip(std::vector<double> knots, std::vector<double> values)
    : x_(std::move(knots)), y_(std::move(values)) {
  if (x_.empty() || x_.size() != y_.size())
    throw std::invalid_argument("Pchip: empty or mismatched knot/value arrays");
  for (std::size_t i = 1; i < x_.size(); ++i)
    if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("Pchip: knots must be increasing");

  const std::size_t n = x_.size();
  d_.assign(n, 0.0);
  if (n == 1) return;
  if (n == 2) {
    d_[0] = d_[1] = (y_[1] - y_[0]) / (x_[1] - x_[0]);
    return;
  }

  std::vector<double> h(n - 1), s(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    s[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (s[i - 1] * s[i] <= 0.0) {
      d_[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      d_[i] = (w1 + w2) / (w1 / s[i - 1] + w2 / s[i]);
    }
  }
  d_[0] = endpoint_slope(h[0], h[1], s[0], s[1]);
  d_[n - 1] = endpoint_slope(h[n - 2], h[n - 3], s[n - 2], s[n - 3]);
}

std::size_t Pchip::segment(double x) const {
  // Index i with x in [x_[i], x_[i+1]); clamped at the ends.
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  if (it == x_.begin()) return 0;
  std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
  if (i + 1 >= x_.size()) i = x_.size() - 2;
  return i;
}

double Pchip::operator()(double x) const {
  if (x_.size() == 1) return y_[0];
  const std::size_t i = segment(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h * d_[i] +
         (-2 * t3 + 3 * t2) * y_[i + 1] + (t3 - t2) * h * d_[i + 1];
}

double Pchip::derivative(double x) const {
  if (x_.size() == 1) return 0.0;
  const std::size_t i = segment(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * y_[i] + (3 * t2 - 4 * t + 1) * h * d_[i] +
          (-6 * t2 + 6 * t) * y_[i + 1] + (3 * t2 - 2 * t) * h * d_[i + 1]) /
         h;
}

double Pchip::min_value() const {
  // No overshoot: extrema sit on knot values.
  double m = y_[0];
  for (double v : y_) m = std::min(m, v);
  return m;
}

double Pchip::max_value() const {
  double m = y_[0];
  for (double v : y_) m = std::max(m, v);
  return m;
}

}  // namespace nchan

#include "narrowchannel/piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nchan {

Piecewise Piecewise::tabulated(std::vector<double> knots, std::vector<double> values,
                               std::vector<Jump> jumps, Interp interp) {
  if (knots.empty() || (interp == Interp::Pchip && knots.size() != values.size()))
    throw std::invalid_argument("Piecewise: empty or mismatched knot/value arrays");
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i] > knots[i - 1]))
      throw std::invalid_argument("Piecewise: knots must be strictly increasing");

  Piecewise f;
  f.interp_ = interp;
  f.lo_ = knots.front();
  f.hi_ = knots.back();
  f.knots_ = knots;
  f.values_ = values;

  if (interp == Interp::Steps) {
    // knots are the n+1 cell boundaries, values the n cell values.
    if (!jumps.empty()) throw std::invalid_argument("Piecewise: steps derive their own jumps");
    if (knots.size() != values.size() + 1)
      throw std::invalid_argument("Piecewise: steps need one value per cell");
    for (std::size_t i = 0; i < values.size(); ++i) {
      Segment s;
      s.x0 = knots[i];
      s.x1 = knots[i + 1];
      s.is_step = true;
      s.step_value = values[i];
      f.segments_.push_back(std::move(s));
      if (i > 0 && values[i] != values[i - 1])
        f.jumps_.push_back({knots[i], values[i - 1], values[i]});
    }
    f.breaks_.assign(knots.begin() + 1, knots.end() - 1);
    return f;
  }

  std::sort(jumps.begin(), jumps.end(), [](const Jump& a, const Jump& b) { return a.x < b.x; });
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    if (!(jumps[i].x > f.lo_ && jumps[i].x < f.hi_))
      throw std::invalid_argument("Piecewise: jump outside the open knot range");
    if (i > 0 && !(jumps[i].x > jumps[i - 1].x))
      throw std::invalid_argument("Piecewise: jump locations must be distinct");
  }
  f.jumps_ = jumps;

  // Split the tabulation at jumps; pin each side of a jump with its one-sided
  // limit so the interpolant matches the declared limits exactly. A knot that
  // coincides with a jump location is superseded by the declared limits.
  std::vector<double> cuts;
  cuts.push_back(f.lo_);
  for (const Jump& jp : jumps) cuts.push_back(jp.x);
  cuts.push_back(f.hi_);
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
    const double c0 = cuts[j], c1 = cuts[j + 1];
    std::vector<double> kx, kv;
    if (j > 0) {
      kx.push_back(c0);
      kv.push_back(jumps[j - 1].right);
    }
    auto lohi = std::equal_range(knots.begin(), knots.end(), c0);
    auto it = (j == 0) ? lohi.first : lohi.second;  // include a knot at lo, drop one at a jump
    for (; it != knots.end() && *it <= c1; ++it) {
      if (j + 2 < cuts.size() && *it == c1) break;  // jump limit replaces this knot
      kx.push_back(*it);
      kv.push_back(values[static_cast<std::size_t>(it - knots.begin())]);
    }
    if (j + 2 < cuts.size()) {
      kx.push_back(c1);
      kv.push_back(jumps[j].left);
    }
    Segment s;
    s.x0 = c0;
    s.x1 = c1;
    s.curve = Pchip(kx, kv);
    f.segments_.push_back(std::move(s));
  }

  f.breaks_.reserve(knots.size() + jumps.size());
  for (double x : knots)
    if (x > f.lo_ && x < f.hi_) f.breaks_.push_back(x);
  for (const Jump& jp : jumps) f.breaks_.push_back(jp.x);
  std::sort(f.breaks_.begin(), f.breaks_.end());
  f.breaks_.erase(std::unique(f.breaks_.begin(), f.breaks_.end()), f.breaks_.end());
  return f;
}

Piecewise Piecewise::constant(double value, double lo, double hi) {
  if (!(hi > lo)) throw std::invalid_argument("Piecewise: empty range");
  return tabulated({lo, hi}, {value, value});
}

std::size_t Piecewise::segment_index(double x) const {
  // Segment with x0 <= x < x1 (right-continuous); clamped at the ends.
  std::size_t lo = 0, hi = segments_.size();
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (x >= segments_[mid].x0)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

double Piecewise::operator()(double x) const {
  const Segment& s = segments_[segment_index(x)];
  return s.is_step ? s.step_value : s.curve(x);
}

double Piecewise::left_limit(double x) const {
  const std::size_t i = segment_index(x);
  if (x == segments_[i].x0 && i > 0) {
    const Segment& p = segments_[i - 1];
    return p.is_step ? p.step_value : p.curve(x);
  }
  return (*this)(x);
}

double Piecewise::derivative(double x) const {
  const Segment& s = segments_[segment_index(x)];
  return s.is_step ? 0.0 : s.curve.derivative(x);
}

double Piecewise::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (const Segment& s : segments_) m = std::min(m, s.is_step ? s.step_value : s.curve.min_value());
  return m;
}

double Piecewise::max_value() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const Segment& s : segments_) m = std::max(m, s.is_step ? s.step_value : s.curve.max_value());
  return m;
}

Piecewise Piecewise::shifted(double c) const {
  std::vector<double> vals = values_;
  for (double& v : vals) v += c;
  std::vector<Jump> js = jumps_;
  for (Jump& j : js) {
    j.left += c;
    j.right += c;
  }
  if (interp_ == Interp::Steps) return tabulated(knots_, vals, {}, Interp::Steps);
  return tabulated(knots_, vals, js, interp_);
}

WidthFn make_width(std::shared_ptr<const Piecewise> f) {
  WidthFn w;
  w.value = [f](double x) { return (*f)(x); };
  w.left = [f](double x) { return f->left_limit(x); };
  w.breaks = f->breakpoints();
  w.lo = f->lo();
  w.hi = f->hi();
  return w;
}

WidthFn constant_width(double c, double lo, double hi) {
  WidthFn w;
  w.value = [c](double) { return c; };
  w.left = w.value;
  w.lo = lo;
  w.hi = hi;
  return w;
}

WidthFn width_from_callable(std::function<double(double)> f, double lo, double hi,
                            std::vector<double> breaks) {
  WidthFn w;
  w.value = f;
  w.left = std::move(f);
  std::sort(breaks.begin(), breaks.end());
  w.breaks = std::move(breaks);
  w.lo = lo;
  w.hi = hi;
  return w;
}

}  // namespace nchan

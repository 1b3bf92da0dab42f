#include "narrowchannel/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nchan::quad {

namespace {

struct Recurse {
  const Fn& f;
  int max_depth;

  double run(double a, double fa, double b, double fb, double fm, double whole, double eps,
             int depth) const {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth >= max_depth || std::abs(delta) <= 15.0 * eps)
      return left + right + delta / 15.0;
    return run(a, fa, m, fm, flm, left, 0.5 * eps, depth + 1) +
           run(m, fm, b, fb, frm, right, 0.5 * eps, depth + 1);
  }
};

}  // namespace

double adaptive_simpson(const Fn& f, double a, double b, const Opts& opts) {
  if (a == b) return 0.0;
  if (b < a) return -adaptive_simpson(f, b, a, opts);
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return Recurse{f, opts.max_depth}.run(a, fa, b, fb, fm, whole, opts.tol, 0);
}

std::vector<double> clip_breaks(const std::vector<double>& breaks, double a, double b) {
  std::vector<double> out;
  for (double x : breaks)
    if (x > a && x < b) out.push_back(x);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double integrate(const Fn& f, double a, double b, const std::vector<double>& breaks,
                 const Opts& opts) {
  if (a == b) return 0.0;
  if (b < a) return -integrate(f, b, a, breaks, opts);
  std::vector<double> cuts = clip_breaks(breaks, a, b);
  cuts.insert(cuts.begin(), a);
  cuts.push_back(b);

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double p = cuts[i], q = cuts[i + 1];
    if (q <= p) continue;
    const double pad = (q - p) * 1e-9;  // keep endpoint evaluations one-sided
    auto g = [&f, p, q, pad](double x) { return f(std::clamp(x, p + pad, q - pad)); };
    Opts panel = opts;
    panel.tol = opts.tol * std::max((q - p) / (b - a), 1e-3);
    total += adaptive_simpson(g, p, q, panel);
  }
  return total;
}

Cumulative::Cumulative(Fn f, double x0, double x1, std::vector<double> breaks, Opts opts)
    : f_(std::move(f)), opts_(opts) {
  if (!(x1 >= x0)) throw std::invalid_argument("Cumulative: x1 < x0");
  bounds_ = clip_breaks(breaks, x0, x1);
  bounds_.insert(bounds_.begin(), x0);
  bounds_.push_back(x1);
  prefix_.assign(bounds_.size(), 0.0);
  for (std::size_t i = 0; i + 1 < bounds_.size(); ++i)
    prefix_[i + 1] = prefix_[i] + integrate(f_, bounds_[i], bounds_[i + 1], {}, opts_);
}

double Cumulative::upto(double x) const {
  if (x <= bounds_.front()) return 0.0;
  if (x >= bounds_.back()) return prefix_.back();
  auto it = std::upper_bound(bounds_.begin(), bounds_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - bounds_.begin()) - 1;
  return prefix_[i] + integrate(f_, bounds_[i], x, {}, opts_);
}

}  // namespace nchan::quad

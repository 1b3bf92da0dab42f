#include "narrowchannel/sde2d.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "narrowchannel/graph.hpp"
#include "narrowchannel/rng.hpp"

namespace nchan {

double VField::operator()(const ChannelSpec& spec, double x, double z) const {
  if (z_amp == 0.0) return beta;
  // Cosine profile over the component containing z; its average is beta on
  // every cross-section component.
  double lo = spec.h_minus()(x), hi = spec.h_plus()(x);
  if (z < lo || z > hi) {
    const int wi = spec.wing_at(x);
    if (wi >= 0) {
      const ZInterval band = spec.wing_interval(wi, x);
      lo = band.lo;
      hi = band.hi;
    }
  }
  if (!(hi > lo)) return beta;
  const double u = (z - lo) / (hi - lo);
  return beta * (1.0 + z_amp * std::cos(2.0 * M_PI * u));
}

SdeParams SdeParams::resolved(double l_min) const {
  SdeParams p = *this;
  if (!(p.epsilon > 0.0) || p.epsilon > 1.0)
    throw std::invalid_argument("SdeParams: epsilon must lie in (0, 1]");
  if (p.dt <= 0.0) p.dt = p.epsilon * p.epsilon / 40.0;
  if (p.dt > p.epsilon * p.epsilon / 10.0 + 1e-15)
    throw std::invalid_argument("SdeParams: need dt <= epsilon^2/10");
  if (p.corner_rounding <= 0.0) p.corner_rounding = l_min / 20.0;
  if (p.n_paths < 1) throw std::invalid_argument("SdeParams: n_paths must be >= 1");
  return p;
}

namespace {

struct Wall {
  double x = 0.0, z_lo = 0.0, z_hi = 0.0;
  double inward = +1.0;  // x-direction pointing into the domain
};

// Precomputed vertical arcs and corner locations of one channel shape.
struct DomainGeom {
  const ChannelSpec& spec;
  std::vector<Wall> walls;
  std::vector<double> corners;

  explicit DomainGeom(const ChannelSpec& s) : spec(s) {
    auto add_wall = [&](double x, double a, double b, double inward) {
      walls.push_back({x, std::min(a, b), std::max(a, b), inward});
      corners.push_back(x);
    };
    for (const Jump& jp : s.h_plus().jumps()) {
      bool mouth = false;  // attachment jumps of the wing side are open mouths
      for (const WingSpec& w : s.wings())
        mouth |= (w.side == Side::Above && w.q == jp.x);
      if (!mouth) add_wall(jp.x, jp.left, jp.right, jp.right > jp.left ? 1.0 : -1.0);
    }
    for (const Jump& jp : s.h_minus().jumps()) {
      bool mouth = false;
      for (const WingSpec& w : s.wings())
        mouth |= (w.side == Side::Below && w.q == jp.x);
      if (!mouth) add_wall(jp.x, jp.left, jp.right, jp.right > jp.left ? -1.0 : 1.0);
    }
    for (std::size_t i = 0; i < s.wings().size(); ++i) {
      const WingSpec& w = s.wings()[i];
      corners.push_back(w.q);
      corners.push_back(w.tip_x());
      if (w.tip_radius > 0.0) {
        corners.push_back(w.tip_x() + (w.r > 0 ? -w.tip_radius : w.tip_radius));
      } else {
        // Square tip: a vertical wall spanning the full pocket band.
        const double inner = w.tip_x() - (w.r > 0 ? 1e-9 : -1e-9) * std::max(1.0, std::abs(w.tip_x()));
        const ZInterval band = s.wing_interval(static_cast<int>(i), inner);
        walls.push_back({w.tip_x(), band.lo - 1e-12, band.hi + 1e-12, w.r > 0 ? -1.0 : 1.0});
      }
    }
    std::sort(corners.begin(), corners.end());
  }

  bool near_corner(double x, double radius) const {
    auto it = std::lower_bound(corners.begin(), corners.end(), x - radius);
    return it != corners.end() && *it <= x + radius;
  }
};

double arc_height(const ChannelSpec& spec, const ArcId& arc, double x) {
  switch (arc.kind) {
    case ArcId::MainUpper: return spec.h_plus()(x);
    case ArcId::MainLower: return spec.h_minus()(x);
    case ArcId::WingFloor: {
      const WingSpec& w = spec.wings()[static_cast<std::size_t>(arc.index)];
      const ZInterval b = spec.wing_interval(arc.index, x);
      return w.side == Side::Above ? b.lo : b.hi;
    }
    case ArcId::WingCeiling: {
      const WingSpec& w = spec.wings()[static_cast<std::size_t>(arc.index)];
      const ZInterval b = spec.wing_interval(arc.index, x);
      return w.side == Side::Above ? b.hi : b.lo;
    }
    default: throw std::logic_error("arc_height: not a curve arc");
  }
}

// Inward unit normal of a curve arc, from a finite-difference slope taken
// strictly inside the arc piece (never across a jump or a pocket tip).
Vec2 arc_inward(const ChannelSpec& spec, const ArcId& arc, double x, double dom_lo,
                double dom_hi) {
  const double h = 1e-7 * std::max(1.0, std::abs(x));
  const double xc = std::clamp(x, dom_lo + h, dom_hi - h);
  const double xm = std::max(dom_lo + 0.25 * h, xc - h);
  const double xp = std::min(dom_hi - 0.25 * h, xc + h);
  const double gm = arc_height(spec, arc, xm);
  const double gp = arc_height(spec, arc, xp);
  const double slope = xp > xm ? (gp - gm) / (xp - xm) : 0.0;
  bool domain_below;
  switch (arc.kind) {
    case ArcId::MainUpper: domain_below = true; break;
    case ArcId::MainLower: domain_below = false; break;
    case ArcId::WingFloor: {
      const WingSpec& w = spec.wings()[static_cast<std::size_t>(arc.index)];
      domain_below = w.side == Side::Below;  // pocket sits away from the channel
      break;
    }
    case ArcId::WingCeiling: {
      const WingSpec& w = spec.wings()[static_cast<std::size_t>(arc.index)];
      domain_below = w.side == Side::Above;
      break;
    }
    default: throw std::logic_error("arc_inward: not a curve arc");
  }
  const double n = std::hypot(slope, 1.0);
  if (domain_below) return {slope / n, -1.0 / n};
  return {-slope / n, 1.0 / n};
}

struct Crossing {
  double t = std::numeric_limits<double>::infinity();
  bool is_wall = false;
  ArcId arc;
  double dom_lo = 0.0, dom_hi = 0.0;  // x-domain of the crossed arc piece
  const Wall* wall = nullptr;
};

// First boundary contact along the segment from -> p. Curve arcs are scanned
// piecewise between their jumps so that stepping across an open mouth is not
// mistaken for a crossing, and a step hopping a thin wall in one move is
// caught even when its endpoint lands "inside" the far component.
Crossing first_crossing(const DomainGeom& geom, Vec2 from, Vec2 p) {
  const ChannelSpec& spec = geom.spec;
  Crossing best;
  const double dx = p.x - from.x, dz = p.z - from.z;
  const double xmin = std::min(from.x, p.x), xmax = std::max(from.x, p.x);

  auto try_piece = [&](const ArcId& arc, double dom_lo, double dom_hi) {
    double t0 = 0.0, t1 = 1.0;
    if (dx != 0.0) {
      double ta = (dom_lo - from.x) / dx, tb = (dom_hi - from.x) / dx;
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      if (t0 >= t1) return;
    } else if (from.x < dom_lo || from.x > dom_hi) {
      return;
    }
    const double pad = 1e-12 * std::max(1.0, xmax - xmin);
    auto f = [&](double t) {
      const double x = std::clamp(from.x + t * dx, dom_lo + pad, dom_hi - pad);
      return from.z + t * dz - arc_height(spec, arc, x);
    };
    double f0, f1;
    try {
      f0 = f(t0);
      f1 = f(t1);
    } catch (...) {
      return;
    }
    if (f0 == 0.0 || (f0 > 0) == (f1 > 0)) return;
    const double tc = t0 + (t1 - t0) * f0 / (f0 - f1);
    if (tc < best.t) best = {tc, false, arc, dom_lo, dom_hi, nullptr};
  };

  // Main boundary pieces overlapping the segment (split at jumps).
  for (const Piecewise* h : {&spec.h_plus(), &spec.h_minus()}) {
    const ArcId arc{h == &spec.h_plus() ? ArcId::MainUpper : ArcId::MainLower, -1};
    double lo = spec.x_lo();
    for (const Jump& jp : h->jumps()) {
      if (jp.x > xmin && lo < xmax) try_piece(arc, lo, jp.x);
      lo = jp.x;
      if (lo > xmax) break;
    }
    if (lo < xmax) try_piece(arc, lo, spec.x_hi());
  }

  // Pocket arcs of any wing the segment touches.
  int seen[3] = {-1, -1, -1};
  int n_seen = 0;
  for (double probe : {xmin, 0.5 * (xmin + xmax), xmax}) {
    const int wi = spec.wing_at(std::clamp(probe, spec.x_lo(), spec.x_hi()));
    if (wi < 0) continue;
    bool dup = false;
    for (int k = 0; k < n_seen; ++k) dup |= (seen[k] == wi);
    if (dup) continue;
    seen[n_seen++] = wi;
    const WingSpec& w = spec.wings()[static_cast<std::size_t>(wi)];
    const bool above = w.side == Side::Above;
    try_piece({above ? ArcId::WingFloor : ArcId::WingCeiling, wi}, w.span_lo(), w.span_hi());
    try_piece({above ? ArcId::WingCeiling : ArcId::WingFloor, wi}, w.span_lo(), w.span_hi());
  }

  // Vertical walls, crossed from their domain side.
  if (dx != 0.0) {
    for (const Wall& w : geom.walls) {
      if (w.x <= xmin || w.x >= xmax) continue;
      if ((from.x - w.x) * w.inward <= 0.0) continue;
      const double tw = (w.x - from.x) / dx;
      const double zw = from.z + tw * dz;
      if (zw < w.z_lo || zw > w.z_hi) continue;
      if (tw < best.t) best = {tw, true, {}, 0.0, 0.0, &w};
    }
  }
  return best;
}

// Newton solve for the co-normal projection of p onto one curve arc piece.
// Every height evaluation stays inside the piece x-domain, and corrections
// longer than a few step lengths are rejected (they would hop the geometry).
bool conormal_project(const ChannelSpec& spec, const ArcId& arc, double dom_lo, double dom_hi,
                      Vec2& p, double epsilon, double& push, double step_mag) {
  const double max_travel = 4.0 * step_mag + 1e-9;
  const double pad = 1e-12 * std::max(1.0, dom_hi - dom_lo);
  auto height = [&](double x) { return arc_height(spec, arc, std::clamp(x, dom_lo + pad, dom_hi - pad)); };
  double g0;
  try {
    g0 = height(p.x);
  } catch (...) {
    return false;
  }
  const Vec2 nrm = arc_inward(spec, arc, p.x, dom_lo, dom_hi);
  double vx = epsilon * nrm.x, vz = nrm.z;
  const double vn = std::hypot(vx, vz);
  vx /= vn;
  vz /= vn;
  double t = (g0 - p.z) / vz;
  if (!std::isfinite(t) || std::abs(t) > max_travel) return false;
  bool ok = false;
  for (int it = 0; it < 40; ++it) {
    double g;
    try {
      g = height(p.x + t * vx);
    } catch (...) {
      return false;
    }
    const double f = p.z + t * vz - g;
    if (std::abs(f) < 1e-12 * std::max(1.0, std::abs(g))) {
      ok = true;
      break;
    }
    const double h = 1e-7;
    double gp;
    try {
      gp = height(p.x + t * vx + h);
    } catch (...) {
      gp = g;
    }
    const double dg = (gp - g) / h;
    const double df = vz - dg * vx;
    if (df == 0.0) return false;
    const double t2 = t - f / df;
    if (!std::isfinite(t2) || std::abs(t2) > max_travel) return false;
    t = t2;
  }
  if (!ok || std::abs(t) > max_travel) return false;
  const double dir = t >= 0 ? 1.0 : -1.0;
  p = {p.x + t * vx + 1e-10 * dir * vx, p.z + t * vz + 1e-10 * dir * vz};
  push += std::abs(t);
  return true;
}

// Last interior point before the first exit along from -> p (forward scan,
// then bisection inside the first inside/outside bracket).
Vec2 first_exit_point(const ChannelSpec& spec, Vec2 from, Vec2 p) {
  const int n = 256;
  double t_in = 0.0, t_out = 1.0;
  bool found = false;
  for (int i = 1; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    const Vec2 c{from.x + t * (p.x - from.x), from.z + t * (p.z - from.z)};
    if (!spec.inside(c.x, c.z)) {
      t_out = t;
      t_in = static_cast<double>(i - 1) / n;
      found = true;
      break;
    }
  }
  if (!found) {
    t_in = 0.0;
    t_out = 1.0;
  }
  for (int it = 0; it < 50; ++it) {
    const double mid = 0.5 * (t_in + t_out);
    const Vec2 c{from.x + mid * (p.x - from.x), from.z + mid * (p.z - from.z)};
    (spec.inside(c.x, c.z) ? t_in : t_out) = mid;
  }
  return {from.x + t_in * (p.x - from.x), from.z + t_in * (p.z - from.z)};
}

std::pair<Vec2, double> project_with(const DomainGeom& geom, Vec2 from, Vec2 displacement,
                                     double epsilon, double corner_rounding) {
  (void)corner_rounding;
  const ChannelSpec& spec = geom.spec;
  Vec2 p{from.x + displacement.x, from.z + displacement.z};
  const double step_mag = std::hypot(displacement.x, displacement.z);
  if (step_mag > 2.0 * spec.l_min())
    throw std::runtime_error("step_project: displacement too large for the channel width");

  // Window ends act as reflecting walls; they sit far from everything studied.
  if (p.x < spec.x_lo()) p.x = 2.0 * spec.x_lo() - p.x;
  if (p.x > spec.x_hi()) p.x = 2.0 * spec.x_hi() - p.x;

  double push = 0.0;
  Vec2 anchor = from;  // interior point the current sub-move started from
  for (int pass = 0; pass < 6; ++pass) {
    const Crossing hit = first_crossing(geom, anchor, p);
    if (!std::isfinite(hit.t)) {
      if (spec.inside(p.x, p.z)) return {p, push};
      break;  // no crossing found yet the endpoint is outside: corner sliver
    }
    const double tb = std::max(0.0, hit.t - 1e-9);
    const Vec2 before{anchor.x + tb * (p.x - anchor.x), anchor.z + tb * (p.z - anchor.z)};
    if (hit.is_wall) {
      const double nx =
          hit.wall->x + hit.wall->inward * 1e-9 * std::max(1.0, std::abs(hit.wall->x));
      push += std::abs(p.x - nx);  // co-normal of a vertical arc is horizontal
      p.x = nx;
    } else {
      Vec2 cand = p;
      double cand_push = 0.0;
      if (conormal_project(spec, hit.arc, hit.dom_lo, hit.dom_hi, cand, epsilon, cand_push,
                           step_mag)) {
        push += cand_push;
        p = cand;
      } else if (spec.inside(before.x, before.z)) {
        // Ill-posed projection (arc end, wedge apex): stop just short of the
        // crossing instead.
        push += std::hypot(p.x - before.x, p.z - before.z);
        return {before, push};
      } else {
        break;
      }
    }
    // The corrected endpoint may still sit past another arc (wall corners,
    // pocket tips): re-check the remainder of the move.
    anchor = spec.inside(before.x, before.z) ? before : from;
  }

  if (spec.inside(p.x, p.z)) {
    // Guard against residual hops: accept only if the final sub-move is clean.
    const Crossing hit = first_crossing(geom, anchor, p);
    if (!std::isfinite(hit.t)) return {p, push};
  }

  const Vec2 cand = first_exit_point(spec, from, p);
  push += std::hypot(p.x - cand.x, p.z - cand.z);
  return {cand, push};
}

// The 2-D walker can only pass a pocket attachment through the overlap of the
// two main-channel bands there; a pinched overlap disconnects the domain in
// the simulation even though the graph limit remains well defined.
void check_unpinched(const ChannelSpec& spec) {
  for (const WingSpec& w : spec.wings()) {
    const double hp_l = spec.h_plus().left_limit(w.q), hp_r = spec.h_plus()(w.q);
    const double hm_l = spec.h_minus().left_limit(w.q), hm_r = spec.h_minus()(w.q);
    const double overlap = std::min(hp_l, hp_r) - std::max(hm_l, hm_r);
    if (overlap < 0.05 * spec.l_min())
      throw std::invalid_argument(
          "sde2d: channel pinched at the attachment x=" + std::to_string(w.q) +
          " (pocket level too close to the channel width); the 2-D walk cannot pass");
  }
}

ReflectedPath run_one(const DomainGeom& geom, Vec2 start, double a, const SdeParams& p,
                      std::uint64_t path_seed) {
  rng::Stream rs(path_seed);
  ReflectedPath out;
  Vec2 pos = start;
  const double sdt = std::sqrt(p.dt);
  double t = 0.0;
  if (pos.x >= a) return out;
  while (true) {
    const double v = p.V(geom.spec, pos.x, pos.z);
    const Vec2 d{v * p.dt + sdt * rs.normal(), sdt / p.epsilon * rs.normal()};
    auto [np, push] = project_with(geom, pos, d, p.epsilon, p.corner_rounding);
    pos = np;
    t += p.dt;
    out.push_accum += push;
    ++out.steps;
    if (p.thin > 0 && out.steps % p.thin == 0) out.samples.push_back(pos);
    if (pos.x >= a) {
      out.sigma = t;
      return out;
    }
  }
}

}  // namespace

std::pair<Vec2, double> step_project(const ChannelSpec& spec, Vec2 from, Vec2 displacement,
                                     double epsilon, double corner_rounding) {
  if (!spec.inside(from.x, from.z))
    throw std::invalid_argument("step_project: starting point outside the domain");
  const DomainGeom geom(spec);
  const double corner = corner_rounding > 0.0 ? corner_rounding : spec.l_min() / 20.0;
  return project_with(geom, from, displacement, epsilon, corner);
}

ReflectedPath simulate_exit_2d(const ChannelSpec& spec, Vec2 start, double a,
                               const SdeParams& params, std::uint64_t path_seed) {
  const SdeParams p = params.resolved(spec.l_min());
  check_unpinched(spec);
  if (!spec.inside(start.x, start.z))
    throw std::invalid_argument("simulate_exit_2d: start outside the domain");
  if (start.x > a) throw std::invalid_argument("simulate_exit_2d: start beyond the exit level");
  const DomainGeom geom(spec);
  return run_one(geom, start, a, p, path_seed);
}

std::vector<ReflectedPath> run_sde_paths(const ChannelSpec& spec, Vec2 start, double a,
                                         const SdeParams& params) {
  const SdeParams p = params.resolved(spec.l_min());
  check_unpinched(spec);
  if (!spec.inside(start.x, start.z))
    throw std::invalid_argument("run_sde_paths: start outside the domain");
  const DomainGeom geom(spec);
  std::vector<ReflectedPath> out(static_cast<std::size_t>(p.n_paths));
  int n_threads = p.n_threads > 0 ? p.n_threads
                                  : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  n_threads = std::min(n_threads, p.n_paths);
  auto worker = [&](int tid) {
    for (int i = tid; i < p.n_paths; i += n_threads)
      out[static_cast<std::size_t>(i)] =
          run_one(geom, start, a, p, rng::mix(p.seed, rng::kPath, static_cast<std::uint64_t>(i)));
  };
  if (n_threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  return out;
}

SdeSummary run_sde(const ChannelSpec& spec, Vec2 start, double a, const SdeParams& params) {
  const auto paths = run_sde_paths(spec, start, a, params);
  std::vector<double> sigmas;
  double push = 0.0;
  for (const auto& p : paths) {
    sigmas.push_back(p.sigma);
    push += p.push_accum;
  }
  SdeSummary s;
  s.sigma = summarize(sigmas);
  s.mean_push = paths.empty() ? 0.0 : push / static_cast<double>(paths.size());
  return s;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

CompareReport compare_to_graph(const ChannelSpec& spec, Vec2 start, double a,
                               const SdeParams& params, const SimParams& graph_params) {
  if (params.V.beta != graph_params.beta)
    throw std::invalid_argument("compare_to_graph: drift mismatch between the two simulations");
  const auto sde_paths = run_sde_paths(spec, start, a, params);
  const MetricGraph g = build_graph(spec);
  const GraphPoint gp = g.locate(start.x, start.z);
  const auto graph_paths = run_exit_paths(g, gp, a, graph_params);

  std::vector<double> sigmas, taus;
  for (const auto& p : sde_paths) sigmas.push_back(p.sigma);
  for (const auto& p : graph_paths) taus.push_back(p.tau);

  CompareReport r;
  r.sde_sigma = summarize(sigmas);
  r.graph_tau = summarize(taus);
  r.ks = ks_statistic(sigmas, taus);
  return r;
}

}  // namespace nchan

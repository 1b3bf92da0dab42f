#include "narrowchannel/graph_mc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "narrowchannel/rng.hpp"

namespace nchan {

SimParams SimParams::resolved() const {
  SimParams p = *this;
  if (!(p.dt > 0.0)) throw std::invalid_argument("SimParams: dt must be positive");
  if (p.h_vertex <= 0.0) p.h_vertex = 3.0 * std::sqrt(p.dt);
  if (p.h_vertex < 3.0 * std::sqrt(p.dt) - 1e-15)
    throw std::invalid_argument("SimParams: h_vertex below 3*sqrt(dt)");
  if (p.drift_clamp <= 0.0) p.drift_clamp = 10.0 / std::sqrt(p.dt);
  if (!(p.beta > 0.0)) throw std::invalid_argument("SimParams: beta must be positive");
  if (p.n_paths < 1) throw std::invalid_argument("SimParams: n_paths must be >= 1");
  return p;
}

namespace {

struct VertexChoice {
  double cum = 0.0;  // cumulative drift-adjusted weight
  int edge = -1;
  int dir = +1;  // relocation direction along x from the vertex
};

struct EdgeCache {
  double x0 = 0.0, x1 = 0.0;
  bool is_wing = false;
  bool reflect_lo = false, reflect_hi = false;  // tip or window end
  double refl_lo = 0.0, refl_hi = 0.0;          // shifted reflection walls
  int vlo = -1, vhi = -1;                       // interior vertex ids
  double vlo_x = 0.0, vhi_x = 0.0;
  std::vector<double> drift;  // clamped beta + l'/(2l), sampled uniformly
  double step = 0.0, inv_step = 0.0;

  double drift_at(double x) const {
    const double u = (x - x0) * inv_step;
    if (u <= 0.0) return drift.front();
    const std::size_t i = static_cast<std::size_t>(u);
    if (i + 1 >= drift.size()) return drift.back();
    const double w = u - static_cast<double>(i);
    return (1.0 - w) * drift[i] + w * drift[i + 1];
  }
};

struct Engine {
  std::vector<EdgeCache> edges;
  std::vector<std::vector<VertexChoice>> vertex_choices;  // per vertex id
  std::vector<double> vertex_alpha_sum;

  Engine(const MetricGraph& g, const SimParams& p) {
    edges.resize(g.edges().size());
    for (const GraphEdge& e : g.edges()) {
      EdgeCache c;
      c.x0 = e.x0;
      c.x1 = e.x1;
      c.is_wing = (e.kind == EdgeKind::Wing);
      auto interior = [&](int v) { return v >= 0 && g.vertex(v).kind == VertexKind::Interior; };
      c.reflect_lo = !interior(e.v0);
      c.reflect_hi = !interior(e.v1);
      // Reflecting walls extended by 0.5826 sqrt(dt) cancel the O(sqrt(dt))
      // boundary bias of the mirrored Euler step (Asmussen-Glynn-Pitman).
      const double wall_shift = 0.5826 * std::sqrt(p.dt);
      c.refl_lo = e.x0 - wall_shift;
      c.refl_hi = e.x1 + wall_shift;
      if (interior(e.v0)) {
        c.vlo = e.v0;
        c.vlo_x = g.vertex(e.v0).x;
      }
      if (interior(e.v1)) {
        c.vhi = e.v1;
        c.vhi_x = g.vertex(e.v1).x;
      }
      // Two vertex balls on one edge must not overlap; window-end stubs with a
      // reflecting side are tolerated (the relocation clamp handles them).
      if (!c.reflect_lo && !c.reflect_hi && e.length() < 2.0 * p.h_vertex)
        throw std::invalid_argument("graph_mc: edge shorter than twice the vertex radius");

      const int n = std::max(8, static_cast<int>(e.length() * 512));
      c.drift.resize(static_cast<std::size_t>(n) + 1);
      c.step = e.length() / n;
      c.inv_step = 1.0 / c.step;
      const double fd = 0.25 * c.step;
      for (int i = 0; i <= n; ++i) {
        const double x = e.x0 + c.step * i;
        const double xm = std::max(e.x0, x - fd), xp = std::min(e.x1, x + fd);
        const double lm = e.width.value(xm), lp = e.width.value(xp);
        const double li = e.width.value(std::clamp(x, xm, xp));
        double lam = p.beta;
        if (li > 0.0 && xp > xm) lam += (lp - lm) / (xp - xm) / (2.0 * li);
        c.drift[static_cast<std::size_t>(i)] = std::clamp(lam, -p.drift_clamp, p.drift_clamp);
      }
      edges[static_cast<std::size_t>(e.id)] = std::move(c);
    }

    // Ball-exit probabilities with the drift folded in: an edge leaving the
    // vertex in direction d has scale length S_d(h) = (1 - e^{-2 beta d h}) /
    // (2 beta d), and the vertex routes with weights alpha_j / S_j(h).
    const double h = p.h_vertex;
    scale_h_pos = -std::expm1(-2.0 * p.beta * h) / (2.0 * p.beta);
    scale_h_neg = std::expm1(2.0 * p.beta * h) / (2.0 * p.beta);
    two_beta = 2.0 * p.beta;
    vertex_choices.resize(g.vertices().size());
    vertex_alpha_sum.assign(g.vertices().size(), 0.0);
    for (const GraphVertex& v : g.vertices()) {
      if (v.kind != VertexKind::Interior) continue;
      double cum = 0.0;
      for (const GluingTerm& t : v.gluing) {
        cum += t.alpha / (t.sign > 0 ? scale_h_pos : scale_h_neg);
        vertex_choices[static_cast<std::size_t>(v.id)].push_back({cum, t.edge, t.sign});
      }
      vertex_alpha_sum[static_cast<std::size_t>(v.id)] = cum;
    }
  }

  double scale_h_pos = 0.0, scale_h_neg = 0.0, two_beta = 0.0;
};

}  // namespace

static ExitSample run_one(const Engine& eng, const MetricGraph& g, GraphPoint start, double a,
                          const SimParams& p, std::uint64_t path_seed) {
  rng::Stream rs(path_seed);
  ExitSample out;
  int edge = start.edge;
  double x = start.x;
  const double sdt = std::sqrt(p.dt);
  const double h = p.h_vertex;
  long steps = 0;

  // tau is defined as the sum of the two occupation accounts.
  auto charge = [&out](bool wing, double dt) { (wing ? out.wing_time : out.main_time) += dt; };
  auto finish = [&out] {
    out.tau = out.main_time + out.wing_time;
    return out;
  };

  while (true) {
    const EdgeCache& ec = eng.edges[static_cast<std::size_t>(edge)];
    double x2 = x + ec.drift_at(x) * p.dt + sdt * rs.normal();
    charge(ec.is_wing, p.dt);
    if (!std::isfinite(x2))
      throw std::runtime_error("graph_mc: non-finite state on edge " + std::to_string(edge) +
                               " near x=" + std::to_string(x));

    // Reflecting ends (pocket tips, window boundary).
    if (ec.reflect_hi && x2 > ec.refl_hi) x2 = 2.0 * ec.refl_hi - x2;
    if (ec.reflect_lo && x2 < ec.refl_lo) x2 = 2.0 * ec.refl_lo - x2;
    x2 = std::clamp(x2, ec.reflect_lo ? ec.refl_lo : ec.x0, ec.reflect_hi ? ec.refl_hi : ec.x1);

    // Exit happens on the main line only.
    if (!ec.is_wing && x2 >= a) {
      if (p.thin > 0) out.path.emplace_back(x2, edge);
      return finish();
    }

    // Vertex neighbourhood. An excursion entering the radius-h ball at depth
    // d leaves it on the entry edge with probability S(d)/S(h) (scale function
    // of the drifted motion) and through the vertex otherwise, where it is
    // routed over the incident edges with weights alpha_j / S_j(h); the
    // expected excursion duration is h^2 - d^2 at leading order.
    int vertex = -1;
    if (ec.vhi >= 0 && x2 > ec.vhi_x - h) vertex = ec.vhi;
    if (ec.vlo >= 0 && x2 < ec.vlo_x + h) vertex = ec.vlo;
    if (vertex >= 0) {
      const double vx = g.vertex(vertex).x;
      const double depth = std::min(std::abs(x2 - vx), h);
      const int entry_dir = (vertex == ec.vhi) ? -1 : +1;  // side the walker came from
      int dest_edge = edge;
      int dest_dir = entry_dir;
      const double stay_p =
          -std::expm1(-eng.two_beta * entry_dir * depth) /
          -std::expm1(-eng.two_beta * entry_dir * h);
      if (rs.uniform() >= stay_p) {
        const auto& choices = eng.vertex_choices[static_cast<std::size_t>(vertex)];
        const double u = rs.uniform() * eng.vertex_alpha_sum[static_cast<std::size_t>(vertex)];
        const VertexChoice* pick = &choices.back();
        for (const VertexChoice& c : choices)
          if (u < c.cum) {
            pick = &c;
            break;
          }
        dest_edge = pick->edge;
        dest_dir = pick->dir;
      }
      edge = dest_edge;
      const EdgeCache& dst = eng.edges[static_cast<std::size_t>(edge)];
      x = std::clamp(vx + dest_dir * h, dst.x0, dst.x1);
      charge(dst.is_wing, h * h - depth * depth);
      out.vertex_charge += h * h - depth * depth;
      ++out.relocations;
      if (!dst.is_wing && x >= a) return finish();
    } else {
      x = x2;
    }

    if (p.thin > 0 && (++steps % p.thin) == 0) out.path.emplace_back(x, edge);
  }
}

ExitSample simulate_exit(const MetricGraph& g, GraphPoint start, double a, const SimParams& params,
                         std::uint64_t path_seed) {
  const SimParams p = params.resolved();
  if (start.edge < 0 || start.edge >= static_cast<int>(g.edges().size()))
    throw std::invalid_argument("simulate_exit: bad start edge");
  if (g.edge(start.edge).kind == EdgeKind::Main && start.x > a)
    throw std::invalid_argument("simulate_exit: start beyond the exit level");
  if (a > g.x_hi()) throw std::invalid_argument("simulate_exit: exit level outside the window");
  if (!g.edge(start.edge).contains(start.x))
    throw std::invalid_argument("simulate_exit: start x not on the start edge");
  Engine eng(g, p);
  return run_one(eng, g, start, a, p, path_seed);
}

std::vector<ExitSample> run_exit_paths(const MetricGraph& g, GraphPoint start, double a,
                                       const SimParams& params) {
  const SimParams p = params.resolved();
  if (g.edge(start.edge).kind == EdgeKind::Main && start.x >= a) {
    // Degenerate start: tau = 0 for every path.
    return std::vector<ExitSample>(static_cast<std::size_t>(p.n_paths));
  }
  Engine eng(g, p);

  std::vector<ExitSample> out(static_cast<std::size_t>(p.n_paths));
  int n_threads = p.n_threads > 0 ? p.n_threads
                                  : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  n_threads = std::min(n_threads, p.n_paths);

  auto worker = [&](int tid) {
    for (int i = tid; i < p.n_paths; i += n_threads)
      out[static_cast<std::size_t>(i)] =
          run_one(eng, g, start, a, p, rng::mix(p.seed, rng::kPath, static_cast<std::uint64_t>(i)));
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

MeanStderr summarize(const std::vector<double>& xs) {
  MeanStderr m;
  m.n = static_cast<int>(xs.size());
  if (m.n == 0) return m;
  double s = 0.0;
  for (double v : xs) s += v;
  m.mean = s / m.n;
  double ss = 0.0;
  for (double v : xs) ss += (v - m.mean) * (v - m.mean);
  m.se = m.n > 1 ? std::sqrt(ss / (m.n - 1) / m.n) : 0.0;
  m.ci_lo = m.mean - 1.96 * m.se;
  m.ci_hi = m.mean + 1.96 * m.se;
  return m;
}

MeanStderr mean_exit_time(const MetricGraph& g, GraphPoint start, double a,
                          const SimParams& params) {
  if (params.n_paths < 2) throw std::invalid_argument("mean_exit_time: need n_paths >= 2");
  const auto samples = run_exit_paths(g, start, a, params);
  std::vector<double> taus;
  taus.reserve(samples.size());
  for (const auto& s : samples) taus.push_back(s.tau);
  return summarize(taus);
}

OccupationSummary wing_occupation(const MetricGraph& g, GraphPoint start, double a,
                                  const SimParams& params) {
  if (params.n_paths < 2) throw std::invalid_argument("wing_occupation: need n_paths >= 2");
  const auto samples = run_exit_paths(g, start, a, params);
  std::vector<double> taus, mains, wings;
  for (const auto& s : samples) {
    taus.push_back(s.tau);
    mains.push_back(s.main_time);
    wings.push_back(s.wing_time);
  }
  OccupationSummary o;
  o.tau = summarize(taus);
  o.main = summarize(mains);
  o.wing = summarize(wings);
  o.wing_fraction = o.tau.mean > 0.0 ? o.wing.mean / o.tau.mean : 0.0;
  return o;
}

}  // namespace nchan

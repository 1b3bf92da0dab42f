#include "narrowchannel/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace nchan {

namespace {

double probe_sup(const WidthFn& l, double a, double b) {
  double m = 0.0;
  const int n = std::max(64, static_cast<int>((b - a) * 64));
  for (int i = 0; i <= n; ++i) m = std::max(m, l.value(a + (b - a) * i / n));
  return m;
}

double probe_inf(const WidthFn& l, double a, double b) {
  double m = std::numeric_limits<double>::infinity();
  const int n = std::max(64, static_cast<int>((b - a) * 64));
  for (int i = 0; i <= n; ++i) m = std::min(m, l.value(a + (b - a) * i / n));
  return m;
}

}  // namespace

QuadResult exit_time_quadrature(const WidthFn& l, double beta, double a, double left_tail_T,
                                double tol) {
  if (!(beta > 0.0)) throw std::invalid_argument("exit_time_quadrature: beta must be positive");
  if (a <= 0.0) return {0.0, 0.0, true};
  if (2.0 * beta * a > 600.0)
    throw std::invalid_argument("exit_time_quadrature: exponent overflow, use the speed formulas");
  quad::Opts opts{tol, 30};

  // The inner cumulative feeds every outer evaluation; keep it well below the
  // outer tolerance so its noise cannot stall the outer refinement.
  quad::Cumulative G([&l, beta](double t) { return l.value(t) * std::exp(2.0 * beta * t); }, 0.0, a,
                     l.breaks, quad::Opts{0.01 * tol, 32});
  const double term1 = quad::integrate(
      [&](double y) { return std::exp(-2.0 * beta * y) * G.upto(y) / l.value(y); }, 0.0, a,
      l.breaks, opts);

  const double c0 = quad::integrate(
      [&l, beta](double t) { return l.value(t) * std::exp(2.0 * beta * t); }, -left_tail_T, 0.0,
      l.breaks, opts);
  const double d = quad::integrate(
      [&l, beta](double y) { return std::exp(-2.0 * beta * y) / l.value(y); }, 0.0, a, l.breaks,
      opts);

  QuadResult out;
  out.value = 2.0 * term1 + 2.0 * c0 * d;
  const double l_sup = probe_sup(l, -left_tail_T, a);
  out.tail_bound = 2.0 * l_sup * std::exp(-2.0 * beta * left_tail_T) / (2.0 * beta) * d;
  return out;
}

double wing_time_formula(const WidthFn& l_wing, double q, double r, const WidthFn& l0, double beta,
                         double a, double tol) {
  if (!(beta > 0.0)) throw std::invalid_argument("wing_time_formula: beta must be positive");
  if (q > a) throw std::invalid_argument("wing_time_formula: attachment beyond the exit level");
  if (r == 0.0) return 0.0;
  quad::Opts opts{tol, 30};

  const double sgn_r = r > 0 ? 1.0 : -1.0;
  const double w_part =
      sgn_r * quad::integrate(
                  [&](double t) { return l_wing.value(t) * std::exp(2.0 * beta * (t - q)); }, q,
                  q + r, l_wing.breaks, opts);

  const double lower = std::max(q, 0.0);
  double upper = a;
  if (!std::isfinite(a)) {
    const double l_inf = std::max(probe_inf(l0, lower, lower + 4.0 / beta), 1e-12);
    upper = lower + (35.0 + std::max(0.0, std::log(1.0 / l_inf))) / (2.0 * beta);
  }
  const double c_part = quad::integrate(
      [&](double y) { return std::exp(-2.0 * beta * (y - q)) / l0.value(y); }, lower, upper,
      l0.breaks, opts);

  return 2.0 * w_part * c_part;
}

SpeedEstimate inverse_speed(const KEstimate& K, double e_n, double e_n_stderr, double wing_term,
                            double wing_term_stderr, double wing_trunc_bound, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("inverse_speed: beta must be positive");
  if (K.t.size() < 2 || K.t.size() != K.K.size())
    throw std::invalid_argument("inverse_speed: malformed K estimate");
  if (K.t.front() != 0.0) throw std::invalid_argument("inverse_speed: K grid must start at t=0");
  if (!(K.ratio_bound >= 1.0))
    throw std::invalid_argument("inverse_speed: missing K tail bound (ratio_bound)");

  // Exact integral of the piecewise-linear interpolant against e^{-2 beta t}.
  double sum = 0.0, err = 0.0;
  for (std::size_t i = 0; i + 1 < K.t.size(); ++i) {
    const double h = K.t[i + 1] - K.t[i];
    if (!(h > 0.0)) throw std::invalid_argument("inverse_speed: K grid not increasing");
    const double em = -std::expm1(-2.0 * beta * h);           // 1 - e^{-2 beta h}
    const double A = em / (2.0 * beta);
    const double B = (em - 2.0 * beta * h * std::exp(-2.0 * beta * h)) / (4.0 * beta * beta);
    const double m = (K.K[i + 1] - K.K[i]) / h;
    const double w = std::exp(-2.0 * beta * K.t[i]);
    sum += w * (K.K[i] * A + m * B);
    if (!K.stderr_.empty()) err += w * A * std::max(K.stderr_[i], K.stderr_[i + 1]);
  }
  const double t_end = K.t.back();
  const double tail = K.K.back() * std::exp(-2.0 * beta * t_end) / (2.0 * beta);
  const double k_hi = K.ratio_bound, k_lo = 1.0 / K.ratio_bound;
  const double tail_bound = std::max(k_hi - K.K.back(), K.K.back() - k_lo) *
                            std::exp(-2.0 * beta * t_end) / (2.0 * beta) * 2.0;

  SpeedEstimate s;
  s.beta = beta;
  s.first_term = 2.0 * (sum + tail);
  s.first_term_stderr = 2.0 * err;
  s.first_term_tail = 2.0 * tail;
  s.first_term_tail_bound = tail_bound;
  s.e_n = e_n;
  s.wing_term = wing_term;
  s.wing_trunc_bound = wing_trunc_bound;
  s.wing_contrib = 2.0 * e_n * wing_term;
  s.inverse_speed = s.first_term + s.wing_contrib;
  const double wing_err = 2.0 * (std::abs(e_n) * wing_term_stderr + std::abs(wing_term) * e_n_stderr +
                                 e_n_stderr * wing_term_stderr + std::abs(e_n) * wing_trunc_bound);
  s.stderr_ = s.first_term_stderr + s.first_term_tail_bound + wing_err;
  return s;
}

ScaleSpeed ScaleSpeed::make(const WidthFn& l, double beta, double lo, double hi, double tol) {
  if (!(beta > 0.0)) throw std::invalid_argument("ScaleSpeed: beta must be positive");
  ScaleSpeed s;
  s.beta_ = beta;
  quad::Opts opts{tol, 30};
  auto lv = l.value;
  s.u_ = std::make_shared<quad::Cumulative>(
      [lv, beta](double y) { return std::exp(-2.0 * beta * y) / lv(y); }, lo, hi, l.breaks, opts);
  s.v_ = std::make_shared<quad::Cumulative>(
      [lv, beta](double y) { return 2.0 * lv(y) * std::exp(2.0 * beta * y); }, lo, hi, l.breaks,
      opts);
  s.q_ = std::make_shared<quad::Cumulative>([lv](double y) { return 1.0 / lv(y); }, lo, hi,
                                            l.breaks, opts);
  s.r_ = std::make_shared<quad::Cumulative>([lv](double y) { return 2.0 * lv(y); }, lo, hi,
                                            l.breaks, opts);
  s.x0_ = 0.0;
  return s;
}

double ScaleSpeed::u(double x) const { return u_->upto(x) - u_->upto(x0_); }
double ScaleSpeed::v(double x) const { return v_->upto(x) - v_->upto(x0_); }
double ScaleSpeed::q(double x) const { return q_->upto(x) - q_->upto(x0_); }
double ScaleSpeed::r(double x) const { return r_->upto(x) - r_->upto(x0_); }

double BvpSolution::at(int edge, double x) const {
  const EdgeGrid& g = grids.at(static_cast<std::size_t>(edge));
  if (g.x.empty()) throw std::invalid_argument("BvpSolution: edge not meshed");
  if (x <= g.x.front()) return g.u.front();
  if (x >= g.x.back()) return g.u.back();
  auto it = std::upper_bound(g.x.begin(), g.x.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - g.x.begin()) - 1;
  const double w = (x - g.x[i]) / (g.x[i + 1] - g.x[i]);
  return (1.0 - w) * g.u[i] + w * g.u[i + 1];
}

double BvpSolution::on_main(const MetricGraph& g, double x) const {
  const int e = g.main_edge_at(x);
  if (e < 0) throw std::invalid_argument("BvpSolution: x outside the main line");
  return at(e, x);
}

BvpSolution solve_exit_bvp(const MetricGraph& g, double beta, double a, SourceSel source,
                           double h_target) {
  if (!(beta > 0.0)) throw std::invalid_argument("solve_exit_bvp: beta must be positive");
  if (std::exp(2.0 * beta * g.x_lo()) >= 1e-12)
    throw std::invalid_argument("solve_exit_bvp: left window end is not deep enough");
  if (a > g.x_hi() || a <= g.x_lo())
    throw std::invalid_argument("solve_exit_bvp: exit level outside the window");

  enum class End { Dirichlet, Vertex, Tip };
  struct MeshedEdge {
    int edge = -1;
    std::vector<double> x;  // nodes, ascending
    End lo = End::Dirichlet, hi = End::Dirichlet;
    int vlo = -1, vhi = -1;  // interior vertex ids at the ends
    bool sourced = false;
  };

  // Interior vertices strictly left of the exit level stay in the system;
  // everything at or beyond a is absorbed or unreachable.
  std::vector<MeshedEdge> mesh;
  for (const GraphEdge& e : g.edges()) {
    MeshedEdge m;
    m.edge = e.id;
    double x0 = e.x0, x1 = e.x1;
    if (e.kind == EdgeKind::Main) {
      if (x0 >= a) continue;
      if (x1 > a) x1 = a;
      if (e.v0 < 0) {
        m.lo = End::Dirichlet;
      } else {
        m.lo = End::Vertex;
        m.vlo = e.v0;
      }
      if (x1 == a || e.v1 < 0) {
        m.hi = End::Dirichlet;
      } else {
        m.hi = End::Vertex;
        m.vhi = e.v1;
      }
      m.sourced = (source == SourceSel::All || source == SourceSel::MainOnly);
    } else {
      const bool tip_at_hi = g.vertex(e.v1).kind == VertexKind::Exterior;
      const int attach = tip_at_hi ? e.v0 : e.v1;
      if (g.vertex(attach).x >= a) continue;  // pocket beyond the exit level
      if (tip_at_hi) {
        m.lo = End::Vertex;
        m.vlo = attach;
        m.hi = End::Tip;
      } else {
        m.lo = End::Tip;
        m.hi = End::Vertex;
        m.vhi = attach;
      }
      m.sourced = (source == SourceSel::All || source == SourceSel::WingOnly);
    }
    const int cells = std::max(3, static_cast<int>(std::ceil((x1 - x0) / h_target)));
    m.x.resize(static_cast<std::size_t>(cells) + 1);
    for (int i = 0; i <= cells; ++i) m.x[static_cast<std::size_t>(i)] = x0 + (x1 - x0) * i / cells;
    m.x.back() = x1;
    mesh.push_back(std::move(m));
  }

  // Global unknown numbering: shared vertex unknowns first, then edge nodes.
  std::vector<long> vertex_unknown(g.vertices().size(), -1);
  long n_unknowns = 0;
  for (const MeshedEdge& m : mesh) {
    for (int v : {m.vlo, m.vhi})
      if (v >= 0 && vertex_unknown[static_cast<std::size_t>(v)] < 0)
        vertex_unknown[static_cast<std::size_t>(v)] = n_unknowns++;
  }
  std::vector<std::vector<long>> gid(mesh.size());
  for (std::size_t me = 0; me < mesh.size(); ++me) {
    const MeshedEdge& m = mesh[me];
    gid[me].resize(m.x.size());
    gid[me].front() = (m.lo == End::Vertex) ? vertex_unknown[static_cast<std::size_t>(m.vlo)]
                                            : n_unknowns++;
    for (std::size_t i = 1; i + 1 < m.x.size(); ++i) gid[me][i] = n_unknowns++;
    gid[me].back() = (m.hi == End::Vertex) ? vertex_unknown[static_cast<std::size_t>(m.vhi)]
                                           : n_unknowns++;
  }

  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_unknowns);
  quad::Opts tip_opts{1e-12, 24};

  for (std::size_t me = 0; me < mesh.size(); ++me) {
    const MeshedEdge& m = mesh[me];
    const WidthFn& l = g.edge(m.edge).width;
    const double f = m.sourced ? -1.0 : 0.0;
    const auto& x = m.x;
    const auto& id = gid[me];
    const std::size_t n = x.size() - 1;

    for (std::size_t i = 1; i < n; ++i) {  // conservative interior rows
      const double hm = x[i] - x[i - 1], hp = x[i + 1] - x[i], hbar = 0.5 * (hm + hp);
      const double lm = l.value(0.5 * (x[i - 1] + x[i]));
      const double lp = l.value(0.5 * (x[i] + x[i + 1]));
      const double li = l.value(x[i]);
      const double cm = -hp / (hm * (hm + hp));
      const double c0 = (hp - hm) / (hm * hp);
      const double cp = hm / (hp * (hm + hp));
      trips.emplace_back(id[i], id[i - 1], lm / (hm * hbar) + 2.0 * beta * li * cm);
      trips.emplace_back(id[i], id[i], -(lm / hm + lp / hp) / hbar + 2.0 * beta * li * c0);
      trips.emplace_back(id[i], id[i + 1], lp / (hp * hbar) + 2.0 * beta * li * cp);
      rhs[id[i]] = 2.0 * li * f;
    }

    if (m.lo == End::Dirichlet) {
      trips.emplace_back(id[0], id[0], 1.0);
      rhs[id[0]] = 0.0;
    } else if (m.lo == End::Tip) {
      // Half-cell balance with vanishing boundary flux l u'.
      const double h = x[1] - x[0];
      const double lp = l.value(x[0] + 0.5 * h);
      const double m0 = quad::integrate(l.value, x[0], x[0] + 0.5 * h, l.breaks, tip_opts);
      trips.emplace_back(id[0], id[1], (lp + 2.0 * beta * m0) / h);
      trips.emplace_back(id[0], id[0], -(lp + 2.0 * beta * m0) / h);
      rhs[id[0]] = 2.0 * f * m0;
    }
    if (m.hi == End::Dirichlet) {
      trips.emplace_back(id[n], id[n], 1.0);
      rhs[id[n]] = 0.0;
    } else if (m.hi == End::Tip) {
      const double h = x[n] - x[n - 1];
      const double lm = l.value(x[n] - 0.5 * h);
      const double m0 = quad::integrate(l.value, x[n] - 0.5 * h, x[n], l.breaks, tip_opts);
      trips.emplace_back(id[n], id[n], (-lm + 2.0 * beta * m0) / h);
      trips.emplace_back(id[n], id[n - 1], (lm - 2.0 * beta * m0) / h);
      rhs[id[n]] = 2.0 * f * m0;
    }
  }

  // Eq.-(4) flux balance rows at shared vertices, one-sided second order.
  for (std::size_t v = 0; v < g.vertices().size(); ++v) {
    const long row = vertex_unknown[v];
    if (row < 0) continue;
    for (const GluingTerm& t : g.vertex(static_cast<int>(v)).gluing) {
      std::size_t me = mesh.size();
      for (std::size_t k = 0; k < mesh.size(); ++k)
        if (mesh[k].edge == t.edge) me = k;
      if (me == mesh.size())
        throw std::runtime_error("solve_exit_bvp: gluing edge missing from mesh at vertex " +
                                 std::to_string(v));
      const auto& x = mesh[me].x;
      const auto& id = gid[me];
      const double w = t.sign * t.alpha;
      if (t.sign > 0) {  // edge extends rightward: derivative at its lo end
        const double h1 = x[1] - x[0], h2 = x[2] - x[1];
        trips.emplace_back(row, id[0], w * (-(2.0 * h1 + h2) / (h1 * (h1 + h2))));
        trips.emplace_back(row, id[1], w * ((h1 + h2) / (h1 * h2)));
        trips.emplace_back(row, id[2], w * (-h1 / (h2 * (h1 + h2))));
      } else {
        const std::size_t n = x.size() - 1;
        const double g1 = x[n] - x[n - 1], g2 = x[n - 1] - x[n - 2];
        trips.emplace_back(row, id[n], w * ((2.0 * g1 + g2) / (g1 * (g1 + g2))));
        trips.emplace_back(row, id[n - 1], w * (-(g1 + g2) / (g1 * g2)));
        trips.emplace_back(row, id[n - 2], w * (g1 / (g2 * (g1 + g2))));
      }
    }
  }

  Eigen::SparseMatrix<double> A(n_unknowns, n_unknowns);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("solve_exit_bvp: singular system (check vertex gluing weights)");
  const Eigen::VectorXd u = lu.solve(rhs);

  BvpSolution sol;
  sol.grids.resize(g.edges().size());
  for (std::size_t me = 0; me < mesh.size(); ++me) {
    BvpSolution::EdgeGrid grid;
    grid.edge = mesh[me].edge;
    grid.x = mesh[me].x;
    grid.u.resize(grid.x.size());
    for (std::size_t i = 0; i < grid.x.size(); ++i)
      grid.u[i] = u[gid[me][i]];
    sol.grids[static_cast<std::size_t>(mesh[me].edge)] = std::move(grid);
  }
  return sol;
}

}  // namespace nchan

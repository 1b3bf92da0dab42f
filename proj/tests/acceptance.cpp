// Integration acceptance suite. Each criterion prints one [PASS]/[FAIL] line;
// the exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "narrowchannel/analytic.hpp"
#include "narrowchannel/environment.hpp"
#include "narrowchannel/experiments.hpp"
#include "narrowchannel/graph.hpp"
#include "narrowchannel/graph_mc.hpp"
#include "narrowchannel/rng.hpp"
#include "narrowchannel/sde2d.hpp"

using namespace nchan;

namespace {

struct Check {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    } else if (detail.empty()) {
      detail = what;
    }
  }
};

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

KEstimate unit_kernel() {
  KEstimate k;
  for (double t = 0.0; t <= 6.0 + 1e-9; t += 0.125) {
    k.t.push_back(t);
    k.K.push_back(1.0);
    k.stderr_.push_back(0.0);
  }
  k.ratio_bound = 1.0;
  k.sample_length = 1.0;
  return k;
}

EnvironmentParams bernoulli_env(std::uint64_t seed) {
  EnvironmentParams p;
  p.block_length = 1.0;
  p.mixing_range = 2.0;
  p.width_law = ValueLaw::two_point(1.0, 2.0, 0.5);
  p.smoothing = Interp::Steps;
  p.l_min = 1.0;
  p.l_max = 2.0;
  p.seed = seed;
  p.phase_shift = true;
  return p;
}

EnvironmentParams deterministic_wing_env(std::uint64_t seed) {
  EnvironmentParams p;
  p.block_length = 1.0;
  p.mixing_range = 2.0;
  p.width_law = ValueLaw::point(1.0);
  p.smoothing = Interp::Steps;
  p.wing_prob = 1.0;
  p.wing_law.level_law = ValueLaw::point(1.0);
  p.wing_law.r_abs_law = ValueLaw::point(1.0);
  p.wing_law.p_r_positive = 1.0;
  p.wing_law.offset_frac = 0.5;
  p.wing_law.tip_radius = 0.0;
  p.n0 = 1.0;
  p.A1 = 1.0;
  p.l_min = 0.5;
  p.l_max = 2.0;
  p.seed = seed;
  return p;
}

// 1. Degenerate constant channel: closed form equals 1/beta; graph Monte
//    Carlo reproduces a/beta.
Check criterion_constant_channel() {
  Check c;
  const KEstimate k = unit_kernel();
  for (double beta : {0.5, 1.0, 2.0}) {
    const SpeedEstimate s = inverse_speed(k, 0.0, 0.0, 0.0, 0.0, 0.0, beta);
    c.require(std::abs(s.inverse_speed - 1.0 / beta) < 1e-10,
              "inverse_speed(beta=" + fmt(beta) + ")=" + fmt(s.inverse_speed));
  }
  GraphBuilder b(constant_width(1.0, -15.0, 6.0), -15.0, 6.0);
  const MetricGraph g = b.build();
  for (double beta : {0.5, 1.0, 2.0}) {
    SimParams p;
    p.dt = 1e-4;
    p.beta = beta;
    p.n_paths = 10000;
    p.seed = 101;
    const MeanStderr m = mean_exit_time(g, {g.main_edge_at(0.0), 0.0}, 5.0, p);
    c.require(std::abs(m.mean - 5.0 / beta) <= 3.0 * m.se,
              "mc(beta=" + fmt(beta) + ")=" + fmt(m.mean) + "±" + fmt(m.se));
  }
  return c;
}

// 2. The closed-form exit-time quadrature and the finite-difference solver
//    agree across seeded random smooth shapes.
Check criterion_oracle_equivalence() {
  Check c;
  double max_rel = 0.0;
  for (int i = 0; i < 20; ++i) {
    const ChannelSpec spec =
        random_smooth_shape(rng::mix(202, rng::kShape, static_cast<std::uint64_t>(i)), -16.0, 6.0,
                            0.6, 1.6);
    const double uq = exit_time_quadrature(spec.width_fn(), 1.0, 5.0, 15.0).value;
    const MetricGraph g = build_graph(spec);
    const double ub = solve_exit_bvp(g, 1.0, 5.0, SourceSel::All, 1e-3).on_main(g, 0.0);
    max_rel = std::max(max_rel, std::abs(uq - ub) / std::abs(uq));
  }
  c.require(max_rel < 1e-3, "max rel discrepancy over 20 shapes = " + fmt(max_rel));
  return c;
}

// 3. Triple check of the pocket occupation on the three-edge graph: closed
//    form vs FD solver vs Monte Carlo.
Check criterion_lemma_triple() {
  Check c;
  const double closed =
      wing_time_formula(constant_width(1.0, -5.0, 5.0), 0.0, 1.0, constant_width(1.0, -20.0, 20.0),
                        1.0, 5.0);
  GraphBuilder b(constant_width(1.0, -15.0, 10.0), -15.0, 10.0);
  b.wing(0.0, 1.0, constant_width(1.0, 0.0, 1.0), 1.0);
  const MetricGraph g = b.build();

  const double fd = solve_exit_bvp(g, 1.0, 5.0, SourceSel::WingOnly, 1e-3).on_main(g, 0.0);
  c.require(std::abs(closed - fd) / closed < 1e-3,
            "closed=" + fmt(closed) + " fd=" + fmt(fd));

  SimParams p;
  p.dt = 1e-4;
  p.beta = 1.0;
  p.n_paths = 10000;
  p.seed = 303;
  const OccupationSummary occ = wing_occupation(g, {g.main_edge_at(0.0), 0.0}, 5.0, p);
  c.require(std::abs(occ.wing.mean - closed) <= 3.0 * occ.wing.se,
            "mc=" + fmt(occ.wing.mean) + "±" + fmt(occ.wing.se));
  c.require(std::abs(occ.wing.mean - closed) <= 0.02 * closed, "mc within 2% of closed form");
  return c;
}

// 4. Two-point block environment: K estimate matches the derived kernel and
//    feeds the first transport term.
Check criterion_k_pipeline() {
  Check c;
  const EnvironmentParams env = bernoulli_env(404);
  std::vector<double> t;
  for (double v = 0.0; v <= 5.0 + 1e-9; v += 0.125) t.push_back(v);
  const KEstimate k = estimate_K(env, t, 1e4);
  double max_err = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double expected = t[i] <= 1.0 ? 1.0 + t[i] / 8.0 : 9.0 / 8.0;
    max_err = std::max(max_err, std::abs(k.K[i] - expected));
  }
  c.require(max_err < 1e-2, "max pointwise K error = " + fmt(max_err));

  const SpeedEstimate s = inverse_speed(k, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0);
  const double expected = 17.0 / 16.0 - std::exp(-2.0) / 16.0;
  c.require(std::abs(s.first_term - expected) < 1e-2,
            "first term = " + fmt(s.first_term) + " vs " + fmt(expected));
  return c;
}

// 5. Deterministic one-pocket-per-block environment: moment estimates, the
//    assembled inverse speed, and a long-channel Monte Carlo cross-check.
Check criterion_wing_term() {
  Check c;
  const EnvironmentParams env = deterministic_wing_env(505);
  const WingMoments m = wing_moment_estimates(env, 1.0, 10000);
  c.require(std::abs(m.e_n - 1.0) <= 3.0 * m.e_n_stderr + 1e-9, "E n = " + fmt(m.e_n));
  const double wing_expected = (std::exp(2.0) - 1.0) / 4.0;
  c.require(std::abs(m.wing_term - wing_expected) <= 3.0 * m.wing_term_stderr + 1e-9,
            "wing term = " + fmt(m.wing_term) + " vs " + fmt(wing_expected));

  std::vector<double> t;
  for (double v = 0.0; v <= 6.0 + 1e-9; v += 0.125) t.push_back(v);
  const KEstimate k = estimate_K(env, t, 2000.0);
  const SpeedEstimate s = inverse_speed(k, m, 1.0);
  const double expected = 1.0 + (std::exp(2.0) - 1.0) / 2.0;
  c.require(std::abs(s.inverse_speed - expected) <= s.stderr_ + 1e-9,
            "inverse speed = " + fmt(s.inverse_speed) + " vs " + fmt(expected));

  const double a = 500.0;
  const ChannelSpec spec = sample_environment(env, -16.0, a + 2.0);
  const MetricGraph g = build_graph(spec);
  SimParams p;
  p.dt = 1e-4;
  p.beta = 1.0;
  p.n_paths = 16;
  p.seed = 505;
  const MeanStderr tau = mean_exit_time(g, {g.main_edge_at(0.0), 0.0}, a, p);
  const double ratio = tau.mean / a;
  c.require(std::abs(ratio - expected) / expected < 0.05,
            "long-channel tau/a = " + fmt(ratio) + " (" + fmt(std::abs(ratio - expected) / expected * 100) + "%)");
  return c;
}

// 6. Finite-epsilon 2-D exit times approach the graph limit monotonically.
Check criterion_eps_convergence() {
  Check c;
  // Pocket level well below the channel width keeps the 2-D domain connected
  // at the attachment and the finite-epsilon entrance-layer bias small; the
  // span stays clear of the exit level. The step size shrinks like eps^4 so
  // the transverse resolution follows the boundary-layer width.
  WingSpec w;
  w.q = 0.7;
  w.r = 0.5;
  w.level = 0.3;
  w.side = Side::Above;
  w.tip_radius = 0.0;
  w.pitch = 0.05;
  const ChannelSpec spec =
      channel_with_wings(Piecewise::constant(1.0, -16.0, 3.0), {w}, 0.5, 2.0);
  const MetricGraph g = build_graph(spec);
  const double graph_ref = solve_exit_bvp(g, 1.0, 2.0, SourceSel::All, 1e-3).on_main(g, 0.0);

  double prev = std::numeric_limits<double>::infinity();
  bool monotone = true;
  double last_rel = 0.0;
  std::string seq;
  for (double eps : {0.4, 0.2, 0.1}) {
    SdeParams p;
    p.epsilon = eps;
    p.dt = eps * eps * eps * eps / 6.4;
    p.V.beta = 1.0;
    p.n_paths = 1000;
    p.seed = 606;
    const SdeSummary s = run_sde(spec, {0.0, 0.0}, 2.0, p);
    const double err = std::abs(s.sigma.mean - graph_ref);
    monotone = monotone && (err <= prev);
    prev = err;
    last_rel = err / graph_ref;
    seq += (seq.empty() ? "" : " -> ") + fmt(err);
  }
  c.require(monotone, "|mean sigma - graph ref| sequence: " + seq);
  c.require(last_rel < 0.05, "rel err at eps=0.1: " + fmt(last_rel * 100) + "%");
  return c;
}

// 7. Environment law: stationarity, decorrelation beyond the dependence
//    range, and hard bounds over many blocks.
Check criterion_environment_law() {
  Check c;
  EnvironmentParams env = bernoulli_env(707);
  env.width_law = ValueLaw::uniform(1.0, 2.0);

  const int n = 10000;
  std::vector<double> at0(n), at1(n);
  for (int i = 0; i < n; ++i) {
    EnvironmentParams e = env;
    e.seed = 900000 + static_cast<std::uint64_t>(i);
    const Piecewise l0 = sample_l0(e, -1.0, 8.0);
    at0[i] = l0(0.35);
    at1[i] = l0(0.35 + 1.77);
  }
  std::sort(at0.begin(), at0.end());
  std::sort(at1.begin(), at1.end());
  double ks = 0.0;
  {
    std::size_t i = 0, j = 0;
    while (i < at0.size() && j < at1.size()) {
      if (at0[i] <= at1[j])
        ++i;
      else
        ++j;
      ks = std::max(ks, std::abs(double(i) - double(j)) / n);
    }
  }
  const double ks_crit = 1.628 * std::sqrt(2.0 / n);  // two-sample, alpha = 1%
  c.require(ks < ks_crit, "stationarity KS = " + fmt(ks) + " < " + fmt(ks_crit));

  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  const double d = env.mixing_range + env.block_length + 0.3;
  for (int i = 0; i < n; ++i) {
    EnvironmentParams e = env;
    e.seed = 1700000 + static_cast<std::uint64_t>(i);
    const Piecewise l0 = sample_l0(e, -1.0, d + 2.0);
    const double x = l0(0.42), y = l0(0.42 + d);
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  const double corr = (sxy / n - sx / n * sy / n) /
                      std::sqrt((sxx / n - sx / n * sx / n) * (syy / n - sy / n * sy / n));
  c.require(std::abs(corr) < 3.0 / std::sqrt(double(n)),
            "corr beyond M = " + fmt(corr));

  // Hard bounds over 1e5 blocks, wings included.
  EnvironmentParams wide = deterministic_wing_env(808);
  wide.width_law = ValueLaw::uniform(0.8, 1.8);
  wide.l_min = 0.5;
  wide.l_max = 2.0;
  wide.wing_prob = 0.7;
  wide.wing_law.level_law = ValueLaw::uniform(0.2, 0.9);
  wide.wing_law.r_abs_law = ValueLaw::uniform(0.1, 0.9);
  long violations = 0, blocks_seen = 0;
  for (int rep = 0; rep < 100 && violations == 0; ++rep) {
    wide.seed = 2500000 + static_cast<std::uint64_t>(rep);
    const ChannelSpec spec = sample_environment(wide, 0.0, 1000.0);
    blocks_seen += 1000;
    for (const WingSpec& ws : spec.wings())
      if (std::abs(ws.r) > wide.A1 + 1e-12 || ws.level > wide.A1 + 1e-12) ++violations;
    for (double x = 0.5; x < 1000.0 && violations == 0; x += 7.0)
      if (spec.width(x) < wide.l_min - 1e-12 || spec.width(x) > wide.l_max + 1e-12) ++violations;
    for (double x0 = 0.0; x0 + 1.0 <= 1000.0 && violations == 0; x0 += 97.0) {
      int cnt = 0;
      for (const WingSpec& ws : spec.wings()) cnt += (ws.q >= x0 && ws.q < x0 + 1.0);
      if (cnt > wide.n0) ++violations;
    }
  }
  c.require(violations == 0 && blocks_seen >= 100000,
            "bounds clean over " + std::to_string(blocks_seen) + " blocks");
  return c;
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    std::function<Check()> run;
  };
  const std::vector<Entry> entries{
      {"constant-channel identity (closed form + graph MC)", criterion_constant_channel},
      {"oracle equivalence (quadrature vs FD solver, 20 shapes)", criterion_oracle_equivalence},
      {"pocket occupation triple check (formula / FD / MC)", criterion_lemma_triple},
      {"K-kernel pipeline on the two-point block environment", criterion_k_pipeline},
      {"wing term, assembled inverse speed, long-channel run", criterion_wing_term},
      {"epsilon convergence of the 2-D simulation to the graph limit", criterion_eps_convergence},
      {"environment law: stationarity, mixing, hard bounds", criterion_environment_law},
  };

  int failures = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    try {
      c = entries[i].run();
    } catch (const std::exception& e) {
      c.pass = false;
      c.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %zu: %s — %s (%.1fs)\n", c.pass ? "PASS" : "FAIL", i + 1,
                entries[i].name, c.detail.c_str(), secs);
    std::fflush(stdout);
    failures += c.pass ? 0 : 1;
  }
  return failures;
}

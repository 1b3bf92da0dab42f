#include "narrowchannel/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "narrowchannel/analytic.hpp"
#include "narrowchannel/environment.hpp"
#include "narrowchannel/graph.hpp"
#include "narrowchannel/graph_mc.hpp"
#include "narrowchannel/rng.hpp"
#include "narrowchannel/sde2d.hpp"
#include "narrowchannel/version.hpp"

namespace nchan {

namespace {

using nlohmann::json;

double need_num(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("config: missing field '") + key + "'");
  if (!j.at(key).is_number()) throw ConfigError(std::string("config: '") + key + "' must be numeric");
  return j.at(key).get<double>();
}

double opt_num(const json& j, const char* key, double fallback) {
  return j.contains(key) ? need_num(j, key) : fallback;
}

EnvironmentParams env_from(const json& cfg) {
  if (!cfg.contains("environment")) throw ConfigError("config: this experiment needs 'environment'");
  EnvironmentParams p = EnvironmentParams::from_json(cfg.at("environment"));
  if (cfg.contains("seed")) p.seed = cfg.at("seed").get<std::uint64_t>();
  p.validate();
  return p;
}

ChannelSpec channel_from(const json& cfg) {
  if (cfg.contains("channel")) return ChannelSpec::from_json(cfg.at("channel"));
  if (cfg.contains("channel_file")) {
    std::ifstream in(cfg.at("channel_file").get<std::string>());
    if (!in) throw ConfigError("config: cannot open channel_file");
    json j;
    in >> j;
    return ChannelSpec::from_json(j);
  }
  if (cfg.contains("environment")) {
    const EnvironmentParams p = env_from(cfg);
    const double x0 = opt_num(cfg, "x_left", -16.0);
    const double x1 = opt_num(cfg, "x_right", opt_num(cfg, "a", 5.0) + 1.0);
    return sample_environment(p, x0, x1);
  }
  throw ConfigError("config: provide 'channel', 'channel_file' or 'environment'");
}

SimParams sim_from(const json& cfg) {
  SimParams p;
  p.beta = need_num(cfg, "beta");
  p.dt = opt_num(cfg, "dt", 1e-4);
  p.h_vertex = opt_num(cfg, "h_vertex", 0.0);
  p.n_paths = static_cast<int>(opt_num(cfg, "n_paths", 1000));
  p.seed = static_cast<std::uint64_t>(opt_num(cfg, "seed", 1));
  p.n_threads = static_cast<int>(opt_num(cfg, "threads", 0));
  return p;
}

std::vector<double> t_grid_from(const json& cfg) {
  const double t_max = opt_num(cfg, "t_max", 5.0);
  const double t_step = opt_num(cfg, "t_step", 0.05);
  if (!(t_step > 0.0) || !(t_max > 0.0)) throw ConfigError("config: bad t grid");
  std::vector<double> t;
  for (double v = 0.0; v < t_max + 0.5 * t_step; v += t_step) t.push_back(std::min(v, t_max));
  if (t.back() < t_max) t.push_back(t_max);
  return t;
}

json mean_json(const MeanStderr& m) {
  return {{"mean", m.mean}, {"stderr", m.se}, {"ci_lo", m.ci_lo}, {"ci_hi", m.ci_hi}, {"n", m.n}};
}

ExperimentResult run_validate_geometry(const json& cfg) {
  const ChannelSpec spec = channel_from(cfg);
  const ValidationReport rep = spec.validate();
  ExperimentResult r;
  r.summary["all_pass"] = rep.all_pass();
  r.summary["checks"] = json::array();
  r.csv_header = {"check", "pass", "x", "detail"};
  for (const auto& e : rep.entries) {
    r.summary["checks"].push_back({{"check", e.check}, {"pass", e.pass}, {"detail", e.detail}});
    r.csv_rows.push_back({e.check, e.pass ? "1" : "0", e.x ? format_double(*e.x) : "",
                          e.detail});
  }
  return r;
}

ExperimentResult run_estimate_k(const json& cfg) {
  const EnvironmentParams p = env_from(cfg);
  const std::vector<double> t = t_grid_from(cfg);
  const double S = opt_num(cfg, "S", 1e4);
  const int ensemble = static_cast<int>(opt_num(cfg, "ensemble", 1));
  const KEstimate est = estimate_K(p, t, S, ensemble);
  ExperimentResult r;
  r.csv_header = {"t", "K", "stderr"};
  for (std::size_t i = 0; i < est.t.size(); ++i)
    r.csv_rows.push_back({format_double(est.t[i]), format_double(est.K[i]),
                          format_double(est.stderr_[i])});
  r.summary["S"] = est.sample_length;
  r.summary["ratio_bound"] = est.ratio_bound;
  r.summary["ensemble"] = est.ensemble;
  r.summary["K0"] = est.K.front();
  r.summary["K_end"] = est.K.back();
  return r;
}

ExperimentResult run_graph_mc(const json& cfg) {
  const ChannelSpec spec = channel_from(cfg);
  const MetricGraph g = build_graph(spec);
  SimParams p = sim_from(cfg);
  const double a = need_num(cfg, "a");
  const double start_x = opt_num(cfg, "start_x", 0.0);
  const GraphPoint start{g.main_edge_at(start_x), start_x};
  if (start.edge < 0) throw ConfigError("config: start_x outside the channel window");

  const auto paths = run_exit_paths(g, start, a, p);
  ExperimentResult r;
  r.csv_header = {"path", "tau", "main_time", "wing_time"};
  std::vector<double> taus, mains, wings;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    r.csv_rows.push_back({std::to_string(i), format_double(paths[i].tau),
                          format_double(paths[i].main_time), format_double(paths[i].wing_time)});
    taus.push_back(paths[i].tau);
    mains.push_back(paths[i].main_time);
    wings.push_back(paths[i].wing_time);
  }
  r.summary["tau"] = mean_json(summarize(taus));
  r.summary["main_time"] = mean_json(summarize(mains));
  r.summary["wing_time"] = mean_json(summarize(wings));
  r.summary["edges"] = g.edges().size();
  r.summary["vertices"] = g.vertices().size();
  return r;
}

SdeParams sde_from(const json& cfg, double epsilon) {
  SdeParams p;
  p.epsilon = epsilon;
  p.V.beta = need_num(cfg, "beta");
  p.V.z_amp = opt_num(cfg, "v_z_amp", 0.0);
  p.dt = opt_num(cfg, "sde_dt", 0.0);
  p.n_paths = static_cast<int>(opt_num(cfg, "n_paths", 1000));
  p.seed = static_cast<std::uint64_t>(opt_num(cfg, "seed", 1));
  p.n_threads = static_cast<int>(opt_num(cfg, "threads", 0));
  return p;
}

ExperimentResult run_sde_mc(const json& cfg) {
  const ChannelSpec spec = channel_from(cfg);
  const double a = need_num(cfg, "a");
  const double eps = need_num(cfg, "epsilon");
  const SdeParams p = sde_from(cfg, eps);
  const Vec2 start{opt_num(cfg, "start_x", 0.0), opt_num(cfg, "start_z", 0.0)};
  const auto paths = run_sde_paths(spec, start, a, p);
  ExperimentResult r;
  r.csv_header = {"path", "sigma", "push_accum"};
  std::vector<double> sigmas;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    r.csv_rows.push_back({std::to_string(i), format_double(paths[i].sigma),
                          format_double(paths[i].push_accum)});
    sigmas.push_back(paths[i].sigma);
  }
  r.summary["sigma"] = mean_json(summarize(sigmas));
  r.summary["epsilon"] = eps;
  return r;
}

ExperimentResult run_eps_sweep(const json& cfg) {
  const ChannelSpec spec = channel_from(cfg);
  const double a = need_num(cfg, "a");
  const double beta = need_num(cfg, "beta");
  if (!cfg.contains("epsilon") || !cfg.at("epsilon").is_array())
    throw ConfigError("config: eps-sweep needs an 'epsilon' array");
  const Vec2 start{opt_num(cfg, "start_x", 0.0), opt_num(cfg, "start_z", 0.0)};

  const MetricGraph g = build_graph(spec);
  const BvpSolution ref = solve_exit_bvp(g, beta, a, SourceSel::All,
                                         opt_num(cfg, "bvp_h", 1e-3));
  const double graph_ref = ref.on_main(g, start.x);

  ExperimentResult r;
  r.csv_header = {"epsilon", "mean_sigma", "stderr", "graph_ref"};
  r.summary["graph_ref"] = graph_ref;
  r.summary["runs"] = json::array();
  double prev_err = std::numeric_limits<double>::infinity();
  bool monotone = true;
  for (const auto& je : cfg.at("epsilon")) {
    const double eps = je.get<double>();
    const SdeSummary s = run_sde(spec, start, a, sde_from(cfg, eps));
    const double err = std::abs(s.sigma.mean - graph_ref);
    monotone = monotone && (err <= prev_err);
    prev_err = err;
    r.csv_rows.push_back({format_double(eps), format_double(s.sigma.mean),
                          format_double(s.sigma.se), format_double(graph_ref)});
    r.summary["runs"].push_back({{"epsilon", eps},
                                 {"mean_sigma", s.sigma.mean},
                                 {"stderr", s.sigma.se},
                                 {"abs_err", err},
                                 {"rel_err", err / std::abs(graph_ref)}});
  }
  r.summary["monotone_decreasing"] = monotone;
  return r;
}

ExperimentResult run_speed(const json& cfg) {
  const EnvironmentParams p = env_from(cfg);
  const double beta = need_num(cfg, "beta");
  const std::vector<double> t = t_grid_from(cfg);
  const KEstimate K = estimate_K(p, t, opt_num(cfg, "S", 1e4),
                                 static_cast<int>(opt_num(cfg, "ensemble", 1)));
  WingMoments m;
  m.beta = beta;
  if (p.wing_prob > 0.0)
    m = wing_moment_estimates(p, beta, static_cast<int>(opt_num(cfg, "n_samples", 100000)));
  const SpeedEstimate s = inverse_speed(K, m, beta);

  ExperimentResult r;
  r.csv_header = {"t", "K", "stderr"};
  for (std::size_t i = 0; i < K.t.size(); ++i)
    r.csv_rows.push_back({format_double(K.t[i]), format_double(K.K[i]),
                          format_double(K.stderr_[i])});
  r.summary["inverse_speed"] = s.inverse_speed;
  r.summary["stderr"] = s.stderr_;
  r.summary["first_term"] = s.first_term;
  r.summary["first_term_stderr"] = s.first_term_stderr;
  r.summary["first_term_tail_bound"] = s.first_term_tail_bound;
  r.summary["wing_contrib"] = s.wing_contrib;
  r.summary["e_n"] = m.e_n;
  r.summary["e_n_stderr"] = m.e_n_stderr;
  r.summary["wing_term"] = m.wing_term;
  r.summary["wing_term_stderr"] = m.wing_term_stderr;
  r.summary["effective_speed"] = 1.0 / s.inverse_speed;

  if (cfg.contains("cross_check")) {
    const json& cc = cfg.at("cross_check");
    const double a = need_num(cc, "a");
    EnvironmentParams pc = p;
    const ChannelSpec spec = sample_environment(pc, opt_num(cc, "x_left", -16.0), a + 2.0);
    const MetricGraph g = build_graph(spec);
    SimParams sp;
    sp.beta = beta;
    sp.dt = opt_num(cc, "dt", 1e-4);
    sp.n_paths = static_cast<int>(opt_num(cc, "n_paths", 16));
    sp.seed = p.seed;
    sp.n_threads = static_cast<int>(opt_num(cfg, "threads", 0));
    const GraphPoint start{g.main_edge_at(0.0), 0.0};
    const MeanStderr tau = mean_exit_time(g, start, a, sp);
    r.summary["cross_check"] = {{"a", a},
                                {"tau_over_a", tau.mean / a},
                                {"stderr", tau.se / a},
                                {"n_paths", sp.n_paths},
                                {"rel_diff", std::abs(tau.mean / a - s.inverse_speed) /
                                                 s.inverse_speed}};
  }
  return r;
}

ExperimentResult run_oracle_compare(const json& cfg) {
  const double beta = opt_num(cfg, "beta", 1.0);
  const double a = opt_num(cfg, "a", 5.0);
  const int n_shapes = static_cast<int>(opt_num(cfg, "n_shapes", 20));
  const double x_left = opt_num(cfg, "x_left", -16.0);
  const double x_right = opt_num(cfg, "x_right", a + 1.0);
  const double l_lo = opt_num(cfg, "l_lo", 0.6);
  const double l_hi = opt_num(cfg, "l_hi", 1.6);
  const std::uint64_t seed = static_cast<std::uint64_t>(opt_num(cfg, "seed", 1));
  const double h = opt_num(cfg, "bvp_h", 1e-3);

  ExperimentResult r;
  r.csv_header = {"shape", "quadrature", "bvp", "rel_diff"};
  double max_rel = 0.0;
  for (int i = 0; i < n_shapes; ++i) {
    const ChannelSpec spec =
        random_smooth_shape(rng::mix(seed, rng::kShape, static_cast<std::uint64_t>(i)), x_left,
                            x_right, l_lo, l_hi);
    const QuadResult qr = exit_time_quadrature(spec.width_fn(), beta, a, -x_left - 1.0);
    const MetricGraph g = build_graph(spec);
    const BvpSolution sol = solve_exit_bvp(g, beta, a, SourceSel::All, h);
    const double ub = sol.on_main(g, 0.0);
    const double rel = std::abs(qr.value - ub) / std::abs(qr.value);
    max_rel = std::max(max_rel, rel);
    r.csv_rows.push_back({std::to_string(i), format_double(qr.value), format_double(ub),
                          format_double(rel)});
  }
  r.summary["max_rel_diff"] = max_rel;
  r.summary["n_shapes"] = n_shapes;
  r.summary["beta"] = beta;
  r.summary["a"] = a;
  return r;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ChannelSpec random_smooth_shape(std::uint64_t seed, double x_lo, double x_hi, double l_lo,
                                double l_hi) {
  rng::Stream s(seed);
  std::vector<double> knots, vals;
  for (double x = x_lo; x < x_hi + 0.25; x += 0.5) {
    knots.push_back(std::min(x, x_hi));
    vals.push_back(s.uniform(l_lo + 0.05 * (l_hi - l_lo), l_hi - 0.05 * (l_hi - l_lo)));
    if (knots.back() == x_hi) break;
  }
  const Piecewise l0 = Piecewise::tabulated(knots, vals);
  return channel_with_wings(l0, {}, l_lo, l_hi);
}

ExperimentResult run_experiment(nlohmann::json config) {
  if (!config.contains("kind") || !config.at("kind").is_string())
    throw ConfigError("config: missing 'kind'");
  const std::string kind = config.at("kind").get<std::string>();

  ExperimentResult r;
  if (kind == "validate-geometry")
    r = run_validate_geometry(config);
  else if (kind == "estimate-K")
    r = run_estimate_k(config);
  else if (kind == "graph-mc")
    r = run_graph_mc(config);
  else if (kind == "sde-mc")
    r = run_sde_mc(config);
  else if (kind == "eps-sweep")
    r = run_eps_sweep(config);
  else if (kind == "speed")
    r = run_speed(config);
  else if (kind == "oracle-compare")
    r = run_oracle_compare(config);
  else
    throw ConfigError("config: unknown kind '" + kind + "'");

  r.manifest["tool"] = "channelsim";
  r.manifest["version"] = kVersion;
  r.manifest["config"] = std::move(config);
  return r;
}

void write_outputs(const ExperimentResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("write_outputs: cannot create " + out_dir);

  auto dump = [&](const std::string& name, const nlohmann::json& j) {
    std::ofstream out(fs::path(out_dir) / name);
    if (!out) throw std::runtime_error("write_outputs: cannot write " + name);
    out << j.dump(2) << "\n";
  };
  dump("manifest.json", result.manifest);
  dump("summary.json", result.summary);

  if (result.csv_rows.empty()) throw std::runtime_error("write_outputs: no records to emit");
  std::ofstream csv(fs::path(out_dir) / "results.csv");
  if (!csv) throw std::runtime_error("write_outputs: cannot write results.csv");
  for (std::size_t i = 0; i < result.csv_header.size(); ++i)
    csv << result.csv_header[i] << (i + 1 < result.csv_header.size() ? "," : "\n");
  for (const auto& row : result.csv_rows)
    for (std::size_t i = 0; i < row.size(); ++i)
      csv << row[i] << (i + 1 < row.size() ? "," : "\n");
}

}  // namespace nchan

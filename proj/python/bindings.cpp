#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "json.hpp"

#include "narrowchannel/analytic.hpp"
#include "narrowchannel/environment.hpp"
#include "narrowchannel/experiments.hpp"
#include "narrowchannel/graph.hpp"
#include "narrowchannel/graph_mc.hpp"
#include "narrowchannel/sde2d.hpp"
#include "narrowchannel/version.hpp"

namespace py = pybind11;
using namespace nchan;

namespace {

nlohmann::json json_from_str(const std::string& s) { return nlohmann::json::parse(s); }

SimParams sim_params_from_dict(const py::dict& d) {
  SimParams p;
  if (d.contains("dt")) p.dt = d["dt"].cast<double>();
  if (d.contains("h_vertex")) p.h_vertex = d["h_vertex"].cast<double>();
  if (d.contains("beta")) p.beta = d["beta"].cast<double>();
  if (d.contains("seed")) p.seed = d["seed"].cast<std::uint64_t>();
  if (d.contains("n_paths")) p.n_paths = d["n_paths"].cast<int>();
  if (d.contains("threads")) p.n_threads = d["threads"].cast<int>();
  return p;
}

SdeParams sde_params_from_dict(const py::dict& d) {
  SdeParams p;
  if (d.contains("epsilon")) p.epsilon = d["epsilon"].cast<double>();
  if (d.contains("dt")) p.dt = d["dt"].cast<double>();
  if (d.contains("beta")) p.V.beta = d["beta"].cast<double>();
  if (d.contains("z_amp")) p.V.z_amp = d["z_amp"].cast<double>();
  if (d.contains("seed")) p.seed = d["seed"].cast<std::uint64_t>();
  if (d.contains("n_paths")) p.n_paths = d["n_paths"].cast<int>();
  if (d.contains("threads")) p.n_threads = d["threads"].cast<int>();
  return p;
}

py::dict mean_dict(const MeanStderr& m) {
  py::dict d;
  d["mean"] = m.mean;
  d["stderr"] = m.se;
  d["ci_lo"] = m.ci_lo;
  d["ci_hi"] = m.ci_hi;
  d["n"] = m.n;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Diffusion in narrow random channels: geometry, graph limit, transport speed";
  m.attr("__version__") = kVersion;

  py::class_<ChannelSpec>(m, "ChannelSpec")
      .def_static("from_json", [](const std::string& s) { return ChannelSpec::from_json(json_from_str(s)); })
      .def("to_json", [](const ChannelSpec& s) { return s.to_json().dump(); })
      .def_property_readonly("x_lo", &ChannelSpec::x_lo)
      .def_property_readonly("x_hi", &ChannelSpec::x_hi)
      .def("width", &ChannelSpec::width, py::arg("x"))
      .def("width_limits", &ChannelSpec::width_limits, py::arg("x"))
      .def("cross_section",
           [](const ChannelSpec& s, double x) {
             std::vector<std::pair<double, double>> out;
             for (const auto& iv : s.cross_section(x)) out.emplace_back(iv.lo, iv.hi);
             return out;
           },
           py::arg("x"))
      .def("inside", &ChannelSpec::inside, py::arg("x"), py::arg("z"))
      .def("validate",
           [](const ChannelSpec& s) {
             py::list out;
             for (const auto& e : s.validate().entries) {
               py::dict d;
               d["check"] = e.check;
               d["pass"] = e.pass;
               d["detail"] = e.detail;
               out.append(d);
             }
             return out;
           })
      .def("n_wings", [](const ChannelSpec& s) { return s.wings().size(); });

  m.def("constant_channel", &constant_channel, py::arg("width"), py::arg("x0"), py::arg("x1"));

  m.def("sample_environment",
        [](const std::string& params_json, double x0, double x1) {
          return sample_environment(EnvironmentParams::from_json(json_from_str(params_json)), x0, x1);
        },
        py::arg("params_json"), py::arg("x0"), py::arg("x1"));

  m.def("estimate_K",
        [](const std::string& params_json, const std::vector<double>& t_grid, double S, int ensemble) {
          const KEstimate k =
              estimate_K(EnvironmentParams::from_json(json_from_str(params_json)), t_grid, S, ensemble);
          py::dict d;
          d["t"] = k.t;
          d["K"] = k.K;
          d["stderr"] = k.stderr_;
          d["ratio_bound"] = k.ratio_bound;
          d["S"] = k.sample_length;
          return d;
        },
        py::arg("params_json"), py::arg("t_grid"), py::arg("S"), py::arg("ensemble") = 1);

  m.def("wing_moments",
        [](const std::string& params_json, double beta, int n_samples) {
          const WingMoments w =
              wing_moment_estimates(EnvironmentParams::from_json(json_from_str(params_json)), beta, n_samples);
          py::dict d;
          d["e_n"] = w.e_n;
          d["e_n_stderr"] = w.e_n_stderr;
          d["wing_term"] = w.wing_term;
          d["wing_term_stderr"] = w.wing_term_stderr;
          d["trunc_bound"] = w.trunc_bound;
          return d;
        },
        py::arg("params_json"), py::arg("beta"), py::arg("n_samples"));

  py::class_<MetricGraph>(m, "MetricGraph")
      .def("to_json", [](const MetricGraph& g) { return g.to_json().dump(); })
      .def("n_edges", [](const MetricGraph& g) { return g.edges().size(); })
      .def("n_vertices", [](const MetricGraph& g) { return g.vertices().size(); })
      .def("locate",
           [](const MetricGraph& g, double x, double z) {
             const GraphPoint p = g.locate(x, z);
             return py::make_tuple(p.edge, p.x);
           },
           py::arg("x"), py::arg("z"))
      .def("gluing",
           [](const MetricGraph& g, int vertex) {
             py::list out;
             for (const auto& t : g.gluing_weights(vertex).gluing) {
               py::dict d;
               d["edge"] = t.edge;
               d["sign"] = t.sign;
               d["alpha"] = t.alpha;
               out.append(d);
             }
             return out;
           },
           py::arg("vertex"));

  m.def("build_graph", &build_graph, py::arg("spec"));

  m.def("mean_exit_time",
        [](const MetricGraph& g, double start_x, double a, const py::dict& params) {
          const GraphPoint start{g.main_edge_at(start_x), start_x};
          if (start.edge < 0) throw std::invalid_argument("start_x outside the window");
          return mean_dict(mean_exit_time(g, start, a, sim_params_from_dict(params)));
        },
        py::arg("graph"), py::arg("start_x"), py::arg("a"), py::arg("params"));

  m.def("wing_occupation",
        [](const MetricGraph& g, double start_x, double a, const py::dict& params) {
          const GraphPoint start{g.main_edge_at(start_x), start_x};
          if (start.edge < 0) throw std::invalid_argument("start_x outside the window");
          const OccupationSummary o = wing_occupation(g, start, a, sim_params_from_dict(params));
          py::dict d;
          d["tau"] = mean_dict(o.tau);
          d["main"] = mean_dict(o.main);
          d["wing"] = mean_dict(o.wing);
          d["wing_fraction"] = o.wing_fraction;
          return d;
        },
        py::arg("graph"), py::arg("start_x"), py::arg("a"), py::arg("params"));

  m.def("run_sde",
        [](const ChannelSpec& spec, double start_x, double start_z, double a, const py::dict& params) {
          const SdeSummary s = run_sde(spec, {start_x, start_z}, a, sde_params_from_dict(params));
          py::dict d;
          d["sigma"] = mean_dict(s.sigma);
          d["mean_push"] = s.mean_push;
          return d;
        },
        py::arg("spec"), py::arg("start_x"), py::arg("start_z"), py::arg("a"), py::arg("params"));

  m.def("compare_to_graph",
        [](const ChannelSpec& spec, double start_x, double start_z, double a,
           const py::dict& sde_params, const py::dict& graph_params) {
          const CompareReport r = compare_to_graph(spec, {start_x, start_z}, a,
                                                   sde_params_from_dict(sde_params),
                                                   sim_params_from_dict(graph_params));
          py::dict d;
          d["sde_sigma"] = mean_dict(r.sde_sigma);
          d["graph_tau"] = mean_dict(r.graph_tau);
          d["ks"] = r.ks;
          return d;
        },
        py::arg("spec"), py::arg("start_x"), py::arg("start_z"), py::arg("a"),
        py::arg("sde_params"), py::arg("graph_params"));

  m.def("exit_time_quadrature",
        [](const ChannelSpec& spec, double beta, double a, double left_tail_T) {
          const QuadResult r = exit_time_quadrature(spec.width_fn(), beta, a, left_tail_T);
          py::dict d;
          d["value"] = r.value;
          d["tail_bound"] = r.tail_bound;
          return d;
        },
        py::arg("spec"), py::arg("beta"), py::arg("a"), py::arg("left_tail_T") = 15.0);

  m.def("solve_exit_bvp",
        [](const MetricGraph& g, double beta, double a, const std::string& source, double h,
           double eval_x) {
          SourceSel sel = SourceSel::All;
          if (source == "main") sel = SourceSel::MainOnly;
          else if (source == "wing") sel = SourceSel::WingOnly;
          else if (source != "all") throw std::invalid_argument("source must be all|main|wing");
          return solve_exit_bvp(g, beta, a, sel, h).on_main(g, eval_x);
        },
        py::arg("graph"), py::arg("beta"), py::arg("a"), py::arg("source") = "all",
        py::arg("h") = 1e-3, py::arg("eval_x") = 0.0);

  m.def("wing_time",
        [](double level, double q, double r, double l0_width, double beta, double a) {
          const WidthFn lw = constant_width(level, std::min(q, q + r) - 1.0, std::max(q, q + r) + 1.0);
          const WidthFn l0 = constant_width(l0_width, -100.0, 1000.0);
          return wing_time_formula(lw, q, r, l0, beta, a);
        },
        py::arg("level"), py::arg("q"), py::arg("r"), py::arg("l0_width"), py::arg("beta"),
        py::arg("a") = std::numeric_limits<double>::infinity());

  m.def("inverse_speed",
        [](const std::vector<double>& t, const std::vector<double>& K,
           const std::vector<double>& se, double ratio_bound, double e_n, double e_n_se,
           double wing_term, double wing_term_se, double beta) {
          KEstimate k;
          k.t = t;
          k.K = K;
          k.stderr_ = se;
          k.ratio_bound = ratio_bound;
          const SpeedEstimate s = inverse_speed(k, e_n, e_n_se, wing_term, wing_term_se, 0.0, beta);
          py::dict d;
          d["inverse_speed"] = s.inverse_speed;
          d["stderr"] = s.stderr_;
          d["first_term"] = s.first_term;
          d["wing_contrib"] = s.wing_contrib;
          return d;
        },
        py::arg("t"), py::arg("K"), py::arg("stderr"), py::arg("ratio_bound"), py::arg("e_n") = 0.0,
        py::arg("e_n_stderr") = 0.0, py::arg("wing_term") = 0.0, py::arg("wing_term_stderr") = 0.0,
        py::arg("beta") = 1.0);

  m.def("run_experiment",
        [](const std::string& config_json) {
          const ExperimentResult r = run_experiment(json_from_str(config_json));
          py::dict d;
          d["summary"] = r.summary.dump();
          d["manifest"] = r.manifest.dump();
          return d;
        },
        py::arg("config_json"));
}

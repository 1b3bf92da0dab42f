#include <cmath>

#include "doctest.h"

#include "narrowchannel/analytic.hpp"
#include "narrowchannel/graph_mc.hpp"

using namespace nchan;

namespace {

MetricGraph line_graph() {
  GraphBuilder b(constant_width(1.0, -15.0, 10.0), -15.0, 10.0);
  return b.build();
}

MetricGraph lemma_graph() {
  GraphBuilder b(constant_width(1.0, -15.0, 10.0), -15.0, 10.0);
  b.wing(0.0, 1.0, constant_width(1.0, 0.0, 1.0), 1.0);
  return b.build();
}

}  // namespace

TEST_CASE("drifted line: mean exit time approaches a/beta") {
  SimParams p;
  p.dt = 2e-4;
  p.beta = 1.0;
  p.n_paths = 4000;
  p.seed = 11;
  const MetricGraph g = line_graph();
  const MeanStderr m = mean_exit_time(g, {g.main_edge_at(0.0), 0.0}, 5.0, p);
  CHECK(std::abs(m.mean - 5.0) < 3.0 * m.se + 0.05);
}

TEST_CASE("start at the exit level gives tau = 0") {
  SimParams p;
  p.n_paths = 8;
  const MetricGraph g = line_graph();
  const auto samples = run_exit_paths(g, {g.main_edge_at(5.0), 5.0}, 5.0, p);
  for (const auto& s : samples) CHECK(s.tau == 0.0);
}

TEST_CASE("same seed reproduces identical samples; threads do not matter") {
  SimParams p;
  p.dt = 1e-3;
  p.n_paths = 64;
  p.seed = 99;
  const MetricGraph g = lemma_graph();
  const GraphPoint start{g.main_edge_at(0.0), 0.0};
  // dt=1e-3 needs h ~ 0.095 < wing length 1; acceptable for this check.
  const auto a1 = run_exit_paths(g, start, 5.0, p);
  const auto a2 = run_exit_paths(g, start, 5.0, p);
  REQUIRE(a1.size() == a2.size());
  for (std::size_t i = 0; i < a1.size(); ++i) CHECK(a1[i].tau == a2[i].tau);
  SimParams p1 = p;
  p1.n_threads = 1;
  SimParams p2 = p;
  p2.n_threads = 2;
  const auto b1 = run_exit_paths(g, start, 5.0, p1);
  const auto b2 = run_exit_paths(g, start, 5.0, p2);
  for (std::size_t i = 0; i < b1.size(); ++i) CHECK(b1[i].tau == b2[i].tau);
}

TEST_CASE("per-path occupations sum to tau exactly and wingless runs have none") {
  SimParams p;
  p.dt = 5e-4;
  p.n_paths = 50;
  p.seed = 5;
  const MetricGraph g = lemma_graph();
  const auto samples = run_exit_paths(g, {g.main_edge_at(0.0), 0.0}, 3.0, p);
  for (const auto& s : samples) {
    CHECK(s.tau == s.main_time + s.wing_time);
    CHECK(s.main_time >= 0.0);
    CHECK(s.wing_time >= 0.0);
  }
  const MetricGraph line = line_graph();
  const auto clean = run_exit_paths(line, {line.main_edge_at(0.0), 0.0}, 3.0, p);
  for (const auto& s : clean) CHECK(s.wing_time == 0.0);
}

TEST_CASE("quadrupling the paths roughly halves the standard error") {
  SimParams p;
  p.dt = 5e-4;
  p.beta = 1.0;
  p.n_paths = 500;
  p.seed = 21;
  const MetricGraph g = line_graph();
  const GraphPoint start{g.main_edge_at(0.0), 0.0};
  const MeanStderr small = mean_exit_time(g, start, 5.0, p);
  p.n_paths = 2000;
  p.seed = 22;
  const MeanStderr big = mean_exit_time(g, start, 5.0, p);
  const double ratio = small.se / big.se;
  CHECK(ratio > 1.4);
  CHECK(ratio < 2.6);
}

TEST_CASE("pocket occupation approaches the closed form") {
  SimParams p;
  p.dt = 4e-4;
  p.beta = 1.0;
  p.n_paths = 4000;
  p.seed = 31;
  const MetricGraph g = lemma_graph();
  const OccupationSummary occ = wing_occupation(g, {g.main_edge_at(0.0), 0.0}, 5.0, p);
  const double expected = (std::exp(2.0) - 1.0) * (1.0 - std::exp(-10.0)) / 2.0;
  CHECK(std::abs(occ.wing.mean - expected) < 3.0 * occ.wing.se + 0.05 * expected);
  // Main-channel occupation follows the wingless constant-width value a/beta.
  CHECK(std::abs(occ.main.mean - 5.0) < 3.0 * occ.main.se + 0.05 * 5.0);
}

TEST_CASE("pocket paths never leave the pocket interval by more than a step") {
  SimParams p;
  p.dt = 1e-3;
  p.n_paths = 4;
  p.seed = 77;
  p.thin = 1;
  const MetricGraph g = lemma_graph();
  const auto samples = run_exit_paths(g, {g.main_edge_at(0.0), 0.0}, 2.0, p);
  const GraphEdge* wing = nullptr;
  for (const auto& e : g.edges())
    if (e.kind == EdgeKind::Wing) wing = &e;
  REQUIRE(wing != nullptr);
  // Reflection walls sit 0.5826 sqrt(dt) beyond the tip; positions never
  // exceed the interval by more than that sub-step margin.
  const double margin = 0.5826 * std::sqrt(p.dt) + 1e-12;
  for (const auto& s : samples)
    for (const auto& [x, eid] : s.path)
      if (eid == wing->id) {
        CHECK(x <= wing->x1 + margin);
        CHECK(x >= wing->x0 - margin);
      }
}

TEST_CASE("parameter validation") {
  const MetricGraph g = line_graph();
  SimParams p;
  p.dt = -1.0;
  CHECK_THROWS_AS(p.resolved(), std::invalid_argument);
  SimParams q;
  q.h_vertex = 0.001;  // below 3 sqrt(dt) for dt=1e-4
  q.dt = 1e-4;
  CHECK_THROWS_AS(q.resolved(), std::invalid_argument);
  SimParams ok;
  ok.n_paths = 1;
  CHECK_THROWS_AS(mean_exit_time(g, {0, 0.0}, 5.0, ok), std::invalid_argument);
}

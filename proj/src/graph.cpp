#include "narrowchannel/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "narrowchannel/quadrature.hpp"

namespace nchan {

namespace {

// Width view restricted to [x0, x1] that evaluates one-sidedly at the ends.
WidthFn clip_width(const WidthFn& w, double x0, double x1) {
  WidthFn out;
  auto value = w.value;
  auto left = w.left;
  out.value = [value, left, x0, x1](double x) {
    if (x >= x1) return left(x1);
    return value(std::max(x, x0));
  };
  out.left = [value, left, x0, x1](double x) {
    if (x <= x0) return value(x0);
    return left(std::min(x, x1));
  };
  out.breaks = quad::clip_breaks(w.breaks, x0, x1);
  out.lo = x0;
  out.hi = x1;
  return out;
}

}  // namespace

GraphBuilder::GraphBuilder(WidthFn main_width, double x0, double x1)
    : main_width_(std::move(main_width)), x0_(x0), x1_(x1) {
  if (!(x1 > x0)) throw std::invalid_argument("GraphBuilder: empty window");
}

GraphBuilder& GraphBuilder::cut(double x) {
  if (!(x > x0_ && x < x1_)) throw std::invalid_argument("GraphBuilder: cut outside window");
  cuts_.push_back(x);
  return *this;
}

GraphBuilder& GraphBuilder::wing(double q, double r, WidthFn width, double alpha_tip) {
  if (r == 0.0) throw std::invalid_argument("GraphBuilder: wing needs r != 0");
  if (!(q > x0_ && q < x1_)) throw std::invalid_argument("GraphBuilder: attachment outside window");
  wings_.push_back({q, r, std::move(width), alpha_tip});
  return *this;
}

MetricGraph GraphBuilder::build() {
  MetricGraph g;
  g.spec_ = spec_;

  std::sort(wings_.begin(), wings_.end(),
            [](const WingEntry& a, const WingEntry& b) { return a.q < b.q; });

  // Vertex x-positions on the main line: explicit cuts plus wing attachments.
  struct VertexSeed {
    double x;
    int wing = -1;  // index into wings_, or -1 for a plain jump
  };
  std::vector<VertexSeed> seeds;
  for (double c : cuts_) seeds.push_back({c, -1});
  for (std::size_t i = 0; i < wings_.size(); ++i) seeds.push_back({wings_[i].q, static_cast<int>(i)});
  std::sort(seeds.begin(), seeds.end(), [](const VertexSeed& a, const VertexSeed& b) { return a.x < b.x; });
  for (std::size_t i = 1; i < seeds.size(); ++i)
    if (seeds[i].x == seeds[i - 1].x)
      throw std::invalid_argument("GraphBuilder: coincident vertices on the main line");

  // Main edges between consecutive seeds.
  std::vector<double> bounds{x0_};
  for (const auto& s : seeds) bounds.push_back(s.x);
  bounds.push_back(x1_);
  std::vector<int> main_vertex_ids(seeds.size(), -1);
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    GraphVertex v;
    v.id = static_cast<int>(g.vertices_.size());
    v.x = seeds[i].x;
    v.kind = VertexKind::Interior;
    g.vertices_.push_back(v);
    main_vertex_ids[i] = v.id;
  }
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    GraphEdge e;
    e.id = static_cast<int>(g.edges_.size());
    e.x0 = bounds[i];
    e.x1 = bounds[i + 1];
    e.kind = EdgeKind::Main;
    e.width = clip_width(main_width_, e.x0, e.x1);
    e.v0 = (i == 0) ? -1 : main_vertex_ids[i - 1];
    e.v1 = (i + 1 == bounds.size() - 1) ? -1 : main_vertex_ids[i];
    g.main_ids_.push_back(e.id);
    g.edges_.push_back(std::move(e));
  }

  // Wing edges plus their exterior tip vertices.
  for (std::size_t i = 0; i < wings_.size(); ++i) {
    const WingEntry& w = wings_[i];
    GraphEdge e;
    e.id = static_cast<int>(g.edges_.size());
    e.kind = EdgeKind::Wing;
    e.x0 = std::min(w.q, w.q + w.r);
    e.x1 = std::max(w.q, w.q + w.r);
    e.width = clip_width(w.width, e.x0, e.x1);
    e.wing_index = static_cast<int>(i);

    GraphVertex tip;
    tip.id = static_cast<int>(g.vertices_.size());
    tip.x = w.q + w.r;
    tip.kind = VertexKind::Exterior;
    tip.gluing.push_back({e.id, w.r > 0 ? -1 : +1, w.alpha_tip});

    int attach_id = -1;
    for (std::size_t s = 0; s < seeds.size(); ++s)
      if (seeds[s].wing == static_cast<int>(i)) attach_id = main_vertex_ids[s];
    if (w.r > 0) {
      e.v0 = attach_id;
      e.v1 = tip.id;
    } else {
      e.v0 = tip.id;
      e.v1 = attach_id;
    }
    g.vertices_.push_back(std::move(tip));
    g.edges_.push_back(std::move(e));
  }

  // Gluing terms: one-sided width limits, sign +1 for edges lying rightward.
  for (GraphVertex& v : g.vertices_) {
    if (v.kind == VertexKind::Exterior) continue;
    for (const GraphEdge& e : g.edges_) {
      if (e.v0 == v.id) v.gluing.push_back({e.id, +1, e.width.value(e.x0)});
      if (e.v1 == v.id) v.gluing.push_back({e.id, -1, e.width.left(e.x1)});
    }
  }
  return g;
}

double MetricGraph::x_lo() const { return edge(main_ids_.front()).x0; }
double MetricGraph::x_hi() const { return edge(main_ids_.back()).x1; }

int MetricGraph::main_edge_at(double x) const {
  if (x < x_lo() || x > x_hi()) return -1;
  long lo = 0, hi = static_cast<long>(main_ids_.size()) - 1, found = 0;
  while (lo <= hi) {
    const long mid = (lo + hi) / 2;
    if (edge(main_ids_[static_cast<std::size_t>(mid)]).x0 <= x) {
      found = mid;
      lo = mid + 1;
    } else {
      hi = mid - 1;
    }
  }
  return main_ids_[static_cast<std::size_t>(found)];
}

GraphPoint MetricGraph::locate(double x, double z) const {
  if (!spec_) throw std::runtime_error("locate: graph was not built from a ChannelSpec");
  const ChannelSpec& s = *spec_;
  if (x < s.x_lo() || x > s.x_hi()) throw std::invalid_argument("locate: x outside the domain");

  // Main channel first: attachment mouths tie-break to the main edge.
  if (z >= s.h_minus()(x) && z <= s.h_plus()(x)) return {main_edge_at(x), x};
  if (z >= s.h_minus().left_limit(x) && z <= s.h_plus().left_limit(x)) {
    for (int id : main_ids_)
      if (edge(id).x1 == x) return {id, x};
    return {main_edge_at(x), x};
  }
  const int wi = s.wing_at(x);
  if (wi >= 0) {
    const ZInterval band = s.wing_interval(wi, x);
    if (z >= band.lo && z <= band.hi) {
      for (const GraphEdge& e : edges_)
        if (e.kind == EdgeKind::Wing && e.wing_index == wi) return {e.id, x};
    }
  }
  throw std::invalid_argument("locate: point outside the domain");
}

nlohmann::json MetricGraph::to_json(int width_samples) const {
  nlohmann::json j;
  j["edges"] = nlohmann::json::array();
  for (const GraphEdge& e : edges_) {
    nlohmann::json je;
    je["id"] = e.id;
    je["kind"] = e.kind == EdgeKind::Main ? "main" : "wing";
    je["x0"] = e.x0;
    je["x1"] = e.x1;
    je["v0"] = e.v0;
    je["v1"] = e.v1;
    if (e.wing_index >= 0) je["wing_index"] = e.wing_index;
    nlohmann::json xs = nlohmann::json::array(), ls = nlohmann::json::array();
    for (int i = 0; i < width_samples; ++i) {
      const double x = e.x0 + (e.x1 - e.x0) * i / (width_samples - 1);
      xs.push_back(x);
      ls.push_back(i + 1 == width_samples ? e.width.left(x) : e.width.value(x));
    }
    je["width_x"] = xs;
    je["width_l"] = ls;
    j["edges"].push_back(je);
  }
  j["vertices"] = nlohmann::json::array();
  for (const GraphVertex& v : vertices_) {
    nlohmann::json jv;
    jv["id"] = v.id;
    jv["x"] = v.x;
    jv["kind"] = v.kind == VertexKind::Interior ? "interior" : "exterior";
    jv["reflecting"] = v.reflecting();
    jv["gluing"] = nlohmann::json::array();
    for (const GluingTerm& t : v.gluing)
      jv["gluing"].push_back({{"edge", t.edge}, {"sign", t.sign}, {"alpha", t.alpha}});
    j["vertices"].push_back(jv);
  }
  return j;
}

MetricGraph build_graph(const ChannelSpec& spec) {
  const ValidationReport rep = spec.validate();
  if (!rep.all_pass()) {
    for (const auto& e : rep.entries)
      if (!e.pass) throw std::invalid_argument("build_graph: spec invalid: " + e.check + " (" + e.detail + ")");
  }

  GraphBuilder b(spec.width_fn(), spec.x_lo(), spec.x_hi());
  // One vertex per boundary jump; a jump claimed by a wing attachment becomes
  // that wing's degree-3 vertex, everything else is a plain degree-2 vertex.
  std::vector<double> jump_xs;
  for (const Jump& jp : spec.h_plus().jumps()) jump_xs.push_back(jp.x);
  for (const Jump& jp : spec.h_minus().jumps()) jump_xs.push_back(jp.x);
  std::sort(jump_xs.begin(), jump_xs.end());
  jump_xs.erase(std::unique(jump_xs.begin(), jump_xs.end()), jump_xs.end());

  for (double x : jump_xs) {
    bool is_attachment = false;
    for (const WingSpec& w : spec.wings()) is_attachment |= (w.q == x);
    if (!is_attachment) b.cut(x);
  }
  for (std::size_t i = 0; i < spec.wings().size(); ++i) {
    const WingSpec& w = spec.wings()[i];
    auto wptr = std::make_shared<WingSpec>(w);
    WidthFn wf;
    wf.value = [wptr](double x) { return wptr->width(x); };
    wf.left = wf.value;
    if (w.tip_radius > 0.0) {
      const double cap = w.tip_x() + (w.r > 0 ? -w.tip_radius : w.tip_radius);
      wf.breaks = {cap};
    }
    wf.lo = w.span_lo();
    wf.hi = w.span_hi();
    // With a square tip the one-sided width limit at the tip is the level.
    b.wing(w.q, w.r, std::move(wf), w.tip_radius > 0.0 ? 0.0 : w.level);
  }
  b.spec_ = std::make_shared<ChannelSpec>(spec);
  return b.build();
}

}  // namespace nchan

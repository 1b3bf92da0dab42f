#pragma once

// The metric graph of a channel: the quotient of the 2-D domain identifying
// points within each connected cross-section component. Main edges concatenate
// into a line along the x-axis; wing edges hang off interior vertices. Each
// vertex carries the signed one-sided-width gluing weights that define the
// limiting diffusion.

#include <memory>
#include <tuple>
#include <vector>

#include "narrowchannel/geometry.hpp"
#include "narrowchannel/piecewise.hpp"

#include "json.hpp"

namespace nchan {

enum class EdgeKind { Main, Wing };
enum class VertexKind { Interior, Exterior };

struct GraphPoint {
  int edge = -1;
  double x = 0.0;
};

struct GluingTerm {
  int edge = -1;
  int sign = +1;  // +1 iff the edge's x-values are >= the vertex x
  double alpha = 0.0;
};

struct GraphVertex {
  int id = -1;
  double x = 0.0;
  VertexKind kind = VertexKind::Interior;
  std::vector<GluingTerm> gluing;
  bool reflecting() const { return kind == VertexKind::Exterior; }
};

struct GraphEdge {
  int id = -1;
  double x0 = 0.0, x1 = 0.0;  // x0 < x1
  EdgeKind kind = EdgeKind::Main;
  WidthFn width;              // one-sided-correct at the edge ends
  int v0 = -1, v1 = -1;       // vertex ids at x0 / x1 (-1: open window end)
  int wing_index = -1;        // provenance when built from a ChannelSpec
  double length() const { return x1 - x0; }
  bool contains(double x) const { return x >= x0 && x <= x1; }
};

class MetricGraph {
 public:
  const std::vector<GraphEdge>& edges() const { return edges_; }
  const std::vector<GraphVertex>& vertices() const { return vertices_; }
  const GraphEdge& edge(int id) const { return edges_.at(static_cast<std::size_t>(id)); }
  const GraphVertex& vertex(int id) const { return vertices_.at(static_cast<std::size_t>(id)); }
  const GraphVertex& gluing_weights(int vertex_id) const { return vertex(vertex_id); }

  double x_lo() const;
  double x_hi() const;
  int main_edge_at(double x) const;  // -1 if outside the window

  // Identification map; needs a spec-backed graph. Throws std::runtime_error
  // for graphs assembled directly and std::invalid_argument for points
  // outside the domain. Mouth points at an attachment map to the main edge.
  GraphPoint locate(double x, double z) const;
  bool has_spec() const { return spec_ != nullptr; }
  const ChannelSpec& spec() const { return *spec_; }

  nlohmann::json to_json(int width_samples = 17) const;

 private:
  friend class GraphBuilder;
  std::vector<GraphEdge> edges_;
  std::vector<GraphVertex> vertices_;
  std::vector<int> main_ids_;  // main edges ordered by x0
  std::shared_ptr<const ChannelSpec> spec_;
};

// Assembles a graph directly (tests, closed-form configurations).
class GraphBuilder {
 public:
  GraphBuilder(WidthFn main_width, double x0, double x1);
  GraphBuilder& cut(double x);  // plain-jump vertex; weights are one-sided widths
  GraphBuilder& wing(double q, double r, WidthFn width, double alpha_tip = 0.0);
  MetricGraph build();

 private:
  WidthFn main_width_;
  double x0_, x1_;
  std::vector<double> cuts_;
  struct WingEntry {
    double q, r;
    WidthFn width;
    double alpha_tip;
  };
  std::vector<WingEntry> wings_;
  std::shared_ptr<const ChannelSpec> spec_;
  friend MetricGraph build_graph(const ChannelSpec&);
};

// Graph of a channel spec: main edges split at every boundary jump, one wing
// edge per pocket. Throws std::invalid_argument if the spec fails validation.
MetricGraph build_graph(const ChannelSpec& spec);

}  // namespace nchan

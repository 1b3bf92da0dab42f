#pragma once

// One fixed channel shape: a tubular main channel bounded by h_plus/h_minus
// (piecewise smooth with isolated jumps) plus side pockets ("wings") attached
// at boundary jumps. Wings occupy a band vacated by a transversal shift of the
// channel, so every cross-section is one or two disjoint intervals.

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "narrowchannel/piecewise.hpp"

#include "json.hpp"

namespace nchan {

struct Vec2 {
  double x = 0.0, z = 0.0;
};

enum class Side { Above, Below };

struct WingSpec {
  double q = 0.0;          // attachment x
  double r = 0.0;          // signed extent; span is [min(q,q+r), max(q,q+r)]
  Side side = Side::Above;
  double level = 0.0;      // nominal pocket width
  double tip_radius = 0.0; // elliptical tip cap length (0 = square tip)
  double pitch = 0.05;     // clearance slope between pocket and channel

  double span_lo() const { return std::min(q, q + r); }
  double span_hi() const { return std::max(q, q + r); }
  double tip_x() const { return q + r; }
  bool spans(double x) const { return x >= span_lo() && x <= span_hi(); }

  // Pocket width profile: `level` away from the tip, elliptical cap within
  // tip_radius of it, exactly 0 at the tip and outside the span.
  double width(double x) const;
  double width_derivative(double x) const;  // one-sided at the cap junction
};

struct ZInterval {
  double lo = 0.0, hi = 0.0;
  double length() const { return hi - lo; }
};

struct ArcId {
  enum Kind { MainUpper, MainLower, WingFloor, WingCeiling, WingTip, JumpWall };
  Kind kind = MainUpper;
  int index = -1;  // wing index or jump index where applicable
};

struct ValidationEntry {
  std::string check;
  bool pass = true;
  std::string detail;
  std::optional<double> x;
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;
  bool all_pass() const {
    for (const auto& e : entries)
      if (!e.pass) return false;
    return true;
  }
};

class ChannelSpec {
 public:
  ChannelSpec() = default;
  // Throws std::invalid_argument on structurally broken input (unsorted wings,
  // wing span outside x_range, tip cap longer than the span).
  ChannelSpec(Piecewise h_plus, Piecewise h_minus, std::vector<WingSpec> wings, double l_min,
              double l_max);

  double x_lo() const { return h_plus_.lo(); }
  double x_hi() const { return h_plus_.hi(); }
  double l_min() const { return l_min_; }
  double l_max() const { return l_max_; }
  const Piecewise& h_plus() const { return h_plus_; }
  const Piecewise& h_minus() const { return h_minus_; }
  const std::vector<WingSpec>& wings() const { return wings_; }

  // Main-channel width, right-continuous; width_limits gives (left, right).
  double width(double x) const;
  std::pair<double, double> width_limits(double x) const;
  WidthFn width_fn() const;  // the l0 view consumed by quadrature/solvers

  // Cross-section as 1 or 2 disjoint closed intervals, main component first.
  // Throws std::out_of_range outside x_range.
  std::vector<ZInterval> cross_section(double x) const;

  // Wing z-band at x (span-side limits of h at the attachment point).
  ZInterval wing_interval(int wing_index, double x) const;
  int wing_at(double x) const;  // index of the wing whose span covers x, or -1

  bool inside(double x, double z) const;

  // Inward unit normal of the named boundary arc at p; throws
  // std::invalid_argument if p is not on that arc within tol.
  Vec2 boundary_normal(Vec2 p, const ArcId& arc, double tol = 1e-9) const;

  ValidationReport validate(int probes_per_unit = 128) const;

  nlohmann::json to_json() const;
  static ChannelSpec from_json(const nlohmann::json& j);

 private:
  Piecewise h_plus_, h_minus_;
  std::vector<WingSpec> wings_;  // sorted by span_lo, non-overlapping spans
  double l_min_ = 0.0, l_max_ = 0.0;
};

ChannelSpec constant_channel(double width, double x0, double x1);

// Builds h_plus/h_minus for a channel of width `l0` centered on z=0 whose
// centerline shifts transversally at each wing attachment by the attachment
// width (the vacated band hosts the pocket). `l0` must be continuous at the
// attachment points.
ChannelSpec channel_with_wings(const Piecewise& l0, std::vector<WingSpec> wings, double l_min,
                               double l_max);

const char* to_string(Side s);
const char* to_string(ArcId::Kind k);

}  // namespace nchan

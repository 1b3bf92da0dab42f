#include "narrowchannel/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nchan {

namespace {
constexpr double kTol = 1e-9;

double sgn(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }
}  // namespace

const char* to_string(Side s) { return s == Side::Above ? "above" : "below"; }

const char* to_string(ArcId::Kind k) {
  switch (k) {
    case ArcId::MainUpper: return "main_upper";
    case ArcId::MainLower: return "main_lower";
    case ArcId::WingFloor: return "wing_floor";
    case ArcId::WingCeiling: return "wing_ceiling";
    case ArcId::WingTip: return "wing_tip";
    case ArcId::JumpWall: return "jump_wall";
  }
  return "?";
}

double WingSpec::width(double x) const {
  if (!spans(x)) return 0.0;
  const double s = std::abs(x - tip_x());  // distance from the tip
  if (s == 0.0) return 0.0;
  if (tip_radius > 0.0 && s < tip_radius) {
    const double u = (tip_radius - s) / tip_radius;
    return level * std::sqrt(1.0 - u * u);
  }
  return level;
}

double WingSpec::width_derivative(double x) const {
  if (!spans(x)) return 0.0;
  const double s = std::abs(x - tip_x());
  if (s == 0.0 || tip_radius <= 0.0 || s >= tip_radius) return 0.0;
  const double dw_ds = level * (tip_radius - s) / (tip_radius * std::sqrt(s * (2.0 * tip_radius - s)));
  return (r > 0 ? -1.0 : 1.0) * dw_ds;  // s decreases toward the tip for r > 0
}

ChannelSpec::ChannelSpec(Piecewise h_plus, Piecewise h_minus, std::vector<WingSpec> wings,
                         double l_min, double l_max)
    : h_plus_(std::move(h_plus)), h_minus_(std::move(h_minus)), wings_(std::move(wings)),
      l_min_(l_min), l_max_(l_max) {
  if (h_plus_.lo() != h_minus_.lo() || h_plus_.hi() != h_minus_.hi())
    throw std::invalid_argument("ChannelSpec: h_plus/h_minus ranges differ");
  if (!(l_min_ > 0.0) || !(l_max_ >= l_min_))
    throw std::invalid_argument("ChannelSpec: need 0 < l_min <= l_max");
  std::sort(wings_.begin(), wings_.end(),
            [](const WingSpec& a, const WingSpec& b) { return a.span_lo() < b.span_lo(); });
  for (std::size_t i = 0; i < wings_.size(); ++i) {
    const WingSpec& w = wings_[i];
    if (w.r == 0.0 || !(w.level > 0.0))
      throw std::invalid_argument("ChannelSpec: wing needs r != 0 and level > 0");
    if (!(w.tip_radius >= 0.0) || w.tip_radius >= std::abs(w.r))
      throw std::invalid_argument("ChannelSpec: tip_radius must lie in [0, |r|)");
    if (w.pitch < 0.0) throw std::invalid_argument("ChannelSpec: negative pitch");
    if (w.span_lo() < x_lo() || w.span_hi() > x_hi())
      throw std::invalid_argument("ChannelSpec: wing span outside x_range");
    if (i > 0 && w.span_lo() < wings_[i - 1].span_hi() - 1e-12)
      throw std::invalid_argument("ChannelSpec: overlapping wing spans");
  }
}

double ChannelSpec::width(double x) const { return h_plus_(x) - h_minus_(x); }

std::pair<double, double> ChannelSpec::width_limits(double x) const {
  return {h_plus_.left_limit(x) - h_minus_.left_limit(x), h_plus_(x) - h_minus_(x)};
}

WidthFn ChannelSpec::width_fn() const {
  auto hp = std::make_shared<Piecewise>(h_plus_);
  auto hm = std::make_shared<Piecewise>(h_minus_);
  WidthFn w;
  w.value = [hp, hm](double x) { return (*hp)(x) - (*hm)(x); };
  w.left = [hp, hm](double x) { return hp->left_limit(x) - hm->left_limit(x); };
  w.breaks = hp->breakpoints();
  w.breaks.insert(w.breaks.end(), hm->breakpoints().begin(), hm->breakpoints().end());
  std::sort(w.breaks.begin(), w.breaks.end());
  w.breaks.erase(std::unique(w.breaks.begin(), w.breaks.end()), w.breaks.end());
  w.lo = x_lo();
  w.hi = x_hi();
  return w;
}

int ChannelSpec::wing_at(double x) const {
  // Wings are sorted by span_lo with non-overlapping spans. At a tip/attachment
  // tangency the later wing (positive width) wins.
  long lo = 0, hi = static_cast<long>(wings_.size()) - 1, found = -1;
  while (lo <= hi) {
    const long mid = (lo + hi) / 2;
    if (wings_[static_cast<std::size_t>(mid)].span_lo() <= x) {
      found = mid;
      lo = mid + 1;
    } else {
      hi = mid - 1;
    }
  }
  if (found >= 0 && wings_[static_cast<std::size_t>(found)].spans(x)) return static_cast<int>(found);
  if (found > 0 && wings_[static_cast<std::size_t>(found - 1)].spans(x))
    return static_cast<int>(found - 1);
  return -1;
}

ZInterval ChannelSpec::wing_interval(int wing_index, double x) const {
  const WingSpec& w = wings_.at(static_cast<std::size_t>(wing_index));
  const double prof = w.width(x);
  const double clearance = w.pitch * std::abs(x - w.q);
  // Base boundary value on the span side of the attachment.
  if (w.side == Side::Above) {
    const double base = (x == w.q && w.r < 0) ? h_plus_.left_limit(x) : h_plus_(x);
    return {base + clearance, base + clearance + prof};
  }
  const double base = (x == w.q && w.r < 0) ? h_minus_.left_limit(x) : h_minus_(x);
  return {base - clearance - prof, base - clearance};
}

std::vector<ZInterval> ChannelSpec::cross_section(double x) const {
  if (x < x_lo() || x > x_hi()) throw std::out_of_range("cross_section: x outside x_range");
  std::vector<ZInterval> out;
  out.push_back({h_minus_(x), h_plus_(x)});
  const int wi = wing_at(x);
  if (wi >= 0 && wings_[static_cast<std::size_t>(wi)].width(x) > 0.0)
    out.push_back(wing_interval(wi, x));
  return out;
}

bool ChannelSpec::inside(double x, double z) const {
  if (x < x_lo() || x > x_hi()) return false;
  if (z >= h_minus_(x) && z <= h_plus_(x)) return true;
  if (z >= h_minus_.left_limit(x) && z <= h_plus_.left_limit(x)) return true;
  const int wi = wing_at(x);
  if (wi >= 0) {
    const ZInterval band = wing_interval(wi, x);
    if (z >= band.lo && z <= band.hi) return true;
  }
  return false;
}

Vec2 ChannelSpec::boundary_normal(Vec2 p, const ArcId& arc, double tol) const {
  const double x = p.x, z = p.z;
  const double nudge = 1e-9 * std::max(1.0, std::abs(x));
  auto unit = [](double nx, double nz) {
    const double n = std::hypot(nx, nz);
    return Vec2{nx / n, nz / n};
  };
  switch (arc.kind) {
    case ArcId::MainUpper: {
      double hx = h_plus_(x), slope = h_plus_.derivative(x);
      if (std::abs(z - hx) > tol) {
        hx = h_plus_.left_limit(x);
        slope = h_plus_.derivative(x - nudge);
        if (std::abs(z - hx) > tol)
          throw std::invalid_argument("boundary_normal: point not on main upper arc");
      }
      return unit(slope, -1.0);
    }
    case ArcId::MainLower: {
      double hx = h_minus_(x), slope = h_minus_.derivative(x);
      if (std::abs(z - hx) > tol) {
        hx = h_minus_.left_limit(x);
        slope = h_minus_.derivative(x - nudge);
        if (std::abs(z - hx) > tol)
          throw std::invalid_argument("boundary_normal: point not on main lower arc");
      }
      return unit(-slope, 1.0);
    }
    case ArcId::WingFloor:
    case ArcId::WingCeiling: {
      const WingSpec& w = wings_.at(static_cast<std::size_t>(arc.index));
      if (!w.spans(x)) throw std::invalid_argument("boundary_normal: x outside wing span");
      const ZInterval band = wing_interval(arc.index, x);
      const double base_slope = (w.side == Side::Above ? h_plus_ : h_minus_).derivative(x);
      const double clear_slope = w.pitch * sgn(x - w.q);
      const bool floor_arc = arc.kind == ArcId::WingFloor;
      if (w.side == Side::Above) {
        if (floor_arc) {  // pocket above this arc
          if (std::abs(z - band.lo) > tol)
            throw std::invalid_argument("boundary_normal: point not on wing floor");
          return unit(-(base_slope + clear_slope), 1.0);
        }
        if (std::abs(z - band.hi) > tol)
          throw std::invalid_argument("boundary_normal: point not on wing ceiling");
        return unit(base_slope + clear_slope + w.width_derivative(x), -1.0);
      }
      if (floor_arc) {  // Below side: the arc nearer the channel; pocket below it
        if (std::abs(z - band.hi) > tol)
          throw std::invalid_argument("boundary_normal: point not on wing floor");
        return unit(base_slope - clear_slope, -1.0);
      }
      if (std::abs(z - band.lo) > tol)
        throw std::invalid_argument("boundary_normal: point not on wing ceiling");
      return unit(-(base_slope - clear_slope - w.width_derivative(x)), 1.0);
    }
    case ArcId::WingTip: {
      const WingSpec& w = wings_.at(static_cast<std::size_t>(arc.index));
      if (std::abs(x - w.tip_x()) > tol)
        throw std::invalid_argument("boundary_normal: point not at wing tip");
      return {w.r > 0 ? -1.0 : 1.0, 0.0};  // back toward the attachment
    }
    case ArcId::JumpWall: {
      // Upper wall: inward x-direction follows the sign of the h_plus jump;
      // lower wall: the opposite of the h_minus jump.
      for (const Piecewise* h : {&h_plus_, &h_minus_}) {
        for (const Jump& jp : h->jumps()) {
          if (std::abs(jp.x - x) > tol) continue;
          const double zlo = std::min(jp.left, jp.right), zhi = std::max(jp.left, jp.right);
          if (z < zlo - tol || z > zhi + tol) continue;
          const double jump = jp.right - jp.left;
          return {h == &h_plus_ ? sgn(jump) : -sgn(jump), 0.0};
        }
      }
      throw std::invalid_argument("boundary_normal: point not on a jump wall");
    }
  }
  throw std::invalid_argument("boundary_normal: unknown arc");
}

ValidationReport ChannelSpec::validate(int probes_per_unit) const {
  ValidationReport rep;
  const double span = x_hi() - x_lo();
  const int n = std::max(16, static_cast<int>(span * probes_per_unit));

  {  // Assumption 2 surrogate: width bounds, one-sided values included.
    ValidationEntry e{"width-bounds (l_min <= l0 <= l_max)", true, "", {}};
    auto check = [&](double x, double v) {
      if (v < l_min_ - kTol || v > l_max_ + kTol) {
        e.pass = false;
        e.x = x;
        e.detail = "l0=" + std::to_string(v);
      }
    };
    for (int i = 0; i <= n && e.pass; ++i) {
      const double x = x_lo() + span * i / n;
      check(x, width(x));
    }
    for (const Jump& jp : h_plus_.jumps()) {
      auto [wl, wr] = width_limits(jp.x);
      check(jp.x, wl);
      check(jp.x, wr);
    }
    for (const Jump& jp : h_minus_.jumps()) {
      auto [wl, wr] = width_limits(jp.x);
      check(jp.x, wl);
      check(jp.x, wr);
    }
    rep.entries.push_back(std::move(e));
  }

  {  // Assumption 1 surrogate: boundary jumps are isolated. Pocket tips are
     // width-zero feature points and may touch a neighbouring attachment.
    ValidationEntry e{"isolated-boundary-jumps", true, "", {}};
    std::vector<double> pts;
    for (const Jump& jp : h_plus_.jumps()) pts.push_back(jp.x);
    for (const Jump& jp : h_minus_.jumps()) pts.push_back(jp.x);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    for (std::size_t i = 1; i < pts.size(); ++i) {
      if (pts[i] - pts[i - 1] < 1e-9) {
        e.pass = false;
        e.x = pts[i];
        e.detail = "jump locations accumulate";
        break;
      }
    }
    rep.entries.push_back(std::move(e));
  }

  {  // Assumption 2: at most two cross-section components.
    ValidationEntry e{"cross-section-components (1 or 2)", true, "", {}};
    for (std::size_t i = 1; i < wings_.size(); ++i) {
      if (wings_[i].span_lo() < wings_[i - 1].span_hi() - 1e-12) {
        e.pass = false;
        e.x = wings_[i].span_lo();
        e.detail = "overlapping wing spans give a 3-component cross-section";
      }
    }
    rep.entries.push_back(std::move(e));
  }

  {  // Attachment consistency: the boundary jump at q equals the mouth width.
    ValidationEntry e{"wing-attachment-consistency", true, "", {}};
    for (const auto& w : wings_) {
      const Piecewise& h = (w.side == Side::Above) ? h_plus_ : h_minus_;
      const double jump = h(w.q) - h.left_limit(w.q);
      const double expected = (w.side == Side::Above ? -1.0 : 1.0) * sgn(w.r) * w.level;
      if (std::abs(jump - expected) > kTol) {
        e.pass = false;
        e.x = w.q;
        e.detail = "boundary jump " + std::to_string(jump) + " != " + std::to_string(expected);
        break;
      }
    }
    rep.entries.push_back(std::move(e));
  }

  {  // Pocket bands stay clear of the main channel away from the attachment.
    ValidationEntry e{"wing-band-disjoint-from-channel", true, "", {}};
    for (std::size_t wi = 0; wi < wings_.size() && e.pass; ++wi) {
      const WingSpec& w = wings_[wi];
      const int m = std::max(8, static_cast<int>(std::abs(w.r) * probes_per_unit));
      for (int i = 1; i < m; ++i) {
        const double x = w.span_lo() + (w.span_hi() - w.span_lo()) * i / m;
        if (x == w.q) continue;
        const ZInterval band = wing_interval(static_cast<int>(wi), x);
        const double gap = (w.side == Side::Above) ? band.lo - h_plus_(x) : h_minus_(x) - band.hi;
        if (gap <= 0.0) {
          e.pass = false;
          e.x = x;
          e.detail = "pocket touches the channel inside the span";
          break;
        }
      }
    }
    rep.entries.push_back(std::move(e));
  }

  return rep;
}

namespace {

nlohmann::json piecewise_to_json(const Piecewise& f) {
  nlohmann::json j;
  j["interp"] = f.interp() == Interp::Steps ? "steps" : "pchip";
  j["knots"] = f.knots();
  j["values"] = f.values();
  if (f.interp() == Interp::Pchip) {
    nlohmann::json js = nlohmann::json::array();
    for (const Jump& jp : f.jumps()) js.push_back({{"x", jp.x}, {"left", jp.left}, {"right", jp.right}});
    j["jumps"] = js;
  }
  return j;
}

Piecewise piecewise_from_json(const nlohmann::json& j) {
  const std::string interp = j.at("interp").get<std::string>();
  std::vector<double> knots = j.at("knots").get<std::vector<double>>();
  std::vector<double> values = j.at("values").get<std::vector<double>>();
  if (interp == "steps") return Piecewise::tabulated(knots, values, {}, Interp::Steps);
  std::vector<Jump> jumps;
  if (j.contains("jumps"))
    for (const auto& e : j.at("jumps"))
      jumps.push_back({e.at("x").get<double>(), e.at("left").get<double>(), e.at("right").get<double>()});
  return Piecewise::tabulated(std::move(knots), std::move(values), std::move(jumps));
}

}  // namespace

nlohmann::json ChannelSpec::to_json() const {
  nlohmann::json j;
  j["x_range"] = {x_lo(), x_hi()};
  j["l_min"] = l_min_;
  j["l_max"] = l_max_;
  j["h_plus"] = piecewise_to_json(h_plus_);
  j["h_minus"] = piecewise_to_json(h_minus_);
  nlohmann::json ws = nlohmann::json::array();
  for (const WingSpec& w : wings_)
    ws.push_back({{"q", w.q},
                  {"r", w.r},
                  {"side", to_string(w.side)},
                  {"level", w.level},
                  {"tip_radius", w.tip_radius},
                  {"pitch", w.pitch}});
  j["wings"] = ws;
  return j;
}

ChannelSpec ChannelSpec::from_json(const nlohmann::json& j) {
  std::vector<WingSpec> wings;
  for (const auto& e : j.at("wings")) {
    WingSpec w;
    w.q = e.at("q").get<double>();
    w.r = e.at("r").get<double>();
    w.side = e.at("side").get<std::string>() == "below" ? Side::Below : Side::Above;
    w.level = e.at("level").get<double>();
    w.tip_radius = e.at("tip_radius").get<double>();
    w.pitch = e.at("pitch").get<double>();
    wings.push_back(w);
  }
  return ChannelSpec(piecewise_from_json(j.at("h_plus")), piecewise_from_json(j.at("h_minus")),
                     std::move(wings), j.at("l_min").get<double>(), j.at("l_max").get<double>());
}

ChannelSpec constant_channel(double width, double x0, double x1) {
  return ChannelSpec(Piecewise::constant(width / 2.0, x0, x1),
                     Piecewise::constant(-width / 2.0, x0, x1), {}, width, width);
}

ChannelSpec channel_with_wings(const Piecewise& l0, std::vector<WingSpec> wings, double l_min,
                               double l_max) {
  std::sort(wings.begin(), wings.end(),
            [](const WingSpec& a, const WingSpec& b) { return a.q < b.q; });
  // Transversal shift of the centerline, accumulated left to right; jumps at
  // attachments vacate exactly the band each pocket occupies.
  std::vector<double> qs, deltas;
  for (const WingSpec& w : wings) {
    auto [wl, wr] = std::pair<double, double>{l0.left_limit(w.q), l0(w.q)};
    if (std::abs(wl - wr) > 1e-12)
      throw std::invalid_argument("channel_with_wings: l0 must be continuous at attachments");
    const double d = (w.side == Side::Above ? -1.0 : 1.0) * sgn(w.r) * w.level;
    if (!qs.empty() && w.q <= qs.back())
      throw std::invalid_argument("channel_with_wings: duplicate attachment x");
    qs.push_back(w.q);
    deltas.push_back(d);
  }
  auto center = [&](double x, bool left_side) {
    double c = 0.0;
    for (std::size_t i = 0; i < qs.size(); ++i)
      if (qs[i] < x || (!left_side && qs[i] == x)) c += deltas[i];
    return c;
  };

  auto build = [&](double half_sign) {
    if (l0.interp() == Interp::Steps) {
      // Cells split at both width steps and attachments; exact representation.
      std::vector<double> bounds = l0.knots();
      for (double q : qs) bounds.push_back(q);
      std::sort(bounds.begin(), bounds.end());
      bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
      std::vector<double> vals;
      for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
        const double mid = 0.5 * (bounds[i] + bounds[i + 1]);
        vals.push_back(center(mid, false) + half_sign * 0.5 * l0(mid));
      }
      return Piecewise::tabulated(bounds, vals, {}, Interp::Steps);
    }
    std::vector<double> knots = l0.knots();
    for (double q : qs) knots.push_back(q);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    std::vector<double> vals;
    for (double k : knots) vals.push_back(center(k, false) + half_sign * 0.5 * l0(k));
    std::vector<Jump> jumps;
    for (const Jump& jp : l0.jumps())
      jumps.push_back({jp.x, center(jp.x, true) + half_sign * 0.5 * jp.left,
                       center(jp.x, false) + half_sign * 0.5 * jp.right});
    for (std::size_t i = 0; i < qs.size(); ++i) {
      const double w = l0(qs[i]);
      jumps.push_back({qs[i], center(qs[i], true) + half_sign * 0.5 * w,
                       center(qs[i], false) + half_sign * 0.5 * w});
    }
    return Piecewise::tabulated(std::move(knots), std::move(vals), std::move(jumps));
  };

  return ChannelSpec(build(+1.0), build(-1.0), std::move(wings), l_min, l_max);
}

}  // namespace nchan

#include <cmath>

#include "doctest.h"

#include "narrowchannel/geometry.hpp"
#include "narrowchannel/rng.hpp"

using namespace nchan;

namespace {

WingSpec wing(double q, double r, double level, Side side = Side::Above, double tip_radius = 0.0) {
  WingSpec w;
  w.q = q;
  w.r = r;
  w.side = side;
  w.level = level;
  w.tip_radius = tip_radius;
  w.pitch = 0.05;
  return w;
}

ChannelSpec one_wing_channel(double q = 2.0, double r = 1.0, double level = 0.5) {
  return channel_with_wings(Piecewise::constant(1.0, -10.0, 10.0), {wing(q, r, level)}, 0.5, 2.0);
}

}  // namespace

TEST_CASE("wingless cross-section is a single interval of the right width") {
  ChannelSpec spec = constant_channel(1.0, -5.0, 5.0);
  for (double x : {-4.9, -1.0, 0.0, 3.3}) {
    auto cs = spec.cross_section(x);
    REQUIRE(cs.size() == 1);
    CHECK(cs[0].length() == doctest::Approx(1.0));
    CHECK(spec.width(x) == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(spec.cross_section(11.0), std::out_of_range);
}

TEST_CASE("wing span produces two disjoint intervals; tip interval is omitted") {
  ChannelSpec spec = one_wing_channel(2.0, 1.0, 0.5);
  auto cs = spec.cross_section(2.5);
  REQUIRE(cs.size() == 2);
  CHECK(cs[0].hi < cs[1].lo);  // pocket floats above the channel
  CHECK(cs[1].length() == doctest::Approx(0.5));

  auto tip = spec.cross_section(3.0);
  CHECK(tip.size() == 1);

  auto before = spec.cross_section(1.5);
  CHECK(before.size() == 1);
}

TEST_CASE("attachment jump magnitude equals the mouth width and l0 stays continuous") {
  ChannelSpec spec = one_wing_channel(2.0, 1.0, 0.5);
  const auto [wl, wr] = spec.width_limits(2.0);
  CHECK(wl == doctest::Approx(1.0));
  CHECK(wr == doctest::Approx(1.0));
  const double jump = spec.h_plus()(2.0) - spec.h_plus().left_limit(2.0);
  CHECK(std::abs(jump) == doctest::Approx(0.5));
  // The pocket mouth continues the tall side of the channel.
  const auto cs_left = spec.cross_section(2.0 - 1e-9);
  const auto cs_at = spec.cross_section(2.0);
  REQUIRE(cs_at.size() == 2);
  CHECK(cs_left[0].hi == doctest::Approx(cs_at[1].hi).epsilon(1e-6));
}

TEST_CASE("width with one-sided values at a plain jump") {
  Piecewise l0 = Piecewise::tabulated({-5, 0, 5}, {1.0, 2.0}, {}, Interp::Steps);
  ChannelSpec spec = channel_with_wings(l0, {}, 0.5, 2.5);
  const auto [wl, wr] = spec.width_limits(0.0);
  CHECK(wl == doctest::Approx(1.0));
  CHECK(wr == doctest::Approx(2.0));
}

TEST_CASE("smooth width evaluates pointwise") {
  std::vector<double> knots, vals;
  for (double x = -1.0; x <= 7.0 + 1e-9; x += 1.0 / 64) {
    knots.push_back(x);
    vals.push_back(1.0 + 0.5 * std::sin(x));
  }
  ChannelSpec spec = channel_with_wings(Piecewise::tabulated(knots, vals), {}, 0.4, 1.6);
  CHECK(spec.width(M_PI / 2) == doctest::Approx(1.5).epsilon(1e-4));
}

TEST_CASE("boundary normals: flat, sloped, unit norm, inward") {
  ChannelSpec flat = constant_channel(1.0, -5.0, 5.0);
  Vec2 nu = flat.boundary_normal({0.0, 0.5}, {ArcId::MainUpper, -1});
  CHECK(nu.x == doctest::Approx(0.0));
  CHECK(nu.z == doctest::Approx(-1.0));
  Vec2 nl = flat.boundary_normal({0.0, -0.5}, {ArcId::MainLower, -1});
  CHECK(nl.z == doctest::Approx(1.0));

  // Upper boundary with slope s: inward normal (s, -1)/sqrt(1+s^2).
  std::vector<double> knots, vals;
  for (double x = 0.0; x <= 4.0 + 1e-9; x += 1.0 / 64) {
    knots.push_back(x);
    vals.push_back(1.0 + 0.2 * x);  // width grows linearly: h+ slope = 0.1
  }
  ChannelSpec sloped = channel_with_wings(Piecewise::tabulated(knots, vals), {}, 0.9, 2.0);
  const double x0 = 2.0, s = 0.1;
  Vec2 ns = sloped.boundary_normal({x0, sloped.h_plus()(x0)}, {ArcId::MainUpper, -1});
  CHECK(ns.x == doctest::Approx(s / std::sqrt(1 + s * s)).epsilon(1e-4));
  CHECK(ns.z == doctest::Approx(-1.0 / std::sqrt(1 + s * s)).epsilon(1e-4));
  CHECK(std::hypot(ns.x, ns.z) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(flat.boundary_normal({0.0, 0.3}, {ArcId::MainUpper, -1}), std::invalid_argument);
}

TEST_CASE("wing arc normals are unit and point into the pocket") {
  ChannelSpec spec = one_wing_channel(2.0, 1.0, 0.5);
  const double x = 2.4;
  const ZInterval band = spec.wing_interval(0, x);
  Vec2 nf = spec.boundary_normal({x, band.lo}, {ArcId::WingFloor, 0});
  CHECK(std::hypot(nf.x, nf.z) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(nf.z > 0.9);  // pocket lies above its floor
  Vec2 nc = spec.boundary_normal({x, band.hi}, {ArcId::WingCeiling, 0});
  CHECK(nc.z < -0.9);
}

TEST_CASE("probed cross-sections stay disjoint and match width_l0") {
  ChannelSpec spec = channel_with_wings(
      Piecewise::constant(1.0, -10.0, 10.0),
      {wing(-2.0, -0.8, 0.6, Side::Below), wing(2.0, 1.0, 0.5), wing(5.0, 0.7, 0.3, Side::Above, 0.1)},
      0.5, 2.0);
  rng::Stream s(3);
  for (int i = 0; i < 2000; ++i) {
    const double x = s.uniform(-10.0, 10.0);
    const auto cs = spec.cross_section(x);
    CHECK(cs[0].length() == doctest::Approx(spec.width(x)).epsilon(1e-9));
    if (cs.size() == 2) {
      const bool disjoint = cs[0].hi < cs[1].lo || cs[1].hi < cs[0].lo;
      CHECK(disjoint);
    }
  }
}

TEST_CASE("validation passes on good specs and localizes failures") {
  CHECK(constant_channel(1.0, -5.0, 5.0).validate().all_pass());
  CHECK(one_wing_channel().validate().all_pass());

  // Overlapping wings: construct via the raw constructor guard.
  CHECK_THROWS_AS(channel_with_wings(Piecewise::constant(1.0, -5.0, 5.0),
                                     {wing(0.0, 1.0, 0.5), wing(0.5, 1.0, 0.5)}, 0.5, 2.0),
                  std::invalid_argument);

  // Width dipping below the declared bound is a report entry, not a throw.
  std::vector<double> knots{-5, 0, 5}, vals{1.0, 0.4, 1.0};
  ChannelSpec thin = channel_with_wings(Piecewise::tabulated(knots, vals), {}, 0.5, 2.0);
  const ValidationReport rep = thin.validate();
  CHECK(!rep.all_pass());
  bool found = false;
  for (const auto& e : rep.entries)
    if (!e.pass && e.x) found = true;
  CHECK(found);
}

TEST_CASE("channel JSON round-trips bit-exactly") {
  ChannelSpec spec = channel_with_wings(
      Piecewise::tabulated({-5, -1.0, 5}, {1.0, 1.3, 0.9}), {wing(2.0, -0.7, 0.44)}, 0.5, 2.0);
  const std::string dumped = spec.to_json().dump();
  ChannelSpec back = ChannelSpec::from_json(nlohmann::json::parse(dumped));
  CHECK(back.to_json().dump() == dumped);
  for (double x : {-4.2, -1.0, 0.5, 2.0, 4.9}) CHECK(back.width(x) == spec.width(x));
}

TEST_CASE("inside matches cross sections including the mouth band") {
  ChannelSpec spec = one_wing_channel(2.0, 1.0, 0.5);
  CHECK(spec.inside(0.0, 0.0));
  CHECK(!spec.inside(0.0, 0.8));
  const ZInterval band = spec.wing_interval(0, 2.3);
  CHECK(spec.inside(2.3, 0.5 * (band.lo + band.hi)));
  // Between channel top and pocket floor lies a gap.
  CHECK(!spec.inside(2.3, band.lo - 1e-4));
}

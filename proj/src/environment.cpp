#include "narrowchannel/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "narrowchannel/quadrature.hpp"

namespace nchan {

double ValueLaw::sample(rng::Stream& s) const {
  switch (kind) {
    case Kind::Point: return a;
    case Kind::TwoPoint: return s.uniform() < p ? b : a;
    case Kind::Uniform: return s.uniform(a, b);
  }
  return a;
}

double ValueLaw::min() const { return kind == Kind::Point ? a : std::min(a, b); }
double ValueLaw::max() const { return kind == Kind::Point ? a : std::max(a, b); }

nlohmann::json ValueLaw::to_json() const {
  const char* k = kind == Kind::Point ? "point" : (kind == Kind::TwoPoint ? "two_point" : "uniform");
  return {{"kind", k}, {"a", a}, {"b", b}, {"p", p}};
}

ValueLaw ValueLaw::from_json(const nlohmann::json& j) {
  ValueLaw law;
  const std::string k = j.at("kind").get<std::string>();
  law.kind = k == "point" ? Kind::Point : (k == "two_point" ? Kind::TwoPoint : Kind::Uniform);
  law.a = j.at("a").get<double>();
  law.b = j.at("b").get<double>();
  law.p = j.value("p", 0.5);
  return law;
}

nlohmann::json WingLaw::to_json() const {
  return {{"level_law", level_law.to_json()}, {"r_abs_law", r_abs_law.to_json()},
          {"p_r_positive", p_r_positive},     {"p_above", p_above},
          {"offset_frac", offset_frac},       {"tip_radius", tip_radius},
          {"pitch", pitch}};
}

WingLaw WingLaw::from_json(const nlohmann::json& j) {
  WingLaw w;
  w.level_law = ValueLaw::from_json(j.at("level_law"));
  w.r_abs_law = ValueLaw::from_json(j.at("r_abs_law"));
  w.p_r_positive = j.at("p_r_positive").get<double>();
  w.p_above = j.at("p_above").get<double>();
  w.offset_frac = j.at("offset_frac").get<double>();
  w.tip_radius = j.at("tip_radius").get<double>();
  w.pitch = j.at("pitch").get<double>();
  return w;
}

void EnvironmentParams::validate() const {
  if (!(block_length > 0.0)) throw std::invalid_argument("env: block_length must be positive");
  if (!(l_min > 0.0) || !(l_min < l_max))
    throw std::invalid_argument("env: need 0 < l_min < l_max");
  if (width_law.min() < l_min || width_law.max() > l_max)
    throw std::invalid_argument("env: width_law escapes [l_min, l_max]");
  if (wing_prob < 0.0 || wing_prob > 1.0) throw std::invalid_argument("env: wing_prob not in [0,1]");
  if (!(n0 >= 1.0)) throw std::invalid_argument("env: n0 must be >= 1");
  if (wing_prob > 0.0) {
    if (wing_prob > n0 * block_length)
      throw std::invalid_argument("env: wing rate exceeds the n0 bound");
    if (wing_law.r_abs_law.max() > A1 || wing_law.level_law.max() > A1)
      throw std::invalid_argument("env: wing sizes escape the A1 bound");
    if (!(wing_law.r_abs_law.min() > 0.0)) throw std::invalid_argument("env: |r| must be positive");
    if (wing_law.offset_frac <= 0.0 || wing_law.offset_frac >= 1.0)
      throw std::invalid_argument("env: offset_frac must lie in (0,1)");
    const double rmax = wing_law.r_abs_law.max();
    const bool mixed = wing_law.p_r_positive > 0.0 && wing_law.p_r_positive < 1.0;
    if (mixed ? (rmax > 0.5 * block_length) : (rmax > block_length))
      throw std::invalid_argument("env: wing extent can overlap the neighbouring pocket");
    if (wing_law.tip_radius < 0.0 || wing_law.tip_radius >= wing_law.r_abs_law.min())
      throw std::invalid_argument("env: tip_radius must lie in [0, min |r|)");
  }
  if (mixing_range < block_length)
    throw std::invalid_argument("env: mixing_range shorter than one block");
}

nlohmann::json EnvironmentParams::to_json() const {
  return {{"block_length", block_length},
          {"mixing_range", mixing_range},
          {"width_law", width_law.to_json()},
          {"smoothing", smoothing == Interp::Steps ? "piecewise-constant" : "pchip"},
          {"wing_prob", wing_prob},
          {"wing_law", wing_law.to_json()},
          {"n0", n0},
          {"A1", A1},
          {"l_min", l_min},
          {"l_max", l_max},
          {"seed", seed},
          {"phase_shift", phase_shift}};
}

EnvironmentParams EnvironmentParams::from_json(const nlohmann::json& j) {
  EnvironmentParams p;
  p.block_length = j.at("block_length").get<double>();
  p.mixing_range = j.at("mixing_range").get<double>();
  p.width_law = ValueLaw::from_json(j.at("width_law"));
  p.smoothing =
      j.at("smoothing").get<std::string>() == "piecewise-constant" ? Interp::Steps : Interp::Pchip;
  p.wing_prob = j.at("wing_prob").get<double>();
  if (j.contains("wing_law")) p.wing_law = WingLaw::from_json(j.at("wing_law"));
  p.n0 = j.at("n0").get<double>();
  p.A1 = j.at("A1").get<double>();
  p.l_min = j.at("l_min").get<double>();
  p.l_max = j.at("l_max").get<double>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.phase_shift = j.at("phase_shift").get<bool>();
  return p;
}

namespace {

struct BlockLattice {
  double L;
  double phase;  // block j covers [j*L - phase, (j+1)*L - phase)
  long long index_of(double x) const { return static_cast<long long>(std::floor((x + phase) / L)); }
  double lower(long long j) const { return static_cast<double>(j) * L - phase; }
};

BlockLattice lattice_of(const EnvironmentParams& p) {
  double phase = 0.0;
  if (p.phase_shift) {
    auto s = rng::Stream::derived(p.seed, rng::kPhase);
    phase = p.block_length * s.uniform();
  }
  return {p.block_length, phase};
}

double block_width(const EnvironmentParams& p, long long j) {
  auto s = rng::Stream::derived(p.seed, rng::kBlockWidth, rng::zigzag(j));
  return p.width_law.sample(s);
}

struct WingDraw {
  bool present = false;
  double r = 0.0, level = 0.0;
  Side side = Side::Above;
};

WingDraw block_wing(const EnvironmentParams& p, long long j) {
  auto s = rng::Stream::derived(p.seed, rng::kBlockWing, rng::zigzag(j));
  WingDraw d;
  d.present = s.bernoulli(p.wing_prob);
  const double r_abs = p.wing_law.r_abs_law.sample(s);
  const bool positive = s.bernoulli(p.wing_law.p_r_positive);
  d.r = positive ? r_abs : -r_abs;
  d.level = p.wing_law.level_law.sample(s);
  d.side = s.bernoulli(p.wing_law.p_above) ? Side::Above : Side::Below;
  return d;
}

}  // namespace

Piecewise sample_l0(const EnvironmentParams& params, double x0, double x1) {
  params.validate();
  if (!(x1 > x0)) throw std::invalid_argument("sample_l0: empty window");
  const BlockLattice lat = lattice_of(params);
  const long long j0 = lat.index_of(x0), j1 = lat.index_of(x1);

  if (params.smoothing == Interp::Steps) {
    std::vector<double> bounds, vals;
    bounds.push_back(x0);
    for (long long j = j0; j <= j1; ++j) {
      const double hi = std::min(lat.lower(j + 1), x1);
      if (hi <= bounds.back()) continue;
      bounds.push_back(hi);
      vals.push_back(block_width(params, j));
    }
    if (bounds.back() < x1) {
      bounds.push_back(x1);
      vals.push_back(block_width(params, j1));
    }
    return Piecewise::tabulated(std::move(bounds), std::move(vals), {}, Interp::Steps);
  }

  // Smooth channel: one knot per block center, pinned flat at the window ends.
  std::vector<double> knots{x0}, vals{block_width(params, j0)};
  for (long long j = j0; j <= j1; ++j) {
    const double c = lat.lower(j) + 0.5 * params.block_length;
    if (c > x0 && c < x1) {
      knots.push_back(c);
      vals.push_back(block_width(params, j));
    }
  }
  knots.push_back(x1);
  vals.push_back(block_width(params, j1));
  return Piecewise::tabulated(std::move(knots), std::move(vals));
}

ChannelSpec sample_environment(const EnvironmentParams& params, double x0, double x1) {
  params.validate();
  Piecewise l0 = sample_l0(params, x0, x1);
  const BlockLattice lat = lattice_of(params);

  std::vector<WingSpec> wings;
  if (params.wing_prob > 0.0) {
    for (long long j = lat.index_of(x0); j <= lat.index_of(x1); ++j) {
      const WingDraw d = block_wing(params, j);
      if (!d.present) continue;
      WingSpec w;
      w.q = lat.lower(j) + params.wing_law.offset_frac * params.block_length;
      w.r = d.r;
      w.side = d.side;
      w.level = d.level;
      w.tip_radius = params.wing_law.tip_radius;
      w.pitch = params.wing_law.pitch;
      if (w.span_lo() <= x0 || w.span_hi() >= x1) continue;  // window-edge pocket dropped
      wings.push_back(w);
    }
  }
  return channel_with_wings(l0, std::move(wings), params.l_min, params.l_max);
}

KEstimate estimate_K(const EnvironmentParams& params, const std::vector<double>& t_grid, double S,
                     int ensemble) {
  params.validate();
  if (t_grid.empty()) throw std::invalid_argument("estimate_K: empty t grid");
  for (double t : t_grid)
    if (t < 0.0) throw std::invalid_argument("estimate_K: negative t");
  const double t_max = *std::max_element(t_grid.begin(), t_grid.end());
  if (S <= t_max) throw std::invalid_argument("estimate_K: sample length S must exceed max(t)");
  if (ensemble < 1) throw std::invalid_argument("estimate_K: ensemble must be >= 1");

  const double c = params.block_length;
  const long m = static_cast<long>(std::floor(S / c));  // bootstrap cells of one block
  if (m < 8) throw std::invalid_argument("estimate_K: S too short for error estimation");
  const double s_eff = static_cast<double>(m) * c;

  KEstimate est;
  est.t = t_grid;
  est.sample_length = s_eff;
  est.ratio_bound = params.l_max / params.l_min;
  est.ensemble = ensemble;
  est.K.assign(t_grid.size(), 0.0);
  est.stderr_.assign(t_grid.size(), 0.0);

  const int B = 200;  // bootstrap resamples
  std::vector<double> cells(static_cast<std::size_t>(m));

  for (int member = 0; member < ensemble; ++member) {
    EnvironmentParams pm = params;
    if (ensemble > 1) pm.seed = rng::mix(params.seed, rng::kEnsemble, static_cast<std::uint64_t>(member));
    const Piecewise l0 = sample_l0(pm, -c, s_eff + t_max + c);
    const auto& breaks = l0.breakpoints();

    for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
      const double t = t_grid[ti];
      // Merged panel cuts: kinks of l0(s), kinks of l0(s+t), cell boundaries.
      std::vector<double> cuts;
      cuts.reserve(2 * breaks.size() + static_cast<std::size_t>(m) + 2);
      for (double b : breaks) {
        if (b > 0.0 && b < s_eff) cuts.push_back(b);
        const double bs = b - t;
        if (bs > 0.0 && bs < s_eff) cuts.push_back(bs);
      }
      for (long j = 0; j <= m; ++j) cuts.push_back(static_cast<double>(j) * c);
      std::sort(cuts.begin(), cuts.end());
      cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

      std::fill(cells.begin(), cells.end(), 0.0);
      auto ratio = [&l0, t](double s) { return l0(s) / l0(s + t); };
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double p = cuts[i], q = cuts[i + 1];
        if (q <= p) continue;
        const double pad = (q - p) * 1e-9;
        auto f = [&ratio, p, q, pad](double s) { return ratio(std::clamp(s, p + pad, q - pad)); };
        const double v = quad::adaptive_simpson(f, p, q, {1e-9 * (q - p), 24});
        const long cell = std::min<long>(m - 1, static_cast<long>(0.5 * (p + q) / c));
        cells[static_cast<std::size_t>(cell)] += v;
      }

      double mean = 0.0;
      for (double v : cells) mean += v;
      mean /= s_eff;
      est.K[ti] += mean / ensemble;

      // Circular block bootstrap over cells, block size covering the
      // dependence range plus the lag.
      const long bsize = std::min<long>(m, static_cast<long>(
          std::ceil((params.mixing_range + t) / c)) + 1);
      const long nblocks = (m + bsize - 1) / bsize;
      auto bs = rng::Stream::derived(pm.seed, rng::kBootstrap, static_cast<std::uint64_t>(ti));
      double sum = 0.0, sum2 = 0.0;
      for (int rep = 0; rep < B; ++rep) {
        double tot = 0.0;
        long picked = 0;
        for (long blk = 0; blk < nblocks && picked < m; ++blk) {
          const long start = static_cast<long>(bs.below(static_cast<std::uint64_t>(m)));
          for (long k = 0; k < bsize && picked < m; ++k, ++picked)
            tot += cells[static_cast<std::size_t>((start + k) % m)];
        }
        const double rm = tot / s_eff;
        sum += rm;
        sum2 += rm * rm;
      }
      const double var = std::max(0.0, sum2 / B - (sum / B) * (sum / B));
      est.stderr_[ti] += var / (ensemble * ensemble);  // accumulate member variances
    }
  }
  for (double& se : est.stderr_) se = std::sqrt(se);
  return est;
}

WingMoments wing_moment_estimates(const EnvironmentParams& params, double beta, int n_samples) {
  params.validate();
  if (!(beta > 0.0)) throw std::invalid_argument("wing_moment_estimates: beta must be positive");
  if (n_samples < 2) throw std::invalid_argument("wing_moment_estimates: need n_samples >= 2");

  const double L = params.block_length;
  const double T = (std::log(1e10) - std::log(params.l_min)) / (2.0 * beta);
  const long n_blocks = static_cast<long>(std::ceil(T / L)) + 1;
  // Tail beyond T: midpoint of the width-bound bracket, half-width recorded.
  const double tail_mid = std::exp(-2.0 * beta * T) / (2.0 * beta) *
                          0.5 * (1.0 / params.l_min + 1.0 / params.l_max);
  const double tail_half = std::exp(-2.0 * beta * T) / (2.0 * beta) *
                           0.5 * (1.0 / params.l_min - 1.0 / params.l_max);

  double sum_n = 0.0, sum_n2 = 0.0;
  double sum_w = 0.0, sum_w2 = 0.0, sum_absW = 0.0;
  long n_present = 0;
  quad::Opts opts{1e-11, 26};

  for (int i = 0; i < n_samples; ++i) {
    auto s = rng::Stream::derived(params.seed, rng::kMoment, static_cast<std::uint64_t>(i));
    // The wing term averages over pockets that exist (Palm view of the marks).
    const bool present = s.bernoulli(params.wing_prob);
    sum_n += present ? 1.0 : 0.0;
    sum_n2 += present ? 1.0 : 0.0;
    if (!present) continue;
    ++n_present;

    WingSpec wing;
    wing.q = 0.0;
    const double r_abs = params.wing_law.r_abs_law.sample(s);
    wing.r = s.bernoulli(params.wing_law.p_r_positive) ? r_abs : -r_abs;
    wing.level = params.wing_law.level_law.sample(s);
    wing.tip_radius = params.wing_law.tip_radius;
    const double sgn = wing.r > 0 ? 1.0 : -1.0;
    std::vector<double> wbreaks;
    if (wing.tip_radius > 0.0)
      wbreaks.push_back(wing.tip_x() + (wing.r > 0 ? -wing.tip_radius : wing.tip_radius));
    const double W =
        sgn * quad::integrate([&wing, beta](double t) { return wing.width(t) * std::exp(2.0 * beta * t); },
                              0.0, wing.r, wbreaks, opts);

    // Downstream channel, jointly sampled: the attachment sits at offset_frac
    // inside its block, i.i.d. blocks follow.
    const double first_len = (1.0 - params.wing_law.offset_frac) * L;
    std::vector<double> bounds{0.0}, widths;
    widths.push_back(params.width_law.sample(s));
    bounds.push_back(first_len);
    for (long b = 1; bounds.back() < T; ++b) {
      widths.push_back(params.width_law.sample(s));
      bounds.push_back(first_len + static_cast<double>(b) * L);
    }
    (void)n_blocks;
    double C = 0.0;
    if (params.smoothing == Interp::Steps) {
      for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
        const double y0 = bounds[k], y1 = std::min(bounds[k + 1], T);
        if (y1 <= y0) break;
        C += (std::exp(-2.0 * beta * y0) - std::exp(-2.0 * beta * y1)) / (2.0 * beta * widths[k]);
      }
    } else {
      std::vector<double> knots{0.0}, vals{widths.front()};
      for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
        const double cmid = 0.5 * (bounds[k] + bounds[k + 1]);
        if (cmid > 0.0 && cmid < T) {
          knots.push_back(cmid);
          vals.push_back(widths[k]);
        }
      }
      knots.push_back(T);
      vals.push_back(widths.back());
      const Pchip lp(knots, vals);
      C = quad::integrate([&lp, beta](double y) { return std::exp(-2.0 * beta * y) / lp(y); }, 0.0,
                          T, knots, opts);
    }
    C += tail_mid;

    const double sample = W * C;  // sign folded into W
    sum_w += sample;
    sum_w2 += sample * sample;
    sum_absW += std::abs(W);
  }

  WingMoments m;
  m.beta = beta;
  m.n_samples = n_samples;
  const double n = static_cast<double>(n_samples);
  m.e_n = sum_n / n / L;
  const double var_n = std::max(0.0, sum_n2 / n - (sum_n / n) * (sum_n / n));
  m.e_n_stderr = std::sqrt(var_n / n) / L;
  if (n_present > 0) {
    const double np = static_cast<double>(n_present);
    m.wing_term = sum_w / np;
    const double var_w = std::max(0.0, sum_w2 / np - m.wing_term * m.wing_term);
    m.wing_term_stderr = std::sqrt(var_w / np);
    m.trunc_bound = (sum_absW / np) * tail_half;
  }
  return m;
}

}  // namespace nchan

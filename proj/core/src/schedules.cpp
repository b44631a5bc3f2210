#include "hcf/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "hcf/error.hpp"
#include "hcf/parallel.hpp"

namespace hcf {

namespace {

struct Window {
  long length;
  std::vector<long> offsets;
};

std::vector<Window> draw_windows(long r, long n_min, long n_max, int k, std::uint64_t count, std::uint64_t seed) {
  std::vector<Window> out;
  if (n_min > n_max) return out;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> len(n_min, n_max);
  for (std::uint64_t w = 0; w < count; ++w) {
    Window win{len(rng), {}};
    // h in [-r, r - N - 1] so that h + N < r
    std::uniform_int_distribution<long> off(-r, r - win.length - 1);
    while (static_cast<int>(win.offsets.size()) < k) {
      long h = off(rng);
      if (std::find(win.offsets.begin(), win.offsets.end(), h) == win.offsets.end()) win.offsets.push_back(h);
    }
    out.push_back(std::move(win));
  }
  return out;
}

long ipow(long base, int e) {
  long v = 1;
  for (int i = 0; i < e; ++i) v *= base;
  return v;
}

Rational ceil_if(const Rational& x, bool on) { return on ? Rational(ceil_int(x)) : x; }

BoxParams square_cover(const Region& r, bool gamma_integer) {
  BoxParams bb = bounding_box(r);
  Rational a = rmax(bb.alpha, bb.beta);
  return {a, a, ceil_if(bb.gamma, gamma_integer)};
}

struct Step {
  std::vector<GroupElement> c;
  BoxParams next;
  LevelAnnotation ann;
};

Step mixing_step(int n, const BoxParams& fn, const BoxParams& prev_aux, const MixingConfig& cfg) {
  Lattice dims = cfg.h_dims;
  if (cfg.growth_dims) {
    long w = std::max<long>(1, static_cast<long>(n) * n * n);
    dims = {w, w, ipow(4, n) * cfg.r0};
  }
  if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1) throw Error(ErrorCode::ConfigError, "h_dims must be positive");
  const double size = double(2 * dims[0] - 1) * double(2 * dims[1] - 1) * double(2 * dims[2] - 1);
  if (size > static_cast<double>(cfg.budget))
    throw Error(ErrorCode::BudgetExceeded, "H_" + std::to_string(n) + " has " + std::to_string(static_cast<long long>(size)) +
                                               " points, budget " + std::to_string(cfg.budget));

  Step st;
  const Rational widen = 2 * n + 1;
  const BoxParams s_box{widen * prev_aux.alpha, widen * prev_aux.alpha, widen * prev_aux.gamma};
  const BoxParams aux = product_bound(fn, s_box);
  const BoxParams phi_p{aux.alpha, aux.alpha, aux.gamma};
  const std::vector<GroupElement> d = centered_grid(s_box, cfg.d_grid);

  const long rr = dims[2] - 1;
  const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(n));
  SpacerMap sp;
  sp.r = rr;
  if (cfg.spacer_mode == "constant") {
    sp.values.assign(static_cast<std::size_t>(2 * rr + 1), 0);
  } else if (cfg.spacer_mode != "random") {
    throw Error(ErrorCode::ConfigError, "spacer_mode must be random or constant");
  } else if (rr == 0) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(d.size()) - 1);
    sp.values = {pick(rng)};
  } else {
    const double nn = std::max(1, n);
    SpacerOptions so;
    so.epsilon = cfg.epsilon.value_or(1.0 / nn);
    so.delta = cfg.delta.value_or(1.0 / (nn * nn));
    so.order_k = cfg.order_k;
    so.windows = cfg.spacer_windows;
    so.retries = cfg.spacer_retries;
    so.jobs = cfg.jobs;
    sp = deljunco_spacer(d.size(), rr, so, seed);
  }

  for (long h1 = -(dims[0] - 1); h1 <= dims[0] - 1; ++h1)
    for (long h2 = -(dims[1] - 1); h2 <= dims[1] - 1; ++h2)
      for (long h3 = -rr; h3 <= rr; ++h3) {
        const Lattice h{h1, h2, h3};
        st.c.push_back(mul(d[static_cast<std::size_t>(sp.at(h3))], phi(phi_p, h)));
        st.ann.lattice.push_back(h);
      }
  Region image;
  for (const auto& c : st.c) image.parts.push_back(right_translate(box(fn), c));
  st.next = square_cover(image, cfg.gamma_integer);

  st.ann.step = StepKind::Mixing;
  st.ann.phi_params = phi_p;
  st.ann.s_box = s_box;
  st.ann.aux_box = aux;
  st.ann.h_dims = dims;
  st.ann.d_points = d;
  st.ann.spacer_t3 = sp.values;
  if (cfg.spacer_mode == "random" && rr > 0) {
    st.ann.spacer_distance = sp.report.worst_distance;
    st.ann.spacer_windows = sp.report.windows_checked;
  }
  if (cfg.quadrature_samples > 0) {
    const BishearBox f = box(fn);
    const Rational a = fn.alpha, g = fn.gamma;
    const std::vector<std::pair<BishearBox, BishearBox>> family{
        {f, f},
        {axis_box({-a, a}, {-a, a}, {-g, 0}), axis_box({-a, a}, {-a, a}, {0, g})},
        {axis_box({-a, 0}, {-a, a}, {-g, g}), axis_box({-a, a}, {0, a}, {-g, g})},
    };
    double worst = 0;
    for (std::size_t i = 0; i < family.size(); ++i) {
      auto q = quadrature_discrepancy(family[i].first, family[i].second, f, s_box, d, cfg.quadrature_samples,
                                      derive_seed(seed, 1000 + i));
      worst = std::max(worst, q.discrepancy);
    }
    st.ann.quadrature_error = worst;
  }
  return st;
}

Step asymmetric_step(int n, const BoxParams& fn, const std::string& placement, bool gamma_integer) {
  if (placement != "cumulative" && placement != "pointwise")
    throw Error(ErrorCode::ConfigError, "spacer_placement must be cumulative or pointwise");
  Step st;
  const BoxParams phi_p{fn.alpha, fn.alpha, fn.gamma};
  Rational running = 0;
  for (long j = -n; j <= n; ++j) {
    Rational offset = placement == "cumulative" ? running : asymmetric_gap(j);
    running += asymmetric_gap(j);
    st.c.push_back(mul(gen_c(offset), phi(phi_p, {0, 0, j})));
    st.ann.j_values.push_back(j);
    st.ann.spacer_offsets.push_back(offset);
    st.ann.lattice.push_back({0, 0, j});
  }
  Region image;
  for (const auto& c : st.c) image.parts.push_back(right_translate(box(fn), c));
  BoxParams bb = bounding_box(image);
  st.next = {fn.alpha, fn.alpha, ceil_if(bb.gamma, gamma_integer)};
  st.ann.step = StepKind::Asymmetric;
  st.ann.phi_params = phi_p;
  st.ann.spacer_placement = placement;
  st.ann.period_element = mul(st.c[5], inv(st.c[0]));
  st.ann.l_element = mul(gen_c(1), phi(phi_p, {0, 0, 1}));
  return st;
}

void check_mixing_config(const MixingConfig& cfg) {
  if (cfg.f0.alpha <= 0 || cfg.f0.gamma <= 0 || cfg.f0.alpha != cfg.f0.beta)
    throw Error(ErrorCode::ConfigError, "F_0 must be I(a, a, g) with a, g > 0");
  for (long m : cfg.d_grid)
    if (m < 1) throw Error(ErrorCode::ConfigError, "d_grid counts must be positive");
}

}  // namespace

double window_distance(const SpacerMap& s, std::size_t d_size, const std::vector<long>& offsets, long length) {
  const int k = static_cast<int>(offsets.size());
  std::size_t cells = 1;
  for (int i = 0; i < k; ++i) cells *= d_size;
  std::vector<std::uint32_t> counts(cells, 0);
  for (long t = 0; t < length; ++t) {
    std::size_t idx = 0;
    for (int i = k - 1; i >= 0; --i) idx = idx * d_size + static_cast<std::size_t>(s.at(offsets[static_cast<std::size_t>(i)] + t));
    ++counts[idx];
  }
  const double target = 1.0 / static_cast<double>(cells);
  double l1 = 0;
  for (auto c : counts) l1 += std::fabs(static_cast<double>(c) / static_cast<double>(length) - target);
  return l1;
}

SpacerMap deljunco_spacer(std::size_t d_size, long r, const SpacerOptions& opts, std::uint64_t seed) {
  if (d_size < 1) throw Error(ErrorCode::ConfigError, "spacer alphabet is empty");
  if (r < 1) throw Error(ErrorCode::ConfigError, "spacer radius must be at least 1");
  if (!(opts.epsilon > 0) || !(opts.delta > 0)) throw Error(ErrorCode::ConfigError, "epsilon and delta must be positive");
  if (opts.order_k < 2) throw Error(ErrorCode::ConfigError, "order_k must be at least 2");
  if (opts.retries < 1) throw Error(ErrorCode::ConfigError, "retries must be at least 1");

  const long n_min = static_cast<long>(std::floor(opts.delta * static_cast<double>(r))) + 1;
  const long n_max = 2 * r - opts.order_k;
  SpacerMap best;
  double best_worst = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt < opts.retries; ++attempt) {
    SpacerMap s;
    s.r = r;
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(2 * attempt)));
    std::uniform_int_distribution<int> pick(0, static_cast<int>(d_size) - 1);
    s.values.resize(static_cast<std::size_t>(2 * r + 1));
    for (auto& v : s.values) v = pick(rng);
    const auto windows = draw_windows(r, n_min, n_max, opts.order_k, opts.windows,
                                      derive_seed(seed, static_cast<std::uint64_t>(2 * attempt + 1)));
    std::vector<double> dist(windows.size(), 0.0);
    parallel_for(windows.size(), opts.jobs, [&](std::size_t i) {
      dist[i] = window_distance(s, d_size, windows[i].offsets, windows[i].length);
    });
    const double worst = dist.empty() ? 0.0 : *std::max_element(dist.begin(), dist.end());
    s.report.worst_distance = worst;
    s.report.windows_checked = windows.size();
    s.report.attempts = attempt + 1;
    if (worst < opts.epsilon) {
      s.report.best_failed_distance = std::isfinite(best_worst) ? best_worst : 0.0;
      return s;
    }
    if (worst < best_worst) {
      best_worst = worst;
      best = std::move(s);
    }
  }
  std::ostringstream os;
  os << "no spacer map within epsilon " << opts.epsilon << " after " << opts.retries
     << " attempts; best worst-window distance " << best_worst;
  throw Error(ErrorCode::GenerationFailed, os.str());
}

Rational asymmetric_gap(long j) {
  static const int gaps[5] = {0, 1, 1, 2, 2};
  return gaps[((j % 5) + 5) % 5];
}

std::vector<GroupElement> centered_grid(const BoxParams& params, const Lattice& counts) {
  std::vector<GroupElement> out;
  auto centre = [](const Rational& half, long m, long i) -> Rational { return -half + half * (2 * i + 1) / m; };
  for (long i = 0; i < counts[0]; ++i)
    for (long j = 0; j < counts[1]; ++j)
      for (long k = 0; k < counts[2]; ++k)
        out.push_back({centre(params.alpha, counts[0], i), centre(params.beta, counts[1], j),
                       centre(params.gamma, counts[2], k)});
  return out;
}

QuadratureEstimate quadrature_discrepancy(const BishearBox& a, const BishearBox& b, const BishearBox& f,
                                          const BoxParams& s, const std::vector<GroupElement>& d,
                                          std::uint64_t samples, std::uint64_t seed) {
  QuadratureEstimate q;
  const Rational lf = f.volume();
  Rational dirac = 0;
  for (const auto& x : d) {
    BishearBox ax = right_translate(a, x);
    for (const auto& y : d) dirac += intersect_volume(ax, right_translate(b, y));
  }
  q.dirac = Rational(dirac / (lf * static_cast<unsigned long>(d.size() * d.size()))).get_d();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto draw = [&] {
    return GroupElement{s.alpha * from_double(u(rng)), s.beta * from_double(u(rng)), s.gamma * from_double(u(rng))};
  };
  double sum = 0, sum2 = 0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    GroupElement x = draw(), y = draw();
    double v = Rational(intersect_volume(right_translate(a, x), right_translate(b, y)) / lf).get_d();
    sum += v;
    sum2 += v * v;
  }
  if (samples > 0) {
    const double m = static_cast<double>(samples);
    q.continuous = sum / m;
    q.continuous_se = std::sqrt(std::max(0.0, sum2 / m - q.continuous * q.continuous) / m);
  }
  q.discrepancy = std::fabs(q.dirac - q.continuous);
  return q;
}

Schedule build_mixing(int levels, const MixingConfig& config) {
  if (levels < 1) throw Error(ErrorCode::ConfigError, "levels must be at least 1");
  check_mixing_config(config);
  std::vector<BoxParams> f{{config.f0.alpha, config.f0.alpha, ceil_if(config.f0.gamma, config.gamma_integer)}};
  std::vector<std::vector<GroupElement>> cs;
  std::vector<LevelAnnotation> ann;
  for (int n = 0; n < levels; ++n) {
    const BoxParams prev_aux = n == 0 ? f[0] : *ann.back().aux_box;
    Step st = mixing_step(n, f.back(), prev_aux, config);
    cs.push_back(std::move(st.c));
    f.push_back(st.next);
    ann.push_back(std::move(st.ann));
  }
  return Schedule(MeasureKind::Finite, "mixing", std::move(f), std::move(cs), std::move(ann));
}

Schedule build_asymmetric(int levels, bool gamma_integer, const AsymmetricConfig& config) {
  if (levels < 1) throw Error(ErrorCode::ConfigError, "levels must be at least 1");
  MixingConfig mix = config.mixing;
  mix.gamma_integer = gamma_integer;
  check_mixing_config(mix);
  std::vector<BoxParams> f{{mix.f0.alpha, mix.f0.alpha, ceil_if(mix.f0.gamma, gamma_integer)}};
  std::vector<std::vector<GroupElement>> cs;
  std::vector<LevelAnnotation> ann;
  for (int n = 0; n < levels; ++n) {
    Step st;
    if (n > 0 && n % 3 == 0) {
      st = asymmetric_step(n, f.back(), config.spacer_placement, gamma_integer);
    } else {
      // After an asymmetric step there is no auxiliary box; F_{n-1} stands in for it.
      BoxParams prev_aux = f[static_cast<std::size_t>(std::max(n - 1, 0))];
      if (n > 0 && ann.back().aux_box) prev_aux = *ann.back().aux_box;
      st = mixing_step(n, f.back(), prev_aux, mix);
    }
    cs.push_back(std::move(st.c));
    f.push_back(st.next);
    ann.push_back(std::move(st.ann));
  }
  return Schedule(MeasureKind::Finite, "asymmetric", std::move(f), std::move(cs), std::move(ann));
}

Schedule build_infinite(int levels, const InfiniteConfig& config) {
  if (levels < 1) throw Error(ErrorCode::ConfigError, "levels must be at least 1");
  if (config.f0.alpha <= 0 || config.f0.gamma <= 0 || config.f0.alpha != config.f0.beta)
    throw Error(ErrorCode::ConfigError, "F_0 must be I(a, a, g) with a, g > 0");
  if (config.separation_factor <= 0) throw Error(ErrorCode::ConfigError, "separation_factor must be positive");
  std::vector<BoxParams> f{config.f0};
  std::vector<std::vector<GroupElement>> cs;
  std::vector<LevelAnnotation> ann;
  Rational prev_reach = 0;
  for (int n = 0; n < levels; ++n) {
    const Rational a = f.back().alpha, g = f.back().gamma;
    const Rational step = config.separation_factor * 4 * (g + a * a);
    // Multipliers 2^k - 1 have pairwise distinct differences.
    mpz_class top;
    mpz_ui_pow_ui(top.get_mpz_t(), 2, static_cast<unsigned long>(n + 1));
    const Rational centre = Rational(top - 1) / 2;
    std::vector<GroupElement> c;
    LevelAnnotation an;
    an.step = StepKind::Infinite;
    Rational reach = 0;
    for (int k = 0; k <= n + 1; ++k) {
      mpz_class m;
      mpz_ui_pow_ui(m.get_mpz_t(), 2, static_cast<unsigned long>(k));
      Rational t3 = (Rational(m - 1) - centre) * step;
      reach = rmax(reach, rabs(t3));
      c.push_back(gen_c(t3));
      an.lattice.push_back({0, 0, k});
    }
    const Rational gamma_next = rmax(3 * g + 4 * a * a + prev_reach, g + reach);
    f.push_back({3 * a, 3 * a, gamma_next});
    cs.push_back(std::move(c));
    ann.push_back(std::move(an));
    prev_reach = reach;
  }
  return Schedule(MeasureKind::Infinite, "infinite", std::move(f), std::move(cs), std::move(ann));
}

Thm51Report check_thm51(const Schedule& s) {
  Thm51Report rep;
  const int n_levels = s.levels();
  for (int n = 1; n + 1 <= n_levels; ++n) {
    const BoxParams& fp = s.f_params(n);
    const BoxParams triple = product_bound(product_bound(fp, inverse_bound(fp)), fp);
    for (const auto& c : s.C(n)) {
      if (!contains(s.F(n + 1), right_translate(box(triple), c))) {
        rep.cond_i.pass = false;
        std::ostringstream os;
        os << "F F^-1 F c escapes F_" << n + 1 << " for c = " << c;
        rep.cond_i.failures.push_back({n, os.str()});
      }
    }
  }
  for (int n = 0; n < n_levels; ++n) {
    const BoxParams& fp = s.f_params(n);
    const AxisBox fa = box(fp).bounds();
    const AxisBox finv = box(inverse_bound(fp)).bounds();
    const auto& cs = s.C(n + 1);
    std::vector<AxisBox> sets{product_bounds(fa, identity(), finv)};
    std::vector<std::string> names{"F F^-1"};
    for (std::size_t i = 0; i < cs.size(); ++i)
      for (std::size_t j = 0; j < cs.size(); ++j) {
        if (i == j) continue;
        sets.push_back(product_bounds(fa, mul(cs[i], inv(cs[j])), finv));
        names.push_back("F c" + std::to_string(i) + " c" + std::to_string(j) + "^-1 F^-1");
      }
    for (std::size_t x = 0; x < sets.size(); ++x)
      for (std::size_t y = x + 1; y < sets.size(); ++y)
        if (overlaps(sets[x], sets[y])) {
          rep.cond_ii.pass = false;
          if (rep.cond_ii.failures.size() < 16) rep.cond_ii.failures.push_back({n, names[x] + " meets " + names[y]});
        }
  }
  for (int k = 2; k <= n_levels; ++k)
    if (s.C(k).size() <= s.C(k - 1).size()) {
      rep.cond_iii.pass = false;
      rep.cond_iii.failures.push_back({k, "#C_" + std::to_string(k) + " does not exceed #C_" + std::to_string(k - 1)});
    }
  ValidationReport v = validate(s);
  rep.partial_products = v.partial_products;
  rep.products_increasing = v.product_diverging;
  rep.pass = rep.cond_i.pass && rep.cond_ii.pass && rep.cond_iii.pass && rep.products_increasing;
  return rep;
}

Json to_json(const Thm51Report& r) {
  auto cond = [](const ConditionResult& c) {
    Json f = Json::array();
    for (const auto& x : c.failures) f.push_back({{"level", x.level}, {"detail", x.detail}});
    return Json{{"condition", c.name}, {"pass", c.pass}, {"failures", f}};
  };
  Json prods = Json::array();
  for (const auto& p : r.partial_products) prods.push_back({{"exact", to_string(p)}, {"decimal", to_decimal(p)}});
  return Json{{"pass", r.pass},
              {"conditions", Json::array({cond(r.cond_i), cond(r.cond_ii), cond(r.cond_iii)})},
              {"partial_products", prods},
              {"products_increasing", r.products_increasing}};
}

Json build_report(const Schedule& s) {
  Json levels = Json::array();
  for (int n = 0; n < s.levels(); ++n) {
    const auto& a = s.annotation(n);
    Json row{{"n", n}, {"step", std::string(to_string(a.step))}, {"copies", s.C(n + 1).size()},
             {"f_next", s.f_params(n + 1)}};
    if (a.spacer_distance) row["spacer_distance"] = *a.spacer_distance;
    if (a.spacer_windows) row["spacer_windows"] = *a.spacer_windows;
    if (a.quadrature_error) row["quadrature_error"] = *a.quadrature_error;
    if (!a.spacer_placement.empty()) row["spacer_placement"] = a.spacer_placement;
    levels.push_back(row);
  }
  ValidationReport v = validate(s);
  return Json{{"hash", s.hash()},
              {"kind", std::string(to_string(s.kind()))},
              {"construction", s.construction()},
              {"levels", s.levels()},
              {"steps", levels},
              {"validation", to_json(v)}};
}

}  // namespace hcf

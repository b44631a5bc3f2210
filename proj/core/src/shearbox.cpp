#include "hcf/shearbox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "hcf/error.hpp"
#include "hcf/parallel.hpp"

namespace hcf {

namespace {

// Linear function c + p*t1 + q*t2.
struct Linear {
  Rational c;
  Rational p;
  Rational q;

  Rational at(const Rational& x, const Rational& y) const { return c + p * x + q * y; }
  Linear minus(const Linear& o) const { return {c - o.c, p - o.p, q - o.q}; }
};

struct Pt {
  Rational x;
  Rational y;
};

using Polygon = std::vector<Pt>;

// Keeps the part where f >= 0.
Polygon clip(const Polygon& poly, const Linear& f) {
  Polygon out;
  if (poly.empty()) return out;
  out.reserve(poly.size() + 2);
  const std::size_t n = poly.size();
  std::vector<Rational> v(n);
  bool all_in = true, all_out = true;
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = f.at(poly[i].x, poly[i].y);
    if (v[i] < 0) all_in = false;
    if (v[i] > 0) all_out = false;
  }
  if (all_in) return poly;
  if (all_out) return out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const bool in_i = v[i] >= 0, in_j = v[j] >= 0;
    if (in_i) out.push_back(poly[i]);
    if (in_i != in_j) {
      Rational t = v[i] / (v[i] - v[j]);
      out.push_back({poly[i].x + t * (poly[j].x - poly[i].x), poly[i].y + t * (poly[j].y - poly[i].y)});
    }
  }
  if (out.size() < 3) out.clear();
  return out;
}

// Integral of f over the polygon (counter-clockwise).
Rational integrate(const Polygon& poly, const Linear& f) {
  if (poly.size() < 3) return 0;
  Rational total = 0;
  const Pt& o = poly[0];
  Rational fo = f.at(o.x, o.y);
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
    const Pt& a = poly[i];
    const Pt& b = poly[i + 1];
    Rational twice_area = (a.x - o.x) * (b.y - o.y) - (b.x - o.x) * (a.y - o.y);
    total += twice_area * (fo + f.at(a.x, a.y) + f.at(b.x, b.y));
  }
  return total / 6;
}

bool same_shear(const BishearBox& a, const BishearBox& b) { return a.p == b.p && a.q == b.q; }

// Keeps, per shear, the tightest function: smallest constant for uppers, largest for lowers.
std::vector<Linear> tightest(std::vector<Linear> fs, bool keep_min) {
  std::sort(fs.begin(), fs.end(), [](const Linear& a, const Linear& b) {
    if (a.p != b.p) return a.p < b.p;
    if (a.q != b.q) return a.q < b.q;
    return a.c < b.c;
  });
  std::vector<Linear> out;
  for (auto& f : fs) {
    if (!out.empty() && out.back().p == f.p && out.back().q == f.q) {
      if (!keep_min) out.back() = f;
      continue;
    }
    out.push_back(f);
  }
  return out;
}

}  // namespace

bool overlaps(const AxisBox& a, const AxisBox& b) {
  return !intersect(a.x1, b.x1).degenerate() && !intersect(a.x2, b.x2).degenerate() &&
         !intersect(a.x3, b.x3).degenerate();
}

bool BishearBox::contains(const GroupElement& x) const {
  return i1.contains(x.t1) && i2.contains(x.t2) && i3.contains(x.t3 - p * x.t1 - q * x.t2);
}

std::array<GroupElement, 8> BishearBox::vertices() const {
  std::array<GroupElement, 8> out;
  std::size_t k = 0;
  for (const Rational* a : {&i1.lo, &i1.hi})
    for (const Rational* b : {&i2.lo, &i2.hi})
      for (const Rational* u : {&i3.lo, &i3.hi}) out[k++] = GroupElement{*a, *b, *u + p * *a + q * *b};
  return out;
}

AxisBox BishearBox::bounds() const {
  Rational smin = rmin(p * i1.lo, p * i1.hi) + rmin(q * i2.lo, q * i2.hi);
  Rational smax = rmax(p * i1.lo, p * i1.hi) + rmax(q * i2.lo, q * i2.hi);
  return {i1, i2, {i3.lo + smin, i3.hi + smax}};
}

BishearBox box(const BoxParams& params) {
  return {{-params.alpha, params.alpha}, {-params.beta, params.beta}, {-params.gamma, params.gamma}, 0, 0};
}

BishearBox axis_box(const Interval& x1, const Interval& x2, const Interval& x3) { return {x1, x2, x3, 0, 0}; }

BishearBox left_translate(const GroupElement& g, const BishearBox& b) {
  Rational shift = g.t3 - g.t1 * g.t2 - b.p * g.t1 - b.q * g.t2;
  return {b.i1.shifted(g.t1), b.i2.shifted(g.t2), b.i3.shifted(shift), b.p, b.q + g.t1};
}

BishearBox right_translate(const BishearBox& b, const GroupElement& g) {
  Rational shift = g.t3 - g.t1 * g.t2 - b.p * g.t1 - b.q * g.t2;
  return {b.i1.shifted(g.t1), b.i2.shifted(g.t2), b.i3.shifted(shift), b.p + g.t2, b.q};
}

Rational intersect_volume(const BishearBox& a, const BishearBox& b) {
  std::array<BishearBox, 2> pair{a, b};
  return intersect_volume(std::span<const BishearBox>(pair));
}

Rational intersect_volume(std::span<const BishearBox> boxes) {
  if (boxes.empty()) return 0;
  if (boxes.size() == 1) return boxes[0].volume();
  Interval r1 = boxes[0].i1, r2 = boxes[0].i2;
  bool common = true;
  for (const auto& b : boxes) {
    r1 = intersect(r1, b.i1);
    r2 = intersect(r2, b.i2);
    if (!same_shear(b, boxes[0])) common = false;
  }
  if (r1.degenerate() || r2.degenerate()) return 0;
  if (common) {
    Interval r3 = boxes[0].i3;
    for (const auto& b : boxes) r3 = intersect(r3, b.i3);
    return r1.length() * r2.length() * r3.length();
  }
  for (std::size_t i = 0; i < boxes.size(); ++i)
    for (std::size_t j = i + 1; j < boxes.size(); ++j)
      if (!overlaps(boxes[i].bounds(), boxes[j].bounds())) return 0;

  // The overlap length over (t1,t2) is max(0, min_i U_i - max_i L_i); integrate it
  // cell by cell over the regions where a fixed U_a is minimal and a fixed L_b maximal.
  std::vector<Linear> up, lo;
  for (const auto& b : boxes) {
    up.push_back({b.i3.hi, b.p, b.q});
    lo.push_back({b.i3.lo, b.p, b.q});
  }
  up = tightest(std::move(up), true);
  lo = tightest(std::move(lo), false);

  const Polygon rect{{r1.lo, r2.lo}, {r1.hi, r2.lo}, {r1.hi, r2.hi}, {r1.lo, r2.hi}};
  Rational total = 0;
  for (std::size_t a = 0; a < up.size(); ++a) {
    Polygon pa = rect;
    for (std::size_t i = 0; i < up.size() && !pa.empty(); ++i)
      if (i != a) pa = clip(pa, up[i].minus(up[a]));
    if (pa.empty()) continue;
    for (std::size_t b = 0; b < lo.size(); ++b) {
      Polygon pb = pa;
      for (std::size_t i = 0; i < lo.size() && !pb.empty(); ++i)
        if (i != b) pb = clip(pb, lo[b].minus(lo[i]));
      Linear gap = up[a].minus(lo[b]);
      pb = clip(pb, gap);
      total += integrate(pb, gap);
    }
  }
  return total;
}

bool contains(const BishearBox& outer, const BishearBox& b) {
  if (b.empty()) return true;
  for (const auto& v : b.vertices())
    if (!outer.contains(v)) return false;
  return true;
}

Rational volume(const Region& r) {
  Rational total = 0;
  for (const auto& b : r.parts) total += b.volume();
  return total;
}

Region left_translate(const GroupElement& g, const Region& r) {
  Region out;
  out.parts.reserve(r.parts.size());
  for (const auto& b : r.parts) out.parts.push_back(left_translate(g, b));
  return out;
}

Region right_translate(const Region& r, const GroupElement& g) {
  Region out;
  out.parts.reserve(r.parts.size());
  for (const auto& b : r.parts) out.parts.push_back(right_translate(b, g));
  return out;
}

Rational intersect_volume(const Region& a, const Region& b) {
  std::vector<AxisBox> bb;
  bb.reserve(b.parts.size());
  for (const auto& y : b.parts) bb.push_back(y.bounds());
  Rational total = 0;
  for (const auto& x : a.parts) {
    AxisBox ax = x.bounds();
    for (std::size_t j = 0; j < b.parts.size(); ++j)
      if (overlaps(ax, bb[j])) total += intersect_volume(x, b.parts[j]);
  }
  return total;
}

bool is_disjoint(const Region& a, const Region& b) { return intersect_volume(a, b) == 0; }

bool contains(const BishearBox& outer, const Region& r) {
  return std::all_of(r.parts.begin(), r.parts.end(), [&](const BishearBox& b) { return contains(outer, b); });
}

bool contains(const Region& r, const GroupElement& x) {
  return std::any_of(r.parts.begin(), r.parts.end(), [&](const BishearBox& b) { return b.contains(x); });
}

AxisBox bounds(const Region& r) {
  if (r.parts.empty()) return {{0, 0}, {0, 0}, {0, 0}};
  AxisBox out = r.parts[0].bounds();
  for (const auto& b : r.parts) {
    AxisBox x = b.bounds();
    out.x1 = {rmin(out.x1.lo, x.x1.lo), rmax(out.x1.hi, x.x1.hi)};
    out.x2 = {rmin(out.x2.lo, x.x2.lo), rmax(out.x2.hi, x.x2.hi)};
    out.x3 = {rmin(out.x3.lo, x.x3.lo), rmax(out.x3.hi, x.x3.hi)};
  }
  return out;
}

BoxParams bounding_box(const BishearBox& b) {
  AxisBox x = b.bounds();
  return {rmax(rabs(x.x1.lo), rabs(x.x1.hi)), rmax(rabs(x.x2.lo), rabs(x.x2.hi)),
          rmax(rabs(x.x3.lo), rabs(x.x3.hi))};
}

BoxParams bounding_box(const Region& r) {
  BoxParams out{0, 0, 0};
  for (const auto& b : r.parts) {
    BoxParams x = bounding_box(b);
    out = {rmax(out.alpha, x.alpha), rmax(out.beta, x.beta), rmax(out.gamma, x.gamma)};
  }
  return out;
}

Region multi_intersect_central(const std::vector<Region>& regions) {
  if (regions.empty()) return {};
  const BishearBox* first = nullptr;
  for (const auto& r : regions)
    for (const auto& b : r.parts) {
      if (!first) first = &b;
      if (!same_shear(b, *first))
        throw Error(ErrorCode::ShearMismatch, "multi_intersect_central: parts have different shear coefficients");
    }
  std::vector<BishearBox> acc = regions[0].parts;
  for (std::size_t k = 1; k < regions.size(); ++k) {
    std::vector<BishearBox> next;
    for (const auto& x : acc)
      for (const auto& y : regions[k].parts) {
        BishearBox z{intersect(x.i1, y.i1), intersect(x.i2, y.i2), intersect(x.i3, y.i3), x.p, x.q};
        if (!z.empty()) next.push_back(std::move(z));
      }
    acc = std::move(next);
  }
  return Region{std::move(acc)};
}

GroupElement SamplePoint::exact() const { return {from_double(t1), from_double(t2), from_double(t3)}; }

FastMembership::Bracket FastMembership::bracket(const Rational& x) {
  double d = x.get_d();
  double dn = d, up = d;
  while (cmp(x, dn) < 0) dn = std::nextafter(dn, -std::numeric_limits<double>::infinity());
  while (cmp(x, up) > 0) up = std::nextafter(up, std::numeric_limits<double>::infinity());
  return {dn, up};
}

FastMembership::FastMembership(const BishearBox& b)
    : box_(b),
      lo1_(bracket(b.i1.lo)),
      hi1_(bracket(b.i1.hi)),
      lo2_(bracket(b.i2.lo)),
      hi2_(bracket(b.i2.hi)),
      lo3_(bracket(b.i3.lo)),
      hi3_(bracket(b.i3.hi)),
      p_(b.p.get_d()),
      q_(b.q.get_d()) {}

// 1 inside, 0 outside, -1 undecided; v is known up to +-err.
int FastMembership::classify(double v, double err, const Bracket& lo, const Bracket& hi) const {
  if (v + err < lo.dn || v - err > hi.up) return 0;
  if (v - err >= lo.up && v + err <= hi.dn) return 1;
  return -1;
}

bool FastMembership::contains(const SamplePoint& x) const {
  int c1 = classify(x.t1, 0, lo1_, hi1_);
  if (c1 == 0) return false;
  int c2 = classify(x.t2, 0, lo2_, hi2_);
  if (c2 == 0) return false;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double a = p_ * x.t1, b = q_ * x.t2;
  double u = x.t3 - a - b;
  double err = 4 * eps * (std::fabs(x.t3) + std::fabs(a) + std::fabs(b)) + 1e-300;
  int c3 = classify(u, err, lo3_, hi3_);
  if (c3 == 0) return false;
  if (c1 == 1 && c2 == 1 && c3 == 1) return true;
  return box_.contains(x.exact());
}

bool FastMembership::contains_inverse(const SamplePoint& x) const {
  int c1 = classify(-x.t1, 0, lo1_, hi1_);
  if (c1 == 0) return false;
  int c2 = classify(-x.t2, 0, lo2_, hi2_);
  if (c2 == 0) return false;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double m = x.t1 * x.t2, a = p_ * x.t1, b = q_ * x.t2;
  double u = m - x.t3 + a + b;
  double err = 6 * eps * (std::fabs(m) + std::fabs(x.t3) + std::fabs(a) + std::fabs(b)) + 1e-300;
  int c3 = classify(u, err, lo3_, hi3_);
  if (c3 == 0) return false;
  if (c1 == 1 && c2 == 1 && c3 == 1) return true;
  return box_.contains(inv(x.exact()));
}

namespace {

constexpr std::uint64_t kBlock = 1u << 16;

struct WindowSampler {
  double lo1, len1, lo2, len2, lo3, len3, p, q;
  explicit WindowSampler(const BishearBox& w)
      : lo1(w.i1.lo.get_d()),
        len1(Rational(w.i1.hi - w.i1.lo).get_d()),
        lo2(w.i2.lo.get_d()),
        len2(Rational(w.i2.hi - w.i2.lo).get_d()),
        lo3(w.i3.lo.get_d()),
        len3(Rational(w.i3.hi - w.i3.lo).get_d()),
        p(w.p.get_d()),
        q(w.q.get_d()) {}
  template <class Rng>
  SamplePoint draw(Rng& rng) const {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double t1 = lo1 + len1 * u01(rng);
    double t2 = lo2 + len2 * u01(rng);
    double u = lo3 + len3 * u01(rng);
    return {t1, t2, u + p * t1 + q * t2};
  }
};

}  // namespace

McEstimate mc_volume(const PointPredicate& membership, const BishearBox& window, std::uint64_t samples,
                     std::uint64_t seed, int jobs) {
  McEstimate out;
  out.samples = samples;
  if (samples == 0) return out;
  const WindowSampler sampler(window);
  const std::uint64_t blocks = (samples + kBlock - 1) / kBlock;
  std::vector<std::uint64_t> hits(blocks, 0);
  parallel_for(blocks, jobs, [&](std::size_t k) {
    std::mt19937_64 rng(derive_seed(seed, k));
    std::uint64_t n = std::min<std::uint64_t>(kBlock, samples - k * kBlock);
    std::uint64_t h = 0;
    for (std::uint64_t i = 0; i < n; ++i)
      if (membership(sampler.draw(rng))) ++h;
    hits[k] = h;
  });
  for (auto h : hits) out.hits += h;
  const double vol = window.volume().get_d();
  const double f = static_cast<double>(out.hits) / static_cast<double>(samples);
  out.estimate = vol * f;
  out.std_error = vol * std::sqrt(f * (1 - f) / static_cast<double>(samples));
  return out;
}

McEstimate mc_volume_exact(const std::function<bool(const GroupElement&)>& membership, const BishearBox& window,
                           std::uint64_t samples, std::uint64_t seed, int jobs) {
  return mc_volume([&](const SamplePoint& x) { return membership(x.exact()); }, window, samples, seed, jobs);
}

McEstimate mc_pair_integral(const std::function<double(const GroupElement&, const GroupElement&)>& f,
                            const BishearBox& w1, const BishearBox& w2, std::uint64_t samples, std::uint64_t seed,
                            int jobs) {
  McEstimate out;
  out.samples = samples;
  if (samples == 0) return out;
  const WindowSampler s1(w1), s2(w2);
  const std::uint64_t blocks = (samples + kBlock - 1) / kBlock;
  std::vector<double> sum(blocks, 0), sum2(blocks, 0);
  parallel_for(blocks, jobs, [&](std::size_t k) {
    std::mt19937_64 rng(derive_seed(seed, k));
    std::uint64_t n = std::min<std::uint64_t>(kBlock, samples - k * kBlock);
    for (std::uint64_t i = 0; i < n; ++i) {
      const SamplePoint x = s1.draw(rng);
      const SamplePoint y = s2.draw(rng);
      const double v = f(x.exact(), y.exact());
      sum[k] += v;
      sum2[k] += v * v;
    }
  });
  double total = 0, total2 = 0;
  for (std::size_t k = 0; k < blocks; ++k) {
    total += sum[k];
    total2 += sum2[k];
  }
  const double n = static_cast<double>(samples);
  const double mean = total / n;
  const double var = std::max(0.0, total2 / n - mean * mean);
  const double vol = Rational(w1.volume() * w2.volume()).get_d();
  out.estimate = vol * mean;
  out.std_error = vol * std::sqrt(var / n);
  return out;
}

}  // namespace hcf

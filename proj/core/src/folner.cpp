#include "hcf/folner.hpp"

#include <algorithm>
#include <random>

#include "hcf/parallel.hpp"

namespace hcf {

GroupElement phi(const BoxParams& params, const Lattice& z) {
  return {2 * params.alpha * z[0], 2 * params.beta * z[1], 2 * params.gamma * z[2]};
}

BoxParams product_bound(const BoxParams& p1, const BoxParams& p2) {
  return {p1.alpha + p2.alpha, p1.beta + p2.beta, p1.gamma + p2.gamma + p1.alpha * p2.beta};
}

BoxParams inverse_bound(const BoxParams& p) { return {p.alpha, p.beta, p.gamma + p.alpha * p.beta}; }

AxisBox product_bounds(const AxisBox& x, const GroupElement& g, const AxisBox& y) {
  AxisBox out;
  bool first = true;
  for (const Rational* a1 : {&x.x1.lo, &x.x1.hi})
    for (const Rational* a2 : {&x.x2.lo, &x.x2.hi})
      for (const Rational* a3 : {&x.x3.lo, &x.x3.hi})
        for (const Rational* b1 : {&y.x1.lo, &y.x1.hi})
          for (const Rational* b2 : {&y.x2.lo, &y.x2.hi})
            for (const Rational* b3 : {&y.x3.lo, &y.x3.hi}) {
              GroupElement v = mul(mul(GroupElement{*a1, *a2, *a3}, g), GroupElement{*b1, *b2, *b3});
              if (first) {
                out = {{v.t1, v.t1}, {v.t2, v.t2}, {v.t3, v.t3}};
                first = false;
                continue;
              }
              out.x1 = {rmin(out.x1.lo, v.t1), rmax(out.x1.hi, v.t1)};
              out.x2 = {rmin(out.x2.lo, v.t2), rmax(out.x2.hi, v.t2)};
              out.x3 = {rmin(out.x3.lo, v.t3), rmax(out.x3.hi, v.t3)};
            }
  return out;
}

TilingReport tiling_check(const BoxParams& params, long lattice_radius, const TilingOptions& opts, int jobs) {
  TilingReport rep;
  rep.params = params;
  rep.radius = lattice_radius;
  const BishearBox unit = box(params);
  std::vector<Lattice> zs;
  for (long a = -lattice_radius; a <= lattice_radius; ++a)
    for (long b = -lattice_radius; b <= lattice_radius; ++b)
      for (long c = -lattice_radius; c <= lattice_radius; ++c) zs.push_back({a, b, c});
  std::vector<BishearBox> tiles;
  std::vector<AxisBox> tb;
  for (const auto& z : zs) {
    GroupElement g{2 * params.alpha * z[0], 2 * params.beta * z[1], opts.t3_step * params.gamma * z[2]};
    tiles.push_back(right_translate(unit, g));
    tb.push_back(tiles.back().bounds());
  }
  const std::size_t n = tiles.size();
  std::vector<std::vector<TileOverlap>> found(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!overlaps(tb[i], tb[j])) continue;
      Rational v = intersect_volume(tiles[i], tiles[j]);
      if (v > 0) found[i].push_back({zs[i], zs[j], v});
    }
  });
  rep.pairs_checked = n * (n - 1) / 2;
  for (auto& f : found)
    for (auto& o : f) {
      rep.max_overlap_volume = rmax(rep.max_overlap_volume, o.volume);
      rep.overlaps.push_back(std::move(o));
    }

  // Inner window covered by the tiles: full columns in t1, as many t2 columns as the
  // shear of the outer columns allows, and the t3 range left after that shear.
  const Rational span1 = (2 * lattice_radius + 1) * params.alpha;
  long r2 = lattice_radius;
  Rational half3;
  for (; r2 >= 0; --r2) {
    half3 = (2 * lattice_radius + 1) * params.gamma - 2 * params.alpha * params.beta * r2;
    if (half3 > 0) break;
  }
  const Rational span2 = (2 * r2 + 1) * params.beta;
  rep.window = box({span1, span2, half3});
  rep.window_volume = rep.window.volume();
  Rational covered = 0;
  for (const auto& t : tiles) covered += intersect_volume(t, rep.window);
  rep.uncovered_volume = rep.window_volume - covered;
  rep.pass = rep.overlaps.empty() && rep.uncovered_volume == 0;
  return rep;
}

ContainmentReport product_containment_check(const BoxParams& p1, const BoxParams& p2, std::uint64_t samples,
                                            std::uint64_t seed) {
  return product_containment_check(p1, p2, product_bound(p1, p2), samples, seed);
}

ContainmentReport product_containment_check(const BoxParams& p1, const BoxParams& p2, const BoxParams& target,
                                            std::uint64_t samples, std::uint64_t seed) {
  ContainmentReport rep;
  const BishearBox t = box(target);
  const BishearBox x = box(p1), y = box(p2);
  for (const auto& a : x.vertices())
    for (const auto& b : y.vertices()) {
      ++rep.corner_products;
      if (rep.holds && !t.contains(mul(a, b))) {
        rep.holds = false;
        rep.witness = std::array<GroupElement, 2>{a, b};
      }
    }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto draw = [&](const BoxParams& p) {
    return GroupElement{p.alpha * from_double(u(rng)), p.beta * from_double(u(rng)), p.gamma * from_double(u(rng))};
  };
  for (std::uint64_t i = 0; i < samples; ++i) {
    GroupElement a = draw(p1), b = draw(p2);
    ++rep.sampled_products;
    if (rep.holds && !t.contains(mul(a, b))) {
      rep.holds = false;
      rep.witness = std::array<GroupElement, 2>{a, b};
    }
  }
  return rep;
}

Rational folner_ratio(const GroupElement& g, const BishearBox& f) {
  const Rational v = f.volume();
  return 2 * (v - intersect_volume(left_translate(g, f), f)) / v;
}

Rational folner_ratio(const GroupElement& g, const BoxParams& params) { return folner_ratio(g, box(params)); }

McEstimate inverse_symmetry_ratio(const BoxParams& params, std::uint64_t samples, std::uint64_t seed, int jobs) {
  const BishearBox f = box(params);
  const FastMembership m(f);
  McEstimate e = mc_volume([&](const SamplePoint& x) { return m.contains(x) != m.contains_inverse(x); },
                           box(inverse_bound(params)), samples, seed, jobs);
  const double v = f.volume().get_d();
  e.estimate /= v;
  e.std_error /= v;
  return e;
}

std::vector<FolnerRow> folner_table(const std::vector<GroupElement>& k, const std::vector<BoxParams>& params) {
  std::vector<FolnerRow> rows;
  for (const auto& p : params) {
    FolnerRow row{p, {}, 0};
    for (const auto& g : k) {
      row.ratios.push_back(folner_ratio(g, p));
      row.max_ratio = rmax(row.max_ratio, row.ratios.back());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace hcf

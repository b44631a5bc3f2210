#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "hcf/shearbox.hpp"

namespace hcf {

using Lattice = std::array<long, 3>;

// c(2 gamma j3) b(2 beta j2) a(2 alpha j1)
GroupElement phi(const BoxParams& params, const Lattice& z);

// I(a+a', b+b', g+g'+a b') contains I(a,b,g) I(a',b',g').
BoxParams product_bound(const BoxParams& p1, const BoxParams& p2);

// I(a, b, g + a b) contains I(a,b,g)^{-1}.
BoxParams inverse_bound(const BoxParams& p);

// Exact axis bounds of X g Y for axis boxes X, Y (every coordinate is multilinear).
AxisBox product_bounds(const AxisBox& x, const GroupElement& g, const AxisBox& y);

struct TilingOptions {
  // Lattice step along t3 in units of gamma; 2 gives the tiling.
  Rational t3_step = 2;
};

struct TileOverlap {
  Lattice z;
  Lattice w;
  Rational volume;
};

struct TilingReport {
  BoxParams params;
  long radius = 0;
  std::uint64_t pairs_checked = 0;
  std::vector<TileOverlap> overlaps;
  Rational max_overlap_volume = 0;
  BishearBox window;
  Rational window_volume = 0;
  Rational uncovered_volume = 0;
  bool pass = false;
};

TilingReport tiling_check(const BoxParams& params, long lattice_radius, const TilingOptions& opts = {}, int jobs = 1);

struct ContainmentReport {
  bool holds = true;
  std::uint64_t corner_products = 0;
  std::uint64_t sampled_products = 0;
  std::optional<std::array<GroupElement, 2>> witness;
};

ContainmentReport product_containment_check(const BoxParams& p1, const BoxParams& p2, std::uint64_t samples,
                                            std::uint64_t seed);
ContainmentReport product_containment_check(const BoxParams& p1, const BoxParams& p2, const BoxParams& target,
                                            std::uint64_t samples, std::uint64_t seed);

// lambda(gF delta F) / lambda(F), exact.
Rational folner_ratio(const GroupElement& g, const BoxParams& params);
Rational folner_ratio(const GroupElement& g, const BishearBox& f);

// Monte Carlo estimate of lambda(F delta F^{-1}) / lambda(F).
McEstimate inverse_symmetry_ratio(const BoxParams& params, std::uint64_t samples, std::uint64_t seed, int jobs = 1);

struct FolnerRow {
  BoxParams params;
  std::vector<Rational> ratios;
  Rational max_ratio;
};

std::vector<FolnerRow> folner_table(const std::vector<GroupElement>& k, const std::vector<BoxParams>& params);

}  // namespace hcf

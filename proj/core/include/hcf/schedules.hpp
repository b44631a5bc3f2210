#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hcf/cf_engine.hpp"

namespace hcf {

struct SpacerOptions {
  double epsilon = 0.1;
  double delta = 0.1;
  int order_k = 2;
  std::uint64_t windows = 64;
  int retries = 32;
  int jobs = 1;
};

struct SpacerReport {
  double worst_distance = 0;  // over the accepted attempt
  double best_failed_distance = 0;
  std::uint64_t windows_checked = 0;
  int attempts = 0;
};

// s : {-r, ..., r} -> {0, ..., d_size - 1}
struct SpacerMap {
  long r = 0;
  std::vector<int> values;
  SpacerReport report;

  int at(long t) const { return values.at(static_cast<std::size_t>(t + r)); }
};

SpacerMap deljunco_spacer(std::size_t d_size, long r, const SpacerOptions& opts, std::uint64_t seed);

// L1 distance between distr_{0<=t<N}(s(h_1+t), ..., s(h_k+t)) and the uniform product measure.
double window_distance(const SpacerMap& s, std::size_t d_size, const std::vector<long>& offsets, long length);

struct MixingConfig {
  BoxParams f0{1, 1, 1};
  // (w1, w2, r): |h1| < w1, |h2| < w2, |h3| < r.
  Lattice h_dims{1, 1, 2};
  // Growth w = n^3, r = 4^n r0 instead of the fixed dims above.
  bool growth_dims = false;
  long r0 = 2;
  Lattice d_grid{2, 2, 2};
  // Defaults 1/n and 1/n^2 when unset.
  std::optional<double> epsilon;
  std::optional<double> delta;
  int order_k = 2;
  std::uint64_t spacer_windows = 64;
  int spacer_retries = 32;
  std::string spacer_mode = "random";  // random | constant
  std::uint64_t seed = 1;
  std::size_t budget = 100000;
  bool gamma_integer = false;
  std::uint64_t quadrature_samples = 256;
  int jobs = 1;
};

struct AsymmetricConfig {
  MixingConfig mixing;
  std::string spacer_placement = "cumulative";  // cumulative | pointwise
};

struct InfiniteConfig {
  BoxParams f0{1, 1, 1};
  Rational separation_factor = 1;
};

Schedule build_mixing(int levels, const MixingConfig& config);
Schedule build_asymmetric(int levels, bool gamma_integer, const AsymmetricConfig& config);
Schedule build_infinite(int levels, const InfiniteConfig& config);

// Gap pattern of the asymmetric step indexed by j mod 5.
Rational asymmetric_gap(long j);

// Centered grid of m1 x m2 x m3 cell centres in I(params).
std::vector<GroupElement> centered_grid(const BoxParams& params, const Lattice& counts);

struct QuadratureEstimate {
  double dirac = 0;
  double continuous = 0;
  double continuous_se = 0;
  double discrepancy = 0;
};

// Dirac comb vs Haar average of lambda(Ax cap By) / lambda(F) over x, y in S.
QuadratureEstimate quadrature_discrepancy(const BishearBox& a, const BishearBox& b, const BishearBox& f,
                                          const BoxParams& s, const std::vector<GroupElement>& d,
                                          std::uint64_t samples, std::uint64_t seed);

struct Thm51Report {
  ConditionResult cond_i{"i", true, {}};
  ConditionResult cond_ii{"ii", true, {}};
  ConditionResult cond_iii{"iii", true, {}};
  std::vector<Rational> partial_products;
  bool products_increasing = false;
  bool pass = false;
};

Thm51Report check_thm51(const Schedule& s);

Json to_json(const Thm51Report& r);
Json build_report(const Schedule& s);

}  // namespace hcf

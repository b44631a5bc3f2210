#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hcf/group.hpp"
#include "hcf/rational.hpp"

namespace hcf {

// Parameters of I(alpha, beta, gamma) = {|t1| <= alpha, |t2| <= beta, |t3| <= gamma}.
struct BoxParams {
  Rational alpha;
  Rational beta;
  Rational gamma;

  friend bool operator==(const BoxParams& a, const BoxParams& b) {
    return a.alpha == b.alpha && a.beta == b.beta && a.gamma == b.gamma;
  }
};

// Axis-aligned bounds in (t1, t2, t3).
struct AxisBox {
  Interval x1;
  Interval x2;
  Interval x3;
};

// Closed intervals; a shared face counts as no overlap.
bool overlaps(const AxisBox& a, const AxisBox& b);

// {(t1,t2,t3) : t1 in i1, t2 in i2, t3 - p t1 - q t2 in i3}
struct BishearBox {
  Interval i1;
  Interval i2;
  Interval i3;
  Rational p;
  Rational q;

  Rational volume() const { return i1.length() * i2.length() * i3.length(); }
  bool empty() const { return i1.degenerate() || i2.degenerate() || i3.degenerate(); }
  bool contains(const GroupElement& x) const;
  std::array<GroupElement, 8> vertices() const;
  AxisBox bounds() const;

  friend bool operator==(const BishearBox& a, const BishearBox& b) {
    return a.i1 == b.i1 && a.i2 == b.i2 && a.i3 == b.i3 && a.p == b.p && a.q == b.q;
  }
};

BishearBox box(const BoxParams& params);
BishearBox axis_box(const Interval& x1, const Interval& x2, const Interval& x3);

BishearBox left_translate(const GroupElement& g, const BishearBox& b);
BishearBox right_translate(const BishearBox& b, const GroupElement& g);

// Exact volume of the intersection of any number of boxes with arbitrary shears.
Rational intersect_volume(const BishearBox& a, const BishearBox& b);
Rational intersect_volume(std::span<const BishearBox> boxes);

// Outer box contains b (corner test; boxes are convex).
bool contains(const BishearBox& outer, const BishearBox& b);

struct Region {
  std::vector<BishearBox> parts;

  friend bool operator==(const Region& a, const Region& b) { return a.parts == b.parts; }
};

Rational volume(const Region& r);
Region left_translate(const GroupElement& g, const Region& r);
Region right_translate(const Region& r, const GroupElement& g);
Rational intersect_volume(const Region& a, const Region& b);
bool is_disjoint(const Region& a, const Region& b);
bool contains(const BishearBox& outer, const Region& r);
bool contains(const Region& r, const GroupElement& x);
AxisBox bounds(const Region& r);
BoxParams bounding_box(const Region& r);
BoxParams bounding_box(const BishearBox& b);

// Requires one common (p, q) across all parts; throws SHEAR_MISMATCH otherwise.
Region multi_intersect_central(const std::vector<Region>& regions);

// Sample coordinates are exact dyadic rationals.
struct SamplePoint {
  double t1;
  double t2;
  double t3;

  GroupElement exact() const;
};

// Membership with a floating-point filter and an exact rational fallback.
class FastMembership {
 public:
  explicit FastMembership(const BishearBox& b);
  bool contains(const SamplePoint& x) const;
  // Tests x^{-1} in the box.
  bool contains_inverse(const SamplePoint& x) const;
  const BishearBox& box() const { return box_; }

 private:
  struct Bracket {
    double dn;
    double up;
  };
  static Bracket bracket(const Rational& x);
  int classify(double v, double err, const Bracket& lo, const Bracket& hi) const;

  BishearBox box_;
  Bracket lo1_, hi1_, lo2_, hi2_, lo3_, hi3_;
  double p_, q_;
};

struct McEstimate {
  double estimate = 0;
  double std_error = 0;
  std::uint64_t samples = 0;
  std::uint64_t hits = 0;
};

using PointPredicate = std::function<bool(const SamplePoint&)>;

// Uniform sampling over the window; sheared windows are sampled up to double rounding.
McEstimate mc_volume(const PointPredicate& membership, const BishearBox& window, std::uint64_t samples,
                     std::uint64_t seed, int jobs = 1);
McEstimate mc_volume_exact(const std::function<bool(const GroupElement&)>& membership, const BishearBox& window,
                           std::uint64_t samples, std::uint64_t seed, int jobs = 1);

// Monte Carlo value of the integral of f over w1 x w2 with uniform sample points.
McEstimate mc_pair_integral(const std::function<double(const GroupElement&, const GroupElement&)>& f,
                            const BishearBox& w1, const BishearBox& w2, std::uint64_t samples, std::uint64_t seed,
                            int jobs = 1);

}  // namespace hcf

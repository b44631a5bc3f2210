#include "hcf/group.hpp"

namespace hcf {

GroupElement identity() { return {0, 0, 0}; }
GroupElement gen_a(const Rational& t) { return {t, 0, 0}; }
GroupElement gen_b(const Rational& t) { return {0, t, 0}; }
GroupElement gen_c(const Rational& t) { return {0, 0, t}; }

GroupElement mul(const GroupElement& g, const GroupElement& h) {
  return {g.t1 + h.t1, g.t2 + h.t2, g.t3 + h.t3 + g.t1 * h.t2};
}

GroupElement inv(const GroupElement& g) { return {-g.t1, -g.t2, g.t1 * g.t2 - g.t3}; }

GroupElement commutator(const GroupElement& g, const GroupElement& h) {
  return mul(mul(g, h), mul(inv(g), inv(h)));
}

// a(t) <-> b(t), c(t) -> c(-t).
GroupElement flip(const GroupElement& g) { return {g.t2, g.t1, g.t1 * g.t2 - g.t3}; }

GroupElement power(const GroupElement& g, long k) {
  // g^k has t3 = k t3 + k(k-1)/2 t1 t2
  Rational kk(k);
  Rational tri = kk * (kk - 1) / 2;
  return {kk * g.t1, kk * g.t2, kk * g.t3 + tri * g.t1 * g.t2};
}

bool is_central(const GroupElement& g) { return g.t1 == 0 && g.t2 == 0; }
GroupElement center_part(const GroupElement& g) { return gen_c(g.t3); }

GroupElement from_abc(const AbcCoords& s) { return {s.s1, s.s2, s.s3 + s.s1 * s.s2}; }
AbcCoords to_abc(const GroupElement& g) { return {g.t1, g.t2, g.t3 - g.t1 * g.t2}; }

std::ostream& operator<<(std::ostream& os, const GroupElement& g) {
  return os << '(' << to_string(g.t1) << ", " << to_string(g.t2) << ", " << to_string(g.t3) << ')';
}

}  // namespace hcf

#pragma once

#include <ostream>

#include "hcf/rational.hpp"

namespace hcf {

// (t1, t2, t3) is the matrix [[1, t1, t3], [0, 1, t2], [0, 0, 1]] = c(t3) b(t2) a(t1).
struct GroupElement {
  Rational t1;
  Rational t2;
  Rational t3;

  friend bool operator==(const GroupElement& g, const GroupElement& h) {
    return g.t1 == h.t1 && g.t2 == h.t2 && g.t3 == h.t3;
  }
};

GroupElement identity();
GroupElement gen_a(const Rational& t);
GroupElement gen_b(const Rational& t);
GroupElement gen_c(const Rational& t);

GroupElement mul(const GroupElement& g, const GroupElement& h);
GroupElement inv(const GroupElement& g);
GroupElement commutator(const GroupElement& g, const GroupElement& h);
GroupElement flip(const GroupElement& g);
GroupElement power(const GroupElement& g, long k);

bool is_central(const GroupElement& g);
GroupElement center_part(const GroupElement& g);

inline GroupElement operator*(const GroupElement& g, const GroupElement& h) { return mul(g, h); }

// Coordinates of g = a(s1) b(s2) c(s3).
struct AbcCoords {
  Rational s1;
  Rational s2;
  Rational s3;
};

GroupElement from_abc(const AbcCoords& s);
AbcCoords to_abc(const GroupElement& g);

std::ostream& operator<<(std::ostream& os, const GroupElement& g);

}  // namespace hcf

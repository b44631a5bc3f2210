#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace hcf {

using Rational = mpq_class;

// Accepts "p/q", "p" and finite decimals such as "-1.25".
Rational parse_rational(std::string_view text);

// Always "p/q" with q > 0 in lowest terms.
std::string to_string(const Rational& x);

// 12 significant digits.
std::string to_decimal(const Rational& x);

double to_double(const Rational& x);

Rational rabs(const Rational& x);
Rational rmin(const Rational& a, const Rational& b);
Rational rmax(const Rational& a, const Rational& b);
mpz_class floor_int(const Rational& x);
mpz_class ceil_int(const Rational& x);

struct Interval {
  Rational lo;
  Rational hi;

  Rational length() const { return hi > lo ? Rational(hi - lo) : Rational(0); }
  bool degenerate() const { return !(hi > lo); }
  bool contains(const Rational& x) const { return lo <= x && x <= hi; }
  Interval shifted(const Rational& s) const { return {lo + s, hi + s}; }
  friend bool operator==(const Interval& a, const Interval& b) { return a.lo == b.lo && a.hi == b.hi; }
};

Interval intersect(const Interval& a, const Interval& b);

// Exact dyadic rational from a finite double.
Rational from_double(double x);

}  // namespace hcf

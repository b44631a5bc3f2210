#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hcf/group.hpp"
#include "hcf/json_io.hpp"
#include "hcf/rational.hpp"

namespace hcf {

// Spectral multiplicity: a positive count or infinity.
struct Multiplicity {
  bool infinite = false;
  unsigned long count = 1;

  static Multiplicity inf() { return {true, 0}; }
  static Multiplicity of(unsigned long n) { return {false, n}; }
  bool operator==(const Multiplicity&) const = default;
};
Multiplicity operator+(const Multiplicity& a, const Multiplicity& b);
std::string to_string(const Multiplicity& m);

struct PlanarAtom {
  Rational weight;
  Rational alpha, beta;
  Multiplicity mult;
  bool operator==(const PlanarAtom&) const = default;
};

struct CenterAtom {
  Rational weight;
  Rational gamma;
  Multiplicity mult;
  bool operator==(const CenterAtom&) const = default;
};

// Symbolic continuous component. An absent mass means infinite (e.g. Lebesgue).
struct ContinuousTag {
  std::string name;
  std::optional<Rational> mass;
  Multiplicity mult;
  bool operator==(const ContinuousTag&) const = default;
};

struct SpectralTypeDescriptor {
  std::vector<PlanarAtom> planar_atoms;
  std::optional<ContinuousTag> planar_continuous;
  std::vector<CenterAtom> center_atoms;
  std::optional<ContinuousTag> center_continuous;

  bool empty() const;
  // Sorted atoms, equal points merged.
  SpectralTypeDescriptor normalized() const;
  bool operator==(const SpectralTypeDescriptor&) const = default;
};

// Throws ConfigError on negative weights or a center atom at 0.
void validate(const SpectralTypeDescriptor& d);
// Direct sum of the underlying representations.
SpectralTypeDescriptor direct_sum(const SpectralTypeDescriptor& a, const SpectralTypeDescriptor& b);

enum class RestrictionTarget { Center, H2a };
RestrictionTarget parse_restriction_target(const std::string& s);

// One component of a restricted spectral type. Points are in the coordinates
// of the subgroup dual: (gamma) for the center, (gamma, alpha) for {c(t3)a(t1)}.
struct SpectralTerm {
  enum class Kind { Atom, Line, Tag } kind = Kind::Atom;
  std::vector<Rational> point;
  std::optional<Rational> weight;  // nullopt = infinite
  std::string tag;
  Multiplicity mult;
  bool operator==(const SpectralTerm&) const = default;
};

struct RestrictedType {
  RestrictionTarget target = RestrictionTarget::Center;
  std::vector<SpectralTerm> terms;
  bool operator==(const RestrictedType&) const = default;
};

RestrictedType restrict_type(const SpectralTypeDescriptor& d, RestrictionTarget target);
// Merges two restricted types over the same subgroup.
RestrictedType combine(const RestrictedType& a, const RestrictedType& b);

// Decomposition of pi_gamma (x) pi_gamma'.
SpectralTypeDescriptor tensor_rule(const Rational& gamma, const Rational& gamma_prime);

// One-dimensional representation e^{i(alpha t1 + beta t2)}.
std::complex<double> eval_pi_ab(double alpha, double beta, const GroupElement& g);

// Uniform grid x_k = -half_width + k*step, k = 0..count-1.
struct Grid {
  double half_width = 0;
  double step = 0;
  std::vector<std::complex<double>> values;

  double x(std::size_t k) const { return -half_width + static_cast<double>(k) * step; }
  double norm2() const;
  static Grid make(double half_width, double step);
};

struct GammaResult {
  Grid out;
  long shift_steps = 0;
  double shift_rounding = 0;  // t1 - shift_steps*step
  double boundary_mass = 0;   // squared norm moved out of the window
};

// (pi_gamma(g) f)(x) = e^{i gamma (t3 + t2 x)} f(x + t1), zero outside the window.
GammaResult eval_pi_gamma(double gamma, const GroupElement& g, const Grid& f, int jobs = 1);

// Header line of JSON followed by little-endian complex64 samples.
void write_grid(const std::string& path, const Grid& g);
Grid read_grid(const std::string& path);

Json to_json(const SpectralTypeDescriptor& d);
SpectralTypeDescriptor descriptor_from_json(const Json& j);
Json to_json(const RestrictedType& r);

}  // namespace hcf

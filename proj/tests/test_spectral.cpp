#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "hcf/error.hpp"
#include "hcf/spectral.hpp"
#include "oracles.hpp"

using namespace hcf;

namespace {

Grid gaussian(double half_width, double step) {
  Grid f = Grid::make(half_width, step);
  for (std::size_t k = 0; k < f.values.size(); ++k) f.values[k] = std::exp(-f.x(k) * f.x(k) / 2) * std::complex<double>(1, 0.5);
  return f;
}

double distance(const Grid& a, const Grid& b) {
  double s = 0;
  for (std::size_t k = 0; k < a.values.size(); ++k) s += std::norm(a.values[k] - b.values[k]);
  return std::sqrt(s * a.step);
}

SpectralTypeDescriptor random_descriptor(oracle::Gen& gen) {
  SpectralTypeDescriptor d;
  std::uniform_int_distribution<int> count(0, 3), pick(0, 2), m(1, 3);
  for (int i = count(gen.rng()); i > 0; --i)
    d.planar_atoms.push_back({gen.positive(), Rational(pick(gen.rng())), gen.rational(3, 2), Multiplicity::of(m(gen.rng()))});
  for (int i = count(gen.rng()); i > 0; --i) {
    Rational g = Rational(pick(gen.rng()) + 1);
    d.center_atoms.push_back({gen.positive(), pick(gen.rng()) ? g : Rational(-g), Multiplicity::of(m(gen.rng()))});
  }
  if (pick(gen.rng()) == 0) d.center_continuous = ContinuousTag{"sigma3", gen.positive(), Multiplicity::of(1)};
  return d;
}

}  // namespace

TEST(Characters, UnitModulusAndTrivialOnCenter) {
  oracle::Gen gen(61);
  for (int i = 0; i < 500; ++i) {
    GroupElement g = gen.element(), h = gen.element();
    const double a = gen.rational().get_d(), b = gen.rational().get_d();
    EXPECT_NEAR(std::abs(eval_pi_ab(a, b, g)), 1, 1e-12);
    EXPECT_NEAR(std::abs(eval_pi_ab(a, b, gen_c(g.t3)) - 1.0), 0, 1e-12);
    EXPECT_EQ(eval_pi_ab(0, 0, g), std::complex<double>(1, 0));
    EXPECT_NEAR(std::abs(eval_pi_ab(a, b, g * h) - eval_pi_ab(a, b, g) * eval_pi_ab(a, b, h)), 0, 1e-9);
  }
}

TEST(Schrodinger, IdentityAndCentralPhase) {
  Grid f = gaussian(6, 1.0 / 32);
  GammaResult id = eval_pi_gamma(2, identity(), f);
  EXPECT_EQ(id.out.values, f.values);
  const double t = 0.7, gamma = 1.5;
  GammaResult c = eval_pi_gamma(gamma, gen_c(from_double(t)), f);
  for (std::size_t k = 0; k < f.values.size(); ++k)
    EXPECT_NEAR(std::abs(c.out.values[k] - std::polar(1.0, gamma * t) * f.values[k]), 0, 1e-12);
  EXPECT_EQ(c.boundary_mass, 0);
}

TEST(Schrodinger, FlipConjugatesTheCentralCharacter) {
  Grid f = gaussian(4, 1.0 / 16);
  const double gamma = 0.8;
  GroupElement z = gen_c(Rational(3, 4));
  GammaResult r = eval_pi_gamma(gamma, flip(z), f);
  for (std::size_t k = 0; k < f.values.size(); ++k)
    EXPECT_NEAR(std::abs(r.out.values[k] - std::polar(1.0, -gamma * 0.75) * f.values[k]), 0, 1e-12);
}

TEST(Schrodinger, HomomorphismUpToBoundary) {
  const double step = 1.0 / 64;
  Grid f = gaussian(10, step);
  oracle::Gen gen(62);
  for (int i = 0; i < 20; ++i) {
    // t1 on the grid so that no rounding enters.
    GroupElement g{Rational(gen.rational(64, 1)) / 64, gen.rational(4, 4), gen.rational(4, 4)};
    GroupElement h{Rational(gen.rational(64, 1)) / 64, gen.rational(4, 4), gen.rational(4, 4)};
    GammaResult inner = eval_pi_gamma(1.3, h, f);
    GammaResult outer = eval_pi_gamma(1.3, g, inner.out);
    GammaResult direct = eval_pi_gamma(1.3, g * h, f);
    EXPECT_EQ(direct.shift_rounding, 0);
    EXPECT_LT(distance(outer.out, direct.out), 1e-9);
  }
}

TEST(Schrodinger, NormDefectIsBoundaryMass) {
  Grid f = gaussian(3, 1.0 / 64);
  for (double t1 : {0.0, 0.5, 1.75, -2.5, 2.9}) {
    GammaResult r = eval_pi_gamma(2, {from_double(t1), Rational(1, 3), Rational(2)}, f);
    EXPECT_NEAR(f.norm2() - r.out.norm2(), r.boundary_mass, 1e-12);
  }
  GammaResult far = eval_pi_gamma(1, gen_a(100), f);
  EXPECT_NEAR(far.boundary_mass, f.norm2(), 1e-12);
}

TEST(Schrodinger, OffGridShiftIsRecorded) {
  Grid f = gaussian(3, 0.25);
  GammaResult r = eval_pi_gamma(1, gen_a(Rational(3, 10)), f);
  EXPECT_EQ(r.shift_steps, 1);
  EXPECT_NEAR(r.shift_rounding, 0.05, 1e-12);
}

TEST(Schrodinger, GammaZeroRejected) {
  Grid f = gaussian(1, 0.5);
  try {
    eval_pi_gamma(0, identity(), f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GammaZero);
  }
}

TEST(Schrodinger, GridFileRoundTrip) {
  Grid f = gaussian(2, 0.125);
  auto path = std::filesystem::temp_directory_path() / "hcf_grid_roundtrip.bin";
  write_grid(path.string(), f);
  Grid g = read_grid(path.string());
  ASSERT_EQ(g.values.size(), f.values.size());
  EXPECT_EQ(g.step, f.step);
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    EXPECT_EQ(g.values[k].real(), static_cast<float>(f.values[k].real()));
    EXPECT_EQ(g.values[k].imag(), static_cast<float>(f.values[k].imag()));
  }
  std::filesystem::remove(path);
}

TEST(Tensor, BranchStructure) {
  SpectralTypeDescriptor d = tensor_rule(1, 2);
  ASSERT_EQ(d.center_atoms.size(), 1u);
  EXPECT_EQ(d.center_atoms[0].gamma, 3);
  EXPECT_EQ(d.center_atoms[0].mult, Multiplicity::inf());
  EXPECT_TRUE(d.planar_atoms.empty());

  SpectralTypeDescriptor z = tensor_rule(1, -1);
  EXPECT_TRUE(z.center_atoms.empty());
  ASSERT_TRUE(z.planar_continuous.has_value());
  EXPECT_EQ(z.planar_continuous->name, "lebesgue");
  EXPECT_FALSE(z.planar_continuous->mass.has_value());

  oracle::Gen gen(63);
  for (int i = 0; i < 50; ++i) {
    Rational a = gen.rational(), b = gen.rational();
    if (a == 0 || b == 0) continue;
    EXPECT_EQ(tensor_rule(a, b), tensor_rule(b, a));
  }
  EXPECT_THROW(tensor_rule(0, 1), Error);
}

TEST(Restriction, CenterOfPlanarPartIsAnAtomAtZero) {
  SpectralTypeDescriptor d;
  d.planar_atoms = {{Rational(1, 2), 1, 2, Multiplicity::of(1)}, {Rational(1, 3), -1, 0, Multiplicity::of(2)}};
  RestrictedType r = restrict_type(d, RestrictionTarget::Center);
  ASSERT_EQ(r.terms.size(), 1u);
  EXPECT_EQ(r.terms[0].kind, SpectralTerm::Kind::Atom);
  EXPECT_EQ(r.terms[0].point, std::vector<Rational>{0});
  EXPECT_EQ(*r.terms[0].weight, Rational(5, 6));
  EXPECT_EQ(r.terms[0].mult, Multiplicity::of(3));
}

TEST(Restriction, CenterAtomsHaveInfiniteMultiplicity) {
  SpectralTypeDescriptor d;
  d.center_atoms = {{1, 2, Multiplicity::of(1)}, {3, -1, Multiplicity::of(2)}};
  RestrictedType r = restrict_type(d, RestrictionTarget::Center);
  ASSERT_EQ(r.terms.size(), 2u);
  for (const auto& t : r.terms) {
    EXPECT_NE(t.point[0], 0);
    EXPECT_EQ(t.mult, Multiplicity::inf());
  }
}

TEST(Restriction, EmptyStaysEmpty) {
  SpectralTypeDescriptor d;
  EXPECT_TRUE(restrict_type(d, RestrictionTarget::Center).terms.empty());
  EXPECT_TRUE(restrict_type(d, RestrictionTarget::H2a).terms.empty());
}

TEST(Restriction, H2aProjectsPlanarAndSpreadsCenter) {
  SpectralTypeDescriptor d;
  d.planar_atoms = {{1, 2, 5, Multiplicity::of(1)}, {2, 2, -1, Multiplicity::of(1)}};
  d.center_atoms = {{4, 3, Multiplicity::of(2)}};
  RestrictedType r = restrict_type(d, RestrictionTarget::H2a);
  ASSERT_EQ(r.terms.size(), 2u);
  EXPECT_EQ(r.terms[0].kind, SpectralTerm::Kind::Atom);
  EXPECT_EQ(r.terms[0].point, (std::vector<Rational>{0, 2}));
  EXPECT_EQ(*r.terms[0].weight, 3);
  EXPECT_EQ(r.terms[0].mult, Multiplicity::of(2));
  EXPECT_EQ(r.terms[1].kind, SpectralTerm::Kind::Line);
  EXPECT_EQ(r.terms[1].point, std::vector<Rational>{3});
  EXPECT_EQ(r.terms[1].mult, Multiplicity::of(2));
}

TEST(Restriction, AdditiveOverDirectSums) {
  oracle::Gen gen(64);
  for (int i = 0; i < 200; ++i) {
    SpectralTypeDescriptor a = random_descriptor(gen), b = random_descriptor(gen);
    for (auto t : {RestrictionTarget::Center, RestrictionTarget::H2a})
      EXPECT_EQ(restrict_type(direct_sum(a, b), t), combine(restrict_type(a, t), restrict_type(b, t)));
  }
}

TEST(Descriptor, JsonRoundTripAndValidation) {
  oracle::Gen gen(65);
  for (int i = 0; i < 50; ++i) {
    SpectralTypeDescriptor d = random_descriptor(gen).normalized();
    EXPECT_EQ(descriptor_from_json(to_json(d)), d);
  }
  Json bad = to_json(SpectralTypeDescriptor{});
  bad["center_atoms"] = Json::array({{{"weight", "1"}, {"point", "0"}, {"multiplicity", 1}}});
  EXPECT_THROW(descriptor_from_json(bad), Error);
}

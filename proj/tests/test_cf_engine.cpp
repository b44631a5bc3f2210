#include <gtest/gtest.h>

#include "hcf/cf_engine.hpp"
#include "hcf/error.hpp"
#include "hcf/schedules.hpp"
#include "oracles.hpp"

using namespace hcf;

namespace {

// F_0 = I(1,1,1); C_1 stacks three copies along t3 and C_2 three along t1.
Schedule toy() {
  std::vector<BoxParams> f{{1, 1, 1}, {1, 1, 5}, {5, 1, 6}};
  std::vector<std::vector<GroupElement>> c{{gen_c(-2), gen_c(0), gen_c(3)}, {gen_a(-2), gen_a(0), gen_a(2)}};
  return Schedule(MeasureKind::Finite, "manual", f, c);
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::ConfigError;
}

Cylinder random_cylinder(const Schedule& s, int level, oracle::Gen& gen) {
  const BoxParams& p = s.f_params(level);
  std::uniform_int_distribution<int> cut(0, 7);
  auto piece = [&](const Rational& h) -> Interval {
    int a = cut(gen.rng()), b = cut(gen.rng());
    if (a == b) b = (a + 1) % 8;
    if (a > b) std::swap(a, b);
    return {-h + h * a / 4, -h + h * (b + 1) / 4};
  };
  return make_cylinder(s, level, Region{{axis_box(piece(p.alpha), piece(p.beta), piece(p.gamma))}});
}

}  // namespace

TEST(Engine, ToyScheduleValidates) {
  Schedule s = toy();
  ValidationReport v = validate(s);
  EXPECT_TRUE(v.pass);
  ASSERT_EQ(v.spacer_summands.size(), 2u);
  // (40 - 3*8) / (3*8) and (240 - 3*40) / (3*40)
  EXPECT_EQ(v.spacer_summands[0], Rational(2, 3));
  EXPECT_EQ(v.spacer_summands[1], Rational(1));
  EXPECT_EQ(s.mu_x(2), Rational(80, 3));
}

TEST(Engine, OverlappingCopiesFailConditionFour) {
  std::vector<BoxParams> f{{1, 1, 1}, {1, 1, 4}};
  Schedule bad(MeasureKind::Finite, "manual", f, {{gen_c(-2), gen_c(Rational(1, 2)), gen_c(2)}});
  ValidationReport v = validate(bad);
  EXPECT_FALSE(v.pass);
  const auto& iv = v.conditions[3];
  EXPECT_EQ(iv.name, "IV");
  ASSERT_FALSE(iv.failures.empty());
  EXPECT_NE(iv.failures[0].detail.find("c[1]"), std::string::npos);
  EXPECT_NE(iv.failures[0].detail.find("c[2]"), std::string::npos);
}

TEST(Engine, ContainmentAndSizeFailures) {
  std::vector<BoxParams> f{{1, 1, 1}, {1, 1, 2}};
  Schedule outside(MeasureKind::Finite, "manual", f, {{gen_c(-2), gen_c(2)}});
  EXPECT_FALSE(validate(outside).conditions[2].pass);
  Schedule single(MeasureKind::Finite, "manual", f, {{gen_c(0)}});
  EXPECT_FALSE(validate(single).conditions[1].pass);
}

TEST(Engine, CylinderIdentities) {
  Schedule s = toy();
  oracle::Gen gen(41);
  for (int i = 0; i < 100; ++i) {
    for (int n = 0; n < 2; ++n) {
      Cylinder a = random_cylinder(s, n, gen);
      const Rational mu = measure(a, s).value;
      // mu([A]_n) = lambda(A) / lambda(F_n) * mu(X_n)
      EXPECT_EQ(mu, volume(a.region) / s.haar(n) * s.mu_x(n));
      // [A]_n is the disjoint union of the [Ac]_{n+1}, each of measure mu / #C.
      Rational sum = 0;
      for (const auto& c : s.C(n + 1)) {
        Cylinder piece = make_cylinder(s, n + 1, right_translate(a.region, c));
        const Rational m = measure(piece, s).value;
        EXPECT_EQ(m * static_cast<unsigned long>(s.C(n + 1).size()), mu);
        sum += m;
      }
      EXPECT_EQ(sum, mu);
      EXPECT_EQ(measure(refine(a, 2, s), s).value, mu);
    }
  }
}

TEST(Engine, RefiningFnGivesCopies) {
  Schedule s = toy();
  Cylinder f0 = full_cylinder(s, 0);
  Cylinder r = refine(f0, 1, s);
  EXPECT_EQ(r.region.parts.size(), 3u);
  EXPECT_EQ(volume(r.region), 3 * s.haar(0));
}

TEST(Engine, ActionPreservesMeasureAndComposes) {
  Schedule s = toy();
  oracle::Gen gen(42);
  for (int i = 0; i < 50; ++i) {
    Cylinder a = random_cylinder(s, 0, gen);
    GroupElement g = gen_c(Rational(gen.rational(1, 4)) / 2), h = gen_a(Rational(gen.rational(1, 4)) / 2);
    Cylinder ga = act(g, a, s);
    EXPECT_EQ(measure(ga, s).value, measure(a, s).value);
    Cylinder two = act(h, ga, s);
    Cylinder one = act(h * g, a, s);
    const int m = std::max(two.level, one.level);
    Cylinder x = refine(two, m, s), y = refine(one, m, s);
    EXPECT_EQ(intersect_volume(x.region, y.region), volume(x.region));
  }
}

TEST(Engine, CorrelationMatchesDirectIntersection) {
  Schedule s = toy();
  oracle::Gen gen(43);
  for (int i = 0; i < 50; ++i) {
    Cylinder a = random_cylinder(s, 0, gen), b = random_cylinder(s, 0, gen);
    GroupElement g = gen_c(gen.rational(2, 2));
    CorrelationValue v = correlate(g, a, b, s);
    EXPECT_EQ(v.unresolved, 0);
    // Independent path: move A up to level 2, refine B there and intersect.
    Cylinder ga = refine(act(g, a, s), 2, s), b2 = refine(b, 2, s);
    EXPECT_EQ(v.value, intersect_volume(ga.region, b2.region) / s.copies(2));
  }
  Cylinder f = full_cylinder(s, 0);
  EXPECT_EQ(correlate(identity(), f, f, s).value, measure(f, s).value);
}

TEST(Engine, UnresolvedMassAndStrictMode) {
  Schedule s = toy();
  Cylinder f = full_cylinder(s, 0);
  // c(3) pushes the top copy of F_0 out of F_2.
  CorrelationValue v = correlate(gen_c(3), f, f, s);
  EXPECT_GT(v.unresolved, 0);
  EngineOptions strict;
  strict.strict = true;
  EXPECT_EQ(code_of([&] { correlate(gen_c(3), f, f, s, strict); }), ErrorCode::Overflow);
  EXPECT_EQ(code_of([&] { act(gen_c(100), f, s); }), ErrorCode::Overflow);
  EXPECT_EQ(code_of([&] { refine(f, 2, s, 4); }), ErrorCode::BudgetExceeded);
  EXPECT_EQ(code_of([&] { refine(f, 3, s); }), ErrorCode::LevelOutOfRange);
}

TEST(Engine, JsonRoundTripAndHash) {
  Schedule s = build_asymmetric(6, true, {});
  Json j = s.to_json();
  Schedule back = Schedule::from_json(j);
  EXPECT_EQ(back.hash(), s.hash());
  EXPECT_EQ(back.to_json().dump(), j.dump());

  Json tampered = j;
  tampered["f_params"][1][2] = "1000/1";
  EXPECT_EQ(code_of([&] { Schedule::from_json(tampered); }), ErrorCode::ScheduleMismatch);
  Json extra = j;
  extra["colour"] = "blue";
  EXPECT_EQ(code_of([&] { Schedule::from_json(extra); }), ErrorCode::ConfigError);

  Cylinder foreign = full_cylinder(toy(), 0);
  EXPECT_EQ(code_of([&] { measure(foreign, s); }), ErrorCode::ScheduleMismatch);
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Engine, CylinderOutsideFnRejected) {
  Schedule s = toy();
  EXPECT_EQ(code_of([&] { make_cylinder(s, 0, Region{{box({2, 1, 1})}}); }), ErrorCode::ConfigError);
}

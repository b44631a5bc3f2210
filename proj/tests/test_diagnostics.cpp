#include <gtest/gtest.h>

#include "hcf/diagnostics.hpp"
#include "hcf/error.hpp"
#include "hcf/schedules.hpp"

using namespace hcf;

namespace {

const Schedule& asym5() {
  static const Schedule s = build_asymmetric(5, true, {});
  return s;
}

// Copies j of C_{n+1} with j = 2 mod 5 whose three lower neighbours exist.
Rational forward_fraction(int n) {
  int count = 0;
  for (int j = -n; j <= n; ++j)
    if (j - 3 >= -n && ((j % 5) + 5) % 5 == 2) ++count;
  return Rational(5 * count, 2 * n + 1);
}

}  // namespace

TEST(Asymmetry, ClassesAddUpAndTargetsAgree) {
  const Schedule& s = asym5();
  TestSet a = slab_set(s, 3, 4);
  AsymmetryReport r = asymmetry_report(s, 3, a.cylinder, a.cylinder, a.cylinder, a.cylinder, {});
  EXPECT_TRUE(r.additive);
  EXPECT_EQ(r.class_sum, r.total);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.target, row.target_direct) << row.residue;
    EXPECT_EQ(row.gap, rmax(rabs(row.value - row.target), rabs(row.value + row.unresolved - row.target)));
  }
  EXPECT_EQ(r.measure_a, measure(a.cylinder, s).value);
}

TEST(Asymmetry, WholeSpaceFactorsAreDropped) {
  const Schedule& s = asym5();
  TestSet a = slab_set(s, 3, 4);
  AsymmetryReport r = asymmetry_report(s, 3, a.cylinder, std::nullopt, std::nullopt, std::nullopt, {});
  EXPECT_TRUE(r.additive);
  // Only A remains: the classes split mu(A) up to the copies that have no lower neighbour.
  EXPECT_LE(r.total, r.measure_a);
  for (const auto& row : r.rows) EXPECT_EQ(row.target, r.measure_a / 5);
}

TEST(Asymmetry, ForwardAndBackwardStatistics) {
  const Schedule& s = asym5();
  TestSet thin = slab_set(s, 3, Rational(1, 2));
  DirectionStats d = direction_stats(s, 3, thin.cylinder, {});
  EXPECT_EQ(d.forward_unresolved, 0);
  EXPECT_EQ(d.forward, forward_fraction(3) * d.measure_a);
  EXPECT_EQ(d.forward, Rational(5, 7) * d.measure_a);
  EXPECT_EQ(d.backward, 0);
  EXPECT_EQ(d.backward_unresolved, 0);
}

TEST(Asymmetry, RejectsNonAsymmetricLevels) {
  const Schedule& s = asym5();
  TestSet a = slab_set(s, 2, 1);
  EXPECT_THROW(asymmetry_report(s, 2, a.cylinder, a.cylinder, a.cylinder, a.cylinder, {}), Error);
}

TEST(Rigidity, PeriodElementMovesFiveSeventhsAtLevelThree) {
  const Schedule& s = asym5();
  RigidityReport r = rigidity_test(s, {3}, -1, {});
  EXPECT_EQ(r.family_level, 3);
  bool seen = false;
  for (const auto& row : r.rows) {
    if (row.set_id == "L3:full" && row.element == "period") {
      EXPECT_EQ(row.delta_upper, Rational(10, 7) * row.measure);
      seen = true;
    }
    EXPECT_LE(row.delta_lower, row.delta_upper);
  }
  EXPECT_TRUE(seen);
  ASSERT_EQ(r.sup_by_n.size(), 1u);
}

TEST(Rigidity, IdentityGivesZero) {
  const Schedule& s = asym5();
  for (const auto& t : dyadic_family(s, 3)) {
    CorrelationValue v = correlate(identity(), t.cylinder, t.cylinder, s);
    EXPECT_EQ(2 * (measure(t.cylinder, s).value - v.value), 0);
  }
}

TEST(Families, DyadicCellsPartitionFn) {
  const Schedule& s = asym5();
  auto fam = dyadic_family(s, 2, 1);
  ASSERT_EQ(fam.size(), 9u);
  Rational sum = 0;
  for (std::size_t i = 0; i + 1 < fam.size(); ++i) sum += measure(fam[i].cylinder, s).value;
  EXPECT_EQ(sum, measure(fam.back().cylinder, s).value);
}

TEST(Correlation, DecayRowsAreConsistent) {
  MixingConfig cfg;
  Schedule s = build_mixing(3, cfg);
  TestSet a{"full", full_cylinder(s, 0)};
  CorrelationReport r = correlation_decay(s, Direction::C, {0, 1, 5}, a, a, {});
  ASSERT_EQ(r.rows.size(), 3u);
  const Rational u = s.mu_x(s.levels());
  EXPECT_EQ(r.rows[0].value, measure(a.cylinder, s).value / u);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.gap, rmax(rabs(row.value - row.target), rabs(row.value + row.unresolved - row.target)));
    EXPECT_LE(row.gap, r.max_gap);
  }
  EXPECT_EQ(parse_direction("b"), Direction::B);
  EXPECT_EQ(along(Direction::A, 2), gen_a(2));
}

TEST(Correlation, MixingSequenceCoversFamilies) {
  MixingConfig cfg;
  Schedule s = build_mixing(3, cfg);
  CorrelationReport r = mixing_sequence_test(s, {1, 2}, {});
  EXPECT_EQ(r.rows.size(), 2u * 9u * 9u);
  for (const auto& row : r.rows) EXPECT_GE(row.gap, 0);
}

TEST(Reports, SerialiseDeterministically) {
  const Schedule& s = asym5();
  TestSet a = slab_set(s, 3, 4);
  AsymmetryReport r1 = asymmetry_report(s, 3, a.cylinder, a.cylinder, a.cylinder, a.cylinder, {});
  ReportOptions par;
  par.jobs = 4;
  AsymmetryReport r2 = asymmetry_report(s, 3, a.cylinder, a.cylinder, a.cylinder, a.cylinder, par);
  EXPECT_EQ(to_csv(r1), to_csv(r2));
  EXPECT_EQ(to_json(r1).dump(), to_json(r2).dump());
}

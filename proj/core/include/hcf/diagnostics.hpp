#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "hcf/cf_engine.hpp"

namespace hcf {

struct TestSet {
  std::string id;
  Cylinder cylinder;
};

// Sub-boxes of F_level obtained by cutting every coordinate range into 2^depth pieces, plus the full box.
std::vector<TestSet> dyadic_family(const Schedule& s, int level, int depth = 1);
// I(alpha_n, alpha_n) x [centre - width/2, centre + width/2] at the given level.
TestSet slab_set(const Schedule& s, int level, const Rational& width, const Rational& centre = 0);

struct ReportOptions {
  EngineOptions engine;
  // Measures are divided by mu_m(X_m) for this m; -1 means the deepest level.
  int norm_level = -1;
  int jobs = 1;
};

struct CorrelationRow {
  std::string label;
  GroupElement g;
  int n = -1;
  std::string a_id;
  std::string b_id;
  Rational value;
  Rational unresolved;
  Rational target;
  Rational gap;
  int level_used = 0;
};

struct CorrelationReport {
  std::string kind;
  std::string schedule_hash;
  int norm_level = 0;
  Rational spacer_partial_sum;
  std::vector<CorrelationRow> rows;
  Rational max_gap;
};

enum class Direction { A, B, C };
Direction parse_direction(const std::string& s);
GroupElement along(Direction d, const Rational& t);

CorrelationReport correlation_decay(const Schedule& s, Direction dir, const std::vector<Rational>& t_grid,
                                    const TestSet& a, const TestSet& b, const ReportOptions& opts = {});

CorrelationReport mixing_sequence_test(const Schedule& s, const std::vector<int>& n_range,
                                       const ReportOptions& opts = {});

struct RigidityRow {
  int n = 0;
  std::string element;  // period | literal | control
  GroupElement h;
  std::string set_id;
  Rational measure;
  Rational delta_upper;
  Rational delta_lower;
};

struct RigidityReport {
  std::string schedule_hash;
  int family_level = 0;
  std::vector<RigidityRow> rows;
  // sup over the family of the upper bound, per n, for the period element
  std::vector<std::pair<int, Rational>> sup_by_n;
  std::vector<std::pair<int, Rational>> control_sup_by_n;
};

RigidityReport rigidity_test(const Schedule& s, const std::vector<int>& n_range, int family_level = -1,
                             const ReportOptions& opts = {});

struct AsymmetryRow {
  int residue = 0;
  std::array<Rational, 3> offsets;
  Rational value;
  Rational unresolved;
  Rational target;
  Rational target_direct;
  Rational gap;
};

struct AsymmetryReport {
  int n = 0;
  std::string schedule_hash;
  std::string placement;
  std::array<AsymmetryRow, 5> rows;
  Rational total;
  Rational total_unresolved;
  Rational class_sum;
  bool additive = false;
  Rational measure_a;
  // max over residues of the gap (unresolved mass counted against it), divided by mu(A)
  Rational relative_gap;
};

// A, B, C, D are level-n cylinders; an empty optional stands for the whole space.
AsymmetryReport asymmetry_report(const Schedule& s, int n, const Cylinder& a, const std::optional<Cylinder>& b,
                                 const std::optional<Cylinder>& c, const std::optional<Cylinder>& d,
                                 const ReportOptions& opts = {});

struct DirectionStats {
  int n = 0;
  Rational measure_a;
  Rational forward;   // 5 mu(A cap T_l A cap T_{l^3} A)
  Rational backward;  // 5 mu(A cap T_{l^2} A cap T_{l^3} A)
  Rational forward_unresolved;
  Rational backward_unresolved;
};

DirectionStats direction_stats(const Schedule& s, int n, const Cylinder& a, const ReportOptions& opts = {});

// Offsets (o_B, o_C, o_D) of the limiting pattern for copies with j = residue mod 5.
std::array<Rational, 3> asymmetry_offsets(const LevelAnnotation& ann, int residue);

std::string to_csv(const CorrelationReport& r);
Json to_json(const CorrelationReport& r);
std::string to_csv(const RigidityReport& r);
Json to_json(const RigidityReport& r);
std::string to_csv(const AsymmetryReport& r);
Json to_json(const AsymmetryReport& r);
std::string to_csv(const DirectionStats& r);
Json to_json(const DirectionStats& r);

}  // namespace hcf

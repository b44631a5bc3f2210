#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hcf/folner.hpp"
#include "hcf/json_io.hpp"
#include "hcf/shearbox.hpp"

namespace hcf {

enum class MeasureKind { Finite, Infinite };
enum class StepKind { Manual, Mixing, Asymmetric, Infinite };

std::string_view to_string(MeasureKind k);
std::string_view to_string(StepKind k);

// Per-step data recorded by the builders; annotation n describes C_{n+1} and F_{n+1}.
struct LevelAnnotation {
  StepKind step = StepKind::Manual;
  std::optional<BoxParams> phi_params;
  std::optional<BoxParams> s_box;
  std::optional<BoxParams> aux_box;
  std::optional<Lattice> h_dims;
  std::vector<GroupElement> d_points;
  // D-index of s_n(0,0,t3) for t3 = -(r-1) .. r-1.
  std::vector<int> spacer_t3;
  // Lattice coordinate of each element of C_{n+1}, in order.
  std::vector<Lattice> lattice;
  std::optional<double> spacer_distance;
  std::optional<std::uint64_t> spacer_windows;
  std::optional<double> quadrature_error;
  // Asymmetric steps.
  std::string spacer_placement;
  std::vector<long> j_values;
  std::vector<Rational> spacer_offsets;
  std::optional<GroupElement> period_element;
  std::optional<GroupElement> l_element;
};

class Schedule {
 public:
  Schedule() = default;
  Schedule(MeasureKind kind, std::string construction, std::vector<BoxParams> f_params,
           std::vector<std::vector<GroupElement>> c_sets, std::vector<LevelAnnotation> annotations = {});

  MeasureKind kind() const { return kind_; }
  const std::string& construction() const { return construction_; }
  int levels() const { return static_cast<int>(f_params_.size()) - 1; }
  const BoxParams& f_params(int n) const;
  const BishearBox& F(int n) const;
  // C_k for 1 <= k <= levels().
  const std::vector<GroupElement>& C(int k) const;
  const std::vector<AxisBox>& copy_bounds(int k) const;
  const LevelAnnotation& annotation(int n) const;
  const std::vector<LevelAnnotation>& annotations() const { return annotations_; }

  const Rational& haar(int n) const { return haar_.at(static_cast<std::size_t>(n)); }
  // prod_{k <= n} #C_k
  const Rational& copies(int n) const { return copies_.at(static_cast<std::size_t>(n)); }
  // mu_n(X_n) = lambda(F_n) / prod_{k <= n} #C_k
  Rational mu_x(int n) const { return haar(n) / copies(n); }

  const std::string& hash() const { return hash_; }
  Json to_json() const;
  static Schedule from_json(const Json& j);

 private:
  void finalize();

  MeasureKind kind_ = MeasureKind::Finite;
  std::string construction_;
  std::vector<BoxParams> f_params_;
  std::vector<std::vector<GroupElement>> c_sets_;
  std::vector<LevelAnnotation> annotations_;
  std::vector<BishearBox> f_boxes_;
  std::vector<std::vector<AxisBox>> copy_bounds_;
  std::vector<Rational> haar_;
  std::vector<Rational> copies_;
  std::string hash_;
};

std::string sha256_hex(const std::string& data);

struct Cylinder {
  int level = 0;
  Region region;
  std::string schedule_hash;
};

Cylinder make_cylinder(const Schedule& s, int level, Region region);
Cylinder full_cylinder(const Schedule& s, int level);

struct MeasureValue {
  Rational value;
  bool normalized = false;
};

struct EngineOptions {
  std::size_t budget = 100000;
  int max_level = -1;  // -1: deepest computed level
  bool strict = false;  // unresolved mass raises OVERFLOW
};

struct ConditionFailure {
  int level = 0;
  std::string detail;
};

struct ConditionResult {
  std::string name;
  bool pass = true;
  std::vector<ConditionFailure> failures;
};

struct ValidationReport {
  std::vector<ConditionResult> conditions;
  // Spacer series: summand_n = lambda(F_{n+1} \ F_n C_{n+1}) / (lambda(F_n) #C_{n+1}).
  std::vector<Rational> spacer_summands;
  std::vector<Rational> partial_sums;
  std::vector<Rational> partial_products;
  bool product_diverging = false;
  // Folner ratios of F_n for a(1), b(1), c(1).
  std::vector<Rational> folner_max;
  bool pass = false;
};

ValidationReport validate(const Schedule& s);

Cylinder refine(const Cylinder& c, int to_level, const Schedule& s, std::size_t budget = 100000);
MeasureValue measure(const Cylinder& c, const Schedule& s, bool normalized = false);
Cylinder act(const GroupElement& g, const Cylinder& c, const Schedule& s, std::size_t budget = 100000);

struct CorrelationValue {
  Rational value;       // determined part, raw units
  Rational unresolved;  // raw mass left undetermined at the deepest level
  int level_used = 0;
};

// mu(T_g A cap B)
CorrelationValue correlate(const GroupElement& g, const Cylinder& a, const Cylinder& b, const Schedule& s,
                           const EngineOptions& opts = {});
// mu(T_{g_0} A_0 cap ... cap T_{g_k} A_k)
CorrelationValue multi_correlate(const std::vector<GroupElement>& gs, const std::vector<Cylinder>& cs,
                                 const Schedule& s, const EngineOptions& opts = {});

// Parts of the cylinder refined to level m whose bounds meet the query box.
std::vector<BishearBox> parts_meeting(const Schedule& s, const Cylinder& c, int m, const BishearBox& query);

Json to_json(const ValidationReport& r);

}  // namespace hcf

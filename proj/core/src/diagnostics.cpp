#include "hcf/diagnostics.hpp"

#include <sstream>

#include "hcf/error.hpp"
#include "hcf/parallel.hpp"
#include "hcf/schedules.hpp"

namespace hcf {

namespace {

Rational unit_measure(const Schedule& s, int norm_level) {
  const int m = norm_level < 0 ? s.levels() : norm_level;
  return s.mu_x(m);
}

Rational raw_measure(const Schedule& s, const Cylinder& c) { return measure(c, s).value; }

Rational spacer_partial_sum(const Schedule& s) {
  Rational sum = 0;
  for (int k = 1; k <= s.levels(); ++k) {
    const Rational base = s.haar(k - 1) * static_cast<unsigned long>(s.C(k).size());
    sum += (s.haar(k) - base) / base;
  }
  return sum;
}

Rational gap_bound(const Rational& value, const Rational& unresolved, const Rational& target) {
  return rmax(rabs(value - target), rabs(value + unresolved - target));
}

std::string csv_pair(const Rational& x) { return to_string(x) + "," + to_decimal(x); }

Json json_pair(const Rational& x) { return Json{{"exact", to_string(x)}, {"decimal", to_decimal(x)}}; }

std::string element_text(const GroupElement& g) {
  return to_string(g.t1) + " " + to_string(g.t2) + " " + to_string(g.t3);
}

Cylinder at_level(const Schedule& s, const Cylinder& c, int n, const EngineOptions& opts) {
  if (c.level > n) throw Error(ErrorCode::LevelOutOfRange, "test cylinder above the report level");
  return refine(c, n, s, opts.budget);
}

const LevelAnnotation& asymmetric_annotation(const Schedule& s, int n) {
  const LevelAnnotation& ann = s.annotation(n);
  if (ann.step != StepKind::Asymmetric || !ann.l_element || !ann.period_element)
    throw Error(ErrorCode::ConfigError, "level " + std::to_string(n) + " is not an asymmetric step");
  return ann;
}

}  // namespace

std::vector<TestSet> dyadic_family(const Schedule& s, int level, int depth) {
  const BoxParams& f = s.f_params(level);
  const long pieces = 1L << depth;
  auto cut = [&](const Rational& half, long i) -> Interval {
    return {-half + 2 * half * i / pieces, -half + 2 * half * (i + 1) / pieces};
  };
  std::vector<TestSet> out;
  for (long i = 0; i < pieces; ++i)
    for (long j = 0; j < pieces; ++j)
      for (long k = 0; k < pieces; ++k) {
        std::ostringstream id;
        id << "L" << level << ":d" << depth << ":" << i << "." << j << "." << k;
        out.push_back({id.str(), make_cylinder(s, level, Region{{axis_box(cut(f.alpha, i), cut(f.beta, j), cut(f.gamma, k))}})});
      }
  out.push_back({"L" + std::to_string(level) + ":full", full_cylinder(s, level)});
  return out;
}

TestSet slab_set(const Schedule& s, int level, const Rational& width, const Rational& centre) {
  const BoxParams& f = s.f_params(level);
  Interval x3{centre - width / 2, centre + width / 2};
  std::string id = "L" + std::to_string(level) + ":slab:" + to_string(width) + "@" + to_string(centre);
  return {id, make_cylinder(s, level, Region{{axis_box({-f.alpha, f.alpha}, {-f.beta, f.beta}, x3)}})};
}

Direction parse_direction(const std::string& s) {
  if (s == "a") return Direction::A;
  if (s == "b") return Direction::B;
  if (s == "c") return Direction::C;
  throw Error(ErrorCode::ConfigError, "direction must be a, b or c");
}

GroupElement along(Direction d, const Rational& t) {
  switch (d) {
    case Direction::A: return gen_a(t);
    case Direction::B: return gen_b(t);
    case Direction::C: return gen_c(t);
  }
  return identity();
}

CorrelationReport correlation_decay(const Schedule& s, Direction dir, const std::vector<Rational>& t_grid,
                                    const TestSet& a, const TestSet& b, const ReportOptions& opts) {
  CorrelationReport rep;
  rep.kind = "correlation_decay";
  rep.schedule_hash = s.hash();
  rep.norm_level = opts.norm_level < 0 ? s.levels() : opts.norm_level;
  rep.spacer_partial_sum = spacer_partial_sum(s);
  const Rational u = unit_measure(s, opts.norm_level);
  const Rational target = raw_measure(s, a.cylinder) * raw_measure(s, b.cylinder) / (u * u);
  rep.rows.resize(t_grid.size());
  parallel_for(t_grid.size(), opts.jobs, [&](std::size_t i) {
    CorrelationRow row;
    row.label = std::string(1, "abc"[static_cast<int>(dir)]) + "(" + to_string(t_grid[i]) + ")";
    row.g = along(dir, t_grid[i]);
    row.a_id = a.id;
    row.b_id = b.id;
    CorrelationValue v = correlate(row.g, a.cylinder, b.cylinder, s, opts.engine);
    row.value = v.value / u;
    row.unresolved = v.unresolved / u;
    row.target = target;
    row.gap = gap_bound(row.value, row.unresolved, target);
    row.level_used = v.level_used;
    rep.rows[i] = std::move(row);
  });
  for (const auto& r : rep.rows) rep.max_gap = rmax(rep.max_gap, r.gap);
  return rep;
}

CorrelationReport mixing_sequence_test(const Schedule& s, const std::vector<int>& n_range, const ReportOptions& opts) {
  CorrelationReport rep;
  rep.kind = "mixing_sequence";
  rep.schedule_hash = s.hash();
  rep.norm_level = opts.norm_level < 0 ? s.levels() : opts.norm_level;
  rep.spacer_partial_sum = spacer_partial_sum(s);
  const Rational u = unit_measure(s, opts.norm_level);
  struct Job {
    int n;
    std::size_t a, b;
  };
  std::vector<std::vector<TestSet>> families;
  std::vector<Job> jobs;
  std::vector<GroupElement> elems;
  for (std::size_t idx = 0; idx < n_range.size(); ++idx) {
    const int n = n_range[idx];
    if (n < 1 || n >= s.levels()) throw Error(ErrorCode::LevelOutOfRange, "mixing test level out of range");
    const LevelAnnotation& ann = s.annotation(n);
    if (!ann.phi_params) throw Error(ErrorCode::ConfigError, "no lattice map recorded at level " + std::to_string(n));
    families.push_back(dyadic_family(s, n - 1));
    elems.push_back(phi(*ann.phi_params, {0, 0, 1}));
    for (std::size_t i = 0; i < families.back().size(); ++i)
      for (std::size_t j = 0; j < families.back().size(); ++j) jobs.push_back({static_cast<int>(idx), i, j});
  }
  rep.rows.resize(jobs.size());
  parallel_for(jobs.size(), opts.jobs, [&](std::size_t k) {
    const Job& jb = jobs[k];
    const auto& fam = families[static_cast<std::size_t>(jb.n)];
    const TestSet& a = fam[jb.a];
    const TestSet& b = fam[jb.b];
    CorrelationRow row;
    row.n = n_range[static_cast<std::size_t>(jb.n)];
    row.label = "phi_n(e3)";
    row.g = elems[static_cast<std::size_t>(jb.n)];
    row.a_id = a.id;
    row.b_id = b.id;
    CorrelationValue v = correlate(row.g, a.cylinder, b.cylinder, s, opts.engine);
    row.value = v.value / u;
    row.unresolved = v.unresolved / u;
    row.target = raw_measure(s, a.cylinder) * raw_measure(s, b.cylinder) / (u * u);
    row.gap = gap_bound(row.value, row.unresolved, row.target);
    row.level_used = v.level_used;
    rep.rows[k] = std::move(row);
  });
  for (const auto& r : rep.rows) rep.max_gap = rmax(rep.max_gap, r.gap);
  return rep;
}

RigidityReport rigidity_test(const Schedule& s, const std::vector<int>& n_range, int family_level,
                             const ReportOptions& opts) {
  RigidityReport rep;
  rep.schedule_hash = s.hash();
  if (n_range.empty()) return rep;
  rep.family_level = family_level >= 0 ? family_level : *std::min_element(n_range.begin(), n_range.end());
  const auto family = dyadic_family(s, rep.family_level);
  struct Job {
    int n;
    std::string element;
    GroupElement h;
    std::size_t set;
  };
  std::vector<Job> jobs;
  for (int n : n_range) {
    const LevelAnnotation& ann = asymmetric_annotation(s, n);
    if (n < rep.family_level) throw Error(ErrorCode::LevelOutOfRange, "family level above the rigidity level");
    const std::vector<std::pair<std::string, GroupElement>> elems{
        {"period", *ann.period_element}, {"literal", phi(*ann.phi_params, {0, 0, 5})}, {"control", gen_a(1)}};
    for (const auto& [name, h] : elems)
      for (std::size_t i = 0; i < family.size(); ++i) jobs.push_back({n, name, h, i});
  }
  rep.rows.resize(jobs.size());
  parallel_for(jobs.size(), opts.jobs, [&](std::size_t k) {
    const Job& jb = jobs[k];
    const TestSet& a = family[jb.set];
    RigidityRow row;
    row.n = jb.n;
    row.element = jb.element;
    row.h = jb.h;
    row.set_id = a.id;
    row.measure = raw_measure(s, a.cylinder);
    CorrelationValue v = correlate(jb.h, a.cylinder, a.cylinder, s, opts.engine);
    row.delta_upper = 2 * (row.measure - v.value);
    row.delta_lower = rmax(Rational(0), Rational(2 * (row.measure - v.value - v.unresolved)));
    rep.rows[k] = std::move(row);
  });
  for (int n : n_range) {
    Rational sup = 0, csup = 0;
    for (const auto& r : rep.rows) {
      if (r.n != n) continue;
      if (r.element == "period") sup = rmax(sup, r.delta_upper);
      if (r.element == "control") csup = rmax(csup, r.delta_lower);
    }
    rep.sup_by_n.push_back({n, sup});
    rep.control_sup_by_n.push_back({n, csup});
  }
  return rep;
}

std::array<Rational, 3> asymmetry_offsets(const LevelAnnotation& ann, int residue) {
  // o_k(j) = k - (P_j - P_{j-k}), P the spacer offset of copy j.
  std::array<Rational, 3> out;
  const bool cumulative = ann.spacer_placement != "pointwise";
  for (int k = 1; k <= 3; ++k) {
    Rational rise = 0;
    if (cumulative) {
      for (int i = 1; i <= k; ++i) rise += asymmetric_gap(residue - i);
    } else {
      rise = asymmetric_gap(residue) - asymmetric_gap(residue - k);
    }
    out[static_cast<std::size_t>(k - 1)] = k - rise;
  }
  return out;
}

AsymmetryReport asymmetry_report(const Schedule& s, int n, const Cylinder& a, const std::optional<Cylinder>& b,
                                 const std::optional<Cylinder>& c, const std::optional<Cylinder>& d,
                                 const ReportOptions& opts) {
  const LevelAnnotation& ann = asymmetric_annotation(s, n);
  if (n + 1 > s.levels()) throw Error(ErrorCode::LevelOutOfRange, "asymmetry report needs C_{n+1}");
  AsymmetryReport rep;
  rep.n = n;
  rep.schedule_hash = s.hash();
  rep.placement = ann.spacer_placement;
  const Cylinder an = at_level(s, a, n, opts.engine);
  std::vector<std::optional<Cylinder>> others;
  for (const auto* x : {&b, &c, &d}) others.push_back(*x ? std::optional<Cylinder>(at_level(s, **x, n, opts.engine)) : std::nullopt);
  rep.measure_a = raw_measure(s, an);

  const GroupElement l = *ann.l_element;
  const std::vector<GroupElement> powers{identity(), l, power(l, 2), power(l, 3)};
  const Cylinder base = refine(an, n + 1, s, opts.engine.budget);
  const std::size_t copies = s.C(n + 1).size();

  auto correlate_with = [&](const Cylinder& first, const std::vector<GroupElement>& shifts) {
    std::vector<GroupElement> gs{shifts[0]};
    std::vector<Cylinder> cs{first};
    for (std::size_t i = 0; i < 3; ++i)
      if (others[i]) {
        gs.push_back(shifts[i + 1]);
        cs.push_back(*others[i]);
      }
    return multi_correlate(gs, cs, s, opts.engine);
  };

  std::vector<Cylinder> classes(5, Cylinder{n + 1, {}, s.hash()});
  for (std::size_t i = 0; i < base.region.parts.size(); ++i) {
    const long j = ann.j_values[i % copies];
    classes[static_cast<std::size_t>(((j % 5) + 5) % 5)].region.parts.push_back(base.region.parts[i]);
  }
  std::array<CorrelationValue, 5> vals;
  std::array<CorrelationValue, 5> tgts;
  parallel_for(10, opts.jobs, [&](std::size_t k) {
    const int r = static_cast<int>(k % 5);
    if (k < 5) {
      vals[static_cast<std::size_t>(r)] = correlate_with(classes[static_cast<std::size_t>(r)], powers);
    } else {
      const auto o = asymmetry_offsets(ann, r);
      tgts[static_cast<std::size_t>(r)] = correlate_with(an, {identity(), gen_c(o[0]), gen_c(o[1]), gen_c(o[2])});
    }
  });
  CorrelationValue total = correlate_with(base, powers);
  rep.total = total.value;
  rep.total_unresolved = total.unresolved;

  Rational unresolved_sum = 0;
  for (int r = 0; r < 5; ++r) {
    AsymmetryRow& row = rep.rows[static_cast<std::size_t>(r)];
    row.residue = r;
    row.offsets = asymmetry_offsets(ann, r);
    row.value = vals[static_cast<std::size_t>(r)].value;
    row.unresolved = vals[static_cast<std::size_t>(r)].unresolved;
    row.target = tgts[static_cast<std::size_t>(r)].value / 5;
    if (tgts[static_cast<std::size_t>(r)].unresolved != 0)
      throw Error(ErrorCode::Overflow, "target pattern not determined at level " + std::to_string(n));
    // Same pattern by direct intersection of the level-n regions.
    std::vector<Region> regions{an.region};
    for (std::size_t i = 0; i < 3; ++i)
      if (others[i]) regions.push_back(left_translate(gen_c(row.offsets[i]), others[i]->region));
    row.target_direct = volume(multi_intersect_central(regions)) / s.copies(n) / 5;
    row.gap = gap_bound(row.value, row.unresolved, row.target);
    rep.class_sum += row.value;
    unresolved_sum += row.unresolved;
    rep.relative_gap = rmax(rep.relative_gap, row.gap);
  }
  rep.additive = rep.class_sum == rep.total && unresolved_sum == rep.total_unresolved;
  if (rep.measure_a > 0) rep.relative_gap /= rep.measure_a;
  return rep;
}

DirectionStats direction_stats(const Schedule& s, int n, const Cylinder& a, const ReportOptions& opts) {
  const LevelAnnotation& ann = asymmetric_annotation(s, n);
  const Cylinder an = at_level(s, a, n, opts.engine);
  const GroupElement l = *ann.l_element;
  DirectionStats st;
  st.n = n;
  st.measure_a = raw_measure(s, an);
  CorrelationValue f = multi_correlate({identity(), l, power(l, 3)}, {an, an, an}, s, opts.engine);
  CorrelationValue b = multi_correlate({identity(), power(l, 2), power(l, 3)}, {an, an, an}, s, opts.engine);
  st.forward = 5 * f.value;
  st.forward_unresolved = 5 * f.unresolved;
  st.backward = 5 * b.value;
  st.backward_unresolved = 5 * b.unresolved;
  return st;
}

std::string to_csv(const CorrelationReport& r) {
  std::ostringstream os;
  os << "kind,n,g,a,b,value,value_dec,unresolved,unresolved_dec,target,target_dec,gap,gap_dec,level_used\n";
  for (const auto& row : r.rows)
    os << r.kind << ',' << row.n << ',' << element_text(row.g) << ',' << row.a_id << ',' << row.b_id << ','
       << csv_pair(row.value) << ',' << csv_pair(row.unresolved) << ',' << csv_pair(row.target) << ','
       << csv_pair(row.gap) << ',' << row.level_used << '\n';
  return os.str();
}

Json to_json(const CorrelationReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"label", row.label},
                    {"n", row.n},
                    {"g", row.g},
                    {"a", row.a_id},
                    {"b", row.b_id},
                    {"value", json_pair(row.value)},
                    {"unresolved", json_pair(row.unresolved)},
                    {"target", json_pair(row.target)},
                    {"gap", json_pair(row.gap)},
                    {"level_used", row.level_used}});
  return Json{{"kind", r.kind},
              {"schedule", r.schedule_hash},
              {"norm_level", r.norm_level},
              {"spacer_partial_sum", json_pair(r.spacer_partial_sum)},
              {"max_gap", json_pair(r.max_gap)},
              {"rows", rows}};
}

std::string to_csv(const RigidityReport& r) {
  std::ostringstream os;
  os << "n,element,h,set,measure,measure_dec,delta_upper,delta_upper_dec,delta_lower,delta_lower_dec\n";
  for (const auto& row : r.rows)
    os << row.n << ',' << row.element << ',' << element_text(row.h) << ',' << row.set_id << ','
       << csv_pair(row.measure) << ',' << csv_pair(row.delta_upper) << ',' << csv_pair(row.delta_lower) << '\n';
  return os.str();
}

Json to_json(const RigidityReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"n", row.n},
                    {"element", row.element},
                    {"h", row.h},
                    {"set", row.set_id},
                    {"measure", json_pair(row.measure)},
                    {"delta_upper", json_pair(row.delta_upper)},
                    {"delta_lower", json_pair(row.delta_lower)}});
  Json sup = Json::array(), csup = Json::array();
  for (const auto& [n, v] : r.sup_by_n) sup.push_back({{"n", n}, {"sup_delta", json_pair(v)}});
  for (const auto& [n, v] : r.control_sup_by_n) csup.push_back({{"n", n}, {"sup_delta_lower", json_pair(v)}});
  bool decreasing = true;
  for (std::size_t i = 1; i < r.sup_by_n.size(); ++i)
    if (!(r.sup_by_n[i].second < r.sup_by_n[i - 1].second)) decreasing = false;
  return Json{{"schedule", r.schedule_hash}, {"family_level", r.family_level}, {"period", sup},
              {"control", csup},         {"strictly_decreasing", decreasing}, {"rows", rows}};
}

std::string to_csv(const AsymmetryReport& r) {
  std::ostringstream os;
  os << "n,residue,o_b,o_c,o_d,value,value_dec,unresolved,unresolved_dec,target,target_dec,gap,gap_dec\n";
  for (const auto& row : r.rows)
    os << r.n << ',' << row.residue << ',' << to_string(row.offsets[0]) << ',' << to_string(row.offsets[1]) << ','
       << to_string(row.offsets[2]) << ',' << csv_pair(row.value) << ',' << csv_pair(row.unresolved) << ','
       << csv_pair(row.target) << ',' << csv_pair(row.gap) << '\n';
  os << r.n << ",total,,,," << csv_pair(r.total) << ',' << csv_pair(r.total_unresolved) << ",,,,\n";
  return os.str();
}

Json to_json(const AsymmetryReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"residue", row.residue},
                    {"offsets", row.offsets},
                    {"value", json_pair(row.value)},
                    {"unresolved", json_pair(row.unresolved)},
                    {"target", json_pair(row.target)},
                    {"target_direct", json_pair(row.target_direct)},
                    {"gap", json_pair(row.gap)}});
  return Json{{"n", r.n},
              {"schedule", r.schedule_hash},
              {"placement", r.placement},
              {"rows", rows},
              {"total", json_pair(r.total)},
              {"total_unresolved", json_pair(r.total_unresolved)},
              {"class_sum", json_pair(r.class_sum)},
              {"additive", r.additive},
              {"measure_a", json_pair(r.measure_a)},
              {"relative_gap", json_pair(r.relative_gap)}};
}

std::string to_csv(const DirectionStats& r) {
  std::ostringstream os;
  os << "n,measure_a,measure_a_dec,forward,forward_dec,forward_unresolved,forward_unresolved_dec,backward,"
        "backward_dec,backward_unresolved,backward_unresolved_dec\n";
  os << r.n << ',' << csv_pair(r.measure_a) << ',' << csv_pair(r.forward) << ',' << csv_pair(r.forward_unresolved)
     << ',' << csv_pair(r.backward) << ',' << csv_pair(r.backward_unresolved) << '\n';
  return os.str();
}

Json to_json(const DirectionStats& r) {
  return Json{{"n", r.n},
              {"measure_a", json_pair(r.measure_a)},
              {"forward", json_pair(r.forward)},
              {"forward_unresolved", json_pair(r.forward_unresolved)},
              {"backward", json_pair(r.backward)},
              {"backward_unresolved", json_pair(r.backward_unresolved)}};
}

}  // namespace hcf

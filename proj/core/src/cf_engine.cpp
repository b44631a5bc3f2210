#include "hcf/cf_engine.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "hcf/error.hpp"

namespace hcf {

std::string_view to_string(MeasureKind k) { return k == MeasureKind::Finite ? "finite" : "infinite"; }

std::string_view to_string(StepKind k) {
  switch (k) {
    case StepKind::Manual: return "manual";
    case StepKind::Mixing: return "mixing";
    case StepKind::Asymmetric: return "asymmetric";
    case StepKind::Infinite: return "infinite";
  }
  return "manual";
}

namespace {

StepKind step_from(const std::string& s) {
  if (s == "manual") return StepKind::Manual;
  if (s == "mixing") return StepKind::Mixing;
  if (s == "asymmetric") return StepKind::Asymmetric;
  if (s == "infinite") return StepKind::Infinite;
  throw Error(ErrorCode::ConfigError, "unknown step kind '" + s + "'");
}

Json annotation_json(const LevelAnnotation& a) {
  Json j;
  j["step"] = std::string(to_string(a.step));
  if (a.phi_params) j["phi_params"] = *a.phi_params;
  if (a.s_box) j["s_box"] = *a.s_box;
  if (a.aux_box) j["aux_box"] = *a.aux_box;
  if (a.h_dims) j["h_dims"] = *a.h_dims;
  if (!a.d_points.empty()) j["d_points"] = a.d_points;
  if (!a.spacer_t3.empty()) j["spacer_t3"] = a.spacer_t3;
  if (!a.lattice.empty()) j["lattice"] = a.lattice;
  if (a.spacer_distance) j["spacer_distance"] = *a.spacer_distance;
  if (a.spacer_windows) j["spacer_windows"] = *a.spacer_windows;
  if (a.quadrature_error) j["quadrature_error"] = *a.quadrature_error;
  if (!a.spacer_placement.empty()) j["spacer_placement"] = a.spacer_placement;
  if (!a.j_values.empty()) j["j_values"] = a.j_values;
  if (!a.spacer_offsets.empty()) j["spacer_offsets"] = a.spacer_offsets;
  if (a.period_element) j["period_element"] = *a.period_element;
  if (a.l_element) j["l_element"] = *a.l_element;
  return j;
}

LevelAnnotation annotation_from(const Json& j) {
  require_keys(j,
               {"step", "phi_params", "s_box", "aux_box", "h_dims", "d_points", "spacer_t3", "lattice",
                "spacer_distance", "spacer_windows", "quadrature_error", "spacer_placement", "j_values",
                "spacer_offsets", "period_element", "l_element"},
               "annotation");
  LevelAnnotation a;
  a.step = step_from(j.value("step", std::string("manual")));
  if (j.contains("phi_params")) a.phi_params = j["phi_params"].get<BoxParams>();
  if (j.contains("s_box")) a.s_box = j["s_box"].get<BoxParams>();
  if (j.contains("aux_box")) a.aux_box = j["aux_box"].get<BoxParams>();
  if (j.contains("h_dims")) a.h_dims = j["h_dims"].get<Lattice>();
  if (j.contains("d_points")) a.d_points = j["d_points"].get<std::vector<GroupElement>>();
  if (j.contains("spacer_t3")) a.spacer_t3 = j["spacer_t3"].get<std::vector<int>>();
  if (j.contains("lattice")) a.lattice = j["lattice"].get<std::vector<Lattice>>();
  if (j.contains("spacer_distance")) a.spacer_distance = j["spacer_distance"].get<double>();
  if (j.contains("spacer_windows")) a.spacer_windows = j["spacer_windows"].get<std::uint64_t>();
  if (j.contains("quadrature_error")) a.quadrature_error = j["quadrature_error"].get<double>();
  if (j.contains("spacer_placement")) a.spacer_placement = j["spacer_placement"].get<std::string>();
  if (j.contains("j_values")) a.j_values = j["j_values"].get<std::vector<long>>();
  if (j.contains("spacer_offsets")) a.spacer_offsets = j["spacer_offsets"].get<std::vector<Rational>>();
  if (j.contains("period_element")) a.period_element = j["period_element"].get<GroupElement>();
  if (j.contains("l_element")) a.l_element = j["l_element"].get<GroupElement>();
  return a;
}

void check_hash(const Schedule& s, const Cylinder& c) {
  if (!c.schedule_hash.empty() && c.schedule_hash != s.hash())
    throw Error(ErrorCode::ScheduleMismatch, "cylinder belongs to schedule " + c.schedule_hash.substr(0, 12) +
                                                 ", not " + s.hash().substr(0, 12));
}

int deepest(const Schedule& s, const EngineOptions& opts) {
  if (opts.max_level < 0) return s.levels();
  if (opts.max_level > s.levels())
    throw Error(ErrorCode::LevelOutOfRange, "max_level " + std::to_string(opts.max_level) + " beyond schedule depth " +
                                                std::to_string(s.levels()));
  return opts.max_level;
}

void collect(const Schedule& s, const Region& r, int rlevel, int m, const BishearBox& query, const AxisBox& qb,
             std::vector<BishearBox>& out) {
  if (m == rlevel) {
    for (const auto& part : r.parts)
      if (overlaps(part.bounds(), qb)) out.push_back(part);
    return;
  }
  const auto& cs = s.C(m);
  const auto& cb = s.copy_bounds(m);
  std::vector<BishearBox> sub;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (!overlaps(cb[i], qb)) continue;
    BishearBox q = right_translate(query, inv(cs[i]));
    sub.clear();
    collect(s, r, rlevel, m - 1, q, q.bounds(), sub);
    for (const auto& x : sub) out.push_back(right_translate(x, cs[i]));
  }
}

struct Pending {
  BishearBox part;
  int level;
};

}  // namespace

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::IoError, "SHA-256 digest failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

Schedule::Schedule(MeasureKind kind, std::string construction, std::vector<BoxParams> f_params,
                   std::vector<std::vector<GroupElement>> c_sets, std::vector<LevelAnnotation> annotations)
    : kind_(kind),
      construction_(std::move(construction)),
      f_params_(std::move(f_params)),
      c_sets_(std::move(c_sets)),
      annotations_(std::move(annotations)) {
  if (f_params_.empty()) throw Error(ErrorCode::ConfigError, "schedule needs F_0");
  if (c_sets_.size() + 1 != f_params_.size())
    throw Error(ErrorCode::ConfigError, "schedule needs one C-set per level above 0");
  if (annotations_.size() < c_sets_.size()) annotations_.resize(c_sets_.size());
  finalize();
}

void Schedule::finalize() {
  f_boxes_.clear();
  haar_.clear();
  copies_.clear();
  copy_bounds_.assign(1, {});
  Rational prod = 1;
  for (std::size_t n = 0; n < f_params_.size(); ++n) {
    const auto& p = f_params_[n];
    if (p.alpha <= 0 || p.beta <= 0 || p.gamma <= 0)
      throw Error(ErrorCode::ConfigError, "F_" + std::to_string(n) + " parameters must be positive");
    f_boxes_.push_back(box(p));
    haar_.push_back(f_boxes_.back().volume());
    if (n > 0) {
      prod *= static_cast<unsigned long>(c_sets_[n - 1].size());
      std::vector<AxisBox> cb;
      for (const auto& c : c_sets_[n - 1]) cb.push_back(right_translate(f_boxes_[n - 1], c).bounds());
      copy_bounds_.push_back(std::move(cb));
    }
    copies_.push_back(prod);
  }
  Json j = to_json();
  j.erase("hash");
  hash_ = sha256_hex(j.dump());
}

const BoxParams& Schedule::f_params(int n) const {
  if (n < 0 || n > levels()) throw Error(ErrorCode::LevelOutOfRange, "level " + std::to_string(n) + " not in schedule");
  return f_params_[static_cast<std::size_t>(n)];
}

const BishearBox& Schedule::F(int n) const {
  if (n < 0 || n > levels()) throw Error(ErrorCode::LevelOutOfRange, "level " + std::to_string(n) + " not in schedule");
  return f_boxes_[static_cast<std::size_t>(n)];
}

const std::vector<GroupElement>& Schedule::C(int k) const {
  if (k < 1 || k > levels()) throw Error(ErrorCode::LevelOutOfRange, "C_" + std::to_string(k) + " not in schedule");
  return c_sets_[static_cast<std::size_t>(k - 1)];
}

const std::vector<AxisBox>& Schedule::copy_bounds(int k) const {
  if (k < 1 || k > levels()) throw Error(ErrorCode::LevelOutOfRange, "C_" + std::to_string(k) + " not in schedule");
  return copy_bounds_[static_cast<std::size_t>(k)];
}

const LevelAnnotation& Schedule::annotation(int n) const {
  if (n < 0 || n >= levels()) throw Error(ErrorCode::LevelOutOfRange, "no step annotation at " + std::to_string(n));
  return annotations_[static_cast<std::size_t>(n)];
}

Json Schedule::to_json() const {
  Json j;
  j["format"] = "hcf-schedule";
  j["version"] = 1;
  j["kind"] = std::string(hcf::to_string(kind_));
  j["construction"] = construction_;
  j["f_params"] = f_params_;
  j["c_sets"] = c_sets_;
  Json ann = Json::array();
  for (const auto& a : annotations_) ann.push_back(annotation_json(a));
  j["annotations"] = ann;
  if (!hash_.empty()) j["hash"] = hash_;
  return j;
}

Schedule Schedule::from_json(const Json& j) {
  require_keys(j, {"format", "version", "kind", "construction", "f_params", "c_sets", "annotations", "hash"}, "schedule");
  if (j.value("format", std::string()) != "hcf-schedule" || j.value("version", 0) != 1)
    throw Error(ErrorCode::ConfigError, "not a version 1 schedule document");
  std::string kind = j.at("kind").get<std::string>();
  if (kind != "finite" && kind != "infinite") throw Error(ErrorCode::ConfigError, "unknown schedule kind " + kind);
  std::vector<LevelAnnotation> ann;
  if (j.contains("annotations"))
    for (const auto& a : j.at("annotations")) ann.push_back(annotation_from(a));
  Schedule s(kind == "finite" ? MeasureKind::Finite : MeasureKind::Infinite, j.value("construction", std::string()),
             j.at("f_params").get<std::vector<BoxParams>>(),
             j.at("c_sets").get<std::vector<std::vector<GroupElement>>>(), std::move(ann));
  if (j.contains("hash") && j.at("hash").get<std::string>() != s.hash())
    throw Error(ErrorCode::ScheduleMismatch, "schedule content does not match its recorded hash");
  return s;
}

Cylinder make_cylinder(const Schedule& s, int level, Region region) {
  if (!contains(s.F(level), region))
    throw Error(ErrorCode::ConfigError, "cylinder region is not inside F_" + std::to_string(level));
  return {level, std::move(region), s.hash()};
}

Cylinder full_cylinder(const Schedule& s, int level) { return {level, Region{{s.F(level)}}, s.hash()}; }

ValidationReport validate(const Schedule& s) {
  ValidationReport rep;
  const int n_levels = s.levels();
  ConditionResult c1{"I", true, {}}, c2{"II", true, {}}, c3{"III", true, {}}, c4{"IV", true, {}};
  constexpr std::size_t kMaxFailures = 16;
  const std::vector<GroupElement> k{gen_a(1), gen_b(1), gen_c(1)};
  for (int n = 0; n <= n_levels; ++n) {
    Rational worst = 0;
    for (const auto& g : k) worst = rmax(worst, folner_ratio(g, s.F(n)));
    rep.folner_max.push_back(worst);
    if (n > 0 && worst > rep.folner_max[static_cast<std::size_t>(n - 1)] && c1.failures.size() < kMaxFailures)
      c1.failures.push_back({n, "Folner ratio increased to " + to_decimal(worst)});
  }
  Rational sum = 0, prod = 1;
  for (int kk = 1; kk <= n_levels; ++kk) {
    const auto& cs = s.C(kk);
    if (cs.size() < 2) {
      c2.pass = false;
      c2.failures.push_back({kk, "#C_" + std::to_string(kk) + " = " + std::to_string(cs.size())});
    }
    const BishearBox& prev = s.F(kk - 1);
    for (std::size_t i = 0; i < cs.size(); ++i) {
      if (!contains(s.F(kk), right_translate(prev, cs[i]))) {
        c3.pass = false;
        if (c3.failures.size() < kMaxFailures) {
          std::ostringstream os;
          os << "F_" << kk - 1 << " c not inside F_" << kk << " for c[" << i << "] = " << cs[i];
          c3.failures.push_back({kk, os.str()});
        }
      }
    }
    const auto& cb = s.copy_bounds(kk);
    std::vector<std::size_t> order(cs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (cb[a].x3.lo != cb[b].x3.lo) return cb[a].x3.lo < cb[b].x3.lo;
      return a < b;
    });
    for (std::size_t x = 0; x < order.size(); ++x)
      for (std::size_t y = x + 1; y < order.size(); ++y) {
        const std::size_t i = order[x], j = order[y];
        if (!(cb[j].x3.lo < cb[i].x3.hi)) break;
        if (!overlaps(cb[i], cb[j])) continue;
        Rational v = intersect_volume(right_translate(prev, cs[i]), right_translate(prev, cs[j]));
        if (v > 0) {
          c4.pass = false;
          if (c4.failures.size() < kMaxFailures) {
            std::ostringstream os;
            os << "overlap " << to_string(v) << " between c[" << std::min(i, j) << "] = " << cs[std::min(i, j)]
               << " and c[" << std::max(i, j) << "] = " << cs[std::max(i, j)];
            c4.failures.push_back({kk, os.str()});
          }
        }
      }
    const Rational base = s.haar(kk - 1) * static_cast<unsigned long>(cs.size());
    Rational summand = (s.haar(kk) - base) / base;
    sum += summand;
    prod *= s.haar(kk) / base;
    rep.spacer_summands.push_back(summand);
    rep.partial_sums.push_back(sum);
    rep.partial_products.push_back(prod);
  }
  rep.product_diverging = !rep.spacer_summands.empty() &&
                          std::all_of(rep.spacer_summands.begin(), rep.spacer_summands.end(),
                                      [](const Rational& x) { return x > 0; });
  rep.conditions = {c1, c2, c3, c4};
  rep.pass = c2.pass && c3.pass && c4.pass && (s.kind() == MeasureKind::Finite || rep.product_diverging);
  return rep;
}

Cylinder refine(const Cylinder& c, int to_level, const Schedule& s, std::size_t budget) {
  check_hash(s, c);
  if (to_level < c.level || to_level > s.levels())
    throw Error(ErrorCode::LevelOutOfRange, "cannot refine level " + std::to_string(c.level) + " cylinder to level " +
                                                std::to_string(to_level));
  Cylinder out = c;
  out.schedule_hash = s.hash();
  for (int m = c.level + 1; m <= to_level; ++m) {
    const auto& cs = s.C(m);
    if (out.region.parts.size() * cs.size() > budget)
      throw Error(ErrorCode::BudgetExceeded, "refinement to level " + std::to_string(m) + " needs " +
                                                 std::to_string(out.region.parts.size() * cs.size()) + " parts");
    Region next;
    next.parts.reserve(out.region.parts.size() * cs.size());
    for (const auto& part : out.region.parts)
      for (const auto& g : cs) next.parts.push_back(right_translate(part, g));
    out.region = std::move(next);
    out.level = m;
  }
  return out;
}

MeasureValue measure(const Cylinder& c, const Schedule& s, bool normalized) {
  check_hash(s, c);
  Rational raw = volume(c.region) / s.copies(c.level);
  if (normalized) return {raw / s.mu_x(s.levels()), true};
  return {raw, false};
}

Cylinder act(const GroupElement& g, const Cylinder& c, const Schedule& s, std::size_t budget) {
  check_hash(s, c);
  Cylinder cur = c;
  for (;;) {
    Region moved = left_translate(g, cur.region);
    if (contains(s.F(cur.level), moved)) return {cur.level, std::move(moved), s.hash()};
    if (cur.level == s.levels())
      throw Error(ErrorCode::Overflow, "translate leaves F_" + std::to_string(cur.level) + " at the deepest level");
    cur = refine(cur, cur.level + 1, s, budget);
  }
}

std::vector<BishearBox> parts_meeting(const Schedule& s, const Cylinder& c, int m, const BishearBox& query) {
  check_hash(s, c);
  if (m < c.level || m > s.levels()) throw Error(ErrorCode::LevelOutOfRange, "query level out of range");
  std::vector<BishearBox> out;
  collect(s, c.region, c.level, m, query, query.bounds(), out);
  return out;
}

CorrelationValue correlate(const GroupElement& g, const Cylinder& a, const Cylinder& b, const Schedule& s,
                           const EngineOptions& opts) {
  return multi_correlate({g, identity()}, {a, b}, s, opts);
}

CorrelationValue multi_correlate(const std::vector<GroupElement>& gs, const std::vector<Cylinder>& cs,
                                 const Schedule& s, const EngineOptions& opts) {
  if (gs.size() != cs.size() || cs.empty())
    throw Error(ErrorCode::ConfigError, "multi_correlate needs one group element per cylinder");
  for (const auto& c : cs) check_hash(s, c);
  const int last = deepest(s, opts);
  int start = 0;
  for (const auto& c : cs) start = std::max(start, c.level);
  if (start > last) throw Error(ErrorCode::LevelOutOfRange, "cylinder level beyond max_level");

  // Work in the frame of the first cylinder: mu(A_0 cap T_{h_1} A_1 cap ...), h_i = g_0^{-1} g_i.
  const GroupElement g0inv = inv(gs[0]);
  std::vector<GroupElement> h, hinv;
  for (std::size_t i = 1; i < gs.size(); ++i) {
    h.push_back(mul(g0inv, gs[i]));
    hinv.push_back(inv(h.back()));
  }

  std::vector<Rational> per_level(static_cast<std::size_t>(last + 1), Rational(0));
  std::vector<Rational> loose(static_cast<std::size_t>(last + 1), Rational(0));
  CorrelationValue out;
  out.level_used = start;
  std::vector<Pending> stack;
  for (auto it = cs[0].region.parts.rbegin(); it != cs[0].region.parts.rend(); ++it)
    stack.push_back({*it, cs[0].level});
  std::size_t processed = 0;

  std::vector<std::vector<BishearBox>> cand(h.size());
  std::vector<BishearBox> chosen;
  std::vector<AxisBox> chosen_bounds;

  while (!stack.empty()) {
    Pending cur = std::move(stack.back());
    stack.pop_back();
    if (++processed > opts.budget)
      throw Error(ErrorCode::BudgetExceeded, "correlation exceeded the part budget of " + std::to_string(opts.budget));
    const int m = cur.level;
    bool resolved = m >= start;
    for (std::size_t i = 0; resolved && i < h.size(); ++i) {
      BishearBox back = left_translate(hinv[i], cur.part);
      if (!contains(s.F(m), back)) resolved = false;
    }
    if (!resolved) {
      if (m == last) {
        loose[static_cast<std::size_t>(m)] += cur.part.volume();
        out.level_used = std::max(out.level_used, m);
        continue;
      }
      const auto& next = s.C(m + 1);
      for (auto it = next.rbegin(); it != next.rend(); ++it) stack.push_back({right_translate(cur.part, *it), m + 1});
      continue;
    }
    out.level_used = std::max(out.level_used, m);
    bool empty = false;
    for (std::size_t i = 0; i < h.size() && !empty; ++i) {
      BishearBox back = left_translate(hinv[i], cur.part);
      cand[i] = parts_meeting(s, cs[i + 1], m, back);
      for (auto& x : cand[i]) x = left_translate(h[i], x);
      empty = cand[i].empty();
    }
    if (empty) continue;
    chosen.assign(1, cur.part);
    chosen_bounds.assign(1, cur.part.bounds());
    Rational acc = 0;
    // Depth-first over one candidate per cylinder, pruning on pairwise bounds.
    auto rec = [&](auto&& self, std::size_t i) -> void {
      if (i == h.size()) {
        acc += intersect_volume(std::span<const BishearBox>(chosen));
        return;
      }
      for (const auto& x : cand[i]) {
        AxisBox xb = x.bounds();
        bool ok = true;
        for (const auto& cb : chosen_bounds)
          if (!overlaps(cb, xb)) {
            ok = false;
            break;
          }
        if (!ok) continue;
        chosen.push_back(x);
        chosen_bounds.push_back(xb);
        self(self, i + 1);
        chosen.pop_back();
        chosen_bounds.pop_back();
      }
    };
    rec(rec, 0);
    per_level[static_cast<std::size_t>(m)] += acc;
  }
  for (int m = 0; m <= last; ++m) {
    out.value += per_level[static_cast<std::size_t>(m)] / s.copies(m);
    out.unresolved += loose[static_cast<std::size_t>(m)] / s.copies(m);
  }
  if (opts.strict && out.unresolved > 0)
    throw Error(ErrorCode::Overflow, "correlation not determined within level " + std::to_string(last));
  return out;
}

Json to_json(const ValidationReport& r) {
  Json j;
  j["pass"] = r.pass;
  Json conds = Json::array();
  for (const auto& c : r.conditions) {
    Json f = Json::array();
    for (const auto& x : c.failures) f.push_back({{"level", x.level}, {"detail", x.detail}});
    conds.push_back({{"condition", c.name}, {"pass", c.pass}, {"failures", f}});
  }
  j["conditions"] = conds;
  auto both = [](const std::vector<Rational>& xs) {
    Json a = Json::array();
    for (const auto& x : xs) a.push_back({{"exact", to_string(x)}, {"decimal", to_decimal(x)}});
    return a;
  };
  j["spacer_summands"] = both(r.spacer_summands);
  j["partial_sums"] = both(r.partial_sums);
  j["partial_products"] = both(r.partial_products);
  j["product_diverging"] = r.product_diverging;
  j["folner_max"] = both(r.folner_max);
  return j;
}

}  // namespace hcf

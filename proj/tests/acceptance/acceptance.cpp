// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cli.hpp"
#include "hcf/cf_engine.hpp"
#include "hcf/diagnostics.hpp"
#include "hcf/error.hpp"
#include "hcf/folner.hpp"
#include "hcf/schedules.hpp"
#include "hcf/shearbox.hpp"
#include "hcf/spectral.hpp"
#include "oracles.hpp"

using namespace hcf;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

std::string fmt(double x, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

// Shared by the asymmetry and rigidity checks.
const Schedule& asymmetric_schedule() {
  static const Schedule s = build_asymmetric(11, true, {});
  return s;
}

// ---------------------------------------------------------------------------

Outcome group_law() {
  const auto t0 = Clock::now();
  oracle::Gen gen(1001);
  long bad = 0;
  const int cases = 10000;
  for (int i = 0; i < cases; ++i) {
    GroupElement g = gen.element(), h = gen.element(), k = gen.element();
    const Rational x = gen.rational(), y = gen.rational();
    bool ok = (g * h) * k == g * (h * k);
    ok = ok && g * inv(g) == identity() && inv(g) * g == identity();
    ok = ok && commutator(gen_a(x), gen_b(y)) == gen_c(x * y);
    ok = ok && flip(g * h) == flip(g) * flip(h) && flip(flip(g)) == g;
    ok = ok && g * h == oracle::element(oracle::matmul(oracle::matrix(g), oracle::matrix(h)));
    if (!ok) ++bad;
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < 5,
          std::to_string(cases) + " cases, " + std::to_string(bad) + " mismatches, " + fmt(secs) + " s"};
}

Outcome haar_calculus() {
  const auto t0 = Clock::now();
  oracle::Gen gen(1002);
  int vol_bad = 0, inv_bad = 0;
  for (int i = 0; i < 100; ++i) {
    BoxParams p = gen.params();
    if (box(p).volume() != 8 * p.alpha * p.beta * p.gamma) ++vol_bad;
    BishearBox b = gen.sheared();
    GroupElement g = gen.element();
    if (left_translate(g, b).volume() != b.volume() || right_translate(b, g).volume() != b.volume()) ++inv_bad;
    BishearBox c = gen.sheared();
    if (intersect_volume(left_translate(g, b), left_translate(g, c)) != intersect_volume(b, c) ||
        intersect_volume(right_translate(b, g), right_translate(c, g)) != intersect_volume(b, c))
      ++inv_bad;
  }
  int mc_bad = 0, nonzero = 0;
  double worst_z = 0;
  for (int i = 0; i < 100; ++i) {
    BishearBox a = gen.sheared(), b = gen.sheared();
    for (int tries = 0; tries < 200 && intersect_volume(a, b) == 0; ++tries) b = gen.sheared();
    const double exact = intersect_volume(a, b).get_d();
    if (exact > 0) ++nonzero;
    FastMembership mb(b);
    McEstimate e = mc_volume([&](const SamplePoint& x) { return mb.contains(x); }, a, 1000000,
                             9000 + static_cast<std::uint64_t>(i), jobs());
    // Binomial sigma implied by the exact value; the sample estimate degenerates for tiny overlaps.
    const double window = a.volume().get_d(), frac = exact / window;
    const double sigma = window * std::sqrt(frac * (1 - frac) / static_cast<double>(e.samples));
    const double z = sigma > 0 ? std::abs(e.estimate - exact) / sigma : (std::abs(e.estimate - exact) <= 1e-12 * window ? 0 : 1e9);
    worst_z = std::max(worst_z, z);
    if (z > 4) ++mc_bad;
  }
  const double secs = seconds_since(t0);
  return {vol_bad == 0 && inv_bad == 0 && mc_bad == 0 && secs < 120,
          "volume mismatches " + std::to_string(vol_bad) + ", invariance mismatches " + std::to_string(inv_bad) +
              ", MC pairs outside 4 sigma " + std::to_string(mc_bad) + "/100 (" + std::to_string(nonzero) +
              " nonempty, worst z " + fmt(worst_z, 3) + "), " + fmt(secs) + " s"};
}

Outcome double_integral_identity() {
  const auto t0 = Clock::now();
  oracle::Gen gen(1003);
  auto near_origin = [&]() {
    std::uniform_int_distribution<int> half(2, 8);
    BishearBox b = axis_box({-Rational(half(gen.rng()), 4), Rational(half(gen.rng()), 4)},
                            {-Rational(half(gen.rng()), 4), Rational(half(gen.rng()), 4)},
                            {-Rational(half(gen.rng()), 4), Rational(half(gen.rng()), 4)});
    b.p = gen.rational(2, 4);
    b.q = gen.rational(2, 4);
    return b;
  };
  int bad = 0;
  double worst_z = 0;
  const std::uint64_t samples = 40000;
  for (int i = 0; i < 20; ++i) {
    BishearBox a = near_origin(), b = near_origin(), s = near_origin();
    McEstimate lhs = mc_pair_integral(
        [&](const GroupElement& t1, const GroupElement& t2) {
          return intersect_volume(right_translate(a, t1), right_translate(b, t2)).get_d();
        },
        s, s, samples, 3000 + 2 * static_cast<std::uint64_t>(i), jobs());
    McEstimate rhs = mc_pair_integral(
        [&](const GroupElement& x, const GroupElement& y) {
          return intersect_volume(left_translate(x, s), left_translate(y, s)).get_d();
        },
        a, b, samples, 3001 + 2 * static_cast<std::uint64_t>(i), jobs());
    const double se = std::hypot(lhs.std_error, rhs.std_error);
    const double z = se > 0 ? std::abs(lhs.estimate - rhs.estimate) / se : 0;
    worst_z = std::max(worst_z, z);
    if (z > 4 || lhs.estimate <= 0) ++bad;
  }
  return {bad == 0, "20 triples, " + std::to_string(bad) + " outside combined 4 sigma, worst z " + fmt(worst_z, 3) +
                        ", " + fmt(seconds_since(t0)) + " s"};
}

Outcome tiling() {
  TilingReport r = tiling_check({1, 1, 1}, 2, {}, jobs());
  return {r.pass && r.overlaps.empty() && r.max_overlap_volume == 0 && r.uncovered_volume == 0,
          std::to_string(r.pairs_checked) + " pairs, max overlap " + to_string(r.max_overlap_volume) +
              ", uncovered " + to_string(r.uncovered_volume) + " of window volume " + to_string(r.window_volume)};
}

Outcome folner_trend() {
  std::vector<BoxParams> params;
  for (int g : {1, 10, 100, 1000}) params.push_back({1, 1, g});
  auto rows = folner_table({gen_a(1), gen_b(1), gen_c(1)}, params);
  bool closed_form = true, decreasing = true;
  std::string maxes;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    // c(1) moves I(1,1,g) by 1 along t3, so the symmetric difference is 2 * 2 * 2 * 1.
    if (rows[i].ratios[2] != Rational(1) / params[i].gamma) closed_form = false;
    if (rows[i].max_ratio != 1 + Rational(1) / (4 * params[i].gamma)) closed_form = false;
    if (i > 0 && !(rows[i].max_ratio < rows[i - 1].max_ratio)) decreasing = false;
    maxes += (i ? " > " : "") + to_string(rows[i].max_ratio);
  }
  return {closed_form && decreasing, "c(1) ratio 1/gamma " + std::string(closed_form ? "exact" : "WRONG") +
                                         ", max ratios " + maxes};
}

Outcome cylinder_identities() {
  const Schedule s = build_asymmetric(9, true, {});
  oracle::Gen gen(1006);
  std::uniform_int_distribution<int> level(0, s.levels() - 1), cut(0, 7);
  int bad = 0;
  const int count = 500;
  for (int i = 0; i < count; ++i) {
    const int n = level(gen.rng());
    const BoxParams& p = s.f_params(n);
    auto piece = [&](const Rational& h) -> Interval {
      int a = cut(gen.rng()), b = cut(gen.rng());
      if (a > b) std::swap(a, b);
      return {-h + h * a / 4, -h + h * (b + 1) / 4};
    };
    Cylinder a = make_cylinder(s, n, Region{{axis_box(piece(p.alpha), piece(p.beta), piece(p.gamma))}});
    const Rational mu = measure(a, s).value;
    bool ok = mu == volume(a.region) / s.haar(n) * s.mu_x(n);
    const auto& cs = s.C(n + 1);
    const auto copies = static_cast<unsigned long>(cs.size());
    Rational sum = 0;
    for (const auto& c : cs) {
      const Rational m = measure(make_cylinder(s, n + 1, right_translate(a.region, c)), s).value;
      ok = ok && m * copies == mu;
      sum += m;
    }
    Cylinder r = refine(a, n + 1, s);
    ok = ok && sum == mu && measure(r, s).value == mu && volume(r.region) == volume(a.region) * copies;
    const int deeper = std::min(s.levels(), n + 3);
    ok = ok && measure(refine(a, deeper, s, 10000000), s).value == mu;
    if (!ok) ++bad;
  }
  return {bad == 0, std::to_string(count) + " cylinders over levels 0-8, " + std::to_string(bad) + " failures"};
}

Outcome deljunco() {
  int ok2 = 0, ok3 = 0;
  double slowest = 0, worst2 = 0, worst3 = 0;
  for (int seed = 1; seed <= 20; ++seed)
    for (int k : {2, 3}) {
      SpacerOptions o;
      o.order_k = k;
      o.epsilon = k == 2 ? 0.1 : 0.2;
      o.delta = 0.1;
      o.jobs = jobs();
      const auto t0 = Clock::now();
      try {
        SpacerMap m = deljunco_spacer(4, 10000, o, static_cast<std::uint64_t>(seed));
        (k == 2 ? ok2 : ok3)++;
        (k == 2 ? worst2 : worst3) = std::max(k == 2 ? worst2 : worst3, m.report.worst_distance);
      } catch (const Error&) {
      }
      slowest = std::max(slowest, seconds_since(t0));
    }
  return {ok2 >= 19 && ok3 >= 19 && slowest < 60,
          "k=2: " + std::to_string(ok2) + "/20 certified (worst " + fmt(worst2, 3) + "), k=3: " + std::to_string(ok3) +
              "/20 (worst " + fmt(worst3, 3) + "), slowest run " + fmt(slowest, 3) + " s"};
}

Outcome infinite_schedule() {
  const Schedule s = build_infinite(6, {});
  Thm51Report r = check_thm51(s);
  bool increasing = r.partial_products.size() == 6;
  for (std::size_t i = 1; i < r.partial_products.size(); ++i)
    increasing = increasing && r.partial_products[i - 1] < r.partial_products[i];
  return {r.pass && r.products_increasing && increasing && r.cond_i.pass && r.cond_ii.pass && r.cond_iii.pass,
          "conditions " + std::string(r.cond_i.pass && r.cond_ii.pass && r.cond_iii.pass ? "hold" : "FAIL") +
              ", partial products up to " + to_decimal(r.partial_products.back())};
}

Outcome asymmetry() {
  const auto t0 = Clock::now();
  const Schedule& s = asymmetric_schedule();
  ReportOptions ro;
  ro.jobs = jobs();
  ro.engine.budget = 10000000;
  bool additive = true, targets_agree = true, decreasing = true;
  std::vector<Rational> gaps;
  std::string trail;
  for (int n : {3, 6, 9}) {
    TestSet a = slab_set(s, n, 4);
    AsymmetryReport r = asymmetry_report(s, n, a.cylinder, a.cylinder, a.cylinder, a.cylinder, ro);
    additive = additive && r.additive && r.class_sum == r.total && r.total_unresolved == 0;
    for (const auto& row : r.rows) targets_agree = targets_agree && row.target == row.target_direct;
    if (!gaps.empty() && !(r.relative_gap < gaps.back())) decreasing = false;
    gaps.push_back(r.relative_gap);
    trail += (trail.empty() ? "" : " > ") + to_decimal(r.relative_gap);
  }
  TestSet thin = slab_set(s, 9, Rational(1, 2));
  DirectionStats d = direction_stats(s, 9, thin.cylinder, ro);
  // The unresolved parts can only add mass, so compare the worst cases.
  const bool forward_wins = d.forward > d.backward + d.backward_unresolved;
  const double secs = seconds_since(t0);
  return {additive && targets_agree && decreasing && forward_wins && secs < 600,
          "classes sum to total " + std::string(additive ? "exactly" : "NOT") + ", targets " +
              (targets_agree ? "agree" : "DISAGREE") + ", relative gap " + trail + ", forward/backward at n=9 " +
              to_decimal(d.forward / d.measure_a) + " vs " + to_decimal(d.backward / d.measure_a) + ", " + fmt(secs) +
              " s"};
}

Outcome rigidity() {
  const Schedule& s = asymmetric_schedule();
  ReportOptions ro;
  ro.jobs = jobs();
  RigidityReport r = rigidity_test(s, {3, 6}, 3, ro);
  auto sup = [&](int n, const std::string& element, bool upper) -> Rational {
    Rational best = 0;
    for (const auto& row : r.rows)
      if (row.n == n && row.element == element) best = rmax(best, upper ? row.delta_upper : row.delta_lower);
    return best;
  };
  // Strict comparison of exact bounds: the n=6 upper bound against the n=3 lower bound.
  const bool literal = sup(6, "literal", true) < sup(3, "literal", false);
  const bool period = sup(6, "period", true) < sup(3, "period", false);
  return {literal && period, "sup over family, literal element: " + to_decimal(sup(3, "literal", false)) + " (n=3) vs " +
                                 to_decimal(sup(6, "literal", true)) + " (n=6); period element: " +
                                 to_decimal(sup(3, "period", false)) + " vs " + to_decimal(sup(6, "period", true))};
}

Outcome spectral() {
  std::vector<std::string> failed;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) failed.push_back(what);
  };
  oracle::Gen gen(1011);
  bool unit = true, central = true;
  for (int i = 0; i < 1000; ++i) {
    GroupElement g = gen.element();
    const double a = gen.rational().get_d(), b = gen.rational().get_d();
    unit = unit && std::abs(std::abs(eval_pi_ab(a, b, g)) - 1) < 1e-12;
    central = central && std::abs(eval_pi_ab(a, b, gen_c(g.t3)) - 1.0) < 1e-12;
  }
  check(unit, "eval_pi_ab modulus");
  check(central, "eval_pi_ab trivial on the center");

  Grid f = Grid::make(8, 1.0 / 32);
  for (std::size_t k = 0; k < f.values.size(); ++k) f.values[k] = std::exp(-f.x(k) * f.x(k) / 3) * std::complex(1.0, -0.3);
  bool phase = true, unitary = true;
  for (int i = 0; i < 50; ++i) {
    const double gamma = gen.positive().get_d();
    const Rational t = gen.rational();
    GammaResult c = eval_pi_gamma(gamma, gen_c(t), f);
    for (std::size_t k = 0; k < f.values.size(); ++k)
      phase = phase && std::abs(c.out.values[k] - std::polar(1.0, gamma * t.get_d()) * f.values[k]) < 1e-12;
    GammaResult r = eval_pi_gamma(gamma, {gen.rational(40, 4), gen.rational(), gen.rational()}, f, jobs());
    unitary = unitary && std::abs(f.norm2() - r.out.norm2() - r.boundary_mass) < 1e-10;
  }
  check(phase, "eval_pi_gamma center phase");
  check(unitary, "eval_pi_gamma norm defect equals boundary mass");

  const auto inf = Multiplicity::inf();
  const auto one = Multiplicity::of(1);
  {
    SpectralTypeDescriptor want;
    want.center_atoms = {{1, 3, inf}};
    check(tensor_rule(1, 2) == want, "tensor, gamma + gamma' != 0");
  }
  {
    SpectralTypeDescriptor want;
    want.planar_continuous = ContinuousTag{"lebesgue", std::nullopt, one};
    check(tensor_rule(Rational(5, 2), Rational(-5, 2)) == want, "tensor, gamma + gamma' = 0");
  }
  try {
    tensor_rule(0, 1);
    check(false, "tensor, gamma = 0 accepted");
  } catch (const Error& e) {
    check(e.code() == ErrorCode::GammaZero, "tensor, gamma = 0 error code");
  }
  {
    SpectralTypeDescriptor d;
    d.planar_atoms = {{Rational(1, 4), 1, 0, one}, {Rational(1, 2), -2, 3, Multiplicity::of(2)}};
    RestrictedType want{RestrictionTarget::Center, {{SpectralTerm::Kind::Atom, {0}, Rational(3, 4), "", Multiplicity::of(3)}}};
    check(restrict_type(d, RestrictionTarget::Center) == want, "center restriction of characters");
    d.planar_continuous = ContinuousTag{"haar2", Rational(1), one};
    want.terms[0].weight = Rational(7, 4);
    want.terms[0].mult = inf;
    check(restrict_type(d, RestrictionTarget::Center) == want, "center restriction with continuous planar part");
  }
  {
    SpectralTypeDescriptor d;
    d.center_atoms = {{Rational(1, 3), 2, one}};
    d.center_continuous = ContinuousTag{"sigma", Rational(2), one};
    RestrictedType want{RestrictionTarget::Center,
                        {{SpectralTerm::Kind::Atom, {2}, Rational(1, 3), "", inf},
                         {SpectralTerm::Kind::Tag, {}, Rational(2), "sigma", inf}}};
    check(restrict_type(d, RestrictionTarget::Center) == want, "center restriction of infinite-dimensional part");
    RestrictedType want_h{RestrictionTarget::H2a,
                          {{SpectralTerm::Kind::Line, {2}, Rational(1, 3), "lebesgue", one},
                           {SpectralTerm::Kind::Tag, {}, Rational(2), "sigma x lebesgue", one}}};
    check(restrict_type(d, RestrictionTarget::H2a) == want_h, "h2a restriction of infinite-dimensional part");
  }
  {
    SpectralTypeDescriptor d;
    d.planar_atoms = {{1, 4, 1, one}, {1, 4, -1, one}};
    d.planar_continuous = ContinuousTag{"nu", Rational(1, 2), one};
    RestrictedType want{RestrictionTarget::H2a,
                        {{SpectralTerm::Kind::Atom, {0, 4}, Rational(2), "", Multiplicity::of(2)},
                         {SpectralTerm::Kind::Tag, {}, Rational(1, 2), "delta0 x proj1(nu)", one}}};
    check(restrict_type(d, RestrictionTarget::H2a) == want, "h2a restriction of characters");
  }
  check(restrict_type({}, RestrictionTarget::Center).terms.empty(), "empty descriptor");
  std::string detail = "unit modulus, center phase, grid unitarity and 9 exact transform cases";
  if (!failed.empty()) {
    detail = "failed:";
    for (const auto& f2 : failed) detail += " [" + f2 + "]";
  }
  return {failed.empty(), detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome reproducibility() {
  const fs::path root = fs::temp_directory_path() / "hcf_acceptance_repro";
  fs::remove_all(root);
  std::vector<std::vector<std::string>> script;
  auto add = [&](std::vector<std::string> args) { script.push_back(std::move(args)); };
  for (const char* run : {"r1", "r2"}) {
    const std::string out = (root / run).string();
    const std::string mix = out + "/mix", asym = out + "/asym";
    const std::string j = std::string(run) == "r1" ? "1" : "4";
    add({"--out", mix, "--seed", "11", "--jobs", j, "build", "--kind", "mixing", "--levels", "4"});
    add({"--out", asym, "--jobs", j, "build", "--kind", "asymmetric", "--levels", "7", "--gamma-integer"});
    add({"--out", out + "/inf", "build", "--kind", "infinite", "--levels", "6"});
    add({"--out", out + "/validate", "validate", mix + "/schedule.json"});
    add({"--out", out + "/decay", "--jobs", j, "correlate", "--schedule", mix + "/schedule.json", "--mode", "decay",
         "--dir", "c", "--t", "0,1,2,4,8"});
    add({"--out", out + "/sequence", "--jobs", j, "--format", "json", "correlate", "--schedule", mix + "/schedule.json",
         "--mode", "sequence", "--levels", "1,2"});
    add({"--out", out + "/asymmetry", "--jobs", j, "asymmetry", "--schedule", asym + "/schedule.json", "--n", "3"});
    add({"--out", out + "/rigidity", "--jobs", j, "rigidity", "--schedule", asym + "/schedule.json", "--n", "3",
         "--family-level", "2"});
    add({"--out", out + "/tiling", "--jobs", j, "tiling"});
    add({"--out", out + "/folner", "--jobs", j, "--seed", "5", "--format", "json", "folner", "--inverse-samples",
         "20000"});
    add({"--out", out + "/tensor", "spectral", "--op", "tensor", "--gamma", "1", "--gamma-prime", "2"});
    add({"--out", out + "/gamma", "--jobs", j, "spectral", "--op", "eval-gamma", "--gamma", "3", "--g",
         "1/4,1/2,2", "--L", "5", "--step", "1/16"});
  }
  int failures = 0;
  std::string first_error;
  for (const auto& args : script) {
    std::ostringstream out, err;
    if (cli::run(args, out, err) != 0) {
      if (first_error.empty()) first_error = args.back() + ": " + err.str();
      ++failures;
    }
  }
  int files = 0, differ = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "r1")) {
    if (!e.is_regular_file()) continue;
    ++files;
    if (slurp(e.path()) != slurp(root / "r2" / fs::relative(e.path(), root / "r1"))) ++differ;
  }
  fs::remove_all(root);
  return {failures == 0 && differ == 0 && files > 0,
          std::to_string(files) + " output files compared, " + std::to_string(differ) + " differ, " +
              std::to_string(failures) + " failed commands" + (first_error.empty() ? "" : " (" + first_error + ")")};
}

}  // namespace

// Optional arguments select criteria by number.
int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"group law", group_law},
      {"haar calculus", haar_calculus},
      {"double integral identity", double_integral_identity},
      {"tiling", tiling},
      {"folner trend", folner_trend},
      {"cylinder identities", cylinder_identities},
      {"deljunco spacer", deljunco},
      {"infinite measure schedule", infinite_schedule},
      {"asymmetry", asymmetry},
      {"rigidity", rigidity},
      {"spectral", spectral},
      {"cli reproducibility", reproducibility},
  };
  std::vector<bool> selected(criteria.size(), argc == 1);
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k >= 1 && k <= static_cast<int>(criteria.size())) selected[static_cast<std::size_t>(k - 1)] = true;
  }
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected[i]) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS " : "FAIL ") << i + 1 << ' ' << criteria[i].first << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}

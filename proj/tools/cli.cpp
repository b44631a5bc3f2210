#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "hcf/cf_engine.hpp"
#include "hcf/diagnostics.hpp"
#include "hcf/error.hpp"
#include "hcf/folner.hpp"
#include "hcf/json_io.hpp"
#include "hcf/parallel.hpp"
#include "hcf/schedules.hpp"
#include "hcf/spectral.hpp"

namespace hcf::cli {

namespace {

struct Globals {
  std::string config;
  std::string out;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string format = "csv";
  CLI::Option* seed_opt = nullptr;
};

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::ShearMismatch: return kShearMismatch;
    case ErrorCode::BudgetExceeded: return kBudgetExceeded;
    case ErrorCode::LevelOutOfRange: return kConfig;
    case ErrorCode::Overflow: return kOverflow;
    case ErrorCode::GenerationFailed: return kGenerationFailed;
    case ErrorCode::GammaZero: return kGammaZero;
    case ErrorCode::ConfigError: return kConfig;
    case ErrorCode::ReportFail: return kCheckFailed;
    case ErrorCode::ScheduleMismatch: return kScheduleMismatch;
    case ErrorCode::IoError: return kIo;
  }
  return kOther;
}

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);) out.push_back(item);
  return out;
}

std::vector<Rational> parse_list(const std::string& s) {
  std::vector<Rational> out;
  for (const auto& item : split(s, ',')) out.push_back(parse_rational(item));
  return out;
}

BoxParams parse_params(const std::string& s) {
  auto v = parse_list(s);
  if (v.size() != 3 || v[0] <= 0 || v[1] <= 0 || v[2] <= 0)
    throw Error(ErrorCode::ConfigError, "box parameters must be three positive numbers: " + s);
  return {v[0], v[1], v[2]};
}

GroupElement parse_element(const std::string& s) {
  auto v = parse_list(s);
  if (v.size() != 3) throw Error(ErrorCode::ConfigError, "group element must be t1,t2,t3: " + s);
  return {v[0], v[1], v[2]};
}

double parse_real(const std::string& s) { return to_double(parse_rational(s)); }

// Reads the command config file and rejects keys outside `allowed`.
Json load_config(const Globals& g, std::initializer_list<const char*> allowed, const std::string& where) {
  if (g.config.empty()) return Json::object();
  Json cfg = read_json_file(g.config);
  if (!cfg.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
  require_keys(cfg, allowed, where + " config");
  return cfg;
}

// A value set on the command line wins over the config file.
template <class T>
void pick(T& value, const Json& cfg, const char* key, const CLI::Option* flag, const T& flag_value) {
  if (flag && flag->count() > 0) {
    value = flag_value;
  } else if (cfg.contains(key)) {
    value = cfg.at(key).get<T>();
  }
}

void emit(const Globals& g, std::ostream& out, const std::string& name, const std::string& text) {
  if (g.out.empty()) {
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
    return;
  }
  std::filesystem::create_directories(g.out);
  write_text_file((std::filesystem::path(g.out) / name).string(), text);
}

bool want_json(const Globals& g) {
  if (g.format != "csv" && g.format != "json") throw Error(ErrorCode::ConfigError, "--format must be csv or json");
  return g.format == "json";
}

std::string json_text(const Json& j) { return j.dump(2) + "\n"; }

Schedule load_schedule(const std::string& path) {
  if (path.empty()) throw Error(ErrorCode::ConfigError, "a schedule file is required");
  return Schedule::from_json(read_json_file(path));
}

// Test set specifications:
//   full:L | slab:L:width[:centre] | dyadic:L:depth:i.j.k | box:L:x1lo:x1hi:x2lo:x2hi:x3lo:x3hi
Cylinder parse_set(const Schedule& s, const std::string& spec) {
  auto f = split(spec, ':');
  auto level = [&]() -> int {
    if (f.size() < 2) throw Error(ErrorCode::ConfigError, "test set needs a level: " + spec);
    int n = std::stoi(f[1]);
    if (n < 0 || n > s.levels()) throw Error(ErrorCode::LevelOutOfRange, "test set level out of range: " + spec);
    return n;
  };
  if (f[0] == "full" && f.size() == 2) return full_cylinder(s, level());
  if (f[0] == "slab" && (f.size() == 3 || f.size() == 4))
    return slab_set(s, level(), parse_rational(f[2]), f.size() == 4 ? parse_rational(f[3]) : Rational(0)).cylinder;
  if (f[0] == "dyadic" && f.size() == 4) {
    const int depth = std::stoi(f[2]);
    if (depth < 0 || depth > 8) throw Error(ErrorCode::ConfigError, "dyadic depth must be in [0, 8]");
    for (const auto& t : dyadic_family(s, level(), depth))
      if (t.id == "L" + f[1] + ":d" + f[2] + ":" + f[3]) return t.cylinder;
    throw Error(ErrorCode::ConfigError, "no such dyadic cell: " + spec);
  }
  if (f[0] == "box" && f.size() == 8) {
    const int n = level();
    auto iv = [&](std::size_t i) { return Interval{parse_rational(f[i]), parse_rational(f[i + 1])}; };
    return make_cylinder(s, n, Region{{axis_box(iv(2), iv(4), iv(6))}});
  }
  throw Error(ErrorCode::ConfigError, "unrecognised test set: " + spec);
}

std::optional<Cylinder> parse_optional_set(const Schedule& s, const std::string& spec) {
  if (spec == "X") return std::nullopt;
  return parse_set(s, spec);
}

std::string rat_cell(const Rational& x) { return to_string(x) + "," + to_decimal(x); }

// ---------------------------------------------------------------------------

struct BuildArgs {
  std::string kind = "asymmetric";
  int levels = 9;
  bool gamma_integer = false;
};

int cmd_build(const Globals& g, const BuildArgs& flags, const std::map<std::string, CLI::Option*>& opt,
              std::ostream& out) {
  Json cfg = load_config(g, {"kind", "levels", "gamma_integer", "seed", "f0", "h_dims", "growth_dims", "r0", "d_grid",
                             "epsilon", "delta", "order_k", "spacer_windows", "spacer_retries", "spacer_mode",
                             "budget", "quadrature_samples", "spacer_placement", "separation_factor"},
                         "build");
  BuildArgs a;
  pick(a.kind, cfg, "kind", opt.at("kind"), flags.kind);
  pick(a.levels, cfg, "levels", opt.at("levels"), flags.levels);
  pick(a.gamma_integer, cfg, "gamma_integer", opt.at("gamma_integer"), flags.gamma_integer);
  if (a.levels < 1 || a.levels > 40) throw Error(ErrorCode::ConfigError, "levels must be in [1, 40]");

  MixingConfig m;
  m.jobs = g.jobs;
  pick(m.seed, cfg, "seed", g.seed_opt, g.seed);
  if (cfg.contains("f0")) m.f0 = cfg["f0"].get<BoxParams>();
  if (cfg.contains("h_dims")) m.h_dims = cfg["h_dims"].get<Lattice>();
  if (cfg.contains("d_grid")) m.d_grid = cfg["d_grid"].get<Lattice>();
  m.growth_dims = cfg.value("growth_dims", m.growth_dims);
  m.r0 = cfg.value("r0", m.r0);
  if (cfg.contains("epsilon")) m.epsilon = cfg["epsilon"].get<double>();
  if (cfg.contains("delta")) m.delta = cfg["delta"].get<double>();
  m.order_k = cfg.value("order_k", m.order_k);
  m.spacer_windows = cfg.value("spacer_windows", m.spacer_windows);
  m.spacer_retries = cfg.value("spacer_retries", m.spacer_retries);
  m.spacer_mode = cfg.value("spacer_mode", m.spacer_mode);
  m.budget = cfg.value("budget", m.budget);
  m.quadrature_samples = cfg.value("quadrature_samples", m.quadrature_samples);
  m.gamma_integer = a.gamma_integer;
  if (m.spacer_mode != "random" && m.spacer_mode != "constant")
    throw Error(ErrorCode::ConfigError, "spacer_mode must be random or constant");

  Schedule s;
  Json report;
  if (a.kind == "mixing") {
    s = build_mixing(a.levels, m);
    report = build_report(s);
  } else if (a.kind == "asymmetric") {
    AsymmetricConfig ac;
    ac.mixing = m;
    ac.spacer_placement = cfg.value("spacer_placement", ac.spacer_placement);
    if (ac.spacer_placement != "cumulative" && ac.spacer_placement != "pointwise")
      throw Error(ErrorCode::ConfigError, "spacer_placement must be cumulative or pointwise");
    s = build_asymmetric(a.levels, a.gamma_integer, ac);
    report = build_report(s);
  } else if (a.kind == "infinite") {
    InfiniteConfig ic;
    ic.f0 = m.f0;
    if (cfg.contains("separation_factor")) ic.separation_factor = cfg["separation_factor"].get<Rational>();
    if (ic.separation_factor <= 0) throw Error(ErrorCode::ConfigError, "separation_factor must be positive");
    s = build_infinite(a.levels, ic);
    report = build_report(s);
    report["thm51"] = to_json(check_thm51(s));
  } else {
    throw Error(ErrorCode::ConfigError, "kind must be mixing, asymmetric or infinite");
  }
  const std::filesystem::path dir = g.out.empty() ? std::filesystem::path(".") : std::filesystem::path(g.out);
  std::filesystem::create_directories(dir);
  write_text_file((dir / "schedule.json").string(), s.to_json().dump(1) + "\n");
  write_text_file((dir / "build_report.json").string(), json_text(report));
  out << "built " << a.kind << " schedule, levels " << s.levels() << ", hash " << s.hash() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

int cmd_validate(const Globals& g, std::string schedule_path, const CLI::Option* path_opt, std::ostream& out) {
  Json cfg = load_config(g, {"schedule"}, "validate");
  pick(schedule_path, cfg, "schedule", path_opt, schedule_path);
  Schedule s = load_schedule(schedule_path);
  ValidationReport v = validate(s);
  bool pass = v.pass;
  std::optional<Thm51Report> thm;
  if (s.construction() == "infinite") {
    thm = check_thm51(s);
    pass = pass && thm->pass;
  }
  if (want_json(g)) {
    Json j{{"schedule", s.hash()}, {"validation", to_json(v)}, {"pass", pass}};
    if (thm) j["thm51"] = to_json(*thm);
    emit(g, out, "validate.json", json_text(j));
  } else {
    std::ostringstream os;
    os << "condition,pass,level,detail\n";
    std::vector<ConditionResult> all = v.conditions;
    if (thm) all.insert(all.end(), {thm->cond_i, thm->cond_ii, thm->cond_iii});
    for (const auto& c : all) {
      if (c.failures.empty()) os << c.name << ',' << (c.pass ? "pass" : "fail") << ",,\n";
      for (const auto& f : c.failures)
        os << c.name << ',' << (c.pass ? "pass" : "fail") << ',' << f.level << ",\"" << f.detail << "\"\n";
    }
    emit(g, out, "validate.csv", os.str());
  }
  return pass ? kOk : kCheckFailed;
}

// ---------------------------------------------------------------------------

struct EngineFlags {
  std::size_t budget = 100000;
  int max_level = -1;
  bool strict = false;
};

EngineOptions engine_options(const Json& cfg, const EngineFlags& f, const std::map<std::string, CLI::Option*>& opt) {
  EngineOptions e;
  pick(e.budget, cfg, "budget", opt.at("budget"), f.budget);
  pick(e.max_level, cfg, "max_level", opt.at("max_level"), f.max_level);
  pick(e.strict, cfg, "strict", opt.at("strict"), f.strict);
  return e;
}

struct CorrelateArgs {
  std::string schedule;
  std::string mode = "decay";
  std::string direction = "c";
  std::vector<std::string> t{"0", "1", "10", "100", "1000"};
  std::string a = "full:0";
  std::string b = "full:0";
  std::vector<int> levels;
  int norm_level = -1;
  EngineFlags engine;
};

int cmd_correlate(const Globals& g, const CorrelateArgs& flags, const std::map<std::string, CLI::Option*>& opt,
                  std::ostream& out) {
  Json cfg = load_config(g, {"schedule", "mode", "direction", "t", "a", "b", "levels", "norm_level", "budget",
                             "max_level", "strict"},
                         "correlate");
  CorrelateArgs a;
  pick(a.schedule, cfg, "schedule", opt.at("schedule"), flags.schedule);
  pick(a.mode, cfg, "mode", opt.at("mode"), flags.mode);
  pick(a.direction, cfg, "direction", opt.at("direction"), flags.direction);
  pick(a.t, cfg, "t", opt.at("t"), flags.t);
  pick(a.a, cfg, "a", opt.at("a"), flags.a);
  pick(a.b, cfg, "b", opt.at("b"), flags.b);
  pick(a.levels, cfg, "levels", opt.at("levels"), flags.levels);
  pick(a.norm_level, cfg, "norm_level", opt.at("norm_level"), flags.norm_level);
  Schedule s = load_schedule(a.schedule);
  ReportOptions ro;
  ro.engine = engine_options(cfg, flags.engine, opt);
  ro.norm_level = a.norm_level;
  ro.jobs = g.jobs;
  CorrelationReport rep;
  if (a.mode == "decay") {
    std::vector<Rational> grid;
    for (const auto& t : a.t) grid.push_back(parse_rational(t));
    rep = correlation_decay(s, parse_direction(a.direction), grid, {a.a, parse_set(s, a.a)}, {a.b, parse_set(s, a.b)},
                            ro);
  } else if (a.mode == "sequence") {
    std::vector<int> levels = a.levels;
    if (levels.empty())
      for (int n = 1; n < s.levels(); ++n) levels.push_back(n);
    rep = mixing_sequence_test(s, levels, ro);
  } else {
    throw Error(ErrorCode::ConfigError, "mode must be decay or sequence");
  }
  if (want_json(g))
    emit(g, out, "correlate.json", json_text(to_json(rep)));
  else
    emit(g, out, "correlate.csv", to_csv(rep));
  return kOk;
}

// ---------------------------------------------------------------------------

struct AsymmetryArgs {
  std::string schedule;
  int n = 3;
  std::string a, b, c, d;
  std::string thin_width = "1/2";
  EngineFlags engine;
};

int cmd_asymmetry(const Globals& g, const AsymmetryArgs& flags, const std::map<std::string, CLI::Option*>& opt,
                  std::ostream& out) {
  Json cfg = load_config(g, {"schedule", "n", "a", "b", "c", "d", "thin_width", "budget", "max_level", "strict"},
                         "asymmetry");
  AsymmetryArgs a;
  pick(a.schedule, cfg, "schedule", opt.at("schedule"), flags.schedule);
  pick(a.n, cfg, "n", opt.at("n"), flags.n);
  pick(a.a, cfg, "a", opt.at("a"), flags.a);
  pick(a.b, cfg, "b", opt.at("b"), flags.b);
  pick(a.c, cfg, "c", opt.at("c"), flags.c);
  pick(a.d, cfg, "d", opt.at("d"), flags.d);
  pick(a.thin_width, cfg, "thin_width", opt.at("thin_width"), flags.thin_width);
  Schedule s = load_schedule(a.schedule);
  if (a.n < 0 || a.n >= s.levels()) throw Error(ErrorCode::LevelOutOfRange, "n must be below the schedule depth");
  const std::string dflt = "slab:" + std::to_string(a.n) + ":4";
  for (auto* x : {&a.a, &a.b, &a.c, &a.d})
    if (x->empty()) *x = dflt;
  ReportOptions ro;
  ro.engine = engine_options(cfg, flags.engine, opt);
  ro.jobs = g.jobs;
  AsymmetryReport rep = asymmetry_report(s, a.n, parse_set(s, a.a), parse_optional_set(s, a.b),
                                         parse_optional_set(s, a.c), parse_optional_set(s, a.d), ro);
  DirectionStats dir = direction_stats(s, a.n, slab_set(s, a.n, parse_rational(a.thin_width)).cylinder, ro);
  if (want_json(g)) {
    emit(g, out, "asymmetry.json", json_text(Json{{"classes", to_json(rep)}, {"direction", to_json(dir)}}));
  } else {
    emit(g, out, "asymmetry.csv", to_csv(rep));
    emit(g, out, "direction.csv", to_csv(dir));
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct RigidityArgs {
  std::string schedule;
  std::vector<int> n{3, 6};
  int family_level = -1;
  EngineFlags engine;
};

int cmd_rigidity(const Globals& g, const RigidityArgs& flags, const std::map<std::string, CLI::Option*>& opt,
                 std::ostream& out) {
  Json cfg = load_config(g, {"schedule", "n", "family_level", "budget", "max_level", "strict"}, "rigidity");
  RigidityArgs a;
  pick(a.schedule, cfg, "schedule", opt.at("schedule"), flags.schedule);
  pick(a.n, cfg, "n", opt.at("n"), flags.n);
  pick(a.family_level, cfg, "family_level", opt.at("family_level"), flags.family_level);
  Schedule s = load_schedule(a.schedule);
  ReportOptions ro;
  ro.engine = engine_options(cfg, flags.engine, opt);
  ro.jobs = g.jobs;
  RigidityReport rep = rigidity_test(s, a.n, a.family_level, ro);
  if (want_json(g))
    emit(g, out, "rigidity.json", json_text(to_json(rep)));
  else
    emit(g, out, "rigidity.csv", to_csv(rep));
  return kOk;
}

// ---------------------------------------------------------------------------

struct TilingArgs {
  std::string params = "1,1,1";
  long radius = 2;
  std::string t3_step = "2";
};

int cmd_tiling(const Globals& g, const TilingArgs& flags, const std::map<std::string, CLI::Option*>& opt,
               std::ostream& out) {
  Json cfg = load_config(g, {"params", "radius", "t3_step"}, "tiling");
  TilingArgs a;
  BoxParams params = parse_params(flags.params);
  if (opt.at("params")->count() == 0 && cfg.contains("params")) params = cfg["params"].get<BoxParams>();
  pick(a.radius, cfg, "radius", opt.at("radius"), flags.radius);
  pick(a.t3_step, cfg, "t3_step", opt.at("t3_step"), flags.t3_step);
  if (a.radius < 0 || a.radius > 12) throw Error(ErrorCode::ConfigError, "radius must be in [0, 12]");
  TilingOptions to;
  to.t3_step = parse_rational(a.t3_step);
  TilingReport r = tiling_check(params, a.radius, to, g.jobs);
  if (want_json(g)) {
    Json overlaps = Json::array();
    for (const auto& o : r.overlaps)
      overlaps.push_back({{"z", o.z}, {"w", o.w}, {"volume", to_string(o.volume)}});
    Json j{{"params", r.params},
           {"radius", r.radius},
           {"pairs_checked", r.pairs_checked},
           {"overlaps", overlaps},
           {"max_overlap_volume", to_string(r.max_overlap_volume)},
           {"window", r.window},
           {"window_volume", to_string(r.window_volume)},
           {"uncovered_volume", to_string(r.uncovered_volume)},
           {"pass", r.pass}};
    emit(g, out, "tiling.json", json_text(j));
  } else {
    std::ostringstream os;
    os << "alpha,beta,gamma,radius,pairs_checked,overlapping_pairs,max_overlap,max_overlap_dec,window_volume,"
          "window_volume_dec,uncovered,uncovered_dec,pass\n";
    os << to_string(r.params.alpha) << ',' << to_string(r.params.beta) << ',' << to_string(r.params.gamma) << ','
       << r.radius << ',' << r.pairs_checked << ',' << r.overlaps.size() << ',' << rat_cell(r.max_overlap_volume)
       << ',' << rat_cell(r.window_volume) << ',' << rat_cell(r.uncovered_volume) << ','
       << (r.pass ? "pass" : "fail") << '\n';
    emit(g, out, "tiling.csv", os.str());
  }
  return r.pass ? kOk : kCheckFailed;
}

// ---------------------------------------------------------------------------

struct FolnerArgs {
  std::vector<std::string> gammas{"1", "10", "100", "1000"};
  std::vector<std::string> k{"1,0,0", "0,1,0", "0,0,1"};
  std::uint64_t inverse_samples = 0;
};

int cmd_folner(const Globals& g, const FolnerArgs& flags, const std::map<std::string, CLI::Option*>& opt,
               std::ostream& out) {
  Json cfg = load_config(g, {"gammas", "params", "k", "inverse_samples", "seed"}, "folner");
  FolnerArgs a;
  pick(a.gammas, cfg, "gammas", opt.at("gammas"), flags.gammas);
  pick(a.k, cfg, "k", opt.at("k"), flags.k);
  pick(a.inverse_samples, cfg, "inverse_samples", opt.at("inverse_samples"), flags.inverse_samples);
  std::uint64_t seed = g.seed;
  pick(seed, cfg, "seed", g.seed_opt, g.seed);
  std::vector<BoxParams> params;
  if (cfg.contains("params") && opt.at("gammas")->count() == 0) {
    params = cfg["params"].get<std::vector<BoxParams>>();
  } else {
    for (const auto& x : a.gammas) {
      Rational gam = parse_rational(x);
      if (gam <= 0) throw Error(ErrorCode::ConfigError, "gamma must be positive");
      params.push_back({1, 1, gam});
    }
  }
  std::vector<GroupElement> k;
  for (const auto& e : a.k) k.push_back(parse_element(e));
  auto table = folner_table(k, params);
  std::vector<McEstimate> inv;
  for (std::size_t i = 0; i < params.size() && a.inverse_samples > 0; ++i)
    inv.push_back(inverse_symmetry_ratio(params[i], a.inverse_samples, derive_seed(seed, i), g.jobs));
  bool decreasing = true;
  for (std::size_t i = 1; i < table.size(); ++i)
    if (!(table[i].max_ratio < table[i - 1].max_ratio)) decreasing = false;
  if (want_json(g)) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < table.size(); ++i) {
      Json ratios = Json::array();
      for (const auto& r : table[i].ratios) ratios.push_back({{"exact", to_string(r)}, {"decimal", to_decimal(r)}});
      Json row{{"params", table[i].params}, {"ratios", ratios}, {"max", to_string(table[i].max_ratio)}};
      if (!inv.empty())
        row["inverse_ratio"] = {{"estimate", fmt_double(inv[i].estimate)}, {"std_error", fmt_double(inv[i].std_error)}};
      rows.push_back(row);
    }
    emit(g, out, "folner.json", json_text(Json{{"k", k}, {"rows", rows}, {"max_strictly_decreasing", decreasing}}));
  } else {
    std::ostringstream os;
    os << "alpha,beta,gamma";
    for (std::size_t j = 0; j < k.size(); ++j) os << ",ratio" << j << ",ratio" << j << "_dec";
    os << ",max,max_dec";
    if (!inv.empty()) os << ",inverse_ratio,inverse_se";
    os << '\n';
    for (std::size_t i = 0; i < table.size(); ++i) {
      const auto& row = table[i];
      os << to_string(row.params.alpha) << ',' << to_string(row.params.beta) << ',' << to_string(row.params.gamma);
      for (const auto& r : row.ratios) os << ',' << rat_cell(r);
      os << ',' << rat_cell(row.max_ratio);
      if (!inv.empty()) os << ',' << fmt_double(inv[i].estimate) << ',' << fmt_double(inv[i].std_error);
      os << '\n';
    }
    emit(g, out, "folner.csv", os.str());
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct SpectralArgs {
  std::string op = "tensor";
  std::string descriptor;
  std::string target = "center";
  std::string gamma = "1";
  std::string gamma_prime = "1";
  std::string alpha = "0";
  std::string beta = "0";
  std::string g = "0,0,0";
  std::string half_width = "8";
  std::string step = "1/64";
  std::string input;
};

std::string restricted_csv(const RestrictedType& r) {
  std::ostringstream os;
  os << "target,kind,point,weight,tag,multiplicity\n";
  for (const auto& t : r.terms) {
    std::string point;
    for (std::size_t i = 0; i < t.point.size(); ++i) point += (i ? " " : "") + to_string(t.point[i]);
    os << (r.target == RestrictionTarget::Center ? "center" : "h2a") << ','
       << (t.kind == SpectralTerm::Kind::Atom ? "atom" : t.kind == SpectralTerm::Kind::Line ? "line" : "tag") << ','
       << point << ',' << (t.weight ? to_string(*t.weight) : "inf") << ',' << t.tag << ',' << to_string(t.mult)
       << '\n';
  }
  return os.str();
}

int cmd_spectral(const Globals& g, const SpectralArgs& flags, const std::map<std::string, CLI::Option*>& opt,
                 std::ostream& out) {
  Json cfg = load_config(g, {"op", "descriptor", "target", "gamma", "gamma_prime", "alpha", "beta", "g", "L", "step",
                             "input"},
                         "spectral");
  SpectralArgs a;
  pick(a.op, cfg, "op", opt.at("op"), flags.op);
  pick(a.target, cfg, "target", opt.at("target"), flags.target);
  pick(a.gamma, cfg, "gamma", opt.at("gamma"), flags.gamma);
  pick(a.gamma_prime, cfg, "gamma_prime", opt.at("gamma_prime"), flags.gamma_prime);
  pick(a.alpha, cfg, "alpha", opt.at("alpha"), flags.alpha);
  pick(a.beta, cfg, "beta", opt.at("beta"), flags.beta);
  pick(a.g, cfg, "g", opt.at("g"), flags.g);
  pick(a.half_width, cfg, "L", opt.at("L"), flags.half_width);
  pick(a.step, cfg, "step", opt.at("step"), flags.step);
  pick(a.input, cfg, "input", opt.at("input"), flags.input);
  const bool json = want_json(g);

  if (a.op == "tensor") {
    SpectralTypeDescriptor d = tensor_rule(parse_rational(a.gamma), parse_rational(a.gamma_prime));
    emit(g, out, "tensor.json", json_text(to_json(d)));
    return kOk;
  }
  if (a.op == "restrict") {
    Json dj;
    if (opt.at("descriptor")->count() > 0)
      dj = read_json_file(flags.descriptor);
    else if (cfg.contains("descriptor"))
      dj = cfg["descriptor"].is_string() ? read_json_file(cfg["descriptor"].get<std::string>()) : cfg["descriptor"];
    else
      throw Error(ErrorCode::ConfigError, "restrict needs a descriptor");
    RestrictedType r = restrict_type(descriptor_from_json(dj), parse_restriction_target(a.target));
    if (json)
      emit(g, out, "restrict.json", json_text(to_json(r)));
    else
      emit(g, out, "restrict.csv", restricted_csv(r));
    return kOk;
  }
  if (a.op == "eval-ab") {
    GroupElement e = parse_element(a.g);
    auto v = eval_pi_ab(parse_real(a.alpha), parse_real(a.beta), e);
    Json j{{"alpha", a.alpha}, {"beta", a.beta}, {"g", e}, {"re", fmt_double(v.real())}, {"im", fmt_double(v.imag())},
           {"abs", fmt_double(std::abs(v))}};
    emit(g, out, "eval_ab.json", json_text(j));
    return kOk;
  }
  if (a.op == "eval-gamma") {
    Grid f;
    if (!a.input.empty()) {
      f = read_grid(a.input);
    } else {
      // Gaussian test vector.
      f = Grid::make(parse_real(a.half_width), parse_real(a.step));
      for (std::size_t k = 0; k < f.values.size(); ++k) f.values[k] = std::exp(-f.x(k) * f.x(k) / 2);
    }
    GroupElement e = parse_element(a.g);
    GammaResult r = eval_pi_gamma(parse_real(a.gamma), e, f, g.jobs);
    Json j{{"gamma", a.gamma},
           {"g", e},
           {"count", f.values.size()},
           {"shift_steps", r.shift_steps},
           {"shift_rounding", fmt_double(r.shift_rounding)},
           {"norm2_in", fmt_double(f.norm2())},
           {"norm2_out", fmt_double(r.out.norm2())},
           {"boundary_mass", fmt_double(r.boundary_mass)},
           {"defect", fmt_double(f.norm2() - r.out.norm2() - r.boundary_mass)}};
    if (!g.out.empty()) {
      std::filesystem::create_directories(g.out);
      write_grid((std::filesystem::path(g.out) / "pi_gamma.bin").string(), r.out);
    }
    emit(g, out, "eval_gamma.json", json_text(j));
    return kOk;
  }
  throw Error(ErrorCode::ConfigError, "op must be tensor, restrict, eval-ab or eval-gamma");
}

void add_engine_flags(CLI::App* sub, EngineFlags& f, std::map<std::string, CLI::Option*>& opt) {
  opt["budget"] = sub->add_option("--budget", f.budget, "Refinement part budget");
  opt["max_level"] = sub->add_option("--max-level", f.max_level, "Deepest level used by the engine");
  opt["strict"] = sub->add_flag("--strict", f.strict, "Fail instead of reporting unresolved mass");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rank-one actions of the Heisenberg group: builder and diagnostics", "hcf"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "JSON config for the subcommand");
  app.add_option("--out", g.out, "Output directory (stdout when omitted)");
  g.seed_opt = app.add_option("--seed", g.seed, "Root random seed");
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"csv", "json"}));

  std::function<int()> action;

  BuildArgs build;
  std::map<std::string, CLI::Option*> bopt;
  auto* b = app.add_subcommand("build", "Build a schedule and write schedule.json and build_report.json");
  bopt["kind"] = b->add_option("--kind", build.kind, "mixing | asymmetric | infinite");
  bopt["levels"] = b->add_option("--levels", build.levels, "Number of levels");
  bopt["gamma_integer"] = b->add_flag("--gamma-integer", build.gamma_integer, "Round every gamma_n up to an integer");
  b->callback([&] { action = [&] { return cmd_build(g, build, bopt, out); }; });

  std::string validate_path;
  auto* v = app.add_subcommand("validate", "Check conditions (I)-(IV) and the spacer series");
  auto* vpath = v->add_option("schedule", validate_path, "Schedule file");
  v->callback([&] { action = [&] { return cmd_validate(g, validate_path, vpath, out); }; });

  CorrelateArgs corr;
  std::map<std::string, CLI::Option*> opt;
  auto* c = app.add_subcommand("correlate", "Correlation decay and mixing-sequence tables");
  opt["schedule"] = c->add_option("--schedule", corr.schedule, "Schedule file");
  opt["mode"] = c->add_option("--mode", corr.mode, "decay | sequence");
  opt["direction"] = c->add_option("--dir", corr.direction, "a | b | c");
  opt["t"] = c->add_option("--t", corr.t, "Translation parameters")->delimiter(',');
  opt["a"] = c->add_option("--a", corr.a, "First test set");
  opt["b"] = c->add_option("--b", corr.b, "Second test set");
  opt["levels"] = c->add_option("--levels", corr.levels, "Levels for the sequence mode")->delimiter(',');
  opt["norm_level"] = c->add_option("--norm-level", corr.norm_level, "Level whose total mass is the unit");
  add_engine_flags(c, corr.engine, opt);
  c->callback([&] { action = [&] { return cmd_correlate(g, corr, opt, out); }; });

  AsymmetryArgs asym;
  auto* as = app.add_subcommand("asymmetry", "Mod-5 class statistics of an asymmetric step");
  std::map<std::string, CLI::Option*> aopt;
  aopt["schedule"] = as->add_option("--schedule", asym.schedule, "Schedule file");
  aopt["n"] = as->add_option("--n", asym.n, "Level (a multiple of 3)");
  aopt["a"] = as->add_option("--a", asym.a, "Set A");
  aopt["b"] = as->add_option("--b", asym.b, "Set B (X for the whole space)");
  aopt["c"] = as->add_option("--c", asym.c, "Set C (X for the whole space)");
  aopt["d"] = as->add_option("--d", asym.d, "Set D (X for the whole space)");
  aopt["thin_width"] = as->add_option("--thin-width", asym.thin_width, "t3 width of the thin slab");
  add_engine_flags(as, asym.engine, aopt);
  as->callback([&] { action = [&] { return cmd_asymmetry(g, asym, aopt, out); }; });

  RigidityArgs rig;
  auto* r = app.add_subcommand("rigidity", "Rigidity statistic along the period element");
  std::map<std::string, CLI::Option*> ropt;
  ropt["schedule"] = r->add_option("--schedule", rig.schedule, "Schedule file");
  ropt["n"] = r->add_option("--n", rig.n, "Levels")->delimiter(',');
  ropt["family_level"] = r->add_option("--family-level", rig.family_level, "Level of the test family");
  add_engine_flags(r, rig.engine, ropt);
  r->callback([&] { action = [&] { return cmd_rigidity(g, rig, ropt, out); }; });

  TilingArgs til;
  auto* t = app.add_subcommand("tiling", "Check that right translates I*phi(z) tile the group");
  std::map<std::string, CLI::Option*> topt;
  topt["params"] = t->add_option("--params", til.params, "alpha,beta,gamma");
  topt["radius"] = t->add_option("--radius", til.radius, "Lattice radius");
  topt["t3_step"] = t->add_option("--t3-step", til.t3_step, "Lattice step along t3 in units of gamma");
  t->callback([&] { action = [&] { return cmd_tiling(g, til, topt, out); }; });

  FolnerArgs fol;
  auto* f = app.add_subcommand("folner", "Folner ratios of boxes");
  std::map<std::string, CLI::Option*> fopt;
  fopt["gammas"] = f->add_option("--gammas", fol.gammas, "gamma values for boxes (1,1,gamma)");
  fopt["k"] = f->add_option("--k", fol.k, "Group elements t1,t2,t3");
  fopt["inverse_samples"] = f->add_option("--inverse-samples", fol.inverse_samples, "Monte Carlo samples for F^-1");
  f->callback([&] { action = [&] { return cmd_folner(g, fol, fopt, out); }; });

  SpectralArgs spec;
  auto* sp = app.add_subcommand("spectral", "Representation evaluation and spectral-type transforms");
  std::map<std::string, CLI::Option*> sopt;
  sopt["op"] = sp->add_option("--op", spec.op, "tensor | restrict | eval-ab | eval-gamma");
  sopt["descriptor"] = sp->add_option("--descriptor", spec.descriptor, "Descriptor JSON file");
  sopt["target"] = sp->add_option("--target", spec.target, "center | h2a");
  sopt["gamma"] = sp->add_option("--gamma", spec.gamma, "gamma");
  sopt["gamma_prime"] = sp->add_option("--gamma-prime", spec.gamma_prime, "gamma'");
  sopt["alpha"] = sp->add_option("--alpha", spec.alpha, "alpha");
  sopt["beta"] = sp->add_option("--beta", spec.beta, "beta");
  sopt["g"] = sp->add_option("--g", spec.g, "Group element t1,t2,t3");
  sopt["L"] = sp->add_option("--L", spec.half_width, "Grid half width");
  sopt["step"] = sp->add_option("--step", spec.step, "Grid step");
  sopt["input"] = sp->add_option("--input", spec.input, "Input grid file");
  sp->callback([&] { action = [&] { return cmd_spectral(g, spec, sopt, out); }; });

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kOk : kConfig;
  }
  try {
    return action ? action() : kConfig;
  } catch (const Error& e) {
    err << "error " << error_name(e.code()) << ": " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const nlohmann::json::exception& e) {
    err << "error CONFIG: " << e.what() << "\n";
    return kConfig;
  } catch (const std::invalid_argument& e) {
    err << "error CONFIG: " << e.what() << "\n";
    return kConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error IO: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kOther;
  }
}

}  // namespace hcf::cli

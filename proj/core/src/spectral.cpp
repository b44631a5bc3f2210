#include "hcf/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <tuple>

#include "hcf/error.hpp"
#include "hcf/parallel.hpp"

namespace hcf {

Multiplicity operator+(const Multiplicity& a, const Multiplicity& b) {
  if (a.infinite || b.infinite) return Multiplicity::inf();
  return Multiplicity::of(a.count + b.count);
}

std::string to_string(const Multiplicity& m) { return m.infinite ? "inf" : std::to_string(m.count); }

namespace {

std::optional<Rational> add_mass(const std::optional<Rational>& a, const std::optional<Rational>& b) {
  if (!a || !b) return std::nullopt;
  return Rational(*a + *b);
}

std::optional<ContinuousTag> merge_tags(const std::optional<ContinuousTag>& a, const std::optional<ContinuousTag>& b) {
  if (!a) return b;
  if (!b) return a;
  ContinuousTag t;
  t.name = a->name == b->name ? a->name : a->name + "+" + b->name;
  t.mass = add_mass(a->mass, b->mass);
  t.mult = a->mult + b->mult;
  return t;
}

Json mult_json(const Multiplicity& m) { return m.infinite ? Json("inf") : Json(m.count); }

Multiplicity mult_from_json(const Json& j) {
  if (j.is_string() && j.get<std::string>() == "inf") return Multiplicity::inf();
  if (j.is_number_unsigned() && j.get<unsigned long>() > 0) return Multiplicity::of(j.get<unsigned long>());
  throw Error(ErrorCode::ConfigError, "multiplicity must be a positive integer or \"inf\"");
}

Json mass_json(const std::optional<Rational>& m) { return m ? Json(to_string(*m)) : Json("inf"); }

std::optional<Rational> mass_from_json(const Json& j) {
  if (j.is_string() && j.get<std::string>() == "inf") return std::nullopt;
  return j.get<Rational>();
}

Json tag_json(const std::optional<ContinuousTag>& t) {
  if (!t) return nullptr;
  return Json{{"name", t->name}, {"mass", mass_json(t->mass)}, {"multiplicity", mult_json(t->mult)}};
}

std::optional<ContinuousTag> tag_from_json(const Json& j, const std::string& where) {
  if (j.is_null()) return std::nullopt;
  require_keys(j, {"name", "mass", "multiplicity"}, where);
  ContinuousTag t;
  t.name = j.at("name").get<std::string>();
  t.mass = j.contains("mass") ? mass_from_json(j.at("mass")) : std::nullopt;
  t.mult = j.contains("multiplicity") ? mult_from_json(j.at("multiplicity")) : Multiplicity::of(1);
  return t;
}

bool term_less(const SpectralTerm& a, const SpectralTerm& b) {
  return std::tie(a.kind, a.point, a.tag) < std::tie(b.kind, b.point, b.tag);
}

RestrictedType normalize(RestrictedType r) {
  std::sort(r.terms.begin(), r.terms.end(), term_less);
  std::vector<SpectralTerm> merged;
  for (auto& t : r.terms) {
    if (!merged.empty() && !term_less(merged.back(), t) && !term_less(t, merged.back())) {
      merged.back().weight = add_mass(merged.back().weight, t.weight);
      merged.back().mult = merged.back().mult + t.mult;
    } else {
      merged.push_back(std::move(t));
    }
  }
  r.terms = std::move(merged);
  return r;
}

}  // namespace

bool SpectralTypeDescriptor::empty() const {
  return planar_atoms.empty() && center_atoms.empty() && !planar_continuous && !center_continuous;
}

SpectralTypeDescriptor SpectralTypeDescriptor::normalized() const {
  SpectralTypeDescriptor out;
  std::map<std::pair<Rational, Rational>, PlanarAtom> planar;
  for (const auto& a : planar_atoms) {
    auto [it, fresh] = planar.try_emplace({a.alpha, a.beta}, a);
    if (!fresh) {
      it->second.weight += a.weight;
      it->second.mult = it->second.mult + a.mult;
    }
  }
  std::map<Rational, CenterAtom> center;
  for (const auto& a : center_atoms) {
    auto [it, fresh] = center.try_emplace(a.gamma, a);
    if (!fresh) {
      it->second.weight += a.weight;
      it->second.mult = it->second.mult + a.mult;
    }
  }
  for (auto& [k, a] : planar) out.planar_atoms.push_back(a);
  for (auto& [k, a] : center) out.center_atoms.push_back(a);
  out.planar_continuous = planar_continuous;
  out.center_continuous = center_continuous;
  return out;
}

void validate(const SpectralTypeDescriptor& d) {
  for (const auto& a : d.planar_atoms)
    if (a.weight < 0) throw Error(ErrorCode::ConfigError, "negative planar weight");
  for (const auto& a : d.center_atoms) {
    if (a.weight < 0) throw Error(ErrorCode::ConfigError, "negative center weight");
    if (a.gamma == 0) throw Error(ErrorCode::ConfigError, "center atom at gamma = 0");
  }
  for (const auto* t : {&d.planar_continuous, &d.center_continuous})
    if (*t && (*t)->mass && *(*t)->mass < 0) throw Error(ErrorCode::ConfigError, "negative continuous mass");
}

SpectralTypeDescriptor direct_sum(const SpectralTypeDescriptor& a, const SpectralTypeDescriptor& b) {
  SpectralTypeDescriptor out = a;
  out.planar_atoms.insert(out.planar_atoms.end(), b.planar_atoms.begin(), b.planar_atoms.end());
  out.center_atoms.insert(out.center_atoms.end(), b.center_atoms.begin(), b.center_atoms.end());
  out.planar_continuous = merge_tags(a.planar_continuous, b.planar_continuous);
  out.center_continuous = merge_tags(a.center_continuous, b.center_continuous);
  return out.normalized();
}

RestrictionTarget parse_restriction_target(const std::string& s) {
  if (s == "center") return RestrictionTarget::Center;
  if (s == "h2a") return RestrictionTarget::H2a;
  throw Error(ErrorCode::ConfigError, "restriction target must be center or h2a");
}

RestrictedType restrict_type(const SpectralTypeDescriptor& d, RestrictionTarget target) {
  validate(d);
  RestrictedType r;
  r.target = target;
  using K = SpectralTerm::Kind;
  if (target == RestrictionTarget::Center) {
    // Every one-dimensional representation is trivial on the center.
    if (!d.planar_atoms.empty() || d.planar_continuous) {
      SpectralTerm zero{K::Atom, {Rational(0)}, Rational(0), "", Multiplicity::of(0)};
      for (const auto& a : d.planar_atoms) {
        zero.weight = add_mass(zero.weight, a.weight);
        zero.mult = zero.mult + a.mult;
      }
      if (d.planar_continuous) {
        zero.weight = add_mass(zero.weight, d.planar_continuous->mass);
        zero.mult = Multiplicity::inf();
      }
      r.terms.push_back(zero);
    }
    for (const auto& a : d.center_atoms) r.terms.push_back({K::Atom, {a.gamma}, a.weight, "", Multiplicity::inf()});
    if (d.center_continuous)
      r.terms.push_back({K::Tag, {}, d.center_continuous->mass, d.center_continuous->name, Multiplicity::inf()});
  } else {
    // pi_{alpha,beta} restricts to the character (0, alpha); pi_gamma to gamma times the regular representation.
    for (const auto& a : d.planar_atoms) r.terms.push_back({K::Atom, {Rational(0), a.alpha}, a.weight, "", a.mult});
    if (d.planar_continuous)
      r.terms.push_back({K::Tag, {}, d.planar_continuous->mass, "delta0 x proj1(" + d.planar_continuous->name + ")",
                         d.planar_continuous->mult});
    for (const auto& a : d.center_atoms) r.terms.push_back({K::Line, {a.gamma}, a.weight, "lebesgue", a.mult});
    if (d.center_continuous)
      r.terms.push_back({K::Tag, {}, d.center_continuous->mass, d.center_continuous->name + " x lebesgue",
                         d.center_continuous->mult});
  }
  return normalize(std::move(r));
}

RestrictedType combine(const RestrictedType& a, const RestrictedType& b) {
  if (a.target != b.target) throw Error(ErrorCode::ConfigError, "cannot combine restrictions to different subgroups");
  RestrictedType r = a;
  r.terms.insert(r.terms.end(), b.terms.begin(), b.terms.end());
  return normalize(std::move(r));
}

SpectralTypeDescriptor tensor_rule(const Rational& gamma, const Rational& gamma_prime) {
  if (gamma == 0 || gamma_prime == 0) throw Error(ErrorCode::GammaZero, "tensor rule needs nonzero gamma");
  SpectralTypeDescriptor d;
  const Rational sum = gamma + gamma_prime;
  if (sum != 0) {
    d.center_atoms.push_back({Rational(1), sum, Multiplicity::inf()});
  } else {
    d.planar_continuous = ContinuousTag{"lebesgue", std::nullopt, Multiplicity::of(1)};
  }
  return d;
}

std::complex<double> eval_pi_ab(double alpha, double beta, const GroupElement& g) {
  return std::polar(1.0, alpha * to_double(g.t1) + beta * to_double(g.t2));
}

double Grid::norm2() const {
  double s = 0;
  for (const auto& v : values) s += std::norm(v);
  return s * step;
}

Grid Grid::make(double half_width, double step) {
  if (!(step > 0) || !(half_width > 0)) throw Error(ErrorCode::ConfigError, "grid needs positive width and step");
  Grid g;
  g.half_width = half_width;
  g.step = step;
  g.values.assign(static_cast<std::size_t>(std::llround(2 * half_width / step)) + 1, {0, 0});
  return g;
}

GammaResult eval_pi_gamma(double gamma, const GroupElement& g, const Grid& f, int jobs) {
  if (gamma == 0) throw Error(ErrorCode::GammaZero, "pi_gamma needs gamma != 0");
  GammaResult r;
  r.out = f;
  const double t1 = to_double(g.t1), t2 = to_double(g.t2), t3 = to_double(g.t3);
  r.shift_steps = std::lround(t1 / f.step);
  r.shift_rounding = t1 - static_cast<double>(r.shift_steps) * f.step;
  const long n = static_cast<long>(f.values.size());
  constexpr std::size_t chunk = 4096;
  const std::size_t chunks = (f.values.size() + chunk - 1) / chunk;
  parallel_for(chunks, jobs, [&](std::size_t c) {
    const std::size_t end = std::min(f.values.size(), (c + 1) * chunk);
    for (std::size_t k = c * chunk; k < end; ++k) {
      const long src = static_cast<long>(k) + r.shift_steps;
      r.out.values[k] = (src < 0 || src >= n)
                            ? std::complex<double>(0, 0)
                            : std::polar(1.0, gamma * (t3 + t2 * f.x(k))) * f.values[static_cast<std::size_t>(src)];
    }
  });
  // Samples whose image falls outside the window.
  for (long j = 0; j < n; ++j) {
    const long k = j - r.shift_steps;
    if (k < 0 || k >= n) r.boundary_mass += std::norm(f.values[static_cast<std::size_t>(j)]);
  }
  r.boundary_mass *= f.step;
  return r;
}

void write_grid(const std::string& path, const Grid& g) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoError, "cannot write " + path);
  Json header{{"format", "hcf-grid"}, {"dtype", "complex64-le"}, {"L", g.half_width}, {"step", g.step},
              {"count", g.values.size()}};
  os << header.dump() << '\n';
  for (const auto& v : g.values) {
    for (float part : {static_cast<float>(v.real()), static_cast<float>(v.imag())}) {
      std::uint32_t bits;
      std::memcpy(&bits, &part, sizeof bits);
      for (int b = 0; b < 4; ++b) os.put(static_cast<char>((bits >> (8 * b)) & 0xFF));
    }
  }
  if (!os) throw Error(ErrorCode::IoError, "short write to " + path);
}

Grid read_grid(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::IoError, "cannot read " + path);
  std::string line;
  std::getline(is, line);
  Json header = Json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("format", "") != "hcf-grid")
    throw Error(ErrorCode::ConfigError, path + " is not a grid file");
  Grid g;
  g.half_width = header.at("L").get<double>();
  g.step = header.at("step").get<double>();
  g.values.resize(header.at("count").get<std::size_t>());
  for (auto& v : g.values) {
    float parts[2];
    for (float& part : parts) {
      unsigned char bytes[4];
      is.read(reinterpret_cast<char*>(bytes), 4);
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[b]) << (8 * b);
      std::memcpy(&part, &bits, sizeof part);
    }
    v = {parts[0], parts[1]};
  }
  if (!is) throw Error(ErrorCode::IoError, "truncated grid file " + path);
  return g;
}

Json to_json(const SpectralTypeDescriptor& d) {
  Json planar = Json::array(), center = Json::array();
  for (const auto& a : d.planar_atoms)
    planar.push_back({{"weight", to_string(a.weight)},
                      {"point", {to_string(a.alpha), to_string(a.beta)}},
                      {"multiplicity", mult_json(a.mult)}});
  for (const auto& a : d.center_atoms)
    center.push_back(
        {{"weight", to_string(a.weight)}, {"point", to_string(a.gamma)}, {"multiplicity", mult_json(a.mult)}});
  return Json{{"planar_atoms", planar},
              {"planar_continuous", tag_json(d.planar_continuous)},
              {"center_atoms", center},
              {"center_continuous", tag_json(d.center_continuous)}};
}

SpectralTypeDescriptor descriptor_from_json(const Json& j) {
  require_keys(j, {"planar_atoms", "planar_continuous", "center_atoms", "center_continuous"}, "descriptor");
  SpectralTypeDescriptor d;
  for (const auto& a : j.value("planar_atoms", Json::array())) {
    require_keys(a, {"weight", "point", "multiplicity"}, "planar atom");
    const auto& p = a.at("point");
    if (!p.is_array() || p.size() != 2) throw Error(ErrorCode::ConfigError, "planar atom point must be [alpha, beta]");
    d.planar_atoms.push_back({a.at("weight").get<Rational>(), p[0].get<Rational>(), p[1].get<Rational>(),
                              a.contains("multiplicity") ? mult_from_json(a.at("multiplicity")) : Multiplicity::of(1)});
  }
  for (const auto& a : j.value("center_atoms", Json::array())) {
    require_keys(a, {"weight", "point", "multiplicity"}, "center atom");
    d.center_atoms.push_back({a.at("weight").get<Rational>(), a.at("point").get<Rational>(),
                              a.contains("multiplicity") ? mult_from_json(a.at("multiplicity")) : Multiplicity::of(1)});
  }
  d.planar_continuous = tag_from_json(j.value("planar_continuous", Json()), "planar_continuous");
  d.center_continuous = tag_from_json(j.value("center_continuous", Json()), "center_continuous");
  validate(d);
  return d;
}

Json to_json(const RestrictedType& r) {
  Json terms = Json::array();
  for (const auto& t : r.terms) {
    Json point = Json::array();
    for (const auto& x : t.point) point.push_back(to_string(x));
    const char* kind = t.kind == SpectralTerm::Kind::Atom ? "atom" : t.kind == SpectralTerm::Kind::Line ? "line" : "tag";
    terms.push_back({{"kind", kind},
                     {"point", point},
                     {"weight", mass_json(t.weight)},
                     {"tag", t.tag},
                     {"multiplicity", mult_json(t.mult)}});
  }
  return Json{{"target", r.target == RestrictionTarget::Center ? "center" : "h2a"}, {"terms", terms}};
}

}  // namespace hcf

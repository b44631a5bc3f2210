#include "hcf/json_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "hcf/error.hpp"

namespace hcf {

namespace {

const Json& at(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::ConfigError, std::string("missing key '") + key + "'");
  return j.at(key);
}

}  // namespace

void to_json(Json& j, const GroupElement& g) { j = Json::array({g.t1, g.t2, g.t3}); }

void from_json(const Json& j, GroupElement& g) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::ConfigError, "group element must be [t1, t2, t3]");
  g = {j[0].get<Rational>(), j[1].get<Rational>(), j[2].get<Rational>()};
}

void to_json(Json& j, const Interval& i) { j = Json::array({i.lo, i.hi}); }

void from_json(const Json& j, Interval& i) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::ConfigError, "interval must be [lo, hi]");
  i = {j[0].get<Rational>(), j[1].get<Rational>()};
}

void to_json(Json& j, const BoxParams& b) { j = Json::array({b.alpha, b.beta, b.gamma}); }

void from_json(const Json& j, BoxParams& b) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::ConfigError, "box parameters must be [alpha, beta, gamma]");
  b = {j[0].get<Rational>(), j[1].get<Rational>(), j[2].get<Rational>()};
  if (b.alpha <= 0 || b.beta <= 0 || b.gamma <= 0)
    throw Error(ErrorCode::ConfigError, "box parameters must be positive");
}

void to_json(Json& j, const BishearBox& b) {
  j = Json{{"i1", b.i1}, {"i2", b.i2}, {"i3", b.i3}, {"p", b.p}, {"q", b.q}};
}

void from_json(const Json& j, BishearBox& b) {
  require_keys(j, {"i1", "i2", "i3", "p", "q"}, "box");
  b.i1 = at(j, "i1").get<Interval>();
  b.i2 = at(j, "i2").get<Interval>();
  b.i3 = at(j, "i3").get<Interval>();
  b.p = j.contains("p") ? j.at("p").get<Rational>() : Rational(0);
  b.q = j.contains("q") ? j.at("q").get<Rational>() : Rational(0);
}

void to_json(Json& j, const Region& r) { j = r.parts; }

void from_json(const Json& j, Region& r) {
  if (!j.is_array()) throw Error(ErrorCode::ConfigError, "region must be a list of boxes");
  r.parts = j.get<std::vector<BishearBox>>();
}

void require_keys(const Json& object, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!object.is_object()) throw Error(ErrorCode::ConfigError, where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : object.items())
    if (!ok.count(key)) throw Error(ErrorCode::ConfigError, where + ": unknown key '" + key + "'");
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

}  // namespace hcf

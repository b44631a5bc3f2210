#pragma once

#include <nlohmann/json.hpp>

#include "hcf/error.hpp"
#include "hcf/group.hpp"
#include "hcf/rational.hpp"
#include "hcf/shearbox.hpp"

namespace nlohmann {

template <>
struct adl_serializer<mpq_class> {
  static void to_json(json& j, const mpq_class& x) { j = hcf::to_string(x); }
  static void from_json(const json& j, mpq_class& x) {
    if (j.is_string()) {
      x = hcf::parse_rational(j.get<std::string>());
    } else if (j.is_number_integer()) {
      x = mpq_class(mpz_class(std::to_string(j.get<long long>())));
    } else {
      throw hcf::Error(hcf::ErrorCode::ConfigError, "expected a rational string \"p/q\", got " + j.dump());
    }
  }
};

}  // namespace nlohmann

namespace hcf {

using Json = nlohmann::json;

void to_json(Json& j, const GroupElement& g);
void from_json(const Json& j, GroupElement& g);
void to_json(Json& j, const Interval& i);
void from_json(const Json& j, Interval& i);
void to_json(Json& j, const BoxParams& b);
void from_json(const Json& j, BoxParams& b);
void to_json(Json& j, const BishearBox& b);
void from_json(const Json& j, BishearBox& b);
void to_json(Json& j, const Region& r);
void from_json(const Json& j, Region& r);

// Rejects any key of `object` not in `allowed`.
void require_keys(const Json& object, std::initializer_list<const char*> allowed, const std::string& where);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace hcf

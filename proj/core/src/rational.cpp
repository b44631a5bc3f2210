#include "hcf/rational.hpp"

#include <cmath>
#include <cstdio>
#include <vector>

#include "hcf/error.hpp"

namespace hcf {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char ch : s)
    if (ch < '0' || ch > '9') return false;
  return true;
}

mpz_class parse_integer(std::string_view s, std::string_view whole) {
  bool neg = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    neg = s.front() == '-';
    s.remove_prefix(1);
  }
  if (!all_digits(s)) throw Error(ErrorCode::ConfigError, "malformed rational: '" + std::string(whole) + "'");
  mpz_class v(std::string(s), 10);
  return neg ? mpz_class(-v) : v;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  auto slash = text.find('/');
  if (slash != std::string_view::npos) {
    mpz_class num = parse_integer(text.substr(0, slash), text);
    std::string_view den_text = text.substr(slash + 1);
    if (!all_digits(den_text)) throw Error(ErrorCode::ConfigError, "malformed rational: '" + std::string(text) + "'");
    mpz_class den(std::string(den_text), 10);
    if (den == 0) throw Error(ErrorCode::ConfigError, "zero denominator in '" + std::string(text) + "'");
    Rational r(num, den);
    r.canonicalize();
    return r;
  }
  auto dot = text.find('.');
  if (dot == std::string_view::npos) return Rational(parse_integer(text, text));
  std::string_view ip = text.substr(0, dot);
  std::string_view fp = text.substr(dot + 1);
  bool neg = !ip.empty() && ip.front() == '-';
  if (!ip.empty() && (ip.front() == '-' || ip.front() == '+')) ip.remove_prefix(1);
  if ((ip.empty() && fp.empty()) || (!ip.empty() && !all_digits(ip)) || (!fp.empty() && !all_digits(fp)))
    throw Error(ErrorCode::ConfigError, "malformed rational: '" + std::string(text) + "'");
  std::string digits = std::string(ip) + std::string(fp);
  mpz_class num(digits.empty() ? std::string("0") : digits, 10);
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 10, fp.size());
  Rational r(neg ? mpz_class(-num) : num, den);
  r.canonicalize();
  return r;
}

std::string to_string(const Rational& x) {
  Rational c = x;
  c.canonicalize();
  return c.get_num().get_str() + "/" + c.get_den().get_str();
}

std::string to_decimal(const Rational& x) {
  if (x == 0) return "0";
  mpf_class f(x, 512);
  std::vector<char> buf(64);
  int n = gmp_snprintf(buf.data(), buf.size(), "%.12Fg", f.get_mpf_t());
  if (n >= static_cast<int>(buf.size())) {
    buf.resize(static_cast<std::size_t>(n) + 1);
    gmp_snprintf(buf.data(), buf.size(), "%.12Fg", f.get_mpf_t());
  }
  return std::string(buf.data());
}

double to_double(const Rational& x) { return x.get_d(); }

Rational rabs(const Rational& x) { return x < 0 ? Rational(-x) : x; }
Rational rmin(const Rational& a, const Rational& b) { return a < b ? a : b; }
Rational rmax(const Rational& a, const Rational& b) { return a < b ? b : a; }

mpz_class floor_int(const Rational& x) {
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return q;
}

mpz_class ceil_int(const Rational& x) {
  mpz_class q;
  mpz_cdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return q;
}

Interval intersect(const Interval& a, const Interval& b) { return {rmax(a.lo, b.lo), rmin(a.hi, b.hi)}; }

Rational from_double(double x) {
  if (!std::isfinite(x)) throw Error(ErrorCode::ConfigError, "non-finite value");
  return Rational(x);
}

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ShearMismatch: return "SHEAR_MISMATCH";
    case ErrorCode::BudgetExceeded: return "BUDGET_EXCEEDED";
    case ErrorCode::LevelOutOfRange: return "LEVEL_OUT_OF_RANGE";
    case ErrorCode::Overflow: return "OVERFLOW";
    case ErrorCode::GenerationFailed: return "GENERATION_FAILED";
    case ErrorCode::GammaZero: return "GAMMA_ZERO";
    case ErrorCode::ConfigError: return "CONFIG_ERROR";
    case ErrorCode::ReportFail: return "REPORT_FAIL";
    case ErrorCode::ScheduleMismatch: return "SCHEDULE_MISMATCH";
    case ErrorCode::IoError: return "IO_ERROR";
  }
  return "UNKNOWN";
}

}  // namespace hcf

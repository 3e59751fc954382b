#include "rdmft/rational.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

#include "rdmft/errors.hpp"

namespace rdmft {
namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw ConsistencyError("rational arithmetic overflow");
  }
  return out;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    throw ConsistencyError("rational arithmetic overflow");
  }
  return out;
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
  if (den == 0) throw ConsistencyError("rational with zero denominator");
  if (den_ < 0) {
    num_ = checked_mul(num_, -1);
    den_ = checked_mul(den_, -1);
  }
  const std::int64_t g = std::gcd(num_, den_);
  if (g > 1) {
    num_ /= g;
    den_ /= g;
  }
}

Rational Rational::operator-() const { return Rational(checked_mul(num_, -1), den_); }

Rational& Rational::operator+=(const Rational& o) {
  const std::int64_t g = std::gcd(den_, o.den_);
  const std::int64_t lhs = checked_mul(num_, o.den_ / g);
  const std::int64_t rhs = checked_mul(o.num_, den_ / g);
  *this = Rational(checked_add(lhs, rhs), checked_mul(den_ / g, o.den_));
  return *this;
}

Rational& Rational::operator-=(const Rational& o) { return *this += -o; }

Rational& Rational::operator*=(const Rational& o) {
  // Cross-reduce first so intermediate products stay small.
  const std::int64_t g1 = std::gcd(num_, o.den_);
  const std::int64_t g2 = std::gcd(o.num_, den_);
  const std::int64_t a = g1 ? num_ / g1 : num_;
  const std::int64_t d = g1 ? o.den_ / g1 : o.den_;
  const std::int64_t c = g2 ? o.num_ / g2 : o.num_;
  const std::int64_t b = g2 ? den_ / g2 : den_;
  *this = Rational(checked_mul(a, c), checked_mul(b, d));
  return *this;
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.num_ == 0) throw ConsistencyError("rational division by zero");
  return *this *= Rational(o.den_, o.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  const Rational diff = a - b;
  return diff.num() <=> 0;
}

std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::from_double(double value, std::int64_t max_den, double tol) {
  if (!std::isfinite(value)) throw ConsistencyError("cannot convert non-finite value to rational");
  // Continued-fraction convergents h/k.
  std::int64_t h_prev = 1, h = static_cast<std::int64_t>(std::floor(value));
  std::int64_t k_prev = 0, k = 1;
  double frac = value - std::floor(value);
  while (std::abs(value - static_cast<double>(h) / static_cast<double>(k)) > tol) {
    if (frac < 1e-15) break;
    const double inv = 1.0 / frac;
    const auto a = static_cast<std::int64_t>(std::floor(inv));
    frac = inv - std::floor(inv);
    const std::int64_t h_next = checked_add(checked_mul(a, h), h_prev);
    const std::int64_t k_next = checked_add(checked_mul(a, k), k_prev);
    if (k_next > max_den) break;
    h_prev = h;
    k_prev = k;
    h = h_next;
    k = k_next;
  }
  if (std::abs(value - static_cast<double>(h) / static_cast<double>(k)) > tol) {
    throw ConsistencyError("no small-denominator rational within tolerance of " +
                           std::to_string(value));
  }
  return Rational(h, k);
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.to_string(); }

}  // namespace rdmft

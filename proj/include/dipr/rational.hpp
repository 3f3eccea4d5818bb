#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dipr {

// Exact rational arithmetic for the rate calculator; numerators and
// denominators stay tiny, so int64 never overflows here.
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n) : num(n), den(1) {}
  Rational(long long n, long long d) : num(n), den(d) { normalize(); }

  void normalize() {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

  std::string to_string() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
  }

  friend Rational operator+(Rational a, Rational b) {
    return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
  }
  friend Rational operator-(Rational a, Rational b) {
    return Rational(a.num * b.den - b.num * a.den, a.den * b.den);
  }
  friend Rational operator*(Rational a, Rational b) {
    return Rational(a.num * b.num, a.den * b.den);
  }
  friend Rational operator/(Rational a, Rational b) {
    if (b.num == 0) throw std::invalid_argument("rational division by zero");
    return Rational(a.num * b.den, a.den * b.num);
  }
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return a.num * b.den < b.num * a.den;
  }
  friend bool operator<=(const Rational& a, const Rational& b) {
    return a.num * b.den <= b.num * a.den;
  }
};

inline Rational rational_min(Rational a, Rational b) { return a < b ? a : b; }
inline Rational rational_max(Rational a, Rational b) { return a < b ? b : a; }

// Best rational approximation with denominator at most max_den.
inline Rational rational_from_double(double x, long long max_den) {
  if (max_den < 1) throw std::invalid_argument("max_den must be positive");
  Rational best(0, 1);
  double best_err = 1e300;
  for (long long d = 1; d <= max_den; ++d) {
    const long long n = static_cast<long long>(x * static_cast<double>(d) +
                                               (x >= 0 ? 0.5 : -0.5));
    const double err =
        std::abs(x - static_cast<double>(n) / static_cast<double>(d));
    if (err < best_err - 1e-15) {
      best = Rational(n, d);
      best_err = err;
    }
  }
  return best;
}

}  // namespace dipr

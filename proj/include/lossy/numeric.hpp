#pragma once

#include <cmath>
#include <cstdint>

#include "lossy/rational.hpp"

namespace lossy {

// Absolute tolerance for threshold inequalities on the float path:
// "a >= t" is evaluated as "a >= t - kTauCmp" so that rounding noise on
// either side of a threshold cannot shift the first index that reaches it.
inline constexpr double kTauCmp = 1e-12;

// Absolute tolerance for "this vector is a probability law" checks.
inline constexpr double kTauMass = 1e-9;

template <class T>
struct Scalar;

template <>
struct Scalar<double> {
  static constexpr bool exact = false;
  static bool ge(double a, double b) { return a >= b - kTauCmp; }
  static bool mass_eq(double a, double b) { return std::fabs(a - b) <= kTauMass; }
  static bool finite(double a) { return std::isfinite(a); }
  static double to_double(double a) { return a; }
  static double from_fraction(std::int64_t num, std::int64_t den) {
    return static_cast<double>(num) / static_cast<double>(den);
  }
};

template <>
struct Scalar<Rational> {
  static constexpr bool exact = true;
  static bool ge(const Rational& a, const Rational& b) { return a >= b; }
  static bool mass_eq(const Rational& a, const Rational& b) { return a == b; }
  static bool finite(const Rational&) { return true; }
  static double to_double(const Rational& a) { return a.get_d(); }
  static Rational from_fraction(std::int64_t num, std::int64_t den) {
    return make_rational(num, den);
  }
};

// Threshold comparisons shared by every module so "reaches t" means the
// same thing everywhere.
template <class T>
bool ge_thresh(const T& a, const T& b) {
  return Scalar<T>::ge(a, b);
}

template <class T>
bool le_thresh(const T& a, const T& b) {
  return Scalar<T>::ge(b, a);
}

template <class T>
double to_double(const T& a) {
  return Scalar<T>::to_double(a);
}

}  // namespace lossy

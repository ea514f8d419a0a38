#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lossy {

// Arbitrary-precision rational scalar backing the exact arithmetic mode.
using Rational = mpq_class;

inline Rational make_rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::invalid_argument("rational: zero denominator");
  Rational r(static_cast<long>(num), static_cast<long>(den));
  r.canonicalize();
  return r;
}

// Parses "p" or "p/q" in base 10.
inline Rational parse_rational(const std::string& text) {
  Rational r;
  if (text.empty() || r.set_str(text, 10) != 0 || r.get_den() == 0)
    throw std::invalid_argument("rational: cannot parse '" + text + "'");
  r.canonicalize();
  return r;
}

inline std::string to_string(const Rational& r) { return r.get_str(); }

}  // namespace lossy

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "lossy/dball_code.hpp"
#include "lossy/model.hpp"

namespace lossy {

inline constexpr std::size_t kDefaultAlphabetBudget = std::size_t(1) << 14;

// i.i.d. block extension of a base instance: product law over the n-fold
// alphabet, additive block distortion at level n*D. The block distortion is
// always evaluated on demand from the base matrix, never materialized.
template <class T>
struct ProductInstance {
  Instance<T> base;
  std::uint32_t n{1};
  std::vector<T> probs;  // product law, lexicographic block order
  T level{};             // n * base level
  std::size_t y_count{};
  // digit tables: [position][block index] -> base symbol index
  std::vector<std::vector<std::uint16_t>> xdigits, ydigits;

  std::size_t num_x() const { return probs.size(); }
  std::size_t num_y() const { return y_count; }
  const T& prob(std::size_t x) const { return probs[x]; }

  // Additive block distortion, bailing out as soon as the running sum
  // leaves the ball.
  bool in_ball(std::size_t x, std::size_t y) const {
    T sum(0);
    for (std::uint32_t p = 0; p < n; ++p) {
      sum += base.distortion.matrix[xdigits[p][x]][ydigits[p][y]];
      if (!le_thresh(sum, level)) return false;
    }
    return true;
  }

  T block_distortion(std::size_t x, std::size_t y) const {
    T sum(0);
    for (std::uint32_t p = 0; p < n; ++p)
      sum += base.distortion.matrix[xdigits[p][x]][ydigits[p][y]];
    return sum;
  }

  std::string x_label(std::size_t x) const { return join_label(base.source.symbols, xdigits, x); }
  std::string y_label(std::size_t y) const { return join_label(base.y_symbols, ydigits, y); }

  // Explicit instance over the block alphabets with the full distortion
  // matrix; intended for small n (oracle tests, file export).
  Instance<T> materialize(std::size_t max_matrix_entries = std::size_t(1) << 22) const {
    if (num_x() * num_y() > max_matrix_entries)
      throw BudgetError("materialize: block distortion matrix exceeds its budget");
    Instance<T> inst;
    inst.source.probs = probs;
    inst.source.symbols.reserve(num_x());
    for (std::size_t x = 0; x < num_x(); ++x) inst.source.symbols.push_back(x_label(x));
    inst.y_symbols.reserve(num_y());
    for (std::size_t y = 0; y < num_y(); ++y) inst.y_symbols.push_back(y_label(y));
    inst.distortion.level = level;
    inst.distortion.matrix.assign(num_x(), std::vector<T>(num_y(), T(0)));
    for (std::size_t x = 0; x < num_x(); ++x)
      for (std::size_t y = 0; y < num_y(); ++y)
        inst.distortion.matrix[x][y] = block_distortion(x, y);
    inst.epsilon = base.epsilon;
    inst.delta = base.delta;
    return inst;
  }

 private:
  std::string join_label(const std::vector<std::string>& alphabet,
                         const std::vector<std::vector<std::uint16_t>>& digits,
                         std::size_t index) const {
    bool compact = true;
    for (const std::string& s : alphabet) compact = compact && s.size() == 1;
    std::string out;
    for (std::uint32_t p = 0; p < n; ++p) {
      if (p > 0 && !compact) out += ',';
      out += alphabet[digits[p][index]];
    }
    return out;
  }
};

namespace detail {

inline std::size_t checked_pow(std::size_t b, std::uint32_t n, std::size_t budget) {
  std::size_t v = 1;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (b == 0 || v > budget / b) return budget + 1;
    v *= b;
  }
  return v;
}

inline std::vector<std::vector<std::uint16_t>> digit_tables(std::size_t base,
                                                            std::uint32_t n,
                                                            std::size_t count) {
  // First position is the most significant digit (lexicographic order).
  std::vector<std::vector<std::uint16_t>> digits(n, std::vector<std::uint16_t>(count));
  for (std::size_t v = 0; v < count; ++v) {
    std::size_t rem = v;
    for (std::uint32_t p = n; p-- > 0;) {
      digits[p][v] = static_cast<std::uint16_t>(rem % base);
      rem /= base;
    }
  }
  return digits;
}

}  // namespace detail

template <class T>
ProductInstance<T> expand(const Instance<T>& base, std::uint32_t n,
                          std::size_t budget = kDefaultAlphabetBudget) {
  validate(base);
  if (n == 0) throw SchemaError("blocklength must be >= 1");
  const std::size_t bx = base.num_x();
  const std::size_t by = base.num_y();
  if (bx > 0xffff || by > 0xffff) throw BudgetError("base alphabet too large to index");
  const std::size_t nx = detail::checked_pow(bx, n, budget);
  const std::size_t ny = detail::checked_pow(by, n, budget);
  if (nx > budget || ny > budget)
    throw BudgetError("product alphabet exceeds the budget of " + std::to_string(budget) +
                      " symbols");

  ProductInstance<T> prod;
  prod.base = base;
  prod.n = n;
  prod.y_count = ny;
  prod.level = base.distortion.level * T(static_cast<int>(n));
  prod.xdigits = detail::digit_tables(bx, n, nx);
  prod.ydigits = detail::digit_tables(by, n, ny);
  prod.probs.assign(nx, T(1));
  for (std::size_t x = 0; x < nx; ++x)
    for (std::uint32_t p = 0; p < n; ++p)
      prod.probs[x] *= base.source.probs[prod.xdigits[p][x]];
  return prod;
}

template <class T>
GreedyCover<T> greedy_cover(const ProductInstance<T>& prod,
                            std::size_t membership_cap = kDefaultMembershipCap) {
  return detail::greedy_cover_kernel<T>(prod, prod.base.epsilon, prod.base.delta,
                                        membership_cap);
}

template <class T>
double g_value(const ProductInstance<T>& prod) {
  try {
    return g_value(greedy_cover(prod));
  } catch (const InfeasibleError&) {
    return std::numeric_limits<double>::infinity();
  }
}

// Bits per source symbol at blocklength n; +infinity when infeasible.
template <class T>
double g_rate(const Instance<T>& base, std::uint32_t n,
              std::size_t budget = kDefaultAlphabetBudget) {
  return g_value(expand(base, n, budget)) / static_cast<double>(n);
}

// Per-symbol rate bracket at blocklength n. The optimal rate lies in
// (lower, upper_stochastic]; deterministic encoders stay within
// upper_deterministic.
struct Sandwich {
  double g_bits{};
  double lower{};
  double upper_stochastic{};
  double upper_deterministic{};
  std::uint64_t i_star{};
  std::uint64_t k_star{};
};

template <class T>
Sandwich sandwich(const Instance<T>& base, std::uint32_t n,
                  std::size_t budget = kDefaultAlphabetBudget) {
  const ProductInstance<T> prod = expand(base, n, budget);
  Sandwich s;
  GreedyCover<T> cover;
  try {
    cover = greedy_cover(prod);
  } catch (const InfeasibleError&) {
    s.g_bits = s.lower = s.upper_stochastic = s.upper_deterministic =
        std::numeric_limits<double>::infinity();
    return s;
  }
  const double g = g_value(cover);
  const double nn = static_cast<double>(n);
  s.g_bits = g;
  s.i_star = cover.i_star;
  s.k_star = cover.k_star;
  s.lower = (g - 1.0) / nn;
  s.upper_stochastic = static_cast<double>(floor_log2(cover.i_star)) / nn;
  s.upper_deterministic =
      std::floor(g + 2.0 * std::log2(std::exp(1.0)) / static_cast<double>(cover.i_star)) / nn;
  return s;
}

}  // namespace lossy

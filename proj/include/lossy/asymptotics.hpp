#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lossy/blocklength.hpp"
#include "lossy/model.hpp"

namespace lossy {

// Solution of the single-letter rate-distortion problem at level D together
// with the statistics the normal approximation needs.
struct RdSolution {
  double rate{};                   // R_X(D), bits
  std::vector<double> output_law;  // optimal reproduction law
  double slope{};                  // lambda* = -R'_X(D), bits per distortion unit
  std::vector<double> tilted;      // per-symbol tilted information, bits
  double tilted_mean{};            // equals rate up to solver tolerance
  double dispersion{};             // variance of tilted information, bits^2
  double d_min{};                  // E[min_y d(X,y)]
  double d_max{};                  // min_y E[d(X,y)]
  std::uint64_t iterations{};      // total inner-loop iterations
};

std::pair<double, double> d_bounds(const std::vector<double>& probs,
                                   const std::vector<std::vector<double>>& distortion);

// Alternating-minimization solve, slope-parameterized and bisected to the
// target level. Levels at or above d_max return the zero-rate solution;
// levels at or below d_min are outside the domain.
RdSolution rate_distortion(const std::vector<double>& probs,
                           const std::vector<std::vector<double>>& distortion, double level);

// Upper tail of the standard normal, and its inverse by bracketed root
// refinement.
double q_function(double z);
double q_inverse(double p);

// Second-order (dispersion) approximation of the per-symbol optimal rate at
// blocklength n: R_X(D) + sqrt(V_X(D)/n) * Qinv(epsilon + delta). Carries an
// O(log n / n) remainder, so callers compare rather than equate.
double gaussian_approx(const Instance<double>& base, std::uint64_t n);

// Rate at the split (epsilon + delta, 0), which matches the original split's
// rate by the sum invariance; exposes the zero-overflow, fixed-length view.
template <class T>
double fixed_length_bridge(const Instance<T>& base, std::uint32_t n,
                           std::size_t budget = kDefaultAlphabetBudget) {
  validate(base);
  const T total = base.epsilon + base.delta;
  if (ge_thresh(total, T(1))) return 0.0;
  Instance<T> shifted = base;
  shifted.epsilon = total;
  shifted.delta = T(0);
  return g_rate(shifted, n, budget);
}

}  // namespace lossy

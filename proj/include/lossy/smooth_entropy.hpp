#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "lossy/errors.hpp"
#include "lossy/model.hpp"

namespace lossy {

// A law sorted non-increasing together with the sort permutation
// (permutation[rank] = original index). The sort is stable, so ties keep
// their input order and downstream consumers are deterministic.
template <class T>
struct SortedLaw {
  std::vector<T> probs_desc;
  std::vector<std::size_t> permutation;
};

template <class T>
SortedLaw<T> sorted_law(const std::vector<T>& law) {
  SortedLaw<T> s;
  s.permutation.resize(law.size());
  std::iota(s.permutation.begin(), s.permutation.end(), std::size_t{0});
  std::stable_sort(s.permutation.begin(), s.permutation.end(),
                   [&](std::size_t a, std::size_t b) { return law[a] > law[b]; });
  s.probs_desc.reserve(law.size());
  for (std::size_t idx : s.permutation) s.probs_desc.push_back(law[idx]);
  return s;
}

// Cardinality of the smallest set whose mass reaches 1 - delta: the length
// of the shortest descending-order prefix meeting that threshold.
template <class T>
std::uint64_t smooth_max_entropy_count(const std::vector<T>& law, const T& delta) {
  if (delta < T(0) || delta >= T(1)) throw SchemaError("delta must lie in [0,1)");
  validate_law(law);
  const SortedLaw<T> s = sorted_law(law);
  const T threshold = T(1) - delta;
  T cum(0);
  std::uint64_t count = 0;
  for (const T& p : s.probs_desc) {
    if (ge_thresh(cum, threshold)) break;
    if (!(p > T(0))) break;  // support exhausted
    cum += p;
    ++count;
  }
  return count > 0 ? count : 1;
}

template <class T>
double smooth_max_entropy(const std::vector<T>& law, const T& delta) {
  return std::log2(static_cast<double>(smooth_max_entropy_count(law, delta)));
}

// True iff every prefix sum of b sorted descending dominates the matching
// prefix sum of a, with equal totals. Vectors of different lengths are
// zero-padded to a common length first.
template <class T>
bool majorizes(const std::vector<T>& b, const std::vector<T>& a) {
  std::vector<T> bs = b;
  std::vector<T> as = a;
  const std::size_t m = std::max(bs.size(), as.size());
  bs.resize(m, T(0));
  as.resize(m, T(0));
  std::sort(bs.begin(), bs.end(), std::greater<T>());
  std::sort(as.begin(), as.end(), std::greater<T>());
  const T total_b = std::accumulate(bs.begin(), bs.end(), T(0));
  const T total_a = std::accumulate(as.begin(), as.end(), T(0));
  if (!Scalar<T>::mass_eq(total_b, total_a))
    throw SchemaError("majorizes: vectors have different totals");
  T pa(0);
  T pb(0);
  for (std::size_t k = 0; k + 1 < m; ++k) {
    pa += as[k];
    pb += bs[k];
    if (!le_thresh(pa, pb)) return false;
  }
  return true;
}

}  // namespace lossy

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "lossy/errors.hpp"
#include "lossy/model.hpp"

namespace lossy {

// Greedy ball cover: ordered centers, their disjoint cells, masses, and the
// threshold quantities the code constructions read off.
//
//   i_star: first index whose cumulative mass reaches 1 - epsilon - delta
//           (1 when epsilon + delta >= 1),
//   k_star: first index whose cumulative mass reaches 1 - epsilon,
//   j_star: first index whose cumulative mass reaches 1 - gamma - delta,
//   alpha = cum_mass[k_star - 1] (mass before the last cell),
//   beta  = 1 - epsilon - alpha,
//   gamma = 1 - cum_mass[k_star] (mass the cover leaves out).
template <class T>
struct GreedyCover {
  std::vector<std::uint32_t> centers;             // y index of center i (1-based i)
  std::vector<std::vector<std::uint32_t>> cells;  // disjoint cell of each center
  std::vector<T> cell_mass;
  std::vector<T> cum_mass;
  std::uint64_t i_star{1}, k_star{1}, j_star{1};
  T alpha{}, beta{}, gamma{};
};

// Cap on stored (source symbol, candidate center) memberships. Above it the
// kernel stops maintaining residual masses incrementally and recomputes them
// lazily; covers that dense finish in few rounds anyway.
inline constexpr std::size_t kDefaultMembershipCap = std::size_t(1) << 25;

// All source symbols within distortion D of reproduction y.
template <class T>
std::vector<std::uint32_t> distortion_ball(std::size_t y, const DistortionSpec<T>& spec) {
  std::vector<std::uint32_t> ball;
  for (std::size_t x = 0; x < spec.matrix.size(); ++x) {
    if (y >= spec.matrix[x].size()) throw SchemaError("distortion_ball: y outside matrix");
    if (le_thresh(spec.matrix[x][y], spec.level)) ball.push_back(static_cast<std::uint32_t>(x));
  }
  return ball;
}

namespace detail {

// Runs the greedy cover over any model exposing
//   num_x(), num_y(), prob(x), in_ball(x, y).
// Center generation halts once the cumulative mass reaches 1 - epsilon;
// nothing past k_star is ever needed.
template <class T, class Model>
GreedyCover<T> greedy_cover_kernel(const Model& m, const T& epsilon, const T& delta,
                                   std::size_t membership_cap) {
  const std::size_t nx = m.num_x();
  const std::size_t ny = m.num_y();
  if (nx == 0 || ny == 0) throw SchemaError("greedy cover: empty alphabet");

  std::vector<T> residual(ny, T(0));
  std::vector<char> coverable(nx, 0);
  std::vector<std::vector<std::uint32_t>> covering;  // x -> centers whose ball holds x
  bool lists = true;
  {
    std::size_t entries = 0;
    covering.resize(nx);
    for (std::size_t x = 0; x < nx && lists; ++x) {
      for (std::size_t y = 0; y < ny; ++y) {
        if (!m.in_ball(x, y)) continue;
        coverable[x] = 1;
        residual[y] += m.prob(x);
        covering[x].push_back(static_cast<std::uint32_t>(y));
        if (++entries > membership_cap) lists = false;
      }
    }
    if (!lists) {
      covering.clear();
      covering.shrink_to_fit();
      std::fill(residual.begin(), residual.end(), T(0));
      std::fill(coverable.begin(), coverable.end(), 0);
      for (std::size_t y = 0; y < ny; ++y) {
        T r(0);
        for (std::size_t x = 0; x < nx; ++x)
          if (m.in_ball(x, y)) {
            r += m.prob(x);
            coverable[x] = 1;
          }
        residual[y] = r;
      }
    }
  }

  T uncoverable(0);
  for (std::size_t x = 0; x < nx; ++x)
    if (!coverable[x]) uncoverable += m.prob(x);
  if (!le_thresh(uncoverable, epsilon))
    throw InfeasibleError("infeasible: Pr{min_y d(X,y) > D} = " +
                          std::to_string(to_double(uncoverable)) +
                          " exceeds epsilon = " + std::to_string(to_double(epsilon)));

  GreedyCover<T> cover;
  std::vector<char> covered(nx, 0);
  const T one(1);
  const T target_k = one - epsilon;
  T cum(0);

  auto collect_cell = [&](std::size_t y) {
    std::vector<std::uint32_t> cell;
    for (std::size_t x = 0; x < nx; ++x)
      if (!covered[x] && m.in_ball(x, y)) cell.push_back(static_cast<std::uint32_t>(x));
    return cell;
  };
  auto residual_of = [&](std::size_t y) {
    T r(0);
    for (std::size_t x = 0; x < nx; ++x)
      if (!covered[x] && m.in_ball(x, y)) r += m.prob(x);
    return r;
  };

  // Lazy path: a heap of stale residual upper bounds, each refreshed at most
  // once per round (residuals only shrink as coverage grows). Entries stamped
  // with the current round are exact.
  struct Cand {
    T bound;
    std::uint32_t y;
    std::uint64_t round;
  };
  auto cand_less = [](const Cand& a, const Cand& b) {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.y > b.y;  // among equal bounds the smallest index pops first
  };
  std::priority_queue<Cand, std::vector<Cand>, decltype(cand_less)> heap(cand_less);
  std::uint64_t round = 0;
  if (!lists)
    for (std::size_t y = 0; y < ny; ++y)
      if (residual[y] > T(0)) heap.push({residual[y], static_cast<std::uint32_t>(y), 0});

  while (cover.centers.empty() || !ge_thresh(cum, target_k)) {
    std::size_t best_y = ny;
    bool found = false;
    if (lists) {
      T best_mass(0);
      for (std::size_t y = 0; y < ny; ++y)
        if (residual[y] > best_mass) {
          best_mass = residual[y];
          best_y = y;
        }
      found = best_y != ny;
    } else {
      while (!heap.empty()) {
        Cand top = heap.top();
        heap.pop();
        if (top.round == round) {
          best_y = top.y;
          found = true;
          break;
        }
        T fresh = residual_of(top.y);
        if (fresh > T(0)) heap.push({std::move(fresh), top.y, round});
      }
    }
    if (!found)
      throw InfeasibleError("infeasible: coverable mass exhausted before reaching 1 - epsilon");

    std::vector<std::uint32_t> cell = collect_cell(best_y);
    T mass(0);
    for (std::uint32_t x : cell) mass += m.prob(x);
    for (std::uint32_t x : cell) {
      covered[x] = 1;
      if (lists)
        for (std::uint32_t y2 : covering[x]) residual[y2] -= m.prob(x);
    }
    cum += mass;
    cover.centers.push_back(static_cast<std::uint32_t>(best_y));
    cover.cells.push_back(std::move(cell));
    cover.cell_mass.push_back(std::move(mass));
    cover.cum_mass.push_back(cum);
    ++round;
  }

  const std::uint64_t k_star = cover.centers.size();
  cover.k_star = k_star;
  cover.gamma = one - cover.cum_mass[k_star - 1];
  cover.alpha = (k_star >= 2) ? cover.cum_mass[k_star - 2] : T(0);
  cover.beta = one - epsilon - cover.alpha;

  const T sum_budgets = epsilon + delta;
  if (ge_thresh(sum_budgets, one)) {
    cover.i_star = 1;
  } else {
    const T threshold_i = one - sum_budgets;
    std::uint64_t i = 1;
    while (i < k_star && !ge_thresh(cover.cum_mass[i - 1], threshold_i)) ++i;
    cover.i_star = i;
  }
  {
    const T threshold_j = one - cover.gamma - delta;
    std::uint64_t j = 1;
    while (j < k_star && !ge_thresh(cover.cum_mass[j - 1], threshold_j)) ++j;
    cover.j_star = j;
  }

  if (cover.i_star > cover.k_star || cover.i_star > cover.j_star ||
      std::min(cover.j_star, cover.k_star) > cover.i_star + 2)
    throw Error("greedy cover: threshold indices violate their defining inequalities");
  return cover;
}

}  // namespace detail

template <class T>
struct SingleLetterModel {
  const Instance<T>& inst;

  std::size_t num_x() const { return inst.num_x(); }
  std::size_t num_y() const { return inst.num_y(); }
  const T& prob(std::size_t x) const { return inst.source.probs[x]; }
  bool in_ball(std::size_t x, std::size_t y) const {
    return le_thresh(inst.distortion.matrix[x][y], inst.distortion.level);
  }
};

template <class T>
GreedyCover<T> greedy_cover(const Instance<T>& inst,
                            std::size_t membership_cap = kDefaultMembershipCap) {
  validate(inst);
  return detail::greedy_cover_kernel<T>(SingleLetterModel<T>{inst}, inst.epsilon, inst.delta,
                                        membership_cap);
}

template <class T>
double g_value(const GreedyCover<T>& cover) {
  return std::log2(static_cast<double>(cover.i_star));
}

// log2 of the first index whose cumulative greedy mass reaches
// 1 - epsilon - delta; +infinity when the instance is infeasible.
template <class T>
double g_value(const Instance<T>& inst) {
  try {
    return g_value(greedy_cover(inst));
  } catch (const InfeasibleError&) {
    return std::numeric_limits<double>::infinity();
  }
}

// --- Code tables ------------------------------------------------------------

enum class CodeKind { kStochastic, kDeterministic };

// Encoder row: x maps to codeword index `primary` with probability
// `prob_primary` and to index 1 with the remainder.
template <class T>
struct EncodeEntry {
  std::uint32_t primary{1};
  T prob_primary{1};
};

template <class T>
struct CodeTable {
  CodeKind kind{CodeKind::kDeterministic};
  std::vector<EncodeEntry<T>> encode;  // one row per source symbol
  std::vector<std::uint32_t> decode;   // codeword index i -> y = decode[i-1]
  double rate{0};                      // bits
};

inline std::uint64_t floor_log2(std::uint64_t v) {
  return static_cast<std::uint64_t>(std::bit_width(v) - 1);
}

// Cells 1..k*-1 map straight to their codeword; the last cell randomizes
// between w_{k*} and w_1 so the distortion budget is spent exactly; anything
// uncovered maps to w_1. Rate: floor(log2 i*).
template <class T>
CodeTable<T> build_stochastic_code(const Instance<T>& inst, const GreedyCover<T>& cover) {
  const std::uint64_t k = cover.k_star;
  if (!(cover.beta > T(0)) || !(cover.cell_mass[k - 1] > T(0)))
    throw Error("stochastic code: beta or last cell mass not positive");
  if constexpr (Scalar<T>::exact) {
    if (cover.beta > cover.cell_mass[k - 1])
      throw Error("stochastic code: beta exceeds the last cell mass");
  }
  T keep = cover.beta / cover.cell_mass[k - 1];
  if constexpr (!Scalar<T>::exact) keep = std::clamp(keep, 0.0, 1.0);

  CodeTable<T> code;
  code.kind = CodeKind::kStochastic;
  code.decode = cover.centers;
  code.encode.assign(inst.num_x(), EncodeEntry<T>{1, T(1)});
  for (std::uint64_t i = 1; i <= k; ++i) {
    const auto idx = static_cast<std::uint32_t>(i);
    for (std::uint32_t x : cover.cells[i - 1])
      code.encode[x] = (i < k) ? EncodeEntry<T>{idx, T(1)} : EncodeEntry<T>{idx, keep};
  }
  code.rate = static_cast<double>(floor_log2(cover.i_star));
  return code;
}

// Deterministic variant: every cell 1..k* maps straight to its codeword.
// Rate: floor(log2 min(j*, k*)).
template <class T>
CodeTable<T> build_deterministic_code(const Instance<T>& inst, const GreedyCover<T>& cover) {
  CodeTable<T> code;
  code.kind = CodeKind::kDeterministic;
  code.decode = cover.centers;
  code.encode.assign(inst.num_x(), EncodeEntry<T>{1, T(1)});
  for (std::uint64_t i = 1; i <= cover.k_star; ++i)
    for (std::uint32_t x : cover.cells[i - 1])
      code.encode[x] = EncodeEntry<T>{static_cast<std::uint32_t>(i), T(1)};
  code.rate = static_cast<double>(floor_log2(std::min(cover.j_star, cover.k_star)));
  return code;
}

template <class T>
CodeTable<T> build_stochastic_code(const Instance<T>& inst) {
  return build_stochastic_code(inst, greedy_cover(inst));
}

template <class T>
CodeTable<T> build_deterministic_code(const Instance<T>& inst) {
  return build_deterministic_code(inst, greedy_cover(inst));
}

}  // namespace lossy

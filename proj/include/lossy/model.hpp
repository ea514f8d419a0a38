#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "lossy/errors.hpp"
#include "lossy/numeric.hpp"

namespace lossy {

// Source alphabet together with its law. At blocklength n the symbols are
// whole blocks and the law is the block law.
template <class T>
struct FiniteSource {
  std::vector<std::string> symbols;
  std::vector<T> probs;
};

// |X| x |Y| per-pair distortion plus the level D a code must meet.
template <class T>
struct DistortionSpec {
  std::vector<std::vector<T>> matrix;
  T level{};
};

// A complete problem instance: source, reproduction alphabet, distortion,
// and the excess-distortion / overflow budgets.
template <class T>
struct Instance {
  FiniteSource<T> source;
  std::vector<std::string> y_symbols;
  DistortionSpec<T> distortion;
  T epsilon{};
  T delta{};

  std::size_t num_x() const { return source.symbols.size(); }
  std::size_t num_y() const { return y_symbols.size(); }
};

template <class T>
void validate_law(const std::vector<T>& probs) {
  if (probs.empty()) throw SchemaError("probability vector is empty");
  T total(0);
  for (const T& p : probs) {
    if (!Scalar<T>::finite(p)) throw SchemaError("non-finite probability entry");
    if (p < T(0)) throw SchemaError("negative probability entry");
    total += p;
  }
  if (!Scalar<T>::mass_eq(total, T(1)))
    throw SchemaError("probabilities do not sum to 1");
}

namespace detail {
inline void require_distinct(const std::vector<std::string>& labels, const char* what) {
  std::unordered_set<std::string_view> seen;
  for (const std::string& s : labels)
    if (!seen.insert(s).second)
      throw SchemaError(std::string("duplicate ") + what + " label '" + s + "'");
}
}  // namespace detail

template <class T>
void validate(const Instance<T>& inst) {
  const std::size_t nx = inst.num_x();
  const std::size_t ny = inst.num_y();
  if (nx == 0) throw SchemaError("empty source alphabet");
  if (ny == 0) throw SchemaError("empty reproduction alphabet");
  if (inst.source.probs.size() != nx)
    throw SchemaError("probs and x_symbols have different lengths");
  detail::require_distinct(inst.source.symbols, "source");
  detail::require_distinct(inst.y_symbols, "reproduction");
  validate_law(inst.source.probs);
  if (inst.distortion.matrix.size() != nx)
    throw SchemaError("distortion matrix row count differs from |X|");
  for (const auto& row : inst.distortion.matrix) {
    if (row.size() != ny)
      throw SchemaError("distortion matrix column count differs from |Y|");
    for (const T& v : row) {
      if (!Scalar<T>::finite(v)) throw SchemaError("non-finite distortion entry");
      if (v < T(0)) throw SchemaError("negative distortion entry");
    }
  }
  if (!Scalar<T>::finite(inst.distortion.level) || inst.distortion.level < T(0))
    throw SchemaError("distortion level must be finite and >= 0");
  if (inst.epsilon < T(0) || inst.epsilon >= T(1))
    throw SchemaError("epsilon must lie in [0,1)");
  if (inst.delta < T(0) || inst.delta >= T(1))
    throw SchemaError("delta must lie in [0,1)");
}

// --- Codeword enumeration -------------------------------------------------
//
// Binary strings ordered by length, {λ, 0, 1, 00, 01, 10, 11, 000, ...},
// indexed from 1. The i-th string is the binary expansion of i with its
// leading 1 removed, so its length is floor(log2 i).

std::string index_to_word(std::uint64_t index);
std::uint64_t word_to_index(std::string_view word);
std::size_t word_length(std::uint64_t index);

// 1-based position in the length-ordered codeword enumeration.
struct CodewordIndex {
  std::uint64_t value{1};

  std::string word() const { return index_to_word(value); }
  std::size_t length() const { return word_length(value); }
};

// --- Feasibility -----------------------------------------------------------

enum class Feasibility { kFeasible, kInfeasible };

// Mass of source symbols that no reproduction symbol can serve within D.
template <class T>
T uncoverable_mass(const Instance<T>& inst) {
  T mass(0);
  for (std::size_t x = 0; x < inst.num_x(); ++x) {
    bool ok = false;
    for (std::size_t y = 0; y < inst.num_y() && !ok; ++y)
      ok = le_thresh(inst.distortion.matrix[x][y], inst.distortion.level);
    if (!ok) mass += inst.source.probs[x];
  }
  return mass;
}

// Infeasible iff Pr{min_y d(X,y) > D} exceeds epsilon; no code can then meet
// the excess-distortion budget and the rate quantities become +infinity.
template <class T>
Feasibility check_feasible(const Instance<T>& inst) {
  validate(inst);
  return le_thresh(uncoverable_mass(inst), inst.epsilon) ? Feasibility::kFeasible
                                                         : Feasibility::kInfeasible;
}

}  // namespace lossy

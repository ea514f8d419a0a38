#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "lossy/dball_code.hpp"
#include "lossy/model.hpp"
#include "lossy/rng.hpp"
#include "lossy/smooth_entropy.hpp"

namespace lossy {

// Exact evaluation of a code against an instance: excess-distortion
// probability, codeword-length distribution, and the induced output law.
template <class T>
struct CodeReport {
  T excess_prob{};
  std::vector<T> output_law;                            // law of the reproduction
  std::vector<std::pair<std::uint32_t, T>> length_pmf;  // (length, prob), ascending
  double rate{0};                                       // threshold the code was checked at
  T overflow_at_rate{};
  bool is_code{false};

  T overflow(double rate_threshold) const {
    T total(0);
    for (const auto& [len, p] : length_pmf)
      if (static_cast<double>(len) > rate_threshold) total += p;
    return total;
  }
};

template <class T>
CodeReport<T> evaluate_code(const Instance<T>& inst, const CodeTable<T>& code,
                            double rate_threshold) {
  const std::size_t nx = inst.num_x();
  const std::size_t ny = inst.num_y();
  if (code.encode.size() != nx) throw SchemaError("encoder domain differs from |X|");
  if (code.decode.empty()) throw SchemaError("decoder table is empty");
  for (std::uint32_t y : code.decode)
    if (y >= ny) throw SchemaError("decoder range outside Y");

  CodeReport<T> report;
  report.rate = rate_threshold;
  report.output_law.assign(ny, T(0));
  std::map<std::uint32_t, T> lengths;
  T excess(0);
  const auto& d = inst.distortion.matrix;
  const T& level = inst.distortion.level;

  for (std::size_t x = 0; x < nx; ++x) {
    const EncodeEntry<T>& row = code.encode[x];
    if (row.primary == 0 || row.primary > code.decode.size())
      throw SchemaError("encoder emits an index outside the decoder table");
    if (row.prob_primary < T(0) || row.prob_primary > T(1))
      throw SchemaError("encoder probability outside [0,1]");
    const T& px = inst.source.probs[x];
    const T w_primary = px * row.prob_primary;
    const T w_fallback = px - w_primary;
    {
      const std::uint32_t y = code.decode[row.primary - 1];
      if (!le_thresh(d[x][y], level)) excess += w_primary;
      report.output_law[y] += w_primary;
      lengths[static_cast<std::uint32_t>(word_length(row.primary))] += w_primary;
    }
    if (w_fallback > T(0)) {
      const std::uint32_t y = code.decode[0];
      if (!le_thresh(d[x][y], level)) excess += w_fallback;
      report.output_law[y] += w_fallback;
      lengths[0] += w_fallback;
    }
  }

  report.excess_prob = excess;
  report.length_pmf.assign(lengths.begin(), lengths.end());
  report.overflow_at_rate = report.overflow(rate_threshold);
  report.is_code = le_thresh(report.excess_prob, inst.epsilon) &&
                   le_thresh(report.overflow_at_rate, inst.delta);
  return report;
}

template <class T>
CodeReport<T> evaluate_code(const Instance<T>& inst, const CodeTable<T>& code) {
  return evaluate_code(inst, code, code.rate);
}

// Re-points every encoder output whose decoded symbol also has a shorter
// codeword, which makes the decoder injective on the used indices without
// raising any codeword length.
template <class T>
CodeTable<T> canonicalize(const CodeTable<T>& code) {
  CodeTable<T> out = code;
  std::map<std::uint32_t, std::uint32_t> first_slot;  // y -> smallest index decoding to it
  for (std::size_t i = 0; i < code.decode.size(); ++i)
    first_slot.emplace(code.decode[i], static_cast<std::uint32_t>(i + 1));
  for (auto& row : out.encode) {
    if (row.primary == 0 || row.primary > code.decode.size())
      throw SchemaError("encoder emits an index outside the decoder table");
    row.primary = first_slot.at(code.decode[row.primary - 1]);
  }
  return out;
}

// Checks the code's rate against the cover lower bound: any valid code must
// sit strictly above g_value - 1. A false return is a counterexample.
template <class T>
bool converse_audit(const Instance<T>& inst, const CodeTable<T>& code, double rate_threshold) {
  const CodeTable<T> canon = canonicalize(code);
  const CodeReport<T> report = evaluate_code(inst, canon, rate_threshold);
  if (!report.is_code)
    throw SchemaError("converse_audit: not a valid code at the given rate");
  return rate_threshold > g_value(inst) - 1.0 - kTauCmp;
}

// Smallest integer rate at which the (canonicalized) code meets the overflow
// budget; nullopt if it already misses the excess budget.
template <class T>
std::optional<double> min_feasible_rate(const Instance<T>& inst, const CodeTable<T>& code) {
  const CodeTable<T> canon = canonicalize(code);
  const CodeReport<T> report = evaluate_code(inst, canon, 0.0);
  if (!le_thresh(report.excess_prob, inst.epsilon)) return std::nullopt;
  const std::uint32_t max_len = report.length_pmf.back().first;
  for (std::uint32_t r = 0; r <= max_len; ++r)
    if (le_thresh(report.overflow(static_cast<double>(r)), inst.delta))
      return static_cast<double>(r);
  return std::nullopt;
}

// Uniformly random deterministic encoder with bounded codeword indices plus
// a uniformly random decoder. Callers filter with min_feasible_rate.
template <class T>
CodeTable<T> sample_random_code(const Instance<T>& inst, SplitRng& rng,
                                std::uint32_t max_index = 31) {
  CodeTable<T> code;
  code.kind = CodeKind::kDeterministic;
  code.decode.resize(max_index);
  for (auto& y : code.decode)
    y = static_cast<std::uint32_t>(rng.uniform_int(0, inst.num_y() - 1));
  code.encode.resize(inst.num_x());
  for (auto& row : code.encode)
    row = EncodeEntry<T>{static_cast<std::uint32_t>(rng.uniform_int(1, max_index)), T(1)};
  code.rate = 0.0;
  return code;
}

// Random conditional law meeting the excess budget: per-symbol best
// reproduction blended with noise, then any violating mass beyond the
// unavoidable part is rescaled back under epsilon.
template <class T>
std::vector<std::vector<T>> sample_feasible_conditional(const Instance<T>& inst, SplitRng& rng) {
  if (check_feasible(inst) != Feasibility::kFeasible)
    throw InfeasibleError("sample_feasible_conditional: infeasible instance");
  const std::size_t nx = inst.num_x();
  const std::size_t ny = inst.num_y();
  const auto& d = inst.distortion.matrix;
  const T& level = inst.distortion.level;

  std::vector<std::size_t> best(nx, 0);
  std::vector<char> servable(nx, 0);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t y = 1; y < ny; ++y)
      if (d[x][y] < d[x][best[x]]) best[x] = y;
    servable[x] = le_thresh(d[x][best[x]], level) ? 1 : 0;
  }

  std::vector<std::vector<T>> cond(nx, std::vector<T>(ny, T(0)));
  for (std::size_t x = 0; x < nx; ++x) {
    std::vector<std::int64_t> w(ny);
    std::int64_t wtot = 0;
    for (auto& v : w) {
      v = static_cast<std::int64_t>(rng.uniform_int(0, 8));
      wtot += v;
    }
    if (wtot == 0) {
      w[0] = 1;
      wtot = 1;
    }
    const T theta = Scalar<T>::from_fraction(
        static_cast<std::int64_t>(rng.uniform_int(0, 16)), 16);
    for (std::size_t y = 0; y < ny; ++y) {
      cond[x][y] = theta * Scalar<T>::from_fraction(w[y], wtot);
      if (servable[x] && y == best[x]) cond[x][y] += T(1) - theta;
      if (!servable[x]) cond[x][y] = Scalar<T>::from_fraction(w[y], wtot);
    }
  }

  T violating(0);
  T unavoidable(0);
  for (std::size_t x = 0; x < nx; ++x) {
    if (!servable[x]) unavoidable += inst.source.probs[x];
    for (std::size_t y = 0; y < ny; ++y)
      if (!le_thresh(d[x][y], level)) violating += inst.source.probs[x] * cond[x][y];
  }
  if (le_thresh(violating, inst.epsilon)) return cond;

  T scale = (inst.epsilon - unavoidable) / (violating - unavoidable);
  if (scale < T(0)) scale = T(0);
  for (std::size_t x = 0; x < nx; ++x) {
    if (!servable[x]) continue;
    T moved(0);
    for (std::size_t y = 0; y < ny; ++y) {
      if (le_thresh(d[x][y], level)) continue;
      moved += cond[x][y] * (T(1) - scale);
      cond[x][y] = cond[x][y] * scale;
    }
    cond[x][best[x]] += moved;
  }
  return cond;
}

template <class T>
std::vector<T> induced_output_law(const Instance<T>& inst,
                                  const std::vector<std::vector<T>>& cond) {
  std::vector<T> law(inst.num_y(), T(0));
  for (std::size_t x = 0; x < inst.num_x(); ++x)
    for (std::size_t y = 0; y < inst.num_y(); ++y)
      law[y] += inst.source.probs[x] * cond[x][y];
  return law;
}

// Draws `trials` feasible conditionals and checks that the constructed
// stochastic code's output law majorizes every induced output law.
template <class T>
bool majorization_audit(const Instance<T>& inst, std::size_t trials, std::uint64_t seed) {
  const GreedyCover<T> cover = greedy_cover(inst);
  const CodeTable<T> code = build_stochastic_code(inst, cover);
  const std::vector<T> constructed_law = evaluate_code(inst, code).output_law;
  SplitRng rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto cond = sample_feasible_conditional(inst, rng);
    if (!majorizes(constructed_law, induced_output_law(inst, cond))) return false;
  }
  return true;
}

// --- Monte Carlo ------------------------------------------------------------

struct SimReport {
  std::size_t samples{};
  double excess_hat{}, excess_se{};
  double overflow_hat{}, overflow_se{};
  double rate{};
  std::uint64_t seed{};
};

// Samples the source and the encoder randomization; the per-branch excess
// and length indicators are precomputed exactly, so sampling never touches
// distortion arithmetic.
template <class T>
SimReport simulate(const Instance<T>& inst, const CodeTable<T>& code, std::size_t samples,
                   std::uint64_t seed, std::optional<double> rate_override = {}) {
  if (samples == 0) throw SchemaError("simulate: need at least one sample");
  const double rate = rate_override.value_or(code.rate);
  evaluate_code(inst, code, rate);  // reuse its structural validation

  const std::size_t nx = inst.num_x();
  std::vector<double> cdf(nx);
  std::vector<double> keep_prob(nx);
  std::vector<char> bad_primary(nx), bad_fallback(nx), over_primary(nx);
  const auto& d = inst.distortion.matrix;
  const T& level = inst.distortion.level;
  double acc = 0.0;
  for (std::size_t x = 0; x < nx; ++x) {
    acc += to_double(inst.source.probs[x]);
    cdf[x] = acc;
    const EncodeEntry<T>& row = code.encode[x];
    keep_prob[x] = to_double(row.prob_primary);
    bad_primary[x] = !le_thresh(d[x][code.decode[row.primary - 1]], level);
    bad_fallback[x] = !le_thresh(d[x][code.decode[0]], level);
    over_primary[x] = static_cast<double>(word_length(row.primary)) > rate;
  }
  cdf[nx - 1] = std::max(cdf[nx - 1], 1.0);

  SplitRng rng(seed);
  std::size_t excess_count = 0, overflow_count = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    const double u = rng.uniform();
    const std::size_t x = static_cast<std::size_t>(
        std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    const std::size_t xi = std::min(x, nx - 1);
    const bool primary = rng.uniform() < keep_prob[xi];
    if (primary ? bad_primary[xi] : bad_fallback[xi]) ++excess_count;
    if (primary && over_primary[xi]) ++overflow_count;  // fallback word has length 0
  }

  auto se = [&](double p) { return std::sqrt(p * (1.0 - p) / static_cast<double>(samples)); };
  SimReport rep;
  rep.samples = samples;
  rep.seed = seed;
  rep.rate = rate;
  rep.excess_hat = static_cast<double>(excess_count) / static_cast<double>(samples);
  rep.overflow_hat = static_cast<double>(overflow_count) / static_cast<double>(samples);
  rep.excess_se = se(rep.excess_hat);
  rep.overflow_se = se(rep.overflow_hat);
  return rep;
}

}  // namespace lossy

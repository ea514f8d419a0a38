#include "lossy/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lossy/errors.hpp"

namespace lossy {
namespace {

constexpr double kGapTolBits = 1e-10;    // inner stopping rule (duality-gap bound)
constexpr double kGapAcceptFinal = 1e-7;  // certified fallback at kink slopes
constexpr std::uint64_t kStallWindow = 20000;
constexpr int kBisectIters = 60;
constexpr std::uint64_t kSteerIters = 60000;     // per bracket-steering solve
constexpr std::uint64_t kFinalIters = 30000000;  // final certified solve
constexpr double kSupportFloor = 1e-15;  // prune output atoms below this
constexpr double kTiny = 1e-300;
constexpr double kSelfCheckTol = 1e-6;  // |E[tilted] - rate|

struct SlopeSolve {
  double rate_bits{};
  double distortion{};
  std::vector<double> output_law;
  std::uint64_t iterations{};
};

// Alternating minimization at fixed slope lambda (bits per distortion unit).
// Rows are shifted by their minimum distortion so the kernel cannot
// underflow however steep the slope gets.
//
// Stops at a duality gap of kGapTolBits. Slopes where the optimal output
// support switches make the iterate slide along a whole optimal face at a
// 1/t pace; the gap still bounds the objective error there, so once decay is
// demonstrably sublinear a gap under accept_tol is accepted. Past the
// iteration cap, a gap above accept_tol is a hard failure.
SlopeSolve solve_at_slope(const std::vector<double>& px,
                          const std::vector<std::vector<double>>& d, double lambda,
                          std::vector<double> r, std::uint64_t max_iters,
                          double accept_tol) {
  const std::size_t nx = px.size();
  const std::size_t ny = r.size();
  std::vector<double> row_min(nx);
  std::vector<double> kernel(nx * ny);
  for (std::size_t x = 0; x < nx; ++x) {
    double m = d[x][0];
    for (std::size_t y = 1; y < ny; ++y) m = std::min(m, d[x][y]);
    row_min[x] = m;
    for (std::size_t y = 0; y < ny; ++y)
      kernel[x * ny + y] = std::exp2(-lambda * (d[x][y] - m));
  }

  std::vector<double> s(nx), c(ny);
  std::uint64_t it = 0;
  double gap = std::numeric_limits<double>::infinity();
  double checkpoint_gap = std::numeric_limits<double>::infinity();
  for (; it < max_iters; ++it) {
    for (std::size_t x = 0; x < nx; ++x) {
      double acc = 0.0;
      const double* k = &kernel[x * ny];
      for (std::size_t y = 0; y < ny; ++y) acc += r[y] * k[y];
      s[x] = std::max(acc, kTiny);
    }
    double cmax = 0.0;
    for (std::size_t y = 0; y < ny; ++y) {
      double acc = 0.0;
      for (std::size_t x = 0; x < nx; ++x) acc += px[x] * kernel[x * ny + y] / s[x];
      c[y] = acc;
      if (r[y] > 0.0) cmax = std::max(cmax, acc);
    }
    gap = std::log2(cmax);
    if (gap <= kGapTolBits) break;
    if (it > 0 && it % kStallWindow == 0) {
      if (gap <= accept_tol && gap > 0.5 * checkpoint_gap) break;  // sublinear stall
      checkpoint_gap = gap;
    }
    double total = 0.0;
    for (std::size_t y = 0; y < ny; ++y) {
      r[y] *= c[y];
      total += r[y];
    }
    for (std::size_t y = 0; y < ny; ++y) r[y] /= total;
  }
  if (it >= max_iters && !(gap <= accept_tol))
    throw ConvergenceError("rate-distortion: inner loop missed its gap tolerance");

  SlopeSolve out;
  out.iterations = it + 1;
  out.output_law = r;
  double dist = 0.0, mean_log_s = 0.0, mean_shift = 0.0;
  for (std::size_t x = 0; x < nx; ++x) {
    double acc = 0.0, wd = 0.0;
    const double* k = &kernel[x * ny];
    for (std::size_t y = 0; y < ny; ++y) {
      const double q = r[y] * k[y];
      acc += q;
      wd += q * d[x][y];
    }
    acc = std::max(acc, kTiny);
    dist += px[x] * (wd / acc);
    mean_log_s += px[x] * std::log2(acc);
    mean_shift += px[x] * row_min[x];
  }
  out.distortion = dist;
  out.rate_bits = std::max(0.0, -lambda * (dist - mean_shift) - mean_log_s);
  return out;
}

std::vector<double> uniform_law(std::size_t ny) {
  return std::vector<double>(ny, 1.0 / static_cast<double>(ny));
}

void validate_rd_inputs(const std::vector<double>& px,
                        const std::vector<std::vector<double>>& d) {
  validate_law(px);
  if (d.size() != px.size()) throw SchemaError("distortion matrix row count differs from |X|");
  if (d.empty() || d[0].empty()) throw SchemaError("distortion matrix is empty");
  const std::size_t ny = d[0].size();
  for (const auto& row : d) {
    if (row.size() != ny) throw SchemaError("distortion matrix is ragged");
    for (double v : row)
      if (!std::isfinite(v) || v < 0.0) throw SchemaError("invalid distortion entry");
  }
}

}  // namespace

std::pair<double, double> d_bounds(const std::vector<double>& probs,
                                   const std::vector<std::vector<double>>& distortion) {
  validate_rd_inputs(probs, distortion);
  const std::size_t nx = probs.size();
  const std::size_t ny = distortion[0].size();
  double d_min = 0.0;
  for (std::size_t x = 0; x < nx; ++x) {
    double m = distortion[x][0];
    for (std::size_t y = 1; y < ny; ++y) m = std::min(m, distortion[x][y]);
    d_min += probs[x] * m;
  }
  double d_max = std::numeric_limits<double>::infinity();
  for (std::size_t y = 0; y < ny; ++y) {
    double e = 0.0;
    for (std::size_t x = 0; x < nx; ++x) e += probs[x] * distortion[x][y];
    d_max = std::min(d_max, e);
  }
  return {d_min, d_max};
}

RdSolution rate_distortion(const std::vector<double>& probs,
                           const std::vector<std::vector<double>>& distortion, double level) {
  validate_rd_inputs(probs, distortion);
  const auto [d_min, d_max] = d_bounds(probs, distortion);
  if (!std::isfinite(level)) throw std::domain_error("rate_distortion: non-finite level");

  RdSolution sol;
  sol.d_min = d_min;
  sol.d_max = d_max;
  const std::size_t nx = probs.size();
  const std::size_t ny = distortion[0].size();

  if (level >= d_max) {
    // Reproducing the best single symbol already meets the level.
    std::size_t best = 0;
    double best_e = std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < ny; ++y) {
      double e = 0.0;
      for (std::size_t x = 0; x < nx; ++x) e += probs[x] * distortion[x][y];
      if (e < best_e) {
        best_e = e;
        best = y;
      }
    }
    sol.rate = 0.0;
    sol.slope = 0.0;
    sol.output_law.assign(ny, 0.0);
    sol.output_law[best] = 1.0;
    sol.tilted.assign(nx, 0.0);
    sol.tilted_mean = 0.0;
    sol.dispersion = 0.0;
    return sol;
  }
  if (level <= d_min)
    throw std::domain_error("rate_distortion: level must exceed D_min");

  std::uint64_t total_iters = 0;
  std::vector<double> warm = uniform_law(ny);
  const double no_accept = std::numeric_limits<double>::infinity();
  auto eval = [&](double lambda, std::uint64_t cap, double accept) {
    std::vector<double> start = warm;
    for (double& v : start) v = std::max(v, 1e-12);
    double tot = 0.0;
    for (double v : start) tot += v;
    for (double& v : start) v /= tot;
    SlopeSolve s = solve_at_slope(probs, distortion, lambda, std::move(start), cap, accept);
    total_iters += s.iterations;
    warm = s.output_law;
    return s;
  };

  double hi = 1.0;
  SlopeSolve at_hi = eval(hi, kSteerIters, no_accept);
  int grow = 0;
  while (at_hi.distortion > level && grow++ < 60) {
    hi *= 2.0;
    at_hi = eval(hi, kSteerIters, no_accept);
  }
  if (at_hi.distortion > level)
    throw ConvergenceError("rate_distortion: could not bracket the slope");
  double lo = hi > 1.0 ? hi / 2.0 : 0.0;
  for (int i = 0; i < kBisectIters; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (eval(mid, kSteerIters, no_accept).distortion > level)
      lo = mid;
    else
      hi = mid;
  }

  SlopeSolve fin = eval(hi, kFinalIters, kGapAcceptFinal);
  bool pruned = false;
  for (double& v : warm)
    if (v < kSupportFloor) {
      v = 0.0;
      pruned = true;
    }
  if (pruned) {
    double tot = 0.0;
    for (double v : warm) tot += v;
    if (tot <= 0.0) throw ConvergenceError("rate_distortion: output support vanished");
    for (double& v : warm) v /= tot;
    fin = solve_at_slope(probs, distortion, hi, warm, kFinalIters, kGapAcceptFinal);
    total_iters += fin.iterations;
  }

  const double lambda = hi;
  sol.slope = lambda;
  sol.output_law = fin.output_law;
  sol.rate = std::max(0.0, fin.rate_bits + lambda * (fin.distortion - level));
  sol.iterations = total_iters;

  sol.tilted.resize(nx);
  double mean = 0.0;
  for (std::size_t x = 0; x < nx; ++x) {
    double m = distortion[x][0];
    for (std::size_t y = 1; y < ny; ++y) m = std::min(m, distortion[x][y]);
    double acc = 0.0;
    for (std::size_t y = 0; y < ny; ++y)
      acc += fin.output_law[y] * std::exp2(-lambda * (distortion[x][y] - m));
    acc = std::max(acc, kTiny);
    sol.tilted[x] = -lambda * level + lambda * m - std::log2(acc);
    mean += probs[x] * sol.tilted[x];
  }
  sol.tilted_mean = mean;
  if (std::fabs(mean - sol.rate) > kSelfCheckTol)
    throw ConvergenceError("rate_distortion: tilted-information identity check failed");

  double var = 0.0;
  for (std::size_t x = 0; x < nx; ++x) {
    const double dev = sol.tilted[x] - mean;
    var += probs[x] * dev * dev;
  }
  sol.dispersion = var < 1e-12 ? 0.0 : var;
  return sol;
}

double q_function(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double q_inverse(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("q_inverse: p must lie in (0,1)");
  if (p == 0.5) return 0.0;
  double lo = -1.0, hi = 1.0;
  while (q_function(hi) > p) hi *= 2.0;
  while (q_function(lo) < p) lo *= 2.0;
  // invariant: q(lo) >= p >= q(hi)
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (q_function(mid) >= p)
      lo = mid;
    else
      hi = mid;
  }
  double z = 0.5 * (lo + hi);
  for (int i = 0; i < 3; ++i) {  // Newton polish where the density allows it
    const double density = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    if (!(density > 0.0)) break;
    const double step = (q_function(z) - p) / density;
    if (!std::isfinite(step) || std::fabs(step) > 1.0) break;
    z += step;
  }
  return z;
}

double gaussian_approx(const Instance<double>& base, std::uint64_t n) {
  validate(base);
  if (n == 0) throw SchemaError("gaussian_approx: blocklength must be >= 1");
  const double total = base.epsilon + base.delta;
  if (!(total > 0.0 && total < 1.0))
    throw std::domain_error("gaussian_approx: epsilon + delta must lie in (0,1)");
  const RdSolution rd =
      rate_distortion(base.source.probs, base.distortion.matrix, base.distortion.level);
  if (base.distortion.level >= rd.d_max)
    throw std::domain_error("gaussian_approx: level must lie below D_max");
  return rd.rate + std::sqrt(rd.dispersion / static_cast<double>(n)) * q_inverse(total);
}

}  // namespace lossy

// Command-line front end: parses instance files, dispatches the library,
// and emits human-readable tables or machine-readable CSV/JSON.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lossy/asymptotics.hpp"
#include "lossy/blocklength.hpp"
#include "lossy/dball_code.hpp"
#include "lossy/evaluator.hpp"
#include "lossy/json_io.hpp"
#include "lossy/model.hpp"
#include "lossy/smooth_entropy.hpp"
#include "lossy/version.hpp"

namespace {

using namespace lossy;

struct CommonOpts {
  std::string instance_path;
  std::string out_path;
  bool exact = false;
  std::uint64_t seed = 0;
  std::size_t trials = 200;
  std::size_t samples = 1000000;
  std::uint32_t max_n = 8;
  std::optional<std::size_t> budget_flag;
  std::optional<std::string> delta_flag;
  std::optional<double> rate_flag;
  std::optional<double> rd_at;
  std::string code_path;
  bool stochastic = false;
  bool deterministic = false;
  std::string d_grid;
};

std::size_t effective_budget(const CommonOpts& o) {
  if (o.budget_flag) return *o.budget_flag;
  if (const char* env = std::getenv("LOSSY_BUDGET")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    throw SchemaError("LOSSY_BUDGET must be a positive integer");
  }
  return kDefaultAlphabetBudget;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// All file output funnels through here so every artifact gets the same
// version/seed/hash stamp.
class OutputSink {
 public:
  OutputSink(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw SchemaError("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : fallback_; }

 private:
  std::ofstream file_;
  std::ostream& fallback_;
};

std::string csv_trailer(std::uint64_t seed, const std::string& instance_hash) {
  return "# version=" + std::string(kVersion) + " seed=" + std::to_string(seed) +
         " instance=" + instance_hash;
}

template <class T>
struct Loaded {
  Instance<T> inst;
  std::string hash;
};

template <class T>
Loaded<T> load(const CommonOpts& o) {
  if (o.instance_path.empty()) throw SchemaError("--instance is required");
  const std::string bytes = read_file_bytes(o.instance_path);
  Json j;
  try {
    j = Json::parse(bytes);
  } catch (const Json::parse_error& e) {
    throw SchemaError(std::string("instance file is not valid JSON: ") + e.what());
  }
  return Loaded<T>{instance_from_json<T>(j), fnv1a_hex(bytes)};
}

template <class T>
T parse_scalar_flag(const std::string& text) {
  return detail::scalar_from_json<T>(Json::parse("\"" + text + "\"", nullptr, true));
}

template <>
double parse_scalar_flag<double>(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return std::stod(text);
  return std::stod(text.substr(0, slash)) / std::stod(text.substr(slash + 1));
}

template <>
Rational parse_scalar_flag<Rational>(const std::string& text) {
  const auto slash = text.find('/');
  if (slash != std::string::npos) return parse_rational(text);
  // decimal flag in exact mode: go through the double value
  return Rational(std::stod(text));
}

template <class T>
int cmd_entropy(const CommonOpts& o) {
  const auto loaded = load<T>(o);
  T delta = loaded.inst.delta;
  std::string shown;
  if (o.delta_flag) {
    delta = parse_scalar_flag<T>(*o.delta_flag);
    shown = *o.delta_flag;
  } else {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", to_double(delta));
    shown = buf;
  }
  const double h = smooth_max_entropy(loaded.inst.source.probs, delta);
  std::cout << "H^" << shown << " = " << fmt6(h) << " bits\n";
  return 0;
}

template <class T>
int cmd_gval(const CommonOpts& o) {
  const auto loaded = load<T>(o);
  const GreedyCover<T> cover = greedy_cover(loaded.inst);  // throws InfeasibleError
  std::cout << "G = " << fmt6(g_value(cover)) << " bits, i*=" << cover.i_star
            << ", k*=" << cover.k_star << ", j*=" << cover.j_star << "\n"
            << "alpha = " << fmt6(to_double(cover.alpha))
            << ", beta = " << fmt6(to_double(cover.beta))
            << ", gamma = " << fmt6(to_double(cover.gamma)) << "\n";
  return 0;
}

template <class T>
CodeTable<T> build_or_load_code(const CommonOpts& o, const Instance<T>& inst) {
  if (!o.code_path.empty()) {
    Json j;
    try {
      j = Json::parse(read_file_bytes(o.code_path));
    } catch (const Json::parse_error& e) {
      throw SchemaError(std::string("code file is not valid JSON: ") + e.what());
    }
    return code_table_from_json(inst, j);
  }
  return o.deterministic ? build_deterministic_code(inst) : build_stochastic_code(inst);
}

template <class T>
int cmd_build_code(const CommonOpts& o) {
  const auto loaded = load<T>(o);
  const CodeTable<T> code = o.deterministic ? build_deterministic_code(loaded.inst)
                                            : build_stochastic_code(loaded.inst);
  OutputSink sink(o.out_path, std::cout);
  sink.stream() << code_table_to_json(loaded.inst, code).dump(2) << "\n";
  return 0;
}

template <class T>
int cmd_eval_code(const CommonOpts& o) {
  const auto loaded = load<T>(o);
  const CodeTable<T> code = build_or_load_code(o, loaded.inst);
  const double rate = o.rate_flag.value_or(code.rate);
  const CodeReport<T> report = evaluate_code(loaded.inst, code, rate);
  OutputSink sink(o.out_path, std::cout);
  sink.stream() << code_report_to_json(loaded.inst, report).dump(2) << "\n";
  return 0;
}

template <class T>
int cmd_audit(const CommonOpts& o) {
  const auto loaded = load<T>(o);
  const Instance<T>& inst = loaded.inst;
  bool all_ok = true;
  auto report = [&](const std::string& name, bool ok) {
    std::cout << name << ": " << (ok ? "PASS" : "FAIL") << "\n";
    all_ok = all_ok && ok;
  };

  const GreedyCover<T> cover = greedy_cover(inst);
  {
    const CodeTable<T> code = build_stochastic_code(inst, cover);
    report("converse-audit stochastic-construction", converse_audit(inst, code, code.rate));
  }
  {
    const CodeTable<T> code = build_deterministic_code(inst, cover);
    report("converse-audit deterministic-construction", converse_audit(inst, code, code.rate));
  }
  {
    SplitRng rng(o.seed);
    std::size_t accepted = 0;
    bool ok = true;
    std::size_t attempts = 0;
    const std::size_t max_attempts = o.trials * 200 + 1000;
    while (accepted < o.trials && attempts < max_attempts) {
      ++attempts;
      const CodeTable<T> code = sample_random_code(inst, rng);
      const auto rate = min_feasible_rate(inst, code);
      if (!rate) continue;
      ++accepted;
      ok = ok && converse_audit(inst, code, *rate);
    }
    std::ostringstream name;
    name << "converse-audit random-codes (accepted " << accepted << ")";
    report(name.str(), ok);
  }
  report("majorization-audit (trials=" + std::to_string(o.trials) + ")",
         majorization_audit(inst, o.trials, o.seed));
  {
    // Equal-sum budget splits must leave i* unchanged; splits whose epsilon
    // cannot absorb the uncoverable mass are infeasible and skipped.
    const T total = inst.epsilon + inst.delta;
    const T floor_mass = uncoverable_mass(inst);
    std::size_t used = 0;
    bool ok = true;
    std::optional<std::uint64_t> seen;
    for (int t = 0; t <= 20; ++t) {
      Instance<T> split = inst;
      split.epsilon = total * Scalar<T>::from_fraction(t, 20);
      split.delta = total - split.epsilon;
      if (!le_thresh(floor_mass, split.epsilon)) continue;
      if (!(split.epsilon < T(1)) || !(split.delta < T(1))) continue;
      const GreedyCover<T> c = greedy_cover(split);
      if (seen && *seen != c.i_star) ok = false;
      seen = c.i_star;
      ++used;
    }
    report("invariance-audit (splits=" + std::to_string(used) + ")", ok);
  }
  return all_ok ? 0 : 1;
}

template <class T>
int cmd_sweep_n(const CommonOpts& o) {
  const auto loaded = load<T>(o);
  const std::size_t budget = effective_budget(o);
  struct Row {
    Sandwich s;
    double ms;
  };
  std::vector<std::future<Row>> futures;
  for (std::uint32_t n = 1; n <= o.max_n; ++n)
    futures.push_back(std::async(std::launch::async, [&, n]() {
      const auto t0 = std::chrono::steady_clock::now();
      Row row;
      row.s = sandwich(loaded.inst, n, budget);  // may throw BudgetError
      row.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                   .count();
      return row;
    }));
  std::vector<Row> rows;
  for (auto& f : futures) rows.push_back(f.get());

  OutputSink sink(o.out_path, std::cout);
  std::ostream& out = sink.stream();
  out << "n,G_bits,lower,upper_stochastic,upper_deterministic,i_star,k_star,wall_time_ms\n";
  for (std::uint32_t n = 1; n <= o.max_n; ++n) {
    const Row& r = rows[n - 1];
    out << n << ',' << fmt17(r.s.g_bits) << ',' << fmt17(r.s.lower) << ','
        << fmt17(r.s.upper_stochastic) << ',' << fmt17(r.s.upper_deterministic) << ','
        << r.s.i_star << ',' << r.s.k_star << ',' << fmt17(r.ms) << "\n";
  }
  out << csv_trailer(o.seed, loaded.hash) << "\n";
  return 0;
}

Json rd_solution_to_json(const Instance<double>& inst, const RdSolution& sol) {
  Json j;
  j["rate_bits"] = sol.rate;
  j["lambda_star"] = sol.slope;
  j["dispersion"] = sol.dispersion;
  j["d_min"] = sol.d_min;
  j["d_max"] = sol.d_max;
  j["tilted_mean"] = sol.tilted_mean;
  j["iterations"] = sol.iterations;
  Json law = Json::object();
  for (std::size_t y = 0; y < sol.output_law.size(); ++y)
    law[inst.y_symbols[y]] = sol.output_law[y];
  j["output_law"] = std::move(law);
  Json tilted = Json::object();
  for (std::size_t x = 0; x < sol.tilted.size(); ++x)
    tilted[inst.source.symbols[x]] = sol.tilted[x];
  j["tilted"] = std::move(tilted);
  return j;
}

int cmd_rd_curve(const CommonOpts& o) {
  const auto loaded = load<double>(o);
  if (o.rd_at) {
    const RdSolution sol =
        rate_distortion(loaded.inst.source.probs, loaded.inst.distortion.matrix, *o.rd_at);
    OutputSink sink(o.out_path, std::cout);
    sink.stream() << rd_solution_to_json(loaded.inst, sol).dump(2) << "\n";
    return 0;
  }
  if (o.d_grid.empty()) throw SchemaError("rd-curve needs --d-grid or --at");
  double lo = 0, hi = 0, step = 0;
  if (std::sscanf(o.d_grid.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0)
    throw SchemaError("--d-grid must be 'lo:hi:step' with step > 0");
  const auto [d_min, d_max] =
      d_bounds(loaded.inst.source.probs, loaded.inst.distortion.matrix);
  OutputSink sink(o.out_path, std::cout);
  std::ostream& out = sink.stream();
  out << "D,rate_bits,lambda_star,dispersion\n";
  for (double d = lo; d <= hi + 1e-12; d += step) {
    if (d <= d_min) continue;  // rate is infinite below D_min
    const RdSolution sol =
        rate_distortion(loaded.inst.source.probs, loaded.inst.distortion.matrix, d);
    out << fmt17(d) << ',' << fmt17(sol.rate) << ',' << fmt17(sol.slope) << ','
        << fmt17(sol.dispersion) << "\n";
  }
  out << csv_trailer(o.seed, loaded.hash) << "\n";
  return 0;
}

int cmd_gaussian_compare(const CommonOpts& o) {
  const auto loaded = load<double>(o);
  const std::size_t budget = effective_budget(o);
  struct Row {
    double grate, approx;
  };
  std::vector<std::future<Row>> futures;
  for (std::uint32_t n = 1; n <= o.max_n; ++n)
    futures.push_back(std::async(std::launch::async, [&, n]() {
      return Row{g_rate(loaded.inst, n, budget), gaussian_approx(loaded.inst, n)};
    }));
  std::vector<Row> rows;
  for (auto& f : futures) rows.push_back(f.get());

  OutputSink sink(o.out_path, std::cout);
  std::ostream& out = sink.stream();
  out << "n,g_rate,gaussian_approx,gap,n_gap_over_log2n\n";
  for (std::uint32_t n = 1; n <= o.max_n; ++n) {
    const Row& r = rows[n - 1];
    const double gap = r.grate - r.approx;
    out << n << ',' << fmt17(r.grate) << ',' << fmt17(r.approx) << ',' << fmt17(gap) << ',';
    if (n > 1) out << fmt17(static_cast<double>(n) * gap / std::log2(static_cast<double>(n)));
    out << "\n";
  }
  out << csv_trailer(o.seed, loaded.hash) << "\n";
  return 0;
}

template <class T>
int cmd_simulate(const CommonOpts& o) {
  const auto loaded = load<T>(o);
  const CodeTable<T> code = build_or_load_code(o, loaded.inst);
  const SimReport rep = simulate(loaded.inst, code, o.samples, o.seed, o.rate_flag);
  OutputSink sink(o.out_path, std::cout);
  std::ostream& out = sink.stream();
  out << "samples,excess_hat,excess_se,overflow_hat,overflow_se,seed\n";
  out << rep.samples << ',' << fmt17(rep.excess_hat) << ',' << fmt17(rep.excess_se) << ','
      << fmt17(rep.overflow_hat) << ',' << fmt17(rep.overflow_se) << ',' << rep.seed << "\n";
  out << csv_trailer(o.seed, loaded.hash) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable-length lossy source coding limits on finite alphabets"};
  app.require_subcommand(1);
  CommonOpts o;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--instance", o.instance_path, "Instance JSON file")->required();
    cmd->add_option("--out", o.out_path, "Output file (default: stdout)");
    cmd->add_flag("--exact", o.exact, "Exact rational arithmetic");
  };

  CLI::App* entropy = app.add_subcommand("entropy", "Smooth max entropy of the source law");
  add_common(entropy);
  entropy->add_option("--delta", o.delta_flag, "Smoothing parameter (defaults to the instance delta)");

  CLI::App* gval = app.add_subcommand("gval", "Greedy-cover rate quantity and thresholds");
  add_common(gval);

  CLI::App* build = app.add_subcommand("build-code", "Construct a code table");
  add_common(build);
  build->add_flag("--stochastic", o.stochastic, "Stochastic encoder (default)");
  build->add_flag("--deterministic", o.deterministic, "Deterministic encoder");

  CLI::App* evalc = app.add_subcommand("eval-code", "Exact evaluation of a code");
  add_common(evalc);
  evalc->add_flag("--stochastic", o.stochastic, "Evaluate the stochastic construction (default)");
  evalc->add_flag("--deterministic", o.deterministic, "Evaluate the deterministic construction");
  evalc->add_option("--code", o.code_path, "Code table JSON (instead of constructing)");
  evalc->add_option("--rate", o.rate_flag, "Rate threshold (default: the code's rate)");

  CLI::App* audit = app.add_subcommand("audit", "Converse, majorization, and invariance audits");
  add_common(audit);
  audit->add_option("--trials", o.trials, "Trials per randomized audit");
  audit->add_option("--seed", o.seed, "Audit RNG seed");

  CLI::App* sweep = app.add_subcommand("sweep-n", "Blocklength sweep of the rate bracket");
  add_common(sweep);
  sweep->add_option("--max-n", o.max_n, "Largest blocklength")->required();
  sweep->add_option("--budget", o.budget_flag, "Alphabet budget (or env LOSSY_BUDGET)");

  CLI::App* rd = app.add_subcommand("rd-curve", "Rate-distortion curve CSV");
  add_common(rd);
  rd->add_option("--d-grid", o.d_grid, "Distortion grid 'lo:hi:step'");
  rd->add_option("--at", o.rd_at, "Emit the solution at a single level as JSON");

  CLI::App* gauss = app.add_subcommand("gaussian-compare",
                                       "Blocklength rates against the normal approximation");
  add_common(gauss);
  gauss->add_option("--max-n", o.max_n, "Largest blocklength")->required();
  gauss->add_option("--budget", o.budget_flag, "Alphabet budget (or env LOSSY_BUDGET)");

  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo estimate of a code's budgets");
  add_common(sim);
  sim->add_flag("--stochastic", o.stochastic, "Simulate the stochastic construction (default)");
  sim->add_flag("--deterministic", o.deterministic, "Simulate the deterministic construction");
  sim->add_option("--code", o.code_path, "Code table JSON (instead of constructing)");
  sim->add_option("--rate", o.rate_flag, "Rate threshold (default: the code's rate)");
  sim->add_option("--samples", o.samples, "Sample count");
  sim->add_option("--seed", o.seed, "Simulation RNG seed");

  CLI11_PARSE(app, argc, argv);

  if (o.stochastic && o.deterministic) {
    std::cerr << "choose one of --stochastic / --deterministic\n";
    return 2;
  }
  if (o.exact && (rd->parsed() || gauss->parsed())) {
    std::cerr << "--exact is not available for numeric-only commands\n";
    return 2;
  }

  try {
    if (entropy->parsed()) return o.exact ? cmd_entropy<Rational>(o) : cmd_entropy<double>(o);
    if (gval->parsed()) return o.exact ? cmd_gval<Rational>(o) : cmd_gval<double>(o);
    if (build->parsed()) return o.exact ? cmd_build_code<Rational>(o) : cmd_build_code<double>(o);
    if (evalc->parsed()) return o.exact ? cmd_eval_code<Rational>(o) : cmd_eval_code<double>(o);
    if (audit->parsed()) return o.exact ? cmd_audit<Rational>(o) : cmd_audit<double>(o);
    if (sweep->parsed()) return o.exact ? cmd_sweep_n<Rational>(o) : cmd_sweep_n<double>(o);
    if (rd->parsed()) return cmd_rd_curve(o);
    if (gauss->parsed()) return cmd_gaussian_compare(o);
    if (sim->parsed()) return o.exact ? cmd_simulate<Rational>(o) : cmd_simulate<double>(o);
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

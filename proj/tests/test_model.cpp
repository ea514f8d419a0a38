#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <deque>
#include <string>

#include "lossy/model.hpp"
#include "lossy/rng.hpp"
#include "test_helpers.hpp"

using namespace lossy;

TEST_CASE("codeword enumeration starts lambda, 0, 1, 00, 01, 10, 11, 000") {
  CHECK(index_to_word(1) == "");
  CHECK(index_to_word(2) == "0");
  CHECK(index_to_word(3) == "1");
  CHECK(index_to_word(4) == "00");
  CHECK(index_to_word(5) == "01");
  CHECK(index_to_word(6) == "10");
  CHECK(index_to_word(7) == "11");
  CHECK(index_to_word(8) == "000");
}

TEST_CASE("codeword enumeration matches a breadth-first generation") {
  // Independent enumeration: grow strings in length order, digits appended
  // in numeric order.
  std::deque<std::string> queue = {""};
  std::uint64_t index = 1;
  while (index <= (std::uint64_t(1) << 12)) {
    const std::string w = queue.front();
    queue.pop_front();
    CHECK(index_to_word(index) == w);
    queue.push_back(w + "0");
    queue.push_back(w + "1");
    ++index;
  }
}

TEST_CASE("word_to_index inverts index_to_word exhaustively to 2^20") {
  for (std::uint64_t i = 1; i <= (std::uint64_t(1) << 20); ++i) {
    const std::string w = index_to_word(i);
    CHECK(w.size() == word_length(i));
    CHECK(word_to_index(w) == i);
    // length equals floor(log2 i)
    std::uint64_t p = 1, len = 0;
    while (p * 2 <= i) {
      p *= 2;
      ++len;
    }
    if (word_length(i) != len) {
      REQUIRE(word_length(i) == len);
    }
  }
}

TEST_CASE("word_to_index examples and errors") {
  CHECK(word_to_index("") == 1);
  CHECK(word_to_index("11") == 7);
  CHECK(word_to_index("000") == 8);
  CHECK_THROWS_AS(index_to_word(0), SchemaError);
  CHECK_THROWS_AS(word_to_index("01a"), SchemaError);
  CodewordIndex ci{5};
  CHECK(ci.word() == "01");
  CHECK(ci.length() == 2);
}

namespace {

Instance<double> binary_hamming(double p0, double level, double eps, double del) {
  Instance<double> inst;
  inst.source.symbols = {"0", "1"};
  inst.source.probs = {p0, 1.0 - p0};
  inst.y_symbols = {"0", "1"};
  inst.distortion.matrix = {{0.0, 1.0}, {1.0, 0.0}};
  inst.distortion.level = level;
  inst.epsilon = eps;
  inst.delta = del;
  return inst;
}

}  // namespace

TEST_CASE("check_feasible agrees with direct evaluation") {
  CHECK(check_feasible(binary_hamming(0.5, 0.0, 0.1, 0.0)) == Feasibility::kFeasible);

  Instance<double> lone;
  lone.source.symbols = {"a"};
  lone.source.probs = {1.0};
  lone.y_symbols = {"b"};
  lone.distortion.matrix = {{5.0}};
  lone.distortion.level = 1.0;
  lone.epsilon = 0.0;
  lone.delta = 0.0;
  CHECK(check_feasible(lone) == Feasibility::kInfeasible);

  Instance<double> partial;
  partial.source.symbols = {"a", "b"};
  partial.source.probs = {0.3, 0.7};
  partial.y_symbols = {"y"};
  partial.distortion.matrix = {{2.0}, {0.0}};
  partial.distortion.level = 1.0;
  partial.epsilon = 0.3;
  partial.delta = 0.0;
  CHECK(check_feasible(partial) == Feasibility::kFeasible);
  partial.epsilon = 0.25;
  CHECK(check_feasible(partial) == Feasibility::kInfeasible);
}

TEST_CASE("check_feasible is monotone in D and epsilon") {
  SplitRng rng(20240);
  for (int trial = 0; trial < 300; ++trial) {
    const auto raw = testutil::random_raw_instance(rng);
    auto inst = raw.to<double>();
    if (check_feasible(inst) != Feasibility::kFeasible) continue;
    auto larger_d = inst;
    larger_d.distortion.level += 0.5 * static_cast<double>(rng.uniform_int(1, 4));
    CHECK(check_feasible(larger_d) == Feasibility::kFeasible);
    auto larger_eps = inst;
    larger_eps.epsilon += (1.0 - larger_eps.epsilon) * 0.5;
    CHECK(check_feasible(larger_eps) == Feasibility::kFeasible);
  }
}

TEST_CASE("validate rejects malformed instances") {
  auto good = binary_hamming(0.5, 0.0, 0.1, 0.1);
  CHECK_NOTHROW(validate(good));

  auto bad = good;
  bad.source.probs = {0.5, 0.6};
  CHECK_THROWS_AS(validate(bad), SchemaError);

  bad = good;
  bad.source.probs = {-0.1, 1.1};
  CHECK_THROWS_AS(validate(bad), SchemaError);

  bad = good;
  bad.source.symbols = {"0", "0"};
  CHECK_THROWS_AS(validate(bad), SchemaError);

  bad = good;
  bad.epsilon = 1.0;
  CHECK_THROWS_AS(validate(bad), SchemaError);

  bad = good;
  bad.distortion.matrix[0][1] = -1.0;
  CHECK_THROWS_AS(validate(bad), SchemaError);

  bad = good;
  bad.distortion.matrix.pop_back();
  CHECK_THROWS_AS(validate(bad), SchemaError);
}

TEST_CASE("rational and float instances agree on feasibility") {
  SplitRng rng(777);
  for (int trial = 0; trial < 200; ++trial) {
    const auto raw = testutil::random_raw_instance(rng);
    const auto fd = check_feasible(raw.to<double>());
    const auto fr = check_feasible(raw.to<Rational>());
    CHECK(fd == fr);
  }
}

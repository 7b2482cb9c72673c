#include <doctest.h>

#include <cmath>

#include "bayesnam/analytic.hpp"
#include "bayesnam/synthetic.hpp"

using namespace bayesnam;

TEST_CASE("synthetic: shapes, determinism, domains") {
  ToySpec spec;
  spec.n = 5000;
  spec.seed = 11;
  const Dataset a = gen_toy(spec);
  CHECK(a.n() == 5000);
  CHECK(a.d() == 3);
  CHECK(a.task == Task::Classification);
  CHECK(a.feature_names == std::vector<std::string>{"x1", "x2", "x3"});
  for (Index i = 0; i < a.n(); ++i) {
    CHECK((a.y(i) == 0.0 || a.y(i) == 1.0));
    CHECK((a.X(i, 0) == 1.0 || a.X(i, 0) == -1.0));
  }
  const Dataset b = gen_toy(spec);
  CHECK(a.X == b.X);
  CHECK(a.y == b.y);
  spec.seed = 12;
  const Dataset c = gen_toy(spec);
  CHECK(a.X != c.X);
}

TEST_CASE("synthetic: first feature tracks the sign with probability p") {
  ToySpec spec;
  spec.n = 50000;
  spec.p = 0.95;
  spec.seed = 2;
  const Dataset data = gen_toy(spec);
  Index agree = 0, pos = 0;
  for (Index i = 0; i < data.n(); ++i) {
    const double sign = 2.0 * data.y(i) - 1.0;
    agree += data.X(i, 0) == sign ? 1 : 0;
    pos += data.y(i) == 1.0 ? 1 : 0;
  }
  const double n = static_cast<double>(data.n());
  CHECK(std::abs(agree / n - 0.95) < 4.0 * std::sqrt(0.95 * 0.05 / n));
  CHECK(std::abs(pos / n - 0.5) < 4.0 * std::sqrt(0.25 / n));
}

TEST_CASE("synthetic: noise features have the configured moments") {
  ToySpec spec;
  spec.n = 60000;
  spec.d = 5;
  spec.lambda = 0.0;
  spec.seed = 3;
  const Dataset data = gen_toy(spec);
  // sigma2 defaults to d - 1 = 4.
  for (Index f = 1; f < data.d(); ++f) {
    const double mean = data.X.col(f).mean();
    const double var = (data.X.col(f).array() - mean).square().mean();
    const double n = static_cast<double>(data.n());
    CHECK(std::abs(mean) < 4.0 * std::sqrt(4.0 / n));
    CHECK(std::abs(var - 4.0) < 4.0 * 4.0 * std::sqrt(2.0 / n));
  }
}

TEST_CASE("synthetic: informative case shifts the noise means by lambda * y") {
  ToySpec spec;
  spec.n = 60000;
  spec.lambda = 3.0;
  spec.seed = 4;
  const Dataset data = gen_toy(spec);  // sigma2 = 2
  for (Index f = 1; f < data.d(); ++f) {
    double sum_pos = 0.0, sum_neg = 0.0;
    Index n_pos = 0, n_neg = 0;
    for (Index i = 0; i < data.n(); ++i) {
      if (data.y(i) == 1.0) {
        sum_pos += data.X(i, f);
        ++n_pos;
      } else {
        sum_neg += data.X(i, f);
        ++n_neg;
      }
    }
    const double se = std::sqrt(2.0 / static_cast<double>(n_pos));
    CHECK(std::abs(sum_pos / n_pos - 3.0) < 4.0 * se);
    CHECK(std::abs(sum_neg / n_neg + 3.0) < 4.0 * se);
  }
}

TEST_CASE("synthetic: equal-weight vote over noise features matches the closed form") {
  ToySpec spec;
  spec.n = 200000;
  spec.lambda = 3.0;
  spec.seed = 5;
  const Dataset data = gen_toy(spec);
  Index hits = 0;
  for (Index i = 0; i < data.n(); ++i) {
    const double sign = 2.0 * data.y(i) - 1.0;
    hits += sign * (data.X(i, 1) + data.X(i, 2)) > 0.0 ? 1 : 0;
  }
  const double got = hits / static_cast<double>(data.n());
  const double want = lemma1_accuracy(3.0, 2.0, 3);
  CHECK(std::abs(got - want) < 0.002);
}

TEST_CASE("synthetic: spec validation") {
  ToySpec bad;
  bad.n = 0;
  CHECK_THROWS_AS(gen_toy(bad), std::invalid_argument);
  bad = ToySpec{};
  bad.d = 1;
  CHECK_THROWS_AS(gen_toy(bad), std::invalid_argument);
  bad = ToySpec{};
  bad.p = 0.5;
  CHECK_THROWS_AS(gen_toy(bad), std::invalid_argument);
  bad = ToySpec{};
  bad.lambda = -1.0;
  CHECK_THROWS_AS(gen_toy(bad), std::invalid_argument);
}

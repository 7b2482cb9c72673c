#include <doctest.h>

#include <cmath>

#include "bayesnam/sgd.hpp"

using namespace bayesnam;

TEST_CASE("sgd: config validation") {
  SgdConfig ok;
  validate(ok);
  SgdConfig bad = ok;
  bad.lr = 0.0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = ok;
  bad.momentum = -0.1;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = ok;
  bad.momentum = 1.0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = ok;
  bad.weight_decay = -1e-4;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = ok;
  bad.epochs = 0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = ok;
  bad.batch_size = 0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
}

TEST_CASE("sgd: learning rate schedule") {
  SgdConfig cfg;
  cfg.lr = 0.4;
  cfg.schedule = LrSchedule::Constant;
  CHECK(lr_at(cfg, 0, 100) == 0.4);
  CHECK(lr_at(cfg, 99, 100) == 0.4);
  cfg.schedule = LrSchedule::Cosine;
  CHECK(lr_at(cfg, 0, 100) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(lr_at(cfg, 50, 100) == doctest::Approx(0.2).epsilon(1e-12));   // cos(pi/2) = 0
  CHECK(lr_at(cfg, 100, 100) == doctest::Approx(0.0).epsilon(1e-12));  // fully decayed
  CHECK(lr_at(cfg, 25, 100) == doctest::Approx(0.4 * 0.5 * (1.0 + std::cos(M_PI * 0.25))));
}

TEST_CASE("sgd: update rule matches hand arithmetic") {
  // v <- m v + (g + wd p); p <- p - lr v, with lr=0.1, m=0.9, wd=0.01.
  // Step 1: p=1, v=0, g=0.5 -> v=0.51, p=0.949.
  // Step 2: g=0.2 -> v=0.9*0.51 + 0.2 + 0.00949 = 0.66849, p=0.882151.
  Mat p = Mat::Constant(1, 1, 1.0);
  Mat v = Mat::Zero(1, 1);
  const Mat g1 = Mat::Constant(1, 1, 0.5), g2 = Mat::Constant(1, 1, 0.2);
  sgd_update(p, v, g1, 0.1, 0.9, 0.01);
  CHECK(p(0, 0) == doctest::Approx(0.949).epsilon(1e-14));
  CHECK(v(0, 0) == doctest::Approx(0.51).epsilon(1e-14));
  sgd_update(p, v, g2, 0.1, 0.9, 0.01);
  CHECK(v(0, 0) == doctest::Approx(0.66849).epsilon(1e-12));
  CHECK(p(0, 0) == doctest::Approx(0.949 - 0.066849).epsilon(1e-12));
}

TEST_CASE("sgd: momentum drives a quadratic to its minimum") {
  // f(p) = (p - 3)^2, gradient 2 (p - 3).
  Mat p = Mat::Zero(1, 1);
  Mat v = Mat::Zero(1, 1);
  for (int i = 0; i < 400; ++i) {
    const Mat g = Mat::Constant(1, 1, 2.0 * (p(0, 0) - 3.0));
    sgd_update(p, v, g, 0.05, 0.9, 0.0);
  }
  CHECK(std::abs(p(0, 0) - 3.0) < 1e-8);
}

TEST_CASE("sgd: weight decay applies to mu, never to rho") {
  BayesMlpParams p = init_bayes_mlp({1, 3, 1}, 0.1, 0.2, 1);
  const BayesMlpParams before = p;
  BayesMlpGrads vel = zeros_like(p);
  BayesMlpGrads grads = zeros_like(p);  // zero data gradient isolates the decay
  SgdConfig cfg;
  cfg.lr = 0.5;
  cfg.weight_decay = 1.0;
  sgd_step(p, vel, grads, cfg, 0, 10);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    // mu decays: mu' = mu - lr * wd * mu = 0.5 mu.
    CHECK((p.layers[l].mu_w - 0.5 * before.layers[l].mu_w).norm() < 1e-15);
    // rho is untouched.
    CHECK(p.layers[l].rho_w == before.layers[l].rho_w);
    CHECK(p.layers[l].rho_b == before.layers[l].rho_b);
  }
}

TEST_CASE("sgd: deterministic layer step matches a manual update") {
  MlpParams p = init_mlp({2, 3, 1}, 5);
  const MlpParams before = p;
  MlpGrads vel = zeros_like(p);
  MlpGrads grads = zeros_like(p);
  grads.layers[0].W.setConstant(0.25);
  SgdConfig cfg;
  cfg.lr = 0.2;
  cfg.schedule = LrSchedule::Constant;
  sgd_step(p, vel, grads, cfg, 3, 10);
  CHECK((p.layers[0].W - (before.layers[0].W.array() - 0.05).matrix()).norm() < 1e-15);
  CHECK(p.layers[1].W == before.layers[1].W);
}

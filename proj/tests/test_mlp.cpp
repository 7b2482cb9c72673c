#include <doctest.h>

#include <cmath>
#include <vector>

#include "bayesnam/mlp.hpp"
#include "bayesnam/rng.hpp"
#include "testutil.hpp"

using namespace bayesnam;

namespace {

// Loss v . f(x) with all randomness frozen; used for finite differences.
double probe_loss(const MlpParams& p, const Vec& x, const Vec& v, const Vec* mask) {
  return v.dot(mlp_forward(p, x, nullptr, mask));
}

// Central differences over every weight and bias.
MlpGrads numeric_grads(MlpParams p, const Vec& x, const Vec& v, const Vec* mask,
                       double h = 1e-6) {
  MlpGrads out = zeros_like(p);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    for (Index r = 0; r < p.layers[l].W.rows(); ++r)
      for (Index c = 0; c < p.layers[l].W.cols(); ++c) {
        const double keep = p.layers[l].W(r, c);
        p.layers[l].W(r, c) = keep + h;
        const double up = probe_loss(p, x, v, mask);
        p.layers[l].W(r, c) = keep - h;
        const double dn = probe_loss(p, x, v, mask);
        p.layers[l].W(r, c) = keep;
        out.layers[l].W(r, c) = (up - dn) / (2.0 * h);
      }
    for (Index r = 0; r < p.layers[l].b.size(); ++r) {
      const double keep = p.layers[l].b(r);
      p.layers[l].b(r) = keep + h;
      const double up = probe_loss(p, x, v, mask);
      p.layers[l].b(r) = keep - h;
      const double dn = probe_loss(p, x, v, mask);
      p.layers[l].b(r) = keep;
      out.layers[l].b(r) = (up - dn) / (2.0 * h);
    }
  }
  return out;
}

double max_rel_diff(const MlpGrads& a, const MlpGrads& b) {
  double worst = 0.0;
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    worst = std::max(worst, ((a.layers[l].W - b.layers[l].W).array().abs() /
                             (b.layers[l].W.array().abs() + 1.0))
                                .maxCoeff());
    worst = std::max(worst, ((a.layers[l].b - b.layers[l].b).array().abs() /
                             (b.layers[l].b.array().abs() + 1.0))
                                .maxCoeff());
  }
  return worst;
}

// Finite differences need the ReLU gates to stay fixed under the probe step.
double min_abs_preactivation(const MlpParams& p, const Vec& x, const Vec* mask) {
  MlpCache cache;
  mlp_forward(p, x, &cache, mask);
  double lo = 1e300;
  for (std::size_t l = 0; l + 1 < p.layers.size(); ++l)
    lo = std::min(lo, cache.pre[l].array().abs().minCoeff());
  return lo;
}

}  // namespace

TEST_CASE("mlp: init shapes, bounds, determinism") {
  const MlpParams p = init_mlp({3, 10, 4, 1}, 11);
  REQUIRE(p.layers.size() == 3);
  CHECK(p.layers[0].W.rows() == 10);
  CHECK(p.layers[0].W.cols() == 3);
  CHECK(p.layers[1].W.rows() == 4);
  CHECK(p.layers[1].W.cols() == 10);
  CHECK(p.layers[2].W.rows() == 1);
  CHECK(p.layers[2].W.cols() == 4);
  CHECK(p.in_dim() == 3);
  CHECK(p.out_dim() == 1);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const double bound = std::sqrt(1.0 / static_cast<double>(p.layers[l].W.cols()));
    CHECK(p.layers[l].W.array().abs().maxCoeff() <= bound);
    CHECK(p.layers[l].b.isZero(0.0));
  }
  const MlpParams q = init_mlp({3, 10, 4, 1}, 11);
  for (std::size_t l = 0; l < p.layers.size(); ++l) CHECK(p.layers[l].W == q.layers[l].W);
  const MlpParams r = init_mlp({3, 10, 4, 1}, 12);
  CHECK(p.layers[0].W != r.layers[0].W);

  CHECK_THROWS_AS(init_mlp({5}, 0), std::invalid_argument);
  CHECK_THROWS_AS(init_mlp({1, 0, 1}, 0), std::invalid_argument);
}

TEST_CASE("mlp: forward matches hand arithmetic") {
  // 2 -> 2 -> 1 with fixed weights:
  //   z1 = W1 x + b1 = [1*0.5 - 1*1 + 0.1, 2*0.5 + 0.5*1 - 0.2] = [-0.4, 1.3]
  //   a1 = relu(z1) = [0, 1.3]
  //   y  = [0.3, -2] a1 + 0.25 = -2.6 + 0.25 = -2.35
  MlpParams p;
  p.layers.resize(2);
  p.layers[0].W.resize(2, 2);
  p.layers[0].W << 1.0, -1.0, 2.0, 0.5;
  p.layers[0].b.resize(2);
  p.layers[0].b << 0.1, -0.2;
  p.layers[1].W.resize(1, 2);
  p.layers[1].W << 0.3, -2.0;
  p.layers[1].b.resize(1);
  p.layers[1].b << 0.25;

  Vec x(2);
  x << 0.5, 1.0;
  MlpCache cache;
  const Vec y = mlp_forward(p, x, &cache);
  CHECK(y.size() == 1);
  CHECK(y(0) == doctest::Approx(-2.35).epsilon(1e-12));
  CHECK(cache.pre[0](0) == doctest::Approx(-0.4).epsilon(1e-12));
  CHECK(cache.pre[0](1) == doctest::Approx(1.3).epsilon(1e-12));
  CHECK(cache.post[0](0) == 0.0);

  // Masking the surviving unit (keep only unit 0, scaled by 2) kills the
  // whole hidden signal: y = 0.3 * (2 * 0) - 2 * 0 + 0.25.
  Vec mask(2);
  mask << 2.0, 0.0;
  const Vec ym = mlp_forward(p, x, nullptr, &mask);
  CHECK(ym(0) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("mlp: backward agrees with finite differences") {
  Rng rng(2024);
  for (const std::vector<int>& sizes :
       {std::vector<int>{1, 10, 1}, std::vector<int>{2, 5, 3, 1}, std::vector<int>{3, 1}}) {
    const MlpParams p = init_mlp(sizes, 31);
    Vec x(sizes.front());
    for (Index i = 0; i < x.size(); ++i) x(i) = rng.normal();
    Vec v(sizes.back());
    for (Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
    REQUIRE(min_abs_preactivation(p, x, nullptr) > 1e-4);  // keep gates stable for fd

    MlpCache cache;
    mlp_forward(p, x, &cache);
    const MlpGrads got = mlp_backward(p, cache, v);
    const MlpGrads want = numeric_grads(p, x, v, nullptr);
    CHECK(max_rel_diff(got, want) < 1e-6);
  }
}

TEST_CASE("mlp: backward with a hidden mask") {
  const MlpParams p = init_mlp({2, 8, 1}, 77);
  Rng rng(5);
  Vec x(2);
  x << 0.7, -1.1;
  Vec v(1);
  v << 1.0;
  Vec mask(8);
  for (Index i = 0; i < 8; ++i) mask(i) = rng.bernoulli(0.75) ? 1.0 / 0.75 : 0.0;
  REQUIRE(min_abs_preactivation(p, x, &mask) > 1e-4);

  MlpCache cache;
  mlp_forward(p, x, &cache, &mask);
  const MlpGrads got = mlp_backward(p, cache, v);
  const MlpGrads want = numeric_grads(p, x, v, &mask);
  CHECK(max_rel_diff(got, want) < 1e-6);

  // A single affine layer has no hidden activation to mask.
  const MlpParams affine = init_mlp({2, 1}, 3);
  Vec m1(1);
  m1 << 1.0;
  CHECK_THROWS_AS(mlp_forward(affine, x, nullptr, &m1), std::invalid_argument);
}

TEST_CASE("mlp: zeros_like and axpy") {
  const MlpParams p = init_mlp({2, 4, 1}, 8);
  MlpParams acc = zeros_like(p);
  for (const DenseLayer& l : acc.layers) {
    CHECK(l.W.isZero(0.0));
    CHECK(l.b.isZero(0.0));
  }
  axpy(acc, p, 2.0);
  axpy(acc, p, -0.5);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    CHECK((acc.layers[l].W - 1.5 * p.layers[l].W).norm() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK((acc.layers[l].b - 1.5 * p.layers[l].b).norm() == doctest::Approx(0.0).epsilon(1e-15));
  }
}

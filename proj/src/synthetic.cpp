#include "bayesnam/synthetic.hpp"

#include <cmath>
#include <stdexcept>

#include "bayesnam/rng.hpp"

namespace bayesnam {

void validate(const ToySpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("gen_toy: n must be >= 1");
  if (spec.d < 2) throw std::invalid_argument("gen_toy: d must be >= 2");
  if (!(spec.p > 0.5 && spec.p <= 1.0))
    throw std::invalid_argument("gen_toy: p must be in (0.5, 1]");
  if (!(spec.lambda >= 0.0)) throw std::invalid_argument("gen_toy: lambda must be >= 0");
  if (spec.sigma2 >= 0.0 && !(spec.sigma2 > 0.0))
    throw std::invalid_argument("gen_toy: sigma2 must be positive");
}

Dataset gen_toy(const ToySpec& spec) {
  validate(spec);
  const double sigma2 = spec.sigma2 < 0.0 ? static_cast<double>(spec.d - 1) : spec.sigma2;
  const double sigma = std::sqrt(sigma2);

  Rng rng(spec.seed);
  Dataset data;
  data.task = Task::Classification;
  data.feature_names = default_feature_names(spec.d);
  data.X.resize(spec.n, spec.d);
  data.y.resize(spec.n);
  for (Index m = 0; m < spec.n; ++m) {
    const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
    data.y(m) = sign > 0.0 ? 1.0 : 0.0;
    data.X(m, 0) = rng.bernoulli(spec.p) ? sign : -sign;
    for (Index j = 1; j < spec.d; ++j)
      data.X(m, j) = spec.lambda * sign + sigma * rng.normal();
  }
  return data;
}

}  // namespace bayesnam

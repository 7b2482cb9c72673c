#pragma once

#include <cstdint>

#include "bayesnam/dataset.hpp"

namespace bayesnam {

// Binary toy task. The sign y is uniform on {-1, +1}; feature 1 equals +y
// with probability p and -y otherwise; features 2..d are independent
// N(lambda * y, sigma2). Targets are stored as {0, 1} (y = -1 -> 0), which
// keeps the raw sign recoverable as 2*target - 1.
struct ToySpec {
  Index n = 50000;
  Index d = 3;
  double p = 0.95;
  double lambda = 0.0;     // 0 for the pure-noise case, 3 for the informative case
  double sigma2 = -1.0;    // < 0 means the default d - 1
  std::uint64_t seed = 0;
};

void validate(const ToySpec& spec);

Dataset gen_toy(const ToySpec& spec);

}  // namespace bayesnam

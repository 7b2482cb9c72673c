#pragma once

#include "bayesnam/bayes_linear.hpp"
#include "bayesnam/mlp.hpp"

namespace bayesnam {

enum class LrSchedule { Constant, Cosine };

struct SgdConfig {
  double lr = 0.01;
  double momentum = 0.0;
  double weight_decay = 0.0;
  int epochs = 1;
  int batch_size = 1;
  LrSchedule schedule = LrSchedule::Constant;
};

void validate(const SgdConfig& cfg);

// Learning rate at a given optimizer step. Cosine decays over total_steps:
// lr * 0.5 * (1 + cos(pi * step / total_steps)).
double lr_at(const SgdConfig& cfg, long step, long total_steps);

// One classical-momentum update on a single tensor:
//   v <- momentum * v + (g + weight_decay * p);  p <- p - lr * v.
template <typename T>
void sgd_update(T& param, T& velocity, const T& grad, double lr, double momentum,
                double weight_decay) {
  velocity = momentum * velocity + (grad + weight_decay * param);
  param -= lr * velocity;
}

// Updates every layer of a deterministic network.
void sgd_step(MlpParams& params, MlpGrads& velocity, const MlpGrads& grads,
              const SgdConfig& cfg, long step, long total_steps);

// Bayesian variant; weight decay applies to mu only, never to rho.
void sgd_step(BayesMlpParams& params, BayesMlpGrads& velocity, const BayesMlpGrads& grads,
              const SgdConfig& cfg, long step, long total_steps);

}  // namespace bayesnam

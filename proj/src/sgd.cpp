#include "bayesnam/sgd.hpp"

#include <cmath>
#include <stdexcept>

namespace bayesnam {

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;
}

void validate(const SgdConfig& cfg) {
  if (!(cfg.lr > 0.0)) throw std::invalid_argument("sgd: lr must be positive");
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0))
    throw std::invalid_argument("sgd: momentum must be in [0, 1)");
  if (!(cfg.weight_decay >= 0.0)) throw std::invalid_argument("sgd: weight_decay must be >= 0");
  if (cfg.epochs < 1) throw std::invalid_argument("sgd: epochs must be >= 1");
  if (cfg.batch_size < 1) throw std::invalid_argument("sgd: batch_size must be >= 1");
}

double lr_at(const SgdConfig& cfg, long step, long total_steps) {
  if (cfg.schedule == LrSchedule::Constant) return cfg.lr;
  if (total_steps <= 0) throw std::invalid_argument("lr_at: total_steps must be positive");
  const double frac = static_cast<double>(step) / static_cast<double>(total_steps);
  return cfg.lr * 0.5 * (1.0 + std::cos(kPi * frac));
}

void sgd_step(MlpParams& params, MlpGrads& velocity, const MlpGrads& grads,
              const SgdConfig& cfg, long step, long total_steps) {
  if (params.layers.size() != grads.layers.size() ||
      params.layers.size() != velocity.layers.size())
    throw std::invalid_argument("sgd_step: layer count mismatch");
  const double lr = lr_at(cfg, step, total_steps);
  for (std::size_t t = 0; t < params.layers.size(); ++t) {
    sgd_update(params.layers[t].W, velocity.layers[t].W, grads.layers[t].W, lr, cfg.momentum,
               cfg.weight_decay);
    sgd_update(params.layers[t].b, velocity.layers[t].b, grads.layers[t].b, lr, cfg.momentum,
               cfg.weight_decay);
  }
}

void sgd_step(BayesMlpParams& params, BayesMlpGrads& velocity, const BayesMlpGrads& grads,
              const SgdConfig& cfg, long step, long total_steps) {
  if (params.layers.size() != grads.mu.layers.size() ||
      params.layers.size() != velocity.mu.layers.size())
    throw std::invalid_argument("sgd_step: layer count mismatch");
  const double lr = lr_at(cfg, step, total_steps);
  for (std::size_t t = 0; t < params.layers.size(); ++t) {
    BayesLinearParams& l = params.layers[t];
    sgd_update(l.mu_w, velocity.mu.layers[t].W, grads.mu.layers[t].W, lr, cfg.momentum,
               cfg.weight_decay);
    sgd_update(l.mu_b, velocity.mu.layers[t].b, grads.mu.layers[t].b, lr, cfg.momentum,
               cfg.weight_decay);
    sgd_update(l.rho_w, velocity.rho.layers[t].W, grads.rho.layers[t].W, lr, cfg.momentum, 0.0);
    sgd_update(l.rho_b, velocity.rho.layers[t].b, grads.rho.layers[t].b, lr, cfg.momentum, 0.0);
  }
}

}  // namespace bayesnam

#pragma once

#include <cstdint>
#include <vector>

#include "bayesnam/mlp.hpp"
#include "bayesnam/rng.hpp"
#include "bayesnam/types.hpp"

namespace bayesnam {

// Variational affine layer: each weight w ~ N(mu, s^2) with s = softplus(rho),
// prior N(0, s0^2). Sampling uses the reparameterization w = mu + s * eps.
struct BayesLinearParams {
  Mat mu_w;
  Vec mu_b;
  Mat rho_w;  // pre-softplus spread
  Vec rho_b;
  double s0 = 1e-4;  // prior standard deviation
};

struct BayesMlpParams {
  std::vector<BayesLinearParams> layers;

  Index in_dim() const { return layers.empty() ? 0 : layers.front().mu_w.cols(); }
  Index out_dim() const { return layers.empty() ? 0 : layers.back().mu_w.rows(); }
};

// Standard normal draws used for one sampled realization of a layer.
struct LayerNoise {
  Mat eps_w;
  Vec eps_b;
};

struct BayesMlpGrads {
  MlpGrads mu;
  MlpGrads rho;
};

// mu follows the deterministic init scheme (uniform weights, zero biases);
// rho is constant at softplus_inv(s_init) so the initial spread equals s_init.
BayesMlpParams init_bayes_mlp(const std::vector<int>& layer_sizes, double s0_prior,
                              double s_init, std::uint64_t seed);

// Draws one realization w = mu + softplus(rho) * eps. Element order is fixed
// (weights row-major, then biases) so streams are reproducible.
DenseLayer bayes_sample(const BayesLinearParams& p, Rng& rng, LayerNoise* noise = nullptr);

// Deterministic counterpart of bayes_sample for pre-drawn noise.
DenseLayer bayes_realize(const BayesLinearParams& p, const LayerNoise& noise);

MlpParams bayes_sample_mlp(const BayesMlpParams& p, Rng& rng,
                           std::vector<LayerNoise>* noise = nullptr);
MlpParams bayes_realize_mlp(const BayesMlpParams& p, const std::vector<LayerNoise>& noise);

// Posterior means only (the s -> 0 network).
MlpParams bayes_mean_mlp(const BayesMlpParams& p);

// KL(q || prior) summed over every weight and bias of the layer:
//   ln(s0/s) + (s^2 + mu^2) / (2 s0^2) - 1/2 per element.
double kl_gaussian(const BayesLinearParams& p);
double kl_gaussian(const BayesMlpParams& p);

// Chain rule from gradients w.r.t. a sampled realization back to (mu, rho):
// d_mu += dW, d_rho += dW * eps * sigmoid(rho).
void accumulate_sample_grads(const BayesLinearParams& p, const DenseLayer& w_grad,
                             const LayerNoise& noise, DenseLayer& mu_grad,
                             DenseLayer& rho_grad);

// Adds weight * dKL/d(mu, rho) in place.
void add_kl_grads(const BayesLinearParams& p, double weight, DenseLayer& mu_grad,
                  DenseLayer& rho_grad);

BayesMlpGrads zeros_like(const BayesMlpParams& p);

}  // namespace bayesnam

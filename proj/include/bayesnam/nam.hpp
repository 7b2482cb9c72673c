#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "bayesnam/bayes_linear.hpp"
#include "bayesnam/dataset.hpp"
#include "bayesnam/mlp.hpp"
#include "bayesnam/rng.hpp"
#include "bayesnam/sgd.hpp"

namespace bayesnam {

enum class Mode { Train, Eval };
enum class KlWeightMode { PerBatch };  // KL enters each batch loss once / (batches per epoch)

struct NamConfig {
  std::vector<int> hidden_sizes{10};
  bool bayesian = false;
  double s0 = 1e-4;       // prior std; also the initial spread unless s0_init is set
  double s0_init = -1.0;  // < 0 means "use s0"
  double tau = 0.0;       // feature dropout rate
  double input_dropout = 0.0;  // dropout on each subnet's first hidden activation
  std::vector<std::pair<int, int>> interactions;  // feature index pairs, i != j
  KlWeightMode kl_weight_mode = KlWeightMode::PerBatch;
  std::uint64_t seed = 0;
};

void validate(const NamConfig& config, Index d);

using SubnetParams = std::variant<MlpParams, BayesMlpParams>;
using SubnetGrads = std::variant<MlpGrads, BayesMlpGrads>;

// Additive model: output(x) = sum_i f_i(x_i) + sum_t f_t(x_i, x_j) + beta.
struct NamModel {
  std::vector<SubnetParams> subnets;           // one per feature
  std::vector<SubnetParams> interaction_nets;  // one per configured pair
  double beta = 0.0;
  NamConfig config;

  Index d() const { return static_cast<Index>(subnets.size()); }
  Index n_terms() const {
    return static_cast<Index>(subnets.size() + interaction_nets.size());
  }
  bool bayesian() const { return config.bayesian; }
};

// Gradients / momentum buffers, same term order as the model.
struct NamGrads {
  std::vector<SubnetGrads> terms;  // subnets first, then interaction nets
  double beta = 0.0;
};

NamModel build_model(Index d, NamConfig config);
NamGrads zero_grads(const NamModel& model);

// All randomness consumed by one example's forward pass, drawn up front so a
// pass can be replayed exactly (finite differences, unbiasedness checks).
struct TermNoise {
  std::vector<LayerNoise> eps;  // one per layer for Bayesian terms, else empty
  Vec hidden_mask;              // empty when input dropout is off
  double term_scale = 1.0;      // feature-dropout factor: 0 or 1/(1-tau); 1 in eval
};

struct ExampleNoise {
  std::vector<TermNoise> terms;
};

ExampleNoise draw_example_noise(const NamModel& model, Mode mode, Rng& rng);

// Per-term forward state kept for the backward pass.
struct TermEval {
  MlpParams sampled;      // realized weights for Bayesian terms
  const MlpParams* used;  // points at `sampled` or at the model's own params
  MlpCache cache;
  double raw;  // subnet output before the dropout scale
};

struct NamEvalRecord {
  std::vector<TermEval> terms;
};

struct NamForwardResult {
  double output;
  Vec parts;  // scaled additive terms; output == parts.sum() + beta
};

// Forward with explicit noise (deterministic given the noise).
NamForwardResult nam_forward_noise(const NamModel& model, const Vec& x,
                                   const ExampleNoise& noise, NamEvalRecord* record = nullptr);

// Forward drawing fresh noise from rng. Eval mode applies no dropout;
// Bayesian subnets still draw one weight sample per call.
NamForwardResult nam_forward(const NamModel& model, const Vec& x, Mode mode, Rng& rng);

// Accumulates gradients for one example into acc (scaled by weight).
void nam_backward_noise(const NamModel& model, const ExampleNoise& noise,
                        const NamEvalRecord& record, double d_output, double weight,
                        NamGrads& acc);

struct LossResult {
  double objective;  // data_loss + kl_weight * kl
  double data_loss;  // mean over the batch
  double kl;         // total KL over all Bayesian layers (unweighted)
  NamGrads grads;
};

// Mean data loss over the batch plus kl_weight * KL. Classification uses the
// logistic loss on the logit; regression uses squared error.
LossResult loss_and_grad(const NamModel& model, const Dataset& batch, Rng& rng,
                         double kl_weight);

// Same, with the batch noise supplied by the caller.
LossResult loss_and_grad_noise(const NamModel& model, const Dataset& batch,
                               const std::vector<ExampleNoise>& noise, double kl_weight);

// One optimizer step over every parameter of the model (beta included).
void sgd_step(NamModel& model, NamGrads& velocity, const NamGrads& grads, const SgdConfig& cfg,
              long step, long total_steps);

struct TrainHistory {
  std::vector<double> loss;    // per-epoch mean objective
  std::vector<double> kl;      // total KL at the end of each epoch (0 when deterministic)
  std::vector<double> metric;  // accuracy (classification) or rmse (regression) on train data
};

// In-place SGD training. Shuffles per epoch, kl_weight = 1 / batches per
// epoch, cosine schedule spans epochs * batches steps. Throws on non-finite
// loss with the epoch/batch/lr in the message.
TrainHistory train(NamModel& model, const Dataset& data, const SgdConfig& cfg, Rng& rng);

// Independently initialized and trained members; member i uses seed base_seed + i
// for both init and its training stream.
std::vector<NamModel> train_ensemble(Index d, const NamConfig& config, int n_models,
                                     const Dataset& data, const SgdConfig& cfg,
                                     std::uint64_t base_seed);

// One concrete realization of the model (weights frozen).
struct NamSample {
  std::vector<MlpParams> subnets;
  std::vector<MlpParams> interaction_nets;
  std::vector<std::pair<int, int>> pairs;
  double beta = 0.0;
};

NamSample draw_sample(const NamModel& model, Rng& rng);
NamSample mean_sample(const NamModel& model);  // posterior means for Bayesian terms

double sample_forward(const NamSample& sample, const Vec& x);
Vec sample_parts(const NamSample& sample, const Vec& x);  // additive terms, unscaled

// Soft-voting predictions. Classification: mean of sigmoid(logit) over
// n_samples posterior draws (a deterministic model uses one pass);
// regression: mean output. Rows of X are examples.
Vec predict(const NamModel& model, const Mat& X, Task task, int n_samples, Rng& rng);

// Ensemble prediction: mean over members, each member averaged over
// n_samples draws when Bayesian.
Vec predict(std::span<const NamModel> models, const Mat& X, Task task, int n_samples, Rng& rng);

}  // namespace bayesnam

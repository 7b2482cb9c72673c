#include "bayesnam/nam.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "bayesnam/metrics.hpp"

namespace bayesnam {

namespace {

std::vector<int> term_layer_sizes(const NamConfig& config, int in_dim) {
  std::vector<int> sizes;
  sizes.reserve(config.hidden_sizes.size() + 2);
  sizes.push_back(in_dim);
  for (int h : config.hidden_sizes) sizes.push_back(h);
  sizes.push_back(1);
  return sizes;
}

SubnetParams init_term(const NamConfig& config, int in_dim, std::uint64_t seed) {
  const std::vector<int> sizes = term_layer_sizes(config, in_dim);
  if (!config.bayesian) return init_mlp(sizes, seed);
  const double s_init = config.s0_init > 0.0 ? config.s0_init : config.s0;
  return init_bayes_mlp(sizes, config.s0, s_init, seed);
}

// Input of term t for one example: the feature itself, or the configured pair.
Vec term_input(const NamModel& model, const Vec& x, Index t) {
  if (t < model.d()) {
    Vec in(1);
    in(0) = x(t);
    return in;
  }
  const auto& pair = model.config.interactions[static_cast<std::size_t>(t - model.d())];
  Vec in(2);
  in(0) = x(pair.first);
  in(1) = x(pair.second);
  return in;
}

const SubnetParams& term_params(const NamModel& model, Index t) {
  return t < model.d() ? model.subnets[static_cast<std::size_t>(t)]
                       : model.interaction_nets[static_cast<std::size_t>(t - model.d())];
}

// Stable logistic loss on the logit z for a {0,1} label, and its z-gradient.
double logistic_loss(double z, double y, double* dz) {
  if (dz) *dz = sigmoid(z) - y;
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

double total_kl(const NamModel& model) {
  if (!model.bayesian()) return 0.0;
  double kl = 0.0;
  for (const SubnetParams& term : model.subnets) kl += kl_gaussian(std::get<BayesMlpParams>(term));
  for (const SubnetParams& term : model.interaction_nets)
    kl += kl_gaussian(std::get<BayesMlpParams>(term));
  return kl;
}

double train_metric(const NamModel& model, const Dataset& data) {
  const NamSample mean = mean_sample(model);
  Vec out(data.n());
  for (Index m = 0; m < data.n(); ++m) {
    const double z = sample_forward(mean, data.X.row(m).transpose());
    out(m) = data.task == Task::Classification ? sigmoid(z) : z;
  }
  return data.task == Task::Classification ? accuracy(out, data.y) : rmse(out, data.y);
}

void shuffle_indices(std::vector<Index>& order, Rng& rng) {
  for (Index i = static_cast<Index>(order.size()) - 1; i > 0; --i) {
    const Index j = static_cast<Index>(rng.uniform() * static_cast<double>(i + 1));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
}

}  // namespace

void validate(const NamConfig& config, Index d) {
  if (d < 1) throw std::invalid_argument("nam: need at least one feature");
  for (int h : config.hidden_sizes)
    if (h <= 0) throw std::invalid_argument("nam: hidden sizes must be positive");
  if (!(config.tau >= 0.0 && config.tau < 1.0))
    throw std::invalid_argument("nam: tau must be in [0, 1)");
  if (!(config.input_dropout >= 0.0 && config.input_dropout < 1.0))
    throw std::invalid_argument("nam: input_dropout must be in [0, 1)");
  if (config.input_dropout > 0.0 && config.hidden_sizes.empty())
    throw std::invalid_argument("nam: input_dropout needs a hidden layer");
  if (config.bayesian) {
    if (!(config.s0 > 0.0)) throw std::invalid_argument("nam: s0 must be positive");
    if (config.s0_init == 0.0)
      throw std::invalid_argument("nam: s0_init must be positive (or negative for the default)");
  }
  for (const auto& pair : config.interactions) {
    if (pair.first == pair.second)
      throw std::invalid_argument("nam: interaction pair must use two distinct features");
    if (pair.first < 0 || pair.second < 0 || pair.first >= d || pair.second >= d)
      throw std::invalid_argument("nam: interaction feature index out of range");
  }
}

NamModel build_model(Index d, NamConfig config) {
  validate(config, d);
  NamModel model;
  model.beta = 0.0;
  model.subnets.reserve(static_cast<std::size_t>(d));
  for (Index i = 0; i < d; ++i)
    model.subnets.push_back(
        init_term(config, 1, Rng::derive(config.seed, static_cast<std::uint64_t>(i))));
  model.interaction_nets.reserve(config.interactions.size());
  for (std::size_t t = 0; t < config.interactions.size(); ++t)
    model.interaction_nets.push_back(
        init_term(config, 2, Rng::derive(config.seed, static_cast<std::uint64_t>(d) + t)));
  model.config = std::move(config);
  return model;
}

NamGrads zero_grads(const NamModel& model) {
  NamGrads g;
  g.terms.reserve(static_cast<std::size_t>(model.n_terms()));
  auto push = [&](const SubnetParams& term) {
    if (std::holds_alternative<MlpParams>(term))
      g.terms.emplace_back(zeros_like(std::get<MlpParams>(term)));
    else
      g.terms.emplace_back(zeros_like(std::get<BayesMlpParams>(term)));
  };
  for (const SubnetParams& term : model.subnets) push(term);
  for (const SubnetParams& term : model.interaction_nets) push(term);
  g.beta = 0.0;
  return g;
}

ExampleNoise draw_example_noise(const NamModel& model, Mode mode, Rng& rng) {
  const NamConfig& cfg = model.config;
  ExampleNoise noise;
  noise.terms.resize(static_cast<std::size_t>(model.n_terms()));
  for (Index t = 0; t < model.n_terms(); ++t) {
    TermNoise& tn = noise.terms[static_cast<std::size_t>(t)];
    const SubnetParams& params = term_params(model, t);
    if (const auto* bayes = std::get_if<BayesMlpParams>(&params)) {
      tn.eps.reserve(bayes->layers.size());
      for (const BayesLinearParams& l : bayes->layers) {
        LayerNoise ln;
        ln.eps_w.resize(l.mu_w.rows(), l.mu_w.cols());
        ln.eps_b.resize(l.mu_b.size());
        for (Index r = 0; r < ln.eps_w.rows(); ++r)
          for (Index c = 0; c < ln.eps_w.cols(); ++c) ln.eps_w(r, c) = rng.normal();
        for (Index r = 0; r < ln.eps_b.size(); ++r) ln.eps_b(r) = rng.normal();
        tn.eps.push_back(std::move(ln));
      }
    }
    if (mode == Mode::Train && cfg.input_dropout > 0.0) {
      const double keep = 1.0 - cfg.input_dropout;
      const Index width = cfg.hidden_sizes.front();
      tn.hidden_mask.resize(width);
      for (Index r = 0; r < width; ++r)
        tn.hidden_mask(r) = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
    }
    if (mode == Mode::Train && cfg.tau > 0.0) {
      const double keep = 1.0 - cfg.tau;
      tn.term_scale = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
    }
  }
  return noise;
}

NamForwardResult nam_forward_noise(const NamModel& model, const Vec& x,
                                   const ExampleNoise& noise, NamEvalRecord* record) {
  if (x.size() != model.d()) throw std::invalid_argument("nam_forward: input size mismatch");
  if (noise.terms.size() != static_cast<std::size_t>(model.n_terms()))
    throw std::invalid_argument("nam_forward: noise term count mismatch");

  NamForwardResult result;
  result.parts.resize(model.n_terms());
  if (record) record->terms.resize(static_cast<std::size_t>(model.n_terms()));
  double sum = 0.0;
  for (Index t = 0; t < model.n_terms(); ++t) {
    const TermNoise& tn = noise.terms[static_cast<std::size_t>(t)];
    const SubnetParams& params = term_params(model, t);
    TermEval local;
    TermEval& eval = record ? record->terms[static_cast<std::size_t>(t)] : local;
    if (const auto* bayes = std::get_if<BayesMlpParams>(&params)) {
      eval.sampled = bayes_realize_mlp(*bayes, tn.eps);
      eval.used = &eval.sampled;
    } else {
      eval.used = &std::get<MlpParams>(params);
    }
    const Vec in = term_input(model, x, t);
    const Vec* mask = tn.hidden_mask.size() > 0 ? &tn.hidden_mask : nullptr;
    const Vec out = mlp_forward(*eval.used, in, record ? &eval.cache : nullptr, mask);
    eval.raw = out(0);
    result.parts(t) = tn.term_scale * eval.raw;
    sum += result.parts(t);
  }
  result.output = sum + model.beta;
  return result;
}

NamForwardResult nam_forward(const NamModel& model, const Vec& x, Mode mode, Rng& rng) {
  const ExampleNoise noise = draw_example_noise(model, mode, rng);
  return nam_forward_noise(model, x, noise, nullptr);
}

void nam_backward_noise(const NamModel& model, const ExampleNoise& noise,
                        const NamEvalRecord& record, double d_output, double weight,
                        NamGrads& acc) {
  if (record.terms.size() != static_cast<std::size_t>(model.n_terms()) ||
      noise.terms.size() != record.terms.size() ||
      acc.terms.size() != record.terms.size())
    throw std::invalid_argument("nam_backward: term count mismatch");

  for (Index t = 0; t < model.n_terms(); ++t) {
    const TermNoise& tn = noise.terms[static_cast<std::size_t>(t)];
    const double d_raw = weight * d_output * tn.term_scale;
    if (d_raw == 0.0) continue;  // dropped term: no gradient
    const TermEval& eval = record.terms[static_cast<std::size_t>(t)];
    Vec grad_out(1);
    grad_out(0) = d_raw;
    const MlpGrads g = mlp_backward(*eval.used, eval.cache, grad_out);
    const SubnetParams& params = term_params(model, t);
    SubnetGrads& dst = acc.terms[static_cast<std::size_t>(t)];
    if (const auto* bayes = std::get_if<BayesMlpParams>(&params)) {
      auto& bg = std::get<BayesMlpGrads>(dst);
      for (std::size_t l = 0; l < bayes->layers.size(); ++l)
        accumulate_sample_grads(bayes->layers[l], g.layers[l], tn.eps[l], bg.mu.layers[l],
                                bg.rho.layers[l]);
    } else {
      axpy(std::get<MlpGrads>(dst), g, 1.0);
    }
  }
  acc.beta += weight * d_output;
}

LossResult loss_and_grad_noise(const NamModel& model, const Dataset& batch,
                               const std::vector<ExampleNoise>& noise, double kl_weight) {
  if (batch.n() < 1) throw std::invalid_argument("loss_and_grad: empty batch");
  if (noise.size() != static_cast<std::size_t>(batch.n()))
    throw std::invalid_argument("loss_and_grad: noise count mismatch");

  LossResult result;
  result.grads = zero_grads(model);
  const double inv_n = 1.0 / static_cast<double>(batch.n());
  double data_loss = 0.0;
  for (Index m = 0; m < batch.n(); ++m) {
    NamEvalRecord record;
    const Vec x = batch.X.row(m).transpose();
    const NamForwardResult fwd =
        nam_forward_noise(model, x, noise[static_cast<std::size_t>(m)], &record);
    double dz = 0.0;
    if (batch.task == Task::Classification) {
      data_loss += logistic_loss(fwd.output, batch.y(m), &dz);
    } else {
      const double r = fwd.output - batch.y(m);
      data_loss += r * r;
      dz = 2.0 * r;
    }
    nam_backward_noise(model, noise[static_cast<std::size_t>(m)], record, dz, inv_n,
                       result.grads);
  }
  result.data_loss = data_loss * inv_n;
  result.kl = total_kl(model);
  result.objective = result.data_loss + kl_weight * result.kl;
  if (model.bayesian() && kl_weight != 0.0) {
    Index t = 0;
    auto add_kl = [&](const SubnetParams& term) {
      if (const auto* bayes = std::get_if<BayesMlpParams>(&term)) {
        auto& bg = std::get<BayesMlpGrads>(result.grads.terms[static_cast<std::size_t>(t)]);
        for (std::size_t l = 0; l < bayes->layers.size(); ++l)
          add_kl_grads(bayes->layers[l], kl_weight, bg.mu.layers[l], bg.rho.layers[l]);
      }
      ++t;
    };
    for (const SubnetParams& term : model.subnets) add_kl(term);
    for (const SubnetParams& term : model.interaction_nets) add_kl(term);
  }
  return result;
}

LossResult loss_and_grad(const NamModel& model, const Dataset& batch, Rng& rng,
                         double kl_weight) {
  std::vector<ExampleNoise> noise;
  noise.reserve(static_cast<std::size_t>(batch.n()));
  for (Index m = 0; m < batch.n(); ++m)
    noise.push_back(draw_example_noise(model, Mode::Train, rng));
  return loss_and_grad_noise(model, batch, noise, kl_weight);
}

void sgd_step(NamModel& model, NamGrads& velocity, const NamGrads& grads, const SgdConfig& cfg,
              long step, long total_steps) {
  if (velocity.terms.size() != grads.terms.size() ||
      grads.terms.size() != static_cast<std::size_t>(model.n_terms()))
    throw std::invalid_argument("sgd_step: term count mismatch");
  const double lr = lr_at(cfg, step, total_steps);
  for (Index t = 0; t < model.n_terms(); ++t) {
    SubnetParams& params = t < model.d()
                               ? model.subnets[static_cast<std::size_t>(t)]
                               : model.interaction_nets[static_cast<std::size_t>(t - model.d())];
    SubnetGrads& vel = velocity.terms[static_cast<std::size_t>(t)];
    const SubnetGrads& g = grads.terms[static_cast<std::size_t>(t)];
    if (auto* det = std::get_if<MlpParams>(&params)) {
      sgd_step(*det, std::get<MlpGrads>(vel), std::get<MlpGrads>(g), cfg, step, total_steps);
    } else {
      sgd_step(std::get<BayesMlpParams>(params), std::get<BayesMlpGrads>(vel),
               std::get<BayesMlpGrads>(g), cfg, step, total_steps);
    }
  }
  double beta_grad = grads.beta + cfg.weight_decay * model.beta;
  velocity.beta = cfg.momentum * velocity.beta + beta_grad;
  model.beta -= lr * velocity.beta;
}

TrainHistory train(NamModel& model, const Dataset& data, const SgdConfig& cfg, Rng& rng) {
  validate(data);
  validate(cfg);
  validate(model.config, data.d());
  if (data.d() != model.d()) throw std::invalid_argument("train: feature count mismatch");
  if (cfg.batch_size > data.n())
    throw std::invalid_argument("train: batch_size exceeds dataset size");

  const Index n = data.n();
  const long num_batches = (n + cfg.batch_size - 1) / cfg.batch_size;
  const long total_steps = num_batches * cfg.epochs;
  const double kl_weight = model.bayesian() ? 1.0 / static_cast<double>(num_batches) : 0.0;

  NamGrads velocity = zero_grads(model);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});

  TrainHistory history;
  long step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_indices(order, rng);
    double epoch_objective = 0.0;
    for (long b = 0; b < num_batches; ++b) {
      const Index lo = static_cast<Index>(b) * cfg.batch_size;
      const Index hi = std::min<Index>(n, lo + cfg.batch_size);
      std::vector<Index> rows(order.begin() + lo, order.begin() + hi);
      const Dataset batch = take_rows(data, rows);
      const LossResult res = loss_and_grad(model, batch, rng, kl_weight);
      if (!std::isfinite(res.objective))
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                 " batch " + std::to_string(b) + " lr " +
                                 std::to_string(lr_at(cfg, step, total_steps)));
      sgd_step(model, velocity, res.grads, cfg, step, total_steps);
      ++step;
      epoch_objective += res.objective;
    }
    history.loss.push_back(epoch_objective / static_cast<double>(num_batches));
    history.kl.push_back(total_kl(model));
    history.metric.push_back(train_metric(model, data));
  }
  return history;
}

std::vector<NamModel> train_ensemble(Index d, const NamConfig& config, int n_models,
                                     const Dataset& data, const SgdConfig& cfg,
                                     std::uint64_t base_seed) {
  if (n_models < 1) throw std::invalid_argument("train_ensemble: n_models must be >= 1");
  std::vector<NamModel> models;
  models.reserve(static_cast<std::size_t>(n_models));
  for (int i = 0; i < n_models; ++i) {
    NamConfig member = config;
    member.seed = base_seed + static_cast<std::uint64_t>(i);
    NamModel model = build_model(d, member);
    Rng rng(Rng::derive(base_seed + static_cast<std::uint64_t>(i), 0x7261696e));
    train(model, data, cfg, rng);
    models.push_back(std::move(model));
  }
  return models;
}

NamSample draw_sample(const NamModel& model, Rng& rng) {
  NamSample sample;
  sample.beta = model.beta;
  sample.pairs = model.config.interactions;
  auto realize = [&](const SubnetParams& term) {
    if (const auto* bayes = std::get_if<BayesMlpParams>(&term))
      return bayes_sample_mlp(*bayes, rng, nullptr);
    return std::get<MlpParams>(term);
  };
  sample.subnets.reserve(model.subnets.size());
  for (const SubnetParams& term : model.subnets) sample.subnets.push_back(realize(term));
  sample.interaction_nets.reserve(model.interaction_nets.size());
  for (const SubnetParams& term : model.interaction_nets)
    sample.interaction_nets.push_back(realize(term));
  return sample;
}

NamSample mean_sample(const NamModel& model) {
  NamSample sample;
  sample.beta = model.beta;
  sample.pairs = model.config.interactions;
  auto mean = [&](const SubnetParams& term) {
    if (const auto* bayes = std::get_if<BayesMlpParams>(&term)) return bayes_mean_mlp(*bayes);
    return std::get<MlpParams>(term);
  };
  sample.subnets.reserve(model.subnets.size());
  for (const SubnetParams& term : model.subnets) sample.subnets.push_back(mean(term));
  sample.interaction_nets.reserve(model.interaction_nets.size());
  for (const SubnetParams& term : model.interaction_nets)
    sample.interaction_nets.push_back(mean(term));
  return sample;
}

Vec sample_parts(const NamSample& sample, const Vec& x) {
  if (x.size() != static_cast<Index>(sample.subnets.size()))
    throw std::invalid_argument("sample_parts: input size mismatch");
  Vec parts(static_cast<Index>(sample.subnets.size() + sample.interaction_nets.size()));
  Vec in1(1);
  for (std::size_t i = 0; i < sample.subnets.size(); ++i) {
    in1(0) = x(static_cast<Index>(i));
    parts(static_cast<Index>(i)) = mlp_forward(sample.subnets[i], in1)(0);
  }
  Vec in2(2);
  for (std::size_t t = 0; t < sample.interaction_nets.size(); ++t) {
    in2(0) = x(sample.pairs[t].first);
    in2(1) = x(sample.pairs[t].second);
    parts(static_cast<Index>(sample.subnets.size() + t)) =
        mlp_forward(sample.interaction_nets[t], in2)(0);
  }
  return parts;
}

double sample_forward(const NamSample& sample, const Vec& x) {
  return sample_parts(sample, x).sum() + sample.beta;
}

namespace {

// Mean score over a set of frozen samples.
Vec predict_over_samples(const std::vector<NamSample>& samples, const Mat& X, Task task) {
  Vec out = Vec::Zero(X.rows());
  for (const NamSample& s : samples) {
    for (Index m = 0; m < X.rows(); ++m) {
      const double z = sample_forward(s, X.row(m).transpose());
      out(m) += task == Task::Classification ? sigmoid(z) : z;
    }
  }
  return out / static_cast<double>(samples.size());
}

}  // namespace

Vec predict(const NamModel& model, const Mat& X, Task task, int n_samples, Rng& rng) {
  if (n_samples < 1) throw std::invalid_argument("predict: n_samples must be >= 1");
  const int count = model.bayesian() ? n_samples : 1;
  std::vector<NamSample> samples;
  samples.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) samples.push_back(draw_sample(model, rng));
  return predict_over_samples(samples, X, task);
}

Vec predict(std::span<const NamModel> models, const Mat& X, Task task, int n_samples,
            Rng& rng) {
  if (models.empty()) throw std::invalid_argument("predict: empty ensemble");
  Vec out = Vec::Zero(X.rows());
  for (const NamModel& model : models) out += predict(model, X, task, n_samples, rng);
  return out / static_cast<double>(models.size());
}

}  // namespace bayesnam

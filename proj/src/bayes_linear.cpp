#include "bayesnam/bayes_linear.hpp"

#include <cmath>
#include <stdexcept>

namespace bayesnam {

namespace {

void check_prior(double s0, const char* where) {
  if (!(s0 > 0.0)) throw std::invalid_argument(std::string(where) + ": prior std must be positive");
}

// Keeps 1/s and log(s0/s) finite for extremely negative rho.
inline double spread(double rho) {
  const double s = softplus(rho);
  return s > 1e-300 ? s : 1e-300;
}

}  // namespace

BayesMlpParams init_bayes_mlp(const std::vector<int>& layer_sizes, double s0_prior,
                              double s_init, std::uint64_t seed) {
  check_prior(s0_prior, "init_bayes_mlp");
  if (!(s_init > 0.0))
    throw std::invalid_argument("init_bayes_mlp: initial spread must be positive");
  MlpParams mean = init_mlp(layer_sizes, seed);
  const double rho0 = softplus_inv(s_init);
  BayesMlpParams p;
  p.layers.reserve(mean.layers.size());
  for (DenseLayer& l : mean.layers) {
    BayesLinearParams bl;
    bl.rho_w = Mat::Constant(l.W.rows(), l.W.cols(), rho0);
    bl.rho_b = Vec::Constant(l.b.size(), rho0);
    bl.mu_w = std::move(l.W);
    bl.mu_b = std::move(l.b);
    bl.s0 = s0_prior;
    p.layers.push_back(std::move(bl));
  }
  return p;
}

DenseLayer bayes_sample(const BayesLinearParams& p, Rng& rng, LayerNoise* noise) {
  check_prior(p.s0, "bayes_sample");
  const Index R = p.mu_w.rows(), C = p.mu_w.cols();
  LayerNoise local;
  local.eps_w.resize(R, C);
  local.eps_b.resize(p.mu_b.size());
  for (Index r = 0; r < R; ++r)
    for (Index c = 0; c < C; ++c) local.eps_w(r, c) = rng.normal();
  for (Index r = 0; r < local.eps_b.size(); ++r) local.eps_b(r) = rng.normal();
  DenseLayer out = bayes_realize(p, local);
  if (noise) *noise = std::move(local);
  return out;
}

DenseLayer bayes_realize(const BayesLinearParams& p, const LayerNoise& noise) {
  if (noise.eps_w.rows() != p.mu_w.rows() || noise.eps_w.cols() != p.mu_w.cols() ||
      noise.eps_b.size() != p.mu_b.size())
    throw std::invalid_argument("bayes_realize: noise shape mismatch");
  DenseLayer out;
  out.W = p.mu_w + p.rho_w.unaryExpr([](double r) { return softplus(r); }).cwiseProduct(noise.eps_w);
  out.b = p.mu_b + p.rho_b.unaryExpr([](double r) { return softplus(r); }).cwiseProduct(noise.eps_b);
  return out;
}

MlpParams bayes_sample_mlp(const BayesMlpParams& p, Rng& rng, std::vector<LayerNoise>* noise) {
  MlpParams out;
  out.layers.reserve(p.layers.size());
  if (noise) {
    noise->clear();
    noise->reserve(p.layers.size());
  }
  for (const BayesLinearParams& l : p.layers) {
    LayerNoise n;
    out.layers.push_back(bayes_sample(l, rng, &n));
    if (noise) noise->push_back(std::move(n));
  }
  return out;
}

MlpParams bayes_realize_mlp(const BayesMlpParams& p, const std::vector<LayerNoise>& noise) {
  if (noise.size() != p.layers.size())
    throw std::invalid_argument("bayes_realize_mlp: noise count mismatch");
  MlpParams out;
  out.layers.reserve(p.layers.size());
  for (std::size_t t = 0; t < p.layers.size(); ++t)
    out.layers.push_back(bayes_realize(p.layers[t], noise[t]));
  return out;
}

MlpParams bayes_mean_mlp(const BayesMlpParams& p) {
  MlpParams out;
  out.layers.reserve(p.layers.size());
  for (const BayesLinearParams& l : p.layers) out.layers.push_back({l.mu_w, l.mu_b});
  return out;
}

double kl_gaussian(const BayesLinearParams& p) {
  check_prior(p.s0, "kl_gaussian");
  const double s0 = p.s0;
  const double inv2s02 = 1.0 / (2.0 * s0 * s0);
  auto element = [&](double mu, double rho) {
    const double s = spread(rho);
    return std::log(s0 / s) + (s * s + mu * mu) * inv2s02 - 0.5;
  };
  double total = 0.0;
  for (Index r = 0; r < p.mu_w.rows(); ++r)
    for (Index c = 0; c < p.mu_w.cols(); ++c) total += element(p.mu_w(r, c), p.rho_w(r, c));
  for (Index r = 0; r < p.mu_b.size(); ++r) total += element(p.mu_b(r), p.rho_b(r));
  return total;
}

double kl_gaussian(const BayesMlpParams& p) {
  double total = 0.0;
  for (const BayesLinearParams& l : p.layers) total += kl_gaussian(l);
  return total;
}

void accumulate_sample_grads(const BayesLinearParams& p, const DenseLayer& w_grad,
                             const LayerNoise& noise, DenseLayer& mu_grad,
                             DenseLayer& rho_grad) {
  auto gate = [](double rho) { return sigmoid(rho); };
  mu_grad.W += w_grad.W;
  mu_grad.b += w_grad.b;
  rho_grad.W += w_grad.W.cwiseProduct(noise.eps_w).cwiseProduct(p.rho_w.unaryExpr(gate));
  rho_grad.b += w_grad.b.cwiseProduct(noise.eps_b).cwiseProduct(p.rho_b.unaryExpr(gate));
}

void add_kl_grads(const BayesLinearParams& p, double weight, DenseLayer& mu_grad,
                  DenseLayer& rho_grad) {
  check_prior(p.s0, "add_kl_grads");
  const double inv_s02 = 1.0 / (p.s0 * p.s0);
  // dKL/dmu = mu / s0^2; dKL/ds = s / s0^2 - 1/s; ds/drho = sigmoid(rho).
  auto rho_term = [&](double rho) {
    const double s = spread(rho);
    return (s * inv_s02 - 1.0 / s) * sigmoid(rho);
  };
  mu_grad.W += weight * inv_s02 * p.mu_w;
  mu_grad.b += weight * inv_s02 * p.mu_b;
  rho_grad.W += weight * p.rho_w.unaryExpr(rho_term);
  rho_grad.b += weight * p.rho_b.unaryExpr(rho_term);
}

BayesMlpGrads zeros_like(const BayesMlpParams& p) {
  BayesMlpGrads g;
  g.mu.layers.reserve(p.layers.size());
  g.rho.layers.reserve(p.layers.size());
  for (const BayesLinearParams& l : p.layers) {
    g.mu.layers.push_back({Mat::Zero(l.mu_w.rows(), l.mu_w.cols()), Vec::Zero(l.mu_b.size())});
    g.rho.layers.push_back({Mat::Zero(l.rho_w.rows(), l.rho_w.cols()), Vec::Zero(l.rho_b.size())});
  }
  return g;
}

}  // namespace bayesnam

#include "bayesnam/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "bayesnam/rng.hpp"

namespace bayesnam {

MlpParams init_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed) {
  if (layer_sizes.size() < 2)
    throw std::invalid_argument("init_mlp: need at least two layer sizes");
  for (int s : layer_sizes)
    if (s <= 0) throw std::invalid_argument("init_mlp: layer sizes must be positive");

  Rng rng(seed);
  MlpParams p;
  p.layers.reserve(layer_sizes.size() - 1);
  for (std::size_t t = 0; t + 1 < layer_sizes.size(); ++t) {
    const Index in = layer_sizes[t];
    const Index out = layer_sizes[t + 1];
    DenseLayer layer;
    layer.W.resize(out, in);
    const double bound = std::sqrt(1.0 / static_cast<double>(in));
    for (Index r = 0; r < out; ++r)
      for (Index c = 0; c < in; ++c)
        layer.W(r, c) = (2.0 * rng.uniform() - 1.0) * bound;
    layer.b = Vec::Zero(out);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

Vec mlp_forward(const MlpParams& params, const Vec& x, MlpCache* cache,
                const Vec* first_hidden_mask) {
  if (params.layers.empty()) throw std::invalid_argument("mlp_forward: empty network");
  if (x.size() != params.layers.front().W.cols())
    throw std::invalid_argument("mlp_forward: input size mismatch");
  const std::size_t L = params.layers.size();
  if (first_hidden_mask && L < 2)
    throw std::invalid_argument("mlp_forward: mask given but network has no hidden layer");

  if (cache) {
    cache->input = x;
    cache->pre.clear();
    cache->post.clear();
    cache->pre.reserve(L);
    cache->post.reserve(L);
    cache->hidden_mask = first_hidden_mask ? *first_hidden_mask : Vec();
  }

  Vec a = x;
  for (std::size_t t = 0; t < L; ++t) {
    const DenseLayer& layer = params.layers[t];
    if (a.size() != layer.W.cols())
      throw std::invalid_argument("mlp_forward: layer dimension mismatch");
    Vec z = layer.W * a + layer.b;
    if (cache) cache->pre.push_back(z);
    if (t + 1 < L) {
      a = z.cwiseMax(0.0);
      if (t == 0 && first_hidden_mask) {
        if (first_hidden_mask->size() != a.size())
          throw std::invalid_argument("mlp_forward: mask size mismatch");
        a = a.cwiseProduct(*first_hidden_mask);
      }
    } else {
      a = std::move(z);
    }
    if (cache) cache->post.push_back(a);
  }
  return a;
}

MlpGrads mlp_backward(const MlpParams& params, const MlpCache& cache, const Vec& grad_out) {
  const std::size_t L = params.layers.size();
  if (L == 0) throw std::invalid_argument("mlp_backward: empty network");
  if (cache.pre.size() != L || cache.post.size() != L)
    throw std::invalid_argument("mlp_backward: cache does not match network");
  if (grad_out.size() != params.layers.back().W.rows())
    throw std::invalid_argument("mlp_backward: grad size mismatch");

  MlpGrads grads;
  grads.layers.resize(L);
  Vec d = grad_out;  // gradient w.r.t. post[t]
  for (std::size_t t = L; t-- > 0;) {
    Vec dz;
    if (t + 1 == L) {
      dz = d;
    } else {
      Vec dpost = d;
      if (t == 0 && cache.hidden_mask.size() > 0)
        dpost = dpost.cwiseProduct(cache.hidden_mask);
      // ReLU gate; the strict comparison makes the subgradient at 0 exactly 0.
      dz = ((cache.pre[t].array() > 0.0).cast<double>() * dpost.array()).matrix();
    }
    const Vec& a_prev = (t == 0) ? cache.input : cache.post[t - 1];
    grads.layers[t].W = dz * a_prev.transpose();
    grads.layers[t].b = dz;
    if (t > 0) d = params.layers[t].W.transpose() * dz;
  }
  return grads;
}

MlpParams zeros_like(const MlpParams& p) {
  MlpParams z;
  z.layers.reserve(p.layers.size());
  for (const DenseLayer& l : p.layers)
    z.layers.push_back({Mat::Zero(l.W.rows(), l.W.cols()), Vec::Zero(l.b.size())});
  return z;
}

void axpy(MlpParams& acc, const MlpGrads& g, double c) {
  if (acc.layers.size() != g.layers.size())
    throw std::invalid_argument("axpy: layer count mismatch");
  for (std::size_t t = 0; t < acc.layers.size(); ++t) {
    acc.layers[t].W += c * g.layers[t].W;
    acc.layers[t].b += c * g.layers[t].b;
  }
}

}  // namespace bayesnam

#pragma once

#include <cstdint>
#include <vector>

#include "bayesnam/types.hpp"

namespace bayesnam {

struct DenseLayer {
  Mat W;
  Vec b;
};

// Fully connected ReLU network. The last layer is affine (no activation).
struct MlpParams {
  std::vector<DenseLayer> layers;

  Index in_dim() const { return layers.empty() ? 0 : layers.front().W.cols(); }
  Index out_dim() const { return layers.empty() ? 0 : layers.back().W.rows(); }
};

// Gradients (and momentum buffers) share the parameter layout.
using MlpGrads = MlpParams;

struct MlpCache {
  Vec input;
  std::vector<Vec> pre;   // pre-activations z_t
  std::vector<Vec> post;  // layer outputs a_t (masked for layer 0 if a mask was given)
  Vec hidden_mask;        // empty when no mask was applied
};

// Weights uniform on (-sqrt(1/fan_in), sqrt(1/fan_in)), biases zero.
// layer_sizes lists unit counts from input to output, e.g. {1, 10, 1}.
MlpParams init_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed);

// Forward pass. first_hidden_mask, when given, is multiplied into the first
// hidden activation (already scaled by the caller); it must match that
// layer's width. With a single affine layer the mask is rejected.
Vec mlp_forward(const MlpParams& params, const Vec& x, MlpCache* cache = nullptr,
                const Vec* first_hidden_mask = nullptr);

// Backward pass for the cached forward. ReLU uses subgradient 0 at 0.
MlpGrads mlp_backward(const MlpParams& params, const MlpCache& cache, const Vec& grad_out);

MlpParams zeros_like(const MlpParams& p);

// acc += c * g, layer by layer.
void axpy(MlpParams& acc, const MlpGrads& g, double c);

}  // namespace bayesnam

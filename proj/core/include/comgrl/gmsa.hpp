#pragma once

#include <random>
#include <span>
#include <vector>

#include "comgrl/tensor.hpp"

namespace comgrl {

enum class AttentionMode {
  kEfficient,  // linear in N: softmax_feat(Q) (softmax_node(K)^T V)
  kStandard,   // quadratic: softmax_row(Q K^T / sqrt(d)) V
};

struct AttentionHead {
  Tensor w_query;  // H x d_head
  Tensor w_key;    // H x d_head
  Tensor w_value;  // H x d_head
};

/// One global self-attention block: heads, output mix, residual, and the
/// pre-norm feed-forward Z + W3(phi(W4 LN(Z))) written in row-vector form.
struct AttentionLayer {
  std::vector<AttentionHead> heads;
  Tensor w_mix;      // H x H
  Tensor w_ffn_in;   // H x H
  Tensor w_ffn_out;  // H x H
  Tensor ln_gamma;   // 1 x H
  Tensor ln_beta;    // 1 x H

  static AttentionLayer init(int hidden_dim, int num_heads, std::mt19937_64& rng);
  std::vector<Tensor> parameters() const;
  int hidden_dim() const { return static_cast<int>(w_mix.rows()); }
};

Tensor standard_attention(const Tensor& z, const AttentionHead& head);
Tensor efficient_attention(const Tensor& z, const AttentionHead& head);

/// Concatenated head outputs projected by w_mix. Exposed so tests can
/// substitute it when checking the residual path.
Tensor attention_heads(const Tensor& z, const AttentionLayer& layer, AttentionMode mode);

/// Residual and feed-forward combination applied to the mixed head output.
Tensor combine_layer_output(const Tensor& z, const Tensor& mixed, const AttentionLayer& layer);

Tensor multi_head_layer(const Tensor& z, const AttentionLayer& layer,
                        AttentionMode mode = AttentionMode::kEfficient);

struct ClassifierHead {
  Tensor weights;  // H x k

  static ClassifierHead init(int hidden_dim, int num_classes, std::mt19937_64& rng);
};

/// Row-softmax class probabilities.
Tensor classify(const Tensor& z, const ClassifierHead& head);

/// Sum over nodes of -log z[i][label_i], log clamped below at log(1e-12).
Tensor cross_entropy_loss(const Tensor& probs, std::span<const int> labels,
                          std::span<const int> nodes);

}  // namespace comgrl

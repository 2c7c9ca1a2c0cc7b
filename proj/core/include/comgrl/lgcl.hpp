#pragma once

#include <random>
#include <vector>

#include "comgrl/graph.hpp"
#include "comgrl/tensor.hpp"

namespace comgrl {

/// Train-mode switch threaded through every forward pass.
struct ForwardMode {
  bool training = false;
  double dropout = 0.0;
  std::mt19937_64* rng = nullptr;  // required when training with dropout > 0
};

/// Two-layer MLP without biases: X' = s(s(X W1) W2) with leaky ReLU s.
struct LocalEncoder {
  Tensor w1;  // D x H
  Tensor w2;  // H x H

  static LocalEncoder init(int input_dim, int hidden_dim, std::mt19937_64& rng);
  std::vector<Tensor> parameters() const { return {w1, w2}; }
  int hidden_dim() const { return static_cast<int>(w2.cols()); }
};

/// Encodes node features. Dropout follows each activation in train mode.
Tensor encode(const Tensor& features, const LocalEncoder& encoder, const ForwardMode& mode);

enum class ContrastiveForm {
  kRatio,  // -(1/N) sum_i sum_j s_ij softmax_j(sim_i / tau)
  kLog,    // -(1/N) sum_i log(sum_j s_ij softmax_j(sim_i / tau)), rows with s_i = 0 skipped
};

/**
 * Neighbourhood-weighted contrastive loss over cosine similarities.
 *
 * The softmax denominator runs over all nodes including i itself. Zero
 * embedding rows get cosine 0 against everything; a warning is logged the
 * first time that happens in the process.
 */
Tensor contrastive_loss(const Tensor& embedding, const Matrix& coefficients, double tau,
                        ContrastiveForm form = ContrastiveForm::kRatio);

}  // namespace comgrl

#pragma once

#include <optional>
#include <random>
#include <vector>

#include "comgrl/gmsa.hpp"
#include "comgrl/lgcl.hpp"

namespace comgrl {

struct ModelOptions {
  int input_dim = 0;
  int num_classes = 0;
  int hidden_dim = 128;
  int num_heads = 8;
  int num_layers = 2;
  double dropout = 0.0;
  AttentionMode attention_mode = AttentionMode::kEfficient;
  /// false: a single linear projection replaces the MLP encoder.
  bool local_encoder = true;
  /// false: the classifier reads the encoder output directly.
  bool global_attention = true;
};

/// Local MLP encoder, stacked global attention layers and a linear
/// classifier, in that order.
class ComGrlModel {
 public:
  ComGrlModel(ModelOptions options, std::mt19937_64& init_rng);

  struct Output {
    Tensor embedding;  // encoder output, the input of the contrastive loss
    Tensor probs;      // N x k class probabilities
  };

  Output forward(const Tensor& features, const ForwardMode& mode) const;

  /// Eval-mode class probabilities, detached from the graph.
  Matrix predict(const Matrix& features) const;

  std::vector<Tensor> parameters() const;
  const ModelOptions& options() const { return options_; }

 private:
  ModelOptions options_;
  std::optional<LocalEncoder> encoder_;
  std::optional<Tensor> projection_;
  std::vector<AttentionLayer> layers_;
  ClassifierHead head_;
};

}  // namespace comgrl

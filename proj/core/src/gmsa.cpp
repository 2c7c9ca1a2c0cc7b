#include "comgrl/gmsa.hpp"

#include <cmath>

#include "comgrl/init.hpp"
#include "comgrl/ops.hpp"

namespace comgrl {

AttentionLayer AttentionLayer::init(int hidden_dim, int num_heads, std::mt19937_64& rng) {
  if (num_heads <= 0 || hidden_dim % num_heads != 0) {
    throw std::invalid_argument("AttentionLayer: hidden width " + std::to_string(hidden_dim) +
                                " is not divisible by " + std::to_string(num_heads) + " heads");
  }
  const int head_dim = hidden_dim / num_heads;
  AttentionLayer layer;
  for (int h = 0; h < num_heads; ++h) {
    AttentionHead head;
    head.w_query = Tensor::parameter(uniform_fan_in(hidden_dim, head_dim, rng));
    head.w_key = Tensor::parameter(uniform_fan_in(hidden_dim, head_dim, rng));
    head.w_value = Tensor::parameter(uniform_fan_in(hidden_dim, head_dim, rng));
    layer.heads.push_back(std::move(head));
  }
  layer.w_mix = Tensor::parameter(uniform_fan_in(hidden_dim, hidden_dim, rng));
  layer.w_ffn_in = Tensor::parameter(uniform_fan_in(hidden_dim, hidden_dim, rng));
  layer.w_ffn_out = Tensor::parameter(uniform_fan_in(hidden_dim, hidden_dim, rng));
  layer.ln_gamma = Tensor::parameter(Matrix::Ones(1, hidden_dim));
  layer.ln_beta = Tensor::parameter(Matrix::Zero(1, hidden_dim));
  return layer;
}

std::vector<Tensor> AttentionLayer::parameters() const {
  std::vector<Tensor> out;
  for (const auto& h : heads) {
    out.push_back(h.w_query);
    out.push_back(h.w_key);
    out.push_back(h.w_value);
  }
  out.insert(out.end(), {w_mix, w_ffn_in, w_ffn_out, ln_gamma, ln_beta});
  return out;
}

Tensor standard_attention(const Tensor& z, const AttentionHead& head) {
  Tensor q = matmul(z, head.w_query);
  Tensor k = matmul(z, head.w_key);
  Tensor v = matmul(z, head.w_value);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  return matmul(row_softmax(scale(matmul(q, transpose(k)), inv_sqrt_d)), v);
}

Tensor efficient_attention(const Tensor& z, const AttentionHead& head) {
  Tensor q = row_softmax(matmul(z, head.w_query));
  Tensor k = col_softmax(matmul(z, head.w_key));
  Tensor context = matmul(transpose(k), matmul(z, head.w_value));  // d_head x d_head
  return matmul(q, context);
}

Tensor attention_heads(const Tensor& z, const AttentionLayer& layer, AttentionMode mode) {
  std::vector<Tensor> outputs;
  outputs.reserve(layer.heads.size());
  for (const auto& head : layer.heads) {
    outputs.push_back(mode == AttentionMode::kEfficient ? efficient_attention(z, head)
                                                        : standard_attention(z, head));
  }
  return matmul(hconcat(outputs), layer.w_mix);
}

Tensor combine_layer_output(const Tensor& z, const Tensor& mixed, const AttentionLayer& layer) {
  Tensor residual = add(mixed, z);
  Tensor normed = layer_norm(residual, layer.ln_gamma, layer.ln_beta);
  Tensor ffn = matmul(relu(matmul(normed, layer.w_ffn_in)), layer.w_ffn_out);
  return add(ffn, residual);
}

Tensor multi_head_layer(const Tensor& z, const AttentionLayer& layer, AttentionMode mode) {
  if (z.cols() != layer.hidden_dim()) {
    throw ShapeError("multi_head_layer: input " + shape_string(z.value()) +
                     " does not match hidden width " + std::to_string(layer.hidden_dim()));
  }
  return combine_layer_output(z, attention_heads(z, layer, mode), layer);
}

ClassifierHead ClassifierHead::init(int hidden_dim, int num_classes, std::mt19937_64& rng) {
  return {Tensor::parameter(uniform_fan_in(hidden_dim, num_classes, rng))};
}

Tensor classify(const Tensor& z, const ClassifierHead& head) {
  return row_softmax(matmul(z, head.weights));
}

Tensor cross_entropy_loss(const Tensor& probs, std::span<const int> labels,
                          std::span<const int> nodes) {
  return cross_entropy(probs, labels, nodes);
}

}  // namespace comgrl

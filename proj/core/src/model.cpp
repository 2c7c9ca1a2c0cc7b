#include "comgrl/model.hpp"

#include "comgrl/init.hpp"
#include "comgrl/ops.hpp"

namespace comgrl {

ComGrlModel::ComGrlModel(ModelOptions options, std::mt19937_64& init_rng)
    : options_(options) {
  if (options_.input_dim <= 0 || options_.num_classes <= 0) {
    throw std::invalid_argument("ComGrlModel: input_dim and num_classes must be positive");
  }
  if (options_.local_encoder) {
    encoder_ = LocalEncoder::init(options_.input_dim, options_.hidden_dim, init_rng);
  } else {
    projection_ = Tensor::parameter(uniform_fan_in(options_.input_dim, options_.hidden_dim, init_rng));
  }
  if (options_.global_attention) {
    for (int l = 0; l < options_.num_layers; ++l) {
      layers_.push_back(AttentionLayer::init(options_.hidden_dim, options_.num_heads, init_rng));
    }
  }
  head_ = ClassifierHead::init(options_.hidden_dim, options_.num_classes, init_rng);
}

ComGrlModel::Output ComGrlModel::forward(const Tensor& features, const ForwardMode& mode) const {
  Output out;
  if (encoder_) {
    ForwardMode encoder_mode = mode;
    encoder_mode.dropout = options_.dropout;
    out.embedding = encode(features, *encoder_, encoder_mode);
  } else {
    out.embedding = matmul(features, *projection_);
    if (mode.training && options_.dropout > 0.0) {
      out.embedding = dropout(out.embedding, options_.dropout, true, *mode.rng);
    }
  }
  Tensor z = out.embedding;
  for (const auto& layer : layers_) z = multi_head_layer(z, layer, options_.attention_mode);
  out.probs = classify(z, head_);
  return out;
}

Matrix ComGrlModel::predict(const Matrix& features) const {
  return forward(Tensor::constant(features), ForwardMode{}).probs.value();
}

std::vector<Tensor> ComGrlModel::parameters() const {
  std::vector<Tensor> out;
  if (encoder_) {
    auto p = encoder_->parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  if (projection_) out.push_back(*projection_);
  for (const auto& layer : layers_) {
    auto p = layer.parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  out.push_back(head_.weights);
  return out;
}

}  // namespace comgrl

#include "comgrl/lgcl.hpp"

#include <spdlog/spdlog.h>

#include <atomic>

#include "comgrl/init.hpp"
#include "comgrl/ops.hpp"

namespace comgrl {

LocalEncoder LocalEncoder::init(int input_dim, int hidden_dim, std::mt19937_64& rng) {
  LocalEncoder enc;
  enc.w1 = Tensor::parameter(uniform_fan_in(input_dim, hidden_dim, rng));
  enc.w2 = Tensor::parameter(uniform_fan_in(hidden_dim, hidden_dim, rng));
  return enc;
}

Tensor encode(const Tensor& features, const LocalEncoder& encoder, const ForwardMode& mode) {
  if (features.cols() != encoder.w1.rows()) {
    throw ShapeError("encode: features " + shape_string(features.value()) +
                     " do not match encoder input width " + std::to_string(encoder.w1.rows()));
  }
  auto drop = [&](const Tensor& t) {
    if (!mode.training || mode.dropout == 0.0) return t;
    if (mode.rng == nullptr) throw std::invalid_argument("encode: dropout requires an rng");
    return dropout(t, mode.dropout, true, *mode.rng);
  };
  Tensor hidden = drop(leaky_relu(matmul(features, encoder.w1)));
  return drop(leaky_relu(matmul(hidden, encoder.w2)));
}

Tensor contrastive_loss(const Tensor& embedding, const Matrix& coefficients, double tau,
                        ContrastiveForm form) {
  if (!(tau > 0.0)) throw std::invalid_argument("contrastive_loss: tau must be positive");
  const Index n = embedding.rows();
  if (coefficients.rows() != n || coefficients.cols() != n) {
    throw ShapeError("contrastive_loss: coefficients " + shape_string(coefficients) +
                     " for embedding " + shape_string(embedding.value()));
  }

  static std::atomic<bool> warned{false};
  if ((embedding.value().rowwise().squaredNorm().array() == 0.0).any() &&
      !warned.exchange(true)) {
    spdlog::warn("contrastive_loss: zero-norm embedding rows; their similarities are set to 0");
  }

  Tensor similarity = cosine_similarity(embedding, embedding);
  Tensor weights = row_softmax(scale(similarity, 1.0 / tau));
  Tensor per_node = row_sum(hadamard(Tensor::constant(coefficients), weights));
  if (form == ContrastiveForm::kRatio) {
    return scale(sum(per_node), -1.0 / static_cast<double>(n));
  }
  Matrix support = (coefficients.rowwise().sum().array() > 0.0).cast<double>().matrix();
  Tensor logs = hadamard(log_clamped(per_node), Tensor::constant(std::move(support)));
  return scale(sum(logs), -1.0 / static_cast<double>(n));
}

}  // namespace comgrl

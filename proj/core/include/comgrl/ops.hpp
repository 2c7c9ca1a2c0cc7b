#pragma once

#include <random>
#include <span>

#include "comgrl/tensor.hpp"

namespace comgrl {

inline constexpr double kLeakySlope = 0.01;
inline constexpr double kLayerNormEps = 1e-5;
inline constexpr double kLogClamp = 1e-12;

// Linear algebra.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor hconcat(std::span<const Tensor> parts);

// Normalizations.
Tensor row_softmax(const Tensor& a);
Tensor col_softmax(const Tensor& a);
/// Row-wise layer norm; gamma and beta are 1xC.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps = kLayerNormEps);
/// Scales each row to unit L2 norm. All-zero rows map to zero rows.
Tensor row_l2_normalize(const Tensor& a);

// Activations.
Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope = kLeakySlope);

/// Inverted dropout. Identity when !training or rate == 0.
Tensor dropout(const Tensor& a, double rate, bool training, std::mt19937_64& rng);

/// Matrix of cosine similarities between rows of a and rows of b.
/// Pairs involving a zero row score 0.
Tensor cosine_similarity(const Tensor& a, const Tensor& b);

// Reductions.
Tensor sum(const Tensor& a);
Tensor row_sum(const Tensor& a);
/// Elementwise log(max(x, kLogClamp)); gradient is zero where clamped.
Tensor log_clamped(const Tensor& a);

/// -sum_{i in nodes} log(max(probs[i][labels[i]], kLogClamp)).
Tensor cross_entropy(const Tensor& probs, std::span<const int> labels,
                     std::span<const int> nodes);

}  // namespace comgrl

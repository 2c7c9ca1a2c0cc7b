#pragma once

#include <cstdint>
#include <vector>

#include "comgrl/tensor.hpp"

namespace comgrl {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Decoupled from the gradient (AdamW style). Zero disables it.
  double weight_decay = 0.0;
};

/// Adaptive-moment optimizer with bias correction.
class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamOptions options);

  /// Applies one update to every parameter that has a gradient. Parameters
  /// without one are skipped and a warning is logged once per parameter.
  void step();
  void zero_grad();

  std::int64_t step_count() const { return step_; }
  const AdamOptions& options() const { return options_; }
  const std::vector<Tensor>& parameters() const { return params_; }

 private:
  std::vector<Tensor> params_;
  std::vector<Matrix> first_moment_;
  std::vector<Matrix> second_moment_;
  std::vector<bool> warned_;
  AdamOptions options_;
  std::int64_t step_ = 0;
};

}  // namespace comgrl

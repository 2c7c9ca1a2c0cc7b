#include "comgrl/adam.hpp"

#include <spdlog/spdlog.h>

#include <cmath>

namespace comgrl {

Adam::Adam(std::vector<Tensor> params, AdamOptions options)
    : params_(std::move(params)), warned_(params_.size(), false), options_(options) {
  if (!(options_.learning_rate > 0.0)) {
    throw std::invalid_argument("Adam: learning rate must be positive");
  }
  for (const auto& p : params_) {
    first_moment_.push_back(Matrix::Zero(p.rows(), p.cols()));
    second_moment_.push_back(Matrix::Zero(p.rows(), p.cols()));
  }
}

void Adam::step() {
  ++step_;
  const double t = static_cast<double>(step_);
  const double correction1 = 1.0 - std::pow(options_.beta1, t);
  const double correction2 = 1.0 - std::pow(options_.beta2, t);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i];
    if (!p.has_grad()) {
      if (!warned_[i]) {
        spdlog::warn("Adam: parameter {} ({}x{}) has no gradient; skipped", i, p.rows(),
                     p.cols());
        warned_[i] = true;
      }
      continue;
    }
    const Matrix& g = p.grad();
    first_moment_[i] = options_.beta1 * first_moment_[i] + (1.0 - options_.beta1) * g;
    second_moment_[i] =
        options_.beta2 * second_moment_[i] + (1.0 - options_.beta2) * g.cwiseAbs2();
    Matrix& w = p.mutable_value();
    if (options_.weight_decay > 0.0) w *= 1.0 - options_.learning_rate * options_.weight_decay;
    w.array() -= options_.learning_rate * (first_moment_[i].array() / correction1) /
                 ((second_moment_[i].array() / correction2).sqrt() + options_.epsilon);
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

}  // namespace comgrl

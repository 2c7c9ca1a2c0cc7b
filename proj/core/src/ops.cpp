#include "comgrl/ops.hpp"

#include <cmath>

namespace comgrl {
namespace {

[[noreturn]] void shape_fail(const char* op, const Matrix& a, const Matrix& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_string(a) +
                   " and " + shape_string(b));
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_fail(op, a.value(), b.value());
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) shape_fail("matmul", a.value(), b.value());
  Matrix out = a.value() * b.value();
  return Tensor::from_op(std::move(out), {a, b}, [](Tensor::Node& self) {
    auto& pa = self.parent(0);
    auto& pb = self.parent(1);
    if (pa.requires_grad) pa.accumulate(*self.grad * pb.value.transpose());
    if (pb.requires_grad) pb.accumulate(pa.value.transpose() * *self.grad);
  });
}

Tensor transpose(const Tensor& a) {
  return Tensor::from_op(a.value().transpose(), {a}, [](Tensor::Node& self) {
    self.parent(0).accumulate(self.grad->transpose());
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  return Tensor::from_op(a.value() + b.value(), {a, b}, [](Tensor::Node& self) {
    self.parent(0).accumulate(*self.grad);
    self.parent(1).accumulate(*self.grad);
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  return Tensor::from_op(a.value() - b.value(), {a, b}, [](Tensor::Node& self) {
    self.parent(0).accumulate(*self.grad);
    self.parent(1).accumulate(-*self.grad);
  });
}

Tensor scale(const Tensor& a, double s) {
  return Tensor::from_op(a.value() * s, {a}, [s](Tensor::Node& self) {
    self.parent(0).accumulate(*self.grad * s);
  });
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape("hadamard", a, b);
  Matrix out = a.value().cwiseProduct(b.value());
  return Tensor::from_op(std::move(out), {a, b}, [](Tensor::Node& self) {
    auto& pa = self.parent(0);
    auto& pb = self.parent(1);
    if (pa.requires_grad) pa.accumulate(self.grad->cwiseProduct(pb.value));
    if (pb.requires_grad) pb.accumulate(self.grad->cwiseProduct(pa.value));
  });
}

Tensor hconcat(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("hconcat: no inputs");
  const Index rows = parts.front().rows();
  Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) shape_fail("hconcat", parts.front().value(), p.value());
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::vector<Index> widths;
  Index offset = 0;
  for (const auto& p : parts) {
    out.middleCols(offset, p.cols()) = p.value();
    widths.push_back(p.cols());
    offset += p.cols();
  }
  return Tensor::from_op(std::move(out), {parts.begin(), parts.end()},
                         [widths = std::move(widths)](Tensor::Node& self) {
                           Index off = 0;
                           for (std::size_t i = 0; i < widths.size(); ++i) {
                             self.parent(i).accumulate(self.grad->middleCols(off, widths[i]));
                             off += widths[i];
                           }
                         });
}

Tensor row_softmax(const Tensor& a) {
  const Eigen::VectorXd max = a.value().rowwise().maxCoeff();
  Matrix out = (a.value().colwise() - max).array().exp();
  const Eigen::VectorXd total = out.rowwise().sum();
  out.array().colwise() /= total.array();
  return Tensor::from_op(std::move(out), {a}, [](Tensor::Node& self) {
    const Matrix& y = self.value;
    const Matrix& g = *self.grad;
    Eigen::VectorXd dot = g.cwiseProduct(y).rowwise().sum();
    self.parent(0).accumulate(y.cwiseProduct(g.colwise() - dot));
  });
}

Tensor col_softmax(const Tensor& a) {
  const Eigen::RowVectorXd max = a.value().colwise().maxCoeff();
  Matrix out = (a.value().rowwise() - max).array().exp();
  const Eigen::RowVectorXd total = out.colwise().sum();
  out.array().rowwise() /= total.array();
  return Tensor::from_op(std::move(out), {a}, [](Tensor::Node& self) {
    const Matrix& y = self.value;
    const Matrix& g = *self.grad;
    Eigen::RowVectorXd dot = g.cwiseProduct(y).colwise().sum();
    self.parent(0).accumulate(y.cwiseProduct(g.rowwise() - dot));
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  const Index c = x.cols();
  if (c == 0) throw ShapeError("layer_norm: rows must be nonempty");
  if (gamma.rows() != 1 || gamma.cols() != c) shape_fail("layer_norm", x.value(), gamma.value());
  if (beta.rows() != 1 || beta.cols() != c) shape_fail("layer_norm", x.value(), beta.value());

  const Eigen::VectorXd mean = x.value().rowwise().mean();
  Matrix xhat = x.value().colwise() - mean;
  const Eigen::VectorXd var = xhat.array().square().rowwise().mean();
  const Eigen::VectorXd inv_std = (var.array() + eps).rsqrt();
  xhat.array().colwise() *= inv_std.array();
  Matrix out = (xhat.array().rowwise() * gamma.value().row(0).array()).rowwise() +
               beta.value().row(0).array();
  return Tensor::from_op(
      std::move(out), {x, gamma, beta},
      [xhat = std::move(xhat), inv_std = std::move(inv_std)](Tensor::Node& self) {
        const Matrix& g = *self.grad;
        auto& px = self.parent(0);
        auto& pg = self.parent(1);
        auto& pb = self.parent(2);
        if (pg.requires_grad) pg.accumulate(g.cwiseProduct(xhat).colwise().sum());
        if (pb.requires_grad) pb.accumulate(g.colwise().sum());
        if (px.requires_grad) {
          Matrix dxhat = g.array().rowwise() * pg.value.row(0).array();
          Eigen::VectorXd mean_d = dxhat.rowwise().mean();
          Eigen::VectorXd mean_dx = dxhat.cwiseProduct(xhat).rowwise().mean();
          Matrix dx = dxhat;
          dx.colwise() -= mean_d;
          dx.array() -= xhat.array().colwise() * mean_dx.array();
          dx = dx.array().colwise() * inv_std.array();
          px.accumulate(dx);
        }
      });
}

Tensor row_l2_normalize(const Tensor& a) {
  Eigen::VectorXd norms = a.value().rowwise().norm();
  Eigen::VectorXd inv = norms.unaryExpr([](double v) { return v > 0.0 ? 1.0 / v : 0.0; });
  Matrix out = a.value().array().colwise() * inv.array();
  return Tensor::from_op(std::move(out), {a}, [inv = std::move(inv)](Tensor::Node& self) {
    const Matrix& y = self.value;
    const Matrix& g = *self.grad;
    Eigen::VectorXd dot = g.cwiseProduct(y).rowwise().sum();
    Matrix dx = g - (y.array().colwise() * dot.array()).matrix();
    self.parent(0).accumulate(dx.array().colwise() * inv.array());
  });
}

Tensor relu(const Tensor& a) {
  return Tensor::from_op(a.value().cwiseMax(0.0), {a}, [](Tensor::Node& self) {
    const Matrix& x = self.parent(0).value;
    self.parent(0).accumulate(self.grad->cwiseProduct((x.array() > 0.0).cast<double>().matrix()));
  });
}

Tensor leaky_relu(const Tensor& a, double slope) {
  Matrix out = a.value().cwiseMax(0.0) + slope * a.value().cwiseMin(0.0);
  return Tensor::from_op(std::move(out), {a}, [slope](Tensor::Node& self) {
    const Matrix& x = self.parent(0).value;
    Matrix g = *self.grad;
    g.array() *= (x.array() > 0.0).cast<double>() * (1.0 - slope) + slope;
    self.parent(0).accumulate(g);
  });
}

Tensor dropout(const Tensor& a, double rate, bool training, std::mt19937_64& rng) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate must lie in [0, 1)");
  if (!training || rate == 0.0) return a;
  std::bernoulli_distribution keep(1.0 - rate);
  const double inv_keep = 1.0 / (1.0 - rate);
  Matrix mask(a.rows(), a.cols());
  // Fill in row-major order so the mask does not depend on storage layout.
  for (Index i = 0; i < mask.rows(); ++i)
    for (Index j = 0; j < mask.cols(); ++j) mask(i, j) = keep(rng) ? inv_keep : 0.0;
  Matrix out = a.value().cwiseProduct(mask);
  return Tensor::from_op(std::move(out), {a}, [mask = std::move(mask)](Tensor::Node& self) {
    self.parent(0).accumulate(self.grad->cwiseProduct(mask));
  });
}

Tensor cosine_similarity(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) shape_fail("cosine_similarity", a.value(), b.value());
  return matmul(row_l2_normalize(a), transpose(row_l2_normalize(b)));
}

Tensor sum(const Tensor& a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return Tensor::from_op(std::move(out), {a}, [](Tensor::Node& self) {
    auto& p = self.parent(0);
    p.accumulate(Matrix::Constant(p.value.rows(), p.value.cols(), (*self.grad)(0, 0)));
  });
}

Tensor row_sum(const Tensor& a) {
  Matrix out = a.value().rowwise().sum();
  return Tensor::from_op(std::move(out), {a}, [](Tensor::Node& self) {
    auto& p = self.parent(0);
    p.accumulate(self.grad->replicate(1, p.value.cols()));
  });
}

Tensor log_clamped(const Tensor& a) {
  Matrix out = a.value().array().max(kLogClamp).log();
  return Tensor::from_op(std::move(out), {a}, [](Tensor::Node& self) {
    const Matrix& x = self.parent(0).value;
    self.parent(0).accumulate(
        (x.array() > kLogClamp).select(self.grad->cwiseQuotient(x), 0.0));
  });
}

Tensor cross_entropy(const Tensor& probs, std::span<const int> labels,
                     std::span<const int> nodes) {
  if (nodes.empty()) throw std::invalid_argument("cross_entropy: empty node set");
  if (static_cast<Index>(labels.size()) != probs.rows()) {
    throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                     shape_string(probs.value()) + " probabilities");
  }
  const Matrix& p = probs.value();
  double loss = 0.0;
  for (int i : nodes) {
    const int c = labels[i];
    if (c < 0 || c >= p.cols()) {
      throw std::invalid_argument("cross_entropy: node " + std::to_string(i) +
                                  " has no valid label");
    }
    loss -= std::log(std::max(p(i, c), kLogClamp));
  }
  Matrix out(1, 1);
  out(0, 0) = loss;
  std::vector<std::pair<int, int>> targets;
  targets.reserve(nodes.size());
  for (int i : nodes) targets.emplace_back(i, labels[i]);
  return Tensor::from_op(std::move(out), {probs},
                         [targets = std::move(targets)](Tensor::Node& self) {
                           auto& pp = self.parent(0);
                           Matrix g = Matrix::Zero(pp.value.rows(), pp.value.cols());
                           const double up = (*self.grad)(0, 0);
                           for (auto [i, c] : targets) {
                             const double v = pp.value(i, c);
                             if (v > kLogClamp) g(i, c) -= up / v;
                           }
                           pp.accumulate(g);
                         });
}

}  // namespace comgrl

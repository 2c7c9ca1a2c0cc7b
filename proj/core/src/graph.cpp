#include "comgrl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace comgrl {

std::int64_t Graph::num_edges() const {
  std::int64_t count = 0;
  for (Index i = 0; i < adjacency.outerSize(); ++i) {
    for (Adjacency::InnerIterator it(adjacency, i); it; ++it) {
      if (it.col() > i && it.value() != 0.0) ++count;
    }
  }
  return count;
}

void Graph::validate() const {
  const int n = num_nodes();
  auto fail = [](const std::string& msg) { throw std::invalid_argument("graph: " + msg); };
  if (adjacency.rows() != n || adjacency.cols() != n) {
    fail("adjacency is " + std::to_string(adjacency.rows()) + "x" +
         std::to_string(adjacency.cols()) + " for " + std::to_string(n) + " nodes");
  }
  if (static_cast<int>(labels.size()) != n) {
    fail(std::to_string(labels.size()) + " labels for " + std::to_string(n) + " nodes");
  }
  if (num_classes <= 0) fail("num_classes must be positive");
  for (int i = 0; i < n; ++i) {
    if (labels[i] != kUnknownLabel && (labels[i] < 0 || labels[i] >= num_classes)) {
      fail("node " + std::to_string(i) + " has label " + std::to_string(labels[i]) +
           " outside [0, " + std::to_string(num_classes) + ")");
    }
  }
  const Adjacency transposed = adjacency.transpose();
  const Adjacency asymmetry = adjacency - transposed;
  for (Index i = 0; i < asymmetry.outerSize(); ++i) {
    for (Adjacency::InnerIterator it(asymmetry, i); it; ++it) {
      if (it.value() != 0.0) {
        fail("adjacency is not symmetric at (" + std::to_string(i) + ", " +
             std::to_string(it.col()) + ")");
      }
    }
  }
  for (Index i = 0; i < adjacency.outerSize(); ++i) {
    for (Adjacency::InnerIterator it(adjacency, i); it; ++it) {
      if (it.col() == i && it.value() != 0.0) fail("self-loop at node " + std::to_string(i));
      if (it.value() < 0.0 || it.value() > 1.0) fail("adjacency entry outside [0, 1]");
    }
  }

  std::vector<char> seen(n, 0);
  auto check_set = [&](const std::vector<int>& set, const char* name) {
    for (int v : set) {
      if (v < 0 || v >= n) fail(std::string(name) + " index " + std::to_string(v) + " out of range");
      if (seen[v]) fail("node " + std::to_string(v) + " appears in more than one split set");
      seen[v] = 1;
    }
  };
  check_set(split.train, "train");
  check_set(split.val, "val");
  check_set(split.test, "test");
  if (split.train.empty()) fail("train split is empty");

  std::vector<char> present(num_classes, 0);
  for (int v : split.train) {
    if (labels[v] == kUnknownLabel) fail("train node " + std::to_string(v) + " has no label");
    present[labels[v]] = 1;
  }
  for (int c = 0; c < num_classes; ++c) {
    if (!present[c]) fail("class " + std::to_string(c) + " has no training node");
  }
}

Adjacency adjacency_from_edges(int num_nodes, std::span<const std::pair<int, int>> edges) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(edges.size() * 2);
  for (auto [i, j] : edges) {
    if (i < 0 || j < 0 || i >= num_nodes || j >= num_nodes) {
      throw std::invalid_argument("adjacency_from_edges: edge (" + std::to_string(i) + ", " +
                                  std::to_string(j) + ") out of range");
    }
    if (i == j) throw std::invalid_argument("adjacency_from_edges: self-loop at " + std::to_string(i));
    triplets.emplace_back(i, j, 1.0);
    triplets.emplace_back(j, i, 1.0);
  }
  Adjacency a(num_nodes, num_nodes);
  a.setFromTriplets(triplets.begin(), triplets.end(), [](double, double) { return 1.0; });
  return a;
}

Matrix normalized_adjacency_power(const Adjacency& a, int hop_radius) {
  if (hop_radius < 1) throw std::invalid_argument("normalized_adjacency_power: r must be >= 1");
  if (a.rows() != a.cols()) throw ShapeError("normalized_adjacency_power: adjacency not square");
  const Index n = a.rows();
  Adjacency self_looped = a;
  for (Index i = 0; i < n; ++i) self_looped.coeffRef(i, i) += 1.0;
  self_looped.makeCompressed();

  Eigen::VectorXd inv_sqrt_deg(n);
  for (Index i = 0; i < n; ++i) inv_sqrt_deg(i) = 1.0 / std::sqrt(self_looped.row(i).sum());

  Adjacency propagation = self_looped;
  for (Index i = 0; i < propagation.outerSize(); ++i) {
    for (Adjacency::InnerIterator it(propagation, i); it; ++it) {
      it.valueRef() *= inv_sqrt_deg(i) * inv_sqrt_deg(it.col());
    }
  }

  Matrix power = Matrix(propagation);
  for (int step = 1; step < hop_radius; ++step) power = propagation * power;
  return power;
}

Neighborhoods direct_neighbors(const Adjacency& a) {
  Neighborhoods out(a.rows());
  for (Index i = 0; i < a.outerSize(); ++i) {
    for (Adjacency::InnerIterator it(a, i); it; ++it) {
      if (it.col() != i && it.value() != 0.0) out[i].push_back(static_cast<int>(it.col()));
    }
    std::sort(out[i].begin(), out[i].end());
  }
  return out;
}

Neighborhoods r_hop_neighborhood(const Adjacency& a, int hop_radius) {
  if (hop_radius < 1) throw std::invalid_argument("r_hop_neighborhood: r must be >= 1");
  const Neighborhoods adj = direct_neighbors(a);
  const int n = static_cast<int>(adj.size());
  Neighborhoods out(n);
  std::vector<int> dist(n, -1);
  std::vector<int> frontier, next, touched;
  for (int src = 0; src < n; ++src) {
    dist[src] = 0;
    touched.assign(1, src);
    frontier.assign(1, src);
    for (int depth = 1; depth <= hop_radius && !frontier.empty(); ++depth) {
      next.clear();
      for (int u : frontier) {
        for (int v : adj[u]) {
          if (dist[v] < 0) {
            dist[v] = depth;
            next.push_back(v);
            touched.push_back(v);
          }
        }
      }
      frontier.swap(next);
    }
    out[src].assign(touched.begin() + 1, touched.end());
    std::sort(out[src].begin(), out[src].end());
    for (int v : touched) dist[v] = -1;
  }
  return out;
}

ContrastCoefficients contrast_coefficients(const Matrix& a_hat, const Neighborhoods& hops,
                                           int hop_radius) {
  if (a_hat.rows() != a_hat.cols() || a_hat.rows() != static_cast<Index>(hops.size())) {
    throw ShapeError("contrast_coefficients: " + shape_string(a_hat) + " weights for " +
                     std::to_string(hops.size()) + " neighbourhoods");
  }
  ContrastCoefficients out;
  out.hop_radius = hop_radius;
  out.weights = Matrix::Zero(a_hat.rows(), a_hat.cols());
  for (std::size_t i = 0; i < hops.size(); ++i) {
    for (int j : hops[i]) {
      if (j != static_cast<int>(i)) out.weights(i, j) = a_hat(i, j);
    }
  }
  return out;
}

ContrastCoefficients contrast_coefficients(const Adjacency& a, int hop_radius) {
  return contrast_coefficients(normalized_adjacency_power(a, hop_radius),
                               r_hop_neighborhood(a, hop_radius), hop_radius);
}

}  // namespace comgrl

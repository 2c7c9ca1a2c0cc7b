#pragma once

#include <Eigen/SparseCore>

#include <span>
#include <utility>
#include <vector>

#include "comgrl/tensor.hpp"

namespace comgrl {

/// Symmetric adjacency. Entries are 0/1 at load time and lie in [0, 1] after
/// structure mixing.
using Adjacency = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Per-node sorted lists of node indices.
using Neighborhoods = std::vector<std::vector<int>>;

inline constexpr int kUnknownLabel = -1;

struct Split {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
};

struct Graph {
  Matrix features;               // N x D
  Adjacency adjacency;           // N x N
  std::vector<int> labels;       // class id in [0, num_classes) or kUnknownLabel
  int num_classes = 0;
  Split split;

  int num_nodes() const { return static_cast<int>(features.rows()); }
  int feature_dim() const { return static_cast<int>(features.cols()); }
  /// Number of undirected edges with a nonzero weight.
  std::int64_t num_edges() const;

  /// Throws std::invalid_argument on the first violated invariant:
  /// symmetric zero-diagonal adjacency, consistent sizes, disjoint in-range
  /// split sets, nonempty train set covering every class.
  void validate() const;
};

/// Builds a 0/1 adjacency from undirected pairs. Duplicates collapse.
Adjacency adjacency_from_edges(int num_nodes, std::span<const std::pair<int, int>> edges);

/// (D^{-1/2} (A + I) D^{-1/2})^r with D the row sums of A + I.
Matrix normalized_adjacency_power(const Adjacency& a, int hop_radius);

/// Nodes at shortest-path distance 1..r, following nonzero entries of a.
Neighborhoods r_hop_neighborhood(const Adjacency& a, int hop_radius);

/// 1-hop neighbours (nonzero off-diagonal entries).
Neighborhoods direct_neighbors(const Adjacency& a);

/// Contrastive weights: the normalized multi-hop adjacency restricted to
/// each node's r-hop neighbourhood. The diagonal is always zero.
struct ContrastCoefficients {
  Matrix weights;
  int hop_radius = 1;
};

ContrastCoefficients contrast_coefficients(const Matrix& a_hat, const Neighborhoods& hops,
                                           int hop_radius);

/// Convenience: normalized power, neighbourhoods and masking in one go.
ContrastCoefficients contrast_coefficients(const Adjacency& a, int hop_radius);

}  // namespace comgrl

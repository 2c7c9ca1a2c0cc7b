#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "comgrl/graph.hpp"

namespace comgrl {

/// Snapshot of classifier output used as labels for unlabeled nodes.
struct PseudoLabels {
  Matrix probs;                     // N x k
  std::vector<int> hard;            // argmax per row, first index on ties
  std::vector<double> confidence;   // max per row
  double threshold = 0.8;

  static PseudoLabels from_probabilities(Matrix probs, double threshold);
  bool confident(int node) const { return confidence[node] >= threshold; }
};

/// Unlabeled nodes outside the r-hop neighbourhood of every labeled node.
std::vector<int> candidate_set(int num_nodes, const Neighborhoods& hops,
                               std::span<const int> labeled);

struct ClassPartition {
  int cls = 0;
  std::vector<int> labeled;     // labeled nodes whose true class is cls
  std::vector<int> candidates;  // confident candidates pseudo-labelled cls
};

/// One partition per class, members in ascending node order.
std::vector<ClassPartition> class_partition(std::span<const int> labeled,
                                            std::span<const int> candidates,
                                            std::span<const int> labels,
                                            const PseudoLabels& pseudo, int num_classes);

/// True label for labeled nodes, hard pseudo label for everything else.
std::vector<int> effective_labels(std::span<const int> labeled, std::span<const int> labels,
                                  const PseudoLabels& pseudo);

/// Rows are the neighbourhood label histograms of `nodes`, in order. A node
/// with no neighbours gets the uniform distribution.
Matrix neighborhood_label_distribution(const Neighborhoods& neighbors,
                                       std::span<const int> nodes,
                                       std::span<const int> node_labels, int num_classes);

/// f^(1/beta) renormalized. Throws on an all-zero or negative input.
std::vector<double> sharpen(std::span<const double> distribution, double beta);
Matrix sharpen_rows(const Matrix& distributions, double beta);

/// Cosine similarity between every (labeled, candidate) row pair.
Matrix nld_similarity(const Matrix& labeled_rows, const Matrix& candidate_rows);

struct MixPair {
  int labeled = -1;
  int candidate = -1;
  int cls = -1;
  double similarity = 0.0;
  double lambda = 1.0;
};

/// Highest-similarity pair of one partition; ties go to the smallest
/// (labeled, candidate) node indices. Empty partitions give nullopt.
std::optional<MixPair> select_pair(const Matrix& similarity, const ClassPartition& partition);

std::vector<MixPair> select_pairs(std::span<const Matrix> similarities,
                                  std::span<const ClassPartition> partitions);

/// Copy of x with row i replaced by lambda x_i + (1 - lambda) x_j per pair.
Matrix mix_features(const Matrix& features, std::span<const MixPair> pairs);

/// Row and column i of a copy of a interpolated from the original rows and
/// columns i and j, then symmetrized.
Adjacency mix_structure(const Adjacency& a, std::span<const MixPair> pairs);

struct LambdaPolicy {
  enum class Kind { kBeta, kFixed };
  Kind kind = Kind::kBeta;
  double value = 1.0;  // Beta(a, a) shape, or the fixed lambda

  double sample(std::mt19937_64& rng) const;
};

struct MixupOptions {
  int hop_radius = 4;
  double sharpen_beta = 0.5;
  double threshold = 0.8;
  LambdaPolicy lambda;
};

struct MixupPlan {
  std::vector<MixPair> pairs;
  Matrix features;
  Adjacency adjacency;
  std::size_t candidate_count = 0;
  std::size_t admitted_count = 0;

  bool empty() const { return pairs.empty(); }
};

/// Builds mixup plans against a fixed original graph. Every plan is derived
/// from the pristine features and adjacency, never from an earlier plan.
class MixupPlanner {
 public:
  MixupPlanner(const Graph& graph, MixupOptions options);

  MixupPlan plan(const PseudoLabels& pseudo, std::mt19937_64& rng) const;

  const std::vector<int>& candidates() const { return candidates_; }
  const MixupOptions& options() const { return options_; }

 private:
  const Graph* graph_;
  MixupOptions options_;
  Neighborhoods neighbors_;
  std::vector<int> candidates_;
};

struct PlanVerdict {
  bool ok = true;
  std::vector<std::string> violations;
};

/// Brute-force audit of a plan: multi-source BFS distances from the labeled
/// set, label consistency, confidence, pair uniqueness, adjacency range and
/// symmetry, and untouched feature rows.
PlanVerdict check_plan(const Graph& graph, const MixupPlan& plan, const PseudoLabels& pseudo,
                       int hop_radius);

nlohmann::json plan_to_json(const MixupPlan& plan, const PlanVerdict& verdict, int epoch);

}  // namespace comgrl

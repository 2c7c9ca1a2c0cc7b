#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "comgrl/graph.hpp"

namespace comgrl {

/// Loader failure carrying the offending file and line (0 when not line-specific).
class DatasetError : public std::runtime_error {
 public:
  DatasetError(const std::filesystem::path& file, std::size_t line, const std::string& what);
  const std::filesystem::path& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::filesystem::path file_;
  std::size_t line_;
};

/**
 * Reads a dataset directory:
 *
 *   edges.txt     one "i j" pair per line, 0-indexed, undirected
 *   features.txt  N rows of D whitespace-separated reals
 *   labels.txt    N class ids (0-based, -1 for unknown)
 *   split.txt     three lines: train, val and test index lists
 *
 * Duplicate or reversed edge lines collapse into one undirected edge.
 */
Graph load_dataset(const std::filesystem::path& dir);

/// Writes the format read by load_dataset. Reals use the shortest
/// representation that parses back to the same double.
void save_dataset(const Graph& graph, const std::filesystem::path& dir);

/// Homophilous stochastic block model with Gaussian class-mean features.
struct SbmSpec {
  int num_classes = 4;
  int nodes_per_class = 250;
  double p_in = 0.05;
  double p_out = 0.005;
  int feature_dim = 32;
  double separation = 1.0;      // norm of each class mean (means are orthogonal)
  double feature_noise = 1.0;   // per-coordinate standard deviation
  int labels_per_class = 20;
  int val_size = 200;
  int test_size = -1;           // -1: every remaining node
  std::uint64_t seed = 0;

  void validate() const;
};

/// Nodes are numbered class by class; the split is stratified for train and
/// random for val/test.
Graph generate_sbm(const SbmSpec& spec);

/// Reassigns floor(lnr * |train|) training labels to a different class.
Graph inject_label_noise(const Graph& graph, double lnr, std::uint64_t seed);

enum class GraphNoiseMode {
  kAdd,     // add new edges between non-adjacent pairs
  kRewire,  // delete existing edges and add the same number of new ones
};

struct GraphNoiseResult {
  Graph graph;
  std::int64_t requested = 0;
  std::int64_t placed = 0;
  std::int64_t shortfall() const { return requested - placed; }
};

/// Perturbs floor(gnr * |E|) edges of the input graph.
GraphNoiseResult inject_graph_noise(const Graph& graph, double gnr, std::uint64_t seed,
                                    GraphNoiseMode mode = GraphNoiseMode::kAdd);

}  // namespace comgrl

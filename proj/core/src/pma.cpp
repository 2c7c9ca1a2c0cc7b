#include "comgrl/pma.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <stdexcept>

namespace comgrl {

PseudoLabels PseudoLabels::from_probabilities(Matrix probs, double threshold) {
  if (threshold < 0.0 || threshold > 1.0) {
    throw std::invalid_argument("PseudoLabels: threshold must lie in [0, 1]");
  }
  PseudoLabels out;
  out.threshold = threshold;
  out.hard.resize(probs.rows());
  out.confidence.resize(probs.rows());
  for (Index i = 0; i < probs.rows(); ++i) {
    Index arg = 0;
    out.confidence[i] = probs.row(i).maxCoeff(&arg);
    out.hard[i] = static_cast<int>(arg);
  }
  out.probs = std::move(probs);
  return out;
}

std::vector<int> candidate_set(int num_nodes, const Neighborhoods& hops,
                               std::span<const int> labeled) {
  std::vector<char> excluded(num_nodes, 0);
  for (int v : labeled) {
    excluded[v] = 1;
    for (int u : hops[v]) excluded[u] = 1;
  }
  std::vector<int> out;
  for (int v = 0; v < num_nodes; ++v) {
    if (!excluded[v]) out.push_back(v);
  }
  return out;
}

std::vector<ClassPartition> class_partition(std::span<const int> labeled,
                                            std::span<const int> candidates,
                                            std::span<const int> labels,
                                            const PseudoLabels& pseudo, int num_classes) {
  std::vector<ClassPartition> parts(num_classes);
  for (int c = 0; c < num_classes; ++c) parts[c].cls = c;
  for (int v : labeled) {
    if (labels[v] >= 0 && labels[v] < num_classes) parts[labels[v]].labeled.push_back(v);
  }
  for (int v : candidates) {
    if (pseudo.confident(v)) parts[pseudo.hard[v]].candidates.push_back(v);
  }
  for (auto& p : parts) {
    std::sort(p.labeled.begin(), p.labeled.end());
    std::sort(p.candidates.begin(), p.candidates.end());
  }
  return parts;
}

std::vector<int> effective_labels(std::span<const int> labeled, std::span<const int> labels,
                                  const PseudoLabels& pseudo) {
  std::vector<int> out = pseudo.hard;
  for (int v : labeled) out[v] = labels[v];
  return out;
}

Matrix neighborhood_label_distribution(const Neighborhoods& neighbors,
                                       std::span<const int> nodes,
                                       std::span<const int> node_labels, int num_classes) {
  Matrix out = Matrix::Zero(static_cast<Index>(nodes.size()), num_classes);
  for (std::size_t r = 0; r < nodes.size(); ++r) {
    const auto& nbrs = neighbors[nodes[r]];
    if (nbrs.empty()) {
      out.row(r).setConstant(1.0 / num_classes);
      continue;
    }
    for (int u : nbrs) out(r, node_labels[u]) += 1.0;
    out.row(r) /= static_cast<double>(nbrs.size());
  }
  return out;
}

std::vector<double> sharpen(std::span<const double> distribution, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("sharpen: beta must be positive");
  std::vector<double> out(distribution.size());
  double total = 0.0;
  for (std::size_t c = 0; c < distribution.size(); ++c) {
    if (distribution[c] < 0.0) throw std::invalid_argument("sharpen: negative mass");
    out[c] = std::pow(distribution[c], 1.0 / beta);
    total += out[c];
  }
  if (!(total > 0.0)) throw std::invalid_argument("sharpen: distribution has no mass");
  for (double& v : out) v /= total;
  return out;
}

Matrix sharpen_rows(const Matrix& distributions, double beta) {
  Matrix out(distributions.rows(), distributions.cols());
  std::vector<double> row(distributions.cols());
  for (Index i = 0; i < distributions.rows(); ++i) {
    for (Index c = 0; c < distributions.cols(); ++c) row[c] = distributions(i, c);
    auto s = sharpen(row, beta);
    for (Index c = 0; c < distributions.cols(); ++c) out(i, c) = s[c];
  }
  return out;
}

Matrix nld_similarity(const Matrix& labeled_rows, const Matrix& candidate_rows) {
  if (labeled_rows.cols() != candidate_rows.cols()) {
    throw ShapeError("nld_similarity: " + shape_string(labeled_rows) + " vs " +
                     shape_string(candidate_rows));
  }
  auto normalize = [](const Matrix& m) {
    Eigen::VectorXd norms = m.rowwise().norm();
    Matrix out = m;
    for (Index i = 0; i < m.rows(); ++i) {
      if (norms(i) > 0.0) out.row(i) /= norms(i);
    }
    return out;
  };
  Matrix s = normalize(labeled_rows) * normalize(candidate_rows).transpose();
  return s.cwiseMax(0.0).cwiseMin(1.0);
}

std::optional<MixPair> select_pair(const Matrix& similarity, const ClassPartition& partition) {
  if (partition.labeled.empty() || partition.candidates.empty()) return std::nullopt;
  if (similarity.rows() != static_cast<Index>(partition.labeled.size()) ||
      similarity.cols() != static_cast<Index>(partition.candidates.size())) {
    throw ShapeError("select_pair: similarity " + shape_string(similarity) +
                     " does not match partition sizes");
  }
  Index best_r = 0;
  Index best_c = 0;
  // Members are sorted, so a strict row-major scan keeps the smallest indices on
  // ties. Scores within kTie count as tied: equal histograms can differ in the
  // last bits after normalization.
  constexpr double kTie = 1e-12;
  for (Index r = 0; r < similarity.rows(); ++r) {
    for (Index c = 0; c < similarity.cols(); ++c) {
      if (similarity(r, c) > similarity(best_r, best_c) + kTie) {
        best_r = r;
        best_c = c;
      }
    }
  }
  MixPair pair;
  pair.labeled = partition.labeled[best_r];
  pair.candidate = partition.candidates[best_c];
  pair.cls = partition.cls;
  pair.similarity = similarity(best_r, best_c);
  return pair;
}

std::vector<MixPair> select_pairs(std::span<const Matrix> similarities,
                                  std::span<const ClassPartition> partitions) {
  if (similarities.size() != partitions.size()) {
    throw std::invalid_argument("select_pairs: one similarity matrix per partition expected");
  }
  std::vector<MixPair> out;
  for (std::size_t c = 0; c < partitions.size(); ++c) {
    if (auto p = select_pair(similarities[c], partitions[c])) out.push_back(*p);
  }
  return out;
}

namespace {

void require_distinct_targets(std::span<const MixPair> pairs, const char* op) {
  std::set<int> targets;
  for (const auto& p : pairs) {
    if (p.lambda < 0.0 || p.lambda > 1.0) {
      throw std::invalid_argument(std::string(op) + ": lambda outside [0, 1]");
    }
    if (!targets.insert(p.labeled).second) {
      throw std::logic_error(std::string(op) + ": node " + std::to_string(p.labeled) +
                             " is the target of more than one pair");
    }
  }
}

}  // namespace

Matrix mix_features(const Matrix& features, std::span<const MixPair> pairs) {
  require_distinct_targets(pairs, "mix_features");
  Matrix out = features;
  for (const auto& p : pairs) {
    out.row(p.labeled) = p.lambda * features.row(p.labeled) +
                         (1.0 - p.lambda) * features.row(p.candidate);
  }
  return out;
}

Adjacency mix_structure(const Adjacency& a, std::span<const MixPair> pairs) {
  require_distinct_targets(pairs, "mix_structure");
  if (pairs.empty()) return a;
  const Matrix original(a);
  Matrix work = original;
  for (const auto& p : pairs) {
    const double lam = p.lambda;
    work.row(p.labeled) = lam * original.row(p.labeled) + (1.0 - lam) * original.row(p.candidate);
    work.col(p.labeled) = lam * original.col(p.labeled) + (1.0 - lam) * original.col(p.candidate);
  }
  Matrix symmetric = 0.5 * (work + work.transpose());
  return symmetric.sparseView(1.0, 0.0);
}

double LambdaPolicy::sample(std::mt19937_64& rng) const {
  if (kind == Kind::kFixed) {
    if (value < 0.0 || value > 1.0) throw std::invalid_argument("LambdaPolicy: fixed lambda outside [0, 1]");
    return value;
  }
  if (!(value > 0.0)) throw std::invalid_argument("LambdaPolicy: Beta shape must be positive");
  std::gamma_distribution<double> gamma(value, 1.0);
  const double x = gamma(rng);
  const double y = gamma(rng);
  return x + y > 0.0 ? x / (x + y) : 0.5;
}

MixupPlanner::MixupPlanner(const Graph& graph, MixupOptions options)
    : graph_(&graph),
      options_(options),
      neighbors_(direct_neighbors(graph.adjacency)),
      candidates_(candidate_set(graph.num_nodes(),
                                r_hop_neighborhood(graph.adjacency, options.hop_radius),
                                graph.split.train)) {}

MixupPlan MixupPlanner::plan(const PseudoLabels& pseudo, std::mt19937_64& rng) const {
  const Graph& g = *graph_;
  MixupPlan out;
  out.candidate_count = candidates_.size();
  const auto partitions = class_partition(g.split.train, candidates_, g.labels, pseudo,
                                          g.num_classes);
  const auto node_labels = effective_labels(g.split.train, g.labels, pseudo);
  std::vector<Matrix> similarities;
  for (const auto& part : partitions) {
    out.admitted_count += part.candidates.size();
    if (part.labeled.empty() || part.candidates.empty()) {
      similarities.emplace_back();
      continue;
    }
    Matrix f_labeled = sharpen_rows(
        neighborhood_label_distribution(neighbors_, part.labeled, node_labels, g.num_classes),
        options_.sharpen_beta);
    Matrix f_candidates = sharpen_rows(
        neighborhood_label_distribution(neighbors_, part.candidates, node_labels, g.num_classes),
        options_.sharpen_beta);
    similarities.push_back(nld_similarity(f_labeled, f_candidates));
  }
  out.pairs = select_pairs(similarities, partitions);
  for (auto& p : out.pairs) p.lambda = options_.lambda.sample(rng);
  out.features = mix_features(g.features, out.pairs);
  out.adjacency = mix_structure(g.adjacency, out.pairs);
  return out;
}

PlanVerdict check_plan(const Graph& graph, const MixupPlan& plan, const PseudoLabels& pseudo,
                       int hop_radius) {
  PlanVerdict verdict;
  auto violate = [&](std::string msg) {
    verdict.ok = false;
    verdict.violations.push_back(std::move(msg));
  };
  const int n = graph.num_nodes();

  // Distance to the nearest labeled node over the original 0/1 graph.
  const Matrix dense(graph.adjacency);
  std::vector<int> dist(n, -1);
  std::deque<int> queue;
  for (int v : graph.split.train) {
    dist[v] = 0;
    queue.push_back(v);
  }
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int w = 0; w < n; ++w) {
      if (w != u && dense(u, w) != 0.0 && dist[w] < 0) {
        dist[w] = dist[u] + 1;
        queue.push_back(w);
      }
    }
  }

  std::set<int> train(graph.split.train.begin(), graph.split.train.end());
  std::set<int> classes;
  std::set<int> targets;
  for (const auto& p : plan.pairs) {
    const std::string tag = "pair (" + std::to_string(p.labeled) + ", " +
                            std::to_string(p.candidate) + ", class " + std::to_string(p.cls) + ")";
    if (!train.count(p.labeled)) violate(tag + ": first node is not labeled");
    else if (graph.labels[p.labeled] != p.cls) violate(tag + ": labeled node has another class");
    if (train.count(p.candidate)) violate(tag + ": candidate is labeled");
    if (dist[p.candidate] >= 0 && dist[p.candidate] <= hop_radius) {
      violate(tag + ": candidate within " + std::to_string(dist[p.candidate]) +
              " hops of a labeled node");
    }
    if (pseudo.hard[p.candidate] != p.cls) violate(tag + ": pseudo label mismatch");
    if (pseudo.confidence[p.candidate] < pseudo.threshold) violate(tag + ": below confidence threshold");
    if (p.lambda < 0.0 || p.lambda > 1.0) violate(tag + ": lambda outside [0, 1]");
    if (!classes.insert(p.cls).second) violate(tag + ": second pair for this class");
    if (!targets.insert(p.labeled).second) violate(tag + ": labeled node reused");
  }

  const Matrix mixed(plan.adjacency);
  if (mixed.rows() != n || mixed.cols() != n) {
    violate("mixed adjacency has wrong shape");
  } else {
    if ((mixed - mixed.transpose()).cwiseAbs().maxCoeff() > 1e-12) violate("mixed adjacency not symmetric");
    if (mixed.minCoeff() < 0.0 || mixed.maxCoeff() > 1.0) violate("mixed adjacency outside [0, 1]");
  }
  for (int v = 0; v < n; ++v) {
    if (targets.count(v)) continue;
    if (plan.features.row(v) != graph.features.row(v)) {
      violate("feature row " + std::to_string(v) + " changed without a pair");
      break;
    }
  }
  return verdict;
}

nlohmann::json plan_to_json(const MixupPlan& plan, const PlanVerdict& verdict, int epoch) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : plan.pairs) {
    pairs.push_back({{"labeled", p.labeled},
                     {"candidate", p.candidate},
                     {"class", p.cls},
                     {"similarity", p.similarity},
                     {"lambda", p.lambda}});
  }
  return {{"epoch", epoch},
          {"candidate_count", plan.candidate_count},
          {"admitted_count", plan.admitted_count},
          {"pairs", pairs},
          {"checks_passed", verdict.ok},
          {"violations", verdict.violations}};
}

}  // namespace comgrl

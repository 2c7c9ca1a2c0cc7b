#include "comgrl/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string_view>
#include <unordered_set>

namespace comgrl {
namespace fs = std::filesystem;

DatasetError::DatasetError(const fs::path& file, std::size_t line, const std::string& what)
    : std::runtime_error(file.string() + (line ? ":" + std::to_string(line) : std::string()) +
                         ": " + what),
      file_(file),
      line_(line) {}

namespace {

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

template <typename T>
T parse_number(std::string_view token, const fs::path& file, std::size_t line) {
  T value{};
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw DatasetError(file, line, "cannot parse '" + std::string(token) + "'");
  }
  return value;
}

std::vector<std::string> read_lines(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw DatasetError(file, 0, "cannot open file");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

bool blank(std::string_view s) { return split_ws(s).empty(); }

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::uint64_t pair_key(int i, int j) {
  if (i > j) std::swap(i, j);
  return (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint32_t>(j);
}

std::vector<std::pair<int, int>> edge_list(const Adjacency& a) {
  std::vector<std::pair<int, int>> edges;
  for (Index i = 0; i < a.outerSize(); ++i) {
    for (Adjacency::InnerIterator it(a, i); it; ++it) {
      if (it.col() > i && it.value() != 0.0) edges.emplace_back(static_cast<int>(i), static_cast<int>(it.col()));
    }
  }
  return edges;
}

}  // namespace

Graph load_dataset(const fs::path& dir) {
  Graph g;

  const fs::path features_file = dir / "features.txt";
  const auto feature_lines = read_lines(features_file);
  std::vector<std::vector<double>> rows;
  for (std::size_t ln = 0; ln < feature_lines.size(); ++ln) {
    const auto tokens = split_ws(feature_lines[ln]);
    if (tokens.empty()) continue;
    std::vector<double> row;
    for (auto t : tokens) row.push_back(parse_number<double>(t, features_file, ln + 1));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DatasetError(features_file, ln + 1,
                         "expected " + std::to_string(rows.front().size()) + " columns, found " +
                             std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DatasetError(features_file, 0, "no feature rows");
  const int n = static_cast<int>(rows.size());
  g.features.resize(n, static_cast<Index>(rows.front().size()));
  for (int i = 0; i < n; ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) g.features(i, j) = rows[i][j];

  const fs::path labels_file = dir / "labels.txt";
  const auto label_lines = read_lines(labels_file);
  for (std::size_t ln = 0; ln < label_lines.size(); ++ln) {
    for (auto t : split_ws(label_lines[ln])) {
      const int label = parse_number<int>(t, labels_file, ln + 1);
      if (label < kUnknownLabel) throw DatasetError(labels_file, ln + 1, "negative class id");
      g.labels.push_back(label);
    }
  }
  if (static_cast<int>(g.labels.size()) != n) {
    throw DatasetError(labels_file, 0,
                       std::to_string(g.labels.size()) + " labels for " + std::to_string(n) +
                           " feature rows");
  }
  g.num_classes = *std::max_element(g.labels.begin(), g.labels.end()) + 1;

  const fs::path edges_file = dir / "edges.txt";
  const auto edge_lines = read_lines(edges_file);
  std::vector<std::pair<int, int>> edges;
  for (std::size_t ln = 0; ln < edge_lines.size(); ++ln) {
    const auto tokens = split_ws(edge_lines[ln]);
    if (tokens.empty()) continue;
    if (tokens.size() != 2) throw DatasetError(edges_file, ln + 1, "expected two node indices");
    const int i = parse_number<int>(tokens[0], edges_file, ln + 1);
    const int j = parse_number<int>(tokens[1], edges_file, ln + 1);
    if (i < 0 || j < 0 || i >= n || j >= n) {
      throw DatasetError(edges_file, ln + 1, "node index out of range [0, " + std::to_string(n) + ")");
    }
    if (i == j) throw DatasetError(edges_file, ln + 1, "self-loop");
    edges.emplace_back(i, j);
  }
  g.adjacency = adjacency_from_edges(n, edges);

  const fs::path split_file = dir / "split.txt";
  auto split_lines = read_lines(split_file);
  while (!split_lines.empty() && blank(split_lines.back()) && split_lines.size() > 3) split_lines.pop_back();
  if (split_lines.size() != 3) {
    throw DatasetError(split_file, 0, "expected 3 lines (train, val, test), found " +
                                          std::to_string(split_lines.size()));
  }
  std::vector<int>* sets[] = {&g.split.train, &g.split.val, &g.split.test};
  for (std::size_t ln = 0; ln < 3; ++ln) {
    for (auto t : split_ws(split_lines[ln])) {
      const int v = parse_number<int>(t, split_file, ln + 1);
      if (v < 0 || v >= n) {
        throw DatasetError(split_file, ln + 1, "node index " + std::to_string(v) + " out of range");
      }
      sets[ln]->push_back(v);
    }
  }

  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    throw DatasetError(dir, 0, e.what());
  }
  return g;
}

void save_dataset(const Graph& graph, const fs::path& dir) {
  fs::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw DatasetError(dir / name, 0, "cannot open for writing");
    return out;
  };
  {
    auto out = open("edges.txt");
    for (auto [i, j] : edge_list(graph.adjacency)) out << i << ' ' << j << '\n';
  }
  {
    auto out = open("features.txt");
    for (Index i = 0; i < graph.features.rows(); ++i) {
      for (Index j = 0; j < graph.features.cols(); ++j) {
        if (j) out << ' ';
        out << format_double(graph.features(i, j));
      }
      out << '\n';
    }
  }
  {
    auto out = open("labels.txt");
    for (int l : graph.labels) out << l << '\n';
  }
  {
    auto out = open("split.txt");
    for (const auto* set : {&graph.split.train, &graph.split.val, &graph.split.test}) {
      for (std::size_t i = 0; i < set->size(); ++i) out << (i ? " " : "") << (*set)[i];
      out << '\n';
    }
  }
}

void SbmSpec::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("SbmSpec: " + m); };
  if (num_classes < 2) fail("need at least two classes");
  if (nodes_per_class < 1) fail("nodes_per_class must be positive");
  if (!(0.0 <= p_out && p_out < p_in && p_in <= 1.0)) fail("require 0 <= p_out < p_in <= 1");
  if (feature_dim < num_classes) fail("feature_dim must be >= num_classes for orthogonal means");
  if (feature_noise < 0.0) fail("feature_noise must be nonnegative");
  if (labels_per_class < 1 || labels_per_class > nodes_per_class) {
    fail("labels_per_class must lie in [1, nodes_per_class]");
  }
  const int rest = num_classes * (nodes_per_class - labels_per_class);
  if (val_size < 0 || val_size > rest) fail("val_size exceeds the unlabeled pool");
  if (test_size > rest - val_size) fail("test_size exceeds the unlabeled pool");
}

Graph generate_sbm(const SbmSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const int n = spec.num_classes * spec.nodes_per_class;

  Graph g;
  g.num_classes = spec.num_classes;
  g.labels.resize(n);
  for (int i = 0; i < n; ++i) g.labels[i] = i / spec.nodes_per_class;

  std::vector<std::pair<int, int>> edges;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double p = g.labels[i] == g.labels[j] ? spec.p_in : spec.p_out;
      if (unit(rng) < p) edges.emplace_back(i, j);
    }
  }
  g.adjacency = adjacency_from_edges(n, edges);

  std::normal_distribution<double> noise(0.0, 1.0);
  g.features.resize(n, spec.feature_dim);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < spec.feature_dim; ++d) {
      const double mean = d == g.labels[i] ? spec.separation : 0.0;
      g.features(i, d) = mean + spec.feature_noise * noise(rng);
    }
  }

  std::vector<int> pool;
  for (int c = 0; c < spec.num_classes; ++c) {
    std::vector<int> members(spec.nodes_per_class);
    std::iota(members.begin(), members.end(), c * spec.nodes_per_class);
    std::shuffle(members.begin(), members.end(), rng);
    g.split.train.insert(g.split.train.end(), members.begin(),
                         members.begin() + spec.labels_per_class);
    pool.insert(pool.end(), members.begin() + spec.labels_per_class, members.end());
  }
  std::shuffle(pool.begin(), pool.end(), rng);
  const std::size_t val_end = static_cast<std::size_t>(spec.val_size);
  const std::size_t test_end =
      spec.test_size < 0 ? pool.size() : val_end + static_cast<std::size_t>(spec.test_size);
  g.split.val.assign(pool.begin(), pool.begin() + val_end);
  g.split.test.assign(pool.begin() + val_end, pool.begin() + test_end);
  std::sort(g.split.train.begin(), g.split.train.end());
  std::sort(g.split.val.begin(), g.split.val.end());
  std::sort(g.split.test.begin(), g.split.test.end());
  g.validate();
  return g;
}

Graph inject_label_noise(const Graph& graph, double lnr, std::uint64_t seed) {
  if (lnr < 0.0 || lnr > 1.0) throw std::invalid_argument("inject_label_noise: lnr must lie in [0, 1]");
  Graph out = graph;
  const auto count = static_cast<std::size_t>(std::floor(lnr * graph.split.train.size()));
  if (count == 0 || graph.num_classes < 2) return out;
  std::mt19937_64 rng(seed);
  std::vector<int> chosen = graph.split.train;
  std::shuffle(chosen.begin(), chosen.end(), rng);
  chosen.resize(count);
  std::uniform_int_distribution<int> other(0, graph.num_classes - 2);
  for (int v : chosen) {
    const int shift = other(rng);
    out.labels[v] = shift >= graph.labels[v] ? shift + 1 : shift;
  }
  return out;
}

GraphNoiseResult inject_graph_noise(const Graph& graph, double gnr, std::uint64_t seed,
                                    GraphNoiseMode mode) {
  if (gnr < 0.0) throw std::invalid_argument("inject_graph_noise: gnr must be nonnegative");
  GraphNoiseResult result;
  result.graph = graph;
  auto edges = edge_list(graph.adjacency);
  result.requested = static_cast<std::int64_t>(std::floor(gnr * static_cast<double>(edges.size())));
  if (result.requested == 0) return result;

  std::mt19937_64 rng(seed);
  const int n = graph.num_nodes();
  std::unordered_set<std::uint64_t> occupied;
  for (auto [i, j] : edges) occupied.insert(pair_key(i, j));

  if (mode == GraphNoiseMode::kRewire) {
    std::shuffle(edges.begin(), edges.end(), rng);
    const auto removed = std::min<std::size_t>(result.requested, edges.size());
    edges.resize(edges.size() - removed);
  }

  const std::int64_t total_pairs = static_cast<std::int64_t>(n) * (n - 1) / 2;
  const std::int64_t available = total_pairs - static_cast<std::int64_t>(occupied.size());
  const std::int64_t target = std::min(result.requested, available);
  std::vector<std::pair<int, int>> added;
  if (target * 2 <= available) {
    std::uniform_int_distribution<int> node(0, n - 1);
    while (static_cast<std::int64_t>(added.size()) < target) {
      const int i = node(rng);
      const int j = node(rng);
      if (i == j || !occupied.insert(pair_key(i, j)).second) continue;
      added.emplace_back(std::min(i, j), std::max(i, j));
    }
  } else {
    std::vector<std::pair<int, int>> free_pairs;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (!occupied.count(pair_key(i, j))) free_pairs.emplace_back(i, j);
    std::shuffle(free_pairs.begin(), free_pairs.end(), rng);
    added.assign(free_pairs.begin(), free_pairs.begin() + target);
  }
  result.placed = static_cast<std::int64_t>(added.size());
  edges.insert(edges.end(), added.begin(), added.end());
  result.graph.adjacency = adjacency_from_edges(n, edges);
  return result;
}

}  // namespace comgrl

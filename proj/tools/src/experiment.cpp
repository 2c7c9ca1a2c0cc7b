#include "experiment.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <cmath>
#include <fstream>
#include <malloc.h>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace comgrl::cli {

Graph DataSource::graph_for_seed(std::uint64_t seed) const {
  if (directory) return load_dataset(*directory);
  if (!sbm) throw std::invalid_argument("no dataset: pass --dataset or an sbm block");
  SbmSpec spec = *sbm;
  spec.seed += seed;
  return generate_sbm(spec);
}

nlohmann::json DataSource::to_json() const {
  if (directory) return {{"directory", directory->string()}};
  if (sbm) return {{"sbm", cli::to_json(*sbm)}};
  return nullptr;
}

SbmSpec sbm_from_json(const nlohmann::json& object, SbmSpec s) {
  if (!object.is_object()) throw std::invalid_argument("sbm block must be a JSON object");
  for (const auto& [key, v] : object.items()) {
    if (key == "num_classes") s.num_classes = v.get<int>();
    else if (key == "nodes_per_class") s.nodes_per_class = v.get<int>();
    else if (key == "p_in") s.p_in = v.get<double>();
    else if (key == "p_out") s.p_out = v.get<double>();
    else if (key == "feature_dim") s.feature_dim = v.get<int>();
    else if (key == "separation") s.separation = v.get<double>();
    else if (key == "feature_noise") s.feature_noise = v.get<double>();
    else if (key == "labels_per_class") s.labels_per_class = v.get<int>();
    else if (key == "val_size") s.val_size = v.get<int>();
    else if (key == "test_size") s.test_size = v.get<int>();
    else if (key == "seed") s.seed = v.get<std::uint64_t>();
    else throw std::invalid_argument("unknown sbm key '" + key + "'");
  }
  s.validate();
  return s;
}

nlohmann::json to_json(const SbmSpec& s) {
  return {{"num_classes", s.num_classes},         {"nodes_per_class", s.nodes_per_class},
          {"p_in", s.p_in},                       {"p_out", s.p_out},
          {"feature_dim", s.feature_dim},         {"separation", s.separation},
          {"feature_noise", s.feature_noise},     {"labels_per_class", s.labels_per_class},
          {"val_size", s.val_size},               {"test_size", s.test_size},
          {"seed", s.seed}};
}

namespace {

SeedOutcome run_one(const DataSource& source, const TrainConfig& base, const std::string& variant,
                    std::uint64_t seed, const NoiseSpec& noise) {
  SeedOutcome out;
  out.seed = seed;
  Graph graph = source.graph_for_seed(seed);
  std::int64_t noisy_edges = 0;
  if (noise.lnr > 0.0) graph = inject_label_noise(graph, noise.lnr, seed);
  if (noise.gnr > 0.0) {
    auto r = inject_graph_noise(graph, noise.gnr, seed, noise.mode);
    if (r.shortfall() > 0) {
      spdlog::warn("seed {}: placed {} of {} noisy edges", seed, r.placed, r.requested);
    }
    noisy_edges = r.placed;
    graph = std::move(r.graph);
  }
  TrainConfig config = base;
  config.seed = seed;
  try {
    Trainer trainer(graph, config);
    ExperimentReport report = trainer.run();
    report.variant = variant;
    report.lnr = noise.lnr;
    report.gnr = noise.gnr;
    report.noisy_edges = noisy_edges;
    out.report = std::move(report);
  } catch (const TrainingDiverged& e) {
    out.failure = e.what();
    out.failed_epoch = e.epoch();
  }
  return out;
}

}  // namespace

std::vector<SeedOutcome> run_seeds(const DataSource& source, const TrainConfig& config,
                                   const std::string& variant, const std::vector<std::uint64_t>& seeds,
                                   const NoiseSpec& noise, int jobs) {
  config.validate();
  std::vector<SeedOutcome> outcomes(seeds.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        outcomes[i] = run_one(source, config, variant, seeds[i], noise);
        if (outcomes[i].report) {
          spdlog::info("{} seed {}: test {:.2f} (best epoch {})", variant, seeds[i],
                       outcomes[i].report->test_acc, outcomes[i].report->best_epoch);
        } else {
          spdlog::warn("{} seed {}: {}", variant, seeds[i], outcomes[i].failure);
        }
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = seeds.size();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(seeds.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return outcomes;
}

nlohmann::json aggregate(const std::string& variant, const std::vector<SeedOutcome>& outcomes) {
  std::vector<double> accs;
  nlohmann::json seeds = nlohmann::json::array();
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& o : outcomes) {
    if (o.report) {
      accs.push_back(o.report->test_acc);
      seeds.push_back(o.seed);
    } else {
      failures.push_back({{"seed", o.seed}, {"epoch", o.failed_epoch}, {"message", o.failure}});
    }
  }
  nlohmann::json mean = nullptr, std_dev = nullptr;
  if (!accs.empty()) {
    double m = 0.0;
    for (double a : accs) m += a;
    m /= static_cast<double>(accs.size());
    mean = m;
    if (accs.size() > 1) {
      double ss = 0.0;
      for (double a : accs) ss += (a - m) * (a - m);
      std_dev = std::sqrt(ss / static_cast<double>(accs.size() - 1));
    }
  }
  return {{"variant", variant},
          {"seeds", seeds},
          {"test_acc", nlohmann::json(accs)},
          {"mean_test_acc", mean},
          {"std_test_acc", std_dev},
          {"failures", failures}};
}

void write_reports(const std::filesystem::path& dir, const std::string& variant,
                   const std::vector<SeedOutcome>& outcomes) {
  std::filesystem::create_directories(dir);
  for (const auto& o : outcomes) {
    if (!o.report) continue;
    std::ofstream(dir / ("seed_" + std::to_string(o.seed) + ".json"))
        << o.report->to_json().dump(2) << '\n';
  }
  std::ofstream(dir / "aggregate.json") << aggregate(variant, outcomes).dump(2) << '\n';
}

double mean_test_acc(const std::vector<SeedOutcome>& outcomes) {
  double sum = 0.0;
  int n = 0;
  for (const auto& o : outcomes) {
    if (!o.report) continue;
    sum += o.report->test_acc;
    ++n;
  }
  return n == 0 ? std::nan("") : sum / n;
}

void tune_allocator() {
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
}

}  // namespace comgrl::cli

#pragma once

#include <comgrl/data.hpp>
#include <comgrl/trainer.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace comgrl::cli {

/// Where the graph comes from: a dataset directory or a generated SBM.
/// For SBMs, run seed s uses a graph drawn with sbm.seed + s.
struct DataSource {
  std::optional<std::filesystem::path> directory;
  std::optional<SbmSpec> sbm;

  Graph graph_for_seed(std::uint64_t seed) const;
  nlohmann::json to_json() const;
};

SbmSpec sbm_from_json(const nlohmann::json& object, SbmSpec base = {});
nlohmann::json to_json(const SbmSpec& spec);

struct NoiseSpec {
  double lnr = 0.0;
  double gnr = 0.0;
  GraphNoiseMode mode = GraphNoiseMode::kAdd;
  bool active() const { return lnr > 0.0 || gnr > 0.0; }
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::optional<ExperimentReport> report;
  std::string failure;  // set when training diverged
  int failed_epoch = -1;
};

/// Runs one variant over all seeds with up to `jobs` worker threads.
/// Outcomes are returned in seed order regardless of scheduling.
std::vector<SeedOutcome> run_seeds(const DataSource& source, const TrainConfig& config,
                                   const std::string& variant, const std::vector<std::uint64_t>& seeds,
                                   const NoiseSpec& noise = {}, int jobs = 1);

/// Mean and sample standard deviation of test accuracy over survivors.
nlohmann::json aggregate(const std::string& variant, const std::vector<SeedOutcome>& outcomes);

/// Writes seed_<s>.json per survivor and aggregate.json into dir.
void write_reports(const std::filesystem::path& dir, const std::string& variant,
                   const std::vector<SeedOutcome>& outcomes);

double mean_test_acc(const std::vector<SeedOutcome>& outcomes);

/// Sets the process allocator so large temporaries are reused instead of
/// being mapped and unmapped every step.
void tune_allocator();

}  // namespace comgrl::cli

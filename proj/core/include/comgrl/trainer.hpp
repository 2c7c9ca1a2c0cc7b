#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "comgrl/adam.hpp"
#include "comgrl/config.hpp"
#include "comgrl/graph.hpp"
#include "comgrl/model.hpp"
#include "comgrl/pma.hpp"

namespace comgrl {

/// Raised when the training loss becomes non-finite.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int epoch, std::uint64_t seed, double loss);
  int epoch() const { return epoch_; }
  std::uint64_t seed() const { return seed_; }

 private:
  int epoch_;
  std::uint64_t seed_;
};

/// L_ce + alpha * L_con.
Tensor total_loss(const Tensor& ce, const Tensor& con, double alpha);

/// 100 * fraction of nodes whose argmax prediction matches the label.
double accuracy(const Matrix& probs, std::span<const int> labels, std::span<const int> nodes);

struct EpochMetrics {
  int epoch = 0;
  std::string stage;       // "pretrain" or "finetune"
  double loss = 0.0;       // total training objective
  double ce_loss = 0.0;
  double con_loss = 0.0;   // 0 when the contrastive term is inactive
  double train_acc = 0.0;
  double val_loss = 0.0;   // mean cross-entropy over the validation split
  double val_acc = 0.0;
  double test_acc = 0.0;
  int mix_pairs = 0;       // pairs in the mixup plan used this epoch
};

struct ExperimentReport {
  std::string variant = "full";
  TrainConfig config;
  std::vector<EpochMetrics> epochs;
  int best_epoch = -1;
  double best_val_acc = 0.0;
  double test_acc = 0.0;          // at the best validation epoch
  double final_test_acc = 0.0;    // after the last epoch
  double pretrain_val_acc = 0.0;  // validation accuracy when pre-training ends
  double pretrain_test_acc = 0.0;
  int refreshes = 0;
  int empty_refreshes = 0;
  int plan_check_failures = 0;
  double lnr = 0.0;
  double gnr = 0.0;
  std::int64_t noisy_edges = 0;
  double wall_time_seconds = 0.0;

  bool augmentation_applied() const { return refreshes > empty_refreshes; }
  nlohmann::json to_json() const;
};

/**
 * Two-stage optimisation: pre-training on the original graph, then
 * fine-tuning with mixup plans rebuilt from the current classifier.
 *
 * Three independent RNG streams are derived from the seed (initialisation,
 * dropout, mixup coefficients), so switching augmentation off leaves the
 * dropout sequence and therefore the trajectory unchanged.
 */
class Trainer {
 public:
  Trainer(const Graph& graph, TrainConfig config);

  /// Runs epochs [0, T_pre) and returns the eval-mode prediction snapshot.
  PseudoLabels pretrain();

  /// Runs epochs [T_pre, T_total). The first plan uses `pseudo`; later
  /// refreshes use the model's latest eval-mode predictions.
  void finetune(const PseudoLabels& pseudo);

  /// pretrain() then finetune(), returning the filled report.
  ExperimentReport run();

  /// Eval-mode accuracy on the original features.
  double evaluate(std::span<const int> nodes) const;
  Matrix predict() const;

  const ExperimentReport& report() const { return report_; }
  const ComGrlModel& model() const { return model_; }
  const ContrastCoefficients& base_coefficients() const { return base_coefficients_; }

 private:
  bool contrastive_active() const;
  void train_epoch(int epoch, const char* stage, const Matrix& features,
                   const Matrix* coefficients, int mix_pairs);
  void refresh_plan(int epoch, const PseudoLabels& pseudo);

  const Graph* graph_;
  TrainConfig config_;
  std::mt19937_64 init_rng_;
  std::mt19937_64 dropout_rng_;
  std::mt19937_64 mix_rng_;
  ComGrlModel model_;
  Adam optimizer_;
  ContrastCoefficients base_coefficients_;
  std::optional<MixupPlanner> planner_;
  std::optional<MixupPlan> plan_;
  std::optional<ContrastCoefficients> plan_coefficients_;
  Matrix last_probs_;
  int next_epoch_ = 0;
  ExperimentReport report_;
};

/// Config variants used by ablation sweeps.
TrainConfig ablation_variant(const TrainConfig& base, const std::string& variant);
const std::vector<std::string>& ablation_variants();

}  // namespace comgrl

#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "comgrl/gmsa.hpp"
#include "comgrl/lgcl.hpp"
#include "comgrl/pma.hpp"

namespace comgrl {

/// Everything a training run depends on besides the graph.
struct TrainConfig {
  // Loss.
  double alpha = 1.0;
  double tau = 1.8;
  int hop_radius = 4;
  ContrastiveForm contrastive_form = ContrastiveForm::kRatio;

  // Mixup.
  double sharpen_beta = 0.5;
  LambdaPolicy lambda;
  double threshold = 0.8;
  int refresh_interval = 1;

  // Schedule and optimizer.
  int pretrain_epochs = 300;
  int total_epochs = 500;
  double learning_rate = 5e-4;
  double dropout = 0.4;
  double weight_decay = 0.0;

  // Architecture.
  int hidden_dim = 128;
  int num_heads = 8;
  int num_layers = 2;
  AttentionMode attention_mode = AttentionMode::kEfficient;

  // Ablation switches.
  bool disable_lgcl = false;
  bool disable_gmsa = false;
  bool disable_pma = false;

  // Audit every mixup plan with the brute-force checker; optionally dump them.
  bool check_plans = false;
  std::string mixup_dump_dir;

  std::uint64_t seed = 0;

  void validate() const;

  /// Per-dataset settings: cora, citeseer, pubmed, cs, physics, corafull.
  static TrainConfig preset(std::string_view dataset);
  static const std::vector<std::string>& preset_names();
};

/// Sets one flat config key. Returns false for keys it does not own so
/// callers can layer their own keys on top; throws on a malformed value.
bool apply_config_key(TrainConfig& config, const std::string& key, const nlohmann::json& value);

nlohmann::json to_json(const TrainConfig& config);

/// Overlays a flat JSON object onto base, rejecting unknown keys.
TrainConfig config_from_json(const nlohmann::json& object, TrainConfig base = {});

}  // namespace comgrl

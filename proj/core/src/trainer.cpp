#include "comgrl/trainer.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "comgrl/ops.hpp"

namespace comgrl {
namespace {

enum class Stream : std::uint32_t { kInit = 1, kDropout = 2, kMixup = 3 };

std::mt19937_64 make_stream(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

ModelOptions model_options(const Graph& g, const TrainConfig& c) {
  ModelOptions o;
  o.input_dim = g.feature_dim();
  o.num_classes = g.num_classes;
  o.hidden_dim = c.hidden_dim;
  o.num_heads = c.num_heads;
  o.num_layers = c.num_layers;
  o.dropout = c.dropout;
  o.attention_mode = c.attention_mode;
  o.local_encoder = !c.disable_lgcl;
  o.global_attention = !c.disable_gmsa;
  return o;
}

const Graph& validated(const Graph& g) {
  g.validate();
  return g;
}

std::string variant_name(const TrainConfig& c) {
  if (c.disable_gmsa && c.disable_pma && c.alpha == 0.0 && !c.disable_lgcl) return "mlp";
  if (c.disable_lgcl) return "no-lgcl";
  if (c.disable_gmsa) return "no-gmsa";
  if (c.disable_pma) return "no-pma";
  return "full";
}

}  // namespace

TrainingDiverged::TrainingDiverged(int epoch, std::uint64_t seed, double loss)
    : std::runtime_error("training diverged at epoch " + std::to_string(epoch) + " (seed " +
                         std::to_string(seed) + ", loss " + std::to_string(loss) + ")"),
      epoch_(epoch),
      seed_(seed) {}

Tensor total_loss(const Tensor& ce, const Tensor& con, double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("total_loss: alpha must be nonnegative");
  if (alpha == 0.0) return ce;
  return add(ce, scale(con, alpha));
}

double accuracy(const Matrix& probs, std::span<const int> labels, std::span<const int> nodes) {
  if (nodes.empty()) throw std::invalid_argument("accuracy: empty node set");
  std::size_t correct = 0;
  for (int v : nodes) {
    Index pred = 0;
    probs.row(v).maxCoeff(&pred);
    if (pred == labels[v]) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(nodes.size());
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json epochs_json = nlohmann::json::array();
  for (const auto& e : epochs) {
    epochs_json.push_back({{"epoch", e.epoch},
                           {"stage", e.stage},
                           {"loss", e.loss},
                           {"ce_loss", e.ce_loss},
                           {"con_loss", e.con_loss},
                           {"train_acc", e.train_acc},
                           {"val_loss", e.val_loss},
                           {"val_acc", e.val_acc},
                           {"test_acc", e.test_acc},
                           {"mix_pairs", e.mix_pairs}});
  }
  return {{"variant", variant},
          {"seed", config.seed},
          {"config", comgrl::to_json(config)},
          {"noise", {{"lnr", lnr}, {"gnr", gnr}, {"noisy_edges", noisy_edges}}},
          {"epochs", epochs_json},
          {"best_epoch", best_epoch},
          {"best_val_acc", best_val_acc},
          {"test_acc", test_acc},
          {"final_test_acc", final_test_acc},
          {"pretrain_val_acc", pretrain_val_acc},
          {"pretrain_test_acc", pretrain_test_acc},
          {"augmentation",
           {{"refreshes", refreshes},
            {"empty_refreshes", empty_refreshes},
            {"applied", augmentation_applied()},
            {"plan_check_failures", plan_check_failures}}},
          {"wall_time_seconds", wall_time_seconds}};
}

Trainer::Trainer(const Graph& graph, TrainConfig config)
    : graph_(&validated(graph)),
      config_((config.validate(), config)),
      init_rng_(make_stream(config_.seed, Stream::kInit)),
      dropout_rng_(make_stream(config_.seed, Stream::kDropout)),
      mix_rng_(make_stream(config_.seed, Stream::kMixup)),
      model_(model_options(graph, config_), init_rng_),
      optimizer_(model_.parameters(), AdamOptions{.learning_rate = config_.learning_rate,
                                                  .weight_decay = config_.weight_decay}) {
  if (contrastive_active()) {
    base_coefficients_ = contrast_coefficients(graph.adjacency, config_.hop_radius);
  }
  if (!config_.disable_pma && config_.total_epochs > config_.pretrain_epochs) {
    MixupOptions mix;
    mix.hop_radius = config_.hop_radius;
    mix.sharpen_beta = config_.sharpen_beta;
    mix.threshold = config_.threshold;
    mix.lambda = config_.lambda;
    planner_.emplace(graph, mix);
  }
  report_.config = config_;
  report_.variant = variant_name(config_);
}

bool Trainer::contrastive_active() const {
  return config_.alpha > 0.0 && !config_.disable_lgcl;
}

Matrix Trainer::predict() const { return model_.predict(graph_->features); }

double Trainer::evaluate(std::span<const int> nodes) const {
  return accuracy(predict(), graph_->labels, nodes);
}

void Trainer::train_epoch(int epoch, const char* stage, const Matrix& features,
                          const Matrix* coefficients, int mix_pairs) {
  const Graph& g = *graph_;
  ForwardMode mode{.training = true, .dropout = config_.dropout, .rng = &dropout_rng_};
  auto out = model_.forward(Tensor::constant(features), mode);
  Tensor ce = cross_entropy_loss(out.probs, g.labels, g.split.train);
  Tensor loss = ce;
  double con_value = 0.0;
  if (coefficients != nullptr) {
    Tensor con = contrastive_loss(out.embedding, *coefficients, config_.tau,
                                  config_.contrastive_form);
    con_value = con.item();
    loss = total_loss(ce, con, config_.alpha);
  }
  if (!std::isfinite(loss.item())) throw TrainingDiverged(epoch, config_.seed, loss.item());

  optimizer_.zero_grad();
  loss.backward();
  optimizer_.step();

  EpochMetrics m;
  m.epoch = epoch;
  m.stage = stage;
  m.loss = loss.item();
  m.ce_loss = ce.item();
  m.con_loss = con_value;
  m.mix_pairs = mix_pairs;

  last_probs_ = predict();
  m.train_acc = accuracy(last_probs_, g.labels, g.split.train);
  if (!g.split.val.empty()) {
    m.val_acc = accuracy(last_probs_, g.labels, g.split.val);
    m.val_loss = cross_entropy(Tensor::constant(last_probs_), g.labels, g.split.val).item() /
                 static_cast<double>(g.split.val.size());
  }
  if (!g.split.test.empty()) m.test_acc = accuracy(last_probs_, g.labels, g.split.test);
  if (report_.best_epoch < 0 || m.val_acc > report_.best_val_acc) {
    report_.best_epoch = epoch;
    report_.best_val_acc = m.val_acc;
    report_.test_acc = m.test_acc;
  }
  report_.epochs.push_back(std::move(m));
}

PseudoLabels Trainer::pretrain() {
  if (next_epoch_ != 0) throw std::logic_error("Trainer::pretrain: already trained");
  const Matrix* coeffs = contrastive_active() ? &base_coefficients_.weights : nullptr;
  for (; next_epoch_ < config_.pretrain_epochs; ++next_epoch_) {
    train_epoch(next_epoch_, "pretrain", graph_->features, coeffs, 0);
  }
  Matrix probs = predict();
  if (!graph_->split.val.empty()) {
    report_.pretrain_val_acc = accuracy(probs, graph_->labels, graph_->split.val);
  }
  if (!graph_->split.test.empty()) {
    report_.pretrain_test_acc = accuracy(probs, graph_->labels, graph_->split.test);
  }
  return PseudoLabels::from_probabilities(std::move(probs), config_.threshold);
}

void Trainer::refresh_plan(int epoch, const PseudoLabels& pseudo) {
  MixupPlan plan = planner_->plan(pseudo, mix_rng_);
  ++report_.refreshes;
  if (plan.empty()) {
    if (report_.empty_refreshes++ == 0) {
      spdlog::info("epoch {}: no mixup pairs ({} candidates, {} admitted); training on original inputs",
                   epoch, plan.candidate_count, plan.admitted_count);
    }
  }
  if (config_.check_plans || !config_.mixup_dump_dir.empty()) {
    PlanVerdict verdict = check_plan(*graph_, plan, pseudo, config_.hop_radius);
    if (!verdict.ok) {
      ++report_.plan_check_failures;
      spdlog::error("epoch {}: mixup plan failed {} checks, first: {}", epoch,
                    verdict.violations.size(), verdict.violations.front());
    }
    if (!config_.mixup_dump_dir.empty()) {
      std::filesystem::create_directories(config_.mixup_dump_dir);
      std::ofstream out(std::filesystem::path(config_.mixup_dump_dir) /
                        ("mixup_plan_" + std::to_string(epoch) + ".json"));
      out << plan_to_json(plan, verdict, epoch).dump(2) << '\n';
    }
  }
  std::optional<ContrastCoefficients> coeffs;
  if (contrastive_active() && !plan.empty()) {
    coeffs = contrast_coefficients(plan.adjacency, config_.hop_radius);
  }
  // Swap in the complete plan only once everything derived from it exists.
  plan_ = std::move(plan);
  plan_coefficients_ = std::move(coeffs);
}

void Trainer::finetune(const PseudoLabels& pseudo) {
  if (next_epoch_ != config_.pretrain_epochs) {
    throw std::logic_error("Trainer::finetune: pretrain() must run first");
  }
  for (; next_epoch_ < config_.total_epochs; ++next_epoch_) {
    const int step = next_epoch_ - config_.pretrain_epochs;
    if (planner_ && step % config_.refresh_interval == 0) {
      if (step == 0) {
        refresh_plan(next_epoch_, pseudo);
      } else {
        refresh_plan(next_epoch_, PseudoLabels::from_probabilities(last_probs_, config_.threshold));
      }
    }
    const bool mixed = plan_ && !plan_->empty();
    const Matrix& features = mixed ? plan_->features : graph_->features;
    const Matrix* coeffs = nullptr;
    if (contrastive_active()) {
      coeffs = plan_coefficients_ ? &plan_coefficients_->weights : &base_coefficients_.weights;
    }
    train_epoch(next_epoch_, "finetune", features, coeffs,
                mixed ? static_cast<int>(plan_->pairs.size()) : 0);
  }
}

ExperimentReport Trainer::run() {
  const auto start = std::chrono::steady_clock::now();
  PseudoLabels pseudo = pretrain();
  finetune(pseudo);
  if (!graph_->split.test.empty()) {
    report_.final_test_acc = evaluate(graph_->split.test);
    if (report_.best_epoch < 0) report_.test_acc = report_.final_test_acc;
  }
  report_.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report_;
}

const std::vector<std::string>& ablation_variants() {
  static const std::vector<std::string> names{"full", "no-lgcl", "no-gmsa", "no-pma"};
  return names;
}

TrainConfig ablation_variant(const TrainConfig& base, const std::string& variant) {
  TrainConfig c = base;
  if (variant == "full") {
  } else if (variant == "no-lgcl") {
    c.disable_lgcl = true;
  } else if (variant == "no-gmsa") {
    c.disable_gmsa = true;
  } else if (variant == "no-pma") {
    c.disable_pma = true;
  } else if (variant == "mlp") {
    c.alpha = 0.0;
    c.disable_gmsa = true;
    c.disable_pma = true;
  } else {
    throw std::invalid_argument("unknown variant '" + variant + "'");
  }
  return c;
}

}  // namespace comgrl

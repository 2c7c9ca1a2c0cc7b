#include "comgrl/config.hpp"

#include <stdexcept>

namespace comgrl {

void TrainConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("config: " + m); };
  if (alpha < 0.0) fail("alpha must be nonnegative");
  if (!(tau > 0.0)) fail("tau must be positive");
  if (hop_radius < 1) fail("hop_radius must be >= 1");
  if (!(sharpen_beta > 0.0 && sharpen_beta <= 1.0)) fail("sharpen_beta must lie in (0, 1]");
  if (threshold < 0.0 || threshold > 1.0) fail("threshold must lie in [0, 1]");
  if (refresh_interval < 1) fail("refresh_interval must be >= 1");
  if (pretrain_epochs < 0 || pretrain_epochs > total_epochs) {
    fail("require 0 <= pretrain_epochs <= total_epochs");
  }
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (dropout < 0.0 || dropout >= 1.0) fail("dropout must lie in [0, 1)");
  if (weight_decay < 0.0) fail("weight_decay must be nonnegative");
  if (hidden_dim < 1 || num_heads < 1 || hidden_dim % num_heads != 0) {
    fail("hidden_dim must be a positive multiple of heads");
  }
  if (num_layers < 0) fail("layers must be nonnegative");
  if (lambda.kind == LambdaPolicy::Kind::kFixed && (lambda.value < 0.0 || lambda.value > 1.0)) {
    fail("fixed lambda must lie in [0, 1]");
  }
  if (lambda.kind == LambdaPolicy::Kind::kBeta && !(lambda.value > 0.0)) {
    fail("Beta lambda shape must be positive");
  }
}

TrainConfig TrainConfig::preset(std::string_view dataset) {
  struct Row {
    const char* name;
    double alpha, tau;
    int r, t_pre, t_total;
    double lr, dr;
  };
  static constexpr Row kRows[] = {
      {"cora", 1.0, 1.8, 4, 300, 500, 5e-4, 0.4},
      {"citeseer", 0.1, 0.7, 4, 100, 1000, 3e-4, 0.4},
      {"pubmed", 1.0, 1.0, 4, 300, 1000, 4e-4, 0.4},
      {"cs", 1.0, 1.8, 4, 20, 600, 2e-4, 0.1},
      {"physics", 2.0, 1.0, 4, 300, 1000, 4e-4, 0.1},
      {"corafull", 1.0, 2.2, 3, 40, 400, 4e-4, 0.4},
  };
  for (const auto& row : kRows) {
    if (dataset == row.name) {
      TrainConfig c;
      c.alpha = row.alpha;
      c.tau = row.tau;
      c.hop_radius = row.r;
      c.pretrain_epochs = row.t_pre;
      c.total_epochs = row.t_total;
      c.learning_rate = row.lr;
      c.dropout = row.dr;
      return c;
    }
  }
  throw std::invalid_argument("unknown preset '" + std::string(dataset) + "'");
}

const std::vector<std::string>& TrainConfig::preset_names() {
  static const std::vector<std::string> names{"cora", "citeseer", "pubmed",
                                              "cs",   "physics",  "corafull"};
  return names;
}

bool apply_config_key(TrainConfig& c, const std::string& key, const nlohmann::json& v) {
  try {
    if (key == "preset") {
      const TrainConfig base = TrainConfig::preset(v.get<std::string>());
      c.alpha = base.alpha;
      c.tau = base.tau;
      c.hop_radius = base.hop_radius;
      c.pretrain_epochs = base.pretrain_epochs;
      c.total_epochs = base.total_epochs;
      c.learning_rate = base.learning_rate;
      c.dropout = base.dropout;
    } else if (key == "alpha") c.alpha = v.get<double>();
    else if (key == "tau") c.tau = v.get<double>();
    else if (key == "hop_radius") c.hop_radius = v.get<int>();
    else if (key == "contrastive_log_variant") {
      c.contrastive_form = v.get<bool>() ? ContrastiveForm::kLog : ContrastiveForm::kRatio;
    } else if (key == "sharpen_beta") c.sharpen_beta = v.get<double>();
    else if (key == "lambda_policy") {
      const auto s = v.get<std::string>();
      if (s == "beta") c.lambda.kind = LambdaPolicy::Kind::kBeta;
      else if (s == "fixed") c.lambda.kind = LambdaPolicy::Kind::kFixed;
      else throw std::invalid_argument("lambda_policy must be \"beta\" or \"fixed\"");
    } else if (key == "lambda_value") c.lambda.value = v.get<double>();
    else if (key == "threshold") c.threshold = v.get<double>();
    else if (key == "refresh_interval") c.refresh_interval = v.get<int>();
    else if (key == "pretrain_epochs") c.pretrain_epochs = v.get<int>();
    else if (key == "total_epochs") c.total_epochs = v.get<int>();
    else if (key == "learning_rate") c.learning_rate = v.get<double>();
    else if (key == "dropout") c.dropout = v.get<double>();
    else if (key == "weight_decay") c.weight_decay = v.get<double>();
    else if (key == "hidden_dim") c.hidden_dim = v.get<int>();
    else if (key == "heads") c.num_heads = v.get<int>();
    else if (key == "layers") c.num_layers = v.get<int>();
    else if (key == "attention") {
      const auto s = v.get<std::string>();
      if (s == "efficient") c.attention_mode = AttentionMode::kEfficient;
      else if (s == "standard") c.attention_mode = AttentionMode::kStandard;
      else throw std::invalid_argument("attention must be \"efficient\" or \"standard\"");
    } else if (key == "disable_lgcl") c.disable_lgcl = v.get<bool>();
    else if (key == "disable_gmsa") c.disable_gmsa = v.get<bool>();
    else if (key == "disable_pma") c.disable_pma = v.get<bool>();
    else if (key == "check_plans") c.check_plans = v.get<bool>();
    else if (key == "mixup_dump_dir") c.mixup_dump_dir = v.get<std::string>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else return false;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config key '" + key + "': " + e.what());
  }
  return true;
}

nlohmann::json to_json(const TrainConfig& c) {
  return {
      {"alpha", c.alpha},
      {"tau", c.tau},
      {"hop_radius", c.hop_radius},
      {"contrastive_log_variant", c.contrastive_form == ContrastiveForm::kLog},
      {"sharpen_beta", c.sharpen_beta},
      {"lambda_policy", c.lambda.kind == LambdaPolicy::Kind::kBeta ? "beta" : "fixed"},
      {"lambda_value", c.lambda.value},
      {"threshold", c.threshold},
      {"refresh_interval", c.refresh_interval},
      {"pretrain_epochs", c.pretrain_epochs},
      {"total_epochs", c.total_epochs},
      {"learning_rate", c.learning_rate},
      {"dropout", c.dropout},
      {"weight_decay", c.weight_decay},
      {"hidden_dim", c.hidden_dim},
      {"heads", c.num_heads},
      {"layers", c.num_layers},
      {"attention", c.attention_mode == AttentionMode::kEfficient ? "efficient" : "standard"},
      {"disable_lgcl", c.disable_lgcl},
      {"disable_gmsa", c.disable_gmsa},
      {"disable_pma", c.disable_pma},
      {"check_plans", c.check_plans},
      {"mixup_dump_dir", c.mixup_dump_dir},
      {"seed", c.seed},
  };
}

TrainConfig config_from_json(const nlohmann::json& object, TrainConfig base) {
  if (!object.is_object()) throw std::invalid_argument("config: expected a JSON object");
  // A preset must land first so explicit keys can override it.
  if (object.contains("preset")) apply_config_key(base, "preset", object.at("preset"));
  for (const auto& [key, value] : object.items()) {
    if (key == "preset") continue;
    if (!apply_config_key(base, key, value)) {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  return base;
}

}  // namespace comgrl

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>
#include <set>

#include "experiment.hpp"

using namespace comgrl;
using namespace comgrl::cli;
using nlohmann::json;

namespace {

json read_json(const std::string& text_or_path) {
  if (!text_or_path.empty() && text_or_path.front() == '{') return json::parse(text_or_path);
  std::ifstream in(text_or_path);
  if (!in) throw std::invalid_argument("cannot open " + text_or_path);
  return json::parse(in);
}

struct Options {
  std::string config_file;
  std::string preset;
  std::string dataset;
  std::string sbm;
  std::vector<std::uint64_t> seeds;
  std::string out = "runs";
  std::vector<std::string> overrides;  // key=value
  bool disable_lgcl = false, disable_gmsa = false, disable_pma = false;
  std::optional<double> lnr, gnr, threshold;
  std::optional<int> refresh_interval;
  std::string graph_noise_mode;
  bool log_contrastive = false;
  bool check_plans = false;
  std::string dump_mixup;
  int jobs = 1;
  std::vector<std::string> variants;
};

struct Resolved {
  TrainConfig config;
  DataSource source;
  std::vector<std::uint64_t> seeds{0};
  NoiseSpec noise;
};

// Precedence: preset, then the config file, then flags.
Resolved resolve(const Options& o) {
  Resolved r;
  json file = json::object();
  if (!o.config_file.empty()) file = read_json(o.config_file);
  if (!file.is_object()) throw std::invalid_argument("config file must hold a JSON object");

  json train_keys = json::object();
  if (!o.preset.empty()) train_keys["preset"] = o.preset;
  for (const auto& [key, v] : file.items()) {
    if (key == "dataset") r.source.directory = v.get<std::string>();
    else if (key == "sbm") r.source.sbm = sbm_from_json(v);
    else if (key == "seeds") r.seeds = v.get<std::vector<std::uint64_t>>();
    else if (key == "lnr") r.noise.lnr = v.get<double>();
    else if (key == "gnr") r.noise.gnr = v.get<double>();
    else if (key == "graph_noise_mode") {
      const auto s = v.get<std::string>();
      if (s == "add") r.noise.mode = GraphNoiseMode::kAdd;
      else if (s == "rewire") r.noise.mode = GraphNoiseMode::kRewire;
      else throw std::invalid_argument("graph_noise_mode must be \"add\" or \"rewire\"");
    } else if (key == "preset" && !o.preset.empty()) {
      continue;
    } else {
      train_keys[key] = v;
    }
  }
  r.config = config_from_json(train_keys);

  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got " + kv);
    const std::string key = kv.substr(0, eq), text = kv.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    if (!apply_config_key(r.config, key, value))
      throw std::invalid_argument("unknown config key '" + key + "'");
  }
  if (!o.dataset.empty()) {
    r.source.directory = o.dataset;
    r.source.sbm.reset();
  }
  if (!o.sbm.empty()) {
    r.source.sbm = sbm_from_json(read_json(o.sbm));
    r.source.directory.reset();
  }
  if (!o.seeds.empty()) r.seeds = o.seeds;
  if (o.disable_lgcl) r.config.disable_lgcl = true;
  if (o.disable_gmsa) r.config.disable_gmsa = true;
  if (o.disable_pma) r.config.disable_pma = true;
  if (o.threshold) r.config.threshold = *o.threshold;
  if (o.refresh_interval) r.config.refresh_interval = *o.refresh_interval;
  if (o.log_contrastive) r.config.contrastive_form = ContrastiveForm::kLog;
  if (o.check_plans) r.config.check_plans = true;
  if (!o.dump_mixup.empty()) r.config.mixup_dump_dir = o.dump_mixup;
  if (o.lnr) r.noise.lnr = *o.lnr;
  if (o.gnr) r.noise.gnr = *o.gnr;
  if (o.graph_noise_mode == "rewire") r.noise.mode = GraphNoiseMode::kRewire;
  else if (o.graph_noise_mode == "add") r.noise.mode = GraphNoiseMode::kAdd;

  r.config.validate();
  if (r.seeds.empty()) throw std::invalid_argument("at least one seed is required");
  if (std::set(r.seeds.begin(), r.seeds.end()).size() != r.seeds.size())
    throw std::invalid_argument("duplicate seeds");
  if (r.noise.lnr < 0.0 || r.noise.lnr > 1.0) throw std::invalid_argument("lnr must be in [0, 1]");
  if (r.noise.gnr < 0.0) throw std::invalid_argument("gnr must be >= 0");
  if (!r.source.directory && !r.source.sbm)
    throw std::invalid_argument("no dataset: pass --dataset, --sbm or a config entry");
  return r;
}

std::string variant_name(const TrainConfig& c) {
  std::string name;
  if (c.disable_lgcl) name += "no-lgcl+";
  if (c.disable_gmsa) name += "no-gmsa+";
  if (c.disable_pma) name += "no-pma+";
  if (name.empty()) return "full";
  name.pop_back();
  return name;
}

int finish(const std::vector<std::vector<SeedOutcome>>& sets) {
  for (const auto& set : sets)
    for (const auto& o : set)
      if (o.report) return 0;
  spdlog::error("every seed diverged");
  return 3;
}

int cmd_train(const Options& o, bool noise_required) {
  Resolved r = resolve(o);
  if (noise_required && !r.noise.active())
    throw std::invalid_argument("noise needs --lnr and/or --gnr");
  const std::string variant = variant_name(r.config);
  auto outcomes = run_seeds(r.source, r.config, variant, r.seeds, r.noise, o.jobs);
  write_reports(o.out, variant, outcomes);
  auto agg = aggregate(variant, outcomes);
  std::cout << agg.dump(2) << '\n';
  return finish({outcomes});
}

int cmd_ablate(const Options& o) {
  Resolved r = resolve(o);
  const auto variants = o.variants.empty() ? ablation_variants() : o.variants;
  std::vector<std::vector<SeedOutcome>> sets;
  json summary = json::object();
  for (const auto& v : variants) {
    TrainConfig c = ablation_variant(r.config, v);
    sets.push_back(run_seeds(r.source, c, v, r.seeds, r.noise, o.jobs));
    write_reports(std::filesystem::path(o.out) / v, v, sets.back());
    summary[v] = aggregate(v, sets.back());
  }
  std::ofstream(std::filesystem::path(o.out) / "summary.json") << summary.dump(2) << '\n';
  std::cout << summary.dump(2) << '\n';
  return finish(sets);
}

int cmd_gen(const Options& o) {
  SbmSpec spec;
  if (!o.config_file.empty()) {
    json file = read_json(o.config_file);
    spec = sbm_from_json(file.contains("sbm") ? file.at("sbm") : file);
  }
  if (!o.sbm.empty()) spec = sbm_from_json(read_json(o.sbm), spec);
  Graph g = generate_sbm(spec);
  save_dataset(g, o.out);
  spdlog::info("wrote {} nodes, {} edges to {}", g.num_nodes(), g.num_edges(), o.out);
  return 0;
}

void add_common(CLI::App* app, Options& o) {
  app->add_option("--config", o.config_file, "Flat JSON config file");
  app->add_option("--preset", o.preset, "Dataset preset (cora, citeseer, pubmed, cs, physics, corafull)");
  app->add_option("--dataset", o.dataset, "Dataset directory");
  app->add_option("--sbm", o.sbm, "SBM spec: JSON file or inline object");
  app->add_option("--seeds", o.seeds, "Comma-separated seeds")->delimiter(',');
  app->add_option("--out", o.out, "Output directory");
  app->add_option("--set", o.overrides, "Config override key=value (repeatable)");
  app->add_flag("--disable-lgcl", o.disable_lgcl);
  app->add_flag("--disable-gmsa", o.disable_gmsa);
  app->add_flag("--disable-pma", o.disable_pma);
  app->add_option("--lnr", o.lnr, "Label noise ratio");
  app->add_option("--gnr", o.gnr, "Graph noise ratio");
  app->add_option("--graph-noise-mode", o.graph_noise_mode)->check(CLI::IsMember({"add", "rewire"}));
  app->add_option("--refresh-interval", o.refresh_interval, "Epochs between mixup plan rebuilds");
  app->add_option("--threshold", o.threshold, "Pseudo-label confidence threshold");
  app->add_flag("--log-contrastive", o.log_contrastive, "Use the log form of the contrastive loss");
  app->add_flag("--check-plans", o.check_plans, "Audit every mixup plan");
  app->add_option("--dump-mixup", o.dump_mixup, "Directory for mixup plan dumps");
  app->add_option("--jobs", o.jobs, "Parallel seed workers")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"comgrl: graph node classification experiments"};
  app.require_subcommand(1);
  Options o;
  auto* train = app.add_subcommand("train", "Train one configuration over seeds");
  auto* ablate = app.add_subcommand("ablate", "Train each ablation variant over shared seeds");
  auto* noise = app.add_subcommand("noise", "Train on a graph with injected label/edge noise");
  auto* gen = app.add_subcommand("gen", "Write a synthetic SBM dataset");
  add_common(train, o);
  add_common(ablate, o);
  ablate->add_option("--variants", o.variants, "Subset of full,no-lgcl,no-gmsa,no-pma,mlp")
      ->delimiter(',');
  add_common(noise, o);
  gen->add_option("--config", o.config_file, "JSON file holding an sbm block");
  gen->add_option("--sbm", o.sbm, "SBM spec: JSON file or inline object");
  gen->add_option("--out", o.out, "Output directory")->required();
  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(o, false);
    if (*noise) return cmd_train(o, true);
    if (*ablate) return cmd_ablate(o);
    if (*gen) return cmd_gen(o);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}

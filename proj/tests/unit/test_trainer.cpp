#include <comgrl/data.hpp>
#include <comgrl/ops.hpp>
#include <comgrl/trainer.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "support/oracles.hpp"

using namespace comgrl;

namespace {

// Small SBM that trains in well under a second.
Graph small_sbm(std::uint64_t seed = 3) {
  SbmSpec s;
  s.num_classes = 3;
  s.nodes_per_class = 30;
  s.p_in = 0.15;
  s.p_out = 0.01;
  s.feature_dim = 6;
  s.separation = 2.0;
  s.labels_per_class = 4;
  s.val_size = 18;
  s.seed = seed;
  return generate_sbm(s);
}

TrainConfig small_config() {
  TrainConfig c;
  c.hidden_dim = 8;
  c.num_heads = 2;
  c.hop_radius = 1;
  c.pretrain_epochs = 6;
  c.total_epochs = 12;
  c.learning_rate = 5e-3;
  c.dropout = 0.2;
  c.threshold = 0.4;
  c.seed = 7;
  return c;
}

std::vector<double> losses(const ExperimentReport& r) {
  std::vector<double> out;
  for (const auto& e : r.epochs) out.push_back(e.loss);
  return out;
}

}  // namespace

TEST(TotalLoss, Arithmetic) {
  Tensor ce = Tensor::constant(Matrix::Constant(1, 1, 2.0));
  Tensor con = Tensor::constant(Matrix::Constant(1, 1, -0.5));
  EXPECT_DOUBLE_EQ(total_loss(ce, con, 1.0).item(), 1.5);
  EXPECT_EQ(total_loss(ce, con, 0.0).item(), 2.0);
  Tensor zero = Tensor::constant(Matrix::Zero(1, 1));
  EXPECT_EQ(total_loss(ce, zero, 3.0).item(), 2.0);
  EXPECT_THROW(total_loss(ce, con, -1.0), std::invalid_argument);
}

TEST(Accuracy, Examples) {
  Matrix leaked = Matrix::Zero(4, 4);
  std::vector<int> labels{0, 1, 2, 3}, nodes{0, 1, 2, 3};
  for (int i = 0; i < 4; ++i) leaked(i, labels[i]) = 1.0;
  EXPECT_EQ(accuracy(leaked, labels, nodes), 100.0);
  Matrix constant = Matrix::Zero(4, 4);
  constant.col(0).setOnes();
  EXPECT_EQ(accuracy(constant, labels, nodes), 25.0);
  EXPECT_THROW(accuracy(constant, labels, {}), std::invalid_argument);
}

TEST(Accuracy, InvariantUnderRenumbering) {
  std::mt19937_64 rng(2);
  Matrix p = oracle::row_softmax(oracle::random_matrix(20, 3, rng));
  std::vector<int> labels(20);
  for (int i = 0; i < 20; ++i) labels[i] = i % 3;
  std::vector<int> perm(20);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix pp(20, 3);
  std::vector<int> lp(20);
  for (int i = 0; i < 20; ++i) {
    pp.row(i) = p.row(perm[i]);
    lp[i] = labels[perm[i]];
  }
  std::vector<int> nodes(20);
  std::iota(nodes.begin(), nodes.end(), 0);
  EXPECT_EQ(accuracy(p, labels, nodes), accuracy(pp, lp, nodes));
}

TEST(Trainer, ZeroPretrainGivesUntrainedSnapshot) {
  Graph g = small_sbm();
  TrainConfig c = small_config();
  c.pretrain_epochs = 0;
  Trainer t(g, c);
  Matrix before = t.predict();
  PseudoLabels pseudo = t.pretrain();
  EXPECT_EQ(pseudo.probs, before);
  EXPECT_TRUE(t.report().epochs.empty());
}

TEST(Trainer, SeparableToyReachesFullTrainAccuracy) {
  Graph g;
  g.num_classes = 2;
  const int n = 20;
  g.features = Matrix::Zero(n, 2);
  for (int i = 0; i < n; ++i) {
    g.labels.push_back(i % 2);
    g.features(i, i % 2) = 1.0 + 0.1 * i;
    g.features(i, 1 - i % 2) = -0.5;
  }
  g.adjacency = Adjacency(n, n);
  for (int i = 0; i < n; ++i) (i < 12 ? g.split.train : g.split.test).push_back(i);
  TrainConfig c = small_config();
  c.alpha = 0.0;
  c.dropout = 0.0;
  c.pretrain_epochs = c.total_epochs = 50;
  c.learning_rate = 1e-2;
  Trainer t(g, c);
  auto report = t.run();
  EXPECT_EQ(report.epochs.back().train_acc, 100.0);
}

TEST(Trainer, LossesFiniteAndAccuraciesInRange) {
  Graph g = small_sbm();
  auto report = Trainer(g, small_config()).run();
  ASSERT_EQ(report.epochs.size(), 12u);
  for (const auto& e : report.epochs) {
    EXPECT_TRUE(std::isfinite(e.loss));
    EXPECT_TRUE(std::isfinite(e.con_loss));
    for (double acc : {e.train_acc, e.val_acc, e.test_acc}) {
      EXPECT_GE(acc, 0.0);
      EXPECT_LE(acc, 100.0);
    }
  }
  EXPECT_GE(report.best_epoch, 0);
  EXPECT_EQ(report.test_acc, report.epochs[report.best_epoch].test_acc);
}

TEST(Trainer, DisabledPmaEqualsContinuedPretraining) {
  Graph g = small_sbm();
  TrainConfig a = small_config();
  a.disable_pma = true;
  TrainConfig b = small_config();
  b.pretrain_epochs = b.total_epochs;
  EXPECT_EQ(losses(Trainer(g, a).run()), losses(Trainer(g, b).run()));
}

TEST(Trainer, InertPmaLeavesTrajectoryUnchanged) {
  // A threshold above every confidence admits no candidates, so PMA has
  // nothing to do and must not disturb any RNG stream.
  Graph g = small_sbm();
  TrainConfig a = small_config();
  a.threshold = 1.0;
  TrainConfig b = small_config();
  b.disable_pma = true;
  auto ra = Trainer(g, a).run();
  EXPECT_EQ(losses(ra), losses(Trainer(g, b).run()));
  EXPECT_EQ(ra.refreshes, ra.empty_refreshes);
  EXPECT_FALSE(ra.augmentation_applied());
}

TEST(Trainer, ZeroAlphaMatchesDisabledContrastive) {
  Graph g = small_sbm();
  TrainConfig a = small_config();
  a.alpha = 0.0;
  auto r = Trainer(g, a).run();
  for (const auto& e : r.epochs) EXPECT_EQ(e.loss, e.ce_loss);
}

TEST(Trainer, DeterministicPerSeed) {
  Graph g = small_sbm();
  auto a = Trainer(g, small_config()).run();
  auto b = Trainer(g, small_config()).run();
  a.wall_time_seconds = b.wall_time_seconds = 0.0;
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
  TrainConfig other = small_config();
  other.seed = 8;
  EXPECT_NE(losses(a), losses(Trainer(g, other).run()));
}

TEST(Trainer, EvaluationIsSideEffectFree) {
  Graph g = small_sbm();
  Trainer t(g, small_config());
  t.run();
  Matrix first = t.predict();
  const double acc = t.evaluate(g.split.test);
  EXPECT_EQ(t.predict(), first);
  EXPECT_EQ(t.evaluate(g.split.test), acc);
}

TEST(Trainer, MixupPlansPassChecker) {
  Graph g = small_sbm();
  TrainConfig c = small_config();
  c.check_plans = true;
  auto r = Trainer(g, c).run();
  EXPECT_EQ(r.refreshes, c.total_epochs - c.pretrain_epochs);
  EXPECT_EQ(r.plan_check_failures, 0);
}

TEST(Trainer, PhaseOrderEnforced) {
  Graph g = small_sbm();
  Trainer t(g, small_config());
  PseudoLabels fake = PseudoLabels::from_probabilities(Matrix::Ones(g.num_nodes(), 3) / 3.0, 0.8);
  EXPECT_THROW(t.finetune(fake), std::logic_error);
  t.pretrain();
  EXPECT_THROW(t.pretrain(), std::logic_error);
}

TEST(Trainer, DivergenceReportsSeed) {
  Graph g = small_sbm();
  g.features(0, 0) = std::nan("");
  TrainConfig c = small_config();
  try {
    Trainer(g, c).run();
    FAIL() << "expected TrainingDiverged";
  } catch (const TrainingDiverged& e) {
    EXPECT_EQ(e.seed(), c.seed);
    EXPECT_EQ(e.epoch(), 0);
  }
}

TEST(Ablation, VariantsToggleOneSwitch) {
  TrainConfig base = small_config();
  EXPECT_TRUE(ablation_variant(base, "no-lgcl").disable_lgcl);
  EXPECT_TRUE(ablation_variant(base, "no-gmsa").disable_gmsa);
  EXPECT_TRUE(ablation_variant(base, "no-pma").disable_pma);
  auto mlp = ablation_variant(base, "mlp");
  EXPECT_EQ(mlp.alpha, 0.0);
  EXPECT_TRUE(mlp.disable_gmsa && mlp.disable_pma && !mlp.disable_lgcl);
  EXPECT_THROW(ablation_variant(base, "bogus"), std::invalid_argument);
  Graph g = small_sbm();
  EXPECT_EQ(Trainer(g, ablation_variant(base, "no-pma")).run().variant, "no-pma");
}

TEST(Ablation, NoLgclDropsContrastiveTerm) {
  Graph g = small_sbm();
  auto r = Trainer(g, ablation_variant(small_config(), "no-lgcl")).run();
  for (const auto& e : r.epochs) {
    EXPECT_EQ(e.con_loss, 0.0);
    EXPECT_EQ(e.loss, e.ce_loss);
  }
}

TEST(Config, PresetsFromSettingsTable) {
  auto cora = TrainConfig::preset("cora");
  EXPECT_EQ(cora.alpha, 1.0);
  EXPECT_EQ(cora.tau, 1.8);
  EXPECT_EQ(cora.hop_radius, 4);
  EXPECT_EQ(cora.pretrain_epochs, 300);
  EXPECT_EQ(cora.total_epochs, 500);
  EXPECT_EQ(cora.learning_rate, 5e-4);
  EXPECT_EQ(cora.dropout, 0.4);
  auto cs = TrainConfig::preset("cs");
  EXPECT_EQ(cs.pretrain_epochs, 20);
  EXPECT_EQ(cs.total_epochs, 600);
  EXPECT_EQ(cs.dropout, 0.1);
  auto corafull = TrainConfig::preset("corafull");
  EXPECT_EQ(corafull.hop_radius, 3);
  EXPECT_EQ(corafull.tau, 2.2);
  for (const auto& name : TrainConfig::preset_names()) EXPECT_NO_THROW(TrainConfig::preset(name).validate());
  EXPECT_THROW(TrainConfig::preset("imagenet"), std::invalid_argument);
}

TEST(Config, JsonRoundTripAndUnknownKeys) {
  TrainConfig c = small_config();
  c.contrastive_form = ContrastiveForm::kLog;
  c.lambda = {LambdaPolicy::Kind::kFixed, 0.25};
  auto back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_THROW(config_from_json(nlohmann::json{{"alpah", 1.0}}), std::invalid_argument);
  EXPECT_THROW(config_from_json(nlohmann::json{{"alpha", "one"}}), std::invalid_argument);
  auto p = config_from_json(nlohmann::json{{"tau", 0.5}, {"preset", "citeseer"}});
  EXPECT_EQ(p.tau, 0.5);
  EXPECT_EQ(p.alpha, 0.1);
}

TEST(Config, ValidateRejectsBadValues) {
  TrainConfig c;
  c.pretrain_epochs = 10;
  c.total_epochs = 5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = TrainConfig{};
  c.hidden_dim = 10;
  c.num_heads = 3;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = TrainConfig{};
  c.dropout = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

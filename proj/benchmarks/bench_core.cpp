#include <benchmark/benchmark.h>
#include <comgrl/data.hpp>
#include <comgrl/gmsa.hpp>
#include <comgrl/graph.hpp>
#include <comgrl/lgcl.hpp>
#include <comgrl/ops.hpp>

#include <malloc.h>
#include <random>

using namespace comgrl;

namespace {

constexpr int kWidth = 64;

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

AttentionHead head(int width, std::uint64_t seed) {
  const double s = 1.0 / std::sqrt(width);
  return {Tensor::parameter(random_matrix(width, width, seed) * s),
          Tensor::parameter(random_matrix(width, width, seed + 1) * s),
          Tensor::parameter(random_matrix(width, width, seed + 2) * s)};
}

Graph sbm(int n) {
  SbmSpec s;
  s.num_classes = 4;
  s.nodes_per_class = n / 4;
  s.p_in = 20.0 / s.nodes_per_class;
  s.p_out = 2.0 / n;
  s.val_size = 0;
  s.labels_per_class = 1;
  return generate_sbm(s);
}

}  // namespace

static void BM_EfficientAttention(benchmark::State& state) {
  const auto n = state.range(0);
  Tensor z = Tensor::constant(random_matrix(n, kWidth, 1));
  auto h = head(kWidth, 2);
  for (auto _ : state) benchmark::DoNotOptimize(efficient_attention(z, h).value().data());
  state.SetComplexityN(n);
}
BENCHMARK(BM_EfficientAttention)->RangeMultiplier(2)->Range(1000, 8000)->Complexity()
    ->Unit(benchmark::kMillisecond);

static void BM_StandardAttention(benchmark::State& state) {
  const auto n = state.range(0);
  Tensor z = Tensor::constant(random_matrix(n, kWidth, 1));
  auto h = head(kWidth, 2);
  for (auto _ : state) benchmark::DoNotOptimize(standard_attention(z, h).value().data());
  state.SetComplexityN(n);
}
BENCHMARK(BM_StandardAttention)->RangeMultiplier(2)->Range(1000, 4000)->Complexity()
    ->Unit(benchmark::kMillisecond);

static void BM_EfficientAttentionBackward(benchmark::State& state) {
  const auto n = state.range(0);
  Tensor z = Tensor::parameter(random_matrix(n, kWidth, 1));
  auto h = head(kWidth, 2);
  for (auto _ : state) {
    Tensor loss = sum(efficient_attention(z, h));
    loss.backward();
  }
}
BENCHMARK(BM_EfficientAttentionBackward)->Arg(2000)->Arg(4000)->Unit(benchmark::kMillisecond);

static void BM_ContrastiveLoss(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  Graph g = sbm(n);
  auto coeffs = contrast_coefficients(g.adjacency, 1);
  Tensor emb = Tensor::parameter(random_matrix(n, kWidth, 3));
  const auto form = state.range(1) ? ContrastiveForm::kLog : ContrastiveForm::kRatio;
  for (auto _ : state) {
    Tensor loss = contrastive_loss(emb, coeffs.weights, 0.5, form);
    loss.backward();
  }
}
BENCHMARK(BM_ContrastiveLoss)->ArgsProduct({{500, 1000, 2000}, {0, 1}})
    ->Unit(benchmark::kMillisecond);

static void BM_NormalizedAdjacencyPower(benchmark::State& state) {
  Graph g = sbm(static_cast<int>(state.range(0)));
  const int r = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(normalized_adjacency_power(g.adjacency, r).data());
}
BENCHMARK(BM_NormalizedAdjacencyPower)->ArgsProduct({{1000, 2708}, {1, 4}})
    ->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}

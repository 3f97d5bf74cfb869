#include <benchmark/benchmark.h>

#include "dcvae/dcvae.hpp"

using namespace dcvae;

namespace {

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Tensor a = normal_tensor({64, n}, rng, 1.0);
  const Tensor b = normal_tensor({n, n}, rng, 1.0);
  for (auto _ : state) {
    Tape t;
    benchmark::DoNotOptimize(matmul(t.constant(a), t.constant(b)).value()[0]);
  }
  state.SetItemsProcessed(state.iterations() * 64 * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_Matmul)->Arg(128)->Arg(600)->Arg(1200);

void BM_GroupMmd(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  Tape t;
  const Var z = t.variable(normal_tensor({rows, 16}, rng, 1.0));
  std::vector<int> labels(rows);
  for (std::size_t i = 0; i < rows; ++i) labels[i] = static_cast<int>(i % 10);
  for (auto _ : state) {
    Tape local;
    const Var zz = local.variable(z.value());
    const GroupMmd g = group_mmd(zz, labels, {0.03});
    local.backward(g.value);
    benchmark::DoNotOptimize(local.grad(zz)[0]);
  }
}
BENCHMARK(BM_GroupMmd)->Arg(128)->Arg(512);

// One Adam step of the default architecture on a default-size siamese batch.
void BM_TrainStep(benchmark::State& state) {
  SynthConfig sc;
  sc.n_subjects = 2;
  const Dataset data = generate(sc).dataset;
  HyperParams hp = RunConfig{}.hyper_params();
  Model model(hp.model, 0);
  const auto pairs = generate_pairs(data, hp.batch_size, hp.positive_fraction, 1);
  const PairBatch batch = batch_pairs(data, pairs, hp.batch_size, 1, 0).front();
  Rng rng(3);
  const Tensor na = normal_tensor({hp.batch_size, hp.model.dim_z}, rng, 1.0);
  const Tensor nb = normal_tensor({hp.batch_size, hp.model.dim_z}, rng, 1.0);
  const auto params = model.parameters();
  AdamState adam = make_adam_state(params);
  for (auto _ : state) {
    Tape t;
    const BatchObjective obj = batch_objective(model, t, batch, hp, na, nb);
    for (Parameter* p : params) p->zero_grad();
    t.backward(obj.loss);
    adam_step(params, adam, hp.adam);
    benchmark::DoNotOptimize(obj.diagnostics.total);
  }
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

void BM_ProbeFit(benchmark::State& state) {
  Rng rng(4);
  const Tensor x = normal_tensor({1800, 16}, rng, 1.0);
  std::vector<int> y(1800);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>(i % 10);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_probe({x, Split::train}, y, 0, {200, 1e-5}).iterations);
  }
}
BENCHMARK(BM_ProbeFit)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

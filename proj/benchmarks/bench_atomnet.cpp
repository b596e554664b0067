// Microbenchmarks for the pipeline stages: arrangement enumeration, the
// splitting solver on each program kind, the dictionary-LP reference, a
// fixed slice of gradient-descent work, and batched prediction.
#include <benchmark/benchmark.h>

#include <string>

#include "atomnet/dataset.hpp"
#include "atomnet/gd.hpp"
#include "atomnet/network.hpp"
#include "atomnet/oracle.hpp"
#include "atomnet/patterns.hpp"
#include "atomnet/programs.hpp"
#include "atomnet/solver.hpp"

using namespace atomnet;

namespace {

DataSet load_data(const std::string& name) {
  return load_dataset(std::string(ATOMNET_DATA_DIR) + "/" + name);
}

DataSet load_corpus(const std::string& name) {
  return load_dataset(std::string(ATOMNET_CORPUS_DIR) + "/" + name);
}

void bm_enumerate_line6(benchmark::State& state) {
  const DataSet data = load_data("interp_1d.csv");
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_patterns(data));
}
BENCHMARK(bm_enumerate_line6)->Unit(benchmark::kMillisecond);

void bm_enumerate_plane8(benchmark::State& state) {
  const DataSet data = load_corpus("rand_2d_8.csv");
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_patterns(data));
}
BENCHMARK(bm_enumerate_plane8)->Unit(benchmark::kMillisecond);

void bm_solve_weights(benchmark::State& state) {
  const DataSet data = load_data("interp_1d.csv");
  const PatternSet set = enumerate_patterns(data);
  const ConicProgram program = build_weights_interp(data, set, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve(program));
}
BENCHMARK(bm_solve_weights)->Unit(benchmark::kMillisecond);

void bm_solve_joint(benchmark::State& state) {
  const DataSet data = load_data("interp_1d.csv");
  const PatternSet set = enumerate_patterns(data);
  const ConicProgram program = build_joint_interp(data, set, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve(program));
}
BENCHMARK(bm_solve_joint)->Unit(benchmark::kMillisecond);

void bm_solve_margin(benchmark::State& state) {
  const DataSet data = load_data("xor_2d.csv");
  const PatternSet set = enumerate_patterns(data);
  const ConicProgram program = build_margin_classify(data, set, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve(program));
}
BENCHMARK(bm_solve_margin)->Unit(benchmark::kMillisecond);

void bm_oracle_weights(benchmark::State& state) {
  const DataSet data = load_data("interp_1d.csv");
  for (auto _ : state)
    benchmark::DoNotOptimize(atomic_lp(data, ProgramKind::WeightsInterp, 0.0, 1e-2));
}
BENCHMARK(bm_oracle_weights)->Unit(benchmark::kMillisecond);

void bm_gd_fixed_epochs(benchmark::State& state) {
  const DataSet data = load_data("interp_1d.csv");
  GdConfig cfg;
  cfg.hidden = 200;
  cfg.max_epochs = 200;
  cfg.target_loss = 0.0;  // never stop early; measure a fixed slice of work
  for (auto _ : state) benchmark::DoNotOptimize(train_gd(data, cfg));
}
BENCHMARK(bm_gd_fixed_epochs)->Unit(benchmark::kMillisecond);

void bm_predict_grid(benchmark::State& state) {
  const DataSet data = load_data("xor_2d.csv");
  const PatternSet set = enumerate_patterns(data);
  const FiniteNetwork net = reconstruct(solve(build_margin_classify(data, set, 0.0)),
                                        set, 0.0);
  const Eigen::MatrixXd grid = grid_2d(-1.0, 1.0, -1.0, 1.0, 0.02);
  for (auto _ : state) benchmark::DoNotOptimize(predict_many(net, grid));
}
BENCHMARK(bm_predict_grid)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

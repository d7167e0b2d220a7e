#include <benchmark/benchmark.h>

#include <memory>
#include <random>
#include <string>

#include "lmm/bootstrap.hpp"
#include "lmm/cholesky.hpp"
#include "lmm/cli/csv.hpp"
#include "lmm/fit.hpp"

using namespace lmm;

namespace {

const DataTable& sleepstudy() {
  static const DataTable t = cli::read_csv(std::string(LMM_TEST_DATA_DIR) + "/sleepstudy.csv");
  return t;
}

const char* kFm1 = "Reaction ~ Days + (Days|Subject)";

void BM_FitSleepstudy(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(fit_model(kFm1, sleepstudy()).criterion);
}
BENCHMARK(BM_FitSleepstudy)->Unit(benchmark::kMillisecond);

void BM_DevianceEvaluation(benchmark::State& state) {
  auto spec = std::make_shared<const ModelSpec>(build_spec(kFm1, sleepstudy()));
  DevState st(spec);
  const Eigen::VectorXd theta = (Eigen::VectorXd(3) << 0.97, 0.015, 0.23).finished();
  for (auto _ : state) benchmark::DoNotOptimize(st.evaluate(theta));
}
BENCHMARK(BM_DevianceEvaluation)->Unit(benchmark::kMicrosecond);

// Random sparse SPD system of the given order with about four nonzeros per column.
void BM_CholeskyFactorize(benchmark::State& state) {
  const Index n = state.range(0);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<Index> row(0, n - 1);
  std::normal_distribution<double> z;
  std::vector<Triplet> t;
  for (Index j = 0; j < n; ++j) {
    t.push_back({j, j, 1.0});
    for (int k = 0; k < 3; ++k) t.push_back({row(rng), j, z(rng)});
  }
  const SparseCsc a = tcrossprod(SparseCsc::from_triplets(n, n, t));
  CholFactor f = CholFactor::analyze(a, Ordering::Amd);
  for (auto _ : state) {
    f.factorize(a, 1.0);
    benchmark::DoNotOptimize(f.logdet2());
  }
}
BENCHMARK(BM_CholeskyFactorize)->Arg(200)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_Bootstrap(benchmark::State& state) {
  const FitResult f = fit_model(kFm1, sleepstudy());
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap(f, {50, 1, state.range(0)}).draws.rows());
}
BENCHMARK(BM_Bootstrap)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "homflow/flow.hpp"
#include "homflow/opflow.hpp"
#include "homflow/spectral.hpp"
#include "homflow/zoo.hpp"

using namespace homflow;

static void BM_QuadraticProx(benchmark::State& state) {
    auto quad = zoo::diag_quadratic({1.0, 2.0, 0.5, 3.0, 1.7});
    Vector v = zoo::random_datum(*quad, 11);
    for (auto _ : state) {
        benchmark::DoNotOptimize(quad->prox(v, 1e-3, 1e-12));
    }
}
BENCHMARK(BM_QuadraticProx);

static void BM_GraphTVProx(benchmark::State& state) {
    auto tv = zoo::path_graph(static_cast<int>(state.range(0)), 1.0);
    Vector v = zoo::random_datum(*tv, 12);
    for (auto _ : state) {
        benchmark::DoNotOptimize(tv->prox(v, 1e-2, 1e-10));
    }
}
BENCHMARK(BM_GraphTVProx)->Arg(8)->Arg(24)->Arg(48);

static void BM_GraphDualNewtonProx(benchmark::State& state) {
    auto J = zoo::path_graph(static_cast<int>(state.range(0)), 1.5);
    Vector v = zoo::random_datum(*J, 13);
    for (auto _ : state) {
        benchmark::DoNotOptimize(J->prox(v, 1e-2, 1e-10));
    }
}
BENCHMARK(BM_GraphDualNewtonProx)->Arg(8)->Arg(24)->Arg(48);

static void BM_FlowStep1000(benchmark::State& state) {
    auto J = zoo::path_graph(8, 1.5);
    Vector f = zoo::random_datum(*J, 14);
    FlowConfig cfg;
    cfg.tau0 = 1e-3;
    cfg.t_max = 1.0;
    cfg.max_steps = 1000;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_flow(*J, f, cfg));
    }
}
BENCHMARK(BM_FlowStep1000);

static void BM_MatrixExponential(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Matrix A = Matrix::Random(n, n);
    A = (A.transpose() * A + Matrix::Identity(n, n)).eval();
    for (auto _ : state) {
        benchmark::DoNotOptimize(matrix_exponential(-0.5 * A));
    }
}
BENCHMARK(BM_MatrixExponential)->Arg(4)->Arg(16)->Arg(50);

static void BM_GroundStateOracle(benchmark::State& state) {
    auto J = zoo::path_graph(8, 1.5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ground_state_oracle(*J, 2, 1e-6));
    }
}
BENCHMARK(BM_GroundStateOracle);

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <random>

#include "hisp/association.hpp"
#include "hisp/scenario.hpp"
#include "hisp/synthetic.hpp"

namespace {

hisp::AssociationTable make_table(std::size_t rows, std::size_t cols) {
    std::mt19937_64 rng(42);
    return hisp::random_table({rows, cols, hisp::GatingPattern::sparse, 4.0}, rng);
}

void BM_weights_parallel(benchmark::State& state) {
    const auto t = make_table(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
    for (auto _ : state) benchmark::DoNotOptimize(hisp::compute_weights_approx1(t));
    state.SetComplexityN(state.range(0) * state.range(1));
}

void BM_weights_serial(benchmark::State& state) {
    const auto t = make_table(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
    for (auto _ : state) benchmark::DoNotOptimize(hisp::compute_weights_approx1_serial(t));
    state.SetComplexityN(state.range(0) * state.range(1));
}

// Hypotheses spread over the surveillance region against a Case-1 sized scan.
struct TableInputs {
    std::vector<hisp::Hypothesis> hypotheses;
    hisp::Scan scan;
    hisp::SensorModel sensor;
};

TableInputs make_inputs(int n) {
    TableInputs in;
    const auto scenario = hisp::Scenario::for_case(1);
    in.sensor = scenario.sensor;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> r(60.0, 490.0), th(-3.1, 3.1);
    for (int i = 0; i < n; ++i) {
        hisp::Hypothesis h;
        h.id = static_cast<std::uint64_t>(i);
        hisp::GaussianComponent c;
        c.weight = 0.9;
        const double rr = r(rng), tt = th(rng);
        c.mean << rr * std::cos(tt), rr * std::sin(tt), 0.5, -0.5;
        c.cov = hisp::StateMatrix::Identity() * 25.0;
        h.law.mass_phi = 0.1;
        h.law.alive.components.push_back(c);
        in.hypotheses.push_back(h);
    }
    std::vector<hisp::StateVector> truth;
    for (int i = 0; i < 40; ++i) truth.push_back(in.hypotheses[static_cast<std::size_t>(i % n)].law.alive.components[0].mean);
    in.scan = hisp::simulate_scan(truth, in.sensor, 1, 4.0, rng);
    return in;
}

void BM_table_parallel(benchmark::State& state) {
    const auto in = make_inputs(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(hisp::build_table(in.hypotheses, in.scan, in.sensor));
}

void BM_table_serial(benchmark::State& state) {
    const auto in = make_inputs(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(hisp::build_table_serial(in.hypotheses, in.scan, in.sensor));
}

}  // namespace

BENCHMARK(BM_weights_parallel)->Args({250, 50})->Args({500, 100})->Args({1000, 200})->Complexity(benchmark::oN);
BENCHMARK(BM_weights_serial)->Args({250, 50})->Args({500, 100})->Args({1000, 200})->Complexity(benchmark::oN);
BENCHMARK(BM_table_parallel)->Arg(100)->Arg(400)->Arg(1600);
BENCHMARK(BM_table_serial)->Arg(100)->Arg(400)->Arg(1600);

BENCHMARK_MAIN();

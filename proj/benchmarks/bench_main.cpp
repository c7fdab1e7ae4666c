#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "volcast/arima.hpp"
#include "volcast/marketdata.hpp"
#include "volcast/tcn.hpp"

namespace {

using namespace volcast;

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = gauss(rng);
    return v;
}

void BM_TcnForward(benchmark::State& state) {
    const auto model = tcn::TcnModel::standard(7);
    const auto input = random_vector(64, 11);
    tcn::ForwardTape tape;
    for (auto _ : state) {
        tcn::forward_into(model, input, tape);
        benchmark::DoNotOptimize(tape.activations.back().values.data());
    }
}
BENCHMARK(BM_TcnForward);

void BM_TcnForwardBackward(benchmark::State& state) {
    const auto model = tcn::TcnModel::standard(7);
    const auto input = random_vector(64, 11);
    const auto target = random_vector(64, 13);
    tcn::ForwardTape tape;
    tcn::BackwardScratch scratch;
    auto grads = tcn::Gradients::zeros_like(model);
    for (auto _ : state) {
        tcn::forward_into(model, input, tape);
        const auto grad = tcn::mse_loss_seq_grad(tape.activations.back().values, target);
        grads.fill(0.0);
        tcn::backward_into(model, tape, grad, grads, scratch);
        benchmark::DoNotOptimize(grads.weights.data());
    }
}
BENCHMARK(BM_TcnForwardBackward);

void BM_RollingVolatility(benchmark::State& state) {
    const auto returns = random_vector(2500, 17);
    for (auto _ : state) {
        auto vol = marketdata::rolling_volatility(returns);
        benchmark::DoNotOptimize(vol.data());
    }
}
BENCHMARK(BM_RollingVolatility);

void BM_KpssStatistic(benchmark::State& state) {
    const auto series = random_vector(1400, 23);
    for (auto _ : state) {
        auto result = arima::kpss_statistic(series);
        benchmark::DoNotOptimize(result.statistic);
    }
}
BENCHMARK(BM_KpssStatistic);

void BM_ArimaFit11(benchmark::State& state) {
    // AR(1)-ish input so the fit does real work
    auto series = random_vector(1400, 29);
    for (std::size_t t = 1; t < series.size(); ++t) series[t] += 0.7 * series[t - 1];
    for (auto _ : state) {
        auto fit = arima::fit_arma_css(series, {1, 0, 1});
        benchmark::DoNotOptimize(fit.css);
    }
}
BENCHMARK(BM_ArimaFit11);

} // namespace

BENCHMARK_MAIN();

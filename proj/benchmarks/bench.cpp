// Hot-path timings: channel decomposition, ML decoding, whole trials, and
// the precoder-design objective.

#include <benchmark/benchmark.h>

#include "beamsim/channel.hpp"
#include "beamsim/precoder.hpp"
#include "beamsim/simulator.hpp"
#include "beamsim/transceiver.hpp"

namespace {

void BM_SampleSvd4x4(benchmark::State& state) {
    beamsim::RngStream rng(1, 0);
    for (auto _ : state) {
        auto ch = beamsim::svd_ordered(beamsim::sample_channel(4, 4, rng));
        benchmark::DoNotOptimize(ch.singular_values);
    }
}
BENCHMARK(BM_SampleSvd4x4);

void BM_SampleSvd2x2(benchmark::State& state) {
    beamsim::RngStream rng(1, 0);
    for (auto _ : state) {
        auto ch = beamsim::svd_ordered(beamsim::sample_channel(2, 2, rng));
        benchmark::DoNotOptimize(ch.singular_values);
    }
}
BENCHMARK(BM_SampleSvd2x2);

void BM_MlDecodeFpmb(benchmark::State& state) {
    const int s = static_cast<int>(state.range(0));
    const auto cfg = beamsim::make_pmb_config(4, 4, 2, beamsim::identity_precoder(s));
    const beamsim::MlDecoder decoder(cfg);
    beamsim::RngStream rng(2, 0);
    beamsim::CVector received(s);
    for (int i = 0; i < s; ++i) received(i) = rng.complex_gaussian(1.0);
    beamsim::RVector lambdas = beamsim::RVector::LinSpaced(s, 2.0, 1.0);
    for (auto _ : state) {
        auto bits = decoder.decode(received, lambdas);
        benchmark::DoNotOptimize(bits);
    }
}
BENCHMARK(BM_MlDecodeFpmb)->Arg(2)->Arg(4);

void BM_RunTrial2x2Fpmb(benchmark::State& state) {
    const auto cfg = beamsim::make_pmb_config(
        2, 2, 2, beamsim::design_phi2(2, beamsim::Constellation::qam(2)));
    const beamsim::MlDecoder decoder(cfg);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(cfg.bits_per_use()));
    std::uint64_t t = 0;
    for (auto _ : state) {
        beamsim::RngStream rng(3, t++);
        auto ch = beamsim::svd_ordered(beamsim::sample_channel(2, 2, rng));
        for (auto& b : bits) b = static_cast<std::uint8_t>(rng.bit());
        auto res = beamsim::run_trial(cfg, decoder, bits, ch, rng, 100.0);
        benchmark::DoNotOptimize(res);
    }
}
BENCHMARK(BM_RunTrial2x2Fpmb);

void BM_Phi1Objective(benchmark::State& state) {
    const int s = static_cast<int>(state.range(0));
    const auto c = beamsim::Constellation::qam(2);
    const auto deltas = beamsim::difference_vectors(c, s);
    const auto theta = beamsim::ifft_matrix(s);
    for (auto _ : state) {
        benchmark::DoNotOptimize(beamsim::min_coordinate_distance2(theta, deltas));
    }
}
BENCHMARK(BM_Phi1Objective)->Arg(2)->Arg(3)->Arg(4);

} // namespace

BENCHMARK_MAIN();

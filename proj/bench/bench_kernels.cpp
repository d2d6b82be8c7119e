// Serial reference kernels against the OpenMP kernels at training shapes.
//   bench_kernels --benchmark_filter=Conv

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "aisq/kernels.hpp"

using namespace aisq::tsnet::kernels;

namespace {

std::vector<float> filled(std::size_t n, float scale) {
    std::vector<float> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = scale * std::sin(0.37f * static_cast<float>(i) + 0.1f);
    return v;
}

Conv1dShape conv_shape(const benchmark::State& state) {
    Conv1dShape s;
    s.batch = 64;
    s.in_channels = static_cast<std::size_t>(state.range(0));
    s.out_channels = static_cast<std::size_t>(state.range(1));
    s.length = static_cast<std::size_t>(state.range(2));
    s.kernel = static_cast<std::size_t>(state.range(3));
    return s;
}

template <bool Parallel>
void BM_ConvForward(benchmark::State& state) {
    const auto s = conv_shape(state);
    const auto x = filled(s.input_size(), 1.0f), w = filled(s.weight_size(), 0.1f), b = filled(s.out_channels, 0.1f);
    std::vector<float> y(s.output_size());
    for (auto _ : state) {
        if constexpr (Parallel)
            parallel::conv1d_forward<float>(s, x, w, b, y);
        else
            serial::conv1d_forward<float>(s, x, w, b, y);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * s.output_size() * s.in_channels * s.kernel));
}

template <bool Parallel>
void BM_ConvBackward(benchmark::State& state) {
    const auto s = conv_shape(state);
    const auto x = filled(s.input_size(), 1.0f), w = filled(s.weight_size(), 0.1f), dy = filled(s.output_size(), 0.5f);
    std::vector<float> dx(s.input_size()), dw(s.weight_size()), db(s.out_channels);
    for (auto _ : state) {
        if constexpr (Parallel)
            parallel::conv1d_backward<float>(s, x, w, dy, dx, dw, db);
        else
            serial::conv1d_backward<float>(s, x, w, dy, dx, dw, db);
        benchmark::DoNotOptimize(dx.data());
        benchmark::DoNotOptimize(dw.data());
    }
}

template <bool Parallel>
void BM_DenseForwardBackward(benchmark::State& state) {
    DenseShape s;
    s.batch = 64;
    s.in_features = static_cast<std::size_t>(state.range(0));
    s.out_features = static_cast<std::size_t>(state.range(1));
    const auto x = filled(s.batch * s.in_features, 1.0f), w = filled(s.in_features * s.out_features, 0.05f),
               b = filled(s.out_features, 0.1f), dy = filled(s.batch * s.out_features, 0.5f);
    std::vector<float> y(s.batch * s.out_features), dx(x.size()), dw(w.size()), db(b.size());
    for (auto _ : state) {
        if constexpr (Parallel) {
            parallel::dense_forward<float>(s, x, w, b, y);
            parallel::dense_backward<float>(s, x, w, dy, dx, dw, db);
        } else {
            serial::dense_forward<float>(s, x, w, b, y);
            serial::dense_backward<float>(s, x, w, dy, dx, dw, db);
        }
        benchmark::DoNotOptimize(dw.data());
    }
}

void conv_args(benchmark::internal::Benchmark* b) {
    b->ArgNames({"cin", "cout", "L", "k"});
    b->Args({9, 32, 360, 8})->Args({32, 32, 360, 5})->Args({64, 64, 360, 3})->Args({32, 64, 1080, 8});
    b->Unit(benchmark::kMillisecond)->UseRealTime();
}

void dense_args(benchmark::internal::Benchmark* b) {
    b->ArgNames({"in", "out"});
    b->Args({3240, 64})->Args({64, 64})->Args({9720, 64});
    b->Unit(benchmark::kMicrosecond)->UseRealTime();
}

}  // namespace

BENCHMARK(BM_ConvForward<false>)->Name("ConvForward/serial")->Apply(conv_args);
BENCHMARK(BM_ConvForward<true>)->Name("ConvForward/parallel")->Apply(conv_args);
BENCHMARK(BM_ConvBackward<false>)->Name("ConvBackward/serial")->Apply(conv_args);
BENCHMARK(BM_ConvBackward<true>)->Name("ConvBackward/parallel")->Apply(conv_args);
BENCHMARK(BM_DenseForwardBackward<false>)->Name("Dense/serial")->Apply(dense_args);
BENCHMARK(BM_DenseForwardBackward<true>)->Name("Dense/parallel")->Apply(dense_args);

BENCHMARK_MAIN();

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "aisq/kernels.hpp"

namespace aisq::tsnet::kernels::parallel {

namespace {

// Dot product over fixed lanes so the compiler can vectorize without
// reassociating; the summation order depends only on n.
template <typename T>
inline T dot(const T* a, const T* b, std::ptrdiff_t n) {
    constexpr std::ptrdiff_t W = 16;
    T lane[W] = {};
    std::ptrdiff_t i = 0;
    for (; i + W <= n; i += W)
        for (std::ptrdiff_t j = 0; j < W; ++j) lane[j] += a[i + j] * b[i + j];
    for (std::ptrdiff_t j = 0; i < n; ++i, ++j) lane[j] += a[i] * b[i];
    T acc{0};
    for (std::ptrdiff_t j = 0; j < W; ++j) acc += lane[j];
    return acc;
}

constexpr std::size_t kRowBlock = 4;   // output rows sharing one input load
constexpr std::size_t kTimeBlock = 64; // output samples per tile

// out[n][o][t] = bias[o] + sum_{i,k} w[o][i][k] * in[n][i][t + k - pad_left]
// with zeros outside [0, L). Each output element is reduced over (i, k) in
// the same order whatever the thread count.
template <typename T>
void correlate(const T* in, std::size_t N, std::size_t I, std::size_t O, std::size_t L, std::size_t K,
               std::size_t pad_left, const T* w, const T* bias, T* out) {
    const std::size_t tiles = (L + kTimeBlock - 1) / kTimeBlock;
    const std::size_t padded = tiles * kTimeBlock + K - 1;
    const std::size_t row_blocks = (O + kRowBlock - 1) / kRowBlock;
    const auto tasks = static_cast<std::int64_t>(N * row_blocks);
#pragma omp parallel
    {
        std::vector<T> buf(I * padded, T{0});
        std::vector<T> wblk(I * K * kRowBlock);
        std::size_t buffered = static_cast<std::size_t>(-1);
#pragma omp for schedule(static)
        for (std::int64_t task = 0; task < tasks; ++task) {
            const std::size_t n = static_cast<std::size_t>(task) / row_blocks;
            const std::size_t o0 = (static_cast<std::size_t>(task) % row_blocks) * kRowBlock;
            const std::size_t rows = std::min(kRowBlock, O - o0);
            if (buffered != n) {
                for (std::size_t i = 0; i < I; ++i) {
                    T* dst = buf.data() + i * padded;
                    std::fill(dst, dst + padded, T{0});
                    std::copy_n(in + (n * I + i) * L, L, dst + pad_left);
                }
                buffered = n;
            }
            // Weights of this row block, zero rows past O.
            for (std::size_t i = 0; i < I; ++i)
                for (std::size_t k = 0; k < K; ++k)
                    for (std::size_t r = 0; r < kRowBlock; ++r)
                        wblk[(i * K + k) * kRowBlock + r] = r < rows ? w[((o0 + r) * I + i) * K + k] : T{0};
            for (std::size_t tile = 0; tile < tiles; ++tile) {
                const std::size_t t0 = tile * kTimeBlock;
                T acc[kRowBlock][kTimeBlock];
                for (std::size_t r = 0; r < kRowBlock; ++r) {
                    const T b0 = bias && r < rows ? bias[o0 + r] : T{0};
                    for (std::size_t j = 0; j < kTimeBlock; ++j) acc[r][j] = b0;
                }
                for (std::size_t i = 0; i < I; ++i) {
                    const T* src = buf.data() + i * padded + t0;
                    const T* wp = wblk.data() + i * K * kRowBlock;
                    for (std::size_t k = 0; k < K; ++k, wp += kRowBlock) {
                        const T* sk = src + k;
                        for (std::size_t r = 0; r < kRowBlock; ++r) {
                            const T wv = wp[r];
                            for (std::size_t j = 0; j < kTimeBlock; ++j) acc[r][j] += wv * sk[j];
                        }
                    }
                }
                const std::size_t len = std::min(kTimeBlock, L - t0);
                for (std::size_t r = 0; r < rows; ++r)
                    std::copy_n(acc[r], len, out + (n * O + o0 + r) * L + t0);
            }
        }
    }
}

}  // namespace

template <typename T>
void conv1d_forward(const Conv1dShape& s, std::span<const T> x, std::span<const T> w, std::span<const T> b,
                    std::span<T> y) {
    correlate(x.data(), s.batch, s.in_channels, s.out_channels, s.length, s.kernel, s.pad_left(), w.data(), b.data(),
              y.data());
}

template <typename T>
void conv1d_backward(const Conv1dShape& s, std::span<const T> x, std::span<const T> w, std::span<const T> dy,
                     std::span<T> dx, std::span<T> dw, std::span<T> db) {
    const auto L = static_cast<std::ptrdiff_t>(s.length);
    const auto pad = static_cast<std::ptrdiff_t>(s.pad_left());
    const auto outs = static_cast<std::int64_t>(s.out_channels);
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < outs; ++c) {
        const auto co = static_cast<std::size_t>(c);
        T bias_acc{0};
        for (std::size_t n = 0; n < s.batch; ++n) {
            const T* g = dy.data() + (n * s.out_channels + co) * s.length;
            for (std::ptrdiff_t t = 0; t < L; ++t) bias_acc += g[t];
        }
        db[co] = bias_acc;
        for (std::size_t ci = 0; ci < s.in_channels; ++ci)
            for (std::size_t k = 0; k < s.kernel; ++k) {
                // taps past either border see zero padding
                const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(k) - pad;
                const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -off);
                const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(L, L - off);
                T acc{0};
                for (std::size_t n = 0; n < s.batch; ++n) {
                    const T* g = dy.data() + (n * s.out_channels + co) * s.length;
                    const T* in = x.data() + (n * s.in_channels + ci) * s.length;
                    acc += dot(g + lo, in + (lo + off), hi - lo);
                }
                dw[(co * s.in_channels + ci) * s.kernel + k] = acc;
            }
    }

    // dx is a correlation of dy with the transposed, reversed kernel.
    const std::size_t K = s.kernel;
    std::vector<T> wt(w.size());
    for (std::size_t co = 0; co < s.out_channels; ++co)
        for (std::size_t ci = 0; ci < s.in_channels; ++ci)
            for (std::size_t k = 0; k < K; ++k)
                wt[(ci * s.out_channels + co) * K + (K - 1 - k)] = w[(co * s.in_channels + ci) * K + k];
    correlate<T>(dy.data(), s.batch, s.out_channels, s.in_channels, s.length, K, K - 1 - s.pad_left(), wt.data(),
                 nullptr, dx.data());
}

template <typename T>
void dense_forward(const DenseShape& s, std::span<const T> x, std::span<const T> w, std::span<const T> b,
                   std::span<T> y) {
    const auto cells = static_cast<std::int64_t>(s.batch * s.out_features);
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < cells; ++c) {
        const std::size_t n = static_cast<std::size_t>(c) / s.out_features;
        const std::size_t o = static_cast<std::size_t>(c) % s.out_features;
        const T* wr = w.data() + o * s.in_features;
        const T* xr = x.data() + n * s.in_features;
        y[static_cast<std::size_t>(c)] = dot(wr, xr, static_cast<std::ptrdiff_t>(s.in_features)) + b[o];
    }
}

template <typename T>
void dense_backward(const DenseShape& s, std::span<const T> x, std::span<const T> w, std::span<const T> dy,
                    std::span<T> dx, std::span<T> dw, std::span<T> db) {
    const auto outs = static_cast<std::int64_t>(s.out_features);
#pragma omp parallel for schedule(static)
    for (std::int64_t oo = 0; oo < outs; ++oo) {
        const auto o = static_cast<std::size_t>(oo);
        T* wr = dw.data() + o * s.in_features;
        std::fill(wr, wr + s.in_features, T{0});
        T bias_acc{0};
        for (std::size_t n = 0; n < s.batch; ++n) {
            const T g = dy[n * s.out_features + o];
            bias_acc += g;
            const T* xr = x.data() + n * s.in_features;
            for (std::size_t i = 0; i < s.in_features; ++i) wr[i] += g * xr[i];
        }
        db[o] = bias_acc;
    }
    const auto batch = static_cast<std::int64_t>(s.batch);
#pragma omp parallel for schedule(static)
    for (std::int64_t nn = 0; nn < batch; ++nn) {
        const auto n = static_cast<std::size_t>(nn);
        T* out = dx.data() + n * s.in_features;
        std::fill(out, out + s.in_features, T{0});
        for (std::size_t o = 0; o < s.out_features; ++o) {
            const T g = dy[n * s.out_features + o];
            const T* wr = w.data() + o * s.in_features;
            for (std::size_t i = 0; i < s.in_features; ++i) out[i] += g * wr[i];
        }
    }
}

#define AISQ_INSTANTIATE(T)                                                                                      \
    template void conv1d_forward<T>(const Conv1dShape&, std::span<const T>, std::span<const T>,                \
                                    std::span<const T>, std::span<T>);                                          \
    template void conv1d_backward<T>(const Conv1dShape&, std::span<const T>, std::span<const T>,               \
                                     std::span<const T>, std::span<T>, std::span<T>, std::span<T>);             \
    template void dense_forward<T>(const DenseShape&, std::span<const T>, std::span<const T>,                  \
                                   std::span<const T>, std::span<T>);                                           \
    template void dense_backward<T>(const DenseShape&, std::span<const T>, std::span<const T>,                 \
                                    std::span<const T>, std::span<T>, std::span<T>, std::span<T>);

AISQ_INSTANTIATE(float)
AISQ_INSTANTIATE(double)

}  // namespace aisq::tsnet::kernels::parallel

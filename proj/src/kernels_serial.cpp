#include <cstddef>

#include "aisq/kernels.hpp"

namespace aisq::tsnet::kernels::serial {

template <typename T>
void conv1d_forward(const Conv1dShape& s, std::span<const T> x, std::span<const T> w, std::span<const T> b,
                    std::span<T> y) {
    const auto L = static_cast<std::ptrdiff_t>(s.length);
    const auto pad = static_cast<std::ptrdiff_t>(s.pad_left());
    for (std::size_t n = 0; n < s.batch; ++n)
        for (std::size_t co = 0; co < s.out_channels; ++co)
            for (std::ptrdiff_t t = 0; t < L; ++t) {
                T acc = b[co];
                for (std::size_t ci = 0; ci < s.in_channels; ++ci)
                    for (std::size_t k = 0; k < s.kernel; ++k) {
                        const std::ptrdiff_t src = t + static_cast<std::ptrdiff_t>(k) - pad;
                        if (src < 0 || src >= L) continue;
                        acc += w[(co * s.in_channels + ci) * s.kernel + k] *
                               x[(n * s.in_channels + ci) * s.length + static_cast<std::size_t>(src)];
                    }
                y[(n * s.out_channels + co) * s.length + static_cast<std::size_t>(t)] = acc;
            }
}

template <typename T>
void conv1d_backward(const Conv1dShape& s, std::span<const T> x, std::span<const T> w, std::span<const T> dy,
                     std::span<T> dx, std::span<T> dw, std::span<T> db) {
    const auto L = static_cast<std::ptrdiff_t>(s.length);
    const auto pad = static_cast<std::ptrdiff_t>(s.pad_left());
    for (auto& v : dx) v = T{0};
    for (auto& v : dw) v = T{0};
    for (auto& v : db) v = T{0};
    for (std::size_t n = 0; n < s.batch; ++n)
        for (std::size_t co = 0; co < s.out_channels; ++co)
            for (std::ptrdiff_t t = 0; t < L; ++t) {
                const T g = dy[(n * s.out_channels + co) * s.length + static_cast<std::size_t>(t)];
                db[co] += g;
                for (std::size_t ci = 0; ci < s.in_channels; ++ci)
                    for (std::size_t k = 0; k < s.kernel; ++k) {
                        const std::ptrdiff_t src = t + static_cast<std::ptrdiff_t>(k) - pad;
                        if (src < 0 || src >= L) continue;
                        const std::size_t xi = (n * s.in_channels + ci) * s.length + static_cast<std::size_t>(src);
                        const std::size_t wi = (co * s.in_channels + ci) * s.kernel + k;
                        dw[wi] += g * x[xi];
                        dx[xi] += g * w[wi];
                    }
            }
}

template <typename T>
void dense_forward(const DenseShape& s, std::span<const T> x, std::span<const T> w, std::span<const T> b,
                   std::span<T> y) {
    for (std::size_t n = 0; n < s.batch; ++n)
        for (std::size_t o = 0; o < s.out_features; ++o) {
            T acc = b[o];
            for (std::size_t i = 0; i < s.in_features; ++i)
                acc += w[o * s.in_features + i] * x[n * s.in_features + i];
            y[n * s.out_features + o] = acc;
        }
}

template <typename T>
void dense_backward(const DenseShape& s, std::span<const T> x, std::span<const T> w, std::span<const T> dy,
                    std::span<T> dx, std::span<T> dw, std::span<T> db) {
    for (auto& v : dx) v = T{0};
    for (auto& v : dw) v = T{0};
    for (auto& v : db) v = T{0};
    for (std::size_t n = 0; n < s.batch; ++n)
        for (std::size_t o = 0; o < s.out_features; ++o) {
            const T g = dy[n * s.out_features + o];
            db[o] += g;
            for (std::size_t i = 0; i < s.in_features; ++i) {
                dw[o * s.in_features + i] += g * x[n * s.in_features + i];
                dx[n * s.in_features + i] += g * w[o * s.in_features + i];
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

}  // namespace aisq::tsnet::kernels::serial

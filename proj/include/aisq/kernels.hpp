#pragma once

// Compute kernels behind the layers. `serial` holds plain nested-loop
// reference versions; `parallel` holds the OpenMP versions the layers call.
// Every parallel kernel reduces each output element in a fixed order, so
// results do not depend on the thread count.

#include <cstddef>
#include <span>

namespace aisq::tsnet::kernels {

/// `same` 1D cross-correlation. Even kernels pad one more on the right.
struct Conv1dShape {
    std::size_t batch = 1;
    std::size_t in_channels = 1;
    std::size_t out_channels = 1;
    std::size_t length = 1;
    std::size_t kernel = 1;

    std::size_t pad_left() const noexcept { return (kernel - 1) / 2; }
    std::size_t input_size() const noexcept { return batch * in_channels * length; }
    std::size_t output_size() const noexcept { return batch * out_channels * length; }
    std::size_t weight_size() const noexcept { return out_channels * in_channels * kernel; }
};

struct DenseShape {
    std::size_t batch = 1;
    std::size_t in_features = 1;
    std::size_t out_features = 1;
};

namespace serial {

template <typename T>
void conv1d_forward(const Conv1dShape& s, std::span<const T> x, std::span<const T> w, std::span<const T> b,
                    std::span<T> y);
template <typename T>
void conv1d_backward(const Conv1dShape& s, std::span<const T> x, std::span<const T> w, std::span<const T> dy,
                     std::span<T> dx, std::span<T> dw, std::span<T> db);
template <typename T>
void dense_forward(const DenseShape& s, std::span<const T> x, std::span<const T> w, std::span<const T> b,
                   std::span<T> y);
template <typename T>
void dense_backward(const DenseShape& s, std::span<const T> x, std::span<const T> w, std::span<const T> dy,
                    std::span<T> dx, std::span<T> dw, std::span<T> db);

}  // namespace serial

namespace parallel {

template <typename T>
void conv1d_forward(const Conv1dShape& s, std::span<const T> x, std::span<const T> w, std::span<const T> b,
                    std::span<T> y);
template <typename T>
void conv1d_backward(const Conv1dShape& s, std::span<const T> x, std::span<const T> w, std::span<const T> dy,
                     std::span<T> dx, std::span<T> dw, std::span<T> db);
template <typename T>
void dense_forward(const DenseShape& s, std::span<const T> x, std::span<const T> w, std::span<const T> b,
                   std::span<T> y);
template <typename T>
void dense_backward(const DenseShape& s, std::span<const T> x, std::span<const T> w, std::span<const T> dy,
                    std::span<T> dx, std::span<T> dw, std::span<T> db);

}  // namespace parallel

}  // namespace aisq::tsnet::kernels

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include <omp.h>

#include "aisq/kernels.hpp"

using namespace aisq::tsnet::kernels;

namespace {

template <typename T>
std::vector<T> random_vec(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<T> v(n);
    for (auto& x : v) x = static_cast<T>(u(rng));
    return v;
}

template <typename T>
double max_diff(const std::vector<T>& a, const std::vector<T>& b) {
    REQUIRE(a.size() == b.size());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(static_cast<double>(a[i]) - b[i]));
    return m;
}

template <typename T>
void compare_conv(const Conv1dShape& s, std::uint64_t seed, double tol) {
    std::mt19937_64 rng(seed);
    const auto x = random_vec<T>(s.input_size(), rng);
    const auto w = random_vec<T>(s.weight_size(), rng);
    const auto b = random_vec<T>(s.out_channels, rng);
    const auto dy = random_vec<T>(s.output_size(), rng);
    std::vector<T> y1(s.output_size()), y2(s.output_size());
    serial::conv1d_forward<T>(s, x, w, b, y1);
    parallel::conv1d_forward<T>(s, x, w, b, y2);
    CHECK(max_diff(y1, y2) <= tol);

    std::vector<T> dx1(s.input_size()), dw1(s.weight_size()), db1(s.out_channels);
    std::vector<T> dx2(s.input_size(), T(7)), dw2(s.weight_size(), T(7)), db2(s.out_channels, T(7));
    serial::conv1d_backward<T>(s, x, w, dy, dx1, dw1, db1);
    parallel::conv1d_backward<T>(s, x, w, dy, dx2, dw2, db2);
    CHECK(max_diff(dx1, dx2) <= tol);
    CHECK(max_diff(dw1, dw2) <= tol * static_cast<double>(s.batch * s.length));
    CHECK(max_diff(db1, db2) <= tol * static_cast<double>(s.batch * s.length));
}

template <typename T>
void compare_dense(const DenseShape& s, std::uint64_t seed, double tol) {
    std::mt19937_64 rng(seed);
    const auto x = random_vec<T>(s.batch * s.in_features, rng);
    const auto w = random_vec<T>(s.in_features * s.out_features, rng);
    const auto b = random_vec<T>(s.out_features, rng);
    const auto dy = random_vec<T>(s.batch * s.out_features, rng);
    std::vector<T> y1(dy.size()), y2(dy.size());
    serial::dense_forward<T>(s, x, w, b, y1);
    parallel::dense_forward<T>(s, x, w, b, y2);
    CHECK(max_diff(y1, y2) <= tol * static_cast<double>(s.in_features));

    std::vector<T> dx1(x.size()), dw1(w.size()), db1(b.size());
    std::vector<T> dx2(x.size(), T(7)), dw2(w.size(), T(7)), db2(b.size(), T(7));
    serial::dense_backward<T>(s, x, w, dy, dx1, dw1, db1);
    parallel::dense_backward<T>(s, x, w, dy, dx2, dw2, db2);
    CHECK(max_diff(dx1, dx2) <= tol * static_cast<double>(s.out_features));
    CHECK(max_diff(dw1, dw2) <= tol * static_cast<double>(s.batch));
    CHECK(max_diff(db1, db2) <= tol * static_cast<double>(s.batch));
}

const Conv1dShape kConvShapes[] = {
    {1, 1, 1, 1, 1},  {2, 3, 4, 7, 3},   {3, 2, 5, 6, 8},    {4, 9, 16, 40, 8}, {2, 16, 16, 33, 5},
    {5, 4, 6, 3, 8},  {1, 32, 64, 17, 3}, {8, 7, 3, 12, 4},  {3, 5, 5, 9, 1},
};

const DenseShape kDenseShapes[] = {{1, 1, 1}, {4, 7, 3}, {16, 90, 64}, {3, 500, 5}, {33, 64, 64}};

}  // namespace

TEST_CASE("serial and parallel convolution agree") {
    std::uint64_t seed = 1;
    for (const auto& s : kConvShapes) {
        CAPTURE(s.batch);
        CAPTURE(s.in_channels);
        CAPTURE(s.out_channels);
        CAPTURE(s.length);
        CAPTURE(s.kernel);
        compare_conv<double>(s, seed, 1e-12);
        compare_conv<float>(s, seed, 1e-5);
        ++seed;
    }
}

TEST_CASE("serial and parallel dense layers agree") {
    std::uint64_t seed = 100;
    for (const auto& s : kDenseShapes) {
        CAPTURE(s.batch);
        CAPTURE(s.in_features);
        CAPTURE(s.out_features);
        compare_dense<double>(s, seed, 1e-14);
        compare_dense<float>(s, seed, 1e-6);
        ++seed;
    }
}

TEST_CASE("parallel results do not depend on the thread count") {
    const Conv1dShape s{6, 9, 16, 50, 8};
    std::mt19937_64 rng(3);
    const auto x = random_vec<float>(s.input_size(), rng);
    const auto w = random_vec<float>(s.weight_size(), rng);
    const auto b = random_vec<float>(s.out_channels, rng);
    const auto dy = random_vec<float>(s.output_size(), rng);
    const int saved = omp_get_max_threads();
    std::vector<std::vector<float>> outs;
    for (int threads : {1, 2, 3, 8}) {
        omp_set_num_threads(threads);
        std::vector<float> y(s.output_size()), dx(s.input_size()), dw(s.weight_size()), db(s.out_channels);
        parallel::conv1d_forward<float>(s, x, w, b, y);
        parallel::conv1d_backward<float>(s, x, w, dy, dx, dw, db);
        y.insert(y.end(), dx.begin(), dx.end());
        y.insert(y.end(), dw.begin(), dw.end());
        y.insert(y.end(), db.begin(), db.end());
        outs.push_back(std::move(y));
    }
    omp_set_num_threads(saved);
    for (std::size_t i = 1; i < outs.size(); ++i) CHECK(outs[i] == outs[0]);
}

TEST_CASE("same padding on a hand-checked case") {
    // x = 1..5, kernel [1, 10, 100] -> y[i] = x[i-1] + 10 x[i] + 100 x[i+1]
    const Conv1dShape s{1, 1, 1, 5, 3};
    const std::vector<double> x = {1, 2, 3, 4, 5}, w = {1, 10, 100}, b = {0.5};
    std::vector<double> y(5);
    serial::conv1d_forward<double>(s, x, w, b, y);
    CHECK(y == std::vector<double>{210.5, 321.5, 432.5, 543.5, 54.5});

    // even kernel: one tap of padding on the left, two on the right
    const Conv1dShape e{1, 1, 1, 5, 4};
    const std::vector<double> w4 = {1, 10, 100, 1000};
    serial::conv1d_forward<double>(e, x, w4, b, y);
    CHECK(e.pad_left() == 1);
    CHECK(y == std::vector<double>{3210.5, 4321.5, 5432.5, 543.5, 54.5});
}

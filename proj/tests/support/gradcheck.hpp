#pragma once

// Central finite-difference gradient checks for double-precision layers.
//
// The probe loss is sum(r * forward(x)) for a fixed random r, so backward(r)
// is its exact gradient. A coordinate whose +h or -h evaluation flips the
// sign of any ReLU input straddles a kink and is skipped.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "aisq/layers.hpp"
#include "aisq/model.hpp"

namespace aisq::testing {

using tsnet::Layer;
using tsnet::Mode;
using tsnet::Tensor;

struct GradCheckResult {
    std::string name;
    double max_rel_error = 0.0;  // worst over checked tensors
    std::string worst_tensor;
    std::size_t tensors = 0;
    std::size_t coordinates = 0;
    std::size_t skipped_kinks = 0;
    std::size_t vanishing = 0;  // tensors whose true gradient is zero (bias ahead of batch norm)
};

inline void collect_relus(Layer<double>& layer, std::vector<tsnet::ReLU<double>*>& out) {
    if (auto* r = dynamic_cast<tsnet::ReLU<double>*>(&layer)) out.push_back(r);
    std::vector<Layer<double>*> children;
    layer.sublayers(children);
    for (auto* c : children) collect_relus(*c, out);
}

inline double normal(std::mt19937_64& rng) {
    return std::normal_distribution<double>(0.0, 1.0)(rng);
}

/// Fills every parameter: weights and biases from U(-1, 1), gamma from U(0.5, 1.5).
inline void randomize_parameters(Layer<double>& layer, std::mt19937_64& rng) {
    std::vector<tsnet::ParamView<double>> params;
    layer.parameters(params);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& p : params)
        for (auto& v : p.value) v = p.is_gamma ? 1.0 + 0.5 * u(rng) : (p.fan_in ? std::sqrt(3.0 / p.fan_in) : 0.5) * u(rng);
}

/// Norm-based relative error ||a - n|| / max(||a||, ||n||); 0 when both
/// norms are below `floor`.
inline double relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric,
                             double floor = 1e-12) {
    double diff = 0, na = 0, nn = 0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
        na += analytic[i] * analytic[i];
        nn += numeric[i] * numeric[i];
    }
    const double scale = std::sqrt(std::max(na, nn));
    return scale < floor ? 0.0 : std::sqrt(diff) / scale;
}

inline GradCheckResult check_gradients(const std::string& name, Layer<double>& layer,
                                       const std::vector<std::size_t>& input_shape, std::uint64_t seed,
                                       bool randomize = true, double h = 1e-4, std::size_t max_coords = 400) {
    std::mt19937_64 rng(seed);
    if (randomize) randomize_parameters(layer, rng);
    Tensor<double> x(input_shape);
    for (auto& v : x.values()) v = normal(rng);

    std::vector<tsnet::ReLU<double>*> relus;
    collect_relus(layer, relus);
    auto pattern = [&] {
        std::vector<bool> p;
        for (auto* r : relus)
            for (double v : r->last_input().values()) p.push_back(v > 0.0);
        return p;
    };

    const Tensor<double> y0 = layer.forward(x, Mode::Train);
    const auto base_pattern = pattern();
    Tensor<double> r(y0.shape());
    for (auto& v : r.values()) v = normal(rng);
    const Tensor<double> dx = layer.backward(r);

    std::vector<tsnet::ParamView<double>> params;
    layer.parameters(params);
    struct Target {
        std::string name;
        std::span<double> value;
        std::vector<double> analytic;
    };
    std::vector<Target> targets;
    targets.push_back({"input", x.span(), dx.values()});
    for (auto& p : params) targets.push_back({p.name, p.value, std::vector<double>(p.grad.begin(), p.grad.end())});

    auto loss = [&](bool& kink) {
        const Tensor<double> y = layer.forward(x, Mode::Train);
        kink = kink || pattern() != base_pattern;
        double s = 0;
        for (std::size_t i = 0; i < y.size(); ++i) s += r[i] * y[i];
        return s;
    };

    // Central differences carry round-off of about eps * |f| / h per
    // coordinate; below this both gradients are noise.
    double f0 = 0;
    for (std::size_t i = 0; i < y0.size(); ++i) f0 += r[i] * y0[i];
    const double floor = 1e-9 * std::max(1.0, std::abs(f0)) * 1e-4 / h;

    GradCheckResult res;
    res.name = name;
    for (auto& t : targets) {
        std::vector<std::size_t> coords(t.value.size());
        std::iota(coords.begin(), coords.end(), std::size_t{0});
        if (coords.size() > max_coords) {
            std::shuffle(coords.begin(), coords.end(), rng);
            coords.resize(max_coords);
        }
        std::vector<double> a, n;
        for (std::size_t c : coords) {
            const double v0 = t.value[c];
            bool kink = false;
            t.value[c] = v0 + h;
            const double fp = loss(kink);
            t.value[c] = v0 - h;
            const double fm = loss(kink);
            t.value[c] = v0;
            if (kink) {
                ++res.skipped_kinks;
                continue;
            }
            a.push_back(t.analytic[c]);
            n.push_back((fp - fm) / (2.0 * h));
        }
        const double e = relative_error(a, n, floor);
        if (e == 0.0 && relative_error(a, n) != 0.0) ++res.vanishing;
        ++res.tensors;
        res.coordinates += a.size();
        if (e >= res.max_rel_error) {
            res.max_rel_error = e;
            res.worst_tensor = t.name;
        }
    }
    return res;
}

struct GradCase {
    std::string name;
    std::function<std::unique_ptr<Layer<double>>()> make;
    std::vector<std::size_t> input_shape;
};

namespace detail {

template <typename L, typename... A>
std::unique_ptr<Layer<double>> make(A... a) {
    return std::make_unique<L>(a...);
}

inline std::unique_ptr<tsnet::Sequential<double>> seq(std::vector<std::unique_ptr<Layer<double>>> layers) {
    auto s = std::make_unique<tsnet::Sequential<double>>();
    for (auto& l : layers) s->add(std::move(l));
    return s;
}

template <typename... L>
std::unique_ptr<tsnet::Sequential<double>> seq_of(L... layers) {
    std::vector<std::unique_ptr<Layer<double>>> v;
    (v.push_back(std::move(layers)), ...);
    return seq(std::move(v));
}

inline std::unique_ptr<Layer<double>> residual(std::size_t in, std::size_t out, std::vector<std::size_t> kernels,
                                               bool bn) {
    std::vector<std::unique_ptr<Layer<double>>> branch;
    std::size_t c = in;
    for (std::size_t i = 0; i < kernels.size(); ++i) {
        branch.push_back(make<tsnet::Conv1d<double>>(c, out, kernels[i]));
        if (bn) branch.push_back(make<tsnet::BatchNorm<double>>(out));
        if (i + 1 < kernels.size()) branch.push_back(make<tsnet::ReLU<double>>());
        c = out;
    }
    std::unique_ptr<tsnet::Sequential<double>> shortcut;
    if (in != out) {
        std::vector<std::unique_ptr<Layer<double>>> sc;
        sc.push_back(make<tsnet::Conv1d<double>>(in, out, 1));
        if (bn) sc.push_back(make<tsnet::BatchNorm<double>>(out));
        shortcut = seq(std::move(sc));
    }
    return std::make_unique<tsnet::ResidualBlock<double>>(seq(std::move(branch)), std::move(shortcut));
}

// Adapts a whole network to the Layer interface through its root.
class NetworkLayer final : public Layer<double> {
public:
    explicit NetworkLayer(tsnet::ModelConfig cfg) : net_(std::move(cfg)) { net_.initialize(11); }
    Tensor<double> forward(const Tensor<double>& x, Mode m) override { return net_.root().forward(x, m); }
    Tensor<double> backward(const Tensor<double>& dy) override { return net_.root().backward(dy); }
    void parameters(std::vector<tsnet::ParamView<double>>& out) override { net_.root().parameters(out); }
    void sublayers(std::vector<Layer<double>*>& out) override { out.push_back(&net_.root()); }
    std::string name() const override { return "Network"; }

private:
    tsnet::Network<double> net_;
};

inline tsnet::ModelConfig small(tsnet::Architecture arch, bool bn) {
    tsnet::ModelConfig c;
    c.preset = "gradcheck";
    c.architecture = arch;
    c.length = 10;
    c.channels = 3;
    c.classes = 4;
    c.batch_norm = bn;
    switch (arch) {
        case tsnet::Architecture::Mlp: c.hidden = {7, 5}; break;
        case tsnet::Architecture::ResNet: c.trunk = tsnet::make_blocks(3, {4, 5}, {1, 1}, bn); break;
        case tsnet::Architecture::Split:
            c.stem = tsnet::make_blocks(1, {2}, {1}, bn);
            c.trunk = tsnet::make_blocks(6, {4}, {1}, bn);
            break;
        case tsnet::Architecture::TotalSplit: c.stem = tsnet::make_blocks(1, {2, 3}, {1, 1}, bn); break;
    }
    return c;
}

}  // namespace detail

/// Every layer type, alone and composed, including even kernels and whole networks.
inline std::vector<GradCase> gradient_cases() {
    using namespace tsnet;
    using detail::make;
    using detail::NetworkLayer;
    using detail::residual;
    using detail::seq_of;
    using detail::small;
    std::vector<GradCase> cases = {
        {"conv k1 1->1", [] { return make<Conv1d<double>>(1, 1, 1); }, {2, 1, 5}},
        {"conv k3 3->4", [] { return make<Conv1d<double>>(3, 4, 3); }, {2, 3, 9}},
        {"conv k5 2->3", [] { return make<Conv1d<double>>(2, 3, 5); }, {3, 2, 6}},
        {"conv k8 3->2", [] { return make<Conv1d<double>>(3, 2, 8); }, {2, 3, 11}},
        {"conv k8 longer than input", [] { return make<Conv1d<double>>(2, 2, 8); }, {2, 2, 4}},
        {"conv k4 1->3", [] { return make<Conv1d<double>>(1, 3, 4); }, {1, 1, 7}},
        {"dense 12->5", [] { return make<Dense<double>>(12, 5); }, {3, 12}},
        {"dense flattening 3x4->6", [] { return make<Dense<double>>(12, 6); }, {2, 3, 4}},
        {"batchnorm NCL", [] { return make<BatchNorm<double>>(3); }, {3, 3, 5}},
        {"batchnorm NC", [] { return make<BatchNorm<double>>(6); }, {4, 6}},
        {"relu", [] { return make<ReLU<double>>(); }, {2, 3, 6}},
        {"global average pool", [] { return make<GlobalAvgPool<double>>(); }, {2, 3, 6}},
        {"residual identity", [] { return residual(3, 3, {3, 3}, false); }, {2, 3, 8}},
        {"residual projection", [] { return residual(2, 4, {5, 3}, false); }, {2, 2, 8}},
        {"residual identity bn", [] { return residual(3, 3, {8, 5, 3}, true); }, {3, 3, 9}},
        {"residual projection bn", [] { return residual(2, 3, {8, 5, 3}, true); }, {3, 2, 9}},
        {"channel split",
         [] {
             std::vector<std::unique_ptr<Sequential<double>>> branches;
             for (int c = 0; c < 3; ++c)
                 branches.push_back(seq_of(make<Conv1d<double>>(1, 2, 3), make<ReLU<double>>()));
             return std::unique_ptr<Layer<double>>(std::make_unique<ChannelSplit<double>>(std::move(branches)));
         },
         {2, 3, 7}},
        {"conv bn relu pool dense",
         [] {
             return std::unique_ptr<Layer<double>>(seq_of(make<Conv1d<double>>(3, 4, 3), make<BatchNorm<double>>(4),
                                                          make<ReLU<double>>(), make<GlobalAvgPool<double>>(),
                                                          make<Dense<double>>(4, 5)));
         },
         {3, 3, 8}},
        {"mlp network", [] { return make<NetworkLayer>(small(Architecture::Mlp, false)); }, {3, 3, 10}},
        {"mlp network bn", [] { return make<NetworkLayer>(small(Architecture::Mlp, true)); }, {4, 3, 10}},
        {"resnet network", [] { return make<NetworkLayer>(small(Architecture::ResNet, false)); }, {2, 3, 10}},
        {"resnet network bn", [] { return make<NetworkLayer>(small(Architecture::ResNet, true)); }, {3, 3, 10}},
        {"split network", [] { return make<NetworkLayer>(small(Architecture::Split, false)); }, {2, 3, 10}},
        {"total split network bn",
         [] { return make<NetworkLayer>(small(Architecture::TotalSplit, true)); },
         {3, 3, 10}},
    };
    return cases;
}

}  // namespace aisq::testing

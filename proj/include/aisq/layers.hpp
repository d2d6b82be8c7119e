#pragma once

#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "aisq/kernels.hpp"
#include "aisq/tensor.hpp"

namespace aisq::tsnet {

enum class Mode { Train, Infer };

template <typename T>
struct ParamView {
    std::string name;
    std::span<T> value;
    std::span<T> grad;
    std::size_t fan_in = 0;  // 0: not a weight matrix (bias, BN)
    bool is_gamma = false;
};

/// A differentiable stage. backward() must follow the matching forward()
/// and overwrites (not accumulates) parameter gradients.
template <typename T>
class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor<T> forward(const Tensor<T>& x, Mode mode) = 0;
    virtual Tensor<T> backward(const Tensor<T>& dy) = 0;
    virtual void parameters(std::vector<ParamView<T>>& /*out*/) {}
    /// Non-trainable state saved with the model (batch-norm running statistics).
    virtual void buffers(std::vector<std::span<T>>& /*out*/) {}
    /// Directly nested layers, in evaluation order.
    virtual void sublayers(std::vector<Layer<T>*>& /*out*/) {}
    /// Weighted layers along one input-to-output path.
    virtual std::size_t depth() const { return 0; }
    virtual std::string name() const = 0;
};

template <typename T>
using LayerPtr = std::unique_ptr<Layer<T>>;

template <typename T>
class Conv1d final : public Layer<T> {
public:
    Conv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel);
    Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& dy) override;
    void parameters(std::vector<ParamView<T>>& out) override;
    std::size_t depth() const override { return 1; }
    std::string name() const override;

    std::vector<T>& weight() { return weight_; }
    std::vector<T>& bias() { return bias_; }

private:
    kernels::Conv1dShape shape_for(const Tensor<T>& x) const;

    std::size_t in_, out_, kernel_;
    std::vector<T> weight_, bias_, dweight_, dbias_;
    Tensor<T> input_;
};

/// Fully connected layer; flattens every dimension after the first.
template <typename T>
class Dense final : public Layer<T> {
public:
    Dense(std::size_t in_features, std::size_t out_features);
    Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& dy) override;
    void parameters(std::vector<ParamView<T>>& out) override;
    std::size_t depth() const override { return 1; }
    std::string name() const override;

    std::vector<T>& weight() { return weight_; }
    std::vector<T>& bias() { return bias_; }

private:
    std::size_t in_, out_;
    std::vector<T> weight_, bias_, dweight_, dbias_;
    Tensor<T> input_;
    std::vector<std::size_t> input_shape_;
};

/// Per-channel batch normalization over N x C x L (or N x C) input.
template <typename T>
class BatchNorm final : public Layer<T> {
public:
    explicit BatchNorm(std::size_t channels, T momentum = T(0.9), T epsilon = T(1e-5));
    Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& dy) override;
    void parameters(std::vector<ParamView<T>>& out) override;
    void buffers(std::vector<std::span<T>>& out) override;
    std::string name() const override;

    std::vector<T>& gamma() { return gamma_; }
    std::vector<T>& beta() { return beta_; }
    const std::vector<T>& running_mean() const { return running_mean_; }
    const std::vector<T>& running_var() const { return running_var_; }

private:
    std::size_t channels_;
    T momentum_, epsilon_;
    std::vector<T> gamma_, beta_, dgamma_, dbeta_;
    std::vector<T> running_mean_, running_var_;
    // forward cache
    Mode mode_ = Mode::Infer;
    Tensor<T> xhat_;
    std::vector<T> inv_std_;
};

template <typename T>
class ReLU final : public Layer<T> {
public:
    Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& dy) override;
    std::string name() const override { return "ReLU"; }

    /// Pre-activation values of the last forward pass (for kink checks in tests).
    const Tensor<T>& last_input() const { return input_; }

private:
    Tensor<T> input_;
};

/// N x C x L -> N x C mean over L.
template <typename T>
class GlobalAvgPool final : public Layer<T> {
public:
    Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& dy) override;
    std::string name() const override { return "GlobalAvgPool"; }

private:
    std::vector<std::size_t> input_shape_;
};

template <typename T>
class Sequential final : public Layer<T> {
public:
    Sequential() = default;
    void add(LayerPtr<T> layer) { layers_.push_back(std::move(layer)); }
    Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& dy) override;
    void parameters(std::vector<ParamView<T>>& out) override;
    void buffers(std::vector<std::span<T>>& out) override;
    void sublayers(std::vector<Layer<T>*>& out) override {
        for (auto& l : layers_) out.push_back(l.get());
    }
    std::size_t depth() const override;
    std::string name() const override { return "Sequential"; }

    std::size_t size() const { return layers_.size(); }
    Layer<T>& at(std::size_t i) { return *layers_.at(i); }

private:
    std::vector<LayerPtr<T>> layers_;
};

/// y = relu(branch(x) + shortcut(x)); the shortcut is the identity when empty.
template <typename T>
class ResidualBlock final : public Layer<T> {
public:
    ResidualBlock(std::unique_ptr<Sequential<T>> branch, std::unique_ptr<Sequential<T>> shortcut);
    Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& dy) override;
    void parameters(std::vector<ParamView<T>>& out) override;
    void buffers(std::vector<std::span<T>>& out) override;
    void sublayers(std::vector<Layer<T>*>& out) override {
        out.push_back(branch_.get());
        if (shortcut_) out.push_back(shortcut_.get());
        out.push_back(&activation_);
    }
    std::size_t depth() const override;
    std::string name() const override { return "ResidualBlock"; }

    Sequential<T>& branch() { return *branch_; }
    Sequential<T>* shortcut() { return shortcut_.get(); }

private:
    std::unique_ptr<Sequential<T>> branch_;
    std::unique_ptr<Sequential<T>> shortcut_;
    ReLU<T> activation_;
};

/// Routes input channel c through branch c and concatenates branch outputs
/// along the channel axis.
template <typename T>
class ChannelSplit final : public Layer<T> {
public:
    explicit ChannelSplit(std::vector<std::unique_ptr<Sequential<T>>> branches);
    Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& dy) override;
    void parameters(std::vector<ParamView<T>>& out) override;
    void buffers(std::vector<std::span<T>>& out) override;
    void sublayers(std::vector<Layer<T>*>& out) override {
        for (auto& b : branches_) out.push_back(b.get());
    }
    std::size_t depth() const override;
    std::string name() const override { return "ChannelSplit"; }

private:
    std::vector<std::unique_ptr<Sequential<T>>> branches_;
    std::vector<std::size_t> out_channels_;
    std::vector<std::size_t> input_shape_;
    std::vector<std::size_t> output_shape_;
};

}  // namespace aisq::tsnet

#include "aisq/layers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace aisq::tsnet {

std::string shape_string(const std::vector<std::size_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

namespace {

template <typename T>
void require_rank3(const Tensor<T>& x, std::size_t channels, const std::string& who) {
    if (x.rank() != 3 || x.dim(1) != channels)
        throw Error(ErrorCode::ShapeMismatch,
                    who + " expects N x " + std::to_string(channels) + " x L, got " + shape_string(x.shape()));
}

}  // namespace

// ---------------------------------------------------------------- Conv1d

template <typename T>
Conv1d<T>::Conv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel)
    : in_(in_channels),
      out_(out_channels),
      kernel_(kernel),
      weight_(out_channels * in_channels * kernel, T{0}),
      bias_(out_channels, T{0}),
      dweight_(weight_.size(), T{0}),
      dbias_(out_channels, T{0}) {
    if (in_channels == 0 || out_channels == 0 || kernel == 0)
        throw Error(ErrorCode::InvalidConfig, "conv1d dimensions must be positive");
}

template <typename T>
kernels::Conv1dShape Conv1d<T>::shape_for(const Tensor<T>& x) const {
    return {x.dim(0), in_, out_, x.dim(2), kernel_};
}

template <typename T>
Tensor<T> Conv1d<T>::forward(const Tensor<T>& x, Mode) {
    require_rank3(x, in_, name());
    input_ = x;
    Tensor<T> y({x.dim(0), out_, x.dim(2)});
    kernels::parallel::conv1d_forward<T>(shape_for(x), x.span(), weight_, bias_, y.span());
    return y;
}

template <typename T>
Tensor<T> Conv1d<T>::backward(const Tensor<T>& dy) {
    if (dy.rank() != 3 || dy.dim(0) != input_.dim(0) || dy.dim(1) != out_ || dy.dim(2) != input_.dim(2))
        throw Error(ErrorCode::ShapeMismatch, name() + " backward got " + shape_string(dy.shape()));
    Tensor<T> dx(input_.shape());
    kernels::parallel::conv1d_backward<T>(shape_for(input_), input_.span(), weight_, dy.span(), dx.span(),
                                          dweight_, dbias_);
    return dx;
}

template <typename T>
void Conv1d<T>::parameters(std::vector<ParamView<T>>& out) {
    out.push_back({"conv.weight", weight_, dweight_, in_ * kernel_, false});
    out.push_back({"conv.bias", bias_, dbias_, 0, false});
}

template <typename T>
std::string Conv1d<T>::name() const {
    return "Conv1d(" + std::to_string(in_) + "->" + std::to_string(out_) + ", k=" + std::to_string(kernel_) + ")";
}

// ---------------------------------------------------------------- Dense

template <typename T>
Dense<T>::Dense(std::size_t in_features, std::size_t out_features)
    : in_(in_features),
      out_(out_features),
      weight_(in_features * out_features, T{0}),
      bias_(out_features, T{0}),
      dweight_(weight_.size(), T{0}),
      dbias_(out_features, T{0}) {
    if (in_features == 0 || out_features == 0) throw Error(ErrorCode::InvalidConfig, "dense dimensions must be positive");
}

template <typename T>
Tensor<T> Dense<T>::forward(const Tensor<T>& x, Mode) {
    if (x.rank() < 2 || x.row_size() != in_)
        throw Error(ErrorCode::ShapeMismatch,
                    name() + " expects " + std::to_string(in_) + " features, got " + shape_string(x.shape()));
    input_shape_ = x.shape();
    input_ = x;
    Tensor<T> y({x.dim(0), out_});
    kernels::parallel::dense_forward<T>({x.dim(0), in_, out_}, x.span(), weight_, bias_, y.span());
    return y;
}

template <typename T>
Tensor<T> Dense<T>::backward(const Tensor<T>& dy) {
    if (dy.rank() != 2 || dy.dim(0) != input_.dim(0) || dy.dim(1) != out_)
        throw Error(ErrorCode::ShapeMismatch, name() + " backward got " + shape_string(dy.shape()));
    Tensor<T> dx(input_shape_);
    kernels::parallel::dense_backward<T>({dy.dim(0), in_, out_}, input_.span(), weight_, dy.span(), dx.span(),
                                         dweight_, dbias_);
    return dx;
}

template <typename T>
void Dense<T>::parameters(std::vector<ParamView<T>>& out) {
    out.push_back({"dense.weight", weight_, dweight_, in_, false});
    out.push_back({"dense.bias", bias_, dbias_, 0, false});
}

template <typename T>
std::string Dense<T>::name() const {
    return "Dense(" + std::to_string(in_) + "->" + std::to_string(out_) + ")";
}

// ---------------------------------------------------------------- BatchNorm

template <typename T>
BatchNorm<T>::BatchNorm(std::size_t channels, T momentum, T epsilon)
    : channels_(channels),
      momentum_(momentum),
      epsilon_(epsilon),
      gamma_(channels, T{1}),
      beta_(channels, T{0}),
      dgamma_(channels, T{0}),
      dbeta_(channels, T{0}),
      running_mean_(channels, T{0}),
      running_var_(channels, T{1}),
      inv_std_(channels, T{1}) {}

template <typename T>
Tensor<T> BatchNorm<T>::forward(const Tensor<T>& x, Mode mode) {
    if ((x.rank() != 2 && x.rank() != 3) || x.dim(1) != channels_)
        throw Error(ErrorCode::ShapeMismatch, name() + " got " + shape_string(x.shape()));
    const std::size_t N = x.dim(0);
    const std::size_t L = x.rank() == 3 ? x.dim(2) : 1;
    if (mode == Mode::Train && N < 2) throw Error(ErrorCode::DegenerateBatch, "batch norm needs batch size >= 2");
    mode_ = mode;
    xhat_ = Tensor<T>(x.shape());
    Tensor<T> y(x.shape());
    const auto M = static_cast<double>(N * L);
    const auto C = static_cast<std::int64_t>(channels_);
#pragma omp parallel for schedule(static)
    for (std::int64_t cc = 0; cc < C; ++cc) {
        const auto c = static_cast<std::size_t>(cc);
        double mean, var;
        if (mode == Mode::Train) {
            double sum = 0.0;
            for (std::size_t n = 0; n < N; ++n)
                for (std::size_t t = 0; t < L; ++t) sum += x[(n * channels_ + c) * L + t];
            mean = sum / M;
            double sq = 0.0;
            for (std::size_t n = 0; n < N; ++n)
                for (std::size_t t = 0; t < L; ++t) {
                    const double d = x[(n * channels_ + c) * L + t] - mean;
                    sq += d * d;
                }
            var = sq / M;
            running_mean_[c] = static_cast<T>(momentum_ * running_mean_[c] + (1 - momentum_) * mean);
            running_var_[c] = static_cast<T>(momentum_ * running_var_[c] + (1 - momentum_) * var);
        } else {
            mean = running_mean_[c];
            var = running_var_[c];
        }
        const double inv = 1.0 / std::sqrt(var + static_cast<double>(epsilon_));
        inv_std_[c] = static_cast<T>(inv);
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t t = 0; t < L; ++t) {
                const std::size_t i = (n * channels_ + c) * L + t;
                const T xh = static_cast<T>((x[i] - mean) * inv);
                xhat_[i] = xh;
                y[i] = gamma_[c] * xh + beta_[c];
            }
    }
    return y;
}

template <typename T>
Tensor<T> BatchNorm<T>::backward(const Tensor<T>& dy) {
    if (dy.shape() != xhat_.shape()) throw Error(ErrorCode::ShapeMismatch, name() + " backward shape");
    const std::size_t N = dy.dim(0);
    const std::size_t L = dy.rank() == 3 ? dy.dim(2) : 1;
    const auto M = static_cast<double>(N * L);
    Tensor<T> dx(dy.shape());
    const auto C = static_cast<std::int64_t>(channels_);
#pragma omp parallel for schedule(static)
    for (std::int64_t cc = 0; cc < C; ++cc) {
        const auto c = static_cast<std::size_t>(cc);
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t t = 0; t < L; ++t) {
                const std::size_t i = (n * channels_ + c) * L + t;
                sum_dy += dy[i];
                sum_dy_xhat += static_cast<double>(dy[i]) * xhat_[i];
            }
        dgamma_[c] = static_cast<T>(sum_dy_xhat);
        dbeta_[c] = static_cast<T>(sum_dy);
        const double scale = static_cast<double>(gamma_[c]) * inv_std_[c];
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t t = 0; t < L; ++t) {
                const std::size_t i = (n * channels_ + c) * L + t;
                if (mode_ == Mode::Train)
                    dx[i] = static_cast<T>(scale / M * (M * dy[i] - sum_dy - xhat_[i] * sum_dy_xhat));
                else
                    dx[i] = static_cast<T>(scale * dy[i]);
            }
    }
    return dx;
}

template <typename T>
void BatchNorm<T>::parameters(std::vector<ParamView<T>>& out) {
    out.push_back({"bn.gamma", gamma_, dgamma_, 0, true});
    out.push_back({"bn.beta", beta_, dbeta_, 0, false});
}

template <typename T>
void BatchNorm<T>::buffers(std::vector<std::span<T>>& out) {
    out.push_back(running_mean_);
    out.push_back(running_var_);
}

template <typename T>
std::string BatchNorm<T>::name() const {
    return "BatchNorm(" + std::to_string(channels_) + ")";
}

// ---------------------------------------------------------------- ReLU / pooling

template <typename T>
Tensor<T> ReLU<T>::forward(const Tensor<T>& x, Mode) {
    input_ = x;
    Tensor<T> y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T{0} ? x[i] : T{0};
    return y;
}

template <typename T>
Tensor<T> ReLU<T>::backward(const Tensor<T>& dy) {
    if (dy.shape() != input_.shape()) throw Error(ErrorCode::ShapeMismatch, "ReLU backward shape");
    Tensor<T> dx(dy.shape());
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = input_[i] > T{0} ? dy[i] : T{0};
    return dx;
}

template <typename T>
Tensor<T> GlobalAvgPool<T>::forward(const Tensor<T>& x, Mode) {
    if (x.rank() != 3) throw Error(ErrorCode::ShapeMismatch, "GlobalAvgPool expects N x C x L");
    input_shape_ = x.shape();
    const std::size_t N = x.dim(0), C = x.dim(1), L = x.dim(2);
    Tensor<T> y({N, C});
    for (std::size_t r = 0; r < N * C; ++r) {
        T acc{0};
        for (std::size_t t = 0; t < L; ++t) acc += x[r * L + t];
        y[r] = acc / static_cast<T>(L);
    }
    return y;
}

template <typename T>
Tensor<T> GlobalAvgPool<T>::backward(const Tensor<T>& dy) {
    const std::size_t N = input_shape_.at(0), C = input_shape_.at(1), L = input_shape_.at(2);
    if (dy.rank() != 2 || dy.dim(0) != N || dy.dim(1) != C)
        throw Error(ErrorCode::ShapeMismatch, "GlobalAvgPool backward shape");
    Tensor<T> dx(input_shape_);
    for (std::size_t r = 0; r < N * C; ++r) {
        const T g = dy[r] / static_cast<T>(L);
        for (std::size_t t = 0; t < L; ++t) dx[r * L + t] = g;
    }
    return dx;
}

// ---------------------------------------------------------------- containers

template <typename T>
Tensor<T> Sequential<T>::forward(const Tensor<T>& x, Mode mode) {
    Tensor<T> h = x;
    for (auto& l : layers_) h = l->forward(h, mode);
    return h;
}

template <typename T>
Tensor<T> Sequential<T>::backward(const Tensor<T>& dy) {
    Tensor<T> g = dy;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
}

template <typename T>
void Sequential<T>::parameters(std::vector<ParamView<T>>& out) {
    for (auto& l : layers_) l->parameters(out);
}

template <typename T>
void Sequential<T>::buffers(std::vector<std::span<T>>& out) {
    for (auto& l : layers_) l->buffers(out);
}

template <typename T>
std::size_t Sequential<T>::depth() const {
    std::size_t d = 0;
    for (const auto& l : layers_) d += l->depth();
    return d;
}

template <typename T>
ResidualBlock<T>::ResidualBlock(std::unique_ptr<Sequential<T>> branch, std::unique_ptr<Sequential<T>> shortcut)
    : branch_(std::move(branch)), shortcut_(std::move(shortcut)) {}

template <typename T>
Tensor<T> ResidualBlock<T>::forward(const Tensor<T>& x, Mode mode) {
    Tensor<T> z = branch_->forward(x, mode);
    const Tensor<T> s = shortcut_ ? shortcut_->forward(x, mode) : x;
    if (z.shape() != s.shape())
        throw Error(ErrorCode::ShapeMismatch, "residual branch " + shape_string(z.shape()) + " vs shortcut " +
                                                  shape_string(s.shape()));
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += s[i];
    return activation_.forward(z, mode);
}

template <typename T>
Tensor<T> ResidualBlock<T>::backward(const Tensor<T>& dy) {
    const Tensor<T> dz = activation_.backward(dy);
    Tensor<T> dx = branch_->backward(dz);
    if (shortcut_) {
        const Tensor<T> ds = shortcut_->backward(dz);
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += ds[i];
    } else {
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dz[i];
    }
    return dx;
}

template <typename T>
void ResidualBlock<T>::parameters(std::vector<ParamView<T>>& out) {
    branch_->parameters(out);
    if (shortcut_) shortcut_->parameters(out);
}

template <typename T>
void ResidualBlock<T>::buffers(std::vector<std::span<T>>& out) {
    branch_->buffers(out);
    if (shortcut_) shortcut_->buffers(out);
}

template <typename T>
std::size_t ResidualBlock<T>::depth() const {
    return branch_->depth() + (shortcut_ ? shortcut_->depth() : 0);
}

template <typename T>
ChannelSplit<T>::ChannelSplit(std::vector<std::unique_ptr<Sequential<T>>> branches)
    : branches_(std::move(branches)) {
    if (branches_.empty()) throw Error(ErrorCode::InvalidConfig, "channel split needs at least one branch");
}

template <typename T>
Tensor<T> ChannelSplit<T>::forward(const Tensor<T>& x, Mode mode) {
    require_rank3(x, branches_.size(), name());
    input_shape_ = x.shape();
    const std::size_t N = x.dim(0), C = x.dim(1), L = x.dim(2);
    std::vector<Tensor<T>> outs;
    outs.reserve(C);
    out_channels_.clear();
    for (std::size_t c = 0; c < C; ++c) {
        Tensor<T> slice({N, 1, L});
        for (std::size_t n = 0; n < N; ++n)
            std::copy_n(x.data() + (n * C + c) * L, L, slice.data() + n * L);
        outs.push_back(branches_[c]->forward(slice, mode));
        if (outs.back().rank() < 2 || outs.back().dim(0) != N)
            throw Error(ErrorCode::ShapeMismatch, "channel split branch output");
        out_channels_.push_back(outs.back().dim(1));
    }
    // Concatenate along axis 1; every branch must share the trailing shape.
    std::vector<std::size_t> shape = outs[0].shape();
    const std::size_t inner = outs[0].row_size() / outs[0].dim(1);
    std::size_t total = 0;
    for (const auto& o : outs) {
        if (o.rank() != shape.size() || o.row_size() / o.dim(1) != inner)
            throw Error(ErrorCode::ShapeMismatch, "channel split branches disagree on output shape");
        total += o.dim(1);
    }
    shape[1] = total;
    output_shape_ = shape;
    Tensor<T> y(shape);
    for (std::size_t n = 0; n < N; ++n) {
        std::size_t offset = 0;
        for (const auto& o : outs) {
            const std::size_t block = o.row_size();
            std::copy_n(o.data() + n * block, block, y.data() + n * total * inner + offset);
            offset += block;
        }
    }
    return y;
}

template <typename T>
Tensor<T> ChannelSplit<T>::backward(const Tensor<T>& dy) {
    if (dy.shape() != output_shape_) throw Error(ErrorCode::ShapeMismatch, "channel split backward shape");
    const std::size_t N = input_shape_[0], C = input_shape_[1], L = input_shape_[2];
    const std::size_t total = output_shape_[1];
    const std::size_t inner = dy.row_size() / total;
    Tensor<T> dx(input_shape_);
    std::size_t offset = 0;
    for (std::size_t c = 0; c < C; ++c) {
        std::vector<std::size_t> shape = output_shape_;
        shape[1] = out_channels_[c];
        Tensor<T> g(shape);
        const std::size_t block = out_channels_[c] * inner;
        for (std::size_t n = 0; n < N; ++n)
            std::copy_n(dy.data() + n * total * inner + offset, block, g.data() + n * block);
        offset += block;
        const Tensor<T> d = branches_[c]->backward(g);
        for (std::size_t n = 0; n < N; ++n) std::copy_n(d.data() + n * L, L, dx.data() + (n * C + c) * L);
    }
    return dx;
}

template <typename T>
void ChannelSplit<T>::parameters(std::vector<ParamView<T>>& out) {
    for (auto& b : branches_) b->parameters(out);
}

template <typename T>
void ChannelSplit<T>::buffers(std::vector<std::span<T>>& out) {
    for (auto& b : branches_) b->buffers(out);
}

template <typename T>
std::size_t ChannelSplit<T>::depth() const {
    std::size_t d = 0;
    for (const auto& b : branches_) d = std::max(d, b->depth());
    return d;
}

#define AISQ_LAYERS(T)               \
    template class Conv1d<T>;        \
    template class Dense<T>;         \
    template class BatchNorm<T>;     \
    template class ReLU<T>;          \
    template class GlobalAvgPool<T>; \
    template class Sequential<T>;    \
    template class ResidualBlock<T>; \
    template class ChannelSplit<T>;

AISQ_LAYERS(float)
AISQ_LAYERS(double)

}  // namespace aisq::tsnet

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "aisq/layers.hpp"

namespace aisq::tsnet {

enum class Architecture : std::uint8_t { Mlp, ResNet, Split, TotalSplit };
enum class Shortcut : std::uint8_t { Identity, Projection };

std::string_view to_string(Architecture a);
Architecture parse_architecture(std::string_view s);

/// Convolutions inside one residual block, applied in order.
struct BlockSpec {
    std::vector<std::size_t> widths;
    std::vector<std::size_t> kernels;
    bool batch_norm = false;
    Shortcut shortcut = Shortcut::Identity;  // projection iff channel counts differ
};

/// Declarative network description.
///  Mlp:        flatten, dense(hidden...), dense(classes)
///  ResNet:     trunk blocks, global average pool, dense(classes)
///  Split:      one stem per input channel, concat, trunk, pool, dense
///  TotalSplit: one stem per input channel with its own pool, concat, dense
struct ModelConfig {
    std::string preset = "custom";
    Architecture architecture = Architecture::Mlp;
    std::size_t length = 360;
    std::size_t channels = 9;
    std::size_t classes = 5;
    bool batch_norm = false;
    std::vector<std::size_t> hidden;  // Mlp only
    std::vector<BlockSpec> stem;      // Split / TotalSplit, per channel
    std::vector<BlockSpec> trunk;     // ResNet / Split
};

/// Throws InvalidConfig describing the first problem found.
void validate(const ModelConfig& config);

nlohmann::ordered_json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

const std::vector<std::string>& preset_names();
/// Throws InvalidConfig for an unknown name.
ModelConfig preset(const std::string& name, std::size_t length = 360, bool batch_norm = false);

/// Block chain `counts[i]` blocks of width `widths[i]`, 8/5/3 kernels.
std::vector<BlockSpec> make_blocks(std::size_t in_channels, const std::vector<std::size_t>& widths,
                                   const std::vector<std::size_t>& counts, bool batch_norm);

std::size_t dense_parameter_count(std::size_t in, std::size_t out);
std::size_t conv_parameter_count(std::size_t in, std::size_t out, std::size_t kernel);

/// Trainable scalars, batch-norm gamma/beta included.
std::size_t parameter_count(const ModelConfig& config);
/// Weighted layers along the longest input-to-output path; inside a block
/// the projection shortcut counts alongside the branch convolutions.
std::size_t depth(const ModelConfig& config);

template <typename T>
class Network {
public:
    explicit Network(ModelConfig config);

    /// x: N x channels x length. Returns N x classes logits.
    Tensor<T> forward(const Tensor<T>& x, Mode mode);
    /// dlogits: N x classes. Overwrites every parameter gradient.
    void backward(const Tensor<T>& dlogits);

    std::vector<ParamView<T>> parameters();
    std::vector<std::span<T>> buffers();
    std::size_t parameter_count();
    std::size_t depth() const { return root_.depth(); }
    const ModelConfig& config() const { return config_; }
    Sequential<T>& root() { return root_; }

    /// He-uniform weights, zero bias, gamma 1, beta 0.
    void initialize(std::uint64_t seed);

    std::vector<T> flat_parameters();
    void set_flat_parameters(std::span<const T> values);
    std::vector<T> flat_buffers();
    void set_flat_buffers(std::span<const T> values);

private:
    ModelConfig config_;
    Sequential<T> root_;
};

/// Uniform double in [0, 1) from the top 53 bits; platform independent.
double unit_uniform(std::uint64_t bits);

}  // namespace aisq::tsnet

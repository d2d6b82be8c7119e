#include "aisq/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace aisq::tsnet {

std::string_view to_string(Architecture a) {
    switch (a) {
        case Architecture::Mlp: return "mlp";
        case Architecture::ResNet: return "resnet";
        case Architecture::Split: return "split";
        case Architecture::TotalSplit: return "total_split";
    }
    return "?";
}

Architecture parse_architecture(std::string_view s) {
    if (s == "mlp") return Architecture::Mlp;
    if (s == "resnet") return Architecture::ResNet;
    if (s == "split") return Architecture::Split;
    if (s == "total_split") return Architecture::TotalSplit;
    throw Error(ErrorCode::InvalidConfig, "unknown architecture '" + std::string(s) + "'");
}

double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

std::size_t dense_parameter_count(std::size_t in, std::size_t out) { return in * out + out; }
std::size_t conv_parameter_count(std::size_t in, std::size_t out, std::size_t kernel) {
    return in * out * kernel + out;
}

std::vector<BlockSpec> make_blocks(std::size_t in_channels, const std::vector<std::size_t>& widths,
                                   const std::vector<std::size_t>& counts, bool batch_norm) {
    std::vector<BlockSpec> blocks;
    std::size_t c = in_channels;
    for (std::size_t s = 0; s < widths.size(); ++s)
        for (std::size_t b = 0; b < counts.at(s); ++b) {
            const std::size_t w = widths[s];
            blocks.push_back({{w, w, w}, {8, 5, 3}, batch_norm, c == w ? Shortcut::Identity : Shortcut::Projection});
            c = w;
        }
    return blocks;
}

namespace {

std::size_t block_out(const BlockSpec& b) { return b.widths.back(); }

std::size_t chain_out(std::size_t in, const std::vector<BlockSpec>& blocks) {
    return blocks.empty() ? in : block_out(blocks.back());
}

void validate_chain(std::size_t in, const std::vector<BlockSpec>& blocks, const char* where) {
    std::size_t c = in;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto& b = blocks[i];
        const std::string tag = std::string(where) + " block " + std::to_string(i);
        if (b.widths.empty() || b.widths.size() != b.kernels.size())
            throw Error(ErrorCode::InvalidConfig, tag + ": widths and kernels must be non-empty and equal length");
        for (std::size_t j = 0; j < b.widths.size(); ++j)
            if (b.widths[j] == 0 || b.kernels[j] == 0)
                throw Error(ErrorCode::InvalidConfig, tag + ": zero width or kernel");
        const bool needs_projection = c != block_out(b);
        if (needs_projection != (b.shortcut == Shortcut::Projection))
            throw Error(ErrorCode::InvalidConfig, tag + ": projection shortcut required iff channel count changes (" +
                                                      std::to_string(c) + " -> " + std::to_string(block_out(b)) + ")");
        c = block_out(b);
    }
}

std::size_t block_params(std::size_t in, const BlockSpec& b) {
    std::size_t n = 0, c = in;
    for (std::size_t j = 0; j < b.widths.size(); ++j) {
        n += conv_parameter_count(c, b.widths[j], b.kernels[j]) + (b.batch_norm ? 2 * b.widths[j] : 0);
        c = b.widths[j];
    }
    if (b.shortcut == Shortcut::Projection)
        n += conv_parameter_count(in, block_out(b), 1) + (b.batch_norm ? 2 * block_out(b) : 0);
    return n;
}

std::size_t chain_params(std::size_t in, const std::vector<BlockSpec>& blocks) {
    std::size_t n = 0, c = in;
    for (const auto& b : blocks) {
        n += block_params(c, b);
        c = block_out(b);
    }
    return n;
}

std::size_t chain_depth(const std::vector<BlockSpec>& blocks) {
    std::size_t d = 0;
    for (const auto& b : blocks) d += b.widths.size() + (b.shortcut == Shortcut::Projection ? 1 : 0);
    return d;
}

nlohmann::ordered_json block_json(const BlockSpec& b) {
    return {{"widths", b.widths},
            {"kernels", b.kernels},
            {"batch_norm", b.batch_norm},
            {"activation", "relu"},
            {"shortcut", b.shortcut == Shortcut::Projection ? "projection" : "identity"}};
}

BlockSpec block_from_json(const nlohmann::json& j) {
    BlockSpec b;
    b.widths = j.at("widths").get<std::vector<std::size_t>>();
    b.kernels = j.at("kernels").get<std::vector<std::size_t>>();
    b.batch_norm = j.value("batch_norm", false);
    if (j.value("activation", std::string("relu")) != "relu")
        throw Error(ErrorCode::InvalidConfig, "only relu activation is supported");
    const auto s = j.value("shortcut", std::string("identity"));
    if (s == "identity") b.shortcut = Shortcut::Identity;
    else if (s == "projection") b.shortcut = Shortcut::Projection;
    else throw Error(ErrorCode::InvalidConfig, "unknown shortcut '" + s + "'");
    return b;
}

}  // namespace

void validate(const ModelConfig& c) {
    if (c.length == 0 || c.channels == 0) throw Error(ErrorCode::InvalidConfig, "input length and channels must be positive");
    if (c.classes < 2) throw Error(ErrorCode::InvalidConfig, "need at least two classes");
    for (auto h : c.hidden)
        if (h == 0) throw Error(ErrorCode::InvalidConfig, "zero-width hidden layer");
    switch (c.architecture) {
        case Architecture::Mlp:
            if (!c.stem.empty() || !c.trunk.empty()) throw Error(ErrorCode::InvalidConfig, "mlp takes no blocks");
            break;
        case Architecture::ResNet:
            if (c.trunk.empty() || !c.stem.empty())
                throw Error(ErrorCode::InvalidConfig, "resnet needs trunk blocks and no stem");
            validate_chain(c.channels, c.trunk, "trunk");
            break;
        case Architecture::Split:
            if (c.stem.empty()) throw Error(ErrorCode::InvalidConfig, "split needs stem blocks");
            validate_chain(1, c.stem, "stem");
            validate_chain(c.channels * chain_out(1, c.stem), c.trunk, "trunk");
            break;
        case Architecture::TotalSplit:
            if (c.stem.empty() || !c.trunk.empty())
                throw Error(ErrorCode::InvalidConfig, "total_split needs stem blocks and no trunk");
            validate_chain(1, c.stem, "stem");
            break;
    }
    if (c.architecture != Architecture::Mlp && !c.hidden.empty())
        throw Error(ErrorCode::InvalidConfig, "hidden layers apply to mlp only");
}

nlohmann::ordered_json to_json(const ModelConfig& c) {
    nlohmann::ordered_json j;
    j["preset"] = c.preset;
    j["architecture"] = to_string(c.architecture);
    j["length"] = c.length;
    j["channels"] = c.channels;
    j["classes"] = c.classes;
    j["batch_norm"] = c.batch_norm;
    j["hidden"] = c.hidden;
    j["stem"] = nlohmann::ordered_json::array();
    for (const auto& b : c.stem) j["stem"].push_back(block_json(b));
    j["trunk"] = nlohmann::ordered_json::array();
    for (const auto& b : c.trunk) j["trunk"].push_back(block_json(b));
    return j;
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    try {
        c.preset = j.value("preset", std::string("custom"));
        c.architecture = parse_architecture(j.at("architecture").get<std::string>());
        c.length = j.at("length");
        c.channels = j.value("channels", std::size_t{9});
        c.classes = j.value("classes", std::size_t{5});
        c.batch_norm = j.value("batch_norm", false);
        c.hidden = j.value("hidden", std::vector<std::size_t>{});
        if (j.contains("stem"))
            for (const auto& b : j.at("stem")) c.stem.push_back(block_from_json(b));
        if (j.contains("trunk"))
            for (const auto& b : j.at("trunk")) c.trunk.push_back(block_from_json(b));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("model config: ") + e.what());
    }
    validate(c);
    return c;
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"tiny_resnet",  "shallow_resnet", "deep_resnet",
                                                   "stretched_deep_resnet", "split_resnet", "total_split_resnet",
                                                   "mlp_2x64",     "mlp_4x64"};
    return names;
}

ModelConfig preset(const std::string& name, std::size_t length, bool batch_norm) {
    ModelConfig c;
    c.preset = name;
    c.length = length;
    c.batch_norm = batch_norm;
    if (name == "mlp_2x64" || name == "mlp_4x64") {
        c.architecture = Architecture::Mlp;
        c.hidden.assign(name == "mlp_2x64" ? 2 : 4, 64);
    } else if (name == "tiny_resnet") {
        c.architecture = Architecture::ResNet;
        c.trunk = make_blocks(c.channels, {26}, {3}, batch_norm);
    } else if (name == "shallow_resnet") {
        c.architecture = Architecture::ResNet;
        c.trunk = make_blocks(c.channels, {40, 92}, {3, 3}, batch_norm);
    } else if (name == "deep_resnet") {
        c.architecture = Architecture::ResNet;
        c.trunk = make_blocks(c.channels, {48, 92}, {15, 6}, batch_norm);
    } else if (name == "stretched_deep_resnet") {
        c.architecture = Architecture::ResNet;
        c.trunk = make_blocks(c.channels, {84, 140}, {16, 5}, batch_norm);
    } else if (name == "split_resnet") {
        c.architecture = Architecture::Split;
        c.stem = make_blocks(1, {7}, {2}, batch_norm);
        c.trunk = make_blocks(7 * c.channels, {7 * c.channels}, {6}, batch_norm);
    } else if (name == "total_split_resnet") {
        c.architecture = Architecture::TotalSplit;
        c.stem = make_blocks(1, {18}, {8}, batch_norm);
    } else {
        std::string list;
        for (const auto& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
        throw Error(ErrorCode::InvalidConfig, "unknown preset '" + name + "' (known: " + list + ")");
    }
    validate(c);
    return c;
}

std::size_t parameter_count(const ModelConfig& c) {
    switch (c.architecture) {
        case Architecture::Mlp: {
            std::size_t n = 0, prev = c.channels * c.length;
            for (auto h : c.hidden) {
                n += dense_parameter_count(prev, h) + (c.batch_norm ? 2 * h : 0);
                prev = h;
            }
            return n + dense_parameter_count(prev, c.classes);
        }
        case Architecture::ResNet:
            return chain_params(c.channels, c.trunk) + dense_parameter_count(chain_out(c.channels, c.trunk), c.classes);
        case Architecture::Split: {
            const std::size_t merged = c.channels * chain_out(1, c.stem);
            return c.channels * chain_params(1, c.stem) + chain_params(merged, c.trunk) +
                   dense_parameter_count(chain_out(merged, c.trunk), c.classes);
        }
        case Architecture::TotalSplit:
            return c.channels * chain_params(1, c.stem) +
                   dense_parameter_count(c.channels * chain_out(1, c.stem), c.classes);
    }
    return 0;
}

std::size_t depth(const ModelConfig& c) {
    switch (c.architecture) {
        case Architecture::Mlp: return c.hidden.size() + 1;
        case Architecture::ResNet: return chain_depth(c.trunk) + 1;
        case Architecture::Split: return chain_depth(c.stem) + chain_depth(c.trunk) + 1;
        case Architecture::TotalSplit: return chain_depth(c.stem) + 1;
    }
    return 0;
}

// ---------------------------------------------------------------- Network

namespace {

template <typename T>
std::unique_ptr<ResidualBlock<T>> make_block(std::size_t in, const BlockSpec& b) {
    auto branch = std::make_unique<Sequential<T>>();
    std::size_t c = in;
    for (std::size_t j = 0; j < b.widths.size(); ++j) {
        branch->add(std::make_unique<Conv1d<T>>(c, b.widths[j], b.kernels[j]));
        if (b.batch_norm) branch->add(std::make_unique<BatchNorm<T>>(b.widths[j]));
        if (j + 1 < b.widths.size()) branch->add(std::make_unique<ReLU<T>>());
        c = b.widths[j];
    }
    std::unique_ptr<Sequential<T>> shortcut;
    if (b.shortcut == Shortcut::Projection) {
        shortcut = std::make_unique<Sequential<T>>();
        shortcut->add(std::make_unique<Conv1d<T>>(in, c, 1));
        if (b.batch_norm) shortcut->add(std::make_unique<BatchNorm<T>>(c));
    }
    return std::make_unique<ResidualBlock<T>>(std::move(branch), std::move(shortcut));
}

template <typename T>
std::size_t add_chain(Sequential<T>& seq, std::size_t in, const std::vector<BlockSpec>& blocks) {
    for (const auto& b : blocks) {
        seq.add(make_block<T>(in, b));
        in = block_out(b);
    }
    return in;
}

}  // namespace

template <typename T>
Network<T>::Network(ModelConfig config) : config_(std::move(config)) {
    validate(config_);
    const auto& c = config_;
    switch (c.architecture) {
        case Architecture::Mlp: {
            std::size_t prev = c.channels * c.length;
            for (auto h : c.hidden) {
                root_.add(std::make_unique<Dense<T>>(prev, h));
                if (c.batch_norm) root_.add(std::make_unique<BatchNorm<T>>(h));
                root_.add(std::make_unique<ReLU<T>>());
                prev = h;
            }
            root_.add(std::make_unique<Dense<T>>(prev, c.classes));
            break;
        }
        case Architecture::ResNet: {
            const std::size_t out = add_chain(root_, c.channels, c.trunk);
            root_.add(std::make_unique<GlobalAvgPool<T>>());
            root_.add(std::make_unique<Dense<T>>(out, c.classes));
            break;
        }
        case Architecture::Split:
        case Architecture::TotalSplit: {
            const bool total = c.architecture == Architecture::TotalSplit;
            std::vector<std::unique_ptr<Sequential<T>>> branches;
            std::size_t stem_out = 1;
            for (std::size_t ch = 0; ch < c.channels; ++ch) {
                auto br = std::make_unique<Sequential<T>>();
                stem_out = add_chain(*br, 1, c.stem);
                if (total) br->add(std::make_unique<GlobalAvgPool<T>>());
                branches.push_back(std::move(br));
            }
            root_.add(std::make_unique<ChannelSplit<T>>(std::move(branches)));
            std::size_t out = c.channels * stem_out;
            if (!total) {
                out = add_chain(root_, out, c.trunk);
                root_.add(std::make_unique<GlobalAvgPool<T>>());
            }
            root_.add(std::make_unique<Dense<T>>(out, c.classes));
            break;
        }
    }
}

template <typename T>
Tensor<T> Network<T>::forward(const Tensor<T>& x, Mode mode) {
    if (x.rank() != 3 || x.dim(1) != config_.channels || x.dim(2) != config_.length)
        throw Error(ErrorCode::ShapeMismatch, "network expects N x " + std::to_string(config_.channels) + " x " +
                                                  std::to_string(config_.length) + ", got " + shape_string(x.shape()));
    return root_.forward(x, mode);
}

template <typename T>
void Network<T>::backward(const Tensor<T>& dlogits) {
    root_.backward(dlogits);
}

template <typename T>
std::vector<ParamView<T>> Network<T>::parameters() {
    std::vector<ParamView<T>> out;
    root_.parameters(out);
    return out;
}

template <typename T>
std::vector<std::span<T>> Network<T>::buffers() {
    std::vector<std::span<T>> out;
    root_.buffers(out);
    return out;
}

template <typename T>
std::size_t Network<T>::parameter_count() {
    std::size_t n = 0;
    for (const auto& p : parameters()) n += p.value.size();
    return n;
}

template <typename T>
void Network<T>::initialize(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (auto& p : parameters()) {
        if (p.fan_in > 0) {
            const double limit = std::sqrt(6.0 / static_cast<double>(p.fan_in));
            for (auto& v : p.value) v = static_cast<T>((2.0 * unit_uniform(rng()) - 1.0) * limit);
        } else {
            std::fill(p.value.begin(), p.value.end(), p.is_gamma ? T{1} : T{0});
        }
    }
    // Buffers come in (running mean, running variance) pairs.
    auto bufs = buffers();
    for (std::size_t i = 0; i < bufs.size(); ++i) std::fill(bufs[i].begin(), bufs[i].end(), i % 2 ? T{1} : T{0});
}

template <typename T>
std::vector<T> Network<T>::flat_parameters() {
    std::vector<T> out;
    for (const auto& p : parameters()) out.insert(out.end(), p.value.begin(), p.value.end());
    return out;
}

template <typename T>
void Network<T>::set_flat_parameters(std::span<const T> values) {
    std::size_t off = 0;
    auto params = parameters();
    std::size_t total = 0;
    for (const auto& p : params) total += p.value.size();
    if (total != values.size())
        throw Error(ErrorCode::InvalidConfig, "parameter payload has " + std::to_string(values.size()) +
                                                  " values, model needs " + std::to_string(total));
    for (auto& p : params) {
        std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(off), p.value.size(), p.value.begin());
        off += p.value.size();
    }
}

template <typename T>
std::vector<T> Network<T>::flat_buffers() {
    std::vector<T> out;
    for (const auto& b : buffers()) out.insert(out.end(), b.begin(), b.end());
    return out;
}

template <typename T>
void Network<T>::set_flat_buffers(std::span<const T> values) {
    auto bufs = buffers();
    std::size_t total = 0;
    for (const auto& b : bufs) total += b.size();
    if (total != values.size()) throw Error(ErrorCode::InvalidConfig, "buffer payload size mismatch");
    std::size_t off = 0;
    for (auto& b : bufs) {
        std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(off), b.size(), b.begin());
        off += b.size();
    }
}

template class Network<float>;
template class Network<double>;

}  // namespace aisq::tsnet

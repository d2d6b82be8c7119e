#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "aisq/model.hpp"
#include "aisq/pipeline.hpp"

namespace aisq::tsnet {

struct TrainConfig {
    double learning_rate = 0.0;  // 0: 0.001, or 0.002 with batch norm
    double lr_factor = 0.5;
    std::size_t plateau_patience = 10;
    std::size_t early_stop_patience = 15;
    std::size_t max_epochs = 600;
    std::size_t batch_size = 0;  // 0: chosen from the sequence length
    double noise_sigma = 0.01;
    std::uint64_t seed = 42;
    bool class_weights = false;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int threads = 0;  // 0: OpenMP default
};

/// 360 -> 64, 1080 -> 128, 1800 -> 256; other lengths use the next longer bracket.
std::size_t default_batch_size(std::size_t length);
/// Fills the automatic fields and checks the rest (InvalidConfig).
TrainConfig resolve(TrainConfig config, const ModelConfig& model);

nlohmann::ordered_json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
    double learning_rate = 0.0;
    bool improved = false;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    std::size_t best_epoch = 0;
    double best_val_loss = 0.0;
    std::string stop_reason;  // early_stop | max_epochs
};

nlohmann::ordered_json to_json(const TrainHistory& history);
TrainHistory train_history_from_json(const nlohmann::json& j);
std::string history_csv(const TrainHistory& history);

struct AdamState {
    std::vector<float> m;
    std::vector<float> v;
    std::uint64_t step = 0;
};

template <typename T>
class Adam {
public:
    Adam(double beta1, double beta2, double epsilon) : beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {}
    void step(std::vector<ParamView<T>>& params, double learning_rate);
    std::uint64_t steps() const { return t_; }
    AdamState state() const;

private:
    double beta1_, beta2_, epsilon_;
    std::uint64_t t_ = 0;
    std::vector<T> m_, v_;
};

struct Checkpoint {
    ModelConfig model;
    TrainConfig train;
    std::vector<float> parameters;
    std::vector<float> buffers;
    AdamState optimizer;
    TrainHistory history;
    nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
};

/// Sequences as the network consumes them: N x channels x length.
struct LabeledSet {
    std::size_t length = 0;
    std::size_t channels = pipeline::kChannels;
    std::vector<float> inputs;
    std::vector<std::size_t> true_lengths;
    std::vector<std::uint8_t> labels;

    std::size_t size() const { return labels.size(); }
};

LabeledSet make_labeled_set(std::span<const pipeline::FeatureSequence* const> sequences);

/// Zero-mean Gaussian noise on every true row; rows at or past true_length stay untouched.
template <typename T>
void add_input_noise(Tensor<T>& batch, std::span<const std::size_t> true_lengths, double sigma, std::uint64_t seed);

/// Row-wise softmax of N x K logits.
std::vector<double> softmax(std::span<const double> logits, std::size_t classes);

struct LossResult {
    double loss = 0.0;
    std::size_t correct = 0;
};

/// Mean (weighted) softmax cross-entropy; writes dL/dlogits into grad.
template <typename T>
LossResult softmax_cross_entropy(const Tensor<T>& logits, std::span<const std::uint8_t> labels,
                                 std::span<const double> class_weights, Tensor<T>& grad);

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Trains `net` in place and leaves it holding the best-validation weights.
Checkpoint train(Network<float>& net, const LabeledSet& train_set, const LabeledSet& val_set, const TrainConfig& config,
                 const EpochCallback& on_epoch = {});

/// Inference-mode class probabilities, N x classes.
std::vector<double> predict(Network<float>& net, const LabeledSet& set, std::size_t batch_size = 256);

std::vector<std::uint8_t> argmax_rows(std::span<const double> probabilities, std::size_t classes);

}  // namespace aisq::tsnet

#include "aisq/train.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace aisq::tsnet {

std::size_t default_batch_size(std::size_t length) {
    if (length <= 360) return 64;
    if (length <= 1080) return 128;
    return 256;
}

TrainConfig resolve(TrainConfig c, const ModelConfig& model) {
    if (c.learning_rate <= 0.0) c.learning_rate = model.batch_norm ? 0.002 : 0.001;
    if (c.batch_size == 0) c.batch_size = default_batch_size(model.length);
    if (c.plateau_patience == 0 || c.early_stop_patience == 0 || c.max_epochs == 0)
        throw Error(ErrorCode::InvalidConfig, "patience and epoch limits must be positive");
    if (c.batch_size < 2) throw Error(ErrorCode::InvalidConfig, "batch size must be at least 2");
    if (!(c.lr_factor > 0.0 && c.lr_factor <= 1.0)) throw Error(ErrorCode::InvalidConfig, "lr factor must be in (0, 1]");
    if (c.noise_sigma < 0.0) throw Error(ErrorCode::InvalidConfig, "noise sigma must be non-negative");
    if (c.threads < 0) c.threads = 0;
    return c;
}

nlohmann::ordered_json to_json(const TrainConfig& c) {
    return {{"learning_rate", c.learning_rate},
            {"lr_factor", c.lr_factor},
            {"plateau_patience", c.plateau_patience},
            {"early_stop_patience", c.early_stop_patience},
            {"max_epochs", c.max_epochs},
            {"batch_size", c.batch_size},
            {"noise_sigma", c.noise_sigma},
            {"seed", c.seed},
            {"class_weights", c.class_weights},
            {"adam", {{"beta1", c.beta1}, {"beta2", c.beta2}, {"epsilon", c.epsilon}}},
            {"threads", c.threads}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.lr_factor = j.value("lr_factor", c.lr_factor);
    c.plateau_patience = j.value("plateau_patience", c.plateau_patience);
    c.early_stop_patience = j.value("early_stop_patience", c.early_stop_patience);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
    c.seed = j.value("seed", c.seed);
    c.class_weights = j.value("class_weights", c.class_weights);
    if (j.contains("adam")) {
        const auto& a = j.at("adam");
        c.beta1 = a.value("beta1", c.beta1);
        c.beta2 = a.value("beta2", c.beta2);
        c.epsilon = a.value("epsilon", c.epsilon);
    }
    c.threads = j.value("threads", c.threads);
    return c;
}

nlohmann::ordered_json to_json(const TrainHistory& h) {
    nlohmann::ordered_json epochs = nlohmann::ordered_json::array();
    for (const auto& e : h.epochs)
        epochs.push_back({{"epoch", e.epoch},
                          {"train_loss", e.train_loss},
                          {"train_accuracy", e.train_accuracy},
                          {"val_loss", e.val_loss},
                          {"val_accuracy", e.val_accuracy},
                          {"learning_rate", e.learning_rate},
                          {"improved", e.improved}});
    return {{"best_epoch", h.best_epoch},
            {"best_val_loss", h.best_val_loss},
            {"stop_reason", h.stop_reason},
            {"epochs", epochs}};
}

TrainHistory train_history_from_json(const nlohmann::json& j) {
    TrainHistory h;
    h.best_epoch = j.at("best_epoch");
    h.best_val_loss = j.at("best_val_loss");
    h.stop_reason = j.at("stop_reason");
    for (const auto& e : j.at("epochs"))
        h.epochs.push_back({e.at("epoch"), e.at("train_loss"), e.at("train_accuracy"), e.at("val_loss"),
                            e.at("val_accuracy"), e.at("learning_rate"), e.at("improved")});
    return h;
}

std::string history_csv(const TrainHistory& h) {
    std::ostringstream os;
    os.precision(9);
    os << "epoch,train_loss,train_accuracy,val_loss,val_accuracy,learning_rate,improved\n";
    for (const auto& e : h.epochs)
        os << e.epoch << ',' << e.train_loss << ',' << e.train_accuracy << ',' << e.val_loss << ','
           << e.val_accuracy << ',' << e.learning_rate << ',' << (e.improved ? 1 : 0) << '\n';
    return os.str();
}

// ---------------------------------------------------------------- Adam

template <typename T>
void Adam<T>::step(std::vector<ParamView<T>>& params, double lr) {
    std::size_t total = 0;
    for (const auto& p : params) total += p.value.size();
    if (m_.size() != total) {
        m_.assign(total, T{0});
        v_.assign(total, T{0});
        t_ = 0;
    }
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    std::size_t off = 0;
    for (auto& p : params) {
        for (std::size_t i = 0; i < p.value.size(); ++i, ++off) {
            const double g = p.grad[i];
            const double m = beta1_ * m_[off] + (1.0 - beta1_) * g;
            const double v = beta2_ * v_[off] + (1.0 - beta2_) * g * g;
            m_[off] = static_cast<T>(m);
            v_[off] = static_cast<T>(v);
            p.value[i] = static_cast<T>(p.value[i] - lr * (m / c1) / (std::sqrt(v / c2) + epsilon_));
        }
    }
}

template <typename T>
AdamState Adam<T>::state() const {
    return {std::vector<float>(m_.begin(), m_.end()), std::vector<float>(v_.begin(), v_.end()), t_};
}

template class Adam<float>;
template class Adam<double>;

// ---------------------------------------------------------------- data

LabeledSet make_labeled_set(std::span<const pipeline::FeatureSequence* const> sequences) {
    LabeledSet set;
    if (sequences.empty()) return set;
    const std::size_t L = sequences.front()->length;
    const std::size_t C = pipeline::kChannels;
    set.length = L;
    set.inputs.resize(sequences.size() * C * L);
    for (std::size_t n = 0; n < sequences.size(); ++n) {
        const auto& s = *sequences[n];
        if (s.length != L) throw Error(ErrorCode::ShapeMismatch, "mixed sequence lengths in one set");
        float* dst = set.inputs.data() + n * C * L;
        for (std::size_t t = 0; t < L; ++t)
            for (std::size_t c = 0; c < C; ++c) dst[c * L + t] = s.values[t * C + c];
        set.true_lengths.push_back(s.true_length);
        set.labels.push_back(static_cast<std::uint8_t>(s.label));
    }
    return set;
}

template <typename T>
void add_input_noise(Tensor<T>& batch, std::span<const std::size_t> true_lengths, double sigma, std::uint64_t seed) {
    if (sigma == 0.0) return;
    if (batch.rank() != 3 || true_lengths.size() != batch.dim(0))
        throw Error(ErrorCode::ShapeMismatch, "noise expects N x C x L with N true lengths");
    const std::size_t N = batch.dim(0), C = batch.dim(1), L = batch.dim(2);
    std::mt19937_64 rng(seed);
    // Box-Muller on our own uniforms keeps the stream identical across standard libraries.
    bool have_spare = false;
    double spare = 0.0;
    auto gaussian = [&]() {
        if (have_spare) {
            have_spare = false;
            return spare;
        }
        const double u1 = 1.0 - unit_uniform(rng());  // (0, 1]
        const double u2 = unit_uniform(rng());
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare = r * std::sin(2.0 * std::numbers::pi * u2);
        have_spare = true;
        return r * std::cos(2.0 * std::numbers::pi * u2);
    };
    for (std::size_t n = 0; n < N; ++n) {
        const std::size_t valid = std::min(true_lengths[n], L);
        for (std::size_t c = 0; c < C; ++c) {
            T* row = batch.data() + (n * C + c) * L;
            for (std::size_t t = 0; t < valid; ++t) row[t] += static_cast<T>(sigma * gaussian());
        }
    }
}

template void add_input_noise<float>(Tensor<float>&, std::span<const std::size_t>, double, std::uint64_t);
template void add_input_noise<double>(Tensor<double>&, std::span<const std::size_t>, double, std::uint64_t);

std::vector<double> softmax(std::span<const double> logits, std::size_t K) {
    std::vector<double> p(logits.size());
    for (std::size_t r = 0; r * K < logits.size(); ++r) {
        const double* z = logits.data() + r * K;
        const double mx = *std::max_element(z, z + K);
        double sum = 0.0;
        for (std::size_t k = 0; k < K; ++k) sum += p[r * K + k] = std::exp(z[k] - mx);
        for (std::size_t k = 0; k < K; ++k) p[r * K + k] /= sum;
    }
    return p;
}

template <typename T>
LossResult softmax_cross_entropy(const Tensor<T>& logits, std::span<const std::uint8_t> labels,
                                 std::span<const double> weights, Tensor<T>& grad) {
    if (logits.rank() != 2 || logits.dim(0) != labels.size())
        throw Error(ErrorCode::ShapeMismatch, "logits must be N x K with N labels");
    const std::size_t N = logits.dim(0), K = logits.dim(1);
    grad = Tensor<T>(logits.shape());
    std::vector<double> z(logits.values().begin(), logits.values().end());
    const auto p = softmax(z, K);
    LossResult out;
    double wsum = 0.0;
    for (std::size_t n = 0; n < N; ++n) wsum += weights.empty() ? 1.0 : weights[labels[n]];
    for (std::size_t n = 0; n < N; ++n) {
        const std::size_t y = labels[n];
        if (y >= K) throw Error(ErrorCode::LabelOutOfRange, "label " + std::to_string(y));
        const double w = weights.empty() ? 1.0 : weights[y];
        const double* pr = p.data() + n * K;
        out.loss += -w * std::log(std::max(pr[y], std::numeric_limits<double>::min()));
        if (static_cast<std::size_t>(std::max_element(pr, pr + K) - pr) == y) ++out.correct;
        for (std::size_t k = 0; k < K; ++k) grad[n * K + k] = static_cast<T>(w * (pr[k] - (k == y ? 1.0 : 0.0)) / wsum);
    }
    out.loss /= wsum;
    return out;
}

template LossResult softmax_cross_entropy<float>(const Tensor<float>&, std::span<const std::uint8_t>,
                                                 std::span<const double>, Tensor<float>&);
template LossResult softmax_cross_entropy<double>(const Tensor<double>&, std::span<const std::uint8_t>,
                                                  std::span<const double>, Tensor<double>&);

std::vector<std::uint8_t> argmax_rows(std::span<const double> probabilities, std::size_t K) {
    std::vector<std::uint8_t> out;
    for (std::size_t r = 0; r * K < probabilities.size(); ++r) {
        const double* pr = probabilities.data() + r * K;
        out.push_back(static_cast<std::uint8_t>(std::max_element(pr, pr + K) - pr));
    }
    return out;
}

// ---------------------------------------------------------------- training loop

namespace {

Tensor<float> gather(const LabeledSet& set, std::span<const std::size_t> idx, std::vector<std::size_t>& lengths,
                     std::vector<std::uint8_t>& labels) {
    const std::size_t row = set.channels * set.length;
    Tensor<float> x({idx.size(), set.channels, set.length});
    lengths.clear();
    labels.clear();
    for (std::size_t i = 0; i < idx.size(); ++i) {
        std::copy_n(set.inputs.data() + idx[i] * row, row, x.data() + i * row);
        lengths.push_back(set.true_lengths[idx[i]]);
        labels.push_back(set.labels[idx[i]]);
    }
    return x;
}

// Batch boundaries; a trailing batch of one joins the previous batch.
std::vector<std::pair<std::size_t, std::size_t>> batches(std::size_t n, std::size_t b) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t s = 0; s < n; s += b) out.emplace_back(s, std::min(n, s + b));
    if (out.size() > 1 && out.back().second - out.back().first == 1) {
        out[out.size() - 2].second = n;
        out.pop_back();
    }
    return out;
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void check_set(const LabeledSet& set, const ModelConfig& m, const char* which) {
    if (set.size() == 0) throw Error(ErrorCode::EmptySplit, std::string(which) + " split is empty");
    if (set.length != m.length || set.channels != m.channels)
        throw Error(ErrorCode::ShapeMismatch, std::string(which) + " sequences are " + std::to_string(set.channels) +
                                                  " x " + std::to_string(set.length) + ", model expects " +
                                                  std::to_string(m.channels) + " x " + std::to_string(m.length));
}

struct Evaluation {
    double loss = 0.0;
    double accuracy = 0.0;
};

Evaluation evaluate(Network<float>& net, const LabeledSet& set, std::size_t batch_size) {
    std::vector<std::size_t> idx(set.size()), lengths;
    std::vector<std::uint8_t> labels;
    std::iota(idx.begin(), idx.end(), 0);
    double loss = 0.0;
    std::size_t correct = 0;
    Tensor<float> grad;
    for (auto [s, e] : batches(set.size(), batch_size)) {
        auto x = gather(set, std::span(idx).subspan(s, e - s), lengths, labels);
        const auto logits = net.forward(x, Mode::Infer);
        const auto r = softmax_cross_entropy<float>(logits, labels, {}, grad);
        loss += r.loss * static_cast<double>(e - s);
        correct += r.correct;
    }
    const auto n = static_cast<double>(set.size());
    return {loss / n, static_cast<double>(correct) / n};
}

}  // namespace

Checkpoint train(Network<float>& net, const LabeledSet& train_set, const LabeledSet& val_set,
                 const TrainConfig& config, const EpochCallback& on_epoch) {
    const TrainConfig cfg = resolve(config, net.config());
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
    check_set(train_set, net.config(), "train");
    check_set(val_set, net.config(), "validation");
    if (net.config().batch_norm && train_set.size() < 2)
        throw Error(ErrorCode::DegenerateBatch, "batch norm needs at least two training sequences");

    std::vector<double> weights;
    if (cfg.class_weights) {
        std::vector<double> counts(net.config().classes, 0.0);
        for (auto y : train_set.labels) counts.at(y) += 1.0;
        for (double c : counts)
            weights.push_back(c > 0 ? static_cast<double>(train_set.size()) / (counts.size() * c) : 0.0);
    }

    Checkpoint ckpt;
    ckpt.model = net.config();
    ckpt.train = cfg;
    Adam<float> adam(cfg.beta1, cfg.beta2, cfg.epsilon);
    std::mt19937_64 rng(cfg.seed);

    std::vector<std::size_t> order(train_set.size()), lengths;
    std::vector<std::uint8_t> labels;
    std::iota(order.begin(), order.end(), 0);
    double lr = cfg.learning_rate;
    double best = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0, plateau_wait = 0;
    std::vector<float> best_params = net.flat_parameters(), best_buffers = net.flat_buffers();
    ckpt.history.stop_reason = "max_epochs";
    Tensor<float> grad;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng() % (i + 1)]);
        double loss_sum = 0.0;
        std::size_t correct = 0, batch_no = 0;
        for (auto [s, e] : batches(order.size(), cfg.batch_size)) {
            auto x = gather(train_set, std::span(order).subspan(s, e - s), lengths, labels);
            add_input_noise(x, lengths, cfg.noise_sigma, mix(cfg.seed, epoch * 1000003ULL + batch_no++));
            const auto logits = net.forward(x, Mode::Train);
            const auto r = softmax_cross_entropy<float>(logits, labels, weights, grad);
            if (!std::isfinite(r.loss))
                throw Error(ErrorCode::DivergedLoss, "training loss is not finite at epoch " + std::to_string(epoch));
            net.backward(grad);
            auto params = net.parameters();
            adam.step(params, lr);
            loss_sum += r.loss * static_cast<double>(e - s);
            correct += r.correct;
        }
        const auto val = evaluate(net, val_set, cfg.batch_size);
        if (!std::isfinite(val.loss))
            throw Error(ErrorCode::DivergedLoss, "validation loss is not finite at epoch " + std::to_string(epoch));

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / static_cast<double>(order.size());
        rec.train_accuracy = static_cast<double>(correct) / static_cast<double>(order.size());
        rec.val_loss = val.loss;
        rec.val_accuracy = val.accuracy;
        rec.learning_rate = lr;
        rec.improved = val.loss < best;
        ckpt.history.epochs.push_back(rec);
        if (on_epoch) on_epoch(rec);

        if (rec.improved) {
            best = val.loss;
            ckpt.history.best_epoch = epoch;
            ckpt.history.best_val_loss = best;
            best_params = net.flat_parameters();
            best_buffers = net.flat_buffers();
            since_best = 0;
            plateau_wait = 0;
        } else {
            ++since_best;
            if (++plateau_wait >= cfg.plateau_patience) {
                lr *= cfg.lr_factor;
                plateau_wait = 0;
            }
            if (since_best >= cfg.early_stop_patience) {
                ckpt.history.stop_reason = "early_stop";
                break;
            }
        }
    }

    net.set_flat_parameters(best_params);
    net.set_flat_buffers(best_buffers);
    ckpt.parameters = std::move(best_params);
    ckpt.buffers = std::move(best_buffers);
    ckpt.optimizer = adam.state();
    return ckpt;
}

std::vector<double> predict(Network<float>& net, const LabeledSet& set, std::size_t batch_size) {
    if (set.size() == 0) return {};
    if (set.length != net.config().length || set.channels != net.config().channels)
        throw Error(ErrorCode::ShapeMismatch, "sequences do not match the model input shape");
    std::vector<std::size_t> idx(set.size()), lengths;
    std::vector<std::uint8_t> labels;
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> out;
    out.reserve(set.size() * net.config().classes);
    for (auto [s, e] : batches(set.size(), std::max<std::size_t>(batch_size, 2))) {
        auto x = gather(set, std::span(idx).subspan(s, e - s), lengths, labels);
        const auto logits = net.forward(x, Mode::Infer);
        const std::vector<double> z(logits.values().begin(), logits.values().end());
        const auto p = softmax(z, net.config().classes);
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

}  // namespace aisq::tsnet

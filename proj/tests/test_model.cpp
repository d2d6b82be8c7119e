#include <doctest.h>

#include <filesystem>

#include "aisq/checkpoint.hpp"
#include "aisq/error.hpp"
#include "aisq/model.hpp"

using namespace aisq;
using namespace aisq::tsnet;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Usage;
}

}  // namespace

TEST_CASE("multilayer perceptron parameter counts") {
    // 3240 inputs, 64-wide hidden layers, 5 classes
    CHECK(parameter_count(preset("mlp_2x64")) == 211909);
    CHECK(parameter_count(preset("mlp_4x64")) == 220229);
    CHECK(parameter_count(preset("mlp_2x64", 1080)) == 9720 * 64 + 64 + 4160 + 325);
    CHECK(dense_parameter_count(3240, 64) == 207424);
    CHECK(conv_parameter_count(9, 26, 8) == 9 * 26 * 8 + 26);
}

TEST_CASE("preset sizes and depths") {
    struct Row {
        const char* name;
        std::size_t depth, params, params_bn;
    };
    // Depth counts weighted layers, so the perceptrons come out one below
    // the tabulated 4 and 6 that include the input layer.
    const Row rows[] = {
        {"tiny_resnet", 11, 29541, 30061},
        {"shallow_resnet", 21, 440705, 443345},
        {"deep_resnet", 66, 1327413, 1335325},
        {"stretched_deep_resnet", 66, 3280793, 3293505},
        {"split_resnet", 26, 394070, 397220},
        {"total_split_resnet", 26, 356243, 364343},
        {"mlp_2x64", 3, 211909, 212165},
        {"mlp_4x64", 5, 220229, 220741},
    };
    REQUIRE(preset_names().size() == std::size(rows));
    for (const auto& r : rows) {
        CAPTURE(r.name);
        const auto c = preset(r.name);
        CHECK(depth(c) == r.depth);
        CHECK(parameter_count(c) == r.params);
        CHECK(parameter_count(preset(r.name, 360, true)) == r.params_bn);
        Network<float> net(c);
        CHECK(net.parameter_count() == r.params);
        CHECK(net.depth() == r.depth);
    }
}

TEST_CASE("unknown presets and bad configs are rejected") {
    CHECK(code_of([] { preset("resnet_9000"); }) == ErrorCode::InvalidConfig);
    try {
        preset("nope");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("tiny_resnet") != std::string::npos);
    }
    auto c = preset("tiny_resnet");
    c.trunk[0].kernels.pop_back();
    CHECK(code_of([&] { validate(c); }) == ErrorCode::InvalidConfig);
    c = preset("mlp_2x64");
    c.classes = 0;
    CHECK(code_of([&] { validate(c); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("model config json round trip") {
    for (const auto& name : preset_names()) {
        CAPTURE(name);
        const auto c = preset(name, 1080, true);
        const auto j = to_json(c);
        const auto back = model_config_from_json(j);
        CHECK(to_json(back) == j);
        CHECK(parameter_count(back) == parameter_count(c));
    }
    CHECK(code_of([] { model_config_from_json({{"architecture", "transformer"}}); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("forward shapes and initialization") {
    for (const auto& name : preset_names()) {
        if (name == "deep_resnet" || name == "stretched_deep_resnet") continue;
        CAPTURE(name);
        Network<float> net(preset(name, 60));
        net.initialize(42);
        Tensor<float> x({3, 9, 60}, 0.5f);
        const auto y = net.forward(x, Mode::Infer);
        CHECK(y.shape() == std::vector<std::size_t>{3, 5});
        CHECK(y.all_finite());
        Network<float> again(preset(name, 60));
        again.initialize(42);
        CHECK(again.flat_parameters() == net.flat_parameters());
        again.initialize(43);
        CHECK(again.flat_parameters() != net.flat_parameters());
    }
    Network<float> net(preset("tiny_resnet", 60));
    CHECK_THROWS_AS(net.forward(Tensor<float>({2, 9, 61}), Mode::Infer), Error);
}

TEST_CASE("checkpoint round trip and corruption") {
    Checkpoint ck;
    ck.model = preset("tiny_resnet", 60, true);
    Network<float> net(ck.model);
    net.initialize(7);
    ck.parameters = net.flat_parameters();
    ck.buffers = net.flat_buffers();
    ck.optimizer.m.assign(ck.parameters.size(), 0.25f);
    ck.optimizer.v.assign(ck.parameters.size(), 0.5f);
    ck.optimizer.step = 12;
    ck.history.epochs.push_back({1, 1.5, 0.4, 1.4, 0.45, 0.002, true});
    ck.history.best_epoch = 1;
    ck.history.best_val_loss = 1.4;
    ck.history.stop_reason = "max_epochs";
    ck.metadata["dataset"] = "0123abcd";

    const auto bytes = encode_checkpoint(ck);
    CHECK(std::equal(bytes.begin(), bytes.begin() + 4, kCheckpointMagic));
    const auto back = decode_checkpoint(bytes);
    CHECK(back.parameters == ck.parameters);
    CHECK(back.buffers == ck.buffers);
    CHECK(back.optimizer.m == ck.optimizer.m);
    CHECK(back.optimizer.step == 12);
    CHECK(back.history.best_epoch == 1);
    CHECK(back.history.epochs.at(0).val_accuracy == 0.45);
    CHECK(back.metadata["dataset"] == "0123abcd");
    CHECK(to_json(back.model) == to_json(ck.model));
    CHECK(encode_checkpoint(back) == bytes);

    auto restored = restore_network(back);
    CHECK(restored.flat_parameters() == ck.parameters);
    Network<float> other(preset("tiny_resnet", 120, true));
    CHECK(code_of([&] { load_into(other, back); }) == ErrorCode::InvalidConfig);

    auto bad = bytes;
    bad[0] = 'X';
    CHECK(code_of([&] { decode_checkpoint(bad); }) == ErrorCode::MagicMismatch);
    bad = bytes;
    bad[4] = 2;
    CHECK(code_of([&] { decode_checkpoint(bad); }) == ErrorCode::VersionMismatch);
    bad = bytes;
    bad[bytes.size() / 2] ^= 0x04;
    CHECK(code_of([&] { decode_checkpoint(bad); }) == ErrorCode::ChecksumMismatch);
    bad.assign(bytes.begin(), bytes.begin() + 9);
    CHECK_THROWS_AS(decode_checkpoint(bad), Error);

    const auto path = std::filesystem::temp_directory_path() / "aisq_model_test.tsnc";
    save_checkpoint(ck, path);
    CHECK(load_checkpoint(path).parameters == ck.parameters);
    std::filesystem::remove(path);
    CHECK(code_of([&] { load_checkpoint(path); }) == ErrorCode::IoError);
}

TEST_CASE("unit_uniform uses the top 53 bits") {
    CHECK(unit_uniform(0) == 0.0);
    CHECK(unit_uniform(~0ull) < 1.0);
    CHECK(unit_uniform(1ull << 63) == 0.5);
}

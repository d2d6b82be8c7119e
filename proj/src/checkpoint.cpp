#include "aisq/checkpoint.hpp"

#include <cstring>

#include "aisq/shard.hpp"
#include "byteio.hpp"

namespace aisq::tsnet {

using detail::Reader;
using detail::Writer;

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ck) {
    nlohmann::ordered_json header;
    header["model"] = to_json(ck.model);
    header["parameter_count"] = parameter_count(ck.model);
    header["depth"] = depth(ck.model);
    header["train"] = to_json(ck.train);
    header["sections"] = {{"parameters", ck.parameters.size()},
                          {"buffers", ck.buffers.size()},
                          {"adam_m", ck.optimizer.m.size()},
                          {"adam_v", ck.optimizer.v.size()}};
    header["adam_step"] = ck.optimizer.step;
    header["history"] = to_json(ck.history);
    header["metadata"] = ck.metadata;
    const std::string text = header.dump();

    Writer w;
    w.bytes(kCheckpointMagic, 4);
    w.le<std::uint16_t>(kCheckpointVersion);
    w.le<std::uint32_t>(static_cast<std::uint32_t>(text.size()));
    w.bytes(text.data(), text.size());
    for (const auto* section : {&ck.parameters, &ck.buffers, &ck.optimizer.m, &ck.optimizer.v})
        for (float v : *section) w.f32(v);
    const auto crc = shard::crc32(w.buffer());
    w.le<std::uint32_t>(crc);
    return std::move(w.buffer());
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0)
        throw Error(ErrorCode::MagicMismatch, "not a TSNC checkpoint");
    if (bytes.size() < 14) throw Error(ErrorCode::ChecksumMismatch, "checkpoint truncated");
    const auto version = static_cast<std::uint16_t>(bytes[4] | (bytes[5] << 8));
    if (version != kCheckpointVersion)
        throw Error(ErrorCode::VersionMismatch, "checkpoint version " + std::to_string(version));
    const auto body = bytes.first(bytes.size() - 4);
    Reader tail(bytes.last(4), "checkpoint trailer");
    if (shard::crc32(body) != tail.le<std::uint32_t>())
        throw Error(ErrorCode::ChecksumMismatch, "checkpoint CRC32 mismatch");

    Reader r(body.subspan(6), "checkpoint");
    const auto header_len = r.le<std::uint32_t>();
    const auto text = r.take(header_len);
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::FormatError, std::string("checkpoint header: ") + e.what());
    }

    Checkpoint ck;
    ck.model = model_config_from_json(header.at("model"));
    ck.train = train_config_from_json(header.at("train"));
    ck.history = train_history_from_json(header.at("history"));
    ck.metadata = header.value("metadata", nlohmann::ordered_json::object());
    ck.optimizer.step = header.at("adam_step");
    const auto& sec = header.at("sections");
    auto read_section = [&](std::vector<float>& out, std::size_t n) {
        if (r.remaining() / 4 < n) throw Error(ErrorCode::FormatError, "checkpoint payload truncated");
        out.resize(n);
        for (auto& v : out) v = r.f32();
    };
    read_section(ck.parameters, sec.at("parameters"));
    read_section(ck.buffers, sec.at("buffers"));
    read_section(ck.optimizer.m, sec.at("adam_m"));
    read_section(ck.optimizer.v, sec.at("adam_v"));
    if (r.remaining() != 0) throw Error(ErrorCode::FormatError, "trailing bytes in checkpoint");
    if (ck.parameters.size() != parameter_count(ck.model))
        throw Error(ErrorCode::InvalidConfig, "checkpoint holds " + std::to_string(ck.parameters.size()) +
                                                  " parameters, config needs " +
                                                  std::to_string(parameter_count(ck.model)));
    return ck;
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
    shard::write_file(path, encode_checkpoint(ck));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(shard::read_file(path)); }

void load_into(Network<float>& net, const Checkpoint& ck) {
    if (to_json(net.config()).dump() != to_json(ck.model).dump())
        throw Error(ErrorCode::InvalidConfig, "checkpoint config '" + ck.model.preset +
                                                  "' does not match network config '" + net.config().preset + "'");
    net.set_flat_parameters(ck.parameters);
    net.set_flat_buffers(ck.buffers);
}

Network<float> restore_network(const Checkpoint& ck) {
    Network<float> net(ck.model);
    load_into(net, ck);
    return net;
}

}  // namespace aisq::tsnet

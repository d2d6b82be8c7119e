// aisq: decode AIS, build datasets, train and evaluate classifiers.

#include <omp.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aisq/ais.hpp"
#include "aisq/checkpoint.hpp"
#include "aisq/dataset.hpp"
#include "aisq/error.hpp"
#include "aisq/geo.hpp"
#include "aisq/metrics.hpp"
#include "aisq/model.hpp"
#include "aisq/shard.hpp"
#include "aisq/synth.hpp"
#include "aisq/train.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace aisq;

namespace {

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

std::string grouped(std::size_t n) {
    std::string s = std::to_string(n);
    for (int i = static_cast<int>(s.size()) - 3; i > 0; i -= 3) s.insert(static_cast<std::size_t>(i), ",");
    return s;
}

std::string file_id(const fs::path& path) {
    const auto bytes = shard::read_file(path);
    return shard::hex32(shard::content_id(bytes));
}

// Settings shared by every subcommand: a JSON file, then flags on top.
struct Settings {
    std::string config_file;
    json file = json::object();

    json section(const char* name) const { return file.contains(name) ? json(file.at(name)) : json::object(); }

    void load() {
        if (config_file.empty()) return;
        try {
            file = json::parse(read_text(config_file));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::Usage, config_file + ": " + e.what());
        }
        if (!file.is_object()) throw Error(ErrorCode::Usage, config_file + ": expected a JSON object");
    }
};

void check_preset(const std::string& name) {
    const auto& names = tsnet::preset_names();
    if (std::find(names.begin(), names.end(), name) != names.end()) return;
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    throw Error(ErrorCode::Usage, "unknown preset '" + name + "'; available: " + list);
}

fs::path data_file(const std::string& flag, const char* name, bool required) {
    if (!flag.empty()) return flag;
    if (const char* dir = std::getenv("AISQ_DATA_DIR")) {
        fs::path p = fs::path(dir) / name;
        if (required || fs::exists(p)) return p;
        return {};
    }
    if (required)
        throw Error(ErrorCode::Usage, std::string("no ") + name + " given; pass it explicitly or set AISQ_DATA_DIR");
    return {};
}

// ---------------------------------------------------------------- decode

struct DecodeArgs {
    std::vector<std::string> inputs;
    std::string output;
    std::size_t window = 64;
};

json stats_json(const ais::DecodeStats& s) {
    return {{"lines", s.lines},
            {"ignored_sentences", s.ignored_sentences},
            {"malformed", s.malformed},
            {"checksum_errors", s.checksum_errors},
            {"armor_errors", s.armor_errors},
            {"unsupported_types", s.unsupported_types},
            {"sentinel_rejects", s.sentinel_rejects},
            {"out_of_range", s.out_of_range},
            {"truncated", s.truncated},
            {"missing_timestamp", s.missing_timestamp},
            {"multipart_dropped", s.multipart_dropped},
            {"position_reports", s.position_reports},
            {"static_reports", s.static_reports}};
}

int run_decode(const DecodeArgs& a) {
    ais::NmeaDecoder decoder(a.window);
    std::vector<ais::AisRecord> records;
    for (const auto& in : a.inputs) {
        std::ifstream f(in, std::ios::binary);
        if (!f) throw Error(ErrorCode::IoError, "cannot open " + in);
        std::string line;
        while (std::getline(f, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (auto r = decoder.feed(line)) records.push_back(*r);
        }
    }
    decoder.finish();
    const fs::path out(a.output);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    ais::write_records_csv(out, records);
    fs::path sidecar = out;
    sidecar.replace_extension(".counters.json");
    write_text(sidecar, stats_json(decoder.stats()).dump(2) + "\n");
    const auto& s = decoder.stats();
    std::printf("decoded %zu position reports from %zu lines (%zu malformed, %zu checksum errors)\n", records.size(),
                s.lines, s.malformed, s.checksum_errors);
    return 0;
}

// ---------------------------------------------------------------- build

struct BuildArgs {
    std::string records;
    std::string output;
    std::string coast, harbors, rivers;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> seq_len;
    std::optional<std::string> transform, norm, split_mode;
    std::optional<int> workers;
};

void print_class_table(const dataset::Dataset& ds) {
    std::array<std::array<std::size_t, 3>, pipeline::kNumClasses> table{};
    for (std::size_t i = 0; i < ds.sequences.size(); ++i)
        ++table[static_cast<std::size_t>(ds.sequences[i].label)][static_cast<std::size_t>(ds.splits[i])];
    std::printf("%-16s %8s %8s %8s %8s\n", "class", "train", "val", "test", "total");
    std::array<std::size_t, 3> sums{};
    for (int c = 0; c < pipeline::kNumClasses; ++c) {
        const auto& row = table[static_cast<std::size_t>(c)];
        std::printf("%-16s %8zu %8zu %8zu %8zu\n", std::string(pipeline::class_name(c)).c_str(), row[0], row[1],
                    row[2], row[0] + row[1] + row[2]);
        for (int s = 0; s < 3; ++s) sums[static_cast<std::size_t>(s)] += row[static_cast<std::size_t>(s)];
    }
    std::printf("%-16s %8zu %8zu %8zu %8zu\n", "total", sums[0], sums[1], sums[2], sums[0] + sums[1] + sums[2]);
}

int run_build(const BuildArgs& a, const Settings& settings) {
    auto cfg = dataset::dataset_config_from_json(settings.section("dataset"));
    if (a.seed) cfg.seed = *a.seed;
    if (a.seq_len) cfg.seq_len = *a.seq_len;
    if (a.transform) cfg.transform = pipeline::parse_transform(*a.transform);
    if (a.norm) cfg.norm = pipeline::parse_norm_mode(*a.norm);
    if (a.split_mode) cfg.split_mode = dataset::parse_split_mode(*a.split_mode);
    if (a.workers) cfg.workers = *a.workers;

    const fs::path coast_path = data_file(a.coast, "coastline.csv", true);
    const fs::path harbor_path = data_file(a.harbors, "harbors.csv", true);
    const fs::path river_path = data_file(a.rivers, "rivers.csv", false);

    const auto csv = ais::read_records_csv(a.records);
    const auto tracks = ais::group_tracks(csv.records);
    const auto coast_pts = geo::load_coastline(coast_path);
    const auto harbor_pts = geo::load_harbors(harbor_path);
    const geo::GeoGridIndex coast(coast_pts, cfg.coast_cell_km);
    const geo::GeoGridIndex harbor(harbor_pts, cfg.harbor_cell_km);
    std::optional<geo::RiverMask> rivers;
    if (!river_path.empty()) {
        const auto river_pts = geo::load_points(river_path);
        rivers.emplace(river_pts, cfg.river_buffer_m);
    }

    const auto ds = dataset::build_dataset(tracks, {&coast, &harbor, rivers ? &*rivers : nullptr}, cfg);
    dataset::write_dataset(ds, a.output);

    json run;
    run["command"] = "build";
    run["inputs"] = {{"records", a.records},
                     {"records_crc32", file_id(a.records)},
                     {"coastline", coast_path.string()},
                     {"harbors", harbor_path.string()},
                     {"rivers", river_path.string()}};
    run["dataset"] = dataset::to_json(cfg);
    write_text(fs::path(a.output) / "run_config.json", run.dump(2) + "\n");

    const auto& c = ds.counters;
    std::printf("records %zu (skipped %zu), vessels %zu, segments %zu, chunks %zu\n", csv.records.size(), csv.skipped,
                c.tracks, c.segments, c.chunks);
    std::printf("dropped: no shiptype %zu, unmapped %zu, leftover %zu, too short %zu, stationary %zu, river %zu\n",
                c.tracks_no_shiptype, c.tracks_unmapped_shiptype, c.leftover_discarded, c.too_short, c.stationary,
                c.river);
    print_class_table(ds);
    std::printf("manifest %s/%s (%s)\n", a.output.c_str(), dataset::kManifestName,
                file_id(fs::path(a.output) / dataset::kManifestName).c_str());
    return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
    std::string dataset;
    std::string output;
    std::optional<std::string> preset;
    std::optional<bool> batch_norm;
    std::optional<std::size_t> max_epochs, batch_size;
    std::optional<double> learning_rate, noise;
    std::optional<bool> class_weights;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    bool quiet = false;
};

int run_train(const TrainArgs& a, const Settings& settings) {
    const json model_section = settings.section("model");
    std::string preset_name = model_section.value("preset", std::string("tiny_resnet"));
    bool batch_norm = model_section.value("batch_norm", false);
    if (a.preset) preset_name = *a.preset;
    if (a.batch_norm) batch_norm = *a.batch_norm;
    check_preset(preset_name);

    auto tc = tsnet::train_config_from_json(settings.section("train"));
    if (a.max_epochs) tc.max_epochs = *a.max_epochs;
    if (a.batch_size) tc.batch_size = *a.batch_size;
    if (a.learning_rate) tc.learning_rate = *a.learning_rate;
    if (a.noise) tc.noise_sigma = *a.noise;
    if (a.class_weights) tc.class_weights = *a.class_weights;
    if (a.seed) tc.seed = *a.seed;
    if (a.workers) tc.threads = *a.workers;

    const auto ds = dataset::load_dataset(a.dataset);
    const auto model = tsnet::preset(preset_name, ds.config.seq_len, batch_norm);
    const auto train_set = tsnet::make_labeled_set(ds.split(dataset::Split::Train));
    const auto val_set = tsnet::make_labeled_set(ds.split(dataset::Split::Val));

    tsnet::Network<float> net(model);
    net.initialize(tc.seed);
    std::printf("preset %s, parameters %s, depth %zu\n", preset_name.c_str(), grouped(net.parameter_count()).c_str(),
                net.depth());
    std::printf("train %zu, val %zu sequences of length %zu\n", train_set.size(), val_set.size(), ds.config.seq_len);
    std::fflush(stdout);

    auto ckpt = tsnet::train(net, train_set, val_set, tc, [&](const tsnet::EpochRecord& e) {
        if (a.quiet) return;
        std::printf("epoch %4zu  loss %.4f  acc %.4f  val_loss %.4f  val_acc %.4f  lr %.3g%s\n", e.epoch, e.train_loss,
                    e.train_accuracy, e.val_loss, e.val_accuracy, e.learning_rate, e.improved ? "  *" : "");
        std::fflush(stdout);
    });
    const std::string dataset_id = file_id(fs::path(a.dataset) / dataset::kManifestName);
    ckpt.metadata["dataset"] = dataset_id;

    const fs::path out(a.output);
    fs::create_directories(out);
    tsnet::save_checkpoint(ckpt, out / "checkpoint.tsnc");
    write_text(out / "history.csv", tsnet::history_csv(ckpt.history));

    json run;
    run["command"] = "train";
    run["inputs"] = {{"dataset", a.dataset}, {"dataset_manifest_crc32", dataset_id}};
    run["model"] = {{"preset", preset_name}, {"batch_norm", batch_norm}};
    run["train"] = tsnet::to_json(tc);
    write_text(out / "run_config.json", run.dump(2) + "\n");

    std::printf("best epoch %zu (val_loss %.4f), stopped by %s\n", ckpt.history.best_epoch, ckpt.history.best_val_loss,
                ckpt.history.stop_reason.c_str());
    std::printf("checkpoint %s\n", (out / "checkpoint.tsnc").string().c_str());
    return 0;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
    std::string checkpoint;
    std::string dataset;
    std::string split = "test";
    std::string output;
    std::optional<int> workers;
};

int run_eval(const EvalArgs& a) {
    const auto split = dataset::parse_split(a.split);
    const auto ckpt = tsnet::load_checkpoint(a.checkpoint);
    const auto ds = dataset::load_dataset(a.dataset);
    if (ckpt.model.length != ds.config.seq_len)
        throw Error(ErrorCode::ShapeMismatch, "checkpoint expects length " + std::to_string(ckpt.model.length) +
                                                  ", dataset has " + std::to_string(ds.config.seq_len));
    if (a.workers && *a.workers > 0) omp_set_num_threads(*a.workers);
    auto net = tsnet::restore_network(ckpt);
    const auto set = tsnet::make_labeled_set(ds.split(split));
    if (set.size() == 0) throw Error(ErrorCode::EmptySplit, "split '" + a.split + "' is empty");
    const auto predicted = tsnet::argmax_rows(tsnet::predict(net, set), ckpt.model.classes);
    metrics::ConfusionMatrix m;
    for (std::size_t i = 0; i < set.size(); ++i) m.accumulate(set.labels[i], predicted[i]);

    const auto report = metrics::make_report(m, a.split, file_id(fs::path(a.dataset) / dataset::kManifestName),
                                             file_id(a.checkpoint), ckpt.model.preset);
    const fs::path out = a.output.empty() ? fs::path(a.checkpoint).parent_path() : fs::path(a.output);
    const std::string stem = "report-" + a.split;
    write_text(out / (stem + ".json"), metrics::render_json(report));
    write_text(out / (stem + ".txt"), metrics::render_text(report));
    write_text(out / (stem + ".svg"), metrics::render_svg(report));
    std::fputs(metrics::render_text(report).c_str(), stdout);
    return 0;
}

// ---------------------------------------------------------------- inspect

int inspect_dataset(const fs::path& dir) {
    const auto manifest = json::parse(read_text(dir / dataset::kManifestName));
    const auto ds = dataset::load_dataset(dir);
    std::printf("dataset %s (manifest %s)\n", dir.string().c_str(),
                file_id(dir / dataset::kManifestName).c_str());
    std::printf("sequence length %zu, transform %s, normalization %s, split mode %s, seed %llu\n", ds.config.seq_len,
                std::string(pipeline::to_string(ds.config.transform)).c_str(),
                std::string(pipeline::to_string(ds.config.norm)).c_str(),
                std::string(dataset::to_string(ds.config.split_mode)).c_str(),
                static_cast<unsigned long long>(ds.config.seed));
    std::printf("thresholds:\n");
    for (const auto& [k, v] : manifest.at("thresholds").items()) std::printf("  %-36s %s\n", k.c_str(), v.dump().c_str());
    std::printf("feature schema:\n");
    for (const auto& ch : manifest.at("normalization").at("channels"))
        std::printf("  %-10s [%g, %g] %s\n", ch.at("name").get<std::string>().c_str(), ch.at("min").get<double>(),
                    ch.at("max").get<double>(), ch.at("source").get<std::string>().c_str());
    std::printf("counters:\n");
    for (const auto& [k, v] : manifest.at("counters").items()) std::printf("  %-28s %s\n", k.c_str(), v.dump().c_str());
    print_class_table(ds);
    return 0;
}

int inspect_checkpoint(const fs::path& path) {
    const auto ckpt = tsnet::load_checkpoint(path);
    const auto& m = ckpt.model;
    std::printf("checkpoint %s (%s)\n", path.string().c_str(), file_id(path).c_str());
    std::printf("preset %s, architecture %s, length %zu, channels %zu, classes %zu, batch norm %s\n",
                m.preset.c_str(), std::string(tsnet::to_string(m.architecture)).c_str(), m.length, m.channels,
                m.classes, m.batch_norm ? "on" : "off");
    std::printf("parameters %s, depth %zu\n", grouped(tsnet::parameter_count(m)).c_str(), tsnet::depth(m));
    const auto& h = ckpt.history;
    std::printf("epochs %zu, best epoch %zu (val_loss %.4f), stopped by %s\n", h.epochs.size(), h.best_epoch,
                h.best_val_loss, h.stop_reason.empty() ? "-" : h.stop_reason.c_str());
    std::printf("train config %s\n", tsnet::to_json(ckpt.train).dump().c_str());
    if (!ckpt.metadata.empty()) std::printf("metadata %s\n", ckpt.metadata.dump().c_str());
    return 0;
}

int inspect_shard(const fs::path& path) {
    const auto seqs = shard::read_shard(path);
    std::array<std::size_t, pipeline::kNumClasses> counts{};
    for (const auto& s : seqs) ++counts[static_cast<std::size_t>(s.label)];
    std::printf("shard %s: %zu sequences of length %zu\n", path.string().c_str(), seqs.size(),
                seqs.empty() ? std::size_t{0} : seqs.front().length);
    for (int c = 0; c < pipeline::kNumClasses; ++c)
        std::printf("  %-16s %zu\n", std::string(pipeline::class_name(c)).c_str(), counts[static_cast<std::size_t>(c)]);
    return 0;
}

int run_inspect(const std::string& target) {
    const fs::path path(target);
    if (fs::is_directory(path)) return inspect_dataset(path);
    if (path.filename() == dataset::kManifestName) return inspect_dataset(path.parent_path());
    const auto bytes = shard::read_file(path);
    auto starts_with = [&](const char (&magic)[4]) {
        return bytes.size() >= 4 && std::equal(magic, magic + 4, bytes.begin());
    };
    if (starts_with(tsnet::kCheckpointMagic)) return inspect_checkpoint(path);
    if (starts_with(shard::kMagic)) return inspect_shard(path);
    throw Error(ErrorCode::MagicMismatch, path.string() + " is neither a checkpoint nor a shard");
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
    std::string output;
    std::size_t per_class = 200;
    std::size_t samples = 360;
    std::uint64_t seed = 7;
    double majority = 0.0;
    bool nmea = false;
};

int run_synth(const SynthArgs& a) {
    const auto corpus = a.majority > 0.0 ? synth::imbalanced_corpus(3 * a.per_class, a.majority, a.samples, a.seed)
                                         : synth::three_class_corpus(a.per_class, a.samples, a.seed);
    const auto records = synth::generate_records(corpus);
    const fs::path out(a.output);
    fs::create_directories(out);
    ais::write_records_csv(out / "records.csv", records);
    geo::write_points(out / "coastline.csv", synth::fixture_coastline());
    geo::write_points(out / "harbors.csv", synth::fixture_harbors());
    geo::write_points(out / "rivers.csv", synth::fixture_river());
    if (a.nmea) {
        std::string text;
        for (const auto& line : synth::to_nmea(records)) text += line + "\n";
        write_text(out / "records.nmea", text);
    }
    std::printf("wrote %zu records of %zu vessels to %s\n", records.size(), 3 * a.per_class, out.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AIS vessel trajectory classification"};
    app.require_subcommand(1);
    app.fallthrough();
    Settings settings;
    app.add_option("--config", settings.config_file, "JSON file with dataset/model/train sections")
        ->check(CLI::ExistingFile);

    const std::vector<std::size_t> lengths{360, 1080, 1800};

    DecodeArgs dec;
    auto* decode = app.add_subcommand("decode", "NMEA AIVDM/AIVDO lines to a records CSV");
    decode->add_option("inputs", dec.inputs, "NMEA files")->required();
    decode->add_option("-o,--output", dec.output, "records CSV")->required();
    decode->add_option("--window", dec.window, "multipart reassembly window in sentences");

    BuildArgs bld;
    auto* build = app.add_subcommand("build", "records CSV to a sharded dataset");
    build->add_option("records", bld.records, "records CSV")->required()->check(CLI::ExistingFile);
    build->add_option("-o,--output", bld.output, "dataset directory")->required();
    build->add_option("--coast", bld.coast, "coastline points (default $AISQ_DATA_DIR/coastline.csv)");
    build->add_option("--harbors", bld.harbors, "harbor points (default $AISQ_DATA_DIR/harbors.csv)");
    build->add_option("--rivers", bld.rivers, "river polyline points (default $AISQ_DATA_DIR/rivers.csv if present)");
    build->add_option("--seed", bld.seed, "shuffle seed");
    build->add_option("--seq-len", bld.seq_len, "sequence length")->check(CLI::IsMember(lengths));
    build->add_option("--transform", bld.transform, "positional transform")->check(CLI::IsMember({"rtf", "rtz"}));
    build->add_option("--norm", bld.norm, "normalization mode")->check(CLI::IsMember({"global", "local"}));
    build->add_option("--split-mode", bld.split_mode, "split granularity")
        ->check(CLI::IsMember({"sequence", "vessel"}));
    build->add_option("--workers", bld.workers, "threads for per-vessel stages")->check(CLI::PositiveNumber);

    TrainArgs trn;
    auto* train = app.add_subcommand("train", "train a preset on a dataset");
    train->add_option("dataset", trn.dataset, "dataset directory")->required()->check(CLI::ExistingDirectory);
    train->add_option("-o,--output", trn.output, "run directory")->required();
    train->add_option("--preset", trn.preset, "model preset");
    train->add_flag("--batch-norm,!--no-batch-norm", trn.batch_norm, "batch normalization after each layer");
    train->add_option("--max-epochs", trn.max_epochs, "epoch limit");
    train->add_option("--batch-size", trn.batch_size, "sequences per batch (default from length)");
    train->add_option("--lr", trn.learning_rate, "initial learning rate (default 0.001, 0.002 with batch norm)");
    train->add_option("--noise", trn.noise, "input noise sigma");
    train->add_flag("--class-weights,!--no-class-weights", trn.class_weights, "inverse-frequency loss weights");
    train->add_option("--seed", trn.seed, "initialization and shuffling seed");
    train->add_option("--workers", trn.workers, "compute threads")->check(CLI::PositiveNumber);
    train->add_flag("-q,--quiet", trn.quiet, "no per-epoch lines");

    EvalArgs evl;
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset split");
    eval->add_option("checkpoint", evl.checkpoint, "checkpoint file")->required()->check(CLI::ExistingFile);
    eval->add_option("dataset", evl.dataset, "dataset directory")->required()->check(CLI::ExistingDirectory);
    eval->add_option("--split", evl.split, "train, val or test")->check(CLI::IsMember({"train", "val", "test"}));
    eval->add_option("-o,--output", evl.output, "report directory (default: next to the checkpoint)");
    eval->add_option("--workers", evl.workers, "compute threads")->check(CLI::PositiveNumber);

    std::string inspect_target;
    auto* inspect = app.add_subcommand("inspect", "summarize a dataset, shard or checkpoint");
    inspect->add_option("path", inspect_target, "dataset directory, shard or checkpoint")->required();

    SynthArgs syn;
    auto* synth_cmd = app.add_subcommand("synth", "write a synthetic three-class corpus and fixture geo files");
    synth_cmd->add_option("-o,--output", syn.output, "output directory")->required();
    synth_cmd->add_option("--per-class", syn.per_class, "vessels per class")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--samples", syn.samples, "reports per vessel")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--seed", syn.seed, "generator seed");
    synth_cmd->add_option("--majority", syn.majority, "share of the straight-track class (0: balanced)")
        ->check(CLI::Range(0.0, 1.0));
    synth_cmd->add_flag("--nmea", syn.nmea, "also write records.nmea");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_status(ErrorCode::Usage);
    }

    try {
        settings.load();
        if (*decode) return run_decode(dec);
        if (*build) return run_build(bld, settings);
        if (*train) return run_train(trn, settings);
        if (*eval) return run_eval(evl);
        if (*inspect) return run_inspect(inspect_target);
        if (*synth_cmd) return run_synth(syn);
    } catch (const Error& e) {
        std::fprintf(stderr, "aisq: %s\n", e.what());
        return exit_status(e.code());
    } catch (const fs::filesystem_error& e) {
        std::fprintf(stderr, "aisq: %s\n", e.what());
        return exit_status(ErrorCode::IoError);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "aisq: %s\n", e.what());
        return exit_status(ErrorCode::FormatError);
    }
    return 0;
}

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
//   acceptance            all criteria
//   acceptance 4 8        selected criteria

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "aisq/ais.hpp"
#include "aisq/dataset.hpp"
#include "aisq/error.hpp"
#include "aisq/geo.hpp"
#include "aisq/metrics.hpp"
#include "aisq/model.hpp"
#include "aisq/synth.hpp"
#include "aisq/train.hpp"
#include "support/geo_oracle.hpp"
#include "support/gradcheck.hpp"
#include "support/pipeline_invariants.hpp"

using namespace aisq;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Outcome mlp_parameter_counts() {
    const auto a = tsnet::parameter_count(tsnet::preset("mlp_2x64", 360));
    const auto b = tsnet::parameter_count(tsnet::preset("mlp_4x64", 360));
    tsnet::Network<float> na(tsnet::preset("mlp_2x64", 360)), nb(tsnet::preset("mlp_4x64", 360));
    std::ostringstream s;
    s << "mlp_2x64 " << a << ", mlp_4x64 " << b << " (built networks " << na.parameter_count() << ", "
      << nb.parameter_count() << ")";
    return {a == 211909 && b == 220229 && na.parameter_count() == a && nb.parameter_count() == b, s.str()};
}

Outcome published_matrix() {
    metrics::ConfusionMatrix m;
    m.counts = {{{97636, 1250, 831, 832, 2135},
                 {1669, 24074, 225, 343, 699},
                 {1700, 289, 28284, 426, 374},
                 {1148, 397, 356, 12296, 344},
                 {3032, 637, 270, 284, 37301}}};
    const double printed[5][5] = {{95.1, 1.2, 0.8, 0.8, 2.1},
                                  {6.2, 89.1, 0.8, 1.3, 2.6},
                                  {5.5, 0.9, 91.0, 1.4, 1.2},
                                  {7.9, 2.7, 2.4, 84.6, 2.4},
                                  {7.3, 1.5, 0.7, 0.7, 89.8}};
    const double f1 = metrics::micro_f1(m);
    const auto n = metrics::row_normalize(m);
    double worst = 0.0;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) worst = std::max(worst, std::abs(100.0 * n.values[i][j] - printed[i][j]));
    char buf[160];
    std::snprintf(buf, sizeof buf, "micro F1 %.6f, worst row percentage deviation %.3f pp", f1, worst);
    return {std::abs(f1 - 0.92049) <= 0.0005 && worst <= 0.1, buf};
}

Outcome gradient_suite() {
    const auto cases = testing::gradient_cases();
    double worst = 0.0;
    std::string worst_name;
    std::size_t coords = 0;
    std::uint64_t seed = 11;
    for (const auto& c : cases) {
        auto layer = c.make();
        const auto r = testing::check_gradients(c.name, *layer, c.input_shape, seed++);
        coords += r.coordinates;
        if (r.max_rel_error >= worst) {
            worst = r.max_rel_error;
            worst_name = c.name + " / " + r.worst_tensor;
        }
    }
    char buf[200];
    std::snprintf(buf, sizeof buf, "%zu configurations, %zu coordinates, worst relative error %.2e (%s)",
                  cases.size(), coords, worst, worst_name.c_str());
    return {cases.size() >= 20 && worst < 1e-4, buf};
}

struct Fixture {
    std::vector<geo::GeoPoint> coast_pts = synth::fixture_coastline();
    std::vector<geo::GeoPoint> harbor_pts = synth::fixture_harbors();
    geo::GeoGridIndex coast{coast_pts, 40.0};
    geo::GeoGridIndex harbor{harbor_pts, 5000.0};
    dataset::GeoContext geo() const { return {&coast, &harbor, nullptr}; }
};

struct TrainResult {
    double accuracy = 0.0;
    std::set<int> predicted;
    double seconds = 0.0;
    std::size_t epochs = 0;
};

TrainResult train_and_test(const dataset::Dataset& ds, const std::string& preset) {
    const auto tr = tsnet::make_labeled_set(ds.split(dataset::Split::Train));
    const auto va = tsnet::make_labeled_set(ds.split(dataset::Split::Val));
    const auto te = tsnet::make_labeled_set(ds.split(dataset::Split::Test));
    tsnet::Network<float> net(tsnet::preset(preset, ds.config.seq_len));
    net.initialize(42);
    tsnet::TrainConfig cfg;
    cfg.max_epochs = 100;
    const auto t0 = Clock::now();
    const auto ck = tsnet::train(net, tr, va, cfg);
    TrainResult r;
    r.seconds = seconds_since(t0);
    r.epochs = ck.history.epochs.size();
    const auto pred = tsnet::argmax_rows(tsnet::predict(net, te), pipeline::kNumClasses);
    std::size_t right = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        right += pred[i] == te.labels[i];
        r.predicted.insert(pred[i]);
    }
    r.accuracy = static_cast<double>(right) / static_cast<double>(pred.size());
    return r;
}

dataset::Dataset build(const synth::CorpusConfig& corpus) {
    const Fixture fx;
    return dataset::build_dataset(synth::generate_tracks(corpus), fx.geo(), dataset::DatasetConfig{});
}

Outcome synthetic_classification() {
    const auto ds = build(synth::three_class_corpus(200, 360, 7));
    const auto resnet = train_and_test(ds, "tiny_resnet");
    const auto mlp = train_and_test(ds, "mlp_2x64");
    char buf[300];
    std::snprintf(buf, sizeof buf,
                  "%zu sequences; tiny_resnet %.1f%% in %zu epochs, %.0f s; mlp_2x64 %.1f%% in %zu epochs, %.0f s",
                  ds.sequences.size(), 100 * resnet.accuracy, resnet.epochs, resnet.seconds, 100 * mlp.accuracy,
                  mlp.epochs, mlp.seconds);
    return {ds.sequences.size() == 600 && resnet.accuracy >= 0.95 && resnet.seconds < 600.0 && mlp.accuracy < 0.60,
            buf};
}

Outcome pipeline_invariants() {
    const Fixture fx;
    const auto t0 = Clock::now();
    const auto tracks = testing::fuzz_tracks(10000, 2024);
    const auto rep = testing::check_pipeline_invariants(tracks, fx.geo());
    return {rep.ok() && rep.sequences > 0, rep.summary() + ", " + std::to_string(std::lround(seconds_since(t0))) + " s"};
}

Outcome geo_oracle() {
    std::mt19937_64 rng(99);
    double worst = 0.0;
    std::size_t capped = 0, cap_errors = 0;
    for (double cell : {40.0, 5000.0}) {
        const auto refs = testing::random_points(rng, 10000);
        const geo::GeoGridIndex index(refs, cell);
        for (const auto& q : testing::random_points(rng, 1000)) {
            const double expect = testing::brute_min_distance(refs, q, index.query_radius_km());
            const double got = index.min_distance_within(q);
            worst = std::max(worst, std::abs(expect - got));
            if (expect == index.query_radius_km()) {
                ++capped;
                cap_errors += got != index.query_radius_km();
            }
        }
    }
    // Nothing within range at all.
    const std::vector<geo::GeoPoint> one = {{54.0, 7.0}};
    const geo::GeoGridIndex coast(one, 40.0), harbor(one, 5000.0);
    const bool caps = coast.min_distance_within({-30.0, 100.0}) == 20.0 &&
                      harbor.min_distance_within({-54.0, -173.0}) == 2500.0;
    char buf[200];
    std::snprintf(buf, sizeof buf, "2 x 1000 queries over 10000 points, worst difference %.2e km, %zu capped queries",
                  worst, capped);
    return {worst <= 1e-9 && cap_errors == 0 && capped > 0 && caps, buf};
}

Outcome decoder_round_trip() {
    std::mt19937_64 rng(7);
    std::size_t mismatches = 0, accepted_flips = 0, flips = 0;
    for (int i = 0; i < 1000; ++i) {
        ais::PositionFields f;
        f.message_type = 1 + static_cast<int>(rng() % 3);
        f.mmsi = static_cast<std::uint32_t>(rng() % 1000000000u);
        f.sog = static_cast<int>(rng() % 1023);
        f.lon_raw = static_cast<std::int64_t>(rng() % (360ull * 600000 + 1)) - 180 * 600000;
        f.lat_raw = static_cast<std::int64_t>(rng() % (180ull * 600000 + 1)) - 90 * 600000;
        f.cog = static_cast<int>(rng() % 3600);
        const auto armored = ais::encode_payload(ais::encode_position_report(f));
        ais::NmeaSentence s;
        s.talker_tag = "AIVDM";
        s.payload = armored.payload;
        s.fill_bits = armored.fill_bits;
        const auto line = ais::render_sentence(s);
        try {
            const auto p = ais::parse_sentence(line);
            const auto r = ais::decode_position_report(ais::decode_payload(p.payload, p.fill_bits));
            if (r.mmsi != f.mmsi || r.sog != f.sog || std::llround(r.lon * 600000.0) != f.lon_raw ||
                std::llround(r.lat * 600000.0) != f.lat_raw || std::llround(r.cog * 10.0) != f.cog)
                ++mismatches;
        } catch (const Error&) {
            ++mismatches;
        }
        for (std::size_t c = 0; c < line.size(); ++c)
            for (int b = 0; b < 8; ++b) {
                std::string bad = line;
                bad[c] = static_cast<char>(static_cast<unsigned char>(bad[c]) ^ (1u << b));
                ++flips;
                try {
                    ais::parse_sentence(bad);
                    ++accepted_flips;
                } catch (const Error&) {
                }
            }
    }
    std::ostringstream o;
    o << "1000 reports, " << mismatches << " mismatches; " << flips << " single-bit corruptions, " << accepted_flips
      << " accepted";
    return {mismatches == 0 && accepted_flips == 0, o.str()};
}

std::string classes_of(const std::set<int>& s) {
    std::string out;
    for (int c : s) out += (out.empty() ? "" : ", ") + std::string(pipeline::class_name(c));
    return "{" + out + "}";
}

Outcome majority_collapse() {
    const auto ds = build(synth::imbalanced_corpus(600, 0.7, 360, 7));
    const auto mlp = train_and_test(ds, "mlp_2x64");
    const auto resnet = train_and_test(ds, "tiny_resnet");
    const auto counts = ds.class_counts();
    const auto majority = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    std::ostringstream o;
    o << "mlp_2x64 predicts " << classes_of(mlp.predicted) << " (" << std::lround(100 * mlp.accuracy)
      << "%), tiny_resnet predicts " << classes_of(resnet.predicted) << " (" << std::lround(100 * resnet.accuracy)
      << "%)";
    return {mlp.predicted == std::set<int>{majority} && resnet.predicted.size() > 1, o.str()};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"mlp parameter counts", mlp_parameter_counts},
        {"published confusion matrix", published_matrix},
        {"gradient suite", gradient_suite},
        {"synthetic classification", synthetic_classification},
        {"pipeline invariants", pipeline_invariants},
        {"geo grid against brute force", geo_oracle},
        {"decoder round trip", decoder_round_trip},
        {"majority-class collapse", majority_collapse},
    };
    std::set<std::size_t> selected;
    for (int i = 1; i < argc; ++i) {
        const int k = std::atoi(argv[i]);
        if (k < 1 || k > static_cast<int>(criteria.size())) {
            std::fprintf(stderr, "usage: acceptance [1-%zu ...]\n", criteria.size());
            return 2;
        }
        selected.insert(static_cast<std::size_t>(k));
    }
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!selected.empty() && !selected.count(i + 1)) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}

#include <doctest.h>

#include <json.hpp>

#include "aisq/error.hpp"
#include "aisq/metrics.hpp"

using namespace aisq;
using namespace aisq::metrics;

namespace {

// Shallow ResNet, 360 samples, relative-to-first.
ConfusionMatrix published() {
    ConfusionMatrix m;
    m.counts = {{{97636, 1250, 831, 832, 2135},
                 {1669, 24074, 225, 343, 699},
                 {1700, 289, 28284, 426, 374},
                 {1148, 397, 356, 12296, 344},
                 {3032, 637, 270, 284, 37301}}};
    return m;
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Usage;
}

}  // namespace

TEST_CASE("published confusion matrix") {
    const auto m = published();
    CHECK(m.total() == 216832);
    CHECK(m.trace() == 199591);
    CHECK(micro_f1(m) == doctest::Approx(0.9204868285).epsilon(1e-10));
    CHECK(std::abs(micro_f1(m) - 0.92049) <= 0.0005);

    // tests/oracles/metrics_oracle.py
    const double p[] = {0.9282312117, 0.9034412879, 0.9438697190, 0.8670756646, 0.9130541209};
    const double r[] = {0.9508394687, 0.8912995187, 0.9102436199, 0.8456089677, 0.8982997784};
    const double f[] = {0.9393993332, 0.8973293326, 0.9267517489, 0.8562077850, 0.9056168591};
    const auto prf = per_class_prf(m);
    for (std::size_t k = 0; k < K; ++k) {
        CAPTURE(k);
        CHECK(prf.per_class[k].precision == doctest::Approx(p[k]).epsilon(1e-9));
        CHECK(prf.per_class[k].recall == doctest::Approx(r[k]).epsilon(1e-9));
        CHECK(prf.per_class[k].f1 == doctest::Approx(f[k]).epsilon(1e-9));
        CHECK_FALSE(prf.per_class[k].never_predicted);
    }
    CHECK(prf.macro_f1 == doctest::Approx(0.9050610118).epsilon(1e-9));

    // Percentages as printed in the figure.
    const double printed[5][5] = {{95.1, 1.2, 0.8, 0.8, 2.1},
                                  {6.2, 89.1, 0.8, 1.3, 2.6},
                                  {5.5, 0.9, 91.0, 1.4, 1.2},
                                  {7.9, 2.7, 2.4, 84.6, 2.4},
                                  {7.3, 1.5, 0.7, 0.7, 89.8}};
    const auto n = row_normalize(m);
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j) CHECK(std::abs(100.0 * n.values[i][j] - printed[i][j]) <= 0.1);
    CHECK(n.values[0][0] == doctest::Approx(0.95083947).epsilon(1e-8));
}

TEST_CASE("accumulate, merge and empty matrices") {
    ConfusionMatrix a, b;
    a.accumulate(0, 0);
    a.accumulate(0, 1);
    b.accumulate(4, 4);
    CHECK(a.merge(b).total() == 3);
    CHECK(a.trace() == 2);
    CHECK(code_of([&] { a.accumulate(5, 0); }) == ErrorCode::LabelOutOfRange);
    CHECK(code_of([&] { a.accumulate(0, -1); }) == ErrorCode::LabelOutOfRange);
    const ConfusionMatrix empty;
    CHECK(code_of([&] { micro_f1(empty); }) == ErrorCode::EmptyMatrix);
    CHECK(code_of([&] { per_class_prf(empty); }) == ErrorCode::EmptyMatrix);
}

TEST_CASE("classes never predicted or never present are flagged") {
    // Everything predicted as class 0: the collapsed-model pattern.
    ConfusionMatrix m;
    m.counts[0][0] = 70;
    m.counts[1][0] = 15;
    m.counts[3][0] = 15;
    const auto prf = per_class_prf(m);
    CHECK(prf.per_class[0].precision == doctest::Approx(0.7));
    CHECK(prf.per_class[0].recall == 1.0);
    CHECK(prf.per_class[1].never_predicted);
    CHECK(prf.per_class[1].f1 == 0.0);
    CHECK(prf.per_class[2].never_actual);
    CHECK(prf.per_class[2].never_predicted);
    CHECK(micro_f1(m) == doctest::Approx(0.7));
    const auto n = row_normalize(m);
    CHECK(n.zero_row[2]);
    CHECK(n.values[2][2] == 0.0);
    CHECK_FALSE(n.zero_row[1]);
}

TEST_CASE("reports render and read back") {
    const auto rep = make_report(published(), "test", "ds-1a2b", "ck-3c4d", "shallow_resnet");
    const auto json = render_json(rep);
    const auto j = nlohmann::json::parse(json);
    CHECK(j["format"] == "aisq-eval-report");
    CHECK(j["total"] == 216832);
    CHECK(j["classes"].size() == 5);
    CHECK(j["classes"][3]["name"] == "Pleasure Craft");
    const auto back = parse_report_json(json);
    CHECK(back.matrix == rep.matrix);
    CHECK(back.model == "shallow_resnet");
    CHECK(render_json(back) == json);
    CHECK(code_of([] { parse_report_json("{\"format\": \"other\"}"); }) == ErrorCode::FormatError);
    CHECK(code_of([] { parse_report_json("not json"); }) == ErrorCode::FormatError);

    const auto text = render_text(rep);
    for (const char* name : {"Cargo-Tanker", "Fishing", "Passenger", "Pleasure Craft", "Tug"})
        CHECK(text.find(name) != std::string::npos);
    CHECK(text.find("0.9205") != std::string::npos);

    const auto svg = render_svg(rep);
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(svg.find("<svg xmlns=\"http://www.w3.org/2000/svg\"") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("97636") != std::string::npos);
    CHECK(svg.find("95.1%") != std::string::npos);
    std::size_t open = 0, close = 0;
    for (std::size_t i = svg.find("<text"); i != std::string::npos; i = svg.find("<text", i + 1)) ++open;
    for (std::size_t i = svg.find("</text>"); i != std::string::npos; i = svg.find("</text>", i + 1)) ++close;
    CHECK(open == close);
    CHECK(open >= 25);
}

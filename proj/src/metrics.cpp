#include "aisq/metrics.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "aisq/error.hpp"

namespace aisq::metrics {

void ConfusionMatrix::accumulate(int actual, int predicted) {
    if (actual < 0 || actual >= static_cast<int>(K) || predicted < 0 || predicted >= static_cast<int>(K))
        throw Error(ErrorCode::LabelOutOfRange,
                    "labels " + std::to_string(actual) + "/" + std::to_string(predicted) + " outside 0..4");
    ++counts[static_cast<std::size_t>(actual)][static_cast<std::size_t>(predicted)];
}

ConfusionMatrix& ConfusionMatrix::merge(const ConfusionMatrix& o) {
    for (std::size_t r = 0; r < K; ++r)
        for (std::size_t c = 0; c < K; ++c) counts[r][c] += o.counts[r][c];
    return *this;
}

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t t = 0;
    for (const auto& row : counts)
        for (auto v : row) t += v;
    return t;
}

std::uint64_t ConfusionMatrix::trace() const {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < K; ++i) t += counts[i][i];
    return t;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t r) const {
    std::uint64_t t = 0;
    for (auto v : counts.at(r)) t += v;
    return t;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t c) const {
    std::uint64_t t = 0;
    for (const auto& row : counts) t += row.at(c);
    return t;
}

double micro_f1(const ConfusionMatrix& m) {
    const auto total = m.total();
    if (total == 0) throw Error(ErrorCode::EmptyMatrix, "confusion matrix is empty");
    return static_cast<double>(m.trace()) / static_cast<double>(total);
}

double accuracy(const ConfusionMatrix& m) { return micro_f1(m); }

PrfResult per_class_prf(const ConfusionMatrix& m) {
    if (m.total() == 0) throw Error(ErrorCode::EmptyMatrix, "confusion matrix is empty");
    PrfResult out;
    double sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        auto& c = out.per_class[k];
        const auto tp = static_cast<double>(m.counts[k][k]);
        const auto predicted = m.col_sum(k);
        c.support = m.row_sum(k);
        c.never_predicted = predicted == 0;
        c.never_actual = c.support == 0;
        c.precision = c.never_predicted ? 0.0 : tp / static_cast<double>(predicted);
        c.recall = c.never_actual ? 0.0 : tp / static_cast<double>(c.support);
        c.f1 = c.precision + c.recall > 0.0 ? 2.0 * c.precision * c.recall / (c.precision + c.recall) : 0.0;
        sum += c.f1;
    }
    out.macro_f1 = sum / static_cast<double>(K);
    return out;
}

RowNormalized row_normalize(const ConfusionMatrix& m) {
    RowNormalized out;
    for (std::size_t r = 0; r < K; ++r) {
        const auto s = m.row_sum(r);
        out.zero_row[r] = s == 0;
        for (std::size_t c = 0; c < K; ++c)
            out.values[r][c] = s == 0 ? 0.0 : static_cast<double>(m.counts[r][c]) / static_cast<double>(s);
    }
    return out;
}

EvalReport make_report(const ConfusionMatrix& matrix, std::string split, std::string dataset, std::string checkpoint,
                       std::string model) {
    EvalReport r;
    r.split = std::move(split);
    r.dataset = std::move(dataset);
    r.checkpoint = std::move(checkpoint);
    r.model = std::move(model);
    r.matrix = matrix;
    r.prf = per_class_prf(matrix);
    r.micro_f1 = micro_f1(matrix);
    r.accuracy = static_cast<double>(matrix.trace()) / static_cast<double>(matrix.total());
    assert(r.micro_f1 == r.accuracy);
    r.normalized = row_normalize(matrix);
    return r;
}

// ---------------------------------------------------------------- rendering

std::string render_json(const EvalReport& r) {
    nlohmann::ordered_json j;
    j["format"] = "aisq-eval-report";
    j["version"] = 1;
    j["split"] = r.split;
    j["dataset"] = r.dataset;
    j["checkpoint"] = r.checkpoint;
    j["model"] = r.model;
    j["total"] = r.matrix.total();
    j["micro_f1"] = r.micro_f1;
    j["accuracy"] = r.accuracy;
    j["macro_f1"] = r.prf.macro_f1;
    j["classes"] = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < K; ++k) {
        const auto& c = r.prf.per_class[k];
        j["classes"].push_back({{"name", pipeline::class_name(static_cast<int>(k))},
                                {"precision", c.precision},
                                {"recall", c.recall},
                                {"f1", c.f1},
                                {"support", c.support},
                                {"never_predicted", c.never_predicted},
                                {"never_actual", c.never_actual}});
    }
    j["confusion_matrix"] = r.matrix.counts;
    j["row_normalized"] = r.normalized.values;
    j["zero_rows"] = r.normalized.zero_row;
    return j.dump(2) + "\n";
}

EvalReport parse_report_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.at("format") != "aisq-eval-report") throw Error(ErrorCode::FormatError, "not an evaluation report");
        ConfusionMatrix m;
        const auto& rows = j.at("confusion_matrix");
        if (rows.size() != K) throw Error(ErrorCode::FormatError, "confusion matrix must be 5 x 5");
        for (std::size_t r = 0; r < K; ++r) {
            if (rows[r].size() != K) throw Error(ErrorCode::FormatError, "confusion matrix must be 5 x 5");
            for (std::size_t c = 0; c < K; ++c) m.counts[r][c] = rows[r][c].get<std::uint64_t>();
        }
        return make_report(m, j.at("split"), j.at("dataset"), j.at("checkpoint"), j.at("model"));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::FormatError, std::string("report JSON: ") + e.what());
    }
}

namespace {

std::string fixed(double v, int digits) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string pad(std::string s, std::size_t width, bool right = true) {
    if (s.size() >= width) return s;
    return right ? std::string(width - s.size(), ' ') + s : s + std::string(width - s.size(), ' ');
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += ch;
        }
    }
    return out;
}

}  // namespace

std::string render_text(const EvalReport& r) {
    std::ostringstream os;
    os << "model: " << r.model << "\ncheckpoint: " << r.checkpoint << "\ndataset: " << r.dataset
       << "\nsplit: " << r.split << "  sequences: " << r.matrix.total() << "\n\n";
    os << pad("class", 15, false) << pad("precision", 10) << pad("recall", 10) << pad("f1", 10) << pad("support", 10)
       << "\n";
    for (std::size_t k = 0; k < K; ++k) {
        const auto& c = r.prf.per_class[k];
        os << pad(std::string(pipeline::class_name(static_cast<int>(k))), 15, false) << pad(fixed(c.precision, 4), 10)
           << pad(fixed(c.recall, 4), 10) << pad(fixed(c.f1, 4), 10) << pad(std::to_string(c.support), 10);
        if (c.never_predicted) os << "  (never predicted)";
        os << "\n";
    }
    os << "\nmicro-F1 (accuracy): " << fixed(r.micro_f1, 4) << "\nmacro-F1: " << fixed(r.prf.macro_f1, 4) << "\n\n";
    os << "confusion matrix, rows actual, columns predicted (count / row %)\n" << pad("", 15, false);
    for (std::size_t c = 0; c < K; ++c) os << pad(std::string(pipeline::class_name(static_cast<int>(c))), 20);
    os << "\n";
    for (std::size_t rr = 0; rr < K; ++rr) {
        os << pad(std::string(pipeline::class_name(static_cast<int>(rr))), 15, false);
        for (std::size_t c = 0; c < K; ++c)
            os << pad(std::to_string(r.matrix.counts[rr][c]) + " / " + fixed(100.0 * r.normalized.values[rr][c], 1) + "%",
                      20);
        os << "\n";
    }
    return os.str();
}

std::string render_svg(const EvalReport& r) {
    constexpr int W = 820, H = 380;
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
       << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"20\" y=\"24\" font-size=\"14\">" << xml_escape(r.model) << " / " << xml_escape(r.split)
       << ": micro-F1 " << fixed(r.micro_f1, 4) << ", macro-F1 " << fixed(r.prf.macro_f1, 4) << "</text>\n";

    // Per-class F1 bars.
    const int x0 = 60, y0 = 60, bh = 240, bw = 40, gap = 16;
    os << "<g id=\"f1-bars\">\n";
    os << "<line x1=\"" << x0 << "\" y1=\"" << y0 + bh << "\" x2=\"" << x0 + static_cast<int>(K) * (bw + gap)
       << "\" y2=\"" << y0 + bh << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const int y = y0 + bh - t * bh / 4;
        os << "<text x=\"" << x0 - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << fixed(t * 0.25, 2)
           << "</text>\n";
    }
    for (std::size_t k = 0; k < K; ++k) {
        const double f1 = r.prf.per_class[k].f1;
        const int h = static_cast<int>(std::lround(f1 * bh));
        const int x = x0 + static_cast<int>(k) * (bw + gap) + gap / 2;
        os << "<rect x=\"" << x << "\" y=\"" << y0 + bh - h << "\" width=\"" << bw << "\" height=\"" << h
           << "\" fill=\"#4878a8\"><title>" << pipeline::class_name(static_cast<int>(k)) << " F1 " << fixed(f1, 4)
           << "</title></rect>\n";
        os << "<text x=\"" << x + bw / 2 << "\" y=\"" << y0 + bh - h - 4 << "\" text-anchor=\"middle\">"
           << fixed(f1, 3) << "</text>\n";
        os << "<text x=\"" << x + bw / 2 << "\" y=\"" << y0 + bh + 14 << "\" text-anchor=\"middle\" font-size=\"9\">"
           << pipeline::class_name(static_cast<int>(k)) << "</text>\n";
    }
    os << "</g>\n";

    // Row-normalized confusion matrix.
    const int hx = 440, hy = 60, cell = 56;
    os << "<g id=\"confusion\">\n";
    for (std::size_t rr = 0; rr < K; ++rr) {
        os << "<text x=\"" << hx - 6 << "\" y=\"" << hy + static_cast<int>(rr) * cell + cell / 2 + 4
           << "\" text-anchor=\"end\" font-size=\"9\">" << pipeline::class_name(static_cast<int>(rr)) << "</text>\n";
        for (std::size_t c = 0; c < K; ++c) {
            const double v = r.normalized.values[rr][c];
            const int shade = 255 - static_cast<int>(std::lround(v * 200.0));
            const int x = hx + static_cast<int>(c) * cell, y = hy + static_cast<int>(rr) * cell;
            os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell
               << "\" fill=\"rgb(" << shade << ',' << shade << ",255)\" stroke=\"#888\"/>\n";
            os << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 << "\" text-anchor=\"middle\" fill=\""
               << (v > 0.6 ? "white" : "black") << "\">" << fixed(100.0 * v, 1) << "%</text>\n";
            os << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 13
               << "\" text-anchor=\"middle\" font-size=\"9\" fill=\"" << (v > 0.6 ? "white" : "#444") << "\">"
               << r.matrix.counts[rr][c] << "</text>\n";
        }
    }
    for (std::size_t c = 0; c < K; ++c)
        os << "<text x=\"" << hx + static_cast<int>(c) * cell + cell / 2 << "\" y=\"" << hy + static_cast<int>(K) * cell + 14
           << "\" text-anchor=\"middle\" font-size=\"9\">" << pipeline::class_name(static_cast<int>(c)) << "</text>\n";
    os << "<text x=\"" << hx + static_cast<int>(K) * cell / 2 << "\" y=\"" << hy - 10
       << "\" text-anchor=\"middle\">rows actual, columns predicted</text>\n";
    os << "</g>\n</svg>\n";
    return os.str();
}

}  // namespace aisq::metrics

#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "aisq/pipeline.hpp"

namespace aisq::metrics {

inline constexpr std::size_t K = pipeline::kNumClasses;

/// Rows are actual classes, columns predicted classes.
struct ConfusionMatrix {
    std::array<std::array<std::uint64_t, K>, K> counts{};

    /// LabelOutOfRange unless both labels are in 0..K-1.
    void accumulate(int actual, int predicted);
    ConfusionMatrix& merge(const ConfusionMatrix& other);

    std::uint64_t total() const;
    std::uint64_t trace() const;
    std::uint64_t row_sum(std::size_t r) const;
    std::uint64_t col_sum(std::size_t c) const;

    bool operator==(const ConfusionMatrix&) const = default;
};

/// trace / total. EmptyMatrix when total is zero.
double micro_f1(const ConfusionMatrix& m);
double accuracy(const ConfusionMatrix& m);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t support = 0;     // row sum
    bool never_predicted = false;  // precision denominator was zero
    bool never_actual = false;     // recall denominator was zero
};

struct PrfResult {
    std::array<ClassMetrics, K> per_class{};
    double macro_f1 = 0.0;
};

/// EmptyMatrix when total is zero.
PrfResult per_class_prf(const ConfusionMatrix& m);

struct RowNormalized {
    std::array<std::array<double, K>, K> values{};
    std::array<bool, K> zero_row{};
};

RowNormalized row_normalize(const ConfusionMatrix& m);

struct EvalReport {
    std::string split = "test";
    std::string dataset;     // manifest identifier
    std::string checkpoint;  // checkpoint identifier
    std::string model;       // preset name
    ConfusionMatrix matrix;
    PrfResult prf;
    double micro_f1 = 0.0;
    double accuracy = 0.0;
    RowNormalized normalized;
};

/// Derives every metric from `matrix`.
EvalReport make_report(const ConfusionMatrix& matrix, std::string split, std::string dataset, std::string checkpoint,
                       std::string model);

std::string render_json(const EvalReport& report);
std::string render_text(const EvalReport& report);
std::string render_svg(const EvalReport& report);

/// Reads a report produced by render_json; metrics are recomputed from the counts.
EvalReport parse_report_json(const std::string& text);

}  // namespace aisq::metrics

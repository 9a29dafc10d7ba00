#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "malurl/dataset.hpp"

namespace malurl {

/// Labels counted as the positive (malicious) side of the binary counts.
using PositiveSet = std::bitset<kNumClasses>;

/// {defacement, phishing, malware}.
inline PositiveSet malicious_classes() { return PositiveSet("1110"); }

struct ConfusionMatrix {
    std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
    /// rows = true label, columns = predicted label; only the first
    /// `classes` rows and columns are used.
    std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> matrix{};
    std::size_t classes = kNumClasses;

    std::uint64_t total() const { return tp + tn + fp + fn; }

    static ConfusionMatrix from_counts(std::uint64_t tp, std::uint64_t tn, std::uint64_t fp, std::uint64_t fn);
};

/// Fills both the binary counts and the per-class matrix.
ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> truths,
                          PositiveSet positives = malicious_classes(), std::size_t classes = kNumClasses);

enum class MetricsMode { binary, macro };

std::string_view to_string(MetricsMode mode);

struct MetricsReport {
    double precision = 0.0;
    double accuracy = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double specificity = 0.0;
    MetricsMode mode = MetricsMode::binary;

    // Set when the metric's denominator was zero (the metric is then 0).
    bool precision_undefined = false;
    bool recall_undefined = false;
    bool f1_undefined = false;
    bool specificity_undefined = false;
};

/// Binary mode reads tp/tn/fp/fn. Macro mode averages one-vs-rest precision,
/// recall, F1 and specificity over the matrix classes; its accuracy is the
/// overall fraction of correct predictions.
MetricsReport compute_metrics(const ConfusionMatrix& cm, MetricsMode mode = MetricsMode::binary);

struct NamedReport {
    std::string split;
    MetricsReport report;
    ConfusionMatrix confusion;
};

/// Two-decimal display with round-half-up.
std::string format_2dp(double value);

/// Fixed-width table: Split, Precision, Accuracy, Recall, F1-Score, Specificity.
std::string report_table(std::span<const NamedReport> reports);

/// "split,precision,accuracy,recall,f1,specificity,mode" plus one row per report.
std::string report_csv(std::span<const NamedReport> reports);

/// "split,tp,tn,fp,fn" plus one row per report.
std::string confusion_csv(std::span<const NamedReport> reports);

}  // namespace malurl

#include "malurl/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "malurl/common.hpp"

namespace malurl {

ConfusionMatrix ConfusionMatrix::from_counts(std::uint64_t tp, std::uint64_t tn, std::uint64_t fp,
                                             std::uint64_t fn) {
    ConfusionMatrix cm;
    cm.tp = tp;
    cm.tn = tn;
    cm.fp = fp;
    cm.fn = fn;
    cm.classes = 2;
    cm.matrix[0][0] = tn;
    cm.matrix[0][1] = fp;
    cm.matrix[1][0] = fn;
    cm.matrix[1][1] = tp;
    return cm;
}

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> truths,
                          PositiveSet positives, std::size_t classes) {
    require(predictions.size() == truths.size(), "confusion: predictions and truths differ in length");
    require(!truths.empty(), "confusion: no samples");
    require(classes >= 2 && classes <= kNumClasses, "confusion: unsupported class count");
    ConfusionMatrix cm;
    cm.classes = classes;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        const int t = truths[i], p = predictions[i];
        require(t >= 0 && static_cast<std::size_t>(t) < classes && p >= 0 &&
                    static_cast<std::size_t>(p) < classes,
                "confusion: label outside the class range");
        ++cm.matrix[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
        const bool truly_positive = positives.test(static_cast<std::size_t>(t));
        const bool predicted_positive = positives.test(static_cast<std::size_t>(p));
        if (truly_positive && predicted_positive) ++cm.tp;
        else if (truly_positive) ++cm.fn;
        else if (predicted_positive) ++cm.fp;
        else ++cm.tn;
    }
    return cm;
}

std::string_view to_string(MetricsMode mode) { return mode == MetricsMode::binary ? "binary" : "macro"; }

namespace {

double ratio(double num, double den, bool& undefined) {
    if (den == 0.0) {
        undefined = true;
        return 0.0;
    }
    return num / den;
}

struct Rates {
    double precision, recall, f1, specificity;
    bool p_undef = false, r_undef = false, f_undef = false, s_undef = false;
};

Rates rates(double tp, double tn, double fp, double fn) {
    Rates r{};
    r.precision = ratio(tp, tp + fp, r.p_undef);
    r.recall = ratio(tp, tp + fn, r.r_undef);
    r.specificity = ratio(tn, tn + fp, r.s_undef);
    r.f1 = ratio(2.0 * r.precision * r.recall, r.precision + r.recall, r.f_undef);
    return r;
}

}  // namespace

MetricsReport compute_metrics(const ConfusionMatrix& cm, MetricsMode mode) {
    if (cm.total() == 0) fail(ErrorKind::invalid_argument, "compute_metrics: empty confusion matrix");
    MetricsReport report;
    report.mode = mode;
    const auto total = static_cast<double>(cm.total());

    if (mode == MetricsMode::binary) {
        const auto r = rates(double(cm.tp), double(cm.tn), double(cm.fp), double(cm.fn));
        report.precision = r.precision;
        report.recall = r.recall;
        report.f1 = r.f1;
        report.specificity = r.specificity;
        report.precision_undefined = r.p_undef;
        report.recall_undefined = r.r_undef;
        report.f1_undefined = r.f_undef;
        report.specificity_undefined = r.s_undef;
        report.accuracy = static_cast<double>(cm.tp + cm.tn) / total;
        return report;
    }

    const std::size_t k = cm.classes;
    std::uint64_t correct = 0;
    for (std::size_t c = 0; c < k; ++c) {
        std::uint64_t row = 0, col = 0;
        for (std::size_t j = 0; j < k; ++j) {
            row += cm.matrix[c][j];
            col += cm.matrix[j][c];
        }
        const std::uint64_t tp = cm.matrix[c][c];
        correct += tp;
        const double fp = double(col - tp), fn = double(row - tp);
        const double tn = total - double(tp) - fp - fn;
        const auto r = rates(double(tp), tn, fp, fn);
        report.precision += r.precision / double(k);
        report.recall += r.recall / double(k);
        report.f1 += r.f1 / double(k);
        report.specificity += r.specificity / double(k);
        report.precision_undefined |= r.p_undef;
        report.recall_undefined |= r.r_undef;
        report.f1_undefined |= r.f_undef;
        report.specificity_undefined |= r.s_undef;
    }
    report.accuracy = static_cast<double>(correct) / total;
    return report;
}

std::string format_2dp(double value) {
    // The epsilon keeps decimal halves such as 0.845 (stored as 0.84499...) rounding up.
    const double rounded = std::floor(value * 100.0 + 0.5 + 1e-9) / 100.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", rounded);
    return buf;
}

std::string report_table(std::span<const NamedReport> reports) {
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-12s %9s %9s %9s %9s %12s  %s\n", "Split", "Precision",
                  "Accuracy", "Recall", "F1-Score", "Specificity", "Mode");
    out << buf;
    for (const auto& r : reports) {
        const auto& m = r.report;
        std::snprintf(buf, sizeof buf, "%-12s %9s %9s %9s %9s %12s  %s\n", r.split.c_str(),
                      format_2dp(m.precision).c_str(), format_2dp(m.accuracy).c_str(),
                      format_2dp(m.recall).c_str(), format_2dp(m.f1).c_str(),
                      format_2dp(m.specificity).c_str(), std::string(to_string(m.mode)).c_str());
        out << buf;
    }
    return out.str();
}

std::string report_csv(std::span<const NamedReport> reports) {
    std::ostringstream out;
    out << "split,precision,accuracy,recall,f1,specificity,mode\n";
    for (const auto& r : reports) {
        const auto& m = r.report;
        out << r.split << ',' << format_exact(m.precision) << ',' << format_exact(m.accuracy) << ','
            << format_exact(m.recall) << ',' << format_exact(m.f1) << ','
            << format_exact(m.specificity) << ',' << to_string(m.mode) << '\n';
    }
    return out.str();
}

std::string confusion_csv(std::span<const NamedReport> reports) {
    std::ostringstream out;
    out << "split,tp,tn,fp,fn\n";
    for (const auto& r : reports) {
        const auto& c = r.confusion;
        out << r.split << ',' << c.tp << ',' << c.tn << ',' << c.fp << ',' << c.fn << '\n';
    }
    return out.str();
}

}  // namespace malurl

#include "vocattr/metrics.hpp"

#include <sstream>
#include <stdexcept>

namespace vocattr {

std::vector<std::vector<long>> confusion_matrix(const std::vector<int>& truth,
                                                const std::vector<int>& predicted, int n_classes) {
    if (truth.size() != predicted.size())
        throw std::invalid_argument("metrics: truth/predicted size mismatch");
    if (n_classes < 1) throw std::invalid_argument("metrics: n_classes must be >= 1");
    std::vector<std::vector<long>> cm(n_classes, std::vector<long>(n_classes, 0));
    for (size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= n_classes || predicted[i] < 0 || predicted[i] >= n_classes)
            throw std::invalid_argument("metrics: class id out of range");
        ++cm[truth[i]][predicted[i]];
    }
    return cm;
}

MetricsReport compute_metrics(const std::vector<int>& truth, const std::vector<int>& predicted,
                              int n_classes) {
    if (truth.empty()) throw std::invalid_argument("metrics: empty input");
    MetricsReport report;
    report.confusion = confusion_matrix(truth, predicted, n_classes);

    long correct = 0;
    for (int c = 0; c < n_classes; ++c) correct += report.confusion[c][c];
    report.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());

    int present = 0;
    for (int c = 0; c < n_classes; ++c) {
        long row = 0, col = 0;
        for (int j = 0; j < n_classes; ++j) {
            row += report.confusion[c][j];
            col += report.confusion[j][c];
        }
        if (row == 0) continue;  // class absent from the truth set
        ++present;
        const double tp = static_cast<double>(report.confusion[c][c]);
        const double precision = col > 0 ? tp / static_cast<double>(col) : 0.0;
        const double recall = tp / static_cast<double>(row);
        const double f1 =
            precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        report.macro_precision += precision;
        report.macro_recall += recall;
        report.macro_f1 += f1;
    }
    report.macro_precision /= present;
    report.macro_recall /= present;
    report.macro_f1 /= present;
    return report;
}

double weighted_eval(double primary_score, double secondary_score) {
    if (!(primary_score >= 0.0 && primary_score <= 1.0) ||
        !(secondary_score >= 0.0 && secondary_score <= 1.0))
        throw std::invalid_argument("weighted_eval: scores must lie in [0, 1]");
    return 0.7 * primary_score + 0.3 * secondary_score;
}

std::string format_report(const MetricsReport& report) {
    std::ostringstream os;
    os << "accuracy " << report.accuracy << "\n"
       << "macro_precision " << report.macro_precision << "\n"
       << "macro_recall " << report.macro_recall << "\n"
       << "macro_f1 " << report.macro_f1 << "\n"
       << "confusion rows=truth cols=predicted\n";
    for (const auto& row : report.confusion) {
        for (size_t j = 0; j < row.size(); ++j) os << (j ? " " : "") << row[j];
        os << "\n";
    }
    return os.str();
}

}  // namespace vocattr

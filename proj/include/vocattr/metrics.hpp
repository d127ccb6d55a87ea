#pragma once

#include <string>
#include <vector>

namespace vocattr {

// report.confusion[t][p] counts examples with true class t predicted as p.
struct MetricsReport {
    std::vector<std::vector<long>> confusion;
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
};

std::vector<std::vector<long>> confusion_matrix(const std::vector<int>& truth,
                                                const std::vector<int>& predicted, int n_classes);

// Macro averages run over classes that actually occur in `truth`; a class with
// an empty confusion row contributes nothing. Precision with an empty
// predicted column is 0, as is F1 when P + R == 0.
MetricsReport compute_metrics(const std::vector<int>& truth, const std::vector<int>& predicted,
                              int n_classes);

// 0.7 * primary + 0.3 * secondary; both scores must lie in [0, 1].
double weighted_eval(double primary_score, double secondary_score);

std::string format_report(const MetricsReport& report);

}  // namespace vocattr

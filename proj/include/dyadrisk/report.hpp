#pragma once

#include <string>
#include <vector>

#include "dyadrisk/evaluation.hpp"

namespace dyadrisk {

// Canonical JSON serialization of an evaluation run: fixed key order, %.17g
// floats, no timestamps or environment data. Identical reports are identical
// bytes, whatever the thread count that produced them.
std::string eval_report_json(const EvalReport& report);

// Human-readable rendering: run summary, confusion matrix, significance.
std::string eval_report_text(const EvalReport& report);

// One row per speaker-session prediction, ordered (fold, session, role).
std::string predictions_csv(const EvalReport& report);

// Slim view of a stored report, for cross-run tables.
struct EvalSummary {
    std::string scenario;
    std::string partition;
    std::string families;
    std::size_t folds = 0;
    std::size_t samples = 0;
    double macro_recall = 0.0;
    double chance_macro_recall = 0.0;
    double p = 1.0;
    std::string test_name;
};

// Parses JSON produced by eval_report_json (throws Error on malformed input).
EvalSummary parse_eval_summary(const std::string& json_text);

// Aligned macro-recall grid (rows = partition x families, columns =
// scenarios, cells in percent) followed by a per-run detail list.
std::string summary_table(std::vector<EvalSummary> runs);

}  // namespace dyadrisk

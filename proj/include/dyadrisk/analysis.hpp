#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dyadrisk/features.hpp"

namespace dyadrisk {

// Average ranks (1-based); tied values share the midpoint of their rank run.
std::vector<double> midranks(std::span<const double> values);

struct SpearmanResult {
    double rho = 0.0;
    double p = 1.0;
};

// Spearman rank correlation with midrank tie handling: rho is the Pearson
// correlation of the two rank vectors, p the two-sided t-approximation with
// n-2 degrees of freedom (|rho| = 1 collapses to p = 0). Requires n >= 3 and
// non-constant inputs ("undefined correlation" otherwise).
SpearmanResult spearman(std::span<const double> x, std::span<const double> y);

struct CorrelationRow {
    std::string feature;
    std::string family;  // registry prefix before the first '.'
    double rho = 0.0;
    double p = 1.0;
    std::size_t n = 0;
    bool significant = false;  // p < 0.05, no multiple-comparison correction
};

struct CorrelationReport {
    std::vector<CorrelationRow> top;          // strongest |rho| first
    std::vector<CorrelationRow> family_best;  // best row per family, family order
    std::size_t n = 0;                        // speaker-sessions pooled
    std::size_t skipped_constant = 0;         // columns with undefined correlation
};

// Correlates every feature column with the ordinal labels (one per table row,
// both speakers pooled). Constant columns are skipped rather than reported.
// Rows are ordered by (|rho| descending, feature name ascending), so the
// output is deterministic regardless of `threads`.
CorrelationReport top_correlations(const FeatureTable& features,
                                   const std::vector<int>& labels, std::size_t k,
                                   int threads = 1);

std::string correlation_csv(const CorrelationReport& report);
std::string correlation_text(const CorrelationReport& report);

}  // namespace dyadrisk

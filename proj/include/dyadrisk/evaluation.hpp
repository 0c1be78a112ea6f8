#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dyadrisk/corpus.hpp"
#include "dyadrisk/features.hpp"
#include "dyadrisk/metrics.hpp"
#include "dyadrisk/model.hpp"

namespace dyadrisk {

// ---- scenarios -----------------------------------------------------------------

enum class Scenario { DegreeOfRisk = 0, NoRiskVsRisk = 1, NonSevereVsSevere = 2 };
const char* to_string(Scenario s);
std::optional<Scenario> scenario_from_string(std::string_view s);
int scenario_class_count(Scenario s);
int scenario_class(Scenario s, RiskLabel label);

// ---- partitions ----------------------------------------------------------------

enum class Partition { None = 0, Gender = 1, Content = 2, Demand = 3 };
const char* to_string(Partition p);
std::optional<Partition> partition_from_string(std::string_view s);
int partition_model_count(Partition p);
// Deterministic model index for a speaker-session under the scheme. Demand:
// (H,RFL)=0 (W,RFL)=1 (W,W-Conflict)=2 (W,H-Conflict)=3 (H,either Conflict)=4.
int select_model(Partition p, Role role, SessionType type);

// ---- folds ---------------------------------------------------------------------

struct Fold {
    std::string test_couple;
    std::vector<std::string> train_couples;
    std::vector<std::string> val_couples;
};

struct FoldPlan {
    std::vector<Fold> folds;  // one per couple, ordered by couple id
};

// Leave-one-couple-out: per fold the remaining couples are split 80:20 by a
// seeded greedy assignment that minimizes the L1 distance between train and
// val label histograms (ceil(0.2*m) couples go to val). Needs >= 3 couples.
FoldPlan plan_folds(const std::map<std::string, std::vector<int>>& couple_labels,
                    std::uint64_t seed);

// ---- significance tests -----------------------------------------------------------

struct TestResult {
    std::string name;    // "mcnemar" / "stuart-maxwell"
    std::string method;  // e.g. "exact-binomial", "chi-squared-cc"
    double statistic = 0.0;
    double df = 0.0;
    double p = 1.0;
    bool degenerate = false;
    std::string note;
};

// Paired correctness test: b = only-system-correct, c = only-baseline-correct.
// Exact two-sided binomial when b + c < 25, else continuity-corrected
// chi-squared with 1 df. b + c = 0 degenerates to p = 1.
TestResult mcnemar(std::int64_t b, std::int64_t c);

// Marginal homogeneity of a K x K paired table (rows = system, columns =
// baseline). Statistic d' S^-1 d over K-1 categories, p from chi-squared with
// K-1 df. A diagonal-only table degenerates to p = 1; a singular S retries
// after dropping inactive categories, then errors with "degenerate table".
TestResult stuart_maxwell(const std::vector<std::vector<std::int64_t>>& table);

// Seeded uniform i.i.d. draws over classes 0..k-1, paired samplewise.
std::vector<int> chance_baseline(std::size_t n, int k, std::uint64_t seed);

// ---- experiment ---------------------------------------------------------------------

struct ExperimentOptions {
    Scenario scenario = Scenario::DegreeOfRisk;
    Partition partition = Partition::None;
    HyperGrid grid = HyperGrid::full();
    std::uint64_t seed = 0;
    double tol = 1e-3;
    int threads = 1;
};

struct PredictionRecord {
    std::size_t fold = 0;
    std::string session_id;
    Role role = Role::Husband;
    std::string couple_id;
    int true_class = 0;
    int predicted = 0;
    int model_index = 0;
    bool fallback = false;  // produced by the single-class-training rule
};

struct EvalReport {
    std::string scenario;
    std::string partition;
    std::string families;  // family letters present in the feature registry
    std::uint64_t seed = 0;
    std::size_t folds = 0;
    std::size_t grid_size = 0;
    std::uint64_t registry_hash = 0;

    std::vector<PredictionRecord> predictions;  // ordered (fold, session, role)
    std::vector<std::vector<std::size_t>> confusion;
    double macro_recall = 0.0;
    double chance_macro_recall = 0.0;
    TestResult significance;  // vs seeded chance, paired on per-sample correctness
    std::vector<std::string> fallback_events;

    // secondary per-speaker view: majority prediction over each speaker's
    // sessions (ties toward the lower class)
    std::size_t n_speakers = 0;
    double speaker_macro_recall = 0.0;
};

// Leave-one-couple-out evaluation: per fold and partition model, fit the full
// pipeline on that model's training speaker-sessions, tune on val, predict
// the held-out couple. Predictions accumulate in (fold, session, role) order
// independent of thread count. Single-class training folds fall back to
// majority-class prediction and are recorded in fallback_events.
EvalReport run_experiment(const Corpus& corpus, const FeatureTable& features,
                          const ExperimentOptions& opts);

}  // namespace dyadrisk

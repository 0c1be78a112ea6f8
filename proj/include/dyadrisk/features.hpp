#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dyadrisk/conversation.hpp"
#include "dyadrisk/corpus.hpp"
#include "dyadrisk/linalg.hpp"

namespace dyadrisk {

// ---- functional helpers (exposed for direct oracle testing) -----------------

double mean_of(const std::vector<double>& xs);
double population_std(const std::vector<double>& xs);
double median_of(std::vector<double> xs);
// Linear-interpolation (inclusive) quantile on a sorted vector: h = q*(n-1).
double quantile_sorted(const std::vector<double>& sorted, double q);

// ---- per-family extraction ---------------------------------------------------

// One family's values with registry names; zero_filled lists indices that the
// empty-sequence rule forced to 0 for this speaker-session.
struct FamilyExtraction {
    std::vector<double> values;
    std::vector<std::string> names;
    std::vector<std::size_t> zero_filled;
};

// Six functionals {mean, std, min, max, median, range} per channel over the
// frames whose midpoints fall inside the speaker's segments. Errors when the
// speaker has no frames.
FamilyExtraction extract_acoustic(const FrameMatrix& frames, const SegmentSet& speaker_segments);

inline constexpr int kBehaviorConfigs = 26;
inline constexpr int kBehaviorHiddenDim = 128;
inline constexpr int kBehaviorScoreDim = 5;
inline constexpr const char* kBehaviorScoreNames[kBehaviorScoreDim] = {
    "Acceptance", "Blame", "Positive", "Negative", "Sadness"};

// Concatenates 26 hidden vectors (128-d) then 26 score vectors (5-d) read
// from `<behavior_dir>/<role>/config<i>.h.csv` / `.s.csv` -> 3458 values.
// Missing or mis-sized configs raise errors naming the config.
FamilyExtraction extract_behavior(const std::filesystem::path& behavior_dir, Role role);

// Six lexical values: raw positive/negative proportions for the speaker, then
// natural-log ratios of smoothed speaker vs partner proportions for all four
// sign combinations. Smoothing: (count + 0.5) / (total + 1), applied to the
// ratios only. Errors when speaker or partner has zero words.
FamilyExtraction extract_lexical(const SessionTurns& turns, const Lexicon& lexicon, Role speaker);

// Six per-turn sequences (duration, word count, speech rate, pause, duration
// minus the partner's most recent preceding turn duration, word count minus
// the same partner reference), each expanded to {base, delta, delta-delta}
// and summarized by 9 functionals, plus 5 session-global values -> 167.
// Empty delta sequences produce zero-filled functionals, recorded in
// zero_filled. Errors when the speaker has no turns.
FamilyExtraction extract_turn_taking(const SessionTurns& turns, Role speaker);

// Concatenation of the requested families in fixed A, E, L, T order.
// `families` is a subset string like "AET"; unknown letters, duplicates, or a
// missing/empty family are errors.
FamilyExtraction fuse(const std::map<char, FamilyExtraction>& by_family,
                      const std::string& families);

std::uint64_t registry_hash(const std::vector<std::string>& names);

// ---- corpus-level table --------------------------------------------------------

struct SpeakerKey {
    std::string session_id;
    Role role = Role::Husband;
    bool operator==(const SpeakerKey&) const = default;
    bool operator<(const SpeakerKey& o) const {
        if (session_id != o.session_id) return session_id < o.session_id;
        return static_cast<int>(role) < static_cast<int>(o.role);
    }
};

struct FeatureTable {
    std::vector<std::string> names;  // shared registry, identical for every row
    std::vector<SpeakerKey> keys;    // ordered by (session_id, role)
    Matrix values;                   // one row per key

    std::uint64_t hash() const { return registry_hash(names); }
};

struct ExtractOptions {
    std::string families = "AELT";
    TimeMs merge_gap_ms = 500;
    int threads = 1;
};

// Extract fused vectors for every speaker-session in the corpus, in
// deterministic (session_id, role) order regardless of thread count. All
// rows must agree on the registry; any NaN/Inf value is an error.
FeatureTable extract_all(const Corpus& corpus, const ExtractOptions& opts);

// CSV dump: header `session_id,role,<names...>`, one row per speaker-session.
std::string feature_table_csv(const FeatureTable& table);

}  // namespace dyadrisk

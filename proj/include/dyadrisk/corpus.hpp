#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dyadrisk/error.hpp"
#include "dyadrisk/linalg.hpp"
#include "dyadrisk/timebase.hpp"

namespace dyadrisk {

// Ordinal degree of risk; comparisons use the underlying value.
enum class RiskLabel : int { None = 0, Ideation = 1, Attempt = 2 };

enum class SessionType { RFL, WConflict, HConflict };
enum class Role { Husband, Wife };

const char* to_string(RiskLabel r);
const char* to_string(SessionType t);
const char* to_string(Role r);
std::optional<RiskLabel> risk_from_string(std::string_view s);
std::optional<SessionType> session_type_from_string(std::string_view s);
std::optional<Role> role_from_string(std::string_view s);
// Segment speaker tags: short "H"/"W" (pipeline output) or full role names.
std::optional<Role> role_from_tag(std::string_view tag);

struct SpeakerInfo {
    Role role;
    RiskLabel risk;
};

// One 10-minute conversation. speakers[0] is always the Husband and
// speakers[1] the Wife after validation.
struct SessionRecord {
    std::string session_id;
    std::string couple_id;
    SessionType type = SessionType::RFL;
    TimeMs duration_ms = 0;
    std::array<SpeakerInfo, 2> speakers{};

    // artifact paths as written in the manifest (resolved against its dir)
    std::string rttm, ctm, frames, behavior_dir;

    const SpeakerInfo& speaker(Role r) const {
        return speakers[r == Role::Husband ? 0 : 1];
    }
};

struct Segment {
    TimeMs start_ms = 0;
    TimeMs dur_ms = 0;
    std::string speaker_tag;

    TimeMs end_ms() const { return start_ms + dur_ms; }
    bool operator==(const Segment&) const = default;
};

struct SegmentSet {
    std::vector<Segment> segments;  // sorted by start
    bool operator==(const SegmentSet&) const = default;
};

struct Word {
    TimeMs start_ms = 0;
    TimeMs dur_ms = 0;
    std::string token;
    double confidence = 1.0;
    TimeMs mid_ms() const { return start_ms + dur_ms / 2; }
};

struct WordAlignment {
    std::vector<Word> words;
};

// Frame-level acoustic descriptor matrix for one session. The F0 channel is
// located by name at parse time; 0 in that channel marks an unvoiced frame.
struct FrameMatrix {
    double frame_period_s = 0.0;
    std::vector<std::string> channel_names;
    std::size_t f0_index = 0;
    Matrix values;  // frames x channels

    TimeMs frame_mid_ms(std::size_t frame) const {
        return ms_from_seconds((static_cast<double>(frame) + 0.5) * frame_period_s);
    }
};

struct EmbeddingSet {
    std::size_t dim = 0;
    std::map<std::string, std::vector<double>> vectors;
};

enum class EmotionCategory { Positive, Negative };

struct LexiconEntry {
    std::string pattern;  // lowercase; stems keep their trailing '*' stripped
    bool is_stem = false;
    EmotionCategory category = EmotionCategory::Positive;
};

struct Lexicon {
    std::vector<LexiconEntry> entries;

    std::optional<EmotionCategory> match(std::string_view token) const;
};

// ---- parsers ------------------------------------------------------------

// JSON-lines manifest. All semantic problems are collected into `report`
// (validation is total); I/O and JSON syntax failures throw. The returned
// records are the ones that parsed structurally, even when invalid.
std::vector<SessionRecord> parse_manifest(const std::filesystem::path& path,
                                          ValidationReport& report);
// Convenience overload that throws ValidationError when the report has errors.
std::vector<SessionRecord> parse_manifest(const std::filesystem::path& path);

// RTTM v1.3 `SPEAKER` lines. Malformed lines throw ParseError with the line
// number; overlapping segments are flagged as warnings when a report is given.
std::map<std::string, SegmentSet> parse_rttm(const std::filesystem::path& path,
                                             ValidationReport* report = nullptr);
std::string to_rttm(const std::string& session_id, const SegmentSet& set);

std::map<std::string, WordAlignment> parse_ctm(const std::filesystem::path& path);

// CSV with a `# frame_period_s=<v>` sidecar line, then a header row of
// channel names (must include F0), then one row per frame.
FrameMatrix parse_frames(const std::filesystem::path& path);

Lexicon parse_lexicon(const std::filesystem::path& path);

// `segment_index,v0,v1,...` rows; returns vectors ordered by segment index.
std::vector<std::vector<double>> parse_segment_embeddings(const std::filesystem::path& path);

// Lowercase + strip leading/trailing punctuation. Empty result means the
// token was pure punctuation.
std::string normalize_token(std::string_view token);

// ---- assembled corpus ---------------------------------------------------

struct Corpus {
    std::filesystem::path root;               // manifest directory
    std::vector<SessionRecord> sessions;      // sorted by session_id
    std::map<std::string, SegmentSet> segments;
    std::map<std::string, WordAlignment> words;
    Lexicon lexicon;

    const SessionRecord* find(const std::string& session_id) const;
    std::filesystem::path resolve(const std::string& rel) const;
};

struct LoadOptions {
    bool deep = true;  // also parse frames / probe behavior dirs for errors
};

// Parses the manifest plus every referenced RTTM/CTM (and, with deep=true,
// frames and behavior files) into an immutable corpus. All problems land in
// `report`; throws ValidationError if any are errors.
Corpus load_corpus(const std::filesystem::path& manifest_path,
                   const std::optional<std::filesystem::path>& lexicon_path,
                   ValidationReport& report, const LoadOptions& opts = {});

// Deterministic canonical serialization of the parsed corpus (JSON text).
// Same input files produce byte-identical output.
std::string canonical_dump(const Corpus& corpus);

}  // namespace dyadrisk

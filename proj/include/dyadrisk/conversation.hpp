#pragma once

#include <array>
#include <string>
#include <vector>

#include "dyadrisk/corpus.hpp"

namespace dyadrisk {

// One speaker turn: a maximal run of same-speaker segments separated by gaps
// shorter than the merge threshold, with the words whose midpoints fall
// inside it.
struct Turn {
    Role speaker = Role::Husband;
    TimeMs start_ms = 0;
    TimeMs end_ms = 0;
    TimeMs pause_before_ms = 0;  // gap to the previous turn's end, clamped at 0
    std::vector<std::string> words;

    TimeMs duration_ms() const { return end_ms - start_ms; }
    double duration_s() const { return seconds_from_ms(duration_ms()); }
    double pause_before_s() const { return seconds_from_ms(pause_before_ms); }
    std::size_t word_count() const { return words.size(); }
    double speech_rate() const {  // words per second; duration > 0 by invariant
        return static_cast<double>(words.size()) / duration_s();
    }
};

struct SpeakerAggregates {
    TimeMs total_speech_ms = 0;
    std::size_t total_words = 0;
    TimeMs total_pause_ms = 0;
    std::size_t turn_count = 0;

    double total_speech_s() const { return seconds_from_ms(total_speech_ms); }
    double total_pause_s() const { return seconds_from_ms(total_pause_ms); }
    double global_speech_rate() const {
        return total_speech_ms > 0 ? static_cast<double>(total_words) / total_speech_s() : 0.0;
    }
};

struct SessionTurns {
    std::vector<Turn> turns;                    // time-ordered
    std::array<SpeakerAggregates, 2> by_role;   // indexed by Role
};

// Build turns from role-tagged segments ("H"/"W") and word alignments.
// Directly consecutive same-speaker segments merge when the gap is below
// merge_gap_ms; an intervening other-speaker segment always closes the turn.
// Each word goes to the turn containing its midpoint, otherwise to the
// nearest turn of any speaker (ties favor the earlier turn). pause_before is
// the nonnegative gap to the previous turn's end; the first turn gets 0.
// No segments is an error.
SessionTurns build_turns(const SegmentSet& segments, const WordAlignment& words,
                         TimeMs merge_gap_ms = 500);

}  // namespace dyadrisk

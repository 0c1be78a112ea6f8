#include "dyadrisk/conversation.hpp"

#include <algorithm>
#include <limits>

namespace dyadrisk {

namespace {

Role role_of(const std::string& tag) {
    auto r = role_from_tag(tag);
    if (!r) throw Error("build_turns: unknown speaker tag '" + tag + "' (expected H or W)");
    return *r;
}

}  // namespace

SessionTurns build_turns(const SegmentSet& segments, const WordAlignment& words,
                         TimeMs merge_gap_ms) {
    if (segments.segments.empty()) throw Error("empty session: no segments to build turns from");

    std::vector<Segment> sorted = segments.segments;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const Segment& a, const Segment& b) { return a.start_ms < b.start_ms; });

    SessionTurns out;
    for (const auto& seg : sorted) {
        Role r = role_of(seg.speaker_tag);
        if (!out.turns.empty() && out.turns.back().speaker == r &&
            seg.start_ms - out.turns.back().end_ms < merge_gap_ms) {
            out.turns.back().end_ms = std::max(out.turns.back().end_ms, seg.end_ms());
        } else {
            Turn t;
            t.speaker = r;
            t.start_ms = seg.start_ms;
            t.end_ms = seg.end_ms();
            out.turns.push_back(std::move(t));
        }
    }

    for (std::size_t i = 1; i < out.turns.size(); ++i)
        out.turns[i].pause_before_ms =
            std::max<TimeMs>(0, out.turns[i].start_ms - out.turns[i - 1].end_ms);

    for (const auto& w : words.words) {
        TimeMs mid = w.mid_ms();
        std::size_t target = out.turns.size();
        for (std::size_t i = 0; i < out.turns.size(); ++i) {
            if (mid >= out.turns[i].start_ms && mid < out.turns[i].end_ms) {
                target = i;
                break;
            }
        }
        if (target == out.turns.size()) {
            // nearest turn of any speaker; ties favor the earlier turn
            TimeMs best = std::numeric_limits<TimeMs>::max();
            for (std::size_t i = 0; i < out.turns.size(); ++i) {
                TimeMs d = mid < out.turns[i].start_ms ? out.turns[i].start_ms - mid
                                                       : mid - out.turns[i].end_ms;
                if (d < best) {
                    best = d;
                    target = i;
                }
            }
        }
        out.turns[target].words.push_back(w.token);
    }

    for (const auto& t : out.turns) {
        auto& agg = out.by_role[static_cast<std::size_t>(t.speaker)];
        agg.total_speech_ms += t.duration_ms();
        agg.total_words += t.word_count();
        agg.total_pause_ms += t.pause_before_ms;
        ++agg.turn_count;
    }
    return out;
}

}  // namespace dyadrisk

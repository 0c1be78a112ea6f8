#pragma once

#include <array>
#include <cstdint>
#include <filesystem>

namespace dyadrisk {

// Knobs for the synthetic corpus generator. The four per-family effect sizes
// scale a planted per-class signal; their defaults are the documented
// "strong" settings (clearly recoverable), and zero removes the signal.
// Directions: acoustic channel means and negative-word rates rise with the
// risk degree, the behavior sadness score falls, and per-turn word-count
// variance grows.
struct SynthSpec {
    int n_couples = 62;
    std::array<double, 3> priors{0.524, 0.298, 0.178};  // none, ideation, attempt

    double a_effect = 1.0;  // LLD mean shift per class step, in frame-noise units
    double e_effect = 1.0;  // sadness-score drop per class step
    double l_effect = 1.0;  // negative-word rate growth per class step
    double t_effect = 1.0;  // word-count variance growth per class step

    double duration_s = 600.0;
    double frame_period_s = 0.1;
    int lld_channels = 38;  // D, the F0 channel included
    int embedding_dim = 8;
    double noise = 1.0;  // within-class noise scale

    static SynthSpec null_effects() {
        SynthSpec s;
        s.a_effect = s.e_effect = s.l_effect = s.t_effect = 0.0;
        return s;
    }
};

struct SynthSummary {
    int couples = 0;
    int sessions = 0;
    std::array<int, 3> speaker_labels{0, 0, 0};  // across all generated speakers
};

// Writes a complete corpus (manifest, lexicon, RTTM/CTM, frame CSVs, behavior
// embeddings, per-segment diarization embeddings) under out_dir. Each couple
// gets three sessions (RFL, W-Conflict, H-Conflict) of alternating-turn
// dialogue. Husband F0 is drawn well below Wife F0 in every session, so role
// assignment has a ground truth. Output is a pure function of (spec, seed):
// regeneration is byte-identical.
SynthSummary generate_synthetic(const SynthSpec& spec, std::uint64_t seed,
                                const std::filesystem::path& out_dir);

}  // namespace dyadrisk

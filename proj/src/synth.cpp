#include "dyadrisk/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "dyadrisk/corpus.hpp"
#include "dyadrisk/error.hpp"
#include "dyadrisk/features.hpp"
#include "dyadrisk/numfmt.hpp"
#include "dyadrisk/rng.hpp"
#include "dyadrisk/timebase.hpp"

namespace dyadrisk {
namespace {

namespace fs = std::filesystem;

constexpr const char* kPositiveWords[] = {"good", "happy", "love", "great", "laugh", "enjoy"};
constexpr const char* kNegativeWords[] = {"sad", "angry", "hate", "upset", "worried", "cry"};
constexpr const char* kNeutralWords[] = {"the",  "we",    "you",  "i",     "well",
                                         "so",   "right", "okay", "talk",  "time",
                                         "home", "work",  "yeah", "think", "know",
                                         "just", "really", "maybe", "day",  "thing"};

constexpr const char* kLexiconCsv =
    "# pattern,category\n"
    "good,Positive\n"
    "happy,Positive\n"
    "love*,Positive\n"
    "great,Positive\n"
    "laugh*,Positive\n"
    "enjoy*,Positive\n"
    "sad*,Negative\n"
    "angry,Negative\n"
    "hate*,Negative\n"
    "upset,Negative\n"
    "worr*,Negative\n"
    "cry*,Negative\n";

void check_spec(const SynthSpec& s) {
    if (s.n_couples < 1) throw Error("synth: n_couples must be >= 1");
    if (s.n_couples > 9999) throw Error("synth: n_couples must be <= 9999");
    double sum = 0.0;
    for (double p : s.priors) {
        if (p < 0.0 || p > 1.0) throw Error("synth: priors must lie in [0, 1]");
        sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw Error("synth: priors must sum to 1");
    if (s.a_effect < 0.0 || s.e_effect < 0.0 || s.l_effect < 0.0 || s.t_effect < 0.0)
        throw Error("synth: effect sizes must be >= 0");
    if (s.duration_s < 20.0) throw Error("synth: duration_s must be >= 20");
    if (s.frame_period_s <= 0.0 || s.frame_period_s > 1.0)
        throw Error("synth: frame_period_s must lie in (0, 1]");
    if (s.lld_channels < 2) throw Error("synth: lld_channels must be >= 2 (F0 included)");
    if (s.embedding_dim < 2) throw Error("synth: embedding_dim must be >= 2");
    if (s.noise < 0.0) throw Error("synth: noise must be >= 0");
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("synth: cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw Error("synth: write failed: " + path.string());
}

struct TurnPlan {
    Role speaker = Role::Husband;
    // [start, end) spans in ms; one segment, or two with a sub-merge-gap break
    std::vector<std::pair<TimeMs, TimeMs>> segments;
    std::vector<int> words_per_segment;
    TimeMs per_word_ms = 0;
};

std::vector<TurnPlan> plan_turns(const SynthSpec& spec, const std::array<RiskLabel, 2>& risks,
                                 std::uint64_t seed) {
    const TimeMs duration_ms = ms_from_seconds(spec.duration_s);
    const TimeMs budget_end = duration_ms - 500;
    // no single turn may dominate a session; keeps short sessions conversational
    const TimeMs span_cap = duration_ms / 4;

    // a heavy-tailed draw sequence can fail to fit four turns; retry on a fresh
    // deterministic substream rather than aborting the session
    for (int attempt = 0; attempt < 64; ++attempt) {
        Rng rng(derive_seed(seed, "attempt|" + std::to_string(attempt)));
        std::vector<TurnPlan> turns;
        TimeMs t = 800 + static_cast<TimeMs>(rng.uniform() * 700.0);
        Role speaker = rng.below(2) == 0 ? Role::Husband : Role::Wife;

        while (t < budget_end) {
            const int cls = static_cast<int>(risks[static_cast<int>(speaker)]);
            const double sigma = 0.35 * std::sqrt(1.0 + spec.t_effect * cls);
            int n_words =
                static_cast<int>(std::llround(std::exp(rng.normal() * sigma + std::log(10.0))));
            n_words = std::clamp(n_words, 1, 80);
            const TimeMs per_word = std::clamp<TimeMs>(
                static_cast<TimeMs>(std::llround(rng.normal() * 40.0 + 330.0)), 180, 600);

            // fit the draw to the remaining budget, reserving room for an intra-turn break
            const TimeMs room = std::min(budget_end - t, span_cap);
            const TimeMs max_words = (room - 249) / per_word;
            if (max_words < 1) break;
            n_words = std::min(n_words, static_cast<int>(max_words));

            TurnPlan turn;
            turn.speaker = speaker;
            turn.per_word_ms = per_word;
            TimeMs gap = 0;
            int first_words = n_words;
            if (n_words >= 4 && rng.uniform() < 0.25) {
                // intra-turn break below the merge gap: healed by turn building
                gap = 100 + static_cast<TimeMs>(rng.below(150));
                first_words =
                    1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_words - 1)));
            }
            const TimeMs span = static_cast<TimeMs>(n_words) * per_word + gap;

            if (gap == 0) {
                turn.segments.emplace_back(t, t + span);
                turn.words_per_segment.push_back(n_words);
            } else {
                const TimeMs d1 = static_cast<TimeMs>(first_words) * per_word;
                turn.segments.emplace_back(t, t + d1);
                turn.words_per_segment.push_back(first_words);
                turn.segments.emplace_back(t + d1 + gap, t + span);
                turn.words_per_segment.push_back(n_words - first_words);
            }
            turns.push_back(std::move(turn));

            const TimeMs pause =
                250 + static_cast<TimeMs>(std::llround(std::min(rng.exponential(500.0), 3000.0)));
            t += span + pause;
            speaker = speaker == Role::Husband ? Role::Wife : Role::Husband;
        }
        if (turns.size() >= 4) return turns;
    }
    throw Error("synth: duration_s too short to fit a usable exchange");
}

std::string make_ctm(const SynthSpec& spec, const std::string& sid, SessionType type,
                     const std::array<RiskLabel, 2>& risks, const std::vector<TurnPlan>& turns,
                     Rng& rng) {
    const double type_factor = type == SessionType::RFL ? 0.8 : 1.15;
    std::string out;
    for (const auto& turn : turns) {
        const int cls = static_cast<int>(risks[static_cast<int>(turn.speaker)]);
        const double p_neg =
            std::min(0.06 * (1.0 + 0.8 * spec.l_effect * cls) * type_factor, 0.35);
        const double p_pos = std::max(0.10 * (1.0 - 0.25 * spec.l_effect * cls), 0.02);
        for (std::size_t s = 0; s < turn.segments.size(); ++s) {
            const TimeMs seg_start = turn.segments[s].first;
            const TimeMs word_dur = (turn.per_word_ms * 4) / 5;
            for (int w = 0; w < turn.words_per_segment[s]; ++w) {
                const double u = rng.uniform();
                const char* token;
                if (u < p_pos)
                    token = kPositiveWords[rng.below(std::size(kPositiveWords))];
                else if (u < p_pos + p_neg)
                    token = kNegativeWords[rng.below(std::size(kNegativeWords))];
                else
                    token = kNeutralWords[rng.below(std::size(kNeutralWords))];
                const TimeMs start = seg_start + static_cast<TimeMs>(w) * turn.per_word_ms;
                out += sid;
                out += " 1 ";
                out += format_seconds(start);
                out += ' ';
                out += format_seconds(word_dur);
                out += ' ';
                out += token;
                out += '\n';
            }
        }
    }
    return out;
}

std::string make_frames(const SynthSpec& spec, const std::array<RiskLabel, 2>& risks,
                        const std::vector<TurnPlan>& turns, Rng& rng) {
    const int d = spec.lld_channels;
    // (start, end, role) in time order; turns are generated chronologically
    struct Span {
        TimeMs start, end;
        int role;
    };
    std::vector<Span> spans;
    for (const auto& turn : turns)
        for (const auto& [s, e] : turn.segments)
            spans.push_back({s, e, static_cast<int>(turn.speaker)});

    // per-speaker, per-channel session-level offset: sessions of the same
    // class must not collapse onto identical feature values
    std::vector<std::array<double, 2>> jitter(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j)
        for (int r = 0; r < 2; ++r) jitter[static_cast<std::size_t>(j)][r] =
            rng.normal() * 0.2 * spec.noise;

    std::string out = "# frame_period_s=" + format_g17(spec.frame_period_s) + "\n";
    out += "F0";
    for (int j = 1; j < d; ++j) {
        char name[16];
        std::snprintf(name, sizeof name, "lld%02d", j);
        out += ',';
        out += name;
    }
    out += '\n';

    const auto n_frames =
        static_cast<std::size_t>(std::floor(spec.duration_s / spec.frame_period_s));
    std::size_t cursor = 0;
    for (std::size_t f = 0; f < n_frames; ++f) {
        const TimeMs mid = ms_from_seconds((static_cast<double>(f) + 0.5) * spec.frame_period_s);
        while (cursor < spans.size() && spans[cursor].end <= mid) ++cursor;
        const bool voiced = cursor < spans.size() && spans[cursor].start <= mid;
        const int role = voiced ? spans[cursor].role : -1;
        const int cls = voiced ? static_cast<int>(risks[static_cast<std::size_t>(role)]) : 0;
        for (int j = 0; j < d; ++j) {
            if (j > 0) out += ',';
            double v = 0.0;
            if (voiced) {
                if (j == 0) {
                    const double mu = role == 0 ? 112.0 : 212.0;
                    const double sd = role == 0 ? 12.0 : 18.0;
                    v = std::max(1.0, rng.normal() * sd + mu);
                } else {
                    v = 0.05 * j + 0.5 * spec.a_effect * cls +
                        jitter[static_cast<std::size_t>(j)][role] +
                        rng.normal() * 0.3 * spec.noise;
                }
            }
            out += format_fixed(v, 4);
        }
        out += '\n';
    }
    return out;
}

void write_behavior(const SynthSpec& spec, const fs::path& dir,
                    const std::array<RiskLabel, 2>& risks, SessionType type, Rng& rng) {
    for (int r = 0; r < 2; ++r) {
        const Role role = static_cast<Role>(r);
        const int cls = static_cast<int>(risks[static_cast<std::size_t>(r)]);
        const fs::path role_dir = dir / to_string(role);
        fs::create_directories(role_dir);
        const double blame_base = type == SessionType::RFL ? 0.30 : 0.35;
        for (int i = 1; i <= kBehaviorConfigs; ++i) {
            std::string h;
            for (int j = 0; j < kBehaviorHiddenDim; ++j) {
                if (j > 0) h += ',';
                h += format_fixed(rng.normal(), 6);
            }
            h += '\n';
            write_file(role_dir / ("config" + std::to_string(i) + ".h.csv"), h);

            const double sd = 0.10 * spec.noise;
            const double scores[kBehaviorScoreDim] = {
                0.50 + rng.normal() * sd,
                blame_base + rng.normal() * sd,
                0.55 + rng.normal() * sd,
                0.40 + rng.normal() * sd,
                0.50 - 0.15 * spec.e_effect * cls + rng.normal() * sd,
            };
            std::string s;
            for (int j = 0; j < kBehaviorScoreDim; ++j) {
                if (j > 0) s += ',';
                s += format_fixed(scores[j], 6);
            }
            s += '\n';
            write_file(role_dir / ("config" + std::to_string(i) + ".s.csv"), s);
        }
    }
}

std::string make_embeddings(const SynthSpec& spec, const std::vector<TurnPlan>& turns, Rng& rng) {
    std::string out;
    std::size_t index = 0;
    for (const auto& turn : turns) {
        for (std::size_t s = 0; s < turn.segments.size(); ++s) {
            std::vector<double> v(static_cast<std::size_t>(spec.embedding_dim));
            const std::size_t axis = turn.speaker == Role::Husband ? 0 : 1;
            double norm2 = 0.0;
            for (std::size_t j = 0; j < v.size(); ++j) {
                v[j] = (j == axis ? 1.0 : 0.0) + rng.normal() * 0.15;
                norm2 += v[j] * v[j];
            }
            const double inv = 1.0 / std::sqrt(norm2);
            out += std::to_string(index++);
            for (double x : v) {
                out += ',';
                out += format_fixed(x * inv, 6);
            }
            out += '\n';
        }
    }
    return out;
}

}  // namespace

SynthSummary generate_synthetic(const SynthSpec& spec, std::uint64_t seed,
                                const fs::path& out_dir) {
    check_spec(spec);

    fs::create_directories(out_dir);
    for (const char* sub : {"rttm", "ctm", "frames", "behavior", "embeddings"})
        fs::create_directories(out_dir / sub);
    write_file(out_dir / "lexicon.csv", kLexiconCsv);

    const int width = spec.n_couples > 999 ? 4 : 3;
    SynthSummary summary;
    summary.couples = spec.n_couples;
    std::string manifest;

    for (int c = 1; c <= spec.n_couples; ++c) {
        char couple_buf[16];
        std::snprintf(couple_buf, sizeof couple_buf, "c%0*d", width, c);
        const std::string couple_id = couple_buf;

        Rng label_rng(derive_seed(seed, "labels|" + couple_id));
        std::array<RiskLabel, 2> risks{};
        for (auto& risk : risks) {
            const double u = label_rng.uniform();
            double acc = 0.0;
            int chosen = -1;
            for (int k = 0; k < 3; ++k) {
                if (spec.priors[k] <= 0.0) continue;
                acc += spec.priors[k];
                chosen = k;
                if (u < acc) break;
            }
            risk = static_cast<RiskLabel>(chosen);
            ++summary.speaker_labels[static_cast<std::size_t>(chosen)];
        }

        static constexpr SessionType kTypes[3] = {SessionType::RFL, SessionType::WConflict,
                                                  SessionType::HConflict};
        for (int s = 0; s < 3; ++s) {
            const std::string sid = couple_id + "_s" + std::to_string(s + 1);
            const SessionType type = kTypes[s];
            const std::uint64_t session_seed = derive_seed(seed, sid);

            const auto turns = plan_turns(spec, risks, derive_seed(session_seed, "turns"));

            SegmentSet segset;
            for (const auto& turn : turns)
                for (const auto& [start, end] : turn.segments)
                    segset.segments.push_back(
                        {start, end - start, turn.speaker == Role::Husband ? "H" : "W"});
            write_file(out_dir / "rttm" / (sid + ".rttm"), to_rttm(sid, segset));

            Rng word_rng(derive_seed(session_seed, "words"));
            write_file(out_dir / "ctm" / (sid + ".ctm"),
                       make_ctm(spec, sid, type, risks, turns, word_rng));

            Rng frame_rng(derive_seed(session_seed, "frames"));
            write_file(out_dir / "frames" / (sid + ".csv"),
                       make_frames(spec, risks, turns, frame_rng));

            Rng behavior_rng(derive_seed(session_seed, "behavior"));
            write_behavior(spec, out_dir / "behavior" / sid, risks, type, behavior_rng);

            Rng embed_rng(derive_seed(session_seed, "embeddings"));
            write_file(out_dir / "embeddings" / (sid + ".csv"),
                       make_embeddings(spec, turns, embed_rng));

            // manifest line (keys serialize alphabetically: stable bytes)
            std::string line = "{";
            line += "\"behavior_dir\":\"behavior/" + sid + "\",";
            line += "\"couple_id\":\"" + couple_id + "\",";
            line += "\"ctm\":\"ctm/" + sid + ".ctm\",";
            line += "\"duration_s\":" + format_g17(spec.duration_s) + ",";
            line += "\"frames\":\"frames/" + sid + ".csv\",";
            line += "\"rttm\":\"rttm/" + sid + ".rttm\",";
            line += "\"session_id\":\"" + sid + "\",";
            line += std::string("\"session_type\":\"") + to_string(type) + "\",";
            line += "\"speakers\":[";
            for (int r = 0; r < 2; ++r) {
                if (r) line += ',';
                line += "{\"risk\":\"";
                line += to_string(risks[static_cast<std::size_t>(r)]);
                line += "\",\"role\":\"";
                line += to_string(static_cast<Role>(r));
                line += "\"}";
            }
            line += "]}\n";
            manifest += line;
            ++summary.sessions;
        }
    }

    write_file(out_dir / "manifest.jsonl", manifest);
    return summary;
}

}  // namespace dyadrisk

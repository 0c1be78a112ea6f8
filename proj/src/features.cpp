#include "dyadrisk/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include "dyadrisk/numfmt.hpp"
#include "dyadrisk/rng.hpp"

namespace dyadrisk {

// ---- functionals ------------------------------------------------------------

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) throw Error("mean_of: empty input");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double population_std(const std::vector<double>& xs) {
    double m = mean_of(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size()));
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw Error("quantile_sorted: empty input");
    if (q < 0.0 || q > 1.0) throw Error("quantile_sorted: q outside [0, 1]");
    double h = q * static_cast<double>(sorted.size() - 1);
    std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double median_of(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    return quantile_sorted(xs, 0.5);
}

// ---- acoustic ----------------------------------------------------------------

namespace {

const char* const kAcousticFuncs[6] = {"mean", "std", "min", "max", "median", "range"};

void acoustic_functionals(const std::vector<double>& xs, std::vector<double>& out) {
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    out.push_back(mean_of(xs));
    out.push_back(population_std(xs));
    out.push_back(sorted.front());
    out.push_back(sorted.back());
    out.push_back(quantile_sorted(sorted, 0.5));
    out.push_back(sorted.back() - sorted.front());
}

std::vector<std::pair<TimeMs, TimeMs>> merged_spans(const SegmentSet& set) {
    std::vector<std::pair<TimeMs, TimeMs>> spans;
    for (const auto& s : set.segments) spans.emplace_back(s.start_ms, s.end_ms());
    std::sort(spans.begin(), spans.end());
    std::vector<std::pair<TimeMs, TimeMs>> merged;
    for (const auto& sp : spans) {
        if (!merged.empty() && sp.first <= merged.back().second)
            merged.back().second = std::max(merged.back().second, sp.second);
        else
            merged.push_back(sp);
    }
    return merged;
}

}  // namespace

FamilyExtraction extract_acoustic(const FrameMatrix& frames, const SegmentSet& speaker_segments) {
    auto spans = merged_spans(speaker_segments);
    const std::size_t nchan = frames.channel_names.size();

    // frame midpoints are time-ordered, spans sorted: single sweep
    std::vector<std::size_t> picked;
    std::size_t si = 0;
    for (std::size_t f = 0; f < frames.values.rows(); ++f) {
        TimeMs mid = frames.frame_mid_ms(f);
        while (si < spans.size() && spans[si].second <= mid) ++si;
        if (si < spans.size() && mid >= spans[si].first) picked.push_back(f);
    }
    if (picked.empty()) throw Error("extract_acoustic: no frames inside the speaker's segments");

    FamilyExtraction out;
    out.values.reserve(6 * nchan);
    out.names.reserve(6 * nchan);
    std::vector<double> column(picked.size());
    for (std::size_t c = 0; c < nchan; ++c) {
        for (std::size_t i = 0; i < picked.size(); ++i) column[i] = frames.values(picked[i], c);
        acoustic_functionals(column, out.values);
        for (const char* fn : kAcousticFuncs)
            out.names.push_back("A." + frames.channel_names[c] + "." + fn);
    }
    return out;
}

// ---- behavior embeddings -------------------------------------------------------

namespace {

std::vector<double> read_vector_csv(const std::filesystem::path& path, int config,
                                    std::size_t expected) {
    std::ifstream in(path);
    if (!in)
        throw Error("behavior config " + std::to_string(config) + " absent: " + path.string());
    std::string line, data;
    std::size_t line_no = 0, data_line = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        if (!data.empty())
            throw ParseError(path.string(), line_no, "expected a single data row");
        data = line;
        data_line = line_no;
    }
    if (data.empty()) throw ParseError(path.string(), line_no, "no data row");

    std::vector<double> v;
    std::string cell;
    for (std::size_t i = 0; i <= data.size(); ++i) {
        if (i == data.size() || data[i] == ',') {
            try {
                v.push_back(std::stod(cell));
            } catch (...) {
                throw ParseError(path.string(), data_line, "non-numeric value '" + cell + "'");
            }
            cell.clear();
        } else if (data[i] != '\r') {
            cell.push_back(data[i]);
        }
    }
    if (v.size() != expected)
        throw Error("behavior config " + std::to_string(config) + ": expected " +
                    std::to_string(expected) + " values, got " + std::to_string(v.size()) +
                    " in " + path.string());
    return v;
}

}  // namespace

FamilyExtraction extract_behavior(const std::filesystem::path& behavior_dir, Role role) {
    FamilyExtraction out;
    out.values.reserve(kBehaviorConfigs * (kBehaviorHiddenDim + kBehaviorScoreDim));
    const std::filesystem::path role_dir = behavior_dir / to_string(role);

    for (int i = 1; i <= kBehaviorConfigs; ++i) {
        auto h = read_vector_csv(role_dir / ("config" + std::to_string(i) + ".h.csv"), i,
                                 kBehaviorHiddenDim);
        out.values.insert(out.values.end(), h.begin(), h.end());
        for (int j = 0; j < kBehaviorHiddenDim; ++j)
            out.names.push_back("E.h" + std::to_string(i) + "." + std::to_string(j));
    }
    for (int i = 1; i <= kBehaviorConfigs; ++i) {
        auto s = read_vector_csv(role_dir / ("config" + std::to_string(i) + ".s.csv"), i,
                                 kBehaviorScoreDim);
        out.values.insert(out.values.end(), s.begin(), s.end());
        for (const char* name : kBehaviorScoreNames)
            out.names.push_back("E.s" + std::to_string(i) + "." + name);
    }
    return out;
}

// ---- lexical -----------------------------------------------------------------

FamilyExtraction extract_lexical(const SessionTurns& turns, const Lexicon& lexicon, Role speaker) {
    std::size_t counts[2][2] = {{0, 0}, {0, 0}};  // [role][category]
    std::size_t totals[2] = {0, 0};
    for (const auto& t : turns.turns) {
        std::size_t r = static_cast<std::size_t>(t.speaker);
        for (const auto& w : t.words) {
            ++totals[r];
            if (auto cat = lexicon.match(w)) ++counts[r][static_cast<std::size_t>(*cat)];
        }
    }
    std::size_t spk = static_cast<std::size_t>(speaker);
    std::size_t prt = 1 - spk;
    if (totals[spk] == 0)
        throw Error(std::string("extract_lexical: ") + to_string(speaker) + " has zero words");
    if (totals[prt] == 0)
        throw Error(std::string("extract_lexical: partner of ") + to_string(speaker) +
                    " has zero words");

    auto raw = [&](std::size_t r, EmotionCategory c) {
        return static_cast<double>(counts[r][static_cast<std::size_t>(c)]) /
               static_cast<double>(totals[r]);
    };
    auto smooth = [&](std::size_t r, EmotionCategory c) {
        return (static_cast<double>(counts[r][static_cast<std::size_t>(c)]) + 0.5) /
               (static_cast<double>(totals[r]) + 1.0);
    };

    FamilyExtraction out;
    out.values = {
        raw(spk, EmotionCategory::Positive),
        raw(spk, EmotionCategory::Negative),
        std::log(smooth(spk, EmotionCategory::Positive) / smooth(prt, EmotionCategory::Positive)),
        std::log(smooth(spk, EmotionCategory::Positive) / smooth(prt, EmotionCategory::Negative)),
        std::log(smooth(spk, EmotionCategory::Negative) / smooth(prt, EmotionCategory::Positive)),
        std::log(smooth(spk, EmotionCategory::Negative) / smooth(prt, EmotionCategory::Negative)),
    };
    out.names = {"L.pos_prop",    "L.neg_prop",    "L.log_pos_pos",
                 "L.log_pos_neg", "L.log_neg_pos", "L.log_neg_neg"};
    return out;
}

// ---- turn-taking ----------------------------------------------------------------

namespace {

const char* const kTurnFuncs[9] = {"min", "max", "mean",  "std", "median",
                                   "q1",  "q3",  "range", "iqr"};

void turn_functionals(const std::vector<double>& xs, const std::string& prefix,
                      FamilyExtraction& out) {
    if (xs.empty()) {
        for (const char* fn : kTurnFuncs) {
            out.zero_filled.push_back(out.values.size());
            out.values.push_back(0.0);
            out.names.push_back(prefix + "." + fn);
        }
        return;
    }
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    double q1 = quantile_sorted(sorted, 0.25);
    double q3 = quantile_sorted(sorted, 0.75);
    const double vals[9] = {sorted.front(),
                            sorted.back(),
                            mean_of(xs),
                            population_std(xs),
                            quantile_sorted(sorted, 0.5),
                            q1,
                            q3,
                            sorted.back() - sorted.front(),
                            q3 - q1};
    for (int i = 0; i < 9; ++i) {
        out.values.push_back(vals[i]);
        out.names.push_back(prefix + "." + kTurnFuncs[i]);
    }
}

std::vector<double> diff_of(const std::vector<double>& xs) {
    std::vector<double> d;
    for (std::size_t i = 1; i < xs.size(); ++i) d.push_back(xs[i] - xs[i - 1]);
    return d;
}

}  // namespace

FamilyExtraction extract_turn_taking(const SessionTurns& turns, Role speaker) {
    std::vector<double> duration, words, rate, pause, dur_vs, words_vs;
    for (std::size_t i = 0; i < turns.turns.size(); ++i) {
        const Turn& t = turns.turns[i];
        if (t.speaker != speaker) continue;
        duration.push_back(t.duration_s());
        words.push_back(static_cast<double>(t.word_count()));
        rate.push_back(t.speech_rate());
        pause.push_back(t.pause_before_s());
        // reference: the partner's most recent turn before this one
        const Turn* prev = nullptr;
        for (std::size_t j = i; j-- > 0;) {
            if (turns.turns[j].speaker != speaker) {
                prev = &turns.turns[j];
                break;
            }
        }
        dur_vs.push_back(prev ? t.duration_s() - prev->duration_s() : 0.0);
        words_vs.push_back(prev ? static_cast<double>(t.word_count()) -
                                      static_cast<double>(prev->word_count())
                                : 0.0);
    }
    if (duration.empty())
        throw Error(std::string("extract_turn_taking: ") + to_string(speaker) + " has no turns");

    FamilyExtraction out;
    const std::pair<const char*, const std::vector<double>*> seqs[6] = {
        {"duration", &duration}, {"words", &words},
        {"rate", &rate},         {"pause", &pause},
        {"dur_vs_partner", &dur_vs}, {"words_vs_partner", &words_vs}};
    for (const auto& [name, seq] : seqs) {
        std::vector<double> d = diff_of(*seq);
        std::vector<double> dd = diff_of(d);
        turn_functionals(*seq, std::string("T.") + name + ".base", out);
        turn_functionals(d, std::string("T.") + name + ".delta", out);
        turn_functionals(dd, std::string("T.") + name + ".ddelta", out);
    }

    const auto& agg = turns.by_role[static_cast<std::size_t>(speaker)];
    out.values.push_back(agg.total_speech_s());
    out.names.push_back("T.global.total_speech_s");
    out.values.push_back(static_cast<double>(agg.total_words));
    out.names.push_back("T.global.total_words");
    out.values.push_back(agg.global_speech_rate());
    out.names.push_back("T.global.speech_rate");
    out.values.push_back(agg.total_pause_s());
    out.names.push_back("T.global.total_pause_s");
    out.values.push_back(static_cast<double>(agg.turn_count));
    out.names.push_back("T.global.turn_count");
    return out;
}

// ---- fusion ------------------------------------------------------------------

FamilyExtraction fuse(const std::map<char, FamilyExtraction>& by_family,
                      const std::string& families) {
    if (families.empty()) throw Error("fuse: empty family set");
    for (char f : families) {
        if (std::string("AELT").find(f) == std::string::npos)
            throw Error(std::string("fuse: unknown family '") + f + "'");
        if (std::count(families.begin(), families.end(), f) > 1)
            throw Error(std::string("fuse: duplicate family '") + f + "'");
    }
    FamilyExtraction out;
    for (char f : std::string("AELT")) {
        if (families.find(f) == std::string::npos) continue;
        auto it = by_family.find(f);
        if (it == by_family.end())
            throw Error(std::string("fuse: family '") + f + "' not extracted");
        for (std::size_t z : it->second.zero_filled)
            out.zero_filled.push_back(out.values.size() + z);
        out.values.insert(out.values.end(), it->second.values.begin(), it->second.values.end());
        out.names.insert(out.names.end(), it->second.names.begin(), it->second.names.end());
    }
    return out;
}

std::uint64_t registry_hash(const std::vector<std::string>& names) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& n : names) {
        h = fnv1a64(n, h);
        h = fnv1a64("\n", h);
    }
    return h;
}

// ---- corpus table ----------------------------------------------------------------

namespace {

SegmentSet segments_of_role(const SegmentSet& all, Role role) {
    SegmentSet out;
    for (const auto& s : all.segments) {
        auto r = role_from_tag(s.speaker_tag);
        if (!r) throw Error("unknown speaker tag '" + s.speaker_tag + "' (expected H or W)");
        if (*r == role) out.segments.push_back(s);
    }
    return out;
}

}  // namespace

FeatureTable extract_all(const Corpus& corpus, const ExtractOptions& opts) {
    const std::size_t n_sessions = corpus.sessions.size();
    if (n_sessions == 0) throw Error("extract_all: empty corpus");

    std::vector<std::vector<double>> rows(2 * n_sessions);
    std::vector<std::vector<std::string>> row_names(2 * n_sessions);
    std::vector<std::exception_ptr> errors(n_sessions);

    auto work = [&](std::size_t si) {
        try {
            const SessionRecord& rec = corpus.sessions[si];
            const SegmentSet& segs = corpus.segments.at(rec.session_id);
            const WordAlignment& words = corpus.words.at(rec.session_id);
            SessionTurns turns = build_turns(segs, words, opts.merge_gap_ms);

            FrameMatrix frames;
            if (opts.families.find('A') != std::string::npos)
                frames = parse_frames(corpus.resolve(rec.frames));

            for (Role role : {Role::Husband, Role::Wife}) {
                std::map<char, FamilyExtraction> fam;
                if (opts.families.find('A') != std::string::npos)
                    fam['A'] = extract_acoustic(frames, segments_of_role(segs, role));
                if (opts.families.find('E') != std::string::npos)
                    fam['E'] = extract_behavior(corpus.resolve(rec.behavior_dir), role);
                if (opts.families.find('L') != std::string::npos)
                    fam['L'] = extract_lexical(turns, corpus.lexicon, role);
                if (opts.families.find('T') != std::string::npos)
                    fam['T'] = extract_turn_taking(turns, role);
                FamilyExtraction fused = fuse(fam, opts.families);
                for (double v : fused.values)
                    if (!std::isfinite(v))
                        throw Error("extract_all: non-finite feature for " + rec.session_id +
                                    "/" + to_string(role));
                std::size_t row = 2 * si + (role == Role::Husband ? 0 : 1);
                rows[row] = std::move(fused.values);
                row_names[row] = std::move(fused.names);
            }
        } catch (...) {
            errors[si] = std::current_exception();
        }
    };

    int threads = std::max(1, opts.threads);
    if (threads == 1) {
        for (std::size_t si = 0; si < n_sessions; ++si) work(si);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t si = static_cast<std::size_t>(t); si < n_sessions;
                     si += static_cast<std::size_t>(threads))
                    work(si);
            });
        for (auto& th : pool) th.join();
    }
    for (std::size_t si = 0; si < n_sessions; ++si)
        if (errors[si]) std::rethrow_exception(errors[si]);

    FeatureTable table;
    table.names = row_names[0];
    for (std::size_t r = 1; r < row_names.size(); ++r)
        if (row_names[r] != table.names)
            throw Error("extract_all: registry mismatch across speaker-sessions");

    table.values = Matrix(rows.size(), table.names.size());
    for (std::size_t si = 0; si < n_sessions; ++si) {
        for (Role role : {Role::Husband, Role::Wife}) {
            std::size_t r = 2 * si + (role == Role::Husband ? 0 : 1);
            table.keys.push_back({corpus.sessions[si].session_id, role});
            for (std::size_t c = 0; c < table.names.size(); ++c)
                table.values(r, c) = rows[r][c];
        }
    }
    return table;
}

std::string feature_table_csv(const FeatureTable& table) {
    std::string out = "session_id,role";
    for (const auto& n : table.names) {
        out += ',';
        out += n;
    }
    out += '\n';
    for (std::size_t r = 0; r < table.keys.size(); ++r) {
        out += table.keys[r].session_id;
        out += ',';
        out += to_string(table.keys[r].role);
        for (std::size_t c = 0; c < table.values.cols(); ++c) {
            out += ',';
            out += format_g17(table.values(r, c));
        }
        out += '\n';
    }
    return out;
}

}  // namespace dyadrisk

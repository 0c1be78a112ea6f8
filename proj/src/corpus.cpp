#include "dyadrisk/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace dyadrisk {

using nlohmann::json;

const char* to_string(RiskLabel r) {
    switch (r) {
        case RiskLabel::None: return "none";
        case RiskLabel::Ideation: return "ideation";
        case RiskLabel::Attempt: return "attempt";
    }
    return "?";
}

const char* to_string(SessionType t) {
    switch (t) {
        case SessionType::RFL: return "RFL";
        case SessionType::WConflict: return "W-Conflict";
        case SessionType::HConflict: return "H-Conflict";
    }
    return "?";
}

const char* to_string(Role r) { return r == Role::Husband ? "Husband" : "Wife"; }

std::optional<RiskLabel> risk_from_string(std::string_view s) {
    if (s == "none") return RiskLabel::None;
    if (s == "ideation") return RiskLabel::Ideation;
    if (s == "attempt") return RiskLabel::Attempt;
    return std::nullopt;
}

std::optional<SessionType> session_type_from_string(std::string_view s) {
    if (s == "RFL") return SessionType::RFL;
    if (s == "W-Conflict") return SessionType::WConflict;
    if (s == "H-Conflict") return SessionType::HConflict;
    return std::nullopt;
}

std::optional<Role> role_from_string(std::string_view s) {
    if (s == "Husband") return Role::Husband;
    if (s == "Wife") return Role::Wife;
    return std::nullopt;
}

std::optional<Role> role_from_tag(std::string_view tag) {
    if (tag == "H" || tag == "Husband") return Role::Husband;
    if (tag == "W" || tag == "Wife") return Role::Wife;
    return std::nullopt;
}

std::optional<EmotionCategory> Lexicon::match(std::string_view token) const {
    for (const auto& e : entries) {
        if (e.is_stem) {
            if (token.size() >= e.pattern.size() &&
                token.substr(0, e.pattern.size()) == e.pattern)
                return e.category;
        } else if (token == e.pattern) {
            return e.category;
        }
    }
    return std::nullopt;
}

std::string normalize_token(std::string_view token) {
    std::size_t b = 0, e = token.size();
    while (b < e && std::ispunct(static_cast<unsigned char>(token[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(token[e - 1]))) --e;
    std::string out;
    out.reserve(e - b);
    for (std::size_t i = b; i < e; ++i)
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(token[i]))));
    return out;
}

// ---- manifest -------------------------------------------------------------

namespace {

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open file: " + path.string());
    return in;
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

}  // namespace

std::vector<SessionRecord> parse_manifest(const std::filesystem::path& path,
                                          ValidationReport& report) {
    std::ifstream in = open_or_throw(path);
    std::vector<SessionRecord> records;
    std::string line;
    std::size_t line_no = 0;
    std::set<std::string> seen_ids;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(path.string(), line_no, std::string("invalid JSON: ") + e.what());
        }

        SessionRecord rec;
        std::string sid = obj.value("session_id", std::string());
        rec.session_id = sid;
        auto require_string = [&](const char* key, std::string& dst) {
            if (!obj.contains(key) || !obj[key].is_string()) {
                report.error(sid, key, "missing field");
                return false;
            }
            dst = obj[key].get<std::string>();
            return true;
        };

        if (sid.empty()) report.error("", "session_id", "missing field (line " + std::to_string(line_no) + ")");
        if (!seen_ids.insert(sid).second)
            report.error(sid, "session_id", "duplicate session_id");

        require_string("couple_id", rec.couple_id);

        std::string type_str;
        if (require_string("session_type", type_str)) {
            auto t = session_type_from_string(type_str);
            if (!t) report.error(sid, "session_type", "unknown session type '" + type_str + "'");
            else rec.type = *t;
        }

        if (!obj.contains("duration_s") || !obj["duration_s"].is_number()) {
            report.error(sid, "duration_s", "missing field");
        } else {
            rec.duration_ms = ms_from_seconds(obj["duration_s"].get<double>());
            if (rec.duration_ms <= 0) report.error(sid, "duration_s", "duration must be positive");
        }

        if (!obj.contains("speakers") || !obj["speakers"].is_array()) {
            report.error(sid, "speakers", "missing field");
        } else {
            const auto& spk = obj["speakers"];
            if (spk.size() != 2) {
                report.error(sid, "speakers", "expected exactly 2 speakers, got " +
                                                  std::to_string(spk.size()));
            } else {
                int husbands = 0, wives = 0;
                std::array<std::optional<SpeakerInfo>, 2> parsed;
                for (const auto& s : spk) {
                    std::string role_str = s.value("role", std::string());
                    std::string risk_str = s.value("risk", std::string());
                    auto role = role_from_string(role_str);
                    auto risk = risk_from_string(risk_str);
                    if (!role) {
                        report.error(sid, "speakers.role", "unknown role '" + role_str + "'");
                        continue;
                    }
                    if (!risk) {
                        report.error(sid, "speakers.risk", "unknown risk label '" + risk_str + "'");
                        continue;
                    }
                    if (*role == Role::Husband) { ++husbands; parsed[0] = SpeakerInfo{*role, *risk}; }
                    else { ++wives; parsed[1] = SpeakerInfo{*role, *risk}; }
                }
                if (husbands != 1 || wives != 1) {
                    report.error(sid, "speakers", "role duplication: expected one Husband and one Wife");
                } else {
                    rec.speakers = {*parsed[0], *parsed[1]};
                }
            }
        }

        require_string("rttm", rec.rttm);
        require_string("ctm", rec.ctm);
        require_string("frames", rec.frames);
        require_string("behavior_dir", rec.behavior_dir);

        records.push_back(std::move(rec));
    }

    if (records.empty())
        report.warn("", "manifest", "empty manifest: no sessions defined");

    // couple-level invariants
    std::map<std::string, int> sessions_per_couple;
    for (const auto& r : records) ++sessions_per_couple[r.couple_id];
    for (const auto& [couple, count] : sessions_per_couple) {
        if (count > 3)
            report.error("", "couple_id",
                         "couple " + couple + " has " + std::to_string(count) +
                             " sessions (at most 3 allowed)");
    }
    // risk labels are a property of the person: a couple's sessions must agree
    std::map<std::string, std::array<SpeakerInfo, 2>> couple_speakers;
    for (const auto& r : records) {
        auto [it, inserted] = couple_speakers.emplace(r.couple_id, r.speakers);
        if (inserted) continue;
        for (int s = 0; s < 2; ++s) {
            if (it->second[s].risk != r.speakers[s].risk)
                report.error(r.session_id, "speakers.risk",
                             std::string("risk label for ") + to_string(r.speakers[s].role) +
                                 " disagrees with an earlier session of couple " + r.couple_id);
        }
    }

    std::stable_sort(records.begin(), records.end(),
                     [](const SessionRecord& a, const SessionRecord& b) {
                         return a.session_id < b.session_id;
                     });
    return records;
}

std::vector<SessionRecord> parse_manifest(const std::filesystem::path& path) {
    ValidationReport report;
    auto records = parse_manifest(path, report);
    if (!report.ok()) throw ValidationError(std::move(report));
    return records;
}

// ---- RTTM -----------------------------------------------------------------

std::map<std::string, SegmentSet> parse_rttm(const std::filesystem::path& path,
                                             ValidationReport* report) {
    std::ifstream in = open_or_throw(path);
    std::map<std::string, SegmentSet> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == ';') continue;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        auto f = split_ws(line);
        if (f.size() != 10)
            throw ParseError(path.string(), line_no,
                             "expected 10 fields, got " + std::to_string(f.size()));
        if (f[0] != "SPEAKER")
            throw ParseError(path.string(), line_no, "expected SPEAKER record, got '" + f[0] + "'");
        Segment seg;
        try {
            seg.start_ms = ms_from_seconds_str(f[3]);
            seg.dur_ms = ms_from_seconds_str(f[4]);
        } catch (const Error& e) {
            throw ParseError(path.string(), line_no, std::string("non-numeric time: ") + e.what());
        }
        if (seg.start_ms < 0)
            throw ParseError(path.string(), line_no, "negative start time");
        if (seg.dur_ms <= 0)
            throw ParseError(path.string(), line_no, "duration must be positive");
        seg.speaker_tag = f[7];
        out[f[1]].segments.push_back(std::move(seg));
    }
    for (auto& [sid, set] : out) {
        std::stable_sort(set.segments.begin(), set.segments.end(),
                         [](const Segment& a, const Segment& b) {
                             return a.start_ms < b.start_ms;
                         });
        if (report) {
            for (std::size_t i = 0; i + 1 < set.segments.size(); ++i) {
                const auto& a = set.segments[i];
                const auto& b = set.segments[i + 1];
                if (b.start_ms < a.end_ms() && a.speaker_tag != b.speaker_tag)
                    report->warn(sid, "rttm",
                                 "overlapping speech: [" + format_seconds(a.start_ms) + "," +
                                     format_seconds(a.end_ms()) + "] '" + a.speaker_tag +
                                     "' overlaps [" + format_seconds(b.start_ms) + "," +
                                     format_seconds(b.end_ms()) + "] '" + b.speaker_tag + "'");
            }
        }
    }
    return out;
}

std::string to_rttm(const std::string& session_id, const SegmentSet& set) {
    std::string out;
    for (const auto& s : set.segments) {
        out += "SPEAKER " + session_id + " 1 " + format_seconds(s.start_ms) + " " +
               format_seconds(s.dur_ms) + " <NA> <NA> " + s.speaker_tag + " <NA> <NA>\n";
    }
    return out;
}

// ---- CTM ------------------------------------------------------------------

std::map<std::string, WordAlignment> parse_ctm(const std::filesystem::path& path) {
    std::ifstream in = open_or_throw(path);
    std::map<std::string, WordAlignment> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == ';') continue;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        auto f = split_ws(line);
        if (f.size() != 5 && f.size() != 6)
            throw ParseError(path.string(), line_no,
                             "expected 5 or 6 fields, got " + std::to_string(f.size()));
        Word w;
        try {
            w.start_ms = ms_from_seconds_str(f[2]);
            w.dur_ms = ms_from_seconds_str(f[3]);
        } catch (const Error& e) {
            throw ParseError(path.string(), line_no, std::string("non-numeric time: ") + e.what());
        }
        if (w.start_ms < 0) throw ParseError(path.string(), line_no, "negative start time");
        if (w.dur_ms < 0) throw ParseError(path.string(), line_no, "negative duration");
        w.token = normalize_token(f[4]);
        if (w.token.empty())
            throw ParseError(path.string(), line_no, "empty token after normalization");
        if (f.size() == 6) {
            try {
                w.confidence = std::stod(f[5]);
            } catch (...) {
                throw ParseError(path.string(), line_no, "non-numeric confidence '" + f[5] + "'");
            }
            if (w.confidence < 0.0 || w.confidence > 1.0)
                throw ParseError(path.string(), line_no, "confidence outside [0,1]");
        }
        out[f[0]].words.push_back(std::move(w));
    }
    for (auto& [sid, wa] : out) {
        std::stable_sort(wa.words.begin(), wa.words.end(),
                         [](const Word& a, const Word& b) { return a.start_ms < b.start_ms; });
    }
    return out;
}

// ---- frames ----------------------------------------------------------------

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

FrameMatrix parse_frames(const std::filesystem::path& path) {
    std::ifstream in = open_or_throw(path);
    FrameMatrix fm;
    std::string line;
    std::size_t line_no = 0;

    // sidecar metadata lines: `# key=value`
    std::string header_line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line[0] == '#') {
            auto eq = line.find('=');
            if (eq != std::string::npos) {
                std::string key = line.substr(1, eq - 1);
                key.erase(0, key.find_first_not_of(" \t"));
                key.erase(key.find_last_not_of(" \t") + 1);
                if (key == "frame_period_s") {
                    try {
                        fm.frame_period_s = std::stod(line.substr(eq + 1));
                    } catch (...) {
                        throw ParseError(path.string(), line_no, "bad frame_period_s value");
                    }
                }
            }
            continue;
        }
        header_line = line;
        break;
    }
    if (fm.frame_period_s <= 0.0)
        throw ParseError(path.string(), 1, "missing or invalid '# frame_period_s=' sidecar line");
    if (header_line.empty())
        throw ParseError(path.string(), line_no, "missing header row");

    fm.channel_names = split_csv(header_line);
    auto f0 = std::find(fm.channel_names.begin(), fm.channel_names.end(), "F0");
    if (f0 == fm.channel_names.end())
        throw ParseError(path.string(), line_no, "pitch channel required: no F0 in header");
    fm.f0_index = static_cast<std::size_t>(f0 - fm.channel_names.begin());

    const std::size_t ncols = fm.channel_names.size();
    std::vector<double> flat;
    std::size_t nrows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        auto cells = split_csv(line);
        if (cells.size() != ncols)
            throw ParseError(path.string(), line_no,
                             "ragged row: expected " + std::to_string(ncols) + " cells, got " +
                                 std::to_string(cells.size()));
        for (const auto& cell : cells) {
            try {
                std::size_t used = 0;
                double v = std::stod(cell, &used);
                if (used != cell.size()) throw std::invalid_argument(cell);
                flat.push_back(v);
            } catch (...) {
                throw ParseError(path.string(), line_no, "non-numeric cell '" + cell + "'");
            }
        }
        ++nrows;
    }
    fm.values = Matrix(nrows, ncols);
    fm.values.data() = std::move(flat);
    for (std::size_t i = 0; i < nrows; ++i) {
        if (fm.values(i, fm.f0_index) < 0.0)
            throw ParseError(path.string(), 0,
                             "negative F0 at frame " + std::to_string(i) + " (0 marks unvoiced)");
    }
    return fm;
}

// ---- lexicon ----------------------------------------------------------------

Lexicon parse_lexicon(const std::filesystem::path& path) {
    std::ifstream in = open_or_throw(path);
    Lexicon lex;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        auto cells = split_csv(line);
        if (cells.size() != 2)
            throw ParseError(path.string(), line_no, "expected '<pattern>,<category>'");
        std::string pattern = cells[0];
        if (pattern.empty()) throw ParseError(path.string(), line_no, "empty pattern");
        for (char c : pattern)
            if (std::isupper(static_cast<unsigned char>(c)))
                throw ParseError(path.string(), line_no, "pattern must be lowercase: '" + pattern + "'");
        if (!seen.insert(pattern).second)
            throw ParseError(path.string(), line_no, "duplicate pattern '" + pattern + "'");

        LexiconEntry e;
        std::size_t stars = std::count(pattern.begin(), pattern.end(), '*');
        if (stars > 1 || (stars == 1 && pattern.back() != '*'))
            throw ParseError(path.string(), line_no,
                             "stem pattern must have exactly one trailing '*': '" + pattern + "'");
        if (stars == 1) {
            e.is_stem = true;
            pattern.pop_back();
            if (pattern.empty()) throw ParseError(path.string(), line_no, "empty stem pattern");
        }
        e.pattern = std::move(pattern);

        if (cells[1] == "Positive") e.category = EmotionCategory::Positive;
        else if (cells[1] == "Negative") e.category = EmotionCategory::Negative;
        else throw ParseError(path.string(), line_no, "unknown category '" + cells[1] + "'");

        lex.entries.push_back(std::move(e));
    }
    return lex;
}

// ---- segment embeddings -------------------------------------------------------

std::vector<std::vector<double>> parse_segment_embeddings(const std::filesystem::path& path) {
    std::ifstream in = open_or_throw(path);
    std::map<std::size_t, std::vector<double>> by_index;
    std::string line;
    std::size_t line_no = 0;
    std::size_t dim = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        auto cells = split_csv(line);
        if (cells.size() < 2)
            throw ParseError(path.string(), line_no, "expected 'segment_index,v0,...'");
        std::size_t idx;
        try {
            idx = static_cast<std::size_t>(std::stoull(cells[0]));
        } catch (...) {
            throw ParseError(path.string(), line_no, "bad segment index '" + cells[0] + "'");
        }
        std::vector<double> v;
        v.reserve(cells.size() - 1);
        for (std::size_t i = 1; i < cells.size(); ++i) {
            try {
                v.push_back(std::stod(cells[i]));
            } catch (...) {
                throw ParseError(path.string(), line_no, "non-numeric value '" + cells[i] + "'");
            }
        }
        if (dim == 0) dim = v.size();
        else if (v.size() != dim)
            throw ParseError(path.string(), line_no, "embedding dimension mismatch");
        if (!by_index.emplace(idx, std::move(v)).second)
            throw ParseError(path.string(), line_no, "duplicate segment index " + cells[0]);
    }
    std::vector<std::vector<double>> out;
    out.reserve(by_index.size());
    std::size_t expect = 0;
    for (auto& [idx, v] : by_index) {
        if (idx != expect)
            throw Error(path.string() + ": segment indices not contiguous from 0 (missing " +
                        std::to_string(expect) + ")");
        out.push_back(std::move(v));
        ++expect;
    }
    return out;
}

// ---- corpus assembly ------------------------------------------------------------

const SessionRecord* Corpus::find(const std::string& session_id) const {
    auto it = std::lower_bound(sessions.begin(), sessions.end(), session_id,
                               [](const SessionRecord& r, const std::string& id) {
                                   return r.session_id < id;
                               });
    if (it != sessions.end() && it->session_id == session_id) return &*it;
    return nullptr;
}

std::filesystem::path Corpus::resolve(const std::string& rel) const {
    std::filesystem::path p(rel);
    if (p.is_absolute()) return p;
    return root / p;
}

Corpus load_corpus(const std::filesystem::path& manifest_path,
                   const std::optional<std::filesystem::path>& lexicon_path,
                   ValidationReport& report, const LoadOptions& opts) {
    Corpus corpus;
    corpus.root = manifest_path.parent_path();
    corpus.sessions = parse_manifest(manifest_path, report);

    // parse each distinct rttm/ctm file once
    std::map<std::string, std::map<std::string, SegmentSet>> rttm_cache;
    std::map<std::string, std::map<std::string, WordAlignment>> ctm_cache;

    for (const auto& rec : corpus.sessions) {
        const std::string& sid = rec.session_id;
        try {
            auto rttm_path = corpus.resolve(rec.rttm);
            auto it = rttm_cache.find(rttm_path.string());
            if (it == rttm_cache.end())
                it = rttm_cache.emplace(rttm_path.string(), parse_rttm(rttm_path, &report)).first;
            auto seg = it->second.find(sid);
            if (seg == it->second.end()) {
                report.error(sid, "rttm", "no segments for session in " + rec.rttm);
            } else {
                for (const auto& s : seg->second.segments) {
                    if (s.end_ms() > rec.duration_ms + 500)
                        report.error(sid, "rttm",
                                     "segment ends at " + format_seconds(s.end_ms()) +
                                         " beyond session duration " +
                                         format_seconds(rec.duration_ms) + " (+0.5s slack)");
                }
                corpus.segments[sid] = seg->second;
            }
        } catch (const Error& e) {
            report.error(sid, "rttm", e.what());
        }

        try {
            auto ctm_path = corpus.resolve(rec.ctm);
            auto it = ctm_cache.find(ctm_path.string());
            if (it == ctm_cache.end())
                it = ctm_cache.emplace(ctm_path.string(), parse_ctm(ctm_path)).first;
            auto words = it->second.find(sid);
            if (words == it->second.end()) {
                corpus.words[sid] = WordAlignment{};  // silence-only session is legal
            } else {
                for (const auto& w : words->second.words) {
                    if (w.start_ms + w.dur_ms > rec.duration_ms + 500)
                        report.error(sid, "ctm", "word '" + w.token + "' beyond session duration");
                }
                corpus.words[sid] = words->second;
            }
        } catch (const Error& e) {
            report.error(sid, "ctm", e.what());
        }

        if (opts.deep) {
            try {
                FrameMatrix fm = parse_frames(corpus.resolve(rec.frames));
                if (fm.values.rows() == 0) report.error(sid, "frames", "no frames");
            } catch (const Error& e) {
                report.error(sid, "frames", e.what());
            }
            auto bdir = corpus.resolve(rec.behavior_dir);
            if (!std::filesystem::is_directory(bdir))
                report.error(sid, "behavior_dir", "not a directory: " + bdir.string());
        }
    }

    if (lexicon_path) {
        try {
            corpus.lexicon = parse_lexicon(*lexicon_path);
        } catch (const Error& e) {
            report.error("", "lexicon", e.what());
        }
    }

    if (!report.ok()) throw ValidationError(report);
    return corpus;
}

std::string canonical_dump(const Corpus& corpus) {
    json root = json::object();
    json sessions = json::array();
    for (const auto& rec : corpus.sessions) {
        json s;
        s["session_id"] = rec.session_id;
        s["couple_id"] = rec.couple_id;
        s["session_type"] = to_string(rec.type);
        s["duration_ms"] = rec.duration_ms;
        s["speakers"] = json::array();
        for (const auto& spk : rec.speakers)
            s["speakers"].push_back({{"role", to_string(spk.role)}, {"risk", to_string(spk.risk)}});

        json segs = json::array();
        if (auto it = corpus.segments.find(rec.session_id); it != corpus.segments.end()) {
            for (const auto& seg : it->second.segments)
                segs.push_back({{"start_ms", seg.start_ms},
                                {"dur_ms", seg.dur_ms},
                                {"tag", seg.speaker_tag}});
        }
        s["segments"] = std::move(segs);

        json words = json::array();
        if (auto it = corpus.words.find(rec.session_id); it != corpus.words.end()) {
            for (const auto& w : it->second.words)
                words.push_back({{"start_ms", w.start_ms},
                                 {"dur_ms", w.dur_ms},
                                 {"token", w.token},
                                 {"confidence", w.confidence}});
        }
        s["words"] = std::move(words);
        sessions.push_back(std::move(s));
    }
    root["sessions"] = std::move(sessions);

    json lex = json::array();
    for (const auto& e : corpus.lexicon.entries)
        lex.push_back({{"pattern", e.pattern + (e.is_stem ? "*" : "")},
                       {"category", e.category == EmotionCategory::Positive ? "Positive" : "Negative"}});
    root["lexicon"] = std::move(lex);

    return root.dump(2) + "\n";
}

}  // namespace dyadrisk

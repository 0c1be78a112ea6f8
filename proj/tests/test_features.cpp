#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "dyadrisk/error.hpp"
#include "dyadrisk/features.hpp"
#include "test_util.hpp"

using namespace dyadrisk;

namespace {

Segment seg(TimeMs start, TimeMs end, const char* tag) {
    return Segment{start, end - start, tag};
}

Turn make_turn(Role who, TimeMs start, TimeMs end, TimeMs pause,
               std::vector<std::string> words = {}) {
    Turn t;
    t.speaker = who;
    t.start_ms = start;
    t.end_ms = end;
    t.pause_before_ms = pause;
    t.words = std::move(words);
    return t;
}

// SessionTurns with consistent aggregates, built without the turn builder.
SessionTurns session_of(std::vector<Turn> turns) {
    SessionTurns st;
    st.turns = std::move(turns);
    for (const auto& t : st.turns) {
        auto& agg = st.by_role[static_cast<std::size_t>(t.speaker)];
        agg.total_speech_ms += t.duration_ms();
        agg.total_words += t.words.size();
        agg.total_pause_ms += t.pause_before_ms;
        agg.turn_count += 1;
    }
    return st;
}

std::string csv_row(const std::vector<double>& vals) {
    std::string s;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(vals[i]);
    }
    return s + "\n";
}

// Full behavior directory for one role: 26 hidden + 26 score configs.
void write_behavior_role(const std::filesystem::path& role_dir, double base) {
    for (int i = 1; i <= kBehaviorConfigs; ++i) {
        std::vector<double> h(kBehaviorHiddenDim);
        for (int j = 0; j < kBehaviorHiddenDim; ++j) h[static_cast<std::size_t>(j)] = base + i + 0.001 * j;
        testutil::write_file(role_dir / ("config" + std::to_string(i) + ".h.csv"), csv_row(h));
        std::vector<double> s(kBehaviorScoreDim);
        for (int j = 0; j < kBehaviorScoreDim; ++j) s[static_cast<std::size_t>(j)] = base + i + 0.1 * j;
        testutil::write_file(role_dir / ("config" + std::to_string(i) + ".s.csv"), csv_row(s));
    }
}

int find_name(const FamilyExtraction& fx, const std::string& name) {
    for (std::size_t i = 0; i < fx.names.size(); ++i)
        if (fx.names[i] == name) return static_cast<int>(i);
    return -1;
}

double value_of(const FamilyExtraction& fx, const std::string& name) {
    int i = find_name(fx, name);
    REQUIRE(i >= 0);
    return fx.values[static_cast<std::size_t>(i)];
}

}  // namespace

TEST_CASE("summary functionals match hand-computed values") {
    CHECK(mean_of({1.0, 2.0, 3.0}) == doctest::Approx(2.0));
    CHECK(population_std({1.0, 2.0, 3.0}) == doctest::Approx(std::sqrt(2.0 / 3.0)));
    CHECK(population_std({1.0, 2.0, 3.0}) == doctest::Approx(0.816496580927726));
    CHECK(population_std({5.0, 5.0, 5.0}) == doctest::Approx(0.0));
    CHECK(median_of({3.0, 1.0, 2.0}) == doctest::Approx(2.0));
    CHECK(median_of({4.0, 2.0}) == doctest::Approx(3.0));
    CHECK(median_of({7.0}) == doctest::Approx(7.0));

    std::vector<double> q = {1.0, 2.0, 3.0, 4.0};
    CHECK(quantile_sorted(q, 0.25) == doctest::Approx(1.75));  // h = 0.75
    CHECK(quantile_sorted(q, 0.75) == doctest::Approx(3.25));  // h = 2.25
    CHECK(quantile_sorted(q, 0.75) - quantile_sorted(q, 0.25) == doctest::Approx(1.5));
    CHECK(quantile_sorted(q, 0.0) == doctest::Approx(1.0));
    CHECK(quantile_sorted(q, 1.0) == doctest::Approx(4.0));
    CHECK(quantile_sorted(q, 0.5) == doctest::Approx(2.5));
    CHECK_THROWS_AS(quantile_sorted({}, 0.5), Error);
    CHECK_THROWS_AS(quantile_sorted(q, 1.5), Error);
}

TEST_CASE("acoustic family: six functionals per channel over in-segment frames") {
    FrameMatrix fm;
    fm.frame_period_s = 0.1;
    fm.channel_names = {"F0", "lld01"};
    fm.f0_index = 0;
    fm.values = Matrix(10, 2);
    for (std::size_t f = 0; f < 10; ++f) {
        fm.values(f, 0) = f < 5 ? static_cast<double>(f + 1) : 99.0;
        fm.values(f, 1) = 10.0 * static_cast<double>(f);
    }

    SegmentSet speaker;
    speaker.segments = {seg(0, 500, "H")};  // midpoints 50..450 -> frames 0..4
    auto fx = extract_acoustic(fm, speaker);
    REQUIRE(fx.values.size() == 12);  // 6 functionals x 2 channels
    REQUIRE(fx.names.size() == 12);
    CHECK(fx.zero_filled.empty());

    // F0 column saw {1,2,3,4,5}
    CHECK(fx.names[0] == "A.F0.mean");
    CHECK(fx.values[0] == doctest::Approx(3.0));
    CHECK(fx.names[1] == "A.F0.std");
    CHECK(fx.values[1] == doctest::Approx(std::sqrt(2.0)));
    CHECK(value_of(fx, "A.F0.min") == doctest::Approx(1.0));
    CHECK(value_of(fx, "A.F0.max") == doctest::Approx(5.0));
    CHECK(value_of(fx, "A.F0.median") == doctest::Approx(3.0));
    CHECK(value_of(fx, "A.F0.range") == doctest::Approx(4.0));
    CHECK(fx.names[6] == "A.lld01.mean");
    CHECK(fx.values[6] == doctest::Approx(20.0));  // {0,10,20,30,40}

    // overlapping segments merge: no frame is counted twice
    SegmentSet overlapping;
    overlapping.segments = {seg(0, 300, "H"), seg(200, 500, "H")};
    auto fx2 = extract_acoustic(fm, overlapping);
    CHECK(fx2.values == fx.values);

    SegmentSet outside;
    outside.segments = {seg(5000, 6000, "H")};
    CHECK_THROWS_WITH(extract_acoustic(fm, outside), doctest::Contains("no frames"));
}

TEST_CASE("behavior family: 26 hidden + 26 score configs in fixed order") {
    testutil::TempDir tmp;
    write_behavior_role(tmp / "Husband", 0.0);
    write_behavior_role(tmp / "Wife", 100.0);

    auto fx = extract_behavior(tmp.path(), Role::Husband);
    const std::size_t expected =
        static_cast<std::size_t>(kBehaviorConfigs) * (kBehaviorHiddenDim + kBehaviorScoreDim);
    REQUIRE(fx.values.size() == expected);
    CHECK(expected == 3458);
    CHECK(fx.names.size() == expected);

    CHECK(fx.names[0] == "E.h1.0");
    CHECK(fx.names[127] == "E.h1.127");
    CHECK(fx.names[128] == "E.h2.0");
    CHECK(fx.names[26 * 128] == "E.s1.Acceptance");
    CHECK(fx.names[26 * 128 + 4] == "E.s1.Sadness");
    CHECK(fx.names.back() == "E.s26.Sadness");

    // values land where their names claim
    CHECK(fx.values[0] == doctest::Approx(1.0));            // config1 h, j=0
    CHECK(fx.values[128] == doctest::Approx(2.0));          // config2 h, j=0
    CHECK(fx.values[129] == doctest::Approx(2.001));        // config2 h, j=1
    CHECK(fx.values[26 * 128] == doctest::Approx(1.0));     // config1 s, Acceptance
    CHECK(fx.values[26 * 128 + 1] == doctest::Approx(1.1)); // config1 s, Blame

    // the wife's directory is independent
    auto wfx = extract_behavior(tmp.path(), Role::Wife);
    CHECK(wfx.values[0] == doctest::Approx(101.0));
    CHECK(wfx.names == fx.names);

    SUBCASE("missing config names the config") {
        std::filesystem::remove(tmp / "Husband" / "config7.h.csv");
        CHECK_THROWS_WITH(extract_behavior(tmp.path(), Role::Husband),
                          doctest::Contains("config 7 absent"));
    }
    SUBCASE("mis-sized score vector names the expectation") {
        testutil::write_file(tmp / "Husband" / "config3.s.csv", "1,2,3\n");
        CHECK_THROWS_WITH(extract_behavior(tmp.path(), Role::Husband),
                          doctest::Contains("expected 5 values, got 3"));
    }
    SUBCASE("comment lines are tolerated, second data row is not") {
        testutil::write_file(tmp / "Husband" / "config1.s.csv", "# note\n1,2,3,4,5\n");
        CHECK_NOTHROW(extract_behavior(tmp.path(), Role::Husband));
        testutil::write_file(tmp / "Husband" / "config1.s.csv", "1,2,3,4,5\n6,7,8,9,10\n");
        CHECK_THROWS_WITH(extract_behavior(tmp.path(), Role::Husband),
                          doctest::Contains("single data row"));
    }
}

TEST_CASE("lexical family: raw proportions and smoothed log ratios") {
    Lexicon lex;
    lex.entries = {{"good", false, EmotionCategory::Positive},
                   {"love", false, EmotionCategory::Positive},
                   {"sad", false, EmotionCategory::Negative},
                   {"bad", false, EmotionCategory::Negative}};

    // husband: 3 positive + 1 negative of 20 words; wife: 2 + 2 of 10
    std::vector<std::string> h_words = {"good", "good", "love", "sad"};
    for (int i = 0; i < 16; ++i) h_words.push_back("neutral");
    std::vector<std::string> w_words = {"good", "love", "sad", "bad"};
    for (int i = 0; i < 6; ++i) w_words.push_back("um");

    auto st = session_of({make_turn(Role::Husband, 0, 2000, 0, h_words),
                          make_turn(Role::Wife, 2500, 4000, 500, w_words)});
    auto fx = extract_lexical(st, lex, Role::Husband);
    REQUIRE(fx.values.size() == 6);
    CHECK(fx.names == std::vector<std::string>{"L.pos_prop", "L.neg_prop", "L.log_pos_pos",
                                               "L.log_pos_neg", "L.log_neg_pos",
                                               "L.log_neg_neg"});
    CHECK(fx.values[0] == doctest::Approx(0.15));  // raw, unsmoothed
    CHECK(fx.values[1] == doctest::Approx(0.05));
    // smoothed: (1 + 0.5)/(20 + 1) vs (2 + 0.5)/(10 + 1) = 11/35
    CHECK(fx.values[4] == doctest::Approx(std::log(11.0 / 35.0)));
    CHECK(fx.values[4] == doctest::Approx(-1.157).epsilon(1e-3));
    CHECK(fx.values[2] == doctest::Approx(std::log((3.5 / 21.0) / (2.5 / 11.0))));

    SUBCASE("identical smoothed proportions give a zero log ratio") {
        std::vector<std::string> same = {"good", "x", "x", "x", "x"};
        auto st2 = session_of({make_turn(Role::Husband, 0, 1000, 0, same),
                               make_turn(Role::Wife, 1500, 2500, 500, same)});
        auto fx2 = extract_lexical(st2, lex, Role::Husband);
        CHECK(fx2.values[2] == doctest::Approx(0.0));
        CHECK(fx2.values[5] == doctest::Approx(0.0));
    }
    SUBCASE("zero matches stay finite through smoothing") {
        std::vector<std::string> plain = {"x", "y", "z"};
        auto st2 = session_of({make_turn(Role::Husband, 0, 1000, 0, plain),
                               make_turn(Role::Wife, 1500, 2500, 500, plain)});
        auto fx2 = extract_lexical(st2, lex, Role::Husband);
        for (double v : fx2.values) CHECK(std::isfinite(v));
        CHECK(fx2.values[0] == doctest::Approx(0.0));
        CHECK(fx2.values[2] == doctest::Approx(0.0));  // (0.5/4)/(0.5/4)
    }
    SUBCASE("either side speechless is an error") {
        auto st2 = session_of({make_turn(Role::Husband, 0, 1000, 0, {"hi"}),
                               make_turn(Role::Wife, 1500, 2500, 500, {})});
        CHECK_THROWS_WITH(extract_lexical(st2, lex, Role::Husband),
                          doctest::Contains("partner of Husband has zero words"));
        CHECK_THROWS_WITH(extract_lexical(st2, lex, Role::Wife),
                          doctest::Contains("Wife has zero words"));
    }
}

TEST_CASE("turn-taking family: 167 values from sequences, deltas, and globals") {
    // husband turns of 2, 4, 8 seconds; wife interleaved for partner references
    auto st = session_of({make_turn(Role::Husband, 0, 2000, 0, {"a", "b"}),
                          make_turn(Role::Wife, 2500, 3500, 500, {"w"}),
                          make_turn(Role::Husband, 4000, 8000, 500, {"c", "d", "e"}),
                          make_turn(Role::Wife, 8200, 9200, 200, {"w"}),
                          make_turn(Role::Husband, 9500, 17500, 300, {"f"})});
    auto fx = extract_turn_taking(st, Role::Husband);
    REQUIRE(fx.values.size() == 167);  // 6 sequences x 3 variants x 9 + 5 globals
    REQUIRE(fx.names.size() == 167);
    CHECK(fx.zero_filled.empty());

    CHECK(value_of(fx, "T.duration.base.min") == doctest::Approx(2.0));
    CHECK(value_of(fx, "T.duration.base.max") == doctest::Approx(8.0));
    CHECK(value_of(fx, "T.duration.base.mean") == doctest::Approx(14.0 / 3.0));
    CHECK(value_of(fx, "T.duration.base.median") == doctest::Approx(4.0));
    CHECK(value_of(fx, "T.duration.base.q1") == doctest::Approx(3.0));
    CHECK(value_of(fx, "T.duration.base.q3") == doctest::Approx(6.0));
    CHECK(value_of(fx, "T.duration.base.range") == doctest::Approx(6.0));
    CHECK(value_of(fx, "T.duration.base.iqr") == doctest::Approx(3.0));
    // deltas {2, 4}; delta-deltas {2}
    CHECK(value_of(fx, "T.duration.delta.mean") == doctest::Approx(3.0));
    CHECK(value_of(fx, "T.duration.ddelta.median") == doctest::Approx(2.0));

    // partner-referenced sequences subtract the most recent wife turn
    // (first husband turn has no reference -> 0)
    CHECK(value_of(fx, "T.dur_vs_partner.base.min") == doctest::Approx(0.0));
    CHECK(value_of(fx, "T.dur_vs_partner.base.max") == doctest::Approx(7.0));  // 8 - 1
    CHECK(value_of(fx, "T.words_vs_partner.base.max") == doctest::Approx(2.0));  // 3 - 1

    // globals fold the aggregates
    CHECK(value_of(fx, "T.global.total_speech_s") == doctest::Approx(14.0));
    CHECK(value_of(fx, "T.global.total_words") == doctest::Approx(6.0));
    CHECK(value_of(fx, "T.global.speech_rate") == doctest::Approx(6.0 / 14.0));
    CHECK(value_of(fx, "T.global.total_pause_s") == doctest::Approx(0.8));
    CHECK(value_of(fx, "T.global.turn_count") == doctest::Approx(3.0));
}

TEST_CASE("turn-taking family: empty delta sequences are zero-filled and recorded") {
    auto one = session_of({make_turn(Role::Husband, 0, 2000, 0, {"a"}),
                           make_turn(Role::Wife, 2500, 3500, 500, {"w"})});
    auto fx = extract_turn_taking(one, Role::Husband);
    REQUIRE(fx.values.size() == 167);
    // one turn: every delta and delta-delta block is empty -> 6 x 2 x 9 slots
    CHECK(fx.zero_filled.size() == 108);
    for (std::size_t idx : fx.zero_filled) {
        CHECK(fx.values[idx] == 0.0);
        bool is_diff = fx.names[idx].find(".delta.") != std::string::npos ||
                       fx.names[idx].find(".ddelta.") != std::string::npos;
        CHECK(is_diff);
    }

    auto two = session_of({make_turn(Role::Husband, 0, 2000, 0, {"a"}),
                           make_turn(Role::Wife, 2500, 3500, 500, {"w"}),
                           make_turn(Role::Husband, 4000, 5000, 500, {"b"})});
    auto fx2 = extract_turn_taking(two, Role::Husband);
    CHECK(fx2.zero_filled.size() == 54);  // only the 6 delta-delta blocks
}

TEST_CASE("turn-taking family: speaker without turns is an error") {
    auto st = session_of({make_turn(Role::Husband, 0, 2000, 0, {"a"})});
    CHECK_THROWS_WITH(extract_turn_taking(st, Role::Wife),
                      doctest::Contains("Wife has no turns"));
}

TEST_CASE("fusion concatenates families in fixed A, E, L, T order") {
    FamilyExtraction a{{1.0, 2.0}, {"A.x", "A.y"}, {}};
    FamilyExtraction l{{3.0}, {"L.z"}, {}};
    FamilyExtraction t{{4.0, 5.0}, {"T.u", "T.v"}, {1}};
    std::map<char, FamilyExtraction> fams = {{'A', a}, {'L', l}, {'T', t}};

    auto fused = fuse(fams, "TLA");  // request order is irrelevant
    CHECK(fused.values == std::vector<double>{1.0, 2.0, 3.0, 4.0, 5.0});
    CHECK(fused.names == std::vector<std::string>{"A.x", "A.y", "L.z", "T.u", "T.v"});
    REQUIRE(fused.zero_filled.size() == 1);
    CHECK(fused.zero_filled[0] == 4);  // T's local index 1 lands at offset 3 + 1

    auto only_l = fuse(fams, "L");
    CHECK(only_l.values == std::vector<double>{3.0});

    CHECK_THROWS_WITH(fuse(fams, ""), doctest::Contains("empty family set"));
    CHECK_THROWS_WITH(fuse(fams, "AX"), doctest::Contains("unknown family 'X'"));
    CHECK_THROWS_WITH(fuse(fams, "AA"), doctest::Contains("duplicate family 'A'"));
    CHECK_THROWS_WITH(fuse(fams, "AE"), doctest::Contains("family 'E' not extracted"));
}

TEST_CASE("fused dimension arithmetic at the reference channel count") {
    // with 38 acoustic channels: 6*38 + 3458 + 167 = 3853 for families AET
    auto dummy = [](char fam, std::size_t n) {
        FamilyExtraction fx;
        for (std::size_t i = 0; i < n; ++i) {
            fx.values.push_back(0.0);
            fx.names.push_back(std::string(1, fam) + "." + std::to_string(i));
        }
        return fx;
    };
    std::map<char, FamilyExtraction> fams = {
        {'A', dummy('A', 6 * 38)}, {'E', dummy('E', 3458)}, {'T', dummy('T', 167)}};
    CHECK(fuse(fams, "AET").values.size() == 3853);
}

TEST_CASE("registry hash is order- and content-sensitive") {
    std::vector<std::string> names = {"A.F0.mean", "A.F0.std"};
    auto h = registry_hash(names);
    CHECK(h == registry_hash(names));
    CHECK(h != registry_hash({"A.F0.std", "A.F0.mean"}));
    CHECK(h != registry_hash({"A.F0.mean"}));
    // concatenation cannot be confused with separate entries
    CHECK(registry_hash({"ab", "c"}) != registry_hash({"a", "bc"}));
}

TEST_CASE("corpus-wide extraction: deterministic order, thread-invariant") {
    testutil::TempDir tmp;

    // two sessions, frames on disk, everything else in memory
    Corpus corpus;
    corpus.root = tmp.path();
    std::string frames_csv = "# frame_period_s=0.1\nF0,lld01\n";
    for (int f = 0; f < 30; ++f)
        frames_csv += std::to_string(100 + f) + "," + std::to_string(0.5 * f) + "\n";
    for (const char* sid : {"s1", "s2"}) {
        testutil::write_file(tmp / "frames" / (std::string(sid) + ".csv"), frames_csv);
        SessionRecord rec;
        rec.session_id = sid;
        rec.couple_id = std::string("c_") + sid;
        rec.type = SessionType::RFL;
        rec.duration_ms = 3000;
        rec.speakers = {SpeakerInfo{Role::Husband, RiskLabel::None},
                        SpeakerInfo{Role::Wife, RiskLabel::None}};
        rec.frames = "frames/" + std::string(sid) + ".csv";
        corpus.sessions.push_back(rec);

        SegmentSet segs;
        segs.segments = {seg(0, 1000, "H"), seg(1200, 2000, "W"), seg(2200, 2900, "H")};
        corpus.segments[sid] = segs;
        WordAlignment wa;
        Word w1; w1.start_ms = 100; w1.dur_ms = 300; w1.token = "good";
        Word w2; w2.start_ms = 1300; w2.dur_ms = 300; w2.token = "sad";
        Word w3; w3.start_ms = 2300; w3.dur_ms = 300; w3.token = "well";
        wa.words = {w1, w2, w3};
        corpus.words[sid] = wa;
    }
    corpus.lexicon.entries = {{"good", false, EmotionCategory::Positive},
                              {"sad", false, EmotionCategory::Negative}};

    ExtractOptions opts;
    opts.families = "ALT";
    auto table = extract_all(corpus, opts);

    REQUIRE(table.keys.size() == 4);
    CHECK(table.keys[0] == SpeakerKey{"s1", Role::Husband});
    CHECK(table.keys[1] == SpeakerKey{"s1", Role::Wife});
    CHECK(table.keys[2] == SpeakerKey{"s2", Role::Husband});
    CHECK(table.keys[3] == SpeakerKey{"s2", Role::Wife});
    CHECK(table.names.size() == 6 * 2 + 6 + 167);  // A (2 channels) + L + T
    CHECK(table.values.rows() == 4);
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < table.values.cols(); ++c)
            CHECK(std::isfinite(table.values(r, c)));

    // identical sessions produce identical rows
    CHECK(table.values(0, 0) == table.values(2, 0));

    // thread count must not change a single byte
    ExtractOptions threaded = opts;
    threaded.threads = 4;
    auto table4 = extract_all(corpus, threaded);
    CHECK(feature_table_csv(table4) == feature_table_csv(table));
    CHECK(table4.hash() == table.hash());

    // CSV shape
    auto csv = feature_table_csv(table);
    CHECK(csv.rfind("session_id,role,A.F0.mean,", 0) == 0);
    CHECK(csv.find("\ns1,Husband,") != std::string::npos);
    CHECK(csv.find("\ns2,Wife,") != std::string::npos);

    Corpus empty;
    CHECK_THROWS_WITH(extract_all(empty, opts), doctest::Contains("empty corpus"));
}

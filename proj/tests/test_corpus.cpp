#include <algorithm>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "dyadrisk/corpus.hpp"
#include "dyadrisk/error.hpp"
#include "test_util.hpp"

using namespace dyadrisk;
namespace fs = std::filesystem;

namespace {

// One syntactically complete manifest line; callers override pieces by string surgery.
std::string manifest_line(const std::string& sid, const std::string& couple,
                          const std::string& type, const std::string& h_risk,
                          const std::string& w_risk, double duration_s = 12.0) {
    return "{\"session_id\":\"" + sid + "\",\"couple_id\":\"" + couple +
           "\",\"session_type\":\"" + type + "\",\"duration_s\":" + std::to_string(duration_s) +
           ",\"speakers\":[{\"role\":\"Husband\",\"risk\":\"" + h_risk +
           "\"},{\"role\":\"Wife\",\"risk\":\"" + w_risk + "\"}],\"rttm\":\"rttm/" + sid +
           ".rttm\",\"ctm\":\"ctm/" + sid + ".ctm\",\"frames\":\"frames/" + sid +
           ".csv\",\"behavior_dir\":\"behavior/" + sid + "\"}\n";
}

// Minimal loadable session: two alternating turns, a few words, one frame file.
void write_session_files(const fs::path& root, const std::string& sid) {
    testutil::write_file(root / "rttm" / (sid + ".rttm"),
                         "SPEAKER " + sid + " 1 0.000 2.000 <NA> <NA> H <NA> <NA>\n" +
                         "SPEAKER " + sid + " 1 3.000 2.000 <NA> <NA> W <NA> <NA>\n");
    testutil::write_file(root / "ctm" / (sid + ".ctm"),
                         sid + " 1 0.100 0.400 hello\n" +
                         sid + " 1 3.100 0.400 world 0.9\n");
    testutil::write_file(root / "frames" / (sid + ".csv"),
                         "# frame_period_s=0.1\nF0,lld01\n120.0,0.5\n0.0,-0.25\n210.5,1.5\n");
    fs::create_directories(root / "behavior" / sid);
}

}  // namespace

TEST_CASE("manifest: happy path parses, sorts, and validates cleanly") {
    testutil::TempDir tmp;
    testutil::write_file(tmp / "manifest.jsonl",
                         manifest_line("c001_s2", "c001", "W-Conflict", "none", "ideation") +
                             manifest_line("c001_s1", "c001", "RFL", "none", "ideation", 9.5));
    ValidationReport report;
    auto recs = parse_manifest(tmp / "manifest.jsonl", report);
    CHECK(report.ok());
    CHECK(report.warnings.empty());
    REQUIRE(recs.size() == 2);
    // sorted by session_id regardless of file order
    CHECK(recs[0].session_id == "c001_s1");
    CHECK(recs[1].session_id == "c001_s2");
    CHECK(recs[0].couple_id == "c001");
    CHECK(recs[0].type == SessionType::RFL);
    CHECK(recs[1].type == SessionType::WConflict);
    CHECK(recs[0].duration_ms == 9500);
    CHECK(recs[0].speaker(Role::Husband).risk == RiskLabel::None);
    CHECK(recs[0].speaker(Role::Wife).risk == RiskLabel::Ideation);
    CHECK(recs[0].rttm == "rttm/c001_s1.rttm");
    CHECK(recs[0].behavior_dir == "behavior/c001_s1");
}

TEST_CASE("manifest: validation is total and names session and field") {
    testutil::TempDir tmp;
    std::string bad =
        "{\"session_id\":\"x_s1\",\"couple_id\":\"x\",\"session_type\":\"Picnic\","
        "\"duration_s\":-1,\"speakers\":[{\"role\":\"Husband\",\"risk\":\"bogus\"},"
        "{\"role\":\"Wife\",\"risk\":\"none\"}],\"ctm\":\"a.ctm\",\"frames\":\"a.csv\","
        "\"behavior_dir\":\"b\"}\n";  // also missing rttm
    testutil::write_file(tmp / "manifest.jsonl",
                         bad + manifest_line("y_s1", "y", "RFL", "none", "none"));
    ValidationReport report;
    auto recs = parse_manifest(tmp / "manifest.jsonl", report);
    CHECK(recs.size() == 2);  // the broken record is still returned, not dropped
    REQUIRE(!report.ok());
    auto has = [&](const std::string& field, const std::string& frag) {
        return std::any_of(report.errors.begin(), report.errors.end(), [&](const Issue& i) {
            return i.session_id == "x_s1" && i.field == field &&
                   i.message.find(frag) != std::string::npos;
        });
    };
    CHECK(has("session_type", "Picnic"));
    CHECK(has("duration_s", "positive"));
    CHECK(has("speakers.risk", "bogus"));
    CHECK(has("rttm", "missing"));
    // the valid sibling line carries no errors
    for (const auto& e : report.errors) CHECK(e.session_id != "y_s1");
}

TEST_CASE("manifest: duplicate ids, role duplication, couple size, risk drift") {
    testutil::TempDir tmp;

    SUBCASE("duplicate session_id") {
        testutil::write_file(tmp / "m.jsonl", manifest_line("a_s1", "a", "RFL", "none", "none") +
                                                  manifest_line("a_s1", "a", "RFL", "none", "none"));
        ValidationReport report;
        parse_manifest(tmp / "m.jsonl", report);
        REQUIRE(!report.ok());
        CHECK(report.errors[0].message.find("duplicate session_id") != std::string::npos);
    }

    SUBCASE("two husbands is role duplication") {
        std::string line = manifest_line("a_s1", "a", "RFL", "none", "none");
        auto pos = line.find("\"Wife\"");
        line.replace(pos, 6, "\"Husband\"");
        testutil::write_file(tmp / "m.jsonl", line);
        ValidationReport report;
        parse_manifest(tmp / "m.jsonl", report);
        REQUIRE(!report.ok());
        CHECK(report.errors[0].message.find("role duplication") != std::string::npos);
    }

    SUBCASE("more than three sessions for one couple") {
        std::string text;
        for (int i = 1; i <= 4; ++i)
            text += manifest_line("a_s" + std::to_string(i), "a", "RFL", "none", "none");
        testutil::write_file(tmp / "m.jsonl", text);
        ValidationReport report;
        parse_manifest(tmp / "m.jsonl", report);
        REQUIRE(!report.ok());
        CHECK(report.errors[0].message.find("at most 3") != std::string::npos);
    }

    SUBCASE("risk label must not change between sessions of one couple") {
        testutil::write_file(tmp / "m.jsonl",
                             manifest_line("a_s1", "a", "RFL", "none", "ideation") +
                                 manifest_line("a_s2", "a", "W-Conflict", "none", "attempt"));
        ValidationReport report;
        parse_manifest(tmp / "m.jsonl", report);
        REQUIRE(!report.ok());
        CHECK(report.errors[0].field == "speakers.risk");
        CHECK(report.errors[0].message.find("Wife") != std::string::npos);
        CHECK(report.errors[0].message.find("couple a") != std::string::npos);
    }

    SUBCASE("empty manifest warns but succeeds") {
        testutil::write_file(tmp / "m.jsonl", "\n  \n");
        ValidationReport report;
        auto recs = parse_manifest(tmp / "m.jsonl", report);
        CHECK(recs.empty());
        CHECK(report.ok());
        REQUIRE(report.warnings.size() == 1);
        CHECK(report.warnings[0].message.find("empty manifest") != std::string::npos);
    }

    SUBCASE("broken JSON throws ParseError with file and line") {
        testutil::write_file(tmp / "m.jsonl",
                             manifest_line("a_s1", "a", "RFL", "none", "none") + "{oops\n");
        ValidationReport report;
        try {
            parse_manifest(tmp / "m.jsonl", report);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
            CHECK(std::string(e.what()).find("m.jsonl") != std::string::npos);
        }
    }

    SUBCASE("throwing overload raises ValidationError") {
        testutil::write_file(tmp / "m.jsonl", manifest_line("a_s1", "a", "RFL", "none", "none") +
                                                  manifest_line("a_s1", "a", "RFL", "none", "none"));
        CHECK_THROWS_AS(parse_manifest(tmp / "m.jsonl"), ValidationError);
    }
}

TEST_CASE("rttm: parse, sort, round-trip, and overlap warnings") {
    testutil::TempDir tmp;

    SUBCASE("segments sort by start and round-trip byte-exactly") {
        std::string sorted =
            "SPEAKER s1 1 0.000 2.000 <NA> <NA> H <NA> <NA>\n"
            "SPEAKER s1 1 2.500 1.250 <NA> <NA> W <NA> <NA>\n";
        // feed the lines reversed, with a comment and a blank line thrown in
        testutil::write_file(tmp / "a.rttm",
                             ";; comment\nSPEAKER s1 1 2.500 1.250 <NA> <NA> W <NA> <NA>\n\n"
                             "SPEAKER s1 1 0.000 2.000 <NA> <NA> H <NA> <NA>\n");
        auto sets = parse_rttm(tmp / "a.rttm");
        REQUIRE(sets.count("s1") == 1);
        const auto& segs = sets["s1"].segments;
        REQUIRE(segs.size() == 2);
        CHECK(segs[0].start_ms == 0);
        CHECK(segs[0].dur_ms == 2000);
        CHECK(segs[0].speaker_tag == "H");
        CHECK(segs[1].start_ms == 2500);
        CHECK(segs[1].end_ms() == 3750);
        CHECK(to_rttm("s1", sets["s1"]) == sorted);
    }

    SUBCASE("cross-speaker overlap warns; same-speaker overlap does not") {
        testutil::write_file(tmp / "a.rttm",
                             "SPEAKER s1 1 0.0 2.0 <NA> <NA> H <NA> <NA>\n"
                             "SPEAKER s1 1 1.5 2.0 <NA> <NA> W <NA> <NA>\n"
                             "SPEAKER s2 1 0.0 2.0 <NA> <NA> H <NA> <NA>\n"
                             "SPEAKER s2 1 1.5 2.0 <NA> <NA> H <NA> <NA>\n");
        ValidationReport report;
        parse_rttm(tmp / "a.rttm", &report);
        CHECK(report.errors.empty());
        REQUIRE(report.warnings.size() == 1);
        CHECK(report.warnings[0].session_id == "s1");
        CHECK(report.warnings[0].message.find("overlapping speech") != std::string::npos);
    }

    SUBCASE("malformed lines throw with the line number") {
        testutil::write_file(tmp / "a.rttm", "SPEAKER s1 1 0.0 2.0 <NA> <NA> H <NA>\n");
        CHECK_THROWS_WITH_AS(parse_rttm(tmp / "a.rttm"),
                             doctest::Contains("expected 10 fields"), ParseError);

        testutil::write_file(tmp / "b.rttm", "LEXEME s1 1 0.0 2.0 <NA> <NA> H <NA> <NA>\n");
        CHECK_THROWS_WITH_AS(parse_rttm(tmp / "b.rttm"),
                             doctest::Contains("expected SPEAKER record"), ParseError);

        testutil::write_file(tmp / "c.rttm", "SPEAKER s1 1 -0.5 2.0 <NA> <NA> H <NA> <NA>\n");
        CHECK_THROWS_WITH_AS(parse_rttm(tmp / "c.rttm"),
                             doctest::Contains("negative start"), ParseError);

        testutil::write_file(tmp / "d.rttm", "SPEAKER s1 1 0.5 0.000 <NA> <NA> H <NA> <NA>\n");
        CHECK_THROWS_WITH_AS(parse_rttm(tmp / "d.rttm"),
                             doctest::Contains("duration must be positive"), ParseError);

        testutil::write_file(tmp / "e.rttm", "SPEAKER s1 1 zero 2.0 <NA> <NA> H <NA> <NA>\n");
        try {
            parse_rttm(tmp / "e.rttm");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 1);
            CHECK(std::string(e.what()).find("non-numeric time") != std::string::npos);
        }
    }
}

TEST_CASE("ctm: field counts, confidence, token normalization, ordering") {
    testutil::TempDir tmp;

    SUBCASE("5- and 6-field records; tokens normalized; sorted by start") {
        testutil::write_file(tmp / "a.ctm",
                             "s1 1 3.000 0.400 World! 0.75\n"
                             "s1 1 0.250 0.300 \"Hello,\"\n");
        auto words = parse_ctm(tmp / "a.ctm");
        REQUIRE(words.count("s1") == 1);
        const auto& ws = words["s1"].words;
        REQUIRE(ws.size() == 2);
        CHECK(ws[0].token == "hello");
        CHECK(ws[0].start_ms == 250);
        CHECK(ws[0].dur_ms == 300);
        CHECK(ws[0].mid_ms() == 400);
        CHECK(ws[0].confidence == doctest::Approx(1.0));  // default when omitted
        CHECK(ws[1].token == "world");
        CHECK(ws[1].confidence == doctest::Approx(0.75));
    }

    SUBCASE("rejections") {
        testutil::write_file(tmp / "a.ctm", "s1 1 0.0 0.2 hi extra junk\n");
        CHECK_THROWS_WITH_AS(parse_ctm(tmp / "a.ctm"),
                             doctest::Contains("expected 5 or 6 fields"), ParseError);

        testutil::write_file(tmp / "b.ctm", "s1 1 0.0 0.2 ok 1.5\n");
        CHECK_THROWS_WITH_AS(parse_ctm(tmp / "b.ctm"),
                             doctest::Contains("confidence outside [0,1]"), ParseError);

        testutil::write_file(tmp / "c.ctm", "s1 1 0.0 0.2 --\n");
        CHECK_THROWS_WITH_AS(parse_ctm(tmp / "c.ctm"),
                             doctest::Contains("empty token after normalization"), ParseError);
    }
}

TEST_CASE("normalize_token strips edge punctuation and lowercases") {
    CHECK(normalize_token("Hello,") == "hello");
    CHECK(normalize_token("\"YEAH!\"") == "yeah");
    CHECK(normalize_token("don't") == "don't");  // interior punctuation survives
    CHECK(normalize_token("okay") == "okay");
    CHECK(normalize_token("...") == "");
}

TEST_CASE("frames: sidecar, header, shape, and F0 constraints") {
    testutil::TempDir tmp;

    SUBCASE("happy path") {
        testutil::write_file(tmp / "f.csv",
                             "# frame_period_s=0.1\nlld01,F0,lld02\n0.5,120.0,-1.0\n1.5,0.0,2.0\n");
        auto fm = parse_frames(tmp / "f.csv");
        CHECK(fm.frame_period_s == doctest::Approx(0.1));
        CHECK(fm.channel_names == std::vector<std::string>{"lld01", "F0", "lld02"});
        CHECK(fm.f0_index == 1);
        REQUIRE(fm.values.rows() == 2);
        REQUIRE(fm.values.cols() == 3);
        CHECK(fm.values(0, 1) == doctest::Approx(120.0));
        CHECK(fm.values(1, 2) == doctest::Approx(2.0));
        CHECK(fm.frame_mid_ms(0) == 50);   // centers at (i + 0.5) * period
        CHECK(fm.frame_mid_ms(1) == 150);
    }

    SUBCASE("rejections") {
        testutil::write_file(tmp / "a.csv", "F0\n120.0\n");
        CHECK_THROWS_WITH_AS(parse_frames(tmp / "a.csv"),
                             doctest::Contains("frame_period_s"), ParseError);

        testutil::write_file(tmp / "b.csv", "# frame_period_s=0.1\nlld01,lld02\n0.5,1.0\n");
        CHECK_THROWS_WITH_AS(parse_frames(tmp / "b.csv"),
                             doctest::Contains("no F0 in header"), ParseError);

        testutil::write_file(tmp / "c.csv", "# frame_period_s=0.1\nF0,lld01\n120.0\n");
        CHECK_THROWS_WITH_AS(parse_frames(tmp / "c.csv"),
                             doctest::Contains("ragged row"), ParseError);

        testutil::write_file(tmp / "d.csv", "# frame_period_s=0.1\nF0,lld01\n-5.0,1.0\n");
        CHECK_THROWS_WITH_AS(parse_frames(tmp / "d.csv"),
                             doctest::Contains("negative F0"), ParseError);

        testutil::write_file(tmp / "e.csv", "# frame_period_s=0.1\nF0,lld01\n1.0,2x\n");
        CHECK_THROWS_WITH_AS(parse_frames(tmp / "e.csv"),
                             doctest::Contains("non-numeric cell"), ParseError);
    }
}

TEST_CASE("lexicon: patterns, stems, and first-match-wins semantics") {
    testutil::TempDir tmp;

    SUBCASE("parse and match") {
        testutil::write_file(tmp / "lex.csv",
                             "# comment\ngood,Positive\nworr*,Negative\nlove*,Positive\n");
        auto lex = parse_lexicon(tmp / "lex.csv");
        REQUIRE(lex.entries.size() == 3);
        CHECK(lex.entries[1].pattern == "worr");
        CHECK(lex.entries[1].is_stem);
        CHECK(lex.match("good") == EmotionCategory::Positive);
        CHECK(lex.match("goods") == std::nullopt);  // exact entries need exact tokens
        CHECK(lex.match("worried") == EmotionCategory::Negative);
        CHECK(lex.match("worr") == EmotionCategory::Negative);  // stem matches itself
        CHECK(lex.match("wor") == std::nullopt);
        CHECK(lex.match("lovely") == EmotionCategory::Positive);
        CHECK(lex.match("neutral") == std::nullopt);
    }

    SUBCASE("file order decides between competing patterns") {
        testutil::write_file(tmp / "lex.csv", "worried,Positive\nworr*,Negative\n");
        auto lex = parse_lexicon(tmp / "lex.csv");
        CHECK(lex.match("worried") == EmotionCategory::Positive);
        CHECK(lex.match("worries") == EmotionCategory::Negative);
    }

    SUBCASE("rejections") {
        testutil::write_file(tmp / "a.csv", "Good,Positive\n");
        CHECK_THROWS_WITH_AS(parse_lexicon(tmp / "a.csv"),
                             doctest::Contains("lowercase"), ParseError);

        testutil::write_file(tmp / "b.csv", "good,Positive\ngood,Negative\n");
        CHECK_THROWS_WITH_AS(parse_lexicon(tmp / "b.csv"),
                             doctest::Contains("duplicate pattern"), ParseError);

        testutil::write_file(tmp / "c.csv", "good,Neutral\n");
        CHECK_THROWS_WITH_AS(parse_lexicon(tmp / "c.csv"),
                             doctest::Contains("unknown category"), ParseError);

        testutil::write_file(tmp / "d.csv", "go*od,Positive\n");
        CHECK_THROWS_WITH_AS(parse_lexicon(tmp / "d.csv"),
                             doctest::Contains("trailing '*'"), ParseError);

        testutil::write_file(tmp / "e.csv", "*,Positive\n");
        CHECK_THROWS_WITH_AS(parse_lexicon(tmp / "e.csv"),
                             doctest::Contains("empty stem"), ParseError);

        testutil::write_file(tmp / "f.csv", "good\n");
        CHECK_THROWS_WITH_AS(parse_lexicon(tmp / "f.csv"),
                             doctest::Contains("<pattern>,<category>"), ParseError);
    }
}

TEST_CASE("segment embeddings: contiguous indices, fixed dimension") {
    testutil::TempDir tmp;

    SUBCASE("rows come back ordered by index even when shuffled on disk") {
        testutil::write_file(tmp / "e.csv", "1,0.5,0.5\n0,1.0,0.0\n2,-1.0,0.25\n");
        auto vecs = parse_segment_embeddings(tmp / "e.csv");
        REQUIRE(vecs.size() == 3);
        CHECK(vecs[0] == std::vector<double>{1.0, 0.0});
        CHECK(vecs[1] == std::vector<double>{0.5, 0.5});
        CHECK(vecs[2] == std::vector<double>{-1.0, 0.25});
    }

    SUBCASE("rejections") {
        testutil::write_file(tmp / "a.csv", "0,1.0,0.0\n2,0.5,0.5\n");
        CHECK_THROWS_WITH(parse_segment_embeddings(tmp / "a.csv"),
                          doctest::Contains("not contiguous from 0 (missing 1)"));

        testutil::write_file(tmp / "b.csv", "0,1.0,0.0\n1,0.5\n");
        CHECK_THROWS_WITH_AS(parse_segment_embeddings(tmp / "b.csv"),
                             doctest::Contains("dimension mismatch"), ParseError);

        testutil::write_file(tmp / "c.csv", "0,1.0,0.0\n0,0.5,0.5\n");
        CHECK_THROWS_WITH_AS(parse_segment_embeddings(tmp / "c.csv"),
                             doctest::Contains("duplicate segment index"), ParseError);
    }
}

TEST_CASE("load_corpus: assembly, cross-file checks, canonical dump") {
    testutil::TempDir tmp;
    std::string manifest = manifest_line("c001_s1", "c001", "RFL", "none", "ideation") +
                           manifest_line("c002_s1", "c002", "H-Conflict", "attempt", "none");
    testutil::write_file(tmp / "manifest.jsonl", manifest);
    write_session_files(tmp.path(), "c001_s1");
    write_session_files(tmp.path(), "c002_s1");
    testutil::write_file(tmp / "lexicon.csv", "good,Positive\nsad*,Negative\n");

    SUBCASE("happy path (deep) and byte-stable canonical dump") {
        ValidationReport report;
        Corpus corpus = load_corpus(tmp / "manifest.jsonl", tmp / "lexicon.csv", report);
        CHECK(report.ok());
        CHECK(corpus.sessions.size() == 2);
        REQUIRE(corpus.find("c002_s1") != nullptr);
        CHECK(corpus.find("c002_s1")->speaker(Role::Husband).risk == RiskLabel::Attempt);
        CHECK(corpus.find("nope") == nullptr);
        CHECK(corpus.segments.at("c001_s1").segments.size() == 2);
        CHECK(corpus.words.at("c001_s1").words.size() == 2);
        CHECK(corpus.lexicon.entries.size() == 2);
        CHECK(corpus.resolve("rttm/x.rttm") == tmp.path() / "rttm/x.rttm");

        std::string dump1 = canonical_dump(corpus);
        ValidationReport report2;
        Corpus again = load_corpus(tmp / "manifest.jsonl", tmp / "lexicon.csv", report2);
        CHECK(canonical_dump(again) == dump1);
        CHECK(dump1.find("\"c001_s1\"") != std::string::npos);
    }

    SUBCASE("missing referenced file fails validation and names the path") {
        fs::remove(tmp / "rttm" / "c002_s1.rttm");
        ValidationReport report;
        try {
            load_corpus(tmp / "manifest.jsonl", std::nullopt, report);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            bool named = std::any_of(
                e.report().errors.begin(), e.report().errors.end(), [](const Issue& i) {
                    return i.session_id == "c002_s1" && i.field == "rttm" &&
                           i.message.find("c002_s1.rttm") != std::string::npos;
                });
            CHECK(named);
        }
    }

    SUBCASE("session absent from its rttm is an error; absent from ctm is fine") {
        // point both sessions at c001_s1's files: c002_s1 has no segments there
        std::string twisted = manifest;
        auto pos = std::string::npos;
        while ((pos = twisted.find("c002_s1.rttm")) != std::string::npos)
            twisted.replace(pos, 12, "c001_s1.rttm");
        while ((pos = twisted.find("c002_s1.ctm")) != std::string::npos)
            twisted.replace(pos, 11, "c001_s1.ctm");
        testutil::write_file(tmp / "manifest.jsonl", twisted);
        ValidationReport report;
        try {
            load_corpus(tmp / "manifest.jsonl", std::nullopt, report);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            REQUIRE(e.report().errors.size() == 1);  // ctm silence is not an error
            CHECK(e.report().errors[0].field == "rttm");
            CHECK(e.report().errors[0].message.find("no segments") != std::string::npos);
        }
    }

    SUBCASE("words and segments past the session end are flagged") {
        testutil::write_file(tmp / "ctm" / "c001_s1.ctm",
                             "c001_s1 1 14.000 0.400 late\n");
        ValidationReport report;
        try {
            load_corpus(tmp / "manifest.jsonl", std::nullopt, report);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            REQUIRE(e.report().errors.size() == 1);
            CHECK(e.report().errors[0].field == "ctm");
            CHECK(e.report().errors[0].message.find("beyond session duration") !=
                  std::string::npos);
        }
    }

    SUBCASE("shallow load skips frames so frame errors pass unseen") {
        testutil::write_file(tmp / "frames" / "c001_s1.csv", "garbage\n");
        ValidationReport deep_report;
        CHECK_THROWS_AS(load_corpus(tmp / "manifest.jsonl", std::nullopt, deep_report),
                        ValidationError);
        ValidationReport shallow_report;
        LoadOptions opts;
        opts.deep = false;
        CHECK_NOTHROW(load_corpus(tmp / "manifest.jsonl", std::nullopt, shallow_report, opts));
        CHECK(shallow_report.ok());
    }
}

TEST_CASE("enum round-trips and tag aliases") {
    CHECK(to_string(RiskLabel::None) == std::string("none"));
    CHECK(to_string(RiskLabel::Ideation) == std::string("ideation"));
    CHECK(to_string(RiskLabel::Attempt) == std::string("attempt"));
    CHECK(risk_from_string("attempt") == RiskLabel::Attempt);
    CHECK(risk_from_string("Attempt") == std::nullopt);
    CHECK(session_type_from_string("W-Conflict") == SessionType::WConflict);
    CHECK(session_type_from_string("WConflict") == std::nullopt);
    CHECK(role_from_tag("H") == Role::Husband);
    CHECK(role_from_tag("Wife") == Role::Wife);
    CHECK(role_from_tag("X") == std::nullopt);
}

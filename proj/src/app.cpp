#include "dyadrisk/app.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dyadrisk/analysis.hpp"
#include "dyadrisk/corpus.hpp"
#include "dyadrisk/diarization.hpp"
#include "dyadrisk/error.hpp"
#include "dyadrisk/evaluation.hpp"
#include "dyadrisk/features.hpp"
#include "dyadrisk/numfmt.hpp"
#include "dyadrisk/report.hpp"
#include "dyadrisk/rng.hpp"
#include "dyadrisk/synth.hpp"

namespace dyadrisk {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw Error("read failed: " + path.string());
    return text;
}

void spill(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw Error("write failed: " + path.string());
}

// Values come from the JSON config file unless the flag was given on the
// command line; flags always win. Unknown config keys are errors.
class ConfigBinder {
  public:
    explicit ConfigBinder(CLI::App* cmd) : cmd_(cmd) {
        cmd->add_option("--config", path_, "JSON config file; flags override its values");
    }

    template <typename T>
    void bind(const std::string& key, T& field) {
        appliers_.emplace_back(key, [&field, key](const nlohmann::json& v) {
            try {
                field = v.get<T>();
            } catch (const std::exception&) {
                throw Error("config: bad value for key '" + key + "'");
            }
        });
    }

    void apply() const {
        if (path_.empty()) return;
        nlohmann::json cfg;
        try {
            cfg = nlohmann::json::parse(slurp(path_));
        } catch (const nlohmann::json::exception& e) {
            throw Error("config: malformed JSON in " + path_ + ": " + e.what());
        }
        if (!cfg.is_object()) throw Error("config: expected a JSON object in " + path_);
        for (const auto& [key, value] : cfg.items()) {
            const auto it = std::find_if(appliers_.begin(), appliers_.end(),
                                         [&](const auto& a) { return a.first == key; });
            if (it == appliers_.end()) throw Error("config: unknown key '" + key + "'");
            if (cmd_->count("--" + key) == 0) it->second(value);
        }
    }

  private:
    CLI::App* cmd_;
    std::string path_;
    std::vector<std::pair<std::string, std::function<void(const nlohmann::json&)>>> appliers_;
};

std::string clean_families(std::string families) {
    std::string out;
    for (char c : families)
        if (c != ',' && c != ' ' && c != '\t') out += c;
    if (out.empty()) throw Error("families: empty selection");
    return out;
}

Scenario parse_scenario(const std::string& s) {
    if (auto v = scenario_from_string(s)) return *v;
    throw Error("unknown scenario '" + s + "' (expected degree-of-risk, no-risk-vs-risk, "
                "non-severe-vs-severe, or the aliases degree/risk/severe)");
}

Partition parse_partition(const std::string& s) {
    if (auto v = partition_from_string(s)) return *v;
    throw Error("unknown partition '" + s + "' (expected none, gender, content, or demand)");
}

Corpus load_or_die(const std::string& manifest, const std::string& lexicon, bool deep,
                   std::ostream& err) {
    ValidationReport rep;
    std::optional<fs::path> lex;
    if (!lexicon.empty()) {
        lex = fs::path(lexicon);
    } else {
        const fs::path fallback = fs::path(manifest).parent_path() / "lexicon.csv";
        if (fs::exists(fallback)) lex = fallback;
    }
    try {
        Corpus corpus = load_corpus(manifest, lex, rep, LoadOptions{deep});
        for (const auto& w : rep.warnings) err << "warning: " << w.to_string() << '\n';
        return corpus;
    } catch (const ValidationError&) {
        err << rep.to_string();
        throw Error("corpus validation failed: " + std::to_string(rep.errors.size()) +
                    " error(s) in " + manifest);
    }
}

// ---- command option blocks -------------------------------------------------------

struct ValidateCmd {
    std::string manifest, lexicon;
    bool deep = true;

    int run() const {
        ValidationReport rep;
        std::optional<fs::path> lex;
        if (!lexicon.empty()) lex = fs::path(lexicon);
        try {
            Corpus corpus = load_corpus(manifest, lex, rep, LoadOptions{deep});
            std::cout << rep.to_string();
            std::map<std::string, int> couples;
            for (const auto& s : corpus.sessions) ++couples[s.couple_id];
            std::cout << "OK: " << corpus.sessions.size() << " session(s), " << couples.size()
                      << " couple(s), " << rep.warnings.size() << " warning(s)\n";
            return 0;
        } catch (const ValidationError&) {
            std::cerr << rep.to_string();
            std::cerr << "FAIL: " << rep.errors.size() << " error(s)\n";
            return 1;
        }
    }
};

struct ExtractCmd {
    std::string manifest, lexicon, families = "AELT", out;
    std::int64_t merge_gap_ms = 500;
    int threads = 1;

    int run() const {
        Corpus corpus = load_or_die(manifest, lexicon, false, std::cerr);
        ExtractOptions opts;
        opts.families = clean_families(families);
        opts.merge_gap_ms = merge_gap_ms;
        opts.threads = threads;
        FeatureTable table = extract_all(corpus, opts);
        spill(out, feature_table_csv(table));
        std::cout << "extracted " << table.keys.size() << " speaker-sessions x "
                  << table.names.size() << " features (registry " << table.hash() << ") -> "
                  << out << '\n';
        return 0;
    }
};

struct TrainEvalCmd {
    std::string manifest, lexicon, families = "AELT";
    std::string scenario = "degree-of-risk", partition = "none", grid = "full";
    std::uint64_t seed = 0;
    std::int64_t merge_gap_ms = 500;
    int threads = 1;
    std::string out, predictions_out;
    bool quiet = false;

    int run() const {
        Corpus corpus = load_or_die(manifest, lexicon, false, std::cerr);
        ExtractOptions eopts;
        eopts.families = clean_families(families);
        eopts.merge_gap_ms = merge_gap_ms;
        eopts.threads = threads;
        FeatureTable table = extract_all(corpus, eopts);

        ExperimentOptions opts;
        opts.scenario = parse_scenario(scenario);
        opts.partition = parse_partition(partition);
        if (grid == "full")
            opts.grid = HyperGrid::full();
        else if (grid == "fast")
            opts.grid = HyperGrid::fast();
        else
            throw Error("unknown grid '" + grid + "' (expected full or fast)");
        opts.seed = seed;
        opts.threads = threads;

        EvalReport report = run_experiment(corpus, table, opts);
        if (!out.empty()) spill(out, eval_report_json(report));
        if (!predictions_out.empty()) spill(predictions_out, predictions_csv(report));
        if (!quiet) std::cout << eval_report_text(report);
        if (!out.empty()) std::cout << "report -> " << out << '\n';
        return 0;
    }
};

struct AnalyzeCmd {
    std::string manifest, lexicon, families = "AELT", out;
    std::size_t top = 20;
    std::int64_t merge_gap_ms = 500;
    int threads = 1;

    int run() const {
        Corpus corpus = load_or_die(manifest, lexicon, false, std::cerr);
        ExtractOptions opts;
        opts.families = clean_families(families);
        opts.merge_gap_ms = merge_gap_ms;
        opts.threads = threads;
        FeatureTable table = extract_all(corpus, opts);

        std::vector<int> labels;
        labels.reserve(table.keys.size());
        for (const auto& key : table.keys) {
            const SessionRecord* rec = corpus.find(key.session_id);
            if (!rec) throw Error("analyze: feature row references unknown session " +
                                  key.session_id);
            labels.push_back(static_cast<int>(rec->speaker(key.role).risk));
        }
        CorrelationReport report = top_correlations(table, labels, top, threads);
        if (!out.empty()) spill(out, correlation_csv(report));
        std::cout << correlation_text(report);
        if (!out.empty()) std::cout << "correlations -> " << out << '\n';
        return 0;
    }
};

struct DiarizeCmd {
    std::string manifest, embeddings_dir, out;
    double p = 0.0;
    std::uint64_t seed = 0;
    std::int64_t collar_ms = 250;

    int run() const {
        Corpus corpus = load_or_die(manifest, "", false, std::cerr);
        const fs::path emb_root = embeddings_dir.empty()
                                      ? fs::path(manifest).parent_path() / "embeddings"
                                      : fs::path(embeddings_dir);
        double der_sum = 0.0;
        std::size_t n = 0;
        for (const auto& rec : corpus.sessions) {
            const auto& ref = corpus.segments.at(rec.session_id);
            auto embeddings = parse_segment_embeddings(emb_root / (rec.session_id + ".csv"));
            if (embeddings.size() != ref.segments.size())
                throw Error("diarize: " + rec.session_id + ": " +
                            std::to_string(embeddings.size()) + " embeddings for " +
                            std::to_string(ref.segments.size()) + " segments");
            FrameMatrix frames = parse_frames(corpus.resolve(rec.frames));
            DiarizationResult result = diarize_session(ref, embeddings, frames, p,
                                                       derive_seed(seed, rec.session_id));
            const double der = diarization_error_rate(result.labeled, ref, collar_ms);
            der_sum += der;
            ++n;
            std::cout << rec.session_id << "  DER " << format_fixed(der, 4) << "  median F0 H "
                      << format_fixed(result.roles.median_f0[static_cast<std::size_t>(
                                          result.roles.role_of_cluster[0] == Role::Husband ? 0
                                                                                           : 1)],
                                      1)
                      << (result.roles.tie_warning ? "  (role tie-break)" : "") << '\n';
            if (!out.empty())
                spill(fs::path(out) / (rec.session_id + ".rttm"),
                      to_rttm(rec.session_id, result.labeled));
        }
        if (n == 0) throw Error("diarize: no sessions in manifest");
        std::cout << "mean DER " << format_fixed(der_sum / static_cast<double>(n), 4) << " over "
                  << n << " session(s)\n";
        return 0;
    }
};

struct TunePCmd {
    std::string manifest, embeddings_dir;
    std::uint64_t seed = 0;

    int run() const {
        Corpus corpus = load_or_die(manifest, "", false, std::cerr);
        const fs::path emb_root = embeddings_dir.empty()
                                      ? fs::path(manifest).parent_path() / "embeddings"
                                      : fs::path(embeddings_dir);
        std::vector<LabeledDevSession> dev;
        for (const auto& rec : corpus.sessions) {
            LabeledDevSession s;
            s.session_id = rec.session_id;
            s.reference = corpus.segments.at(rec.session_id);
            s.embeddings = parse_segment_embeddings(emb_root / (rec.session_id + ".csv"));
            dev.push_back(std::move(s));
        }
        TuneReport report = tune_p(dev, seed);
        std::cout << "p      mean DER\n";
        for (std::size_t i = 0; i < report.grid.size(); ++i)
            std::cout << format_fixed(report.grid[i], 2) << "   "
                      << format_fixed(report.mean_der[i], 4)
                      << (report.grid[i] == report.best_p ? "  <- best" : "") << '\n';
        std::cout << "best p = " << format_fixed(report.best_p, 2) << '\n';
        return 0;
    }
};

struct SynthCmd {
    std::string out;
    std::uint64_t seed = 0;
    int couples = 62;
    double duration_s = 600.0;
    double frame_period_s = 0.1;
    int channels = 38;
    int embedding_dim = 8;
    double noise = 1.0;
    std::vector<double> priors;  // empty keeps the default
    std::string effects = "strong";
    double a_effect = -1.0, e_effect = -1.0, l_effect = -1.0, t_effect = -1.0;

    int run() const {
        SynthSpec spec;
        if (effects == "none")
            spec = SynthSpec::null_effects();
        else if (effects != "strong")
            throw Error("unknown effects preset '" + effects + "' (expected strong or none)");
        spec.n_couples = couples;
        spec.duration_s = duration_s;
        spec.frame_period_s = frame_period_s;
        spec.lld_channels = channels;
        spec.embedding_dim = embedding_dim;
        spec.noise = noise;
        if (!priors.empty()) {
            if (priors.size() != 3)
                throw Error("priors: expected exactly 3 values (none, ideation, attempt)");
            std::copy(priors.begin(), priors.end(), spec.priors.begin());
        }
        if (a_effect >= 0.0) spec.a_effect = a_effect;
        if (e_effect >= 0.0) spec.e_effect = e_effect;
        if (l_effect >= 0.0) spec.l_effect = l_effect;
        if (t_effect >= 0.0) spec.t_effect = t_effect;

        SynthSummary summary = generate_synthetic(spec, seed, out);
        std::cout << "wrote " << summary.sessions << " session(s) for " << summary.couples
                  << " couple(s) to " << out << "\nspeaker labels: none="
                  << summary.speaker_labels[0] << " ideation=" << summary.speaker_labels[1]
                  << " attempt=" << summary.speaker_labels[2] << '\n';
        return 0;
    }
};

struct ReportCmd {
    std::vector<std::string> inputs;
    std::string out;

    int run() const {
        std::vector<EvalSummary> runs;
        for (const auto& path : inputs) runs.push_back(parse_eval_summary(slurp(path)));
        const std::string table = summary_table(std::move(runs));
        std::cout << table;
        if (!out.empty()) {
            spill(out, table);
            std::cout << "table -> " << out << '\n';
        }
        return 0;
    }
};

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App cli{"dyadic conversation risk pipeline"};
    cli.require_subcommand(1);

    ValidateCmd validate_cmd;
    auto* validate = cli.add_subcommand("validate", "check a corpus manifest and its files");
    ConfigBinder validate_cfg(validate);
    validate->add_option("--manifest", validate_cmd.manifest, "manifest JSON-lines path");
    validate->add_option("--lexicon", validate_cmd.lexicon, "emotion lexicon CSV");
    validate->add_flag("--deep,!--no-deep", validate_cmd.deep,
                       "also parse frame CSVs and probe behavior dirs");
    validate_cfg.bind("manifest", validate_cmd.manifest);
    validate_cfg.bind("lexicon", validate_cmd.lexicon);
    validate_cfg.bind("deep", validate_cmd.deep);

    ExtractCmd extract_cmd;
    auto* extract = cli.add_subcommand("extract", "extract per-speaker session features");
    ConfigBinder extract_cfg(extract);
    extract->add_option("--manifest", extract_cmd.manifest, "manifest JSON-lines path");
    extract->add_option("--lexicon", extract_cmd.lexicon,
                        "emotion lexicon CSV (default: lexicon.csv next to the manifest)");
    extract->add_option("--families", extract_cmd.families,
                        "feature families, e.g. AELT or A,E,L,T");
    extract->add_option("--merge-gap-ms", extract_cmd.merge_gap_ms,
                        "same-speaker gaps below this merge into one turn");
    extract->add_option("--threads", extract_cmd.threads, "worker threads");
    extract->add_option("--out", extract_cmd.out, "output feature CSV path");
    extract_cfg.bind("manifest", extract_cmd.manifest);
    extract_cfg.bind("lexicon", extract_cmd.lexicon);
    extract_cfg.bind("families", extract_cmd.families);
    extract_cfg.bind("merge-gap-ms", extract_cmd.merge_gap_ms);
    extract_cfg.bind("threads", extract_cmd.threads);
    extract_cfg.bind("out", extract_cmd.out);

    TrainEvalCmd train_cmd;
    auto* train = cli.add_subcommand("train-eval",
                                     "leave-one-couple-out SVM evaluation with significance");
    ConfigBinder train_cfg(train);
    train->add_option("--manifest", train_cmd.manifest, "manifest JSON-lines path");
    train->add_option("--lexicon", train_cmd.lexicon, "emotion lexicon CSV");
    train->add_option("--families", train_cmd.families, "feature families");
    train->add_option("--scenario", train_cmd.scenario,
                      "degree-of-risk | no-risk-vs-risk | non-severe-vs-severe");
    train->add_option("--partition", train_cmd.partition, "none | gender | content | demand");
    train->add_option("--grid", train_cmd.grid, "hyperparameter grid: full | fast");
    train->add_option("--seed", train_cmd.seed, "master seed")->required();
    train->add_option("--merge-gap-ms", train_cmd.merge_gap_ms, "turn merge gap");
    train->add_option("--threads", train_cmd.threads, "worker threads");
    train->add_option("--out", train_cmd.out, "report JSON output path");
    train->add_option("--predictions", train_cmd.predictions_out, "predictions CSV output path");
    train->add_flag("--quiet", train_cmd.quiet, "suppress the text report");
    train_cfg.bind("manifest", train_cmd.manifest);
    train_cfg.bind("lexicon", train_cmd.lexicon);
    train_cfg.bind("families", train_cmd.families);
    train_cfg.bind("scenario", train_cmd.scenario);
    train_cfg.bind("partition", train_cmd.partition);
    train_cfg.bind("grid", train_cmd.grid);
    train_cfg.bind("merge-gap-ms", train_cmd.merge_gap_ms);
    train_cfg.bind("threads", train_cmd.threads);
    train_cfg.bind("out", train_cmd.out);
    train_cfg.bind("predictions", train_cmd.predictions_out);
    train_cfg.bind("quiet", train_cmd.quiet);

    AnalyzeCmd analyze_cmd;
    auto* analyze = cli.add_subcommand("analyze",
                                       "rank features by correlation with the risk degree");
    ConfigBinder analyze_cfg(analyze);
    analyze->add_option("--manifest", analyze_cmd.manifest, "manifest JSON-lines path");
    analyze->add_option("--lexicon", analyze_cmd.lexicon, "emotion lexicon CSV");
    analyze->add_option("--families", analyze_cmd.families, "feature families");
    analyze->add_option("--top", analyze_cmd.top, "rows in the top-|rho| list");
    analyze->add_option("--merge-gap-ms", analyze_cmd.merge_gap_ms, "turn merge gap");
    analyze->add_option("--threads", analyze_cmd.threads, "worker threads");
    analyze->add_option("--out", analyze_cmd.out, "correlation CSV output path");
    analyze_cfg.bind("manifest", analyze_cmd.manifest);
    analyze_cfg.bind("lexicon", analyze_cmd.lexicon);
    analyze_cfg.bind("families", analyze_cmd.families);
    analyze_cfg.bind("top", analyze_cmd.top);
    analyze_cfg.bind("merge-gap-ms", analyze_cmd.merge_gap_ms);
    analyze_cfg.bind("threads", analyze_cmd.threads);
    analyze_cfg.bind("out", analyze_cmd.out);

    DiarizeCmd diarize_cmd;
    auto* diarize = cli.add_subcommand("diarize", "cluster segments and assign H/W roles");
    ConfigBinder diarize_cfg(diarize);
    diarize->add_option("--manifest", diarize_cmd.manifest, "manifest JSON-lines path");
    diarize->add_option("--embeddings-dir", diarize_cmd.embeddings_dir,
                        "per-session segment embedding CSVs (default: embeddings/ next to "
                        "the manifest)");
    diarize->add_option("--p", diarize_cmd.p, "affinity pruning fraction in (0, 1]")->required();
    diarize->add_option("--seed", diarize_cmd.seed, "master seed")->required();
    diarize->add_option("--collar-ms", diarize_cmd.collar_ms, "DER no-score collar");
    diarize->add_option("--out", diarize_cmd.out, "directory for hypothesis RTTM files");
    diarize_cfg.bind("manifest", diarize_cmd.manifest);
    diarize_cfg.bind("embeddings-dir", diarize_cmd.embeddings_dir);
    diarize_cfg.bind("p", diarize_cmd.p);
    diarize_cfg.bind("collar-ms", diarize_cmd.collar_ms);
    diarize_cfg.bind("out", diarize_cmd.out);

    TunePCmd tune_cmd;
    auto* tune = cli.add_subcommand("tune-p", "sweep the affinity pruning fraction on a dev set");
    ConfigBinder tune_cfg(tune);
    tune->add_option("--manifest", tune_cmd.manifest, "manifest JSON-lines path");
    tune->add_option("--embeddings-dir", tune_cmd.embeddings_dir,
                     "per-session segment embedding CSVs");
    tune->add_option("--seed", tune_cmd.seed, "master seed")->required();
    tune_cfg.bind("manifest", tune_cmd.manifest);
    tune_cfg.bind("embeddings-dir", tune_cmd.embeddings_dir);

    SynthCmd synth_cmd;
    auto* synth = cli.add_subcommand("synth", "generate a synthetic corpus with planted effects");
    ConfigBinder synth_cfg(synth);
    synth->add_option("--out", synth_cmd.out, "corpus output directory")->required();
    synth->add_option("--seed", synth_cmd.seed, "master seed")->required();
    synth->add_option("--couples", synth_cmd.couples, "number of couples");
    synth->add_option("--duration", synth_cmd.duration_s, "session duration in seconds");
    synth->add_option("--frame-period", synth_cmd.frame_period_s, "frame period in seconds");
    synth->add_option("--channels", synth_cmd.channels, "LLD channel count D (F0 included)");
    synth->add_option("--embedding-dim", synth_cmd.embedding_dim, "segment embedding dimension");
    synth->add_option("--noise", synth_cmd.noise, "within-class noise scale");
    synth->add_option("--priors", synth_cmd.priors, "class priors: none ideation attempt")
        ->expected(3);
    synth->add_option("--effects", synth_cmd.effects, "effect preset: strong | none");
    synth->add_option("--a-effect", synth_cmd.a_effect, "acoustic mean shift per class");
    synth->add_option("--e-effect", synth_cmd.e_effect, "sadness-score drop per class");
    synth->add_option("--l-effect", synth_cmd.l_effect, "negative-word rate growth per class");
    synth->add_option("--t-effect", synth_cmd.t_effect, "word-count variance growth per class");
    synth_cfg.bind("out", synth_cmd.out);
    synth_cfg.bind("couples", synth_cmd.couples);
    synth_cfg.bind("duration", synth_cmd.duration_s);
    synth_cfg.bind("frame-period", synth_cmd.frame_period_s);
    synth_cfg.bind("channels", synth_cmd.channels);
    synth_cfg.bind("embedding-dim", synth_cmd.embedding_dim);
    synth_cfg.bind("noise", synth_cmd.noise);
    synth_cfg.bind("priors", synth_cmd.priors);
    synth_cfg.bind("effects", synth_cmd.effects);
    synth_cfg.bind("a-effect", synth_cmd.a_effect);
    synth_cfg.bind("e-effect", synth_cmd.e_effect);
    synth_cfg.bind("l-effect", synth_cmd.l_effect);
    synth_cfg.bind("t-effect", synth_cmd.t_effect);

    ReportCmd report_cmd;
    auto* report = cli.add_subcommand("report", "render stored evaluation JSON as a table");
    ConfigBinder report_cfg(report);
    report->add_option("--in", report_cmd.inputs, "evaluation report JSON file(s)")
        ->required()
        ->expected(-1);
    report->add_option("--out", report_cmd.out, "write the table here too");
    report_cfg.bind("out", report_cmd.out);

    try {
        cli.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        const auto subs = cli.get_subcommands();
        std::cout << (subs.empty() ? cli.help() : subs.front()->help());
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << cli.help();
        return 2;
    }

    try {
        if (*validate) {
            validate_cfg.apply();
            if (validate_cmd.manifest.empty()) throw Error("validate: --manifest is required");
            return validate_cmd.run();
        }
        if (*extract) {
            extract_cfg.apply();
            if (extract_cmd.manifest.empty()) throw Error("extract: --manifest is required");
            if (extract_cmd.out.empty()) throw Error("extract: --out is required");
            return extract_cmd.run();
        }
        if (*train) {
            train_cfg.apply();
            if (train_cmd.manifest.empty()) throw Error("train-eval: --manifest is required");
            return train_cmd.run();
        }
        if (*analyze) {
            analyze_cfg.apply();
            if (analyze_cmd.manifest.empty()) throw Error("analyze: --manifest is required");
            return analyze_cmd.run();
        }
        if (*diarize) {
            diarize_cfg.apply();
            if (diarize_cmd.manifest.empty()) throw Error("diarize: --manifest is required");
            return diarize_cmd.run();
        }
        if (*tune) {
            tune_cfg.apply();
            if (tune_cmd.manifest.empty()) throw Error("tune-p: --manifest is required");
            return tune_cmd.run();
        }
        if (*synth) {
            synth_cfg.apply();
            return synth_cmd.run();
        }
        if (*report) {
            report_cfg.apply();
            return report_cmd.run();
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace dyadrisk

#include "dyadrisk/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <thread>

#include "dyadrisk/rng.hpp"
#include "dyadrisk/stats.hpp"

namespace dyadrisk {

// ---- metrics (declared in metrics.hpp) ---------------------------------------

std::vector<std::vector<std::size_t>> confusion_matrix(const LabelPairs& pairs, int k) {
    if (k <= 0) throw Error("confusion_matrix: class count must be positive");
    std::vector<std::vector<std::size_t>> m(k, std::vector<std::size_t>(k, 0));
    for (const auto& [t, p] : pairs) {
        if (t < 0 || t >= k || p < 0 || p >= k)
            throw Error("confusion_matrix: label outside [0, " + std::to_string(k) + ")");
        ++m[t][p];
    }
    return m;
}

namespace {

double recall_mean(const LabelPairs& pairs, bool strict) {
    if (pairs.empty()) throw Error("macro_recall: no pairs");
    int max_class = 0;
    for (const auto& [t, p] : pairs) {
        if (t < 0 || p < 0) throw Error("macro_recall: negative class label");
        max_class = std::max({max_class, t, p});
    }
    std::vector<std::size_t> trues(max_class + 1, 0), hits(max_class + 1, 0);
    for (const auto& [t, p] : pairs) {
        ++trues[t];
        if (t == p) ++hits[t];
    }
    int max_true = 0;
    for (int c = 0; c <= max_class; ++c)
        if (trues[c] > 0) max_true = c;

    double sum = 0.0;
    int classes = 0;
    for (int c = 0; c <= max_true; ++c) {
        if (trues[c] == 0) {
            if (strict)
                throw Error("macro_recall: class " + std::to_string(c) + " has zero true samples");
            continue;
        }
        sum += static_cast<double>(hits[c]) / static_cast<double>(trues[c]);
        ++classes;
    }
    return sum / static_cast<double>(classes);
}

}  // namespace

double macro_recall(const LabelPairs& pairs) { return recall_mean(pairs, true); }
double macro_recall_present(const LabelPairs& pairs) { return recall_mean(pairs, false); }

// ---- scenarios -----------------------------------------------------------------

const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::DegreeOfRisk: return "degree-of-risk";
        case Scenario::NoRiskVsRisk: return "no-risk-vs-risk";
        case Scenario::NonSevereVsSevere: return "non-severe-vs-severe";
    }
    return "?";
}

std::optional<Scenario> scenario_from_string(std::string_view s) {
    if (s == "degree-of-risk" || s == "degree") return Scenario::DegreeOfRisk;
    if (s == "no-risk-vs-risk" || s == "risk") return Scenario::NoRiskVsRisk;
    if (s == "non-severe-vs-severe" || s == "severe") return Scenario::NonSevereVsSevere;
    return std::nullopt;
}

int scenario_class_count(Scenario s) { return s == Scenario::DegreeOfRisk ? 3 : 2; }

int scenario_class(Scenario s, RiskLabel label) {
    switch (s) {
        case Scenario::DegreeOfRisk: return static_cast<int>(label);
        case Scenario::NoRiskVsRisk: return label == RiskLabel::None ? 0 : 1;
        case Scenario::NonSevereVsSevere: return label == RiskLabel::Attempt ? 1 : 0;
    }
    return 0;
}

// ---- partitions ----------------------------------------------------------------

const char* to_string(Partition p) {
    switch (p) {
        case Partition::None: return "none";
        case Partition::Gender: return "gender";
        case Partition::Content: return "content";
        case Partition::Demand: return "demand";
    }
    return "?";
}

std::optional<Partition> partition_from_string(std::string_view s) {
    if (s == "none") return Partition::None;
    if (s == "gender") return Partition::Gender;
    if (s == "content") return Partition::Content;
    if (s == "demand") return Partition::Demand;
    return std::nullopt;
}

int partition_model_count(Partition p) {
    switch (p) {
        case Partition::None: return 1;
        case Partition::Gender: return 2;
        case Partition::Content: return 2;
        case Partition::Demand: return 5;
    }
    return 0;
}

int select_model(Partition p, Role role, SessionType type) {
    switch (p) {
        case Partition::None:
            return 0;
        case Partition::Gender:
            return role == Role::Husband ? 0 : 1;
        case Partition::Content:
            return type == SessionType::RFL ? 0 : 1;
        case Partition::Demand:
            if (type == SessionType::RFL) return role == Role::Husband ? 0 : 1;
            if (role == Role::Wife) return type == SessionType::WConflict ? 2 : 3;
            return 4;  // Husband in either conflict session
    }
    return 0;
}

// ---- folds ---------------------------------------------------------------------

namespace {

std::vector<double> label_hist(const std::map<std::string, std::vector<int>>& labels,
                               const std::vector<std::string>& couples, int k) {
    std::vector<double> h(k, 0.0);
    double total = 0.0;
    for (const auto& c : couples)
        for (int v : labels.at(c)) {
            ++h[v];
            ++total;
        }
    if (total > 0.0)
        for (double& v : h) v /= total;
    return h;
}

double l1(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
    return s;
}

}  // namespace

FoldPlan plan_folds(const std::map<std::string, std::vector<int>>& couple_labels,
                    std::uint64_t seed) {
    std::vector<std::string> couples;
    for (const auto& [c, l] : couple_labels) couples.push_back(c);
    if (couples.size() < 3) throw Error("plan_folds: need at least 3 couples");

    int k = 0;
    for (const auto& [c, ls] : couple_labels)
        for (int v : ls) {
            if (v < 0) throw Error("plan_folds: negative class label");
            k = std::max(k, v + 1);
        }
    if (k == 0) throw Error("plan_folds: no labels");

    FoldPlan plan;
    for (const auto& test : couples) {
        std::vector<std::string> rest;
        for (const auto& c : couples)
            if (c != test) rest.push_back(c);
        const std::size_t val_size =
            static_cast<std::size_t>(std::ceil(0.2 * static_cast<double>(rest.size())));

        // seeded shuffle settles ties in the greedy scan below
        std::vector<std::string> order = rest;
        Rng rng(derive_seed(seed, "fold|" + test));
        for (std::size_t i = order.size(); i-- > 1;)
            std::swap(order[i], order[rng.below(i + 1)]);

        std::set<std::string> val;
        for (std::size_t pick = 0; pick < val_size; ++pick) {
            double best = std::numeric_limits<double>::infinity();
            const std::string* chosen = nullptr;
            for (const auto& cand : order) {
                if (val.count(cand)) continue;
                std::vector<std::string> val_try(val.begin(), val.end());
                val_try.push_back(cand);
                std::vector<std::string> train_try;
                for (const auto& c : rest)
                    if (!val.count(c) && c != cand) train_try.push_back(c);
                double d = l1(label_hist(couple_labels, train_try, k),
                              label_hist(couple_labels, val_try, k));
                if (d < best) {
                    best = d;
                    chosen = &cand;
                }
            }
            val.insert(*chosen);
        }

        Fold fold;
        fold.test_couple = test;
        for (const auto& c : rest)
            (val.count(c) ? fold.val_couples : fold.train_couples).push_back(c);
        plan.folds.push_back(std::move(fold));
    }
    return plan;
}

// ---- significance tests -----------------------------------------------------------

TestResult mcnemar(std::int64_t b, std::int64_t c) {
    if (b < 0 || c < 0) throw Error("mcnemar: negative counts");
    TestResult r;
    r.name = "mcnemar";
    r.df = 1.0;
    const std::int64_t n = b + c;
    if (n == 0) {
        r.method = "degenerate";
        r.degenerate = true;
        r.note = "no discordant pairs";
        r.statistic = 0.0;
        r.p = 1.0;
        return r;
    }
    if (n < 25) {
        r.method = "exact-binomial";
        r.statistic = static_cast<double>(std::min(b, c));
        r.p = binom_half_two_sided(n, std::min(b, c));
        return r;
    }
    r.method = "chi-squared-cc";
    double num = std::fabs(static_cast<double>(b - c)) - 1.0;
    r.statistic = num * num / static_cast<double>(n);
    r.p = chi2_sf(r.statistic, 1.0);
    return r;
}

namespace {

// d' S^-1 d over the given category subset (all but one category).
double sm_statistic(const std::vector<std::vector<std::int64_t>>& t,
                    const std::vector<std::size_t>& cats) {
    const std::size_t m = cats.size();
    std::vector<double> row(t.size(), 0.0), col(t.size(), 0.0);
    for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t j = 0; j < t.size(); ++j) {
            row[i] += static_cast<double>(t[i][j]);
            col[j] += static_cast<double>(t[i][j]);
        }
    std::vector<double> d(m);
    Matrix s(m, m);
    for (std::size_t a = 0; a < m; ++a) {
        std::size_t i = cats[a];
        d[a] = row[i] - col[i];
        s(a, a) = row[i] + col[i] - 2.0 * static_cast<double>(t[i][i]);
        for (std::size_t b2 = a + 1; b2 < m; ++b2) {
            std::size_t j = cats[b2];
            double off = -static_cast<double>(t[i][j] + t[j][i]);
            s(a, b2) = off;
            s(b2, a) = off;
        }
    }
    std::vector<double> x = solve_linear(s, d);  // throws on singular
    double stat = 0.0;
    for (std::size_t a = 0; a < m; ++a) stat += d[a] * x[a];
    return stat;
}

}  // namespace

TestResult stuart_maxwell(const std::vector<std::vector<std::int64_t>>& table) {
    const std::size_t k = table.size();
    if (k < 2) throw Error("stuart_maxwell: need at least 2 categories");
    for (const auto& row : table) {
        if (row.size() != k) throw Error("stuart_maxwell: table not square");
        for (std::int64_t v : row)
            if (v < 0) throw Error("stuart_maxwell: negative count");
    }

    TestResult r;
    r.name = "stuart-maxwell";
    r.df = static_cast<double>(k - 1);

    bool off_diag = false;
    for (std::size_t i = 0; i < k && !off_diag; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (i != j && table[i][j] > 0) {
                off_diag = true;
                break;
            }
    if (!off_diag) {
        r.method = "degenerate";
        r.degenerate = true;
        r.note = "diagonal-only table";
        r.statistic = 0.0;
        r.p = 1.0;
        return r;
    }

    std::vector<std::size_t> all(k - 1);
    std::iota(all.begin(), all.end(), std::size_t{0});
    try {
        r.statistic = sm_statistic(table, all);
        r.method = "chi-squared";
    } catch (const Error&) {
        // drop categories with no off-diagonal activity, then retry
        std::vector<std::size_t> active;
        for (std::size_t i = 0; i < k; ++i) {
            std::int64_t activity = 0;
            for (std::size_t j = 0; j < k; ++j)
                if (i != j) activity += table[i][j] + table[j][i];
            if (activity > 0) active.push_back(i);
        }
        if (active.size() < 2) throw Error("stuart_maxwell: degenerate table");
        active.pop_back();
        try {
            r.statistic = sm_statistic(table, active);
        } catch (const Error&) {
            throw Error("stuart_maxwell: degenerate table");
        }
        r.method = "chi-squared-reduced";
        r.note = "inactive categories dropped";
    }
    r.p = chi2_sf(r.statistic, r.df);
    return r;
}

std::vector<int> chance_baseline(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2) throw Error("chance_baseline: need at least 2 classes");
    Rng rng(seed);
    std::vector<int> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
    return out;
}

// ---- experiment ---------------------------------------------------------------------

namespace {

struct Sample {
    std::size_t row;  // feature table row
    std::string session_id;
    Role role;
    std::string couple_id;
    SessionType type;
    int label;
    int model;
};

std::string families_of(const std::vector<std::string>& names) {
    std::string fam;
    for (char f : std::string("AELT"))
        for (const auto& n : names)
            if (!n.empty() && n[0] == f && (n.size() < 2 || n[1] == '.')) {
                fam.push_back(f);
                break;
            }
    return fam;
}

std::vector<double> balanced_weights(const std::vector<int>& y) {
    std::map<int, std::size_t> counts;
    for (int v : y) ++counts[v];
    const double n = static_cast<double>(y.size());
    const double k = static_cast<double>(counts.size());
    std::vector<double> w(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        w[i] = n / (k * static_cast<double>(counts.at(y[i])));
    return w;
}

}  // namespace

EvalReport run_experiment(const Corpus& corpus, const FeatureTable& features,
                          const ExperimentOptions& opts) {
    const int k = scenario_class_count(opts.scenario);

    std::vector<Sample> samples;
    std::map<std::string, std::vector<int>> couple_labels;
    for (std::size_t r = 0; r < features.keys.size(); ++r) {
        const auto& key = features.keys[r];
        const SessionRecord* rec = corpus.find(key.session_id);
        if (!rec) throw Error("run_experiment: session " + key.session_id + " not in corpus");
        Sample s;
        s.row = r;
        s.session_id = key.session_id;
        s.role = key.role;
        s.couple_id = rec->couple_id;
        s.type = rec->type;
        s.label = scenario_class(opts.scenario, rec->speaker(key.role).risk);
        s.model = select_model(opts.partition, key.role, rec->type);
        couple_labels[s.couple_id].push_back(s.label);
        samples.push_back(std::move(s));
    }
    if (samples.empty()) throw Error("run_experiment: no speaker-sessions");

    FoldPlan plan = plan_folds(couple_labels, derive_seed(opts.seed, "folds"));

    std::vector<std::vector<PredictionRecord>> per_fold(plan.folds.size());
    std::vector<std::vector<std::string>> per_fold_events(plan.folds.size());
    std::vector<std::exception_ptr> errors(plan.folds.size());

    auto run_fold = [&](std::size_t fi) {
        try {
            const Fold& fold = plan.folds[fi];
            std::set<std::string> train_set(fold.train_couples.begin(), fold.train_couples.end());
            std::set<std::string> val_set(fold.val_couples.begin(), fold.val_couples.end());
            if (train_set.count(fold.test_couple) || val_set.count(fold.test_couple))
                throw Error("run_experiment: leakage — test couple in train/val");

            for (int m = 0; m < partition_model_count(opts.partition); ++m) {
                std::vector<const Sample*> train, val, test;
                for (const auto& s : samples) {
                    if (s.model != m) continue;
                    if (s.couple_id == fold.test_couple) test.push_back(&s);
                    else if (train_set.count(s.couple_id)) train.push_back(&s);
                    else if (val_set.count(s.couple_id)) val.push_back(&s);
                }
                if (test.empty()) continue;

                auto record = [&](const Sample& s, int pred, bool fb) {
                    PredictionRecord pr;
                    pr.fold = fi;
                    pr.session_id = s.session_id;
                    pr.role = s.role;
                    pr.couple_id = s.couple_id;
                    pr.true_class = s.label;
                    pr.predicted = pred;
                    pr.model_index = m;
                    pr.fallback = fb;
                    per_fold[fi].push_back(std::move(pr));
                };

                std::set<int> train_classes;
                for (const auto* s : train) train_classes.insert(s->label);

                if (train.empty() || train_classes.size() < 2) {
                    // majority-class fallback (lowest label on count ties)
                    std::map<int, std::size_t> counts;
                    for (const auto* s : train) ++counts[s->label];
                    int majority = 0;
                    std::size_t best = 0;
                    for (const auto& [cls, cnt] : counts)
                        if (cnt > best) {
                            best = cnt;
                            majority = cls;
                        }
                    per_fold_events[fi].push_back(
                        "fold " + fold.test_couple + " model " + std::to_string(m) +
                        (train.empty() ? ": no training data" : ": single-class training data") +
                        ", predicting class " + std::to_string(majority));
                    for (const auto* s : test) record(*s, majority, true);
                    continue;
                }

                auto gather = [&](const std::vector<const Sample*>& set, Matrix& x,
                                  std::vector<int>& y) {
                    x = Matrix(set.size(), features.values.cols());
                    y.resize(set.size());
                    for (std::size_t i = 0; i < set.size(); ++i) {
                        for (std::size_t j = 0; j < features.values.cols(); ++j)
                            x(i, j) = features.values(set[i]->row, j);
                        y[i] = set[i]->label;
                    }
                };

                Matrix xtr, xv;
                std::vector<int> ytr, yv;
                gather(train, xtr, ytr);
                if (val.empty()) {
                    per_fold_events[fi].push_back("fold " + fold.test_couple + " model " +
                                                  std::to_string(m) +
                                                  ": empty validation set, scoring on train");
                    xv = xtr;
                    yv = ytr;
                } else {
                    gather(val, xv, yv);
                }

                GridSearchResult gs = grid_search(xtr, ytr, balanced_weights(ytr), xv, yv,
                                                  opts.grid, opts.tol);
                for (const auto* s : test)
                    record(*s, predict_pipeline(gs.pipeline, features.values.row(s->row)), false);
            }
            std::sort(per_fold[fi].begin(), per_fold[fi].end(),
                      [](const PredictionRecord& a, const PredictionRecord& b) {
                          if (a.session_id != b.session_id) return a.session_id < b.session_id;
                          return static_cast<int>(a.role) < static_cast<int>(b.role);
                      });
        } catch (...) {
            errors[fi] = std::current_exception();
        }
    };

    const int threads = std::max(1, opts.threads);
    if (threads == 1) {
        for (std::size_t fi = 0; fi < plan.folds.size(); ++fi) run_fold(fi);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t fi = static_cast<std::size_t>(t); fi < plan.folds.size();
                     fi += static_cast<std::size_t>(threads))
                    run_fold(fi);
            });
        for (auto& th : pool) th.join();
    }
    for (std::size_t fi = 0; fi < plan.folds.size(); ++fi)
        if (errors[fi]) std::rethrow_exception(errors[fi]);

    EvalReport report;
    report.scenario = to_string(opts.scenario);
    report.partition = to_string(opts.partition);
    report.families = families_of(features.names);
    report.seed = opts.seed;
    report.folds = plan.folds.size();
    report.grid_size = opts.grid.size();
    report.registry_hash = features.hash();
    for (std::size_t fi = 0; fi < plan.folds.size(); ++fi) {
        for (auto& pr : per_fold[fi]) report.predictions.push_back(std::move(pr));
        for (auto& ev : per_fold_events[fi]) report.fallback_events.push_back(std::move(ev));
    }

    LabelPairs pairs;
    for (const auto& pr : report.predictions) pairs.emplace_back(pr.true_class, pr.predicted);
    report.confusion = confusion_matrix(pairs, k);
    report.macro_recall = macro_recall(pairs);

    std::vector<int> chance =
        chance_baseline(pairs.size(), k, derive_seed(opts.seed, "chance"));
    LabelPairs chance_pairs;
    for (std::size_t i = 0; i < pairs.size(); ++i)
        chance_pairs.emplace_back(pairs[i].first, chance[i]);
    report.chance_macro_recall = macro_recall(chance_pairs);

    if (k == 2) {
        std::int64_t b = 0, c = 0;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            bool sys = pairs[i].second == pairs[i].first;
            bool base = chance[i] == pairs[i].first;
            if (sys && !base) ++b;
            if (!sys && base) ++c;
        }
        report.significance = mcnemar(b, c);
    } else {
        // Pair on correctness, not raw labels: a trained model's prediction
        // marginals drift with the fold composition, which marginal homogeneity
        // on the KxK label table would flag even when accuracy is at chance.
        std::vector<std::vector<std::int64_t>> table(2, std::vector<std::int64_t>(2, 0));
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            int sys = pairs[i].second == pairs[i].first ? 1 : 0;
            int base = chance[i] == pairs[i].first ? 1 : 0;
            ++table[sys][base];
        }
        report.significance = stuart_maxwell(table);
    }

    // per-speaker secondary view: majority prediction over a speaker's sessions
    std::map<std::pair<std::string, Role>, std::pair<int, std::vector<int>>> speakers;
    for (const auto& pr : report.predictions) {
        auto& entry = speakers[{pr.couple_id, pr.role}];
        entry.first = pr.true_class;
        entry.second.push_back(pr.predicted);
    }
    LabelPairs speaker_pairs;
    for (const auto& [key, entry] : speakers) {
        std::map<int, std::size_t> counts;
        for (int p : entry.second) ++counts[p];
        int majority = 0;
        std::size_t best = 0;
        for (const auto& [cls, cnt] : counts)
            if (cnt > best) {
                best = cnt;
                majority = cls;
            }
        speaker_pairs.emplace_back(entry.first, majority);
    }
    report.n_speakers = speaker_pairs.size();
    report.speaker_macro_recall = macro_recall_present(speaker_pairs);
    return report;
}

}  // namespace dyadrisk

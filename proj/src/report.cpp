#include "dyadrisk/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "json.hpp"

#include "dyadrisk/error.hpp"
#include "dyadrisk/numfmt.hpp"

namespace dyadrisk {
namespace {

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

std::string quoted(const std::string& s) { return '"' + json_escape(s) + '"'; }

std::string significance_json(const TestResult& t, const std::string& indent) {
    std::string out = "{\n";
    out += indent + "  \"name\": " + quoted(t.name) + ",\n";
    out += indent + "  \"method\": " + quoted(t.method) + ",\n";
    out += indent + "  \"statistic\": " + format_g17(t.statistic) + ",\n";
    out += indent + "  \"df\": " + format_g17(t.df) + ",\n";
    out += indent + "  \"p\": " + format_g17(t.p) + ",\n";
    out += indent + "  \"degenerate\": " + (t.degenerate ? std::string("true") : "false") + ",\n";
    out += indent + "  \"note\": " + quoted(t.note) + "\n";
    out += indent + "}";
    return out;
}

int partition_order(const std::string& p) {
    if (p == "none") return 0;
    if (p == "gender") return 1;
    if (p == "content") return 2;
    if (p == "demand") return 3;
    return 4;
}

int scenario_order(const std::string& s) {
    if (s == "degree-of-risk") return 0;
    if (s == "no-risk-vs-risk") return 1;
    if (s == "non-severe-vs-severe") return 2;
    return 3;
}

}  // namespace

std::string eval_report_json(const EvalReport& r) {
    std::string out = "{\n";
    out += "  \"version\": 1,\n";
    out += "  \"scenario\": " + quoted(r.scenario) + ",\n";
    out += "  \"partition\": " + quoted(r.partition) + ",\n";
    out += "  \"families\": " + quoted(r.families) + ",\n";
    out += "  \"seed\": " + std::to_string(r.seed) + ",\n";
    out += "  \"folds\": " + std::to_string(r.folds) + ",\n";
    out += "  \"grid_size\": " + std::to_string(r.grid_size) + ",\n";
    out += "  \"registry_hash\": \"" + std::to_string(r.registry_hash) + "\",\n";
    out += "  \"n_samples\": " + std::to_string(r.predictions.size()) + ",\n";
    out += "  \"macro_recall\": " + format_g17(r.macro_recall) + ",\n";
    out += "  \"chance_macro_recall\": " + format_g17(r.chance_macro_recall) + ",\n";
    out += "  \"significance\": " + significance_json(r.significance, "  ") + ",\n";

    out += "  \"confusion\": [";
    for (std::size_t i = 0; i < r.confusion.size(); ++i) {
        if (i) out += ", ";
        out += '[';
        for (std::size_t j = 0; j < r.confusion[i].size(); ++j) {
            if (j) out += ", ";
            out += std::to_string(r.confusion[i][j]);
        }
        out += ']';
    }
    out += "],\n";

    out += "  \"speaker_view\": {\"n_speakers\": " + std::to_string(r.n_speakers) +
           ", \"macro_recall\": " + format_g17(r.speaker_macro_recall) + "},\n";

    out += "  \"fallback_events\": [";
    for (std::size_t i = 0; i < r.fallback_events.size(); ++i) {
        if (i) out += ", ";
        out += quoted(r.fallback_events[i]);
    }
    out += "],\n";

    out += "  \"predictions\": [";
    for (std::size_t i = 0; i < r.predictions.size(); ++i) {
        const auto& p = r.predictions[i];
        out += i ? ",\n    " : "\n    ";
        out += "{\"fold\": " + std::to_string(p.fold);
        out += ", \"session_id\": " + quoted(p.session_id);
        out += std::string(", \"role\": ") + quoted(to_string(p.role));
        out += ", \"couple_id\": " + quoted(p.couple_id);
        out += ", \"true_class\": " + std::to_string(p.true_class);
        out += ", \"predicted\": " + std::to_string(p.predicted);
        out += ", \"model_index\": " + std::to_string(p.model_index);
        out += std::string(", \"fallback\": ") + (p.fallback ? "true" : "false");
        out += '}';
    }
    out += r.predictions.empty() ? "]\n" : "\n  ]\n";
    out += "}\n";
    return out;
}

std::string eval_report_text(const EvalReport& r) {
    std::ostringstream out;
    out << "Evaluation report\n";
    auto kv = [&](const char* key, const std::string& value) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "  %-16s %s\n", key, value.c_str());
        out << buf;
    };
    kv("scenario", r.scenario);
    kv("partition", r.partition);
    kv("families", r.families);
    kv("seed", std::to_string(r.seed));
    kv("folds", std::to_string(r.folds));
    kv("grid size", std::to_string(r.grid_size));
    kv("samples", std::to_string(r.predictions.size()));
    kv("macro recall", format_fixed(r.macro_recall, 4) + "  (chance " +
                           format_fixed(r.chance_macro_recall, 4) + ")");
    kv("speaker view", std::to_string(r.n_speakers) + " speakers, macro recall " +
                           format_fixed(r.speaker_macro_recall, 4));
    kv("significance",
       r.significance.name + " [" + r.significance.method + "] statistic=" +
           format_fixed(r.significance.statistic, 4) + " df=" +
           format_fixed(r.significance.df, 0) + " p=" + format_fixed(r.significance.p, 6) +
           (r.significance.note.empty() ? "" : " (" + r.significance.note + ")"));
    if (r.fallback_events.empty()) {
        kv("fallbacks", "none");
    } else {
        kv("fallbacks", std::to_string(r.fallback_events.size()));
        for (const auto& e : r.fallback_events) out << "    - " << e << '\n';
    }

    out << "\nConfusion (rows = true, cols = predicted)\n";
    const std::size_t k = r.confusion.size();
    char buf[64];
    out << "        ";
    for (std::size_t j = 0; j < k; ++j) {
        std::snprintf(buf, sizeof buf, " pred%-3zu", j);
        out << buf;
    }
    out << '\n';
    for (std::size_t i = 0; i < k; ++i) {
        std::snprintf(buf, sizeof buf, "  true%-2zu", i);
        out << buf;
        for (std::size_t j = 0; j < k; ++j) {
            std::snprintf(buf, sizeof buf, " %7zu", r.confusion[i][j]);
            out << buf;
        }
        out << '\n';
    }
    return out.str();
}

std::string predictions_csv(const EvalReport& r) {
    std::string out = "fold,session_id,role,couple_id,true_class,predicted,model_index,fallback\n";
    for (const auto& p : r.predictions) {
        out += std::to_string(p.fold);
        out += ',';
        out += p.session_id;
        out += ',';
        out += to_string(p.role);
        out += ',';
        out += p.couple_id;
        out += ',';
        out += std::to_string(p.true_class);
        out += ',';
        out += std::to_string(p.predicted);
        out += ',';
        out += std::to_string(p.model_index);
        out += ',';
        out += p.fallback ? '1' : '0';
        out += '\n';
    }
    return out;
}

EvalSummary parse_eval_summary(const std::string& json_text) {
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(json_text);
    } catch (const std::exception& e) {
        throw Error(std::string("report: malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) throw Error("report: expected a JSON object");
    EvalSummary s;
    try {
        s.scenario = obj.at("scenario").get<std::string>();
        s.partition = obj.at("partition").get<std::string>();
        s.families = obj.at("families").get<std::string>();
        s.folds = obj.at("folds").get<std::size_t>();
        s.samples = obj.at("n_samples").get<std::size_t>();
        s.macro_recall = obj.at("macro_recall").get<double>();
        s.chance_macro_recall = obj.at("chance_macro_recall").get<double>();
        s.p = obj.at("significance").at("p").get<double>();
        s.test_name = obj.at("significance").at("name").get<std::string>();
    } catch (const std::exception& e) {
        throw Error(std::string("report: missing or mistyped field: ") + e.what());
    }
    return s;
}

std::string summary_table(std::vector<EvalSummary> runs) {
    std::sort(runs.begin(), runs.end(), [](const EvalSummary& a, const EvalSummary& b) {
        const int pa = partition_order(a.partition), pb = partition_order(b.partition);
        if (pa != pb) return pa < pb;
        if (a.partition != b.partition) return a.partition < b.partition;
        if (a.families != b.families) return a.families < b.families;
        return scenario_order(a.scenario) < scenario_order(b.scenario);
    });

    // column set: scenarios present, in canonical order
    std::vector<std::string> scenarios;
    for (const auto& r : runs)
        if (std::find(scenarios.begin(), scenarios.end(), r.scenario) == scenarios.end())
            scenarios.push_back(r.scenario);
    std::sort(scenarios.begin(), scenarios.end(), [](const std::string& a, const std::string& b) {
        const int oa = scenario_order(a), ob = scenario_order(b);
        if (oa != ob) return oa < ob;
        return a < b;
    });

    struct RowKey {
        std::string partition, families;
        bool operator<(const RowKey& o) const {
            const int pa = partition_order(partition), pb = partition_order(o.partition);
            if (pa != pb) return pa < pb;
            if (partition != o.partition) return partition < o.partition;
            return families < o.families;
        }
    };
    std::map<RowKey, std::map<std::string, double>> grid;
    for (const auto& r : runs) grid[{r.partition, r.families}][r.scenario] = r.macro_recall;

    std::ostringstream out;
    out << "Macro recall (%) by scenario and partition\n";
    std::size_t pw = std::string("Partition").size(), fw = std::string("Families").size();
    for (const auto& [key, _] : grid) {
        pw = std::max(pw, key.partition.size());
        fw = std::max(fw, key.families.size());
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "  %-*s  %-*s", static_cast<int>(pw), "Partition",
                  static_cast<int>(fw), "Families");
    out << buf;
    for (const auto& s : scenarios) {
        std::snprintf(buf, sizeof buf, "  %*s", static_cast<int>(std::max<std::size_t>(s.size(), 6)),
                      s.c_str());
        out << buf;
    }
    out << '\n';
    for (const auto& [key, cells] : grid) {
        std::snprintf(buf, sizeof buf, "  %-*s  %-*s", static_cast<int>(pw), key.partition.c_str(),
                      static_cast<int>(fw), key.families.c_str());
        out << buf;
        for (const auto& s : scenarios) {
            const int width = static_cast<int>(std::max<std::size_t>(s.size(), 6));
            auto it = cells.find(s);
            if (it == cells.end())
                std::snprintf(buf, sizeof buf, "  %*s", width, "-");
            else
                std::snprintf(buf, sizeof buf, "  %*.2f", width, 100.0 * it->second);
            out << buf;
        }
        out << '\n';
    }

    out << "\nRuns\n";
    for (const auto& r : runs) {
        out << "  scenario=" << r.scenario << " partition=" << r.partition << " families="
            << r.families << " folds=" << r.folds << " samples=" << r.samples << " recall="
            << format_fixed(r.macro_recall, 4) << " chance=" << format_fixed(r.chance_macro_recall, 4)
            << " p=" << format_fixed(r.p, 6) << " (" << r.test_name << ")\n";
    }
    return out.str();
}

}  // namespace dyadrisk

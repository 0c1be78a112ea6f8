#include "dyadrisk/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <sstream>
#include <thread>

#include "dyadrisk/error.hpp"
#include "dyadrisk/numfmt.hpp"
#include "dyadrisk/stats.hpp"

namespace dyadrisk {
namespace {

bool is_constant(std::span<const double> v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] != v[0]) return false;
    return true;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    return sab / std::sqrt(saa * sbb);
}

std::string family_of(const std::string& name) {
    const auto dot = name.find('.');
    return dot == std::string::npos ? name : name.substr(0, dot);
}

}  // namespace

std::vector<double> midranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
        i = j + 1;
    }
    return ranks;
}

SpearmanResult spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw Error("spearman: size mismatch (" + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()) + ")");
    const std::size_t n = x.size();
    if (n < 3)
        throw Error("spearman: need at least 3 observations, got " + std::to_string(n));
    if (is_constant(x) || is_constant(y))
        throw Error("spearman: undefined correlation (constant input)");

    const auto rx = midranks(x);
    const auto ry = midranks(y);
    SpearmanResult out;
    out.rho = std::clamp(pearson(rx, ry), -1.0, 1.0);
    const double denom = 1.0 - out.rho * out.rho;
    if (denom <= 0.0) {
        out.p = 0.0;  // |rho| = 1: t diverges, two-sided p collapses to 0
    } else {
        const double t = out.rho * std::sqrt(static_cast<double>(n - 2) / denom);
        out.p = student_t_two_sided_p(t, static_cast<double>(n - 2));
    }
    return out;
}

CorrelationReport top_correlations(const FeatureTable& features,
                                   const std::vector<int>& labels, std::size_t k,
                                   int threads) {
    const std::size_t n = features.keys.size();
    if (labels.size() != n)
        throw Error("top_correlations: " + std::to_string(labels.size()) + " labels for " +
                    std::to_string(n) + " feature rows");
    if (n < 3)
        throw Error("top_correlations: need at least 3 speaker-sessions, got " +
                    std::to_string(n));

    const std::vector<double> y(labels.begin(), labels.end());
    const bool y_constant = is_constant(y);
    const std::size_t d = features.names.size();

    std::vector<CorrelationRow> rows(d);
    std::vector<char> keep(d, 0);
    std::vector<std::exception_ptr> failures(d);

    auto worker = [&](std::size_t first, std::size_t stride) {
        std::vector<double> column(n);
        for (std::size_t j = first; j < d; j += stride) {
            try {
                for (std::size_t i = 0; i < n; ++i) column[i] = features.values(i, j);
                if (y_constant || is_constant(column)) continue;
                const auto res = spearman(column, y);
                auto& row = rows[j];
                row.feature = features.names[j];
                row.family = family_of(row.feature);
                row.rho = res.rho;
                row.p = res.p;
                row.n = n;
                row.significant = res.p < 0.05;
                keep[j] = 1;
            } catch (...) {
                failures[j] = std::current_exception();
            }
        }
    };

    const std::size_t workers =
        std::min<std::size_t>(std::max(threads, 1), std::max<std::size_t>(d, 1));
    if (workers <= 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back(worker, w, workers);
        for (auto& t : pool) t.join();
    }
    for (std::size_t j = 0; j < d; ++j)
        if (failures[j]) std::rethrow_exception(failures[j]);

    std::vector<CorrelationRow> kept;
    kept.reserve(d);
    for (std::size_t j = 0; j < d; ++j)
        if (keep[j]) kept.push_back(std::move(rows[j]));
    std::sort(kept.begin(), kept.end(), [](const CorrelationRow& a, const CorrelationRow& b) {
        const double aa = std::fabs(a.rho), ab = std::fabs(b.rho);
        if (aa != ab) return aa > ab;
        return a.feature < b.feature;
    });

    CorrelationReport report;
    report.n = n;
    report.skipped_constant = d - kept.size();
    report.top.assign(kept.begin(), kept.begin() + std::min(k, kept.size()));
    for (const auto& row : kept) {
        const bool seen = std::any_of(report.family_best.begin(), report.family_best.end(),
                                      [&](const CorrelationRow& r) { return r.family == row.family; });
        if (!seen) report.family_best.push_back(row);
    }
    std::sort(report.family_best.begin(), report.family_best.end(),
              [](const CorrelationRow& a, const CorrelationRow& b) { return a.family < b.family; });
    return report;
}

std::string correlation_csv(const CorrelationReport& report) {
    std::string out = "section,correlation,p_value,significant,feature,family,n\n";
    auto emit = [&](const char* section, const CorrelationRow& row) {
        out += section;
        out += ',';
        out += format_g17(row.rho);
        out += ',';
        out += format_g17(row.p);
        out += ',';
        out += row.significant ? '1' : '0';
        out += ',';
        out += row.feature;
        out += ',';
        out += row.family;
        out += ',';
        out += std::to_string(row.n);
        out += '\n';
    };
    for (const auto& row : report.top) emit("top", row);
    for (const auto& row : report.family_best) emit("family_best", row);
    return out;
}

std::string correlation_text(const CorrelationReport& report) {
    std::size_t name_width = std::string("Feature").size();
    auto widen = [&](const std::vector<CorrelationRow>& rows) {
        for (const auto& r : rows) name_width = std::max(name_width, r.feature.size());
    };
    widen(report.top);
    widen(report.family_best);

    std::ostringstream out;
    out << "Feature correlations with risk degree (n = " << report.n
        << " speaker-sessions; * marks p < 0.05)\n";
    auto table = [&](const std::string& title, const std::vector<CorrelationRow>& rows) {
        out << '\n' << title << '\n';
        if (rows.empty()) {
            out << "  (none)\n";
            return;
        }
        char buf[160];
        std::snprintf(buf, sizeof buf, "  %-13s %-*s %s\n", "Correlation",
                      static_cast<int>(name_width), "Feature", "Family");
        out << buf;
        for (const auto& r : rows) {
            char num[32];
            std::snprintf(num, sizeof num, "%+.3f%s", r.rho, r.significant ? " *" : "");
            std::snprintf(buf, sizeof buf, "  %-13s %-*s %s\n", num,
                          static_cast<int>(name_width), r.feature.c_str(), r.family.c_str());
            out << buf;
        }
    };
    table("Top " + std::to_string(report.top.size()) + " by |correlation|", report.top);
    table("Best per family", report.family_best);
    return out.str();
}

}  // namespace dyadrisk

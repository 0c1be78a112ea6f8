#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "dyadrisk/analysis.hpp"
#include "dyadrisk/error.hpp"
#include "dyadrisk/rng.hpp"
#include "dyadrisk/stats.hpp"

using namespace dyadrisk;

namespace {

// Pearson correlation, the independent oracle for rank vectors.
double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    double ma = 0.0, mb = 0.0;
    const double n = static_cast<double>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i] / n;
        mb += b[i] / n;
    }
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

FeatureTable table_of(const std::vector<std::string>& names,
                      const std::vector<std::vector<double>>& rows) {
    FeatureTable t;
    t.names = names;
    t.values = Matrix(rows.size(), names.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        t.keys.push_back({"s" + std::to_string(r / 2), r % 2 == 0 ? Role::Husband : Role::Wife});
        for (std::size_t c = 0; c < names.size(); ++c) t.values(r, c) = rows[r][c];
    }
    return t;
}

}  // namespace

TEST_CASE("midranks average over tie runs") {
    auto r = midranks(std::vector<double>{10.0, 20.0, 30.0});
    CHECK(r == std::vector<double>{1.0, 2.0, 3.0});

    auto tied = midranks(std::vector<double>{5.0, 1.0, 5.0, 5.0, 9.0});
    // sorted: 1(r1), 5,5,5 (ranks 2,3,4 -> 3 each), 9(r5)
    CHECK(tied == std::vector<double>{3.0, 1.0, 3.0, 3.0, 5.0});

    auto all_same = midranks(std::vector<double>{2.0, 2.0});
    CHECK(all_same == std::vector<double>{1.5, 1.5});
}

TEST_CASE("spearman: monotone data gives rho = +/-1 with p = 0") {
    std::vector<double> x = {1.0, 2.0, 5.0, 9.0, 11.0};
    std::vector<double> inc = {2.0, 7.0, 9.0, 20.0, 50.0};
    auto up = spearman(x, inc);
    CHECK(up.rho == doctest::Approx(1.0));
    CHECK(up.p == doctest::Approx(0.0));

    std::vector<double> dec = {9.0, 5.0, 4.0, 2.0, 1.0};
    auto down = spearman(x, dec);
    CHECK(down.rho == doctest::Approx(-1.0));
    CHECK(down.p == doctest::Approx(0.0));
}

TEST_CASE("spearman is exactly invariant to monotone transforms") {
    std::vector<double> x = {0.3, 1.2, -4.0, 2.2, 0.9, 5.5, -1.0};
    std::vector<double> y = {2.0, 1.0, 7.0, 3.5, 3.5, -2.0, 0.0};
    auto base = spearman(x, y);

    std::vector<double> warped(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) warped[i] = std::exp(0.5 * x[i]) + 100.0;
    auto after = spearman(warped, y);
    CHECK(after.rho == base.rho);  // ranks are unchanged, so exact equality
    CHECK(after.p == base.p);
}

TEST_CASE("spearman handles ties through midranks (oracle recomputation)") {
    std::vector<double> x = {1.0, 2.0, 2.0, 4.0, 5.0, 5.0, 5.0};
    std::vector<double> y = {3.0, 1.0, 4.0, 4.0, 2.0, 6.0, 5.0};
    auto r = spearman(x, y);

    auto rx = midranks(x);
    auto ry = midranks(y);
    CHECK(r.rho == doctest::Approx(pearson(rx, ry)).epsilon(1e-12));

    // symmetry and sign behavior
    auto sym = spearman(y, x);
    CHECK(sym.rho == doctest::Approx(r.rho));
    std::vector<double> neg(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) neg[i] = -y[i];
    auto flipped = spearman(x, neg);
    CHECK(flipped.rho == doctest::Approx(-r.rho));
    CHECK(flipped.p == doctest::Approx(r.p));
}

TEST_CASE("spearman p-values match the t distribution") {
    // rho = 0.5, n = 12: t = 0.5*sqrt(10/0.75), p from t with 10 df
    // build data achieving a known rank correlation is fiddly; instead verify
    // the p of an actual sample against a direct recomputation
    std::vector<double> x = {3.0, 1.0, 4.0, 1.5, 5.0, 9.0, 2.0, 6.0, 5.5, 3.5, 7.0, 8.0};
    std::vector<double> y = {2.0, 7.0, 1.0, 8.0, 2.5, 6.0, 9.0, 4.0, 3.0, 5.0, 0.0, 1.5};
    auto r = spearman(x, y);
    double n = static_cast<double>(x.size());
    double t = r.rho * std::sqrt((n - 2.0) / (1.0 - r.rho * r.rho));
    CHECK(r.p == doctest::Approx(student_t_two_sided_p(t, n - 2.0)).epsilon(1e-12));
    CHECK(r.p > 0.0);
    CHECK(r.p <= 1.0);
}

TEST_CASE("spearman rejects unusable inputs") {
    std::vector<double> two = {1.0, 2.0};
    CHECK_THROWS_WITH(spearman(two, two), doctest::Contains("at least 3"));

    std::vector<double> x = {1.0, 2.0, 3.0};
    std::vector<double> constant = {4.0, 4.0, 4.0};
    CHECK_THROWS_WITH(spearman(x, constant), doctest::Contains("undefined correlation"));
    CHECK_THROWS_WITH(spearman(constant, x), doctest::Contains("undefined correlation"));

    std::vector<double> longer = {1.0, 2.0, 3.0, 4.0};
    CHECK_THROWS_AS(spearman(x, longer), Error);
}

TEST_CASE("top correlations: ordering, families, and constant-column skipping") {
    // col0 tracks labels exactly; col1 anti-tracks weakly; col2 constant
    FeatureTable t = table_of(
        {"A.F0.mean", "T.words.base.std", "L.pos_prop"},
        {{1.0, 9.0, 2.0}, {2.0, 8.5, 2.0}, {3.0, 3.0, 2.0}, {4.0, 4.0, 2.0},
         {5.0, 2.0, 2.0}, {6.0, 1.0, 2.0}, {7.0, 2.5, 2.0}, {8.0, 0.5, 2.0}});
    std::vector<int> labels = {0, 0, 1, 1, 1, 2, 2, 2};

    auto rep = top_correlations(t, labels, 10);
    CHECK(rep.n == 8);
    CHECK(rep.skipped_constant == 1);
    REQUIRE(rep.top.size() == 2);  // constant column never shows up
    CHECK(rep.top[0].feature == "A.F0.mean");
    CHECK(rep.top[0].rho == doctest::Approx(1.0).epsilon(0.05));
    CHECK(rep.top[0].family == "A");
    CHECK(rep.top[1].feature == "T.words.base.std");
    CHECK(rep.top[1].rho < 0.0);
    CHECK(std::abs(rep.top[0].rho) >= std::abs(rep.top[1].rho));

    // family_best carries one row per family, sorted by family name
    REQUIRE(rep.family_best.size() == 2);
    CHECK(rep.family_best[0].family == "A");
    CHECK(rep.family_best[1].family == "T");

    // k truncates the top list but not family_best
    auto rep1 = top_correlations(t, labels, 1);
    CHECK(rep1.top.size() == 1);
    CHECK(rep1.family_best.size() == 2);

    auto rep0 = top_correlations(t, labels, 0);
    CHECK(rep0.top.empty());

    // thread count changes nothing
    auto rep4 = top_correlations(t, labels, 10, 4);
    REQUIRE(rep4.top.size() == rep.top.size());
    for (std::size_t i = 0; i < rep.top.size(); ++i) {
        CHECK(rep4.top[i].feature == rep.top[i].feature);
        CHECK(rep4.top[i].rho == rep.top[i].rho);
        CHECK(rep4.top[i].p == rep.top[i].p);
    }
}

TEST_CASE("top correlations: label mismatch and degenerate labels") {
    FeatureTable t = table_of({"A.x"}, {{1.0}, {2.0}, {3.0}, {4.0}});
    CHECK_THROWS_AS(top_correlations(t, {0, 1}, 5), Error);

    // constant labels leave every column undefined: all skipped, none reported
    auto rep = top_correlations(t, {1, 1, 1, 1}, 5);
    CHECK(rep.top.empty());
    CHECK(rep.skipped_constant == 1);

    FeatureTable tiny = table_of({"A.x"}, {{1.0}, {2.0}});
    CHECK_THROWS_WITH(top_correlations(tiny, {0, 1}, 5), doctest::Contains("at least 3"));
}

TEST_CASE("top correlations: null data yields roughly nominal significance rates") {
    // 60 independent noise features vs labels: expect ~5% flagged at p < 0.05
    Rng rng(2024);
    const std::size_t rows = 60, cols = 60;
    std::vector<std::string> names;
    for (std::size_t c = 0; c < cols; ++c) names.push_back("T.noise" + std::to_string(c));
    std::vector<std::vector<double>> data(rows, std::vector<double>(cols));
    for (auto& r : data)
        for (auto& v : r) v = rng.normal();
    FeatureTable t = table_of(names, data);
    std::vector<int> labels(rows);
    for (auto& l : labels) l = static_cast<int>(rng.below(3));

    auto rep = top_correlations(t, labels, cols);
    std::size_t sig = 0;
    for (const auto& row : rep.top)
        if (row.significant) ++sig;
    CHECK(sig <= 12);  // binomial(60, 0.05): P(X > 12) is negligible

    // and the flag agrees with the p-value it annotates
    for (const auto& row : rep.top) CHECK(row.significant == (row.p < 0.05));
}

TEST_CASE("correlation renderers carry the report content") {
    FeatureTable t = table_of(
        {"A.F0.mean", "T.words.base.std"},
        {{1.0, 9.0}, {2.0, 8.0}, {3.0, 3.0}, {4.0, 4.0}, {5.0, 2.0}, {6.0, 1.0}});
    std::vector<int> labels = {0, 0, 1, 1, 2, 2};
    auto rep = top_correlations(t, labels, 5);

    auto csv = correlation_csv(rep);
    CHECK(csv.rfind("section,correlation,p_value,significant,feature,family,n", 0) == 0);
    CHECK(csv.find("top,") != std::string::npos);
    CHECK(csv.find("family_best,") != std::string::npos);
    CHECK(csv.find("A.F0.mean") != std::string::npos);

    auto text = correlation_text(rep);
    CHECK(text.find("A.F0.mean") != std::string::npos);
    CHECK(text.find("Best per family") != std::string::npos);
    CHECK(correlation_text(rep) == text);  // stable
}

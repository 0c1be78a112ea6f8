#include "dyadrisk/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dyadrisk/error.hpp"
#include "dyadrisk/metrics.hpp"
#include "dyadrisk/numfmt.hpp"

namespace dyadrisk {

// ---- normalization -------------------------------------------------------------

const char* to_string(NormScheme s) { return s == NormScheme::MinMax ? "minmax" : "zscore"; }

std::optional<NormScheme> norm_scheme_from_string(std::string_view s) {
    if (s == "minmax") return NormScheme::MinMax;
    if (s == "zscore") return NormScheme::ZScore;
    return std::nullopt;
}

Normalizer fit_normalizer(const Matrix& train, NormScheme scheme) {
    if (train.rows() == 0) throw Error("fit_normalizer: empty training matrix");
    const std::size_t n = train.rows(), d = train.cols();
    Normalizer norm;
    norm.scheme = scheme;
    norm.offset.resize(d);
    norm.scale.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        if (scheme == NormScheme::MinMax) {
            double lo = train(0, j), hi = train(0, j);
            for (std::size_t i = 1; i < n; ++i) {
                lo = std::min(lo, train(i, j));
                hi = std::max(hi, train(i, j));
            }
            norm.offset[j] = lo;
            norm.scale[j] = hi > lo ? 1.0 / (hi - lo) : 0.0;
        } else {
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) mean += train(i, j);
            mean /= static_cast<double>(n);
            double var = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double t = train(i, j) - mean;
                var += t * t;
            }
            double sd = std::sqrt(var / static_cast<double>(n));
            norm.offset[j] = mean;
            norm.scale[j] = sd > 0.0 ? 1.0 / sd : 0.0;
        }
    }
    return norm;
}

std::vector<double> apply_normalizer(const Normalizer& norm, std::span<const double> x) {
    if (x.size() != norm.offset.size()) throw Error("apply_normalizer: dimension mismatch");
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - norm.offset[j]) * norm.scale[j];
    return out;
}

Matrix apply_normalizer(const Normalizer& norm, const Matrix& x) {
    if (x.cols() != norm.offset.size()) throw Error("apply_normalizer: dimension mismatch");
    Matrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j)
            out(i, j) = (x(i, j) - norm.offset[j]) * norm.scale[j];
    return out;
}

// ---- PCA -----------------------------------------------------------------------

namespace {

// Jacobi gives eigenvector columns with arbitrary sign; pin each column so
// its largest-magnitude entry is positive, keeping artifacts byte-stable.
void pin_column_signs(Matrix& m) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
        std::size_t arg = 0;
        double best = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            double a = std::fabs(m(i, j));
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        if (m(arg, j) < 0.0)
            for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) = -m(i, j);
    }
}

}  // namespace

PCAModel fit_pca(const Matrix& train, double energy) {
    const std::size_t n = train.rows(), d = train.cols();
    if (n < 2) throw Error("fit_pca: need at least 2 training rows");
    if (energy <= 0.0 || energy > 1.0) throw Error("fit_pca: energy must be in (0, 1]");

    PCAModel model;
    model.mean.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) model.mean[j] += train(i, j);
    for (std::size_t j = 0; j < d; ++j) model.mean[j] /= static_cast<double>(n);

    Matrix centered(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) centered(i, j) = train(i, j) - model.mean[j];

    // eigenvalue/eigenvector extraction, descending, positive only
    std::vector<double> lambda;
    Matrix components;  // d x (#positive), orthonormal columns
    if (n <= d) {
        // Gram route: XcXc'/n shares its nonzero spectrum with the covariance;
        // v = Xc'u / sqrt(n*lambda) recovers the d-dimensional directions.
        Matrix gram(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                double s = 0.0;
                for (std::size_t c = 0; c < d; ++c) s += centered(i, c) * centered(j, c);
                s /= static_cast<double>(n);
                gram(i, j) = s;
                gram(j, i) = s;
            }
        EigenResult eig = jacobi_eigen(gram);
        double max_ev = eig.values.empty() ? 0.0 : std::max(0.0, eig.values.back());
        std::vector<std::size_t> keep;
        for (std::size_t j = eig.values.size(); j-- > 0;)  // descending
            if (eig.values[j] > std::max(1e-12 * max_ev, 0.0)) keep.push_back(j);
        components = Matrix(d, keep.size());
        for (std::size_t c = 0; c < keep.size(); ++c) {
            double ev = eig.values[keep[c]];
            lambda.push_back(ev);
            double inv = 1.0 / std::sqrt(static_cast<double>(n) * ev);
            for (std::size_t row = 0; row < d; ++row) {
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i) s += centered(i, row) * eig.vectors(i, keep[c]);
                components(row, c) = s * inv;
            }
        }
    } else {
        Matrix cov(d, d);
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = a; b < d; ++b) {
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i) s += centered(i, a) * centered(i, b);
                s /= static_cast<double>(n);
                cov(a, b) = s;
                cov(b, a) = s;
            }
        EigenResult eig = jacobi_eigen(cov);
        double max_ev = eig.values.empty() ? 0.0 : std::max(0.0, eig.values.back());
        std::vector<std::size_t> keep;
        for (std::size_t j = eig.values.size(); j-- > 0;)
            if (eig.values[j] > std::max(1e-12 * max_ev, 0.0)) keep.push_back(j);
        components = Matrix(d, keep.size());
        for (std::size_t c = 0; c < keep.size(); ++c) {
            lambda.push_back(eig.values[keep[c]]);
            for (std::size_t row = 0; row < d; ++row)
                components(row, c) = eig.vectors(row, keep[c]);
        }
    }

    double total = 0.0;
    for (double l : lambda) total += l;
    if (lambda.empty() || total <= 0.0) {
        // all rows identical: nothing to project onto
        model.k = 1;
        model.projection = Matrix(d, 1);
        model.eigenvalues = {0.0};
        model.retained = 1.0;
        model.degenerate = true;
        return model;
    }

    std::size_t k = lambda.size();
    double cum = 0.0;
    for (std::size_t j = 0; j < lambda.size(); ++j) {
        cum += lambda[j];
        if (cum / total >= energy) {
            k = j + 1;
            break;
        }
    }
    model.k = k;
    model.eigenvalues = lambda;
    model.projection = Matrix(d, k);
    for (std::size_t row = 0; row < d; ++row)
        for (std::size_t c = 0; c < k; ++c) model.projection(row, c) = components(row, c);
    pin_column_signs(model.projection);
    double kept = 0.0;
    for (std::size_t j = 0; j < k; ++j) kept += lambda[j];
    model.retained = kept / total;
    return model;
}

std::vector<double> apply_pca(const PCAModel& model, std::span<const double> x) {
    if (x.size() != model.mean.size()) throw Error("apply_pca: dimension mismatch");
    std::vector<double> out(model.k, 0.0);
    for (std::size_t j = 0; j < x.size(); ++j) {
        double c = x[j] - model.mean[j];
        if (c == 0.0) continue;
        for (std::size_t p = 0; p < model.k; ++p) out[p] += c * model.projection(j, p);
    }
    return out;
}

Matrix apply_pca(const PCAModel& model, const Matrix& x) {
    if (x.cols() != model.mean.size()) throw Error("apply_pca: dimension mismatch");
    Matrix out(x.rows(), model.k);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto projected = apply_pca(model, x.row(i));
        for (std::size_t p = 0; p < model.k; ++p) out(i, p) = projected[p];
    }
    return out;
}

// ---- SVM -----------------------------------------------------------------------

const char* to_string(Kernel k) { return k == Kernel::Linear ? "linear" : "rbf"; }

std::optional<Kernel> kernel_from_string(std::string_view s) {
    if (s == "linear") return Kernel::Linear;
    if (s == "rbf") return Kernel::RBF;
    return std::nullopt;
}

namespace {

double kernel_eval(Kernel kernel, double gamma, std::span<const double> a,
                   std::span<const double> b) {
    if (kernel == Kernel::Linear) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    }
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double t = a[i] - b[i];
        sq += t * t;
    }
    return std::exp(-gamma * sq);
}

}  // namespace

SVMModel train_svm(const Matrix& x, const std::vector<int>& y,
                   const std::vector<double>& weights, Kernel kernel, double c, double gamma,
                   double tol, SMOStats* stats) {
    const std::size_t n = x.rows();
    if (n == 0) throw Error("train_svm: empty training set");
    if (y.size() != n || weights.size() != n)
        throw Error("train_svm: label/weight count mismatch");
    if (c <= 0.0) throw Error("train_svm: C must be positive");
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (y[i] == 1) has_pos = true;
        else if (y[i] == -1) has_neg = true;
        else throw Error("train_svm: labels must be -1 or +1");
        if (!(weights[i] > 0.0)) throw Error("train_svm: weights must be positive");
    }
    if (!has_pos || !has_neg) throw Error("train_svm: single-class input");
    if (kernel == Kernel::RBF && gamma <= 0.0) throw Error("train_svm: gamma must be positive");

    Matrix gram(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double v = kernel_eval(kernel, gamma, x.row(i), x.row(j));
            gram(i, j) = v;
            gram(j, i) = v;
        }

    std::vector<double> box(n);
    for (std::size_t i = 0; i < n; ++i) box[i] = c * weights[i];

    std::vector<double> alpha(n, 0.0);
    std::vector<double> f(n, 0.0);  // sum_j alpha_j y_j K_ij  (decision minus bias)

    auto in_up = [&](std::size_t i) {
        return (y[i] == 1 && alpha[i] < box[i]) || (y[i] == -1 && alpha[i] > 0.0);
    };
    auto in_low = [&](std::size_t i) {
        return (y[i] == 1 && alpha[i] > 0.0) || (y[i] == -1 && alpha[i] < box[i]);
    };

    const long max_idle = 10 * static_cast<long>(n);
    const long hard_cap = 10000 + 1000 * static_cast<long>(n);
    long idle = 0;
    int iterations = 0;
    double b_up = 0.0, b_low = 0.0;

    for (long iter = 0; iter < hard_cap; ++iter) {
        // maximal violating pair on F_i = f_i - y_i
        std::size_t i_up = n, i_low = n;
        b_up = std::numeric_limits<double>::infinity();
        b_low = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            double fi = f[i] - static_cast<double>(y[i]);
            if (in_up(i) && fi < b_up) {
                b_up = fi;
                i_up = i;
            }
            if (in_low(i) && fi > b_low) {
                b_low = fi;
                i_low = i;
            }
        }
        if (i_up == n || i_low == n || b_low - b_up <= tol) break;

        const std::size_t i1 = i_low, i2 = i_up;
        const double y1 = y[i1], y2 = y[i2];
        const double a1 = alpha[i1], a2 = alpha[i2];
        const double f1 = f[i1] - y1, f2 = f[i2] - y2;

        double eta = gram(i1, i1) + gram(i2, i2) - 2.0 * gram(i1, i2);
        if (eta < 1e-12) eta = 1e-12;
        double a2_new = a2 + y2 * (f1 - f2) / eta;

        double lo, hi;
        if (y1 != y2) {
            lo = std::max(0.0, a2 - a1);
            hi = std::min(box[i2], box[i1] - a1 + a2);
        } else {
            lo = std::max(0.0, a1 + a2 - box[i1]);
            hi = std::min(box[i2], a1 + a2);
        }
        a2_new = std::clamp(a2_new, lo, hi);
        double a1_new = a1 + y1 * y2 * (a2 - a2_new);
        if (a1_new < 1e-12) a1_new = 0.0;
        if (a1_new > box[i1] - 1e-12) a1_new = box[i1];

        if (std::fabs(a2_new - a2) < 1e-14 && std::fabs(a1_new - a1) < 1e-14) {
            if (++idle >= max_idle) break;
            continue;
        }
        idle = 0;
        ++iterations;

        double d1 = (a1_new - a1) * y1;
        double d2 = (a2_new - a2) * y2;
        alpha[i1] = a1_new;
        alpha[i2] = a2_new;
        for (std::size_t k2 = 0; k2 < n; ++k2) f[k2] += d1 * gram(i1, k2) + d2 * gram(i2, k2);

        if (stats) {
            double obj = 0.0;  // dual objective: sum alpha - 1/2 sum alpha_i y_i f_i
            for (std::size_t i = 0; i < n; ++i) obj += alpha[i] - 0.5 * alpha[i] * y[i] * f[i];
            stats->objective_trace.push_back(obj);
        }
    }

    SVMModel model;
    model.kernel = kernel;
    model.gamma = kernel == Kernel::RBF ? gamma : 0.0;
    model.b = -(b_up + b_low) / 2.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] <= 0.0) continue;
        model.support_vectors.emplace_back(x.row(i).begin(), x.row(i).end());
        model.coef.push_back(alpha[i] * y[i]);
    }
    if (stats) stats->iterations = iterations;
    return model;
}

double svm_decision(const SVMModel& model, std::span<const double> x) {
    double s = model.b;
    for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
        s += model.coef[i] * kernel_eval(model.kernel, model.gamma, model.support_vectors[i], x);
    return s;
}

// ---- one-vs-one ------------------------------------------------------------------

MulticlassSVM train_multiclass(const Matrix& x, const std::vector<int>& y,
                               const std::vector<double>& weights, Kernel kernel, double c,
                               double gamma, double tol) {
    if (x.rows() != y.size()) throw Error("train_multiclass: label count mismatch");
    MulticlassSVM mc;
    mc.classes = y;
    std::sort(mc.classes.begin(), mc.classes.end());
    mc.classes.erase(std::unique(mc.classes.begin(), mc.classes.end()), mc.classes.end());
    if (mc.classes.size() < 2) throw Error("train_multiclass: single-class input");

    for (std::size_t a = 0; a < mc.classes.size(); ++a) {
        for (std::size_t b = a + 1; b < mc.classes.size(); ++b) {
            std::vector<std::size_t> idx;
            for (std::size_t i = 0; i < y.size(); ++i)
                if (y[i] == mc.classes[a] || y[i] == mc.classes[b]) idx.push_back(i);
            Matrix sub(idx.size(), x.cols());
            std::vector<int> suby(idx.size());
            std::vector<double> subw(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) {
                for (std::size_t j = 0; j < x.cols(); ++j) sub(i, j) = x(idx[i], j);
                suby[i] = y[idx[i]] == mc.classes[b] ? 1 : -1;
                subw[i] = weights[idx[i]];
            }
            SVMModel m = train_svm(sub, suby, subw, kernel, c, gamma, tol);
            m.class_neg = mc.classes[a];
            m.class_pos = mc.classes[b];
            mc.models.push_back(std::move(m));
        }
    }
    return mc;
}

int predict_multiclass(const MulticlassSVM& mc, std::span<const double> x) {
    const std::size_t k = mc.classes.size();
    if (k == 0) throw Error("predict_multiclass: empty model");
    if (mc.models.size() != k * (k - 1) / 2)
        throw Error("predict_multiclass: missing pairwise model (" +
                    std::to_string(mc.models.size()) + " of " +
                    std::to_string(k * (k - 1) / 2) + ")");
    if (k == 1) return mc.classes[0];

    std::vector<int> votes(k, 0);
    std::vector<double> margin(k, 0.0);  // sum of |decision| over won duels
    std::size_t m = 0;
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b, ++m) {
            double dec = svm_decision(mc.models[m], x);
            std::size_t winner = dec > 0.0 ? b : a;
            ++votes[winner];
            margin[winner] += std::fabs(dec);
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < k; ++i) {
        if (votes[i] > votes[best] || (votes[i] == votes[best] && margin[i] > margin[best]))
            best = i;  // equal votes and margins keep the lower class label
    }
    return mc.classes[best];
}

// ---- grid search ------------------------------------------------------------------

HyperGrid HyperGrid::full() {
    HyperGrid g;
    for (int k = 0; k <= 20; ++k) {
        double v = std::pow(10.0, -5.0 + 0.5 * k);
        g.c_grid.push_back(v);
        g.gamma_grid.push_back(v);
    }
    return g;
}

HyperGrid HyperGrid::fast() {
    HyperGrid g;
    g.schemes = {NormScheme::ZScore};
    g.kernels = {Kernel::Linear};
    g.c_grid = {1.0, 10.0, 100.0};
    g.gamma_grid = {};
    return g;
}

std::size_t HyperGrid::size() const {
    std::size_t n = 0;
    for (Kernel k : kernels)
        n += schemes.size() * c_grid.size() * (k == Kernel::RBF ? gamma_grid.size() : 1);
    return n;
}

int predict_pipeline(const FittedPipeline& p, std::span<const double> raw) {
    auto normed = apply_normalizer(p.normalizer, raw);
    auto reduced = apply_pca(p.pca, normed);
    return predict_multiclass(p.svm, reduced);
}

GridSearchResult grid_search(const Matrix& xtrain, const std::vector<int>& ytrain,
                             const std::vector<double>& wtrain, const Matrix& xval,
                             const std::vector<int>& yval, const HyperGrid& grid,
                             double tol) {
    if (xval.rows() == 0) throw Error("grid_search: empty validation set");
    if (xtrain.rows() == 0) throw Error("grid_search: empty training set");
    if (grid.schemes.empty() || grid.kernels.empty() || grid.c_grid.empty())
        throw Error("grid_search: empty grid");

    GridSearchResult result;
    double best = -1.0;

    for (NormScheme scheme : grid.schemes) {
        Normalizer norm = fit_normalizer(xtrain, scheme);
        Matrix ntrain = apply_normalizer(norm, xtrain);
        Matrix nval = apply_normalizer(norm, xval);
        PCAModel pca = fit_pca(ntrain);
        Matrix ptrain = apply_pca(pca, ntrain);
        Matrix pval = apply_pca(pca, nval);

        for (Kernel kernel : grid.kernels) {
            const std::vector<double> single_gamma{0.0};
            const auto& gammas = kernel == Kernel::RBF ? grid.gamma_grid : single_gamma;
            for (double c : grid.c_grid) {
                for (double gamma : gammas) {
                    MulticlassSVM mc =
                        train_multiclass(ptrain, ytrain, wtrain, kernel, c, gamma, tol);
                    LabelPairs pairs;
                    for (std::size_t i = 0; i < pval.rows(); ++i)
                        pairs.emplace_back(yval[i], predict_multiclass(mc, pval.row(i)));
                    double score = macro_recall_present(pairs);
                    ++result.configs_evaluated;
                    if (score > best) {
                        best = score;
                        result.pipeline.normalizer = norm;
                        result.pipeline.pca = pca;
                        result.pipeline.svm = std::move(mc);
                        result.pipeline.config = {scheme, kernel, c, gamma};
                    }
                }
            }
        }
    }
    result.val_score = best;
    return result;
}

// ---- serialization -----------------------------------------------------------------

namespace {

void append_array(std::string& out, const std::vector<double>& v) {
    out += '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format_g17(v[i]);
    }
    out += ']';
}

}  // namespace

std::string pipeline_to_json(const FittedPipeline& p) {
    std::string out = "{\"version\":1,\"config\":{";
    out += "\"scheme\":\"";
    out += to_string(p.config.scheme);
    out += "\",\"kernel\":\"";
    out += to_string(p.config.kernel);
    out += "\",\"C\":" + format_g17(p.config.c);
    out += ",\"gamma\":" + format_g17(p.config.gamma);
    out += "},\"normalizer\":{\"offset\":";
    append_array(out, p.normalizer.offset);
    out += ",\"scale\":";
    append_array(out, p.normalizer.scale);
    out += "},\"pca\":{\"k\":" + std::to_string(p.pca.k);
    out += ",\"retained\":" + format_g17(p.pca.retained);
    out += ",\"degenerate\":";
    out += p.pca.degenerate ? "true" : "false";
    out += ",\"mean\":";
    append_array(out, p.pca.mean);
    out += ",\"eigenvalues\":";
    append_array(out, p.pca.eigenvalues);
    out += ",\"projection\":[";
    for (std::size_t i = 0; i < p.pca.projection.rows(); ++i) {
        if (i) out += ',';
        std::vector<double> row(p.pca.projection.row(i).begin(), p.pca.projection.row(i).end());
        append_array(out, row);
    }
    out += "]},\"svm\":{\"classes\":[";
    for (std::size_t i = 0; i < p.svm.classes.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(p.svm.classes[i]);
    }
    out += "],\"models\":[";
    for (std::size_t m = 0; m < p.svm.models.size(); ++m) {
        const SVMModel& sm = p.svm.models[m];
        if (m) out += ',';
        out += "{\"class_neg\":" + std::to_string(sm.class_neg);
        out += ",\"class_pos\":" + std::to_string(sm.class_pos);
        out += ",\"kernel\":\"";
        out += to_string(sm.kernel);
        out += "\",\"gamma\":" + format_g17(sm.gamma);
        out += ",\"b\":" + format_g17(sm.b);
        out += ",\"coef\":";
        append_array(out, sm.coef);
        out += ",\"support_vectors\":[";
        for (std::size_t i = 0; i < sm.support_vectors.size(); ++i) {
            if (i) out += ',';
            append_array(out, sm.support_vectors[i]);
        }
        out += "]}";
    }
    out += "]}}";
    return out;
}

}  // namespace dyadrisk

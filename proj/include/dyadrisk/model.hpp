#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dyadrisk/linalg.hpp"

namespace dyadrisk {

// ---- normalization -------------------------------------------------------------

enum class NormScheme { MinMax = 0, ZScore = 1 };
const char* to_string(NormScheme s);
std::optional<NormScheme> norm_scheme_from_string(std::string_view s);

// x' = (x - offset) * scale per dimension; zero-spread dimensions get
// scale = 0 so they map to 0 under both schemes.
struct Normalizer {
    NormScheme scheme = NormScheme::MinMax;
    std::vector<double> offset;
    std::vector<double> scale;
};

Normalizer fit_normalizer(const Matrix& train, NormScheme scheme);
std::vector<double> apply_normalizer(const Normalizer& norm, std::span<const double> x);
Matrix apply_normalizer(const Normalizer& norm, const Matrix& x);

// ---- PCA -----------------------------------------------------------------------

struct PCAModel {
    std::vector<double> mean;         // d
    Matrix projection;                // d x k, orthonormal columns
    std::vector<double> eigenvalues;  // positive covariance eigenvalues, descending
    std::size_t k = 0;
    double retained = 0.0;  // energy ratio captured by the k components
    bool degenerate = false;  // all training rows equal: k = 1, zero projection
};

// Population-covariance PCA keeping the smallest k whose cumulative energy
// reaches `energy`. When rows <= dims the eigenproblem is solved on the n x n
// Gram matrix instead of the d x d covariance. Needs >= 2 rows.
PCAModel fit_pca(const Matrix& train, double energy = 0.95);
std::vector<double> apply_pca(const PCAModel& model, std::span<const double> x);
Matrix apply_pca(const PCAModel& model, const Matrix& x);

// ---- SVM -----------------------------------------------------------------------

enum class Kernel { Linear = 0, RBF = 1 };
const char* to_string(Kernel k);
std::optional<Kernel> kernel_from_string(std::string_view s);

struct SVMModel {
    Kernel kernel = Kernel::Linear;
    double gamma = 0.0;
    double b = 0.0;
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> coef;  // alpha_i * y_i, parallel to support_vectors
    int class_neg = 0;         // class mapped to y = -1 (one-vs-one bookkeeping)
    int class_pos = 1;         // class mapped to y = +1
};

// Optional introspection for property tests: per-iteration dual objective.
struct SMOStats {
    int iterations = 0;
    std::vector<double> objective_trace;
};

// Soft-margin dual via sequential minimal optimization with maximal-violating-
// pair selection. Per-sample box constraints are C * weights[i]. Stops when
// the KKT violation drops to tol or 10*n consecutive selections make no
// progress. y must be -1/+1 with both classes present; weights must be > 0.
SVMModel train_svm(const Matrix& x, const std::vector<int>& y,
                   const std::vector<double>& weights, Kernel kernel, double c, double gamma,
                   double tol = 1e-3, SMOStats* stats = nullptr);

double svm_decision(const SVMModel& model, std::span<const double> x);

// ---- one-vs-one multiclass --------------------------------------------------------

struct MulticlassSVM {
    std::vector<int> classes;      // sorted distinct training labels
    std::vector<SVMModel> models;  // one per class pair (i < j), in pair order
};

MulticlassSVM train_multiclass(const Matrix& x, const std::vector<int>& y,
                               const std::vector<double>& weights, Kernel kernel, double c,
                               double gamma, double tol = 1e-3);

// Majority vote; ties broken by the largest sum of winning |decision| values,
// then by the lower class label.
int predict_multiclass(const MulticlassSVM& mc, std::span<const double> x);

// ---- hyperparameter search ----------------------------------------------------------

struct ModelConfig {
    NormScheme scheme = NormScheme::MinMax;
    Kernel kernel = Kernel::Linear;
    double c = 1.0;
    double gamma = 0.0;  // unused for the linear kernel
};

struct HyperGrid {
    std::vector<NormScheme> schemes{NormScheme::MinMax, NormScheme::ZScore};
    std::vector<Kernel> kernels{Kernel::Linear, Kernel::RBF};
    std::vector<double> c_grid;
    std::vector<double> gamma_grid;

    // 10^-5 .. 10^5 in half-decade steps (21 values) for both C and gamma:
    // 2*21 linear + 2*21*21 RBF = 924 configurations.
    static HyperGrid full();
    // Reduced grid for smoke/acceptance runs: ZScore + linear, 3 C values.
    static HyperGrid fast();

    std::size_t size() const;
};

struct FittedPipeline {
    Normalizer normalizer;
    PCAModel pca;
    MulticlassSVM svm;
    ModelConfig config;
};

int predict_pipeline(const FittedPipeline& p, std::span<const double> raw);

struct GridSearchResult {
    FittedPipeline pipeline;
    double val_score = 0.0;
    std::size_t configs_evaluated = 0;
};

// Refit normalizer -> PCA -> SVM per configuration on train, score macro
// recall (over classes present in val) and keep the best; ties resolve in
// iteration order MinMax<ZScore, Linear<RBF, smaller C, smaller gamma.
// Normalizer and PCA are fitted once per scheme and shared across kernel
// configs. Empty val is an error.
GridSearchResult grid_search(const Matrix& xtrain, const std::vector<int>& ytrain,
                             const std::vector<double>& wtrain, const Matrix& xval,
                             const std::vector<int>& yval, const HyperGrid& grid,
                             double tol = 1e-3);

// Reproducibility artifact: every float printed with 17 significant digits.
std::string pipeline_to_json(const FittedPipeline& p);

}  // namespace dyadrisk

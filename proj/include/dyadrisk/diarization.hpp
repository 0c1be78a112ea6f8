#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dyadrisk/corpus.hpp"
#include "dyadrisk/linalg.hpp"

namespace dyadrisk {

// Pairwise cosine similarity of per-segment embeddings. Requires >= 2
// embeddings of equal dimension; a zero-norm vector is an error naming the
// offending segment.
Matrix cosine_affinity(const std::vector<std::vector<double>>& embeddings);

// Keep the ceil(p*n) largest entries per row (ties favor the lower column
// index), zero the rest, then symmetrize by elementwise max. p in (0, 1].
Matrix prune_affinity(const Matrix& affinity, double p);

// Cluster rows of the k smallest-eigenvalue eigenvectors of the unnormalized
// Laplacian L = D - A. Negative weights are clamped to 0 first. k-means runs
// 10 seeded restarts and keeps the best inertia. n == k degenerates to one
// cluster per row.
std::vector<int> spectral_cluster(const Matrix& affinity, int k, std::uint64_t seed);

// Diarization error rate with a no-score collar around reference segment
// boundaries and the best bijective mapping between hypothesis and reference
// speaker tags. Overlap regions are scored against every active reference
// speaker. Empty reference is an error.
double diarization_error_rate(const SegmentSet& hyp, const SegmentSet& ref,
                              TimeMs collar_ms = 250);

inline std::vector<double> default_p_grid() {
    std::vector<double> g;
    for (int k = 1; k <= 19; ++k) g.push_back(0.05 * k);
    return g;
}

// A session with manually labeled speaker tags used for tuning the pruning
// parameter; embeddings are parallel to reference.segments.
struct LabeledDevSession {
    std::string session_id;
    SegmentSet reference;
    std::vector<std::vector<double>> embeddings;
};

struct TuneReport {
    double best_p = 0.0;
    std::vector<double> grid;      // candidate p values, ascending
    std::vector<double> mean_der;  // parallel to grid
};

// Mean DER over the dev set for each grid point; returns the minimizing p
// (ties favor the smaller p). Sessions are aggregated in sorted session_id
// order so the mean is reproducible. Empty dev set is an error.
TuneReport tune_p(const std::vector<LabeledDevSession>& dev, std::uint64_t seed,
                  const std::vector<double>& grid = default_p_grid());

struct RoleAssignment {
    std::array<Role, 2> role_of_cluster;  // indexed by cluster id
    std::array<double, 2> median_f0;      // voiced-frame median per cluster
    bool tie_warning = false;             // equal medians, positional tie-break used
};

// Median voiced F0 (frames with F0 > 0 whose midpoints fall inside the
// cluster's segments); the lower median becomes Husband. Equal medians fall
// back to the cluster whose first segment starts earlier, with a warning. A
// cluster with zero voiced frames is an error.
RoleAssignment assign_roles(const SegmentSet& segments, const std::vector<int>& clusters,
                            const FrameMatrix& frames);

struct DiarizationResult {
    std::vector<int> clusters;  // per segment, parallel to input order
    RoleAssignment roles;
    double p = 0.0;
    SegmentSet labeled;  // input segments tagged "H"/"W"
};

// Full per-session pipeline: affinity -> prune(p) -> spectral_cluster ->
// assign_roles, producing segments tagged "H"/"W".
DiarizationResult diarize_session(const SegmentSet& segments,
                                  const std::vector<std::vector<double>>& embeddings,
                                  const FrameMatrix& frames, double p, std::uint64_t seed);

}  // namespace dyadrisk

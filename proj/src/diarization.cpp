#include "dyadrisk/diarization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "dyadrisk/rng.hpp"

namespace dyadrisk {

Matrix cosine_affinity(const std::vector<std::vector<double>>& embeddings) {
    const std::size_t n = embeddings.size();
    if (n < 2) throw Error("cosine_affinity: need at least 2 embeddings");
    const std::size_t dim = embeddings[0].size();
    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (embeddings[i].size() != dim)
            throw Error("cosine_affinity: segment " + std::to_string(i) +
                        " has dimension " + std::to_string(embeddings[i].size()) +
                        ", expected " + std::to_string(dim));
        double s = 0.0;
        for (double v : embeddings[i]) s += v * v;
        norms[i] = std::sqrt(s);
        if (norms[i] == 0.0)
            throw Error("cosine_affinity: zero-norm embedding at segment " + std::to_string(i));
    }
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        a(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t d = 0; d < dim; ++d) dot += embeddings[i][d] * embeddings[j][d];
            double c = dot / (norms[i] * norms[j]);
            a(i, j) = c;
            a(j, i) = c;
        }
    }
    return a;
}

Matrix prune_affinity(const Matrix& affinity, double p) {
    if (p <= 0.0 || p > 1.0) throw Error("prune_affinity: p must be in (0, 1]");
    if (affinity.rows() != affinity.cols()) throw Error("prune_affinity: matrix must be square");
    const std::size_t n = affinity.rows();
    const std::size_t keep = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));

    Matrix pruned(n, n);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        // descending by value; ties keep the lower column index
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return affinity(i, a) > affinity(i, b);
        });
        for (std::size_t r = 0; r < keep && r < n; ++r) {
            std::size_t j = order[r];
            pruned(i, j) = affinity(i, j);
        }
    }
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out(i, j) = std::max(pruned(i, j), pruned(j, i));
    return out;
}

namespace {

// Lloyd's iterations from a random-point initialization; returns inertia.
double kmeans_once(const Matrix& rows, int k, Rng& rng, std::vector<int>& labels) {
    const std::size_t n = rows.rows();
    const std::size_t d = rows.cols();
    // Forgy init: k distinct row indices.
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    std::vector<std::vector<double>> centers(k, std::vector<double>(d));
    for (int c = 0; c < k; ++c) {
        std::size_t pick = c + static_cast<std::size_t>(rng.below(pool.size() - c));
        std::swap(pool[c], pool[pick]);
        for (std::size_t j = 0; j < d; ++j) centers[c][j] = rows(pool[c], j);
    }

    labels.assign(n, -1);
    std::vector<int> counts(k);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                double dist = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    double t = rows(i, j) - centers[c][j];
                    dist += t * t;
                }
                if (dist < best_d) {
                    best_d = dist;
                    best = c;
                }
            }
            if (labels[i] != best) {
                labels[i] = best;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;
        for (int c = 0; c < k; ++c) {
            counts[c] = 0;
            std::fill(centers[c].begin(), centers[c].end(), 0.0);
        }
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[labels[i]];
            for (std::size_t j = 0; j < d; ++j) centers[labels[i]][j] += rows(i, j);
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;  // empty cluster keeps zero center; next pass reseats it
            for (std::size_t j = 0; j < d; ++j) centers[c][j] /= counts[c];
        }
    }

    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            double t = rows(i, j) - centers[labels[i]][j];
            inertia += t * t;
        }
    }
    return inertia;
}

}  // namespace

std::vector<int> spectral_cluster(const Matrix& affinity, int k, std::uint64_t seed) {
    const std::size_t n = affinity.rows();
    if (n < static_cast<std::size_t>(k)) throw Error("spectral_cluster: fewer segments than clusters");
    if (n == static_cast<std::size_t>(k)) {
        std::vector<int> out(n);
        std::iota(out.begin(), out.end(), 0);
        return out;
    }

    Matrix w(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) w(i, j) = std::max(affinity(i, j), 0.0);

    // unnormalized Laplacian L = D - W
    Matrix lap(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        double deg = 0.0;
        for (std::size_t j = 0; j < n; ++j) deg += w(i, j);
        for (std::size_t j = 0; j < n; ++j) lap(i, j) = -w(i, j);
        lap(i, i) += deg;
    }

    EigenResult eig = jacobi_eigen(lap);
    Matrix embed(n, static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < k; ++c) embed(i, static_cast<std::size_t>(c)) = eig.vectors(i, static_cast<std::size_t>(c));

    Rng rng(seed);
    std::vector<int> best_labels, labels;
    double best_inertia = std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < 10; ++restart) {
        double inertia = kmeans_once(embed, k, rng, labels);
        if (inertia < best_inertia) {
            best_inertia = inertia;
            best_labels = labels;
        }
    }
    return best_labels;
}

// ---- DER --------------------------------------------------------------------

namespace {

struct TagIntervals {
    std::string tag;
    std::vector<std::pair<TimeMs, TimeMs>> spans;
};

std::vector<TagIntervals> by_tag(const SegmentSet& set) {
    std::map<std::string, std::vector<std::pair<TimeMs, TimeMs>>> m;
    for (const auto& s : set.segments) m[s.speaker_tag].emplace_back(s.start_ms, s.end_ms());
    std::vector<TagIntervals> out;
    for (auto& [tag, spans] : m) {
        std::sort(spans.begin(), spans.end());
        out.push_back({tag, std::move(spans)});
    }
    return out;
}

bool active_at(const std::vector<std::pair<TimeMs, TimeMs>>& spans, TimeMs t) {
    for (const auto& [a, b] : spans)
        if (t >= a && t < b) return true;
    return false;
}

// All injective partial mappings hyp-tag-index -> ref-tag-index (including
// leaving tags unmapped), enumerated recursively. Tag counts are tiny (<= 2
// per side in this pipeline).
void enumerate_mappings(std::size_t hyp_count, std::size_t ref_count, std::size_t pos,
                        std::vector<int>& current, std::vector<std::vector<int>>& out) {
    if (pos == hyp_count) {
        out.push_back(current);
        return;
    }
    current[pos] = -1;
    enumerate_mappings(hyp_count, ref_count, pos + 1, current, out);
    for (std::size_t r = 0; r < ref_count; ++r) {
        bool used = false;
        for (std::size_t q = 0; q < pos; ++q)
            if (current[q] == static_cast<int>(r)) used = true;
        if (used) continue;
        current[pos] = static_cast<int>(r);
        enumerate_mappings(hyp_count, ref_count, pos + 1, current, out);
    }
    current[pos] = -1;
}

}  // namespace

double diarization_error_rate(const SegmentSet& hyp, const SegmentSet& ref, TimeMs collar_ms) {
    if (ref.segments.empty()) throw Error("diarization_error_rate: empty reference");

    auto ref_tags = by_tag(ref);
    auto hyp_tags = by_tag(hyp);

    // No-score zones: collar around every reference segment boundary.
    std::vector<std::pair<TimeMs, TimeMs>> noscore;
    if (collar_ms > 0) {
        for (const auto& s : ref.segments) {
            noscore.emplace_back(s.start_ms - collar_ms, s.start_ms + collar_ms);
            noscore.emplace_back(s.end_ms() - collar_ms, s.end_ms() + collar_ms);
        }
    }

    std::vector<TimeMs> cuts;
    auto add_cuts = [&](const std::vector<TagIntervals>& tags) {
        for (const auto& ti : tags)
            for (const auto& [a, b] : ti.spans) {
                cuts.push_back(a);
                cuts.push_back(b);
            }
    };
    add_cuts(ref_tags);
    add_cuts(hyp_tags);
    for (const auto& [a, b] : noscore) {
        cuts.push_back(a);
        cuts.push_back(b);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<std::vector<int>> mappings;
    std::vector<int> scratch(hyp_tags.size(), -1);
    enumerate_mappings(hyp_tags.size(), ref_tags.size(), 0, scratch, mappings);

    double best_der = std::numeric_limits<double>::infinity();
    for (const auto& mapping : mappings) {
        double err = 0.0, total = 0.0;
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
            TimeMs t1 = cuts[c], t2 = cuts[c + 1];
            TimeMs mid = t1 + (t2 - t1) / 2;
            bool skipped = false;
            for (const auto& [a, b] : noscore)
                if (mid >= a && mid < b) {
                    skipped = true;
                    break;
                }
            if (skipped) continue;

            int n_ref = 0, n_hyp = 0, n_correct = 0;
            std::vector<bool> ref_active(ref_tags.size());
            for (std::size_t r = 0; r < ref_tags.size(); ++r) {
                ref_active[r] = active_at(ref_tags[r].spans, mid);
                if (ref_active[r]) ++n_ref;
            }
            for (std::size_t h = 0; h < hyp_tags.size(); ++h) {
                if (!active_at(hyp_tags[h].spans, mid)) continue;
                ++n_hyp;
                int r = mapping[h];
                if (r >= 0 && ref_active[static_cast<std::size_t>(r)]) ++n_correct;
            }
            double dur = static_cast<double>(t2 - t1);
            err += dur * (std::max(n_ref, n_hyp) - n_correct);
            total += dur * n_ref;
        }
        if (total <= 0.0) throw Error("diarization_error_rate: no scored reference speech");
        double der = err / total;
        if (der < best_der) best_der = der;
    }
    return best_der;
}

// ---- tuning -----------------------------------------------------------------

TuneReport tune_p(const std::vector<LabeledDevSession>& dev, std::uint64_t seed,
                  const std::vector<double>& grid) {
    if (dev.empty()) throw Error("tune_p: empty dev set");
    if (grid.empty()) throw Error("tune_p: empty grid");

    std::vector<std::size_t> order(dev.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dev[a].session_id < dev[b].session_id;
    });

    TuneReport report;
    report.grid = grid;
    report.mean_der.resize(grid.size());

    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        double sum = 0.0;
        for (std::size_t oi : order) {
            const auto& sess = dev[oi];
            if (sess.reference.segments.size() != sess.embeddings.size())
                throw Error("tune_p: session " + sess.session_id +
                            ": embedding count does not match segment count");
            Matrix a = prune_affinity(cosine_affinity(sess.embeddings), grid[gi]);
            std::uint64_t s = derive_seed(seed, "tune_p|" + sess.session_id + "|" + std::to_string(gi));
            std::vector<int> clusters = spectral_cluster(a, 2, s);
            SegmentSet hyp;
            hyp.segments = sess.reference.segments;
            for (std::size_t i = 0; i < hyp.segments.size(); ++i)
                hyp.segments[i].speaker_tag = clusters[i] == 0 ? "0" : "1";
            sum += diarization_error_rate(hyp, sess.reference);
        }
        report.mean_der[gi] = sum / static_cast<double>(dev.size());
    }

    std::size_t best = 0;
    for (std::size_t gi = 1; gi < grid.size(); ++gi)
        if (report.mean_der[gi] < report.mean_der[best]) best = gi;
    report.best_p = grid[best];
    return report;
}

// ---- roles ------------------------------------------------------------------

RoleAssignment assign_roles(const SegmentSet& segments, const std::vector<int>& clusters,
                            const FrameMatrix& frames) {
    if (segments.segments.size() != clusters.size())
        throw Error("assign_roles: cluster labels do not match segment count");
    for (int c : clusters)
        if (c != 0 && c != 1) throw Error("assign_roles: expected exactly 2 clusters");

    std::array<std::vector<double>, 2> voiced;
    for (std::size_t f = 0; f < frames.values.rows(); ++f) {
        double f0 = frames.values(f, frames.f0_index);
        if (f0 <= 0.0) continue;
        TimeMs mid = frames.frame_mid_ms(f);
        for (std::size_t i = 0; i < segments.segments.size(); ++i) {
            const auto& s = segments.segments[i];
            if (mid >= s.start_ms && mid < s.end_ms()) {
                voiced[static_cast<std::size_t>(clusters[i])].push_back(f0);
                break;
            }
        }
    }

    RoleAssignment out;
    for (int c = 0; c < 2; ++c) {
        auto& v = voiced[static_cast<std::size_t>(c)];
        if (v.empty())
            throw Error("role assignment undetermined: cluster " + std::to_string(c) +
                        " has zero voiced frames");
        std::sort(v.begin(), v.end());
        std::size_t n = v.size();
        out.median_f0[static_cast<std::size_t>(c)] =
            n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    }

    int husband;
    if (out.median_f0[0] < out.median_f0[1]) {
        husband = 0;
    } else if (out.median_f0[1] < out.median_f0[0]) {
        husband = 1;
    } else {
        // equal medians: the cluster whose first segment starts earlier wins
        TimeMs first[2] = {std::numeric_limits<TimeMs>::max(), std::numeric_limits<TimeMs>::max()};
        for (std::size_t i = 0; i < segments.segments.size(); ++i)
            first[static_cast<std::size_t>(clusters[i])] =
                std::min(first[static_cast<std::size_t>(clusters[i])], segments.segments[i].start_ms);
        husband = first[0] <= first[1] ? 0 : 1;
        out.tie_warning = true;
    }
    out.role_of_cluster[static_cast<std::size_t>(husband)] = Role::Husband;
    out.role_of_cluster[static_cast<std::size_t>(1 - husband)] = Role::Wife;
    return out;
}

DiarizationResult diarize_session(const SegmentSet& segments,
                                  const std::vector<std::vector<double>>& embeddings,
                                  const FrameMatrix& frames, double p, std::uint64_t seed) {
    if (segments.segments.size() != embeddings.size())
        throw Error("diarize_session: embedding count does not match segment count");
    DiarizationResult res;
    res.p = p;
    Matrix a = prune_affinity(cosine_affinity(embeddings), p);
    res.clusters = spectral_cluster(a, 2, seed);
    res.roles = assign_roles(segments, res.clusters, frames);
    res.labeled.segments = segments.segments;
    for (std::size_t i = 0; i < res.labeled.segments.size(); ++i) {
        Role r = res.roles.role_of_cluster[static_cast<std::size_t>(res.clusters[i])];
        res.labeled.segments[i].speaker_tag = r == Role::Husband ? "H" : "W";
    }
    return res;
}

}  // namespace dyadrisk

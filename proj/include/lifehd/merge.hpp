#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "lifehd/memory.hpp"
#include "lifehd/rng.hpp"

namespace lifehd {

// Square row-major dense matrix; merge graphs stay at most a few hundred
// nodes, so dense everything.
struct Matrix {
    std::size_t n = 0;
    std::vector<double> a;

    Matrix() = default;
    explicit Matrix(std::size_t size) : n(size), a(size * size, 0.0) {}
    double& at(std::size_t i, std::size_t j) { return a[i * n + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

// Symmetric 0/1 adjacency with zero diagonal.
struct SimilarityGraph {
    std::size_t n = 0;
    std::vector<std::uint8_t> adj;  // row-major n*n
    double beta = 0.0;

    bool edge(std::size_t i, std::size_t j) const { return adj[i * n + j] != 0; }
};

// Adaptive threshold: mean of mu over the current working-memory entries,
// falling back to beta_default when the working memory is empty.
inline double compute_beta(const WorkingMemory& wm, double beta_default) {
    if (wm.empty()) return beta_default;
    double sum = 0.0;
    for (const auto& e : wm.entries()) sum += e.mu;
    return sum / static_cast<double>(wm.size());
}

// Edge between nodes i and j iff cosine(accum_i, accum_j) >= beta.
inline SimilarityGraph build_adjacency(const std::vector<const AccumHV*>& nodes, double beta) {
    if (nodes.size() < 2)
        throw std::invalid_argument("build_adjacency: need at least 2 entries");
    SimilarityGraph g;
    g.n = nodes.size();
    g.beta = beta;
    g.adj.assign(g.n * g.n, 0);
    for (std::size_t i = 0; i < g.n; ++i) {
        for (std::size_t j = i + 1; j < g.n; ++j) {
            if (cosine(*nodes[i], *nodes[j]) >= beta) {
                g.adj[i * g.n + j] = 1;
                g.adj[j * g.n + i] = 1;
            }
        }
    }
    return g;
}

inline SimilarityGraph build_adjacency(const LongTermMemory& ltm, double beta) {
    std::vector<const AccumHV*> nodes;
    nodes.reserve(ltm.size());
    for (const auto& e : ltm.entries()) nodes.push_back(&e.accum);
    return build_adjacency(nodes, beta);
}

// Unnormalized graph Laplacian W = degree - adjacency.
inline Matrix laplacian(const SimilarityGraph& g) {
    Matrix w(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        double degree = 0.0;
        for (std::size_t j = 0; j < g.n; ++j) {
            if (g.edge(i, j)) {
                degree += 1.0;
                w.at(i, j) = -1.0;
            }
        }
        w.at(i, i) = degree;
    }
    return w;
}

struct SpectralDecomposition {
    std::vector<double> eigenvalues;  // ascending
    Matrix eigenvectors;              // column i pairs with eigenvalues[i]
};

// Cyclic Jacobi eigendecomposition for symmetric matrices. Output order is
// ascending by eigenvalue (ties by pre-sort column index) and each
// eigenvector's first nonzero component is made positive, so the result is
// fully determined by the input.
inline SpectralDecomposition eig_sym(const Matrix& w) {
    const std::size_t n = w.n;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (w.at(i, j) != w.at(j, i))
                throw std::invalid_argument("eig_sym: matrix is not symmetric");

    Matrix a = w;
    Matrix v(n);
    for (std::size_t i = 0; i < n; ++i) v.at(i, i) = 1.0;

    double frob = 0.0;
    for (double x : a.a) frob += x * x;
    frob = std::sqrt(frob);
    const double tol = 1e-14 * std::max(1.0, frob);

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a.at(i, j) * a.at(i, j);
        if (std::sqrt(2.0 * off) <= tol) break;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a.at(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a.at(i, p), aiq = a.at(i, q);
                    a.at(i, p) = c * aip - s * aiq;
                    a.at(i, q) = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = a.at(p, i), aqi = a.at(q, i);
                    a.at(p, i) = c * api - s * aqi;
                    a.at(q, i) = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v.at(i, p), viq = v.at(i, q);
                    v.at(i, p) = c * vip - s * viq;
                    v.at(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        if (a.at(i, i) != a.at(j, j)) return a.at(i, i) < a.at(j, j);
        return i < j;
    });

    SpectralDecomposition d;
    d.eigenvalues.resize(n);
    d.eigenvectors = Matrix(n);
    for (std::size_t col = 0; col < n; ++col) {
        const std::size_t src = order[col];
        d.eigenvalues[col] = a.at(src, src);
        double flip = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(v.at(i, src)) > 1e-12) {
                flip = v.at(i, src) > 0.0 ? 1.0 : -1.0;
                break;
            }
        }
        for (std::size_t i = 0; i < n; ++i) d.eigenvectors.at(i, col) = flip * v.at(i, src);
    }
    return d;
}

// k = number of eigenvalues <= g_ub (ascending input), clamped to [1, n].
inline std::size_t choose_k(const SpectralDecomposition& d, double g_ub) {
    const std::size_t n = d.eigenvalues.size();
    std::size_t k = 0;
    for (double lambda : d.eigenvalues)
        if (lambda <= g_ub + 1e-9) ++k;
    if (k < 1) k = 1;
    if (k > n) k = n;
    return k;
}

namespace detail {

inline double dist2(const std::vector<double>& points, std::size_t dims, std::size_t i,
                    const std::vector<double>& center, std::size_t c) {
    double d = 0.0;
    for (std::size_t j = 0; j < dims; ++j) {
        const double diff = points[i * dims + j] - center[c * dims + j];
        d += diff * diff;
    }
    return d;
}

} // namespace detail

// Lloyd iterations over n points in `dims` dimensions (row-major), seeded
// with greedy farthest-point initialization. All ties break by lowest index.
inline std::vector<std::size_t> kmeans(const std::vector<double>& points, std::size_t n,
                                       std::size_t dims, std::size_t k, std::uint64_t seed) {
    if (k > n) throw std::invalid_argument("kmeans: k exceeds point count");
    if (k == 0) throw std::invalid_argument("kmeans: k must be positive");

    Rng rng(seed);
    std::vector<std::size_t> center_idx;
    center_idx.push_back(static_cast<std::size_t>(bounded(rng, n)));
    std::vector<double> min_d2(n, 0.0);
    std::vector<double> centers(k * dims, 0.0);
    auto copy_center = [&](std::size_t c, std::size_t point) {
        for (std::size_t j = 0; j < dims; ++j) centers[c * dims + j] = points[point * dims + j];
    };
    copy_center(0, center_idx[0]);
    while (center_idx.size() < k) {
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = detail::dist2(points, dims, i, centers, 0);
            for (std::size_t c = 1; c < center_idx.size(); ++c)
                best = std::min(best, detail::dist2(points, dims, i, centers, c));
            min_d2[i] = best;
            if (best > far_d) {
                far_d = best;
                far = i;
            }
        }
        copy_center(center_idx.size(), far);
        center_idx.push_back(far);
    }

    std::vector<std::size_t> assign(n, 0);
    double prev_inertia = -1.0;
    for (int iter = 0; iter < 100; ++iter) {
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best_c = 0;
            double best_d = detail::dist2(points, dims, i, centers, 0);
            for (std::size_t c = 1; c < k; ++c) {
                const double d = detail::dist2(points, dims, i, centers, c);
                if (d < best_d) {
                    best_d = d;
                    best_c = c;
                }
            }
            assign[i] = best_c;
            inertia += best_d;
        }

        // Re-seed empty clusters from the point farthest from its center.
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) ++counts[assign[i]];
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[assign[i]] <= 1) continue;
                const double d = detail::dist2(points, dims, i, centers, assign[i]);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            --counts[assign[far]];
            assign[far] = c;
            counts[c] = 1;
        }

        std::fill(centers.begin(), centers.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < dims; ++j) centers[assign[i] * dims + j] += points[i * dims + j];
        for (std::size_t c = 0; c < k; ++c)
            if (counts[c] > 0)
                for (std::size_t j = 0; j < dims; ++j)
                    centers[c * dims + j] /= static_cast<double>(counts[c]);

        if (prev_inertia >= 0.0 &&
            std::abs(prev_inertia - inertia) <= 1e-6 * std::max(prev_inertia, 1e-30))
            break;
        prev_inertia = inertia;
    }
    return assign;
}

// Takes the first k eigenvector columns as the n x k embedding.
inline std::vector<std::size_t> spectral_group(const SpectralDecomposition& d, std::size_t k,
                                               std::uint64_t kmeans_seed) {
    const std::size_t n = d.eigenvalues.size();
    if (k >= n) {
        std::vector<std::size_t> identity(n);
        std::iota(identity.begin(), identity.end(), 0);
        return identity;
    }
    std::vector<double> rows(n * k);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) rows[i * k + j] = d.eigenvectors.at(i, j);
    return kmeans(rows, n, k, kmeans_seed);
}

// Fuses each multi-member group of LTM entries into one supercluster:
// accumulators bundled, mu/sigma hit-weighted, hit summed, last_access maxed,
// fresh id. Working-memory links to the fused constituents dissolve.
inline void merge_groups(LongTermMemory& ltm, WorkingMemory& wm,
                         const std::vector<std::size_t>& assignment, EntryId& next_id) {
    const auto& old_entries = ltm.entries();
    if (assignment.size() != old_entries.size())
        throw std::invalid_argument("merge_groups: assignment does not cover memory");

    const std::size_t n = old_entries.size();
    std::size_t groups = 0;
    for (std::size_t g : assignment) groups = std::max(groups, g + 1);
    std::vector<std::vector<std::size_t>> members(groups);
    for (std::size_t i = 0; i < n; ++i) members[assignment[i]].push_back(i);

    std::vector<ClusterEntry> merged;
    merged.reserve(n);
    std::vector<bool> emitted(groups, false);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t g = assignment[i];
        if (emitted[g]) continue;
        emitted[g] = true;
        const auto& m = members[g];
        if (m.size() == 1) {
            merged.push_back(old_entries[i]);
            continue;
        }
        ClusterEntry super;
        super.id = next_id++;
        super.hit = 0;
        super.accum.v.assign(old_entries[i].accum.dim(), 0);
        double mu_mass = 0.0, sigma_mass = 0.0;
        for (std::size_t idx : m) {
            const ClusterEntry& e = old_entries[idx];
            for (std::size_t j = 0; j < super.accum.dim(); ++j) super.accum.v[j] += e.accum.v[j];
            super.accum.count += e.accum.count;
            super.hit += e.hit;
            super.last_access = std::max(super.last_access, e.last_access);
            mu_mass += static_cast<double>(e.hit) * e.mu;
            sigma_mass += static_cast<double>(e.hit) * e.sigma;
            if (ClusterEntry* w = wm.find(e.id)) w->consolidated = false;
        }
        super.accum.norm2 = 0;
        for (std::int32_t x : super.accum.v)
            super.accum.norm2 += static_cast<std::int64_t>(x) * x;
        super.mu = mu_mass / static_cast<double>(super.hit);
        super.sigma = sigma_mass / static_cast<double>(super.hit);
        merged.push_back(std::move(super));
    }
    ltm.entries() = std::move(merged);
}

struct MergeReport {
    bool ran = false;
    std::size_t nodes = 0;
    std::size_t k = 0;
    std::size_t merged_groups = 0;
    double beta = 0.0;
};

// Full plain-LifeHD merge pass over long-term memory.
inline MergeReport run_merge(LongTermMemory& ltm, WorkingMemory& wm, double g_ub, double beta,
                             std::uint64_t kmeans_seed, EntryId& next_id) {
    MergeReport report;
    if (ltm.size() < 2) return report;
    report.ran = true;
    report.nodes = ltm.size();
    report.beta = beta;

    const SimilarityGraph g = build_adjacency(ltm, beta);
    const SpectralDecomposition d = eig_sym(laplacian(g));
    report.k = choose_k(d, g_ub);
    if (report.k >= report.nodes) return report;

    const std::vector<std::size_t> assignment = spectral_group(d, report.k, kmeans_seed);
    const std::size_t before = ltm.size();
    merge_groups(ltm, wm, assignment, next_id);
    report.merged_groups = before - ltm.size();
    return report;
}

} // namespace lifehd

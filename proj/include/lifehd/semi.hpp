#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lifehd/hdcore.hpp"
#include "lifehd/memory.hpp"
#include "lifehd/merge.hpp"

namespace lifehd {

// Labeled class hypervectors: one entry per observed label, exempt from
// working-memory capacity and LRU forgetting, never merged with each other.
class LabeledPool {
public:
    std::vector<ClusterEntry>& entries() { return entries_; }
    const std::vector<ClusterEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    ClusterEntry* find_label(std::int32_t label) {
        for (auto& e : entries_)
            if (e.label == label) return &e;
        return nullptr;
    }
    ClusterEntry* find(EntryId id) {
        for (auto& e : entries_)
            if (e.id == id) return &e;
        return nullptr;
    }
    const ClusterEntry* find(EntryId id) const {
        for (const auto& e : entries_)
            if (e.id == id) return &e;
        return nullptr;
    }

private:
    std::vector<ClusterEntry> entries_;
};

// Moving-average statistics refresh shared by cluster and labeled updates.
// `sim` must be the similarity computed against the pre-update accumulator.
inline void update_entry_stats(ClusterEntry& entry, const BipolarHV& query, double sim,
                               double alpha, double sigma_floor, std::int64_t batch_idx) {
    bundle(entry.accum, query);
    entry.mu = (1.0 - alpha) * entry.mu + alpha * sim;
    const double s = (1.0 - alpha) * entry.sigma + alpha * std::abs(sim - entry.mu);
    entry.sigma = s < sigma_floor ? sigma_floor : s;
    entry.hit += 1;
    entry.last_access = batch_idx;
}

// Bundles an encoded labeled sample into its class hypervector, creating the
// class entry on first sight.
inline EntryId update_labeled(LabeledPool& pool, const BipolarHV& query, std::int32_t label,
                              std::int64_t batch_idx, double alpha, double sigma_init,
                              double sigma_floor, EntryId& next_id) {
    if (label < 0) throw std::invalid_argument("update_labeled: label must be >= 0");
    if (ClusterEntry* e = pool.find_label(label)) {
        const double sim = cosine(query, e->accum);
        update_entry_stats(*e, query, sim, alpha, sigma_floor, batch_idx);
        return e->id;
    }
    pool.entries().push_back(make_entry(next_id++, query, batch_idx, sigma_init, label));
    return pool.entries().back().id;
}

// Adjacency over labeled entries (first) followed by long-term entries, with
// the labeled-labeled block forced to zero so labeled hypervectors never
// merge with each other.
inline SimilarityGraph build_adjacency_semi(const LabeledPool& pool, const LongTermMemory& ltm,
                                            double beta) {
    std::vector<const AccumHV*> nodes;
    nodes.reserve(pool.size() + ltm.size());
    for (const auto& e : pool.entries()) nodes.push_back(&e.accum);
    for (const auto& e : ltm.entries()) nodes.push_back(&e.accum);
    SimilarityGraph g = build_adjacency(nodes, beta);
    for (std::size_t i = 0; i < pool.size(); ++i)
        for (std::size_t j = 0; j < pool.size(); ++j) g.adj[i * g.n + j] = 0;
    return g;
}

// Most similar class hypervector; ties break by lowest label.
inline std::optional<std::int32_t> infer_supervised(const BipolarHV& query,
                                                    const LabeledPool& pool) {
    std::optional<std::int32_t> best_label;
    double best_sim = 0.0;
    for (const auto& e : pool.entries()) {
        const double s = cosine(query, e.accum);
        if (!best_label || s > best_sim || (s == best_sim && e.label < *best_label)) {
            best_label = e.label;
            best_sim = s;
        }
    }
    return best_label;
}

namespace detail {

// Absorbs long-term entries into a labeled anchor: accumulators bundled,
// stats hit-weighted over anchor plus absorbed members. The anchor keeps its
// id and label.
inline void absorb_into_labeled(ClusterEntry& anchor, const std::vector<const ClusterEntry*>& absorbed) {
    double mu_mass = static_cast<double>(anchor.hit) * anchor.mu;
    double sigma_mass = static_cast<double>(anchor.hit) * anchor.sigma;
    std::int64_t hit = anchor.hit;
    for (const ClusterEntry* e : absorbed) {
        for (std::size_t j = 0; j < anchor.accum.dim(); ++j) anchor.accum.v[j] += e->accum.v[j];
        anchor.accum.count += e->accum.count;
        hit += e->hit;
        anchor.last_access = std::max(anchor.last_access, e->last_access);
        mu_mass += static_cast<double>(e->hit) * e->mu;
        sigma_mass += static_cast<double>(e->hit) * e->sigma;
    }
    anchor.accum.norm2 = 0;
    for (std::int32_t x : anchor.accum.v)
        anchor.accum.norm2 += static_cast<std::int64_t>(x) * x;
    anchor.hit = hit;
    anchor.mu = mu_mass / static_cast<double>(hit);
    anchor.sigma = sigma_mass / static_cast<double>(hit);
}

} // namespace detail

// Applies a spectral grouping over (labeled + long-term) nodes. Groups made
// only of long-term entries fuse as in merge_groups; a group with exactly
// one labeled entry collapses into that entry (the label anchors the
// supercluster); with several labeled entries, each unlabeled member joins
// its most similar anchor so no supercluster ever carries two labels.
inline void merge_groups_semi(LabeledPool& pool, LongTermMemory& ltm, WorkingMemory& wm,
                              const std::vector<std::size_t>& assignment, EntryId& next_id) {
    if (pool.empty()) {
        merge_groups(ltm, wm, assignment, next_id);
        return;
    }
    const std::size_t j_count = pool.size();
    const std::size_t n = j_count + ltm.size();
    if (assignment.size() != n)
        throw std::invalid_argument("merge_groups_semi: assignment does not cover nodes");

    std::size_t groups = 0;
    for (std::size_t g : assignment) groups = std::max(groups, g + 1);

    std::vector<std::vector<std::size_t>> labeled_members(groups), ltm_members(groups);
    for (std::size_t i = 0; i < n; ++i) {
        if (i < j_count)
            labeled_members[assignment[i]].push_back(i);
        else
            ltm_members[assignment[i]].push_back(i - j_count);
    }

    std::vector<bool> absorbed(ltm.size(), false);
    // LTM-only groups become an in-place merge_groups pass afterwards; track
    // a group id per retained entry.
    std::vector<std::size_t> ltm_only_assignment(ltm.size(), 0);

    for (std::size_t g = 0; g < groups; ++g) {
        const auto& anchors = labeled_members[g];
        const auto& members = ltm_members[g];
        if (anchors.empty()) continue;
        if (members.empty()) continue;

        if (anchors.size() == 1) {
            std::vector<const ClusterEntry*> eaten;
            for (std::size_t m : members) {
                eaten.push_back(&ltm.entries()[m]);
                absorbed[m] = true;
                if (ClusterEntry* w = wm.find(ltm.entries()[m].id)) w->consolidated = false;
            }
            detail::absorb_into_labeled(pool.entries()[anchors[0]], eaten);
            continue;
        }

        // Several anchors in one spectral group: split the unlabeled members
        // among them by similarity (ties to the lowest anchor id).
        std::vector<std::vector<const ClusterEntry*>> share(anchors.size());
        for (std::size_t m : members) {
            const ClusterEntry& cand = ltm.entries()[m];
            std::size_t best = 0;
            double best_sim = cosine(cand.accum, pool.entries()[anchors[0]].accum);
            for (std::size_t a = 1; a < anchors.size(); ++a) {
                const double s = cosine(cand.accum, pool.entries()[anchors[a]].accum);
                const EntryId id_a = pool.entries()[anchors[a]].id;
                const EntryId id_b = pool.entries()[anchors[best]].id;
                if (s > best_sim || (s == best_sim && id_a < id_b)) {
                    best_sim = s;
                    best = a;
                }
            }
            share[best].push_back(&cand);
            absorbed[m] = true;
            if (ClusterEntry* w = wm.find(cand.id)) w->consolidated = false;
        }
        for (std::size_t a = 0; a < anchors.size(); ++a)
            if (!share[a].empty()) detail::absorb_into_labeled(pool.entries()[anchors[a]], share[a]);
    }

    // Drop absorbed long-term entries, then fuse the remaining LTM-only
    // groups exactly as the unlabeled pipeline would.
    std::vector<ClusterEntry> kept;
    std::vector<std::size_t> kept_groups;
    for (std::size_t m = 0; m < ltm.entries().size(); ++m) {
        if (absorbed[m]) continue;
        kept.push_back(ltm.entries()[m]);
        kept_groups.push_back(assignment[j_count + m]);
    }
    // Compact group ids to a dense range for merge_groups.
    std::vector<std::size_t> remap(groups, SIZE_MAX);
    std::size_t dense = 0;
    for (std::size_t& g : kept_groups) {
        if (remap[g] == SIZE_MAX) remap[g] = dense++;
        g = remap[g];
    }
    ltm.entries() = std::move(kept);
    if (!ltm.entries().empty()) merge_groups(ltm, wm, kept_groups, next_id);
}

// Full semi merge pass; with an empty labeled pool this is exactly the plain
// merge pass.
inline MergeReport run_merge_semi(LabeledPool& pool, LongTermMemory& ltm, WorkingMemory& wm,
                                  double g_ub, double beta, std::uint64_t kmeans_seed,
                                  EntryId& next_id) {
    MergeReport report;
    const std::size_t n = pool.size() + ltm.size();
    if (n < 2) return report;
    report.ran = true;
    report.nodes = n;
    report.beta = beta;

    const SimilarityGraph g = build_adjacency_semi(pool, ltm, beta);
    const SpectralDecomposition d = eig_sym(laplacian(g));
    report.k = choose_k(d, g_ub);
    if (report.k >= n) return report;

    const std::vector<std::size_t> assignment = spectral_group(d, report.k, kmeans_seed);
    const std::size_t before = pool.size() + ltm.size();
    merge_groups_semi(pool, ltm, wm, assignment, next_id);
    report.merged_groups = before - (pool.size() + ltm.size());
    return report;
}

} // namespace lifehd

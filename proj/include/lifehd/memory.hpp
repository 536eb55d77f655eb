#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lifehd/hdcore.hpp"

namespace lifehd {

using EntryId = std::int64_t;
inline constexpr EntryId kNoEntry = -1;

inline constexpr double kDefaultSigmaInit = 0.05;
inline constexpr double kDefaultSigmaFloor = 0.01;

// A cluster hypervector with its running statistics. The same record type is
// stored in both memory tiers; `consolidated` marks a working-memory entry
// whose copy (same id) lives in long-term memory and receives write-through
// updates.
struct ClusterEntry {
    EntryId id = kNoEntry;
    AccumHV accum;
    double mu = 1.0;             // running mean similarity
    double sigma = kDefaultSigmaInit;  // running mean absolute deviation
    std::int64_t hit = 1;
    std::int64_t last_access = 0;
    bool consolidated = false;
    std::int32_t label = -1;     // >= 0 only for labeled class hypervectors
};

// Capacity-bounded ordered collection of ClusterEntry. Exhaustive scans are
// intentional: capacities stay in the tens.
class MemoryTier {
public:
    MemoryTier() = default;
    explicit MemoryTier(std::size_t capacity) : capacity_(capacity) {}

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    bool full() const { return entries_.size() >= capacity_; }

    std::vector<ClusterEntry>& entries() { return entries_; }
    const std::vector<ClusterEntry>& entries() const { return entries_; }

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

    // Removes the entry with minimal last_access; ties break by lowest id.
    EntryId evict_lru() {
        if (entries_.empty()) throw std::runtime_error("evict_lru: memory is empty");
        std::size_t victim = 0;
        for (std::size_t i = 1; i < entries_.size(); ++i) {
            const auto& e = entries_[i];
            const auto& best = entries_[victim];
            if (e.last_access < best.last_access ||
                (e.last_access == best.last_access && e.id < best.id))
                victim = i;
        }
        const EntryId id = entries_[victim].id;
        entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(victim));
        return id;
    }

    void remove(EntryId id) {
        entries_.erase(std::remove_if(entries_.begin(), entries_.end(),
                                      [id](const ClusterEntry& e) { return e.id == id; }),
                       entries_.end());
    }

    // Appends, evicting the LRU entry first when at capacity. Returns the id
    // of the evicted entry, if any.
    std::optional<EntryId> push(ClusterEntry entry) {
        std::optional<EntryId> evicted;
        if (full()) evicted = evict_lru();
        entries_.push_back(std::move(entry));
        return evicted;
    }

private:
    std::size_t capacity_ = 0;
    std::vector<ClusterEntry> entries_;
};

using WorkingMemory = MemoryTier;
using LongTermMemory = MemoryTier;

struct NearestResult {
    EntryId id = kNoEntry;
    double similarity = 0.0;
};

// Argmax of `sim_fn` over the tier; ties break by lowest entry id. Empty
// memory yields nullopt so the caller can insert a novelty.
template <typename SimFn>
std::optional<NearestResult> nearest_by(const MemoryTier& mem, SimFn&& sim_fn) {
    std::optional<NearestResult> best;
    for (const auto& e : mem.entries()) {
        const double s = sim_fn(e);
        if (!best || s > best->similarity || (s == best->similarity && e.id < best->id))
            best = NearestResult{e.id, s};
    }
    return best;
}

inline std::optional<NearestResult> nearest(const BipolarHV& query, const MemoryTier& mem) {
    return nearest_by(mem, [&](const ClusterEntry& e) { return cosine(query, e.accum); });
}

// Creates a fresh working-memory entry for a novel query.
inline ClusterEntry make_entry(EntryId id, const BipolarHV& query, std::int64_t batch_idx,
                               double sigma_init = kDefaultSigmaInit, std::int32_t label = -1) {
    ClusterEntry e;
    e.id = id;
    e.accum = AccumHV(query);
    e.mu = 1.0;
    e.sigma = sigma_init;
    e.hit = 1;
    e.last_access = batch_idx;
    e.label = label;
    return e;
}

// Inserts a novel query into working memory (LRU eviction if full).
inline EntryId insert(const BipolarHV& query, std::int64_t batch_idx, WorkingMemory& wm,
                      EntryId id, double sigma_init = kDefaultSigmaInit) {
    wm.push(make_entry(id, query, batch_idx, sigma_init));
    return id;
}

// First crossing of hit_th copies the entry into long-term memory under the
// same id; later crossings are no-ops while the flag stays set. Returns the
// id of an LTM entry displaced by the copy, if any.
struct ConsolidateResult {
    bool consolidated = false;
    std::optional<EntryId> ltm_evicted;
};

inline ConsolidateResult consolidate(ClusterEntry& wm_entry, LongTermMemory& ltm,
                                     std::int64_t hit_th) {
    ConsolidateResult r;
    if (wm_entry.consolidated || wm_entry.hit < hit_th) return r;
    wm_entry.consolidated = true;
    ClusterEntry copy = wm_entry;
    r.ltm_evicted = ltm.push(std::move(copy));
    r.consolidated = true;
    return r;
}

// Propagates a working-memory update to the linked long-term copy.
inline void write_through(const ClusterEntry& wm_entry, LongTermMemory& ltm) {
    if (!wm_entry.consolidated) return;
    if (ClusterEntry* l = ltm.find(wm_entry.id)) {
        l->accum = wm_entry.accum;
        l->mu = wm_entry.mu;
        l->sigma = wm_entry.sigma;
        l->hit = wm_entry.hit;
        l->last_access = wm_entry.last_access;
    }
}

} // namespace lifehd

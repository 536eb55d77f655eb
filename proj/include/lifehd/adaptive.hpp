#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "lifehd/hdcore.hpp"
#include "lifehd/memory.hpp"

namespace lifehd {

// The D_a dimension indices whose aggregate long-term-memory magnitude is
// largest. Only similarity computations look through the mask; accumulators
// always keep all D dimensions.
struct DimensionMask {
    std::vector<std::int32_t> selected;  // ascending
    std::int64_t built_at = -1;
    bool active = false;
};

// Sum all LTM accumulators element-wise and keep the D_a indices with the
// largest absolute aggregate value; ties prefer the lower index.
inline DimensionMask compute_mask(const LongTermMemory& ltm, std::size_t d_a) {
    if (ltm.empty()) throw std::invalid_argument("compute_mask: long-term memory is empty");
    const std::size_t dim = ltm.entries().front().accum.dim();
    if (d_a == 0 || d_a > dim)
        throw std::invalid_argument("compute_mask: mask size must be in [1, D]");

    std::vector<std::int64_t> aggregate(dim, 0);
    for (const auto& e : ltm.entries())
        for (std::size_t i = 0; i < dim; ++i) aggregate[i] += e.accum.v[i];

    std::vector<std::int32_t> idx(dim);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::int32_t a, std::int32_t b) {
        const std::int64_t ma = std::abs(aggregate[a]), mb = std::abs(aggregate[b]);
        if (ma != mb) return ma > mb;
        return a < b;
    });
    DimensionMask mask;
    mask.selected.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(d_a));
    std::sort(mask.selected.begin(), mask.selected.end());
    return mask;
}

// Cosine restricted to the selected dimensions; norms are taken over the
// selected dimensions only.
inline double masked_cosine(const BipolarHV& a, const AccumHV& b,
                            const std::vector<std::int32_t>& selected) {
    check_same_dim(a.dim(), b.dim(), "masked_cosine");
    std::int64_t dot = 0, n2b = 0;
    for (std::int32_t i : selected) {
        dot += static_cast<std::int64_t>(a.v[i]) * b.v[i];
        n2b += static_cast<std::int64_t>(b.v[i]) * b.v[i];
    }
    return detail::cosine_from(dot, static_cast<std::int64_t>(selected.size()), n2b);
}

// Packed per-entry copies of the selected dimensions, so a masked similarity
// scan touches D_a contiguous values instead of gathering from all D. The
// owner invalidates ids whose accumulator changed; a mask rebuild clears all.
class MaskedScanCache {
public:
    void clear() { packed_.clear(); }
    void erase(EntryId id) { packed_.erase(id); }

    double similarity(const BipolarHV& query, const ClusterEntry& entry,
                      const std::vector<std::int32_t>& selected) {
        Packed& p = packed_[entry.id];
        if (p.vals.size() != selected.size()) build(p, entry, selected);
        std::int64_t dot = 0;
        const std::int8_t* q = query.v.data();
        for (std::size_t j = 0; j < selected.size(); ++j)
            dot += static_cast<std::int64_t>(q[selected[j]]) * p.vals[j];
        return detail::cosine_from(dot, static_cast<std::int64_t>(selected.size()), p.norm2);
    }

private:
    struct Packed {
        std::vector<std::int32_t> vals;
        std::int64_t norm2 = 0;
    };

    static void build(Packed& p, const ClusterEntry& entry,
                      const std::vector<std::int32_t>& selected) {
        p.vals.resize(selected.size());
        p.norm2 = 0;
        for (std::size_t j = 0; j < selected.size(); ++j) {
            const std::int32_t x = entry.accum.v[selected[j]];
            p.vals[j] = x;
            p.norm2 += static_cast<std::int64_t>(x) * x;
        }
    }

    std::unordered_map<EntryId, Packed> packed_;
};

} // namespace lifehd

#pragma once

#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "lifehd/memory.hpp"

namespace lifehd {

// Versioned text snapshot of the two memory tiers, for checkpoint/resume.
// Format (one token stream, whitespace separated):
//   lifehd-snapshot 1
//   dim <D> next_id <id>
//   wm <capacity> <count>
//     entry <id> <label> <consolidated> <hit> <last_access> <mu> <sigma>
//           <count> <D accumulator values>
//   ltm <capacity> <count>
//     ... entries ...
// Doubles are written with max_digits10 so reloading is value-exact.

namespace detail {

inline void write_entry(std::ostream& os, const ClusterEntry& e) {
    os << "entry " << e.id << ' ' << e.label << ' ' << (e.consolidated ? 1 : 0) << ' ' << e.hit
       << ' ' << e.last_access << ' ' << e.mu << ' ' << e.sigma << ' ' << e.accum.count;
    for (std::int32_t x : e.accum.v) os << ' ' << x;
    os << '\n';
}

inline ClusterEntry read_entry(std::istream& is, std::size_t dim) {
    std::string tag;
    if (!(is >> tag) || tag != "entry")
        throw std::runtime_error("snapshot: expected 'entry', got '" + tag + "'");
    ClusterEntry e;
    int consolidated = 0;
    if (!(is >> e.id >> e.label >> consolidated >> e.hit >> e.last_access >> e.mu >> e.sigma >>
          e.accum.count))
        throw std::runtime_error("snapshot: truncated entry header");
    e.consolidated = consolidated != 0;
    e.accum.v.resize(dim);
    e.accum.norm2 = 0;
    for (std::size_t i = 0; i < dim; ++i) {
        if (!(is >> e.accum.v[i])) throw std::runtime_error("snapshot: truncated accumulator");
        e.accum.norm2 += static_cast<std::int64_t>(e.accum.v[i]) * e.accum.v[i];
    }
    return e;
}

inline void write_tier(std::ostream& os, const char* name, const MemoryTier& tier) {
    os << name << ' ' << tier.capacity() << ' ' << tier.size() << '\n';
    for (const auto& e : tier.entries()) write_entry(os, e);
}

inline MemoryTier read_tier(std::istream& is, const char* name, std::size_t dim) {
    std::string tag;
    std::size_t capacity = 0, count = 0;
    if (!(is >> tag >> capacity >> count) || tag != name)
        throw std::runtime_error(std::string("snapshot: expected '") + name + "' section");
    MemoryTier tier(capacity);
    for (std::size_t i = 0; i < count; ++i) tier.entries().push_back(read_entry(is, dim));
    return tier;
}

} // namespace detail

struct MemorySnapshot {
    std::size_t dim = 0;
    EntryId next_id = 0;
    WorkingMemory wm;
    LongTermMemory ltm;
};

inline void save_snapshot(std::ostream& os, const MemorySnapshot& s) {
    os.precision(std::numeric_limits<double>::max_digits10);
    os << "lifehd-snapshot 1\n";
    os << "dim " << s.dim << " next_id " << s.next_id << '\n';
    detail::write_tier(os, "wm", s.wm);
    detail::write_tier(os, "ltm", s.ltm);
}

inline MemorySnapshot load_snapshot(std::istream& is) {
    std::string magic;
    int version = 0;
    if (!(is >> magic >> version) || magic != "lifehd-snapshot")
        throw std::runtime_error("snapshot: not a lifehd snapshot");
    if (version != 1)
        throw std::runtime_error("snapshot: unsupported version " + std::to_string(version));
    MemorySnapshot s;
    std::string tag;
    if (!(is >> tag >> s.dim) || tag != "dim") throw std::runtime_error("snapshot: missing dim");
    if (!(is >> tag >> s.next_id) || tag != "next_id")
        throw std::runtime_error("snapshot: missing next_id");
    s.wm = detail::read_tier(is, "wm", s.dim);
    s.ltm = detail::read_tier(is, "ltm", s.dim);
    return s;
}

} // namespace lifehd

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lifehd/rng.hpp"

namespace lifehd {

// Dimension-D bipolar hypervector: every entry is exactly +1 or -1.
struct BipolarHV {
    std::vector<std::int8_t> v;

    BipolarHV() = default;
    explicit BipolarHV(std::size_t dim, std::int8_t fill = 1) : v(dim, fill) {}

    std::size_t dim() const { return v.size(); }
    std::int8_t operator[](std::size_t i) const { return v[i]; }
    std::int8_t& operator[](std::size_t i) { return v[i]; }
    bool operator==(const BipolarHV& o) const { return v == o.v; }
};

// Integer bundling accumulator for a set of bipolar hypervectors.
// norm2 is maintained incrementally: norm2 == sum(v[i]^2) at all times.
struct AccumHV {
    std::vector<std::int32_t> v;
    std::int64_t count = 0;
    std::int64_t norm2 = 0;

    AccumHV() = default;
    explicit AccumHV(const BipolarHV& x)
        : v(x.v.begin(), x.v.end()), count(1), norm2(static_cast<std::int64_t>(x.dim())) {}

    std::size_t dim() const { return v.size(); }
    bool operator==(const AccumHV& o) const {
        return v == o.v && count == o.count;
    }
};

inline void check_same_dim(std::size_t a, std::size_t b, const char* op) {
    if (a != b) throw std::invalid_argument(std::string(op) + ": dimension mismatch");
}

inline BipolarHV random_hv(std::size_t dim, Rng& rng) {
    BipolarHV out(dim);
    for (std::size_t i = 0; i < dim; ++i) out.v[i] = random_bipolar(rng);
    return out;
}

// Element-wise multiplication.
inline BipolarHV bind(const BipolarHV& a, const BipolarHV& b) {
    check_same_dim(a.dim(), b.dim(), "bind");
    BipolarHV out(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i)
        out.v[i] = static_cast<std::int8_t>(a.v[i] * b.v[i]);
    return out;
}

// Element-wise addition into the accumulator.
inline void bundle(AccumHV& acc, const BipolarHV& x) {
    check_same_dim(acc.dim(), x.dim(), "bundle");
    std::int64_t dot = 0;
    for (std::size_t i = 0; i < acc.dim(); ++i) {
        dot += static_cast<std::int64_t>(acc.v[i]) * x.v[i];
        acc.v[i] += x.v[i];
    }
    // norm2' = sum((a_i + x_i)^2) = norm2 + 2*<a,x> + D since x_i^2 == 1.
    acc.norm2 += 2 * dot + static_cast<std::int64_t>(acc.dim());
    acc.count += 1;
}

// Cyclic shift: result[(i + shift) mod D] = x[i]. Negative shifts rotate back.
inline BipolarHV permute(const BipolarHV& x, std::int64_t shift) {
    const std::int64_t d = static_cast<std::int64_t>(x.dim());
    if (d == 0) return x;
    std::int64_t s = shift % d;
    if (s < 0) s += d;
    BipolarHV out(x.dim());
    for (std::int64_t i = 0; i < d; ++i)
        out.v[(i + s) % d] = x.v[i];
    return out;
}

// Round an accumulator to bipolar; the zero tie maps to +1.
inline BipolarHV sign_of(const AccumHV& acc) {
    BipolarHV out(acc.dim());
    for (std::size_t i = 0; i < acc.dim(); ++i)
        out.v[i] = acc.v[i] >= 0 ? std::int8_t{1} : std::int8_t{-1};
    return out;
}

inline std::size_t hamming(const BipolarHV& a, const BipolarHV& b) {
    check_same_dim(a.dim(), b.dim(), "hamming");
    std::size_t h = 0;
    for (std::size_t i = 0; i < a.dim(); ++i) h += a.v[i] != b.v[i];
    return h;
}

namespace detail {

inline double cosine_from(std::int64_t dot, std::int64_t n2a, std::int64_t n2b) {
    if (n2a == 0 || n2b == 0)
        throw std::invalid_argument("cosine: zero vector");
    return static_cast<double>(dot) /
           (std::sqrt(static_cast<double>(n2a)) * std::sqrt(static_cast<double>(n2b)));
}

} // namespace detail

// Cosine similarity. Dots and squared norms are exact 64-bit integers, so the
// result does not depend on summation order.
inline double cosine(const BipolarHV& a, const BipolarHV& b) {
    check_same_dim(a.dim(), b.dim(), "cosine");
    if (a.dim() == 0) throw std::invalid_argument("cosine: zero vector");
    std::int64_t dot = 0;
    for (std::size_t i = 0; i < a.dim(); ++i)
        dot += static_cast<std::int64_t>(a.v[i]) * b.v[i];
    const auto d = static_cast<std::int64_t>(a.dim());
    return detail::cosine_from(dot, d, d);
}

inline double cosine(const BipolarHV& a, const AccumHV& b) {
    check_same_dim(a.dim(), b.dim(), "cosine");
    std::int64_t dot = 0;
    for (std::size_t i = 0; i < a.dim(); ++i)
        dot += static_cast<std::int64_t>(a.v[i]) * b.v[i];
    return detail::cosine_from(dot, static_cast<std::int64_t>(a.dim()), b.norm2);
}

inline double cosine(const AccumHV& a, const AccumHV& b) {
    check_same_dim(a.dim(), b.dim(), "cosine");
    std::int64_t dot = 0;
    for (std::size_t i = 0; i < a.dim(); ++i)
        dot += static_cast<std::int64_t>(a.v[i]) * b.v[i];
    return detail::cosine_from(dot, a.norm2, b.norm2);
}

} // namespace lifehd

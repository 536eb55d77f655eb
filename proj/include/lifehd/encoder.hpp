#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lifehd/hdcore.hpp"
#include "lifehd/rng.hpp"

namespace lifehd {

struct FeatureRange {
    double min = 0.0;
    double max = 1.0;
};

struct EncoderConfig {
    std::size_t dim = 1000;            // D
    std::size_t levels = 5;            // Q
    double flip_fraction = 0.01;       // P
    std::size_t features = 1;          // d
    std::size_t window = 1;            // T
    std::uint64_t seed = 0;
    std::vector<FeatureRange> ranges;  // one per feature

    void validate() const {
        if (dim < 1) throw std::invalid_argument("encoder: dim must be >= 1");
        if (levels < 2) throw std::invalid_argument("encoder: levels must be >= 2");
        if (!(flip_fraction > 0.0 && flip_fraction < 0.5))
            throw std::invalid_argument("encoder: flip_fraction must be in (0, 0.5)");
        if (features < 1) throw std::invalid_argument("encoder: features must be >= 1");
        if (window < 1) throw std::invalid_argument("encoder: window must be >= 1");
        for (std::size_t i = 0; i < ranges.size(); ++i) {
            if (!(ranges[i].min < ranges[i].max))
                throw std::invalid_argument("encoder: range min must be < max for feature " +
                                            std::to_string(i));
        }
    }
};

// Level hypervectors (one per quantization bin, adjacent levels differ in
// exactly floor(P*D) positions) and ID hypervectors (one random draw per
// feature channel).
struct EncoderTables {
    std::vector<BipolarHV> level_hvs;
    std::vector<BipolarHV> id_hvs;
};

inline EncoderTables gen_tables(const EncoderConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    EncoderTables t;
    t.level_hvs.reserve(cfg.levels);
    t.level_hvs.push_back(random_hv(cfg.dim, rng));
    const std::size_t flips =
        static_cast<std::size_t>(std::floor(cfg.flip_fraction * static_cast<double>(cfg.dim)));
    for (std::size_t q = 1; q < cfg.levels; ++q) {
        BipolarHV next = t.level_hvs.back();
        for (std::size_t idx : sample_without_replacement(cfg.dim, flips, rng))
            next.v[idx] = static_cast<std::int8_t>(-next.v[idx]);
        t.level_hvs.push_back(std::move(next));
    }
    t.id_hvs.reserve(cfg.features);
    for (std::size_t i = 0; i < cfg.features; ++i)
        t.id_hvs.push_back(random_hv(cfg.dim, rng));
    return t;
}

// Equal-width bins over [min, max]; out-of-range values clamp to the
// boundary bins.
inline std::size_t quantize(double x, std::size_t feature, const EncoderConfig& cfg) {
    if (!std::isfinite(x))
        throw std::invalid_argument("quantize: non-finite input for feature " +
                                    std::to_string(feature));
    if (feature >= cfg.ranges.size())
        throw std::invalid_argument("quantize: no range configured for feature " +
                                    std::to_string(feature));
    const FeatureRange& r = cfg.ranges[feature];
    const double width = (r.max - r.min) / static_cast<double>(cfg.levels);
    if (x <= r.min) return 0;
    if (x >= r.max) return cfg.levels - 1;
    auto bin = static_cast<std::size_t>((x - r.min) / width);
    return bin >= cfg.levels ? cfg.levels - 1 : bin;
}

// sign( sum_i bind(id_i, level(quantize(x_i))) )
inline BipolarHV encode_timestep(std::span<const double> readings, const EncoderTables& tables,
                                 const EncoderConfig& cfg) {
    if (readings.size() != cfg.features)
        throw std::invalid_argument("encode_timestep: expected " + std::to_string(cfg.features) +
                                    " readings, got " + std::to_string(readings.size()));
    AccumHV acc;
    acc.v.assign(cfg.dim, 0);
    for (std::size_t i = 0; i < cfg.features; ++i) {
        const BipolarHV& level = tables.level_hvs[quantize(readings[i], i, cfg)];
        const BipolarHV& id = tables.id_hvs[i];
        for (std::size_t k = 0; k < cfg.dim; ++k)
            acc.v[k] += static_cast<std::int32_t>(id.v[k]) * level.v[k];
    }
    BipolarHV out(cfg.dim);
    for (std::size_t k = 0; k < cfg.dim; ++k)
        out.v[k] = acc.v[k] >= 0 ? std::int8_t{1} : std::int8_t{-1};
    return out;
}

// bind over timesteps tau = 1..T of permute(encode_timestep(x_tau), tau).
inline BipolarHV encode_window(std::span<const double> window_data, const EncoderTables& tables,
                               const EncoderConfig& cfg) {
    if (window_data.size() != cfg.window * cfg.features)
        throw std::invalid_argument("encode_window: expected " +
                                    std::to_string(cfg.window * cfg.features) + " values, got " +
                                    std::to_string(window_data.size()));
    BipolarHV out;
    for (std::size_t t = 0; t < cfg.window; ++t) {
        BipolarHV step = encode_timestep(window_data.subspan(t * cfg.features, cfg.features),
                                         tables, cfg);
        step = permute(step, static_cast<std::int64_t>(t) + 1);
        out = (t == 0) ? std::move(step) : bind(out, step);
    }
    return out;
}

// Ingestion path for precomputed feature vectors: a window of length one.
inline BipolarHV encode_features(std::span<const double> features, const EncoderTables& tables,
                                 const EncoderConfig& cfg) {
    if (cfg.window != 1)
        throw std::invalid_argument("encode_features: config window must be 1");
    return encode_window(features, tables, cfg);
}

// Front end used by the run loop: either the table encoder above, or a
// passthrough for streams that are already hypervectors (synthetic data).
class FeatureEncoder {
public:
    static FeatureEncoder table_encoder(EncoderConfig cfg) {
        FeatureEncoder e;
        e.cfg_ = std::move(cfg);
        e.tables_ = gen_tables(e.cfg_);
        e.passthrough_ = false;
        return e;
    }

    static FeatureEncoder passthrough(std::size_t dim) {
        FeatureEncoder e;
        e.cfg_.dim = dim;
        e.cfg_.features = dim;
        e.passthrough_ = true;
        return e;
    }

    BipolarHV encode(std::span<const double> sample) const {
        if (passthrough_) {
            if (sample.size() != cfg_.dim)
                throw std::invalid_argument("passthrough encode: dimension mismatch");
            BipolarHV out(cfg_.dim);
            for (std::size_t i = 0; i < cfg_.dim; ++i)
                out.v[i] = sample[i] >= 0.0 ? std::int8_t{1} : std::int8_t{-1};
            return out;
        }
        return encode_window(sample, tables_, cfg_);
    }

    std::size_t dim() const { return cfg_.dim; }
    bool is_passthrough() const { return passthrough_; }
    const EncoderConfig& config() const { return cfg_; }
    const EncoderTables& tables() const { return tables_; }

private:
    EncoderConfig cfg_;
    EncoderTables tables_;
    bool passthrough_ = false;
};

} // namespace lifehd

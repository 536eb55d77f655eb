#pragma once

#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lifehd/adaptive.hpp"
#include "lifehd/hdcore.hpp"
#include "lifehd/memory.hpp"
#include "lifehd/merge.hpp"
#include "lifehd/rng.hpp"
#include "lifehd/semi.hpp"
#include "lifehd/snapshot.hpp"

namespace lifehd {

enum class Mode { unsupervised, semi, supervised, adaptive };

inline const char* mode_name(Mode m) {
    switch (m) {
        case Mode::unsupervised: return "unsupervised";
        case Mode::semi: return "semi";
        case Mode::supervised: return "supervised";
        case Mode::adaptive: return "adaptive";
    }
    return "?";
}

struct LearnerConfig {
    double gamma = 3.0;            // novelty sensitivity
    double alpha = 0.1;            // moving-average rate
    std::int64_t hit_th = 10;      // consolidation threshold
    std::int64_t f_merge = 25;     // merge period in batches
    double g_ub = 0.2;             // merge eigenvalue upper bound
    std::size_t batch_size = 32;
    std::size_t wm_capacity = 50;  // M
    std::size_t ltm_capacity = 50; // L
    double sigma_init = kDefaultSigmaInit;
    double sigma_floor = kDefaultSigmaFloor;
    double beta_default = 0.5;

    void validate() const {
        if (!(alpha > 0.0 && alpha <= 1.0))
            throw std::invalid_argument("learner: alpha must be in (0, 1]");
        if (gamma < 0.0) throw std::invalid_argument("learner: gamma must be >= 0");
        if (f_merge < 1) throw std::invalid_argument("learner: f_merge must be >= 1");
        if (!(g_ub > 0.0)) throw std::invalid_argument("learner: g_ub must be > 0");
        if (batch_size < 1) throw std::invalid_argument("learner: batch size must be >= 1");
        if (wm_capacity < 1 || ltm_capacity < 1)
            throw std::invalid_argument("learner: memory capacities must be >= 1");
        if (hit_th < 1) throw std::invalid_argument("learner: hit_th must be >= 1");
        if (!(sigma_floor > 0.0) || sigma_init < sigma_floor)
            throw std::invalid_argument("learner: need sigma_init >= sigma_floor > 0");
    }
};

// Eq-style novelty test: novel iff sim < mu - gamma * sigma (strict).
inline bool novelty_check(double sim, const ClusterEntry& entry, double gamma) {
    return sim < entry.mu - gamma * entry.sigma;
}

struct SampleEvent {
    enum class Kind { novel, update, labeled_update };
    Kind kind = Kind::novel;
    EntryId id = kNoEntry;
    double sim = 0.0;  // similarity to the nearest entry before the update
};

struct BatchReport {
    std::int64_t batch_idx = 0;
    std::size_t novelties = 0;
    std::size_t updates = 0;
    std::size_t labeled_updates = 0;
    MergeReport merge;
    bool mask_rebuilt = false;
    std::size_t wm_size = 0;
    std::size_t ltm_size = 0;
};

struct RunTotals {
    std::int64_t novelties = 0;
    std::int64_t updates = 0;
    std::int64_t labeled_updates = 0;
    std::int64_t consolidations = 0;
    std::int64_t wm_evictions = 0;
    std::int64_t merge_passes = 0;
    std::int64_t merged_groups = 0;
};

// Single-pass streaming learner over encoded hypervectors: novelty detection,
// cluster update, consolidation, LRU forgetting and periodic spectral merge.
// Strictly single-threaded; every decision is a pure function of (config,
// seed, input order).
class Learner {
public:
    using EventSink = std::function<void(const std::string&)>;

    Learner(LearnerConfig cfg, Mode mode, std::size_t dim, std::uint64_t master_seed,
            std::size_t adaptive_dims = 0)
        : cfg_(cfg),
          mode_(mode),
          dim_(dim),
          wm_(cfg.wm_capacity),
          ltm_(cfg.ltm_capacity),
          merge_rng_(derive_seed(master_seed, SeedStream::merge_kmeans)) {
        cfg_.validate();
        if (mode_ == Mode::adaptive) {
            if (adaptive_dims == 0 || adaptive_dims > dim)
                throw std::invalid_argument("learner: adaptive dims must be in [1, D]");
            adaptive_dims_ = adaptive_dims;
        }
    }

    void set_event_sink(EventSink sink) { sink_ = std::move(sink); }

    std::int64_t begin_batch() {
        ++batch_idx_;
        current_ = BatchReport{};
        current_.batch_idx = batch_idx_;
        return batch_idx_;
    }

    // Processes one stream sample. `label` >= 0 marks a labeled sample in
    // semi/supervised modes; it is ignored otherwise.
    SampleEvent process_encoded(const BipolarHV& query, std::int32_t label = -1) {
        if (query.dim() != dim_) throw std::invalid_argument("learner: query dimension mismatch");
        if (batch_idx_ == 0) begin_batch();

        if (label >= 0 && (mode_ == Mode::semi || mode_ == Mode::supervised))
            return process_labeled(query, label);
        if (mode_ == Mode::supervised)
            throw std::invalid_argument("learner: supervised mode requires labels");
        return process_unlabeled(query);
    }

    // Merge trigger and adaptive-mask window bookkeeping; call once after the
    // batch's samples.
    BatchReport finish_batch() {
        if (batch_idx_ % cfg_.f_merge == 0 && mode_ != Mode::supervised) {
            const std::size_t nodes = labeled_.size() + ltm_.size();
            if (nodes >= 2) {
                const double beta = compute_beta(wm_, cfg_.beta_default);
                const std::uint64_t kmeans_seed = merge_rng_();
                current_.merge =
                    run_merge_semi(labeled_, ltm_, wm_, cfg_.g_ub, beta, kmeans_seed, next_id_);
                if (current_.merge.ran) {
                    ++totals_.merge_passes;
                    totals_.merged_groups +=
                        static_cast<std::int64_t>(current_.merge.merged_groups);
                    mask_cache_.clear();
                    emit("event=merge batch=" + std::to_string(batch_idx_) +
                         " nodes=" + std::to_string(current_.merge.nodes) +
                         " k=" + std::to_string(current_.merge.k) +
                         " fused=" + std::to_string(current_.merge.merged_groups) +
                         " beta=" + format_double(current_.merge.beta));
                }
            }
        }

        if (adaptive_dims_ > 0 && !mask_.active && full_dim_until_ >= 0 &&
            batch_idx_ >= full_dim_until_ && !ltm_.empty()) {
            mask_ = compute_mask(ltm_, adaptive_dims_);
            mask_.active = true;
            mask_.built_at = batch_idx_;
            mask_cache_.clear();
            full_dim_until_ = -1;
            current_.mask_rebuilt = true;
            emit("event=mask_rebuild batch=" + std::to_string(batch_idx_) +
                 " dims=" + std::to_string(adaptive_dims_));
        }

        current_.wm_size = wm_.size();
        current_.ltm_size = ltm_.size();
        return current_;
    }

    // Inference: nearest entry over labeled classes and long-term memory,
    // falling back to working memory, or nullopt when fully untrained.
    std::optional<EntryId> predict_encoded(const BipolarHV& query) const {
        std::optional<NearestResult> best;
        auto consider = [&](const ClusterEntry& e) {
            const double s = cosine(query, e.accum);
            if (!best || s > best->similarity || (s == best->similarity && e.id < best->id))
                best = NearestResult{e.id, s};
        };
        for (const auto& e : labeled_.entries()) consider(e);
        for (const auto& e : ltm_.entries()) consider(e);
        if (!best)
            for (const auto& e : wm_.entries()) consider(e);
        if (!best) return std::nullopt;
        return best->id;
    }

    // Supervised-style label inference over the class hypervectors.
    std::optional<std::int32_t> classify(const BipolarHV& query) const {
        return infer_supervised(query, labeled_);
    }

    const WorkingMemory& wm() const { return wm_; }
    const LongTermMemory& ltm() const { return ltm_; }
    const LabeledPool& labeled() const { return labeled_; }
    const DimensionMask& mask() const { return mask_; }
    const RunTotals& totals() const { return totals_; }
    std::int64_t batch_idx() const { return batch_idx_; }
    std::size_t dim() const { return dim_; }
    Mode mode() const { return mode_; }
    const LearnerConfig& config() const { return cfg_; }

    MemorySnapshot snapshot() const {
        MemorySnapshot s;
        s.dim = dim_;
        s.next_id = next_id_;
        s.wm = wm_;
        s.ltm = ltm_;
        return s;
    }

    void restore(const MemorySnapshot& s, std::int64_t batch_idx) {
        if (s.dim != dim_) throw std::invalid_argument("restore: dimension mismatch");
        wm_ = s.wm;
        ltm_ = s.ltm;
        next_id_ = s.next_id;
        batch_idx_ = batch_idx;
        mask_cache_.clear();
    }

private:
    SampleEvent process_labeled(const BipolarHV& query, std::int32_t label) {
        const ClusterEntry* before = labeled_.find_label(label);
        const double sim = before ? cosine(query, before->accum) : 1.0;
        const EntryId id = update_labeled(labeled_, query, label, batch_idx_, cfg_.alpha,
                                          cfg_.sigma_init, cfg_.sigma_floor, next_id_);
        if (!before) next_id_valid();
        ++current_.labeled_updates;
        ++totals_.labeled_updates;
        emit("event=labeled batch=" + std::to_string(batch_idx_) + " id=" + std::to_string(id) +
             " label=" + std::to_string(label) + " sim=" + format_double(sim));
        return SampleEvent{SampleEvent::Kind::labeled_update, id, sim};
    }

    SampleEvent process_unlabeled(const BipolarHV& query) {
        const bool masked = mask_.active;
        auto similarity = [&](const ClusterEntry& e) {
            return masked ? mask_cache_.similarity(query, e, mask_.selected)
                          : cosine(query, e.accum);
        };

        // Nearest over the union of labeled classes (semi) and working memory.
        const ClusterEntry* nearest_entry = nullptr;
        double nearest_sim = 0.0;
        auto consider = [&](const ClusterEntry& e) {
            const double s = similarity(e);
            if (!nearest_entry || s > nearest_sim ||
                (s == nearest_sim && e.id < nearest_entry->id)) {
                nearest_entry = &e;
                nearest_sim = s;
            }
        };
        for (auto& e : labeled_.entries()) consider(e);
        for (auto& e : wm_.entries()) consider(e);

        if (!nearest_entry || novelty_check(nearest_sim, *nearest_entry, cfg_.gamma))
            return insert_novel(query, nearest_entry ? nearest_sim : -1.0);
        return update_nearest(const_cast<ClusterEntry&>(*nearest_entry), query, nearest_sim);
    }

    SampleEvent insert_novel(const BipolarHV& query, double sim) {
        const EntryId id = next_id_++;
        if (wm_.full()) {
            const EntryId evicted = wm_.evict_lru();
            mask_cache_.erase(evicted);
            ++totals_.wm_evictions;
            emit("event=evict batch=" + std::to_string(batch_idx_) +
                 " id=" + std::to_string(evicted));
        }
        wm_.push(make_entry(id, query, batch_idx_, cfg_.sigma_init));
        maybe_consolidate(*wm_.find(id));
        ++current_.novelties;
        ++totals_.novelties;
        if (adaptive_dims_ > 0) {
            // Revert to full dimension for the rest of this batch plus the
            // next two; overlapping novelties restart the countdown.
            mask_.active = false;
            full_dim_until_ = batch_idx_ + 2;
        }
        emit("event=novel batch=" + std::to_string(batch_idx_) + " id=" + std::to_string(id) +
             " sim=" + format_double(sim));
        return SampleEvent{SampleEvent::Kind::novel, id, sim};
    }

    SampleEvent update_nearest(ClusterEntry& entry, const BipolarHV& query, double sim) {
        update_entry_stats(entry, query, sim, cfg_.alpha, cfg_.sigma_floor, batch_idx_);
        mask_cache_.erase(entry.id);
        const bool is_labeled = entry.label >= 0;
        if (!is_labeled) {
            if (entry.consolidated)
                write_through(entry, ltm_);
            else
                maybe_consolidate(entry);
        }
        ++current_.updates;
        ++totals_.updates;
        emit("event=update batch=" + std::to_string(batch_idx_) +
             " id=" + std::to_string(entry.id) + " sim=" + format_double(sim) +
             " hit=" + std::to_string(entry.hit));
        return SampleEvent{SampleEvent::Kind::update, entry.id, sim};
    }

    void maybe_consolidate(ClusterEntry& entry) {
        const ConsolidateResult r = consolidate(entry, ltm_, cfg_.hit_th);
        if (!r.consolidated) return;
        ++totals_.consolidations;
        if (r.ltm_evicted) {
            // The displaced long-term copy may have a live working-memory
            // twin; unlink it so it can consolidate again later.
            if (ClusterEntry* w = wm_.find(*r.ltm_evicted)) w->consolidated = false;
            mask_cache_.erase(*r.ltm_evicted);
        }
        emit("event=consolidate batch=" + std::to_string(batch_idx_) +
             " id=" + std::to_string(entry.id) + " ltm_size=" + std::to_string(ltm_.size()));
    }

    void next_id_valid() {}  // labeled creation already advanced next_id_

    void emit(const std::string& line) {
        if (sink_) sink_(line);
    }

    static std::string format_double(double x) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.9g", x);
        return buf;
    }

    LearnerConfig cfg_;
    Mode mode_;
    std::size_t dim_;
    std::size_t adaptive_dims_ = 0;

    WorkingMemory wm_;
    LongTermMemory ltm_;
    LabeledPool labeled_;
    DimensionMask mask_;
    MaskedScanCache mask_cache_;
    std::int64_t full_dim_until_ = -1;

    EntryId next_id_ = 0;
    std::int64_t batch_idx_ = 0;
    Rng merge_rng_;
    BatchReport current_;
    RunTotals totals_;
    EventSink sink_;
};

} // namespace lifehd

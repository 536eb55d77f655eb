#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

namespace lifehd {

// Counts of (predicted cluster, ground-truth class) pairs. Row and column
// keys are arbitrary ids; untrained predictions use a reserved pseudo-cluster
// key of -1.
class ContingencyTable {
public:
    void add(std::int64_t cluster, std::int64_t truth, std::int64_t count = 1) {
        cells_[{cluster, truth}] += count;
        total_ += count;
    }

    std::int64_t total() const { return total_; }
    bool empty() const { return total_ == 0; }

    // Dense counts matrix with deterministic (ascending key) ordering.
    std::vector<std::vector<std::int64_t>> dense() const {
        std::map<std::int64_t, std::size_t> rows, cols;
        for (const auto& [key, count] : cells_) {
            rows.emplace(key.first, 0);
            cols.emplace(key.second, 0);
        }
        std::size_t r = 0;
        for (auto& [id, idx] : rows) idx = r++;
        std::size_t c = 0;
        for (auto& [id, idx] : cols) idx = c++;
        std::vector<std::vector<std::int64_t>> m(rows.size(),
                                                 std::vector<std::int64_t>(cols.size(), 0));
        for (const auto& [key, count] : cells_)
            m[rows.at(key.first)][cols.at(key.second)] += count;
        return m;
    }

private:
    std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> cells_;
    std::int64_t total_ = 0;
};

namespace detail {

// Exact Kuhn-Munkres assignment (minimization) for an n x m cost matrix with
// n <= m, integer costs. Returns the minimal total cost.
inline std::int64_t hungarian_min(const std::vector<std::vector<std::int64_t>>& cost) {
    const std::size_t n = cost.size();
    const std::size_t m = cost.empty() ? 0 : cost[0].size();
    if (n > m) throw std::invalid_argument("hungarian_min: needs rows <= cols");
    constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

    std::vector<std::int64_t> u(n + 1, 0), v(m + 1, 0);
    std::vector<std::size_t> match(m + 1, 0), way(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<std::int64_t> minv(m + 1, kInf);
        std::vector<bool> used(m + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = match[j0];
            std::int64_t delta = kInf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const std::int64_t cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::int64_t result = 0;
    for (std::size_t j = 1; j <= m; ++j)
        if (match[j] != 0) result += cost[match[j] - 1][j - 1];
    return result;
}

// Maximum-weight one-to-one matching of rows to columns (rectangular; the
// smaller side is fully matched).
inline std::int64_t best_assignment_total(const std::vector<std::vector<std::int64_t>>& counts) {
    std::size_t rows = counts.size();
    std::size_t cols = counts.empty() ? 0 : counts[0].size();
    if (rows == 0 || cols == 0) return 0;

    std::vector<std::vector<std::int64_t>> w;
    if (rows <= cols) {
        w = counts;
    } else {
        w.assign(cols, std::vector<std::int64_t>(rows, 0));
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) w[j][i] = counts[i][j];
        std::swap(rows, cols);
    }
    std::int64_t top = 0;
    for (const auto& row : w)
        for (std::int64_t x : row) top = std::max(top, x);
    std::vector<std::vector<std::int64_t>> cost(rows, std::vector<std::int64_t>(cols, 0));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) cost[i][j] = top - w[i][j];
    const std::int64_t min_cost = hungarian_min(cost);
    return static_cast<std::int64_t>(rows) * top - min_cost;
}

} // namespace detail

// Unsupervised clustering accuracy: the fraction of samples explained by the
// best one-to-one mapping of predicted clusters onto ground-truth classes.
// Unmatched clusters contribute nothing. Exact.
inline double acc(const ContingencyTable& table) {
    if (table.empty()) throw std::invalid_argument("acc: empty contingency table");
    const auto counts = table.dense();
    return static_cast<double>(detail::best_assignment_total(counts)) /
           static_cast<double>(table.total());
}

// Secondary diagnostic (not the headline metric): each cluster claims its
// majority class, many-to-one.
inline double purity(const ContingencyTable& table) {
    if (table.empty()) throw std::invalid_argument("purity: empty contingency table");
    const auto counts = table.dense();
    std::int64_t hit = 0;
    for (const auto& row : counts) {
        std::int64_t best = 0;
        for (std::int64_t x : row) best = std::max(best, x);
        hit += best;
    }
    return static_cast<double>(hit) / static_cast<double>(table.total());
}

struct MetricRecord {
    std::int64_t batch_idx = 0;
    double acc = 0.0;
    double purity = 0.0;
    std::size_t wm_size = 0;
    std::size_t ltm_size = 0;
};

// Runs `predict` over the evaluation set and scores the resulting table.
// `predict` returns a cluster id, or -1 for an untrained model (those
// predictions land in a dedicated pseudo-cluster).
template <typename PredictFn>
MetricRecord evaluate(PredictFn&& predict, const std::vector<std::int32_t>& labels,
                      std::int64_t batch_idx) {
    if (labels.empty()) throw std::invalid_argument("evaluate: empty test set");
    ContingencyTable table;
    for (std::size_t i = 0; i < labels.size(); ++i)
        table.add(predict(i), labels[i]);
    MetricRecord rec;
    rec.batch_idx = batch_idx;
    rec.acc = acc(table);
    rec.purity = purity(table);
    return rec;
}

} // namespace lifehd

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "hisp/association.hpp"

namespace hisp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

struct DisjointSets {
    std::vector<std::size_t> parent;
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

// One connected component of the gating graph. Every association of the
// whole table is a free combination of per-component associations, so the
// sums run per component and the results multiply.
//
// Slots are the component's propagated rows and its columns. A row slot picks
// phi or one gated column; a column slot is "taken" (b_z and op_z both on phi)
// or "free" (b_z or op_z on z, the other on phi; both choices summed). The
// association sum is accumulated row by row over the set U of taken columns:
// D(U) = sum over injective row choices using exactly U of the row factors.
class ComponentSolver {
public:
    static constexpr std::size_t kHardColumnLimit = 24;

    ComponentSolver(const AssociationTable& table, std::vector<std::size_t> rows, std::vector<std::size_t> columns,
                    const ExactOptions& options)
        : rows_(std::move(rows)), columns_(std::move(columns)) {
        if (rows_.size() > options.max_rows || columns_.size() > options.max_columns ||
            columns_.size() > kHardColumnLimit)
            throw std::length_error("exact weights refused: component with " + std::to_string(rows_.size()) +
                                    " rows and " + std::to_string(columns_.size()) + " columns exceeds the limits");
        std::vector<std::size_t> local(table.num_columns(), 0);
        for (std::size_t c = 0; c < columns_.size(); ++c) local[columns_[c]] = c;

        // Every slot is scaled by its largest value so that products stay in range.
        for (std::size_t r : rows_) {
            const auto& row = table.rows[r];
            double s = row.miss_mass;
            for (const auto& e : row.entries) s = std::max(s, e.mass);
            s = s > 0.0 ? s : 1.0;
            RowData d;
            d.miss = row.miss_mass / s;
            for (const auto& e : row.entries) d.hits.push_back({std::size_t{1} << local[e.column], e.mass / s});
            row_data_.push_back(std::move(d));
            log_scale_sum_ += std::log(s);
            row_log_scale_.push_back(std::log(s));
        }
        std::vector<double> taken, free;
        for (std::size_t z : columns_) {
            const auto& col = table.columns[z];
            const double t = col.birth_miss * col.clutter_miss;
            const double f = col.birth_hit * col.clutter_miss + col.clutter_hit * col.birth_miss;
            const double s = std::max(t, f) > 0.0 ? std::max(t, f) : 1.0;
            taken.push_back(t / s);
            free.push_back(f / s);
            log_scale_sum_ += std::log(s);
            col_log_scale_.push_back(std::log(s));
        }
        col_factor_ = column_factors(taken, free, columns_.size());
        col_factor_without_.resize(columns_.size());
        for (std::size_t c = 0; c < columns_.size(); ++c)
            col_factor_without_[c] = column_factors(taken, free, c);
        row_acc_.resize(rows_.size());
    }

    void run() {
        const std::size_t states = std::size_t{1} << columns_.size();
        std::vector<double> base(states, 0.0);
        base[0] = 1.0;

        std::vector<double> full = base;
        for (std::size_t k = 0; k < rows_.size(); ++k) add_row(full, k);
        total_ = 0.0;
        for (std::size_t u = 0; u < states; ++u) total_ += full[u] * col_factor_[u];
        taken_acc_.assign(columns_.size(), 0.0);
        free_acc_.assign(columns_.size(), 0.0);
        for (std::size_t c = 0; c < columns_.size(); ++c) {
            const std::size_t bit = std::size_t{1} << c;
            for (std::size_t u = 0; u < states; ++u)
                ((u & bit) ? taken_acc_[c] : free_acc_[c]) += full[u] * col_factor_without_[c][u];
        }
        if (!rows_.empty()) leave_one_out(0, rows_.size(), base);
    }

    [[nodiscard]] double log_total() const { return safe_log(total_) + log_scale_sum_; }
    // Sum over associations with row k on `choice` (0 = phi, j+1 = entry j)
    // of the product over all other slots.
    [[nodiscard]] double log_row(std::size_t k, std::size_t choice) const {
        return safe_log(row_acc_[k][choice]) + log_scale_sum_ - row_log_scale_[k];
    }
    [[nodiscard]] double log_taken(std::size_t c) const {
        return safe_log(taken_acc_[c]) + log_scale_sum_ - col_log_scale_[c];
    }
    [[nodiscard]] double log_free(std::size_t c) const {
        return safe_log(free_acc_[c]) + log_scale_sum_ - col_log_scale_[c];
    }
    [[nodiscard]] const std::vector<std::size_t>& rows() const { return rows_; }
    [[nodiscard]] const std::vector<std::size_t>& columns() const { return columns_; }

private:
    struct RowData {
        double miss = 0.0;
        std::vector<std::pair<std::size_t, double>> hits;   // (column bit, mass)
    };

    // Product over columns of taken/free factors for every U, skipping column
    // `skip` (pass n to skip none).
    static std::vector<double> column_factors(const std::vector<double>& taken, const std::vector<double>& free,
                                              std::size_t skip) {
        const std::size_t n = taken.size();
        std::vector<double> f(std::size_t{1} << n, 1.0);
        for (std::size_t c = 0; c < n; ++c) {
            const std::size_t bit = std::size_t{1} << c;
            for (std::size_t u = 0; u < bit; ++u) {
                const double base = f[u];
                f[u] = c == skip ? base : base * free[c];
                f[u | bit] = c == skip ? base : base * taken[c];
            }
        }
        return f;
    }

    void add_row(std::vector<double>& d, std::size_t k) const {
        const auto& r = row_data_[k];
        for (std::size_t u = d.size(); u-- > 0;) {
            double v = d[u] * r.miss;
            for (const auto& [bit, m] : r.hits)
                if (u & bit) v += d[u ^ bit] * m;
            d[u] = v;
        }
    }

    // `d` already holds every row outside [lo, hi).
    void leave_one_out(std::size_t lo, std::size_t hi, const std::vector<double>& d) {
        if (hi - lo == 1) {
            const auto& r = row_data_[lo];
            auto& acc = row_acc_[lo];
            acc.assign(r.hits.size() + 1, 0.0);
            for (std::size_t u = 0; u < d.size(); ++u) {
                if (d[u] == 0.0) continue;
                acc[0] += d[u] * col_factor_[u];
                for (std::size_t j = 0; j < r.hits.size(); ++j)
                    if (!(u & r.hits[j].first)) acc[j + 1] += d[u] * col_factor_[u | r.hits[j].first];
            }
            return;
        }
        const std::size_t mid = lo + (hi - lo) / 2;
        std::vector<double> left = d;
        for (std::size_t k = mid; k < hi; ++k) add_row(left, k);
        leave_one_out(lo, mid, left);
        std::vector<double>& right = left;
        right = d;
        for (std::size_t k = lo; k < mid; ++k) add_row(right, k);
        leave_one_out(mid, hi, right);
    }

    std::vector<std::size_t> rows_, columns_;
    std::vector<RowData> row_data_;
    std::vector<double> row_log_scale_, col_log_scale_;
    double log_scale_sum_ = 0.0;
    std::vector<double> col_factor_;
    std::vector<std::vector<double>> col_factor_without_;
    std::vector<std::vector<double>> row_acc_;
    std::vector<double> taken_acc_, free_acc_;
    double total_ = 0.0;
};

}  // namespace

WeightTable compute_weights_exact(const AssociationTable& table, const ExactOptions& options) {
    table.validate();
    const std::size_t n = table.num_rows();
    const std::size_t m = table.num_columns();

    DisjointSets sets(n + m);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& e : table.rows[i].entries) sets.unite(i, n + e.column);

    std::vector<std::vector<std::size_t>> comp_rows(n + m), comp_cols(n + m);
    for (std::size_t i = 0; i < n; ++i) comp_rows[sets.find(i)].push_back(i);
    for (std::size_t z = 0; z < m; ++z) comp_cols[sets.find(n + z)].push_back(z);

    std::vector<ComponentSolver> comps;
    for (std::size_t root = 0; root < n + m; ++root) {
        if (comp_rows[root].empty() && comp_cols[root].empty()) continue;
        comps.emplace_back(table, comp_rows[root], comp_cols[root], options);
        comps.back().run();
    }

    // Product of the other components' totals, with exact zeros tracked.
    double finite_sum = 0.0;
    int zeros = 0;
    std::vector<double> comp_log(comps.size());
    for (std::size_t c = 0; c < comps.size(); ++c) {
        comp_log[c] = comps[c].log_total();
        if (comp_log[c] == kNegInf) ++zeros;
        else finite_sum += comp_log[c];
    }
    auto others = [&](std::size_t c) {
        if (comp_log[c] == kNegInf) return zeros == 1 ? finite_sum : kNegInf;
        return zeros == 0 ? finite_sum - comp_log[c] : kNegInf;
    };

    WeightTable w;
    w.log_miss.assign(n, kNegInf);
    w.log_hit.resize(n);
    for (std::size_t i = 0; i < n; ++i) w.log_hit[i].assign(table.rows[i].entries.size(), kNegInf);
    w.log_birth_hit.assign(m, kNegInf);
    w.log_birth_miss.assign(m, kNegInf);
    w.log_clutter_hit.assign(m, kNegInf);
    w.log_clutter_miss.assign(m, kNegInf);

    for (std::size_t c = 0; c < comps.size(); ++c) {
        const auto& comp = comps[c];
        const double rest = others(c);
        for (std::size_t k = 0; k < comp.rows().size(); ++k) {
            const std::size_t i = comp.rows()[k];
            w.log_miss[i] = rest + comp.log_row(k, 0);
            for (std::size_t j = 0; j < table.rows[i].entries.size(); ++j)
                w.log_hit[i][j] = rest + comp.log_row(k, j + 1);
        }
        for (std::size_t k = 0; k < comp.columns().size(); ++k) {
            const std::size_t z = comp.columns()[k];
            const auto& col = table.columns[z];
            const double q_free = rest + comp.log_free(k);
            const double q_taken = rest + comp.log_taken(k);
            const double log_bm = safe_log(col.birth_miss), log_cm = safe_log(col.clutter_miss);
            w.log_birth_hit[z] = log_cm + q_free;
            w.log_clutter_hit[z] = log_bm + q_free;
            w.log_birth_miss[z] = log_sum_exp({log_cm + q_taken, safe_log(col.clutter_hit) + q_free});
            w.log_clutter_miss[z] = log_sum_exp({log_bm + q_taken, safe_log(col.birth_hit) + q_free});
        }
    }
    w.log_total = zeros > 0 ? kNegInf : finite_sum;
    return w;
}

}  // namespace hisp

#include "hisp/association.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>

namespace hisp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

// Log of a product that tracks exact zero factors separately, so that a
// leave-one-out quotient stays exact when the left-out factor is zero.
struct ZeroAwareLogProduct {
    double log_sum = 0.0;
    int zeros = 0;

    void add(double v) {
        if (v == 0.0) ++zeros;
        else log_sum += std::log(v);
    }
    void remove(double v) {
        if (v == 0.0) --zeros;
        else log_sum -= std::log(v);
    }
    [[nodiscard]] double value() const { return zeros > 0 ? kNegInf : log_sum; }
    [[nodiscard]] double leave_out(double v) const {
        if (v == 0.0) return zeros == 1 ? log_sum : kNegInf;
        return zeros == 0 ? log_sum - std::log(v) : kNegInf;
    }
};

PropagatedRow make_row(const Hypothesis& h, const Scan& scan, const SensorModel& sensor, double gate) {
    const auto& grid = sensor.grid;
    const double pd = sensor.observation.p_detect;
    const MeasMatrix noise = sensor.observation.noise();

    PropagatedRow row;
    row.miss_law.mass_phi = h.law.mass_phi;
    row.miss_law.mass_psi = h.law.mass_psi;

    struct Detectable {
        double weight;
        Innovation innovation;
    };
    std::vector<Detectable> detectable;
    detectable.reserve(h.law.alive.size());
    double miss_alive = 0.0;
    for (const auto& c : h.law.alive.components) {
        const bool visible = in_surveillance(grid, c.mean);
        const double pd_c = visible ? pd : 0.0;
        if (c.weight * (1.0 - pd_c) > 0.0) {
            GaussianComponent m = c;
            m.weight = c.weight * (1.0 - pd_c);
            miss_alive += m.weight;
            row.miss_law.alive.components.push_back(m);
        }
        if (pd_c > 0.0 && c.weight > 0.0)
            detectable.push_back({pd_c * c.weight, Innovation(c, range_bearing(c.mean), noise, Residual::bearing)});
    }
    row.miss_mass = row.miss_law.mass_phi + row.miss_law.mass_psi + miss_alive;

    for (std::size_t k = 0; k < scan.observations.size(); ++k) {
        const MeasVector& z = scan.observations[k].value;
        AssociationEntry entry;
        entry.column = k;
        for (const auto& d : detectable) {
            if (d.innovation.mahalanobis2(z) > gate) continue;
            const double l = d.weight * std::exp(d.innovation.log_likelihood(z));
            if (!(l > 0.0)) continue;
            GaussianComponent post = d.innovation.update(z);
            post.weight = l;
            entry.posterior.components.push_back(post);
            entry.mass += l;
        }
        if (entry.mass > 0.0) {
            entry.posterior.scale(1.0 / entry.mass);
            row.entries.push_back(std::move(entry));
        }
    }
    return row;
}

ObservationColumn make_column(const Observation& obs, const SensorModel& sensor) {
    const auto& grid = sensor.grid;
    ObservationColumn col;
    const double beta = birth_probability(grid, sensor.birth, obs.cell);
    const GaussianComponent g = cell_gaussian(grid, obs.cell, sensor.birth.sigma_v);
    const Innovation inn(g, range_bearing(g.mean), sensor.observation.noise(), Residual::bearing);
    // Newborn individuals are detected with probability one. Like the
    // propagated rows, the likelihood is the observation density in (m, rad),
    // set against the per-cell false-alarm probability.
    col.birth_hit = beta * std::exp(inn.log_likelihood(obs.value));
    col.birth_miss = 1.0 - beta;
    const double pfa = clutter_terms(sensor.clutter, obs.value);
    col.clutter_hit = pfa;
    col.clutter_miss = 1.0 - pfa;
    GaussianComponent post = inn.update(obs.value);
    post.weight = 1.0;
    col.birth_posterior.components.push_back(post);
    return col;
}

template <bool Parallel>
AssociationTable build_table_impl(const std::vector<Hypothesis>& hypotheses, const Scan& scan,
                                  const SensorModel& sensor, const TableOptions& options) {
    for (const auto& o : scan.observations)
        if (!sensor.grid.contains(o.value)) throw std::out_of_range("scan observation outside sensor bounds");

    AssociationTable table;
    const auto n = static_cast<std::ptrdiff_t>(hypotheses.size());
    const auto m = static_cast<std::ptrdiff_t>(scan.observations.size());
    table.rows.resize(hypotheses.size());
    table.columns.resize(scan.observations.size());

    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4) if (Parallel && n > 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            table.rows[i] = make_row(hypotheses[i], scan, sensor, options.gate);
        } catch (...) {
#pragma omp critical
            failure = std::current_exception();
        }
    }
#pragma omp parallel for schedule(static) if (Parallel && m > 64)
    for (std::ptrdiff_t k = 0; k < m; ++k) {
        try {
            table.columns[k] = make_column(scan.observations[k], sensor);
        } catch (...) {
#pragma omp critical
            failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return table;
}

struct ColumnConstants {
    std::vector<double> cz, log_cz;
    double log_misses = 0.0;  // log of every birth and clutter miss mass
    double log_cz_sum = 0.0;
};

ColumnConstants column_constants(const AssociationTable& table) {
    ColumnConstants cc;
    const std::size_t m = table.num_columns();
    cc.cz.resize(m);
    cc.log_cz.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        const auto& col = table.columns[k];
        cc.cz[k] = compute_cz(col);
        if (!(cc.cz[k] > 0.0))
            throw std::domain_error("C^z vanishes: observation cannot be explained by birth or clutter");
        cc.log_cz[k] = std::log(cc.cz[k]);
        cc.log_misses += std::log(col.birth_miss) + std::log(col.clutter_miss);
        cc.log_cz_sum += cc.log_cz[k];
    }
    return cc;
}

}  // namespace

double log_sum_exp(const std::vector<double>& values) {
    double hi = kNegInf;
    for (double v : values) hi = std::max(hi, v);
    if (hi == kNegInf) return kNegInf;
    if (hi == std::numeric_limits<double>::infinity()) return hi;
    double s = 0.0;
    for (double v : values) s += std::exp(v - hi);
    return hi + std::log(s);
}

double AssociationTable::mass(std::size_t row, std::size_t column) const {
    const auto& e = rows.at(row).entries;
    auto it = std::lower_bound(e.begin(), e.end(), column,
                               [](const AssociationEntry& a, std::size_t c) { return a.column < c; });
    return (it != e.end() && it->column == column) ? it->mass : 0.0;
}

void AssociationTable::validate() const {
    auto bad = [](double v) { return !std::isfinite(v) || v < 0.0; };
    for (const auto& r : rows) {
        if (bad(r.miss_mass)) throw std::invalid_argument("association table: bad miss mass");
        for (std::size_t k = 0; k < r.entries.size(); ++k) {
            const auto& e = r.entries[k];
            if (bad(e.mass) || e.column >= columns.size())
                throw std::invalid_argument("association table: bad entry");
            if (k > 0 && r.entries[k - 1].column >= e.column)
                throw std::invalid_argument("association table: entries not sorted by column");
        }
    }
    for (const auto& c : columns)
        if (bad(c.birth_hit) || bad(c.birth_miss) || bad(c.clutter_hit) || bad(c.clutter_miss))
            throw std::invalid_argument("association table: bad column masses");
}

AssociationTable build_table(const std::vector<Hypothesis>& hypotheses, const Scan& scan,
                             const SensorModel& sensor, const TableOptions& options) {
    return build_table_impl<true>(hypotheses, scan, sensor, options);
}

AssociationTable build_table_serial(const std::vector<Hypothesis>& hypotheses, const Scan& scan,
                                    const SensorModel& sensor, const TableOptions& options) {
    return build_table_impl<false>(hypotheses, scan, sensor, options);
}

double compute_cz(const ObservationColumn& column) {
    if (!(column.birth_miss > 0.0) || !(column.clutter_miss > 0.0))
        throw std::invalid_argument("C^z undefined: birth or clutter miss probability is zero");
    return column.birth_hit / column.birth_miss + column.clutter_hit / column.clutter_miss;
}

WeightTable compute_weights_approx1(const AssociationTable& table) {
    table.validate();
    const std::size_t n = table.num_rows();
    const std::size_t m = table.num_columns();
    const ColumnConstants cc = column_constants(table);
    const double base = cc.log_misses + cc.log_cz_sum;

    // T(x, phi) and T(x, z) for gated z; T(x, z) = T(x, phi) elsewhere.
    std::vector<double> t_miss(n);
    std::vector<std::vector<double>> t_hit(n);
#pragma omp parallel for schedule(dynamic, 16) if (n > 64)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const auto& row = table.rows[i];
        double s_sum = 0.0;
        for (const auto& e : row.entries) s_sum += e.mass / cc.cz[e.column];
        const double t_phi = row.miss_mass + s_sum;
        t_miss[i] = t_phi;
        auto& th = t_hit[i];
        th.resize(row.entries.size());
        for (std::size_t k = 0; k < row.entries.size(); ++k) {
            const double s = row.entries[k].mass / cc.cz[row.entries[k].column];
            if (s > 0.5 * t_phi) {
                // At most one entry per row lands here; summing directly avoids
                // cancellation in T(x,phi) - S(x,z).
                double direct = row.miss_mass;
                for (std::size_t j = 0; j < row.entries.size(); ++j)
                    if (j != k) direct += row.entries[j].mass / cc.cz[row.entries[j].column];
                th[k] = direct;
            } else {
                th[k] = std::max(0.0, t_phi - s);
            }
        }
    }

    // P(phi) and P(z), serial so the result does not depend on thread count.
    ZeroAwareLogProduct p_phi;
    for (double t : t_miss) p_phi.add(t);
    std::vector<ZeroAwareLogProduct> p_col(m, p_phi);
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> gating(m);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = table.rows[i];
        for (std::size_t k = 0; k < row.entries.size(); ++k) {
            const std::size_t z = row.entries[k].column;
            p_col[z].remove(t_miss[i]);
            p_col[z].add(t_hit[i][k]);
            gating[z].emplace_back(i, k);
        }
    }

    WeightTable w;
    w.log_miss.resize(n);
    w.log_hit.resize(n);
#pragma omp parallel for schedule(dynamic, 16) if (n > 64)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const auto& row = table.rows[i];
        w.log_miss[i] = base + p_phi.leave_out(t_miss[i]);
        w.log_hit[i].resize(row.entries.size());
        for (std::size_t k = 0; k < row.entries.size(); ++k) {
            const std::size_t z = row.entries[k].column;
            w.log_hit[i][k] = base - cc.log_cz[z] + p_col[z].leave_out(t_hit[i][k]);
        }
    }

    w.log_birth_hit.resize(m);
    w.log_birth_miss.resize(m);
    w.log_clutter_hit.resize(m);
    w.log_clutter_miss.resize(m);
    std::vector<double> terms;
    for (std::size_t z = 0; z < m; ++z) {
        const auto& col = table.columns[z];
        const double log_bm = std::log(col.birth_miss), log_cm = std::log(col.clutter_miss);
        const double shared = base - cc.log_cz[z];
        const double log_pz = p_col[z].value();
        w.log_birth_hit[z] = shared - log_bm + log_pz;
        w.log_clutter_hit[z] = shared - log_cm + log_pz;

        // With b_z (resp. op_z) on the empty observation, z is explained either
        // by the other representation or by exactly one propagated row.
        terms.clear();
        for (auto [i, k] : gating[z])
            terms.push_back(std::log(table.rows[i].entries[k].mass) + p_col[z].leave_out(t_hit[i][k]));
        const double detected = log_sum_exp(terms);
        const double clutter_odds = safe_log(col.clutter_hit) - log_cm;
        const double birth_odds = safe_log(col.birth_hit) - log_bm;
        w.log_birth_miss[z] = shared - log_bm + log_sum_exp({clutter_odds + log_pz, detected});
        w.log_clutter_miss[z] = shared - log_cm + log_sum_exp({birth_odds + log_pz, detected});
    }
    w.log_total = base + p_phi.value();
    return w;
}

WeightTable compute_weights_approx1_serial(const AssociationTable& table) {
    table.validate();
    const std::size_t n = table.num_rows();
    const std::size_t m = table.num_columns();
    const ColumnConstants cc = column_constants(table);
    const double base = cc.log_misses + cc.log_cz_sum;

    // Dense S, T(x, phi), T(x, z).
    std::vector<std::vector<double>> p(n, std::vector<double>(m, 0.0));
    std::vector<std::vector<double>> t(n, std::vector<double>(m, 0.0));
    std::vector<double> t_phi(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& e : table.rows[i].entries) p[i][e.column] = e.mass;
        double s_sum = 0.0;
        for (std::size_t z = 0; z < m; ++z) s_sum += p[i][z] / cc.cz[z];
        t_phi[i] = table.rows[i].miss_mass + s_sum;
        for (std::size_t z = 0; z < m; ++z) t[i][z] = t_phi[i] - p[i][z] / cc.cz[z];
    }
    auto log_product = [&](std::size_t z_or_m, std::optional<std::size_t> skip) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (skip && *skip == i) continue;
            s += safe_log(z_or_m == m ? t_phi[i] : t[i][z_or_m]);
        }
        return s;
    };
    auto leave_one_out = [&](std::size_t z_or_m, std::size_t i) {
        const double ti = z_or_m == m ? t_phi[i] : t[i][z_or_m];
        const double full = log_product(z_or_m, std::nullopt);
        if (ti > 0.0 && full != kNegInf) return full - std::log(ti);
        return log_product(z_or_m, i);
    };

    WeightTable w;
    w.log_miss.resize(n);
    w.log_hit.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        w.log_miss[i] = base + leave_one_out(m, i);
        for (const auto& e : table.rows[i].entries)
            w.log_hit[i].push_back(base - cc.log_cz[e.column] + leave_one_out(e.column, i));
    }
    w.log_birth_hit.resize(m);
    w.log_birth_miss.resize(m);
    w.log_clutter_hit.resize(m);
    w.log_clutter_miss.resize(m);
    for (std::size_t z = 0; z < m; ++z) {
        const auto& col = table.columns[z];
        const double log_bm = std::log(col.birth_miss), log_cm = std::log(col.clutter_miss);
        const double shared = base - cc.log_cz[z];
        const double log_pz = log_product(z, std::nullopt);
        w.log_birth_hit[z] = shared - log_bm + log_pz;
        w.log_clutter_hit[z] = shared - log_cm + log_pz;
        std::vector<double> terms;
        for (std::size_t i = 0; i < n; ++i)
            if (p[i][z] > 0.0) terms.push_back(std::log(p[i][z]) + log_product(z, i));
        const double detected = log_sum_exp(terms);
        w.log_birth_miss[z] =
            shared - log_bm + log_sum_exp({safe_log(col.clutter_hit) - log_cm + log_pz, detected});
        w.log_clutter_miss[z] =
            shared - log_cm + log_sum_exp({safe_log(col.birth_hit) - log_bm + log_pz, detected});
    }
    w.log_total = base + log_product(m, std::nullopt);
    return w;
}

double log_factorised_total_approx2(const AssociationTable& table) {
    table.validate();
    double log_k = 0.0;
    std::vector<double> per_column(table.num_columns());
    for (std::size_t z = 0; z < table.num_columns(); ++z) {
        const auto& col = table.columns[z];
        log_k += std::log(col.birth_miss) + std::log(col.clutter_miss);
        per_column[z] = compute_cz(col);
    }
    double log_miss = 0.0;
    for (const auto& row : table.rows) {
        if (!(row.miss_mass > 0.0))
            throw std::domain_error("per-observation factorisation needs p^{x,phi} > 0 for every row");
        log_miss += std::log(row.miss_mass);
        for (const auto& e : row.entries) per_column[e.column] += e.mass / row.miss_mass;
    }
    double total = log_k + log_miss;
    for (double v : per_column) total += safe_log(v);
    return total;
}

double factorised_P_approx2(const AssociationTable& table) {
    return std::exp(log_factorised_total_approx2(table));
}

AssociationPosterior posterior_masses(const AssociationTable& table, const WeightTable& w) {
    const std::size_t n = table.num_rows();
    const std::size_t m = table.num_columns();
    AssociationPosterior post;
    auto normalised = [](double log_term, double log_sum) {
        return log_sum == kNegInf ? 0.0 : std::exp(log_term - log_sum);
    };

    // Terms w(x,z) p^{x,z} in log domain.
    std::vector<std::vector<double>> hit_terms(n);
    std::vector<double> miss_terms(n);
    std::vector<std::vector<double>> column_terms(m);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = table.rows[i];
        miss_terms[i] = w.log_miss[i] + safe_log(row.miss_mass);
        for (std::size_t k = 0; k < row.entries.size(); ++k) {
            const double term = w.log_hit[i][k] + std::log(row.entries[k].mass);
            hit_terms[i].push_back(term);
            column_terms[row.entries[k].column].push_back(term);
        }
    }
    std::vector<double> birth_hit(m), birth_miss(m), clutter_hit(m), clutter_miss(m);
    for (std::size_t z = 0; z < m; ++z) {
        const auto& col = table.columns[z];
        birth_hit[z] = w.log_birth_hit[z] + safe_log(col.birth_hit);
        birth_miss[z] = w.log_birth_miss[z] + safe_log(col.birth_miss);
        clutter_hit[z] = w.log_clutter_hit[z] + safe_log(col.clutter_hit);
        clutter_miss[z] = w.log_clutter_miss[z] + safe_log(col.clutter_miss);
        column_terms[z].push_back(birth_hit[z]);
        column_terms[z].push_back(clutter_hit[z]);
    }

    post.log_column_sum.resize(m);
    for (std::size_t z = 0; z < m; ++z) post.log_column_sum[z] = log_sum_exp(column_terms[z]);

    post.hit_by_column.resize(n);
    post.hit_by_row.resize(n);
    post.miss_by_row.resize(n);
    post.log_row_sum.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row_terms = hit_terms[i];
        row_terms.push_back(miss_terms[i]);
        const double rs = log_sum_exp(row_terms);
        post.log_row_sum[i] = rs;
        post.miss_by_row[i] = normalised(miss_terms[i], rs);
        for (std::size_t k = 0; k < hit_terms[i].size(); ++k) {
            post.hit_by_row[i].push_back(normalised(hit_terms[i][k], rs));
            const std::size_t z = table.rows[i].entries[k].column;
            post.hit_by_column[i].push_back(normalised(hit_terms[i][k], post.log_column_sum[z]));
        }
    }

    post.birth_by_column.resize(m);
    post.clutter_by_column.resize(m);
    post.birth_hit_by_row.resize(m);
    post.birth_miss_by_row.resize(m);
    post.clutter_hit_by_row.resize(m);
    post.clutter_miss_by_row.resize(m);
    post.log_birth_row_sum.resize(m);
    post.log_clutter_row_sum.resize(m);
    for (std::size_t z = 0; z < m; ++z) {
        post.birth_by_column[z] = normalised(birth_hit[z], post.log_column_sum[z]);
        post.clutter_by_column[z] = normalised(clutter_hit[z], post.log_column_sum[z]);
        const double bs = log_sum_exp({birth_hit[z], birth_miss[z]});
        const double cs = log_sum_exp({clutter_hit[z], clutter_miss[z]});
        post.log_birth_row_sum[z] = bs;
        post.log_clutter_row_sum[z] = cs;
        post.birth_hit_by_row[z] = normalised(birth_hit[z], bs);
        post.birth_miss_by_row[z] = normalised(birth_miss[z], bs);
        post.clutter_hit_by_row[z] = normalised(clutter_hit[z], cs);
        post.clutter_miss_by_row[z] = normalised(clutter_miss[z], cs);
    }
    return post;
}

double max_consistency_error(const AssociationPosterior& post, double log_total) {
    double worst = 0.0;
    auto check = [&](double s) { worst = std::max(worst, std::abs(std::expm1(s - log_total))); };
    for (double s : post.log_column_sum) check(s);
    for (double s : post.log_row_sum) check(s);
    for (double s : post.log_birth_row_sum) check(s);
    for (double s : post.log_clutter_row_sum) check(s);
    return worst;
}

void write_table_dump(std::ostream& os, const AssociationTable& table,
                      const std::vector<std::uint64_t>& row_ids, const Scan& scan) {
    if (row_ids.size() != table.num_rows()) throw std::invalid_argument("write_table_dump: row id count mismatch");
    if (scan.observations.size() != table.num_columns())
        throw std::invalid_argument("write_table_dump: scan does not match table");
    auto obs_label = [&](std::size_t z) {
        const auto& id = scan.observations[z].id;
        return std::to_string(id.step) + ":" + std::to_string(id.index);
    };
    os << "hypothesis_id,observation_id,log_mass\n";
    for (std::size_t i = 0; i < table.num_rows(); ++i) {
        const auto& row = table.rows[i];
        os << row_ids[i] << ",phi," << safe_log(row.miss_mass) << '\n';
        for (const auto& e : row.entries) os << row_ids[i] << ',' << obs_label(e.column) << ',' << std::log(e.mass) << '\n';
    }
    for (std::size_t z = 0; z < table.num_columns(); ++z) {
        const auto& col = table.columns[z];
        const std::string label = obs_label(z);
        os << "b:" << label << ',' << label << ',' << safe_log(col.birth_hit) << '\n';
        os << "b:" << label << ",phi," << safe_log(col.birth_miss) << '\n';
        os << "op:" << label << ',' << label << ',' << safe_log(col.clutter_hit) << '\n';
        os << "op:" << label << ",phi," << safe_log(col.clutter_miss) << '\n';
    }
}

}  // namespace hisp

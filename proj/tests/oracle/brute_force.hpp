#pragma once

// Whole-table enumeration of admissible associations. Every propagated row
// takes the empty observation or one distinct gated observation; every
// observation not taken by a propagated row goes to its newborn or to its
// false-alarm representation, the other one missing it. Test-scale only.

#include <cstddef>
#include <functional>
#include <vector>

#include "hisp/association.hpp"

namespace oracle {

struct Enumeration {
    double total = 0.0;   // P_t
    // w(x, nu): sum over associations containing x -> nu of the product of
    // every other factor.
    std::vector<double> w_miss;
    std::vector<std::vector<double>> w_hit;   // aligned with row entries
    std::vector<double> w_birth_hit, w_birth_miss, w_clutter_hit, w_clutter_miss;
    // Sum of P^a over associations containing the event.
    std::vector<double> p_miss;
    std::vector<std::vector<double>> p_hit;
    std::vector<double> p_birth_hit, p_birth_miss, p_clutter_hit, p_clutter_miss;
    std::size_t associations = 0;
};

inline Enumeration enumerate(const hisp::AssociationTable& t) {
    const std::size_t n = t.num_rows(), m = t.num_columns();
    Enumeration e;
    e.w_miss.assign(n, 0.0);
    e.p_miss.assign(n, 0.0);
    e.w_hit.resize(n);
    e.p_hit.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        e.w_hit[i].assign(t.rows[i].entries.size(), 0.0);
        e.p_hit[i].assign(t.rows[i].entries.size(), 0.0);
    }
    e.w_birth_hit.assign(m, 0.0);
    e.w_birth_miss.assign(m, 0.0);
    e.w_clutter_hit.assign(m, 0.0);
    e.w_clutter_miss.assign(m, 0.0);
    e.p_birth_hit.assign(m, 0.0);
    e.p_birth_miss.assign(m, 0.0);
    e.p_clutter_hit.assign(m, 0.0);
    e.p_clutter_miss.assign(m, 0.0);

    // choice[i] = -1 for the empty observation, else the entry index.
    std::vector<int> choice(n, -1);
    std::vector<bool> taken(m, false);
    // birth_on[z]: column z free and given to b_z (else to op_z).
    std::vector<bool> birth_on(m, false);

    auto score = [&]() {
        // Slot factors: n propagated rows, then b_z and op_z per column.
        std::vector<double> f;
        f.reserve(n + 2 * m);
        for (std::size_t i = 0; i < n; ++i)
            f.push_back(choice[i] < 0 ? t.rows[i].miss_mass
                                      : t.rows[i].entries[static_cast<std::size_t>(choice[i])].mass);
        for (std::size_t z = 0; z < m; ++z) {
            const auto& c = t.columns[z];
            const bool b = !taken[z] && birth_on[z];
            const bool op = !taken[z] && !birth_on[z];
            f.push_back(b ? c.birth_hit : c.birth_miss);
            f.push_back(op ? c.clutter_hit : c.clutter_miss);
        }
        auto others = [&](std::size_t skip) {
            double p = 1.0;
            for (std::size_t s = 0; s < f.size(); ++s)
                if (s != skip) p *= f[s];
            return p;
        };
        const double all = others(f.size());
        e.total += all;
        ++e.associations;
        for (std::size_t i = 0; i < n; ++i) {
            if (choice[i] < 0) {
                e.w_miss[i] += others(i);
                e.p_miss[i] += all;
            } else {
                e.w_hit[i][static_cast<std::size_t>(choice[i])] += others(i);
                e.p_hit[i][static_cast<std::size_t>(choice[i])] += all;
            }
        }
        for (std::size_t z = 0; z < m; ++z) {
            const std::size_t sb = n + 2 * z, so = sb + 1;
            const bool b = !taken[z] && birth_on[z];
            const bool op = !taken[z] && !birth_on[z];
            (b ? e.w_birth_hit : e.w_birth_miss)[z] += others(sb);
            (op ? e.w_clutter_hit : e.w_clutter_miss)[z] += others(so);
            (b ? e.p_birth_hit : e.p_birth_miss)[z] += all;
            (op ? e.p_clutter_hit : e.p_clutter_miss)[z] += all;
        }
    };

    std::function<void(std::size_t)> columns = [&](std::size_t z) {
        if (z == m) {
            score();
            return;
        }
        if (taken[z]) {
            columns(z + 1);
            return;
        }
        birth_on[z] = true;
        columns(z + 1);
        birth_on[z] = false;
        columns(z + 1);
    };
    std::function<void(std::size_t)> rows = [&](std::size_t i) {
        if (i == n) {
            columns(0);
            return;
        }
        choice[i] = -1;
        rows(i + 1);
        const auto& entries = t.rows[i].entries;
        for (std::size_t k = 0; k < entries.size(); ++k) {
            if (taken[entries[k].column]) continue;
            taken[entries[k].column] = true;
            choice[i] = static_cast<int>(k);
            rows(i + 1);
            taken[entries[k].column] = false;
        }
        choice[i] = -1;
    };
    rows(0);
    return e;
}

}  // namespace oracle

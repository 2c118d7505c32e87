#include "hisp/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hisp {

namespace {

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(rng));
}

}  // namespace

AssociationTable random_table(const SyntheticTableSpec& spec, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    AssociationTable t;
    t.columns.resize(spec.columns);
    for (auto& c : t.columns) {
        const double beta = log_uniform(rng, 1e-6, 1e-2);
        c.birth_miss = 1.0 - beta;
        c.birth_hit = beta * log_uniform(rng, 1e-2, 1.0);
        c.clutter_hit = log_uniform(rng, 1e-3, 2e-2);
        c.clutter_miss = 1.0 - c.clutter_hit;
    }

    std::vector<std::vector<std::size_t>> gated(spec.rows);
    switch (spec.pattern) {
        case GatingPattern::matching: {
            std::vector<std::size_t> perm(spec.columns);
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            for (std::size_t i = 0; i < spec.rows && i < spec.columns; ++i)
                if (u01(rng) < 0.8) gated[i].push_back(perm[i]);
            break;
        }
        case GatingPattern::sparse: {
            const double p = spec.columns == 0 ? 0.0 : std::min(1.0, spec.mean_degree / spec.columns);
            for (auto& g : gated)
                for (std::size_t z = 0; z < spec.columns; ++z)
                    if (u01(rng) < p) g.push_back(z);
            break;
        }
        case GatingPattern::dense:
            for (auto& g : gated) {
                g.resize(spec.columns);
                std::iota(g.begin(), g.end(), 0);
            }
            break;
    }

    t.rows.resize(spec.rows);
    for (std::size_t i = 0; i < spec.rows; ++i) {
        auto& row = t.rows[i];
        const double alive = u01(rng);
        const double pd = 0.5 + 0.5 * u01(rng);
        row.miss_law.mass_phi = 1.0 - alive;
        row.miss_mass = (1.0 - alive) + alive * (1.0 - pd);
        GaussianComponent undetected;
        undetected.weight = alive * (1.0 - pd);
        row.miss_law.alive.components.push_back(undetected);
        for (std::size_t z : gated[i]) {
            AssociationEntry e;
            e.column = z;
            e.mass = alive * pd * log_uniform(rng, 1e-3, 1.0);
            row.entries.push_back(e);
        }
    }
    return t;
}

}  // namespace hisp

#include "hisp/filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

namespace hisp {

namespace {

void set_phi_as_rest(ExtendedLaw& law) {
    const double alive = law.alive.total_weight();
    law.mass_psi = std::clamp(law.mass_psi, 0.0, std::max(0.0, 1.0 - alive));
    law.mass_phi = std::max(0.0, 1.0 - alive - law.mass_psi);
}

Hypothesis child_of(const Hypothesis& parent, std::uint64_t id, ObservationPath::Entry entry) {
    Hypothesis h;
    h.id = id;
    h.individual = parent.individual;
    h.individual.path = parent.individual.path.extended(entry);
    h.confirmed = parent.confirmed;
    return h;
}

// Tidies one alive mixture: sub-threshold components go to phi, close
// components are merged.
void reduce_mixture(ExtendedLaw& law, const FilterConfig& config) {
    auto pruned = prune(law.alive, config.prune_threshold);
    law.alive = merge(pruned.mixture, config.merge_threshold);
    set_phi_as_rest(law);
}

}  // namespace

void FilterConfig::validate() const {
    if (!(prune_threshold >= 0.0 && prune_threshold < 1.0)) throw std::invalid_argument("tau must be in [0, 1)");
    if (!(merge_threshold >= 0.0)) throw std::invalid_argument("d_m must be non-negative");
    if (!(gate > 0.0)) throw std::invalid_argument("gate must be positive");
    if (!(0.0 <= confirmation.keep && confirmation.keep <= confirmation.confirm && confirmation.confirm <= 1.0))
        throw std::invalid_argument("confirmation thresholds must satisfy 0 <= tau_uc <= tau_c <= 1");
}

FilterState initialize() {
    FilterState state;
    Hypothesis x0;
    x0.id = state.next_id++;
    x0.individual.birth_step = 0;
    x0.individual.last_step = 0;
    x0.law.mass_phi = 1.0;
    x0.law.mass_psi = 0.0;
    state.hypotheses.push_back(std::move(x0));
    return state;
}

FilterState time_update(FilterState state, const MotionModel& motion) {
    if (!(motion.p_survival >= 0.0 && motion.p_survival <= 1.0))
        throw std::invalid_argument("survival probability must be in [0, 1]");
    const StateMatrix f = motion.transition();
    const StateMatrix q = motion.process_noise();
    for (auto& h : state.hypotheses) {
        const double alive = h.law.alive.total_weight();
        for (auto& c : h.law.alive.components) {
            c = kalman_predict(c, f, q);
            c.weight *= motion.p_survival;
        }
        h.law.mass_psi += (1.0 - motion.p_survival) * alive;
    }
    state.time += motion.dt;
    return state;
}

FilterState observation_update(FilterState state, const Scan& scan, const SensorModel& sensor,
                               const FilterConfig& config, StepDiagnostics* diagnostics) {
    std::set<ObservationId> seen;
    for (const auto& o : scan.observations)
        if (!seen.insert(o.id).second) throw std::invalid_argument("scan contains duplicate observation ids");

    const auto& hyps = state.hypotheses;
    const AssociationTable table = build_table(hyps, scan, sensor, TableOptions{config.gate});
    const WeightTable weights = config.weights == WeightMode::exact ? compute_weights_exact(table, config.exact)
                                                                    : compute_weights_approx1(table);
    if (weights.log_total == -std::numeric_limits<double>::infinity() || std::isnan(weights.log_total))
        throw std::domain_error("scan has zero probability under the current hypotheses");
    const AssociationPosterior post = posterior_masses(table, weights);

    std::vector<Hypothesis> out;
    out.reserve(hyps.size() * 2 + scan.observations.size());
    for (std::size_t i = 0; i < hyps.size(); ++i) {
        const auto& row = table.rows[i];
        const auto& parent = hyps[i];

        if (row.miss_mass > 0.0 && post.miss_by_row[i] > 0.0) {
            Hypothesis h = child_of(parent, state.next_id++, std::nullopt);
            const double scale = post.miss_by_row[i] / row.miss_mass;
            h.law.alive = row.miss_law.alive;
            h.law.alive.scale(scale);
            h.law.mass_psi = row.miss_law.mass_psi * scale;
            set_phi_as_rest(h.law);
            out.push_back(std::move(h));
        }
        for (std::size_t k = 0; k < row.entries.size(); ++k) {
            const double r = std::min(1.0, post.hit_by_column[i][k]);
            if (!(r > 0.0)) continue;
            const auto& entry = row.entries[k];
            Hypothesis h = child_of(parent, state.next_id++, scan.observations[entry.column].id);
            h.individual.last_step = scan.step;
            h.law.alive = entry.posterior;
            h.law.alive.scale(r);
            h.law.mass_psi = 0.0;
            set_phi_as_rest(h.law);
            out.push_back(std::move(h));
        }
    }
    for (std::size_t z = 0; z < scan.observations.size(); ++z) {
        const double r = std::min(1.0, post.birth_by_column[z]);
        if (!(r > 0.0)) continue;
        Hypothesis h;
        h.id = state.next_id++;
        h.individual.kind = IndividualKind::birth;
        h.individual.birth_step = scan.step;
        h.individual.last_step = scan.step;
        h.individual.path =
            ObservationPath::empty_of_length(static_cast<std::size_t>(state.step)).extended(scan.observations[z].id);
        h.law.alive = table.columns[z].birth_posterior;
        h.law.alive.scale(r);
        h.law.mass_psi = 0.0;
        set_phi_as_rest(h.law);
        out.push_back(std::move(h));
    }

    if (diagnostics) {
        diagnostics->step = scan.step;
        diagnostics->time = scan.time;
        diagnostics->rows = hyps.size();
        diagnostics->observations = scan.observations.size();
        diagnostics->after_update = out.size();
        diagnostics->log_total = weights.log_total;
        double col_err = 0.0, row_err = 0.0;
        std::vector<double> col_sum(table.num_columns(), 0.0);
        for (std::size_t z = 0; z < table.num_columns(); ++z)
            col_sum[z] = post.birth_by_column[z] + post.clutter_by_column[z];
        for (std::size_t i = 0; i < table.num_rows(); ++i) {
            double rs = post.miss_by_row[i];
            for (std::size_t k = 0; k < table.rows[i].entries.size(); ++k) {
                rs += post.hit_by_row[i][k];
                col_sum[table.rows[i].entries[k].column] += post.hit_by_column[i][k];
            }
            row_err = std::max(row_err, std::abs(rs - 1.0));
        }
        for (std::size_t z = 0; z < table.num_columns(); ++z) {
            col_err = std::max(col_err, std::abs(col_sum[z] - 1.0));
            row_err = std::max(row_err, std::abs(post.birth_hit_by_row[z] + post.birth_miss_by_row[z] - 1.0));
            row_err = std::max(row_err, std::abs(post.clutter_hit_by_row[z] + post.clutter_miss_by_row[z] - 1.0));
        }
        diagnostics->max_column_sum_error = col_err;
        diagnostics->max_row_sum_error = row_err;
        diagnostics->max_consistency_error = max_consistency_error(post, weights.log_total);
    }

    state.hypotheses = std::move(out);
    state.step += 1;
    state.time = scan.time;
    return state;
}

FilterState reduce(FilterState state, const FilterConfig& config) {
    std::vector<Hypothesis> kept;
    kept.reserve(state.hypotheses.size());
    for (auto& h : state.hypotheses) {
        reduce_mixture(h.law, config);
        if (alive_probability(h.law) >= config.prune_threshold && !h.law.alive.empty()) kept.push_back(std::move(h));
    }

    // Group by the latest path entry (or not at all), strongest first within
    // each group.
    std::map<ObservationPath::Entry, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        const auto key = config.merge_scope == MergeScope::same_tail ? kept[i].individual.path.tail() : std::nullopt;
        groups[key].push_back(i);
    }

    std::vector<Hypothesis> out;
    out.reserve(kept.size());
    for (auto& [tail, members] : groups) {
        std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
            return alive_probability(kept[a].law) > alive_probability(kept[b].law);
        });
        std::vector<bool> used(members.size(), false);
        for (std::size_t a = 0; a < members.size(); ++a) {
            if (used[a]) continue;
            used[a] = true;
            const Hypothesis& head = kept[members[a]];
            const auto& dom = head.law.alive.components[head.law.alive.dominant()];
            Eigen::LLT<StateMatrix> llt(dom.cov);
            if (llt.info() != Eigen::Success) throw std::domain_error("reduce: covariance not positive definite");

            std::vector<std::size_t> group{members[a]};
            for (std::size_t b = a + 1; b < members.size(); ++b) {
                if (used[b]) continue;
                const auto& other = kept[members[b]].law.alive;
                const auto& od = other.components[other.dominant()];
                if (llt.matrixL().solve(od.mean - dom.mean).squaredNorm() <= config.merge_threshold) {
                    used[b] = true;
                    group.push_back(members[b]);
                }
            }
            if (group.size() == 1) {
                out.push_back(std::move(kept[members[a]]));
                continue;
            }
            Hypothesis merged = head;
            std::vector<GaussianComponent> parts;
            double psi = 0.0;
            bool confirmed = false;
            for (std::size_t g : group) {
                const auto& h = kept[g];
                parts.insert(parts.end(), h.law.alive.components.begin(), h.law.alive.components.end());
                psi += h.law.mass_psi;
                confirmed = confirmed || h.confirmed;
            }
            GaussianComponent c = moment_match(parts);
            c.weight = std::min(1.0, c.weight);
            merged.law.alive.components = {c};
            merged.law.mass_psi = std::min(psi, 1.0 - c.weight);
            set_phi_as_rest(merged.law);
            merged.confirmed = confirmed;
            out.push_back(std::move(merged));
        }
    }
    std::sort(out.begin(), out.end(), [](const Hypothesis& a, const Hypothesis& b) { return a.id < b.id; });
    for (auto& h : out) h = update_confirmation(std::move(h), config.confirmation);
    state.hypotheses = std::move(out);
    return state;
}

std::vector<Estimate> extract_estimates(const FilterState& state) {
    std::vector<Estimate> out;
    for (const auto& h : state.hypotheses) {
        if (!h.confirmed || h.law.alive.empty()) continue;
        out.push_back({h.law.alive.components[h.law.alive.dominant()].mean, h.id});
    }
    return out;
}

HispFilter::HispFilter(MotionModel motion, SensorModel sensor, FilterConfig config)
    : motion_(motion), sensor_(std::move(sensor)), config_(config), state_(initialize()) {
    config_.validate();
}

StepDiagnostics HispFilter::process(const Scan& scan) {
    StepDiagnostics d;
    state_ = time_update(std::move(state_), motion_);
    state_ = observation_update(std::move(state_), scan, sensor_, config_, &d);
    state_ = reduce(std::move(state_), config_);
    d.after_reduction = state_.hypotheses.size();
    d.confirmed = static_cast<std::size_t>(
        std::count_if(state_.hypotheses.begin(), state_.hypotheses.end(), [](const auto& h) { return h.confirmed; }));
    return d;
}

}  // namespace hisp

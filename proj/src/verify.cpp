#include "hisp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "hisp/association.hpp"
#include "hisp/scenario.hpp"
#include "hisp/synthetic.hpp"

namespace hisp {

namespace {

constexpr double kTolerance = 1e-10;

double log_rel_error(double a, double b) {
    if (a == b) return 0.0;   // includes both -inf
    if (!std::isfinite(a) || !std::isfinite(b)) return std::numeric_limits<double>::infinity();
    return std::abs(std::expm1(a - b));
}

double weights_error(const WeightTable& a, const WeightTable& b) {
    double e = log_rel_error(a.log_total, b.log_total);
    auto vec = [&](const std::vector<double>& x, const std::vector<double>& y) {
        for (std::size_t i = 0; i < x.size(); ++i) e = std::max(e, log_rel_error(x[i], y[i]));
    };
    vec(a.log_miss, b.log_miss);
    for (std::size_t i = 0; i < a.log_hit.size(); ++i) vec(a.log_hit[i], b.log_hit[i]);
    vec(a.log_birth_hit, b.log_birth_hit);
    vec(a.log_birth_miss, b.log_birth_miss);
    vec(a.log_clutter_hit, b.log_clutter_hit);
    vec(a.log_clutter_miss, b.log_clutter_miss);
    return e;
}

double posterior_error(const AssociationPosterior& a, const AssociationPosterior& b) {
    double e = 0.0;
    auto vec = [&](const std::vector<double>& x, const std::vector<double>& y) {
        for (std::size_t i = 0; i < x.size(); ++i) e = std::max(e, std::abs(x[i] - y[i]));
    };
    vec(a.miss_by_row, b.miss_by_row);
    for (std::size_t i = 0; i < a.hit_by_row.size(); ++i) {
        vec(a.hit_by_row[i], b.hit_by_row[i]);
        vec(a.hit_by_column[i], b.hit_by_column[i]);
    }
    vec(a.birth_by_column, b.birth_by_column);
    vec(a.clutter_by_column, b.clutter_by_column);
    vec(a.birth_miss_by_row, b.birth_miss_by_row);
    vec(a.clutter_miss_by_row, b.clutter_miss_by_row);
    return e;
}

std::string fmt(const char* label, double v) {
    std::ostringstream os;
    os << label << '=' << v;
    return os.str();
}

SuiteResult equivalence_suite(const VerifyOptions& options) {
    std::mt19937_64 rng(options.seed);
    std::uniform_int_distribution<std::size_t> size(0, 4);
    double worst_w = 0.0, worst_post = 0.0;
    bool perturbed = false;
    for (int n = 0; n < options.instances; ++n) {
        const AssociationTable t = random_table({size(rng), size(rng), GatingPattern::matching}, rng);
        WeightTable approx = compute_weights_approx1(t);
        if (options.perturb && !perturbed && !approx.log_miss.empty()) {
            approx.log_miss[0] += std::log1p(1e-6);
            perturbed = true;
        }
        const WeightTable exact = compute_weights_exact(t);
        worst_w = std::max(worst_w, weights_error(approx, exact));
        worst_post = std::max(worst_post, posterior_error(posterior_masses(t, approx), posterior_masses(t, exact)));
    }
    return {"factorised weights match exact enumeration (disjoint gates)",
            worst_w <= kTolerance && worst_post <= kTolerance,
            fmt("max_rel_weight_err", worst_w) + " " + fmt("max_posterior_err", worst_post)};
}

SuiteResult consistency_suite(const VerifyOptions& options) {
    std::mt19937_64 rng(options.seed + 1);
    std::uniform_int_distribution<std::size_t> size(0, 6);
    double worst = 0.0;
    for (int n = 0; n < options.instances; ++n) {
        const AssociationTable t = random_table({size(rng), size(rng), GatingPattern::sparse, 2.0}, rng);
        const WeightTable w = compute_weights_exact(t);
        worst = std::max(worst, max_consistency_error(posterior_masses(t, w), w.log_total));
    }
    return {"row and column sums equal P_t under exact weights", worst <= kTolerance, fmt("max_rel_err", worst)};
}

SuiteResult factorisation_suite(const VerifyOptions& options) {
    std::mt19937_64 rng(options.seed + 2);
    std::uniform_int_distribution<std::size_t> size(0, 6);
    double worst = 0.0;
    for (int n = 0; n < options.instances; ++n) {
        const AssociationTable t = random_table({size(rng), size(rng), GatingPattern::matching}, rng);
        worst = std::max(worst, log_rel_error(log_factorised_total_approx2(t), compute_weights_exact(t).log_total));
        worst = std::max(worst, log_rel_error(compute_weights_approx1(t).log_total, compute_weights_exact(t).log_total));
    }
    return {"factorised P_t equals exact P_t (disjoint gates)", worst <= kTolerance, fmt("max_rel_err", worst)};
}

SuiteResult reference_suite(const VerifyOptions& options) {
    std::mt19937_64 rng(options.seed + 3);
    double worst = 0.0;
    for (int n = 0; n < 20; ++n) {
        const AssociationTable t = random_table({60, 25, GatingPattern::sparse, 3.0}, rng);
        worst = std::max(worst, weights_error(compute_weights_approx1(t), compute_weights_approx1_serial(t)));
    }
    return {"parallel factorised weights match the serial reference", worst <= kTolerance, fmt("max_rel_err", worst)};
}

SuiteResult normalisation_suite(const VerifyOptions& options) {
    Scenario s = Scenario::for_case(1);
    s.initial_states.resize(2);
    s.duration = 20 * s.motion.dt;
    FilterConfig cfg;
    cfg.weights = WeightMode::exact;
    cfg.exact = ExactOptions{100000, 22};
    // Below about 1e-2 the clutter-born hypotheses join into one gating
    // component of 20+ columns and the exact sum is out of reach.
    cfg.prune_threshold = 1e-2;
    std::mt19937_64 rng = run_rng(options.seed, 0);
    const Trajectories truth = generate_truth(s, rng);
    HispFilter filter(s.motion, s.sensor, cfg);
    double col = 0.0, row = 0.0, cons = 0.0, law = 0.0;
    for (int k = 1; k <= s.num_scans(); ++k) {
        const auto d = filter.process(simulate_scan(truth.states[k], s.sensor, k, truth.times[k], rng));
        col = std::max(col, d.max_column_sum_error);
        row = std::max(row, d.max_row_sum_error);
        cons = std::max(cons, d.max_consistency_error);
        for (const auto& h : filter.state().hypotheses) law = std::max(law, std::abs(h.law.total() - 1.0));
    }
    const bool ok = col <= kTolerance && row <= kTolerance && cons <= kTolerance && law <= 1e-9;
    return {"per-update normalisation with exact weights (2 objects, 20 scans, tau 1e-2)", ok,
            fmt("col", col) + " " + fmt("row", row) + " " + fmt("normaliser_vs_P", cons) + " " + fmt("law", law)};
}

}  // namespace

std::vector<SuiteResult> run_verification(const VerifyOptions& options) {
    std::vector<SuiteResult> out;
    auto guarded = [&](SuiteResult (*suite)(const VerifyOptions&), const char* name) {
        try {
            out.push_back(suite(options));
        } catch (const std::exception& e) {
            out.push_back({name, false, std::string("exception: ") + e.what()});
        }
    };
    guarded(equivalence_suite, "equivalence");
    guarded(consistency_suite, "consistency");
    guarded(factorisation_suite, "factorisation");
    guarded(reference_suite, "reference");
    guarded(normalisation_suite, "normalisation");
    return out;
}

}  // namespace hisp

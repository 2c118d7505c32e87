#include "hisp/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <ranges>
#include <stdexcept>
#include <string>

namespace hisp {

std::vector<StateVector> default_initial_states() {
    return {StateVector(-400, -50, 1, 1.1), StateVector(-50, -300, 0.4, 0.6), StateVector(50, -300, -0.4, 0.6),
            StateVector(150, 150, -0.2, 0.2), StateVector(200, 300, 0.25, -1)};
}

Scenario Scenario::for_case(int case_id) {
    Scenario s;
    s.case_id = case_id;
    s.initial_states = default_initial_states();
    switch (case_id) {
        case 1:
            s.sensor.birth.p_birth = 1e-6;
            s.sensor.observation.p_detect = 0.5;
            s.sensor.clutter.p_false_alarm = 1.34e-3;
            break;
        case 2:
            s.sensor.birth.p_birth = 5e-7;
            s.sensor.observation.p_detect = 0.8;
            s.sensor.clutter.p_false_alarm = 1.54e-2;
            break;
        case 3:
            s.sensor.birth.p_birth = 1e-6;
            s.sensor.observation.p_detect = 0.995;
            s.sensor.clutter.p_false_alarm = 7.67e-3;
            s.sensor.observation.sigma_r = 4.87;
            s.sensor.observation.sigma_theta = 3.5e-3;
            break;
        default:
            throw std::invalid_argument("unknown case " + std::to_string(case_id) + " (expected 1, 2 or 3)");
    }
    return s;
}

int Scenario::num_scans() const { return static_cast<int>(std::floor(duration / motion.dt + 1e-9)); }

void Scenario::validate() const {
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!(motion.dt > 0.0) || !(duration >= motion.dt)) throw std::invalid_argument("need dt > 0 and duration >= dt");
    if (!(motion.q_var >= 0.0) || !(truth_q_var >= 0.0)) throw std::invalid_argument("noise variances must be >= 0");
    if (!unit(motion.p_survival)) throw std::invalid_argument("p_s must be in [0, 1]");
    const auto& o = sensor.observation;
    if (!(o.sigma_r > 0.0) || !(o.sigma_theta > 0.0)) throw std::invalid_argument("sigma_r and sigma_theta must be > 0");
    if (!unit(o.p_detect)) throw std::invalid_argument("p_d must be in [0, 1]");
    if (!(sensor.clutter.p_false_alarm >= 0.0 && sensor.clutter.p_false_alarm < 1.0))
        throw std::invalid_argument("p_fa must be in [0, 1)");
    if (!(sensor.birth.p_birth >= 0.0)) throw std::invalid_argument("p_b must be >= 0");
    if (!(sensor.birth.sigma_v > 0.0)) throw std::invalid_argument("sigma_v must be > 0");
    for (const auto& x : initial_states)
        if (!x.allFinite()) throw std::invalid_argument("initial states must be finite");
}

Trajectories generate_truth(const Scenario& scenario, std::mt19937_64& rng) {
    const auto& m = scenario.motion;
    const StateMatrix f = m.transition();
    const double sd = std::sqrt(scenario.truth_q_var);
    std::normal_distribution<double> accel(0.0, 1.0);
    Trajectories t;
    const int n = scenario.num_scans();
    std::vector<StateVector> x = scenario.initial_states;
    for (int k = 0; k <= n; ++k) {
        t.times.push_back(k * m.dt);
        t.states.push_back(x);
        for (auto& s : x) {
            const double ax = sd * accel(rng), ay = sd * accel(rng);
            s = (f * s).eval();
            s(0) += 0.5 * m.dt * m.dt * ax;
            s(1) += 0.5 * m.dt * m.dt * ay;
            s(2) += m.dt * ax;
            s(3) += m.dt * ay;
        }
    }
    return t;
}

Scan simulate_scan(const std::vector<StateVector>& truth, const SensorModel& sensor, int step, double time,
                   std::mt19937_64& rng) {
    const auto& grid = sensor.grid;
    const auto& obs = sensor.observation;
    std::bernoulli_distribution detected(obs.p_detect);
    std::normal_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    std::vector<MeasVector> values;
    for (const auto& x : truth) {
        if (!in_surveillance(grid, x)) continue;
        if (!detected(rng)) continue;
        const MeasVector h = range_bearing(x).predicted;
        MeasVector z(h(0) + obs.sigma_r * unit(rng), h(1) + obs.sigma_theta * unit(rng));
        z(0) = std::clamp(z(0), grid.r_min(), grid.r_max());
        z(1) = wrap_angle(z(1));
        values.push_back(z);
    }

    const int cells = grid.cell_count();
    std::binomial_distribution<int> clutter_count(cells, sensor.clutter.p_false_alarm);
    const int nfa = clutter_count(rng);
    std::vector<int> chosen(static_cast<std::size_t>(nfa));
    std::ranges::sample(std::views::iota(0, cells), chosen.begin(), nfa, rng);
    for (int id : chosen) {
        const auto b = grid.bounds(grid.from_flat(id));
        MeasVector z(b.r_lo + u01(rng) * (b.r_hi - b.r_lo), b.theta_lo + u01(rng) * (b.theta_hi - b.theta_lo));
        // Keep the sample inside the half-open bearing convention.
        if (z(1) <= -std::numbers::pi) z(1) = std::nextafter(-std::numbers::pi, 0.0);
        values.push_back(z);
    }
    std::shuffle(values.begin(), values.end(), rng);
    return make_scan(grid, step, time, values);
}

std::mt19937_64 run_rng(std::uint64_t seed, int run) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(run), 0x5eedu};
    return std::mt19937_64(seq);
}

namespace {

std::vector<Eigen::Vector2d> positions_in_region(const std::vector<StateVector>& states, const SensorGrid& grid) {
    std::vector<Eigen::Vector2d> out;
    for (const auto& s : states)
        if (in_surveillance(grid, s)) out.emplace_back(s(0), s(1));
    return out;
}

RunResult run_one(const Scenario& scenario, const RunOptions& options, int run) {
    std::mt19937_64 rng = run_rng(options.seed, run);
    const Trajectories truth = generate_truth(scenario, rng);
    RunResult r;
    r.run = run;
    HispFilter hisp(scenario.motion, scenario.sensor, options.filter);
    GmPhdFilter phd(scenario.motion, scenario.sensor, options.phd);
    for (int k = 1; k <= scenario.num_scans(); ++k) {
        const Scan scan = simulate_scan(truth.states[k], scenario.sensor, k, truth.times[k], rng);
        const auto truth_pos = positions_in_region(truth.states[k], scenario.sensor.grid);
        if (options.run_hisp) {
            hisp.process(scan);
            std::vector<Eigen::Vector2d> est;
            for (const auto& e : hisp.estimates()) est.emplace_back(e.state(0), e.state(1));
            r.hisp.push_back(ospa(truth_pos, est, options.ospa));
            int tracked = 0;
            for (const auto& p : truth_pos)
                if (std::any_of(est.begin(), est.end(),
                                [&](const auto& e) { return (e - p).norm() <= options.track_radius; }))
                    ++tracked;
            r.hisp_tracked.push_back(tracked);
            r.hisp_hypotheses.push_back(hisp.state().hypotheses.size());
        }
        if (options.run_phd) {
            phd.process(scan);
            std::vector<Eigen::Vector2d> est;
            for (const auto& e : phd.estimates()) est.emplace_back(e(0), e(1));
            r.phd.push_back(ospa(truth_pos, est, options.ospa));
        }
    }
    return r;
}

std::vector<double> mean_series(const std::vector<RunResult>& runs, std::vector<OspaResult> RunResult::*member,
                                std::size_t n) {
    std::vector<double> mean(n, 0.0);
    if (runs.empty() || (runs.front().*member).empty()) return {};
    for (const auto& r : runs)
        for (std::size_t k = 0; k < n; ++k) mean[k] += (r.*member)[k].total;
    for (double& v : mean) v /= static_cast<double>(runs.size());
    return mean;
}

}  // namespace

CaseResult run_case(const Scenario& scenario, const RunOptions& options) {
    scenario.validate();
    options.filter.validate();
    if (options.runs < 1) throw std::invalid_argument("need at least one run");
    CaseResult result;
    for (int k = 1; k <= scenario.num_scans(); ++k) result.times.push_back(k * scenario.motion.dt);
    result.runs.resize(static_cast<std::size_t>(options.runs));

    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (int run = 0; run < options.runs; ++run) {
        try {
            result.runs[static_cast<std::size_t>(run)] = run_one(scenario, options, run);
        } catch (...) {
#pragma omp critical
            failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    const std::size_t n = result.times.size();
    result.hisp_mean = mean_series(result.runs, &RunResult::hisp, n);
    result.phd_mean = mean_series(result.runs, &RunResult::phd, n);
    return result;
}

double time_average(const std::vector<double>& series, std::size_t burn_in) {
    if (series.size() <= burn_in) return 0.0;
    double s = 0.0;
    for (std::size_t k = burn_in; k < series.size(); ++k) s += series[k];
    return s / static_cast<double>(series.size() - burn_in);
}

}  // namespace hisp

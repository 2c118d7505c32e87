#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "hisp/filter.hpp"
#include "hisp/ospa.hpp"
#include "hisp/phd.hpp"
#include "hisp/sensor.hpp"

namespace hisp {

/// Five-object range-bearing scenario; scans every dt seconds for `duration`.
struct Scenario {
    int case_id = 1;
    std::vector<StateVector> initial_states;
    double duration = 300.0;
    MotionModel motion;            // model used by the filters
    double truth_q_var = 1e-4;     // acceleration noise of the simulated truth
    SensorModel sensor;

    /// Case 1, 2 or 3; std::invalid_argument otherwise.
    static Scenario for_case(int case_id);
    [[nodiscard]] int num_scans() const;
    /// Throws std::invalid_argument on inconsistent parameters.
    void validate() const;
};

std::vector<StateVector> default_initial_states();

/// states[k][i]: object i at time k * dt, for k = 0 .. num_scans.
struct Trajectories {
    std::vector<double> times;
    std::vector<std::vector<StateVector>> states;
};

/// Constant-velocity propagation with sampled acceleration noise of variance
/// `truth_q_var` (zero gives straight lines). Objects never disappear.
Trajectories generate_truth(const Scenario& scenario, std::mt19937_64& rng);

/// Detections of the objects inside the surveillance region (each with
/// probability p_D) plus per-cell clutter. Clutter count is binomial over the
/// cells; each false alarm is uniform in (r, theta) within a distinct cell.
Scan simulate_scan(const std::vector<StateVector>& truth, const SensorModel& sensor, int step, double time,
                   std::mt19937_64& rng);

/// RNG stream of one Monte Carlo run.
std::mt19937_64 run_rng(std::uint64_t seed, int run);

struct RunOptions {
    int runs = 50;
    std::uint64_t seed = 7;
    bool run_hisp = true;
    bool run_phd = true;
    OspaParams ospa;
    FilterConfig filter;
    PhdConfig phd;
    /// A truth object counts as tracked when a confirmed estimate lies
    /// within this distance [m].
    double track_radius = 30.0;
};

struct RunResult {
    int run = 0;
    std::vector<OspaResult> hisp, phd;   // one per scan
    std::vector<int> hisp_tracked;       // truth objects with a nearby estimate, per scan
    std::vector<std::size_t> hisp_hypotheses;
};

struct CaseResult {
    std::vector<double> times;           // scan times
    std::vector<RunResult> runs;
    std::vector<double> hisp_mean, phd_mean;   // mean OSPA over runs, per scan
};

/// Monte Carlo runs in parallel; both filters see the same scans in a run.
CaseResult run_case(const Scenario& scenario, const RunOptions& options);

/// Mean of `series` over scans with index >= burn_in.
double time_average(const std::vector<double>& series, std::size_t burn_in);

}  // namespace hisp

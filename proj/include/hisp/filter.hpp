#pragma once

#include <cstdint>
#include <vector>

#include "hisp/association.hpp"
#include "hisp/hypothesis.hpp"
#include "hisp/sensor.hpp"

namespace hisp {

enum class WeightMode { approx1, exact };

/// Which hypotheses may be merged: only those with the same latest path
/// entry, or any two whose dominant components are close.
enum class MergeScope { same_tail, any };

struct FilterConfig {
    double prune_threshold = 1e-5;   // tau, on alive probability
    double merge_threshold = 4.0;    // d_m, squared Mahalanobis
    MergeScope merge_scope = MergeScope::same_tail;
    ConfirmationThresholds confirmation;
    double gate = 25.0;
    WeightMode weights = WeightMode::approx1;
    ExactOptions exact;

    /// Throws std::invalid_argument on out-of-range values.
    void validate() const;
};

struct FilterState {
    int step = 0;            // number of processed scans
    double time = 0.0;
    std::vector<Hypothesis> hypotheses;
    std::uint64_t next_id = 0;
};

/// Per-scan bookkeeping.
struct StepDiagnostics {
    int step = 0;
    double time = 0.0;
    std::size_t rows = 0;                   // propagated hypotheses entering the update
    std::size_t observations = 0;
    std::size_t after_update = 0;
    std::size_t after_reduction = 0;
    std::size_t confirmed = 0;
    double log_total = 0.0;                 // log P_t
    double max_column_sum_error = 0.0;      // |sum of column-normalised masses - 1|
    double max_row_sum_error = 0.0;         // |sum of row-normalised masses - 1|
    double max_consistency_error = 0.0;     // normalisers against P_t
};

struct Estimate {
    StateVector state = StateVector::Zero();
    std::uint64_t id = 0;
};

/// X_0 = {x_0}: a single potential individual that surely does not exist.
FilterState initialize();

/// Prediction of every alive mixture; lost survival mass moves to psi.
FilterState time_update(FilterState state, const MotionModel& motion);

/// Replaces every hypothesis by its undetected child and its detected
/// children (gated pairs only), and adds one newborn per observation. Throws
/// std::invalid_argument on duplicate observation ids and std::domain_error
/// when the scan has zero probability under the model.
FilterState observation_update(FilterState state, const Scan& scan, const SensorModel& sensor,
                               const FilterConfig& config, StepDiagnostics* diagnostics = nullptr);

/// Pruning, merging of close hypotheses (within `merge_scope`), then
/// confirmation.
FilterState reduce(FilterState state, const FilterConfig& config);

/// Dominant-component mean of every confirmed hypothesis.
std::vector<Estimate> extract_estimates(const FilterState& state);

/// time_update, observation_update and reduce for one scan.
class HispFilter {
public:
    HispFilter(MotionModel motion, SensorModel sensor, FilterConfig config);

    StepDiagnostics process(const Scan& scan);
    [[nodiscard]] std::vector<Estimate> estimates() const { return extract_estimates(state_); }
    [[nodiscard]] const FilterState& state() const { return state_; }
    [[nodiscard]] const FilterConfig& config() const { return config_; }

private:
    MotionModel motion_;
    SensorModel sensor_;
    FilterConfig config_;
    FilterState state_;
};

}  // namespace hisp

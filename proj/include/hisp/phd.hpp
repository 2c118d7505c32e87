#pragma once

#include <vector>

#include "hisp/gaussian.hpp"
#include "hisp/sensor.hpp"

namespace hisp {

/// First-moment intensity as a Gaussian mixture.
using PhdIntensity = GaussianMixture;

struct PhdConfig {
    double prune_threshold = 1e-5;
    double merge_threshold = 4.0;
    std::size_t max_components = 100;
    double gate = 25.0;
    double extract_threshold = 0.5;
};

/// Measurement-driven birth: one component per observation of the previous
/// scan, localised at its cell, sharing a total weight of p_b times the
/// surveillance area.
PhdIntensity adaptive_birth(const Scan& previous, const SensorModel& sensor);

/// Survival-scaled prediction of `intensity` plus `birth` (birth components
/// are predicted too, having been placed at the previous scan).
PhdIntensity phd_predict(const PhdIntensity& intensity, const MotionModel& motion, const PhdIntensity& birth);

/// Missed-detection terms plus one normalised term set per observation.
/// Clutter density is the per-cell false-alarm probability over the cell
/// volume in observation coordinates.
PhdIntensity phd_update(const PhdIntensity& intensity, const Scan& scan, const SensorModel& sensor,
                        double gate = 25.0);

/// Prune, merge, then keep the `max_components` heaviest.
PhdIntensity phd_reduce(const PhdIntensity& intensity, const PhdConfig& config);

/// Means of components whose weight exceeds `threshold`.
std::vector<StateVector> phd_extract(const PhdIntensity& intensity, double threshold = 0.5);

class GmPhdFilter {
public:
    GmPhdFilter(MotionModel motion, SensorModel sensor, PhdConfig config = {});

    void process(const Scan& scan);
    [[nodiscard]] std::vector<StateVector> estimates() const {
        return phd_extract(intensity_, config_.extract_threshold);
    }
    [[nodiscard]] const PhdIntensity& intensity() const { return intensity_; }

private:
    MotionModel motion_;
    SensorModel sensor_;
    PhdConfig config_;
    PhdIntensity intensity_;
    Scan previous_;
};

}  // namespace hisp

#include "hisp/phd.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace hisp {

PhdIntensity adaptive_birth(const Scan& previous, const SensorModel& sensor) {
    PhdIntensity birth;
    if (previous.observations.empty()) return birth;
    const double each = sensor.birth.p_birth * sensor.grid.surveillance_area() /
                        static_cast<double>(previous.observations.size());
    const MeasMatrix noise = sensor.observation.noise();
    for (const auto& o : previous.observations) {
        const GaussianComponent g = cell_gaussian(sensor.grid, o.cell, sensor.birth.sigma_v);
        GaussianComponent c = ekf_update(g, o.value, range_bearing(g.mean), noise).posterior;
        c.weight = each;
        birth.components.push_back(c);
    }
    return birth;
}

PhdIntensity phd_predict(const PhdIntensity& intensity, const MotionModel& motion, const PhdIntensity& birth) {
    const StateMatrix f = motion.transition();
    const StateMatrix q = motion.process_noise();
    PhdIntensity out;
    out.components.reserve(intensity.size() + birth.size());
    for (const auto& c : intensity.components) {
        GaussianComponent p = kalman_predict(c, f, q);
        p.weight *= motion.p_survival;
        out.components.push_back(p);
    }
    for (const auto& c : birth.components) out.components.push_back(kalman_predict(c, f, q));
    return out;
}

PhdIntensity phd_update(const PhdIntensity& intensity, const Scan& scan, const SensorModel& sensor, double gate) {
    const double pd = sensor.observation.p_detect;
    const MeasMatrix noise = sensor.observation.noise();
    const double kappa = sensor.clutter.p_false_alarm / sensor.grid.cell_volume();

    PhdIntensity out;
    std::vector<std::optional<Innovation>> innovations;
    std::vector<double> detect;
    for (const auto& c : intensity.components) {
        const double pd_c = in_surveillance(sensor.grid, c.mean) ? pd : 0.0;
        GaussianComponent miss = c;
        miss.weight = c.weight * (1.0 - pd_c);
        if (miss.weight > 0.0) out.components.push_back(miss);
        detect.push_back(pd_c * c.weight);
        if (pd_c > 0.0) innovations.emplace_back(Innovation(c, range_bearing(c.mean), noise, Residual::bearing));
        else innovations.emplace_back(std::nullopt);
    }
    for (const auto& o : scan.observations) {
        std::vector<GaussianComponent> terms;
        double norm = kappa;
        for (std::size_t j = 0; j < intensity.size(); ++j) {
            if (!innovations[j] || !(detect[j] > 0.0)) continue;
            if (innovations[j]->mahalanobis2(o.value) > gate) continue;
            const double l = detect[j] * std::exp(innovations[j]->log_likelihood(o.value));
            if (!(l > 0.0)) continue;
            GaussianComponent post = innovations[j]->update(o.value);
            post.weight = l;
            norm += l;
            terms.push_back(post);
        }
        for (auto& t : terms) {
            t.weight /= norm;
            out.components.push_back(t);
        }
    }
    return out;
}

PhdIntensity phd_reduce(const PhdIntensity& intensity, const PhdConfig& config) {
    PhdIntensity out = merge(prune(intensity, config.prune_threshold).mixture, config.merge_threshold);
    if (out.size() > config.max_components) {
        std::stable_sort(out.components.begin(), out.components.end(),
                         [](const auto& a, const auto& b) { return a.weight > b.weight; });
        out.components.resize(config.max_components);
    }
    return out;
}

std::vector<StateVector> phd_extract(const PhdIntensity& intensity, double threshold) {
    std::vector<StateVector> out;
    for (const auto& c : intensity.components)
        if (c.weight > threshold) out.push_back(c.mean);
    return out;
}

GmPhdFilter::GmPhdFilter(MotionModel motion, SensorModel sensor, PhdConfig config)
    : motion_(motion), sensor_(std::move(sensor)), config_(config) {}

void GmPhdFilter::process(const Scan& scan) {
    const PhdIntensity birth = adaptive_birth(previous_, sensor_);
    intensity_ = phd_predict(intensity_, motion_, birth);
    intensity_ = phd_update(intensity_, scan, sensor_, config_.gate);
    intensity_ = phd_reduce(intensity_, config_);
    previous_ = scan;
}

}  // namespace hisp

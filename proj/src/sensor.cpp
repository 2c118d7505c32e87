#include "hisp/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hisp {

namespace {

int checked_count(double span, double step, const char* what) {
    if (!(step > 0.0) || !(span > 0.0)) throw std::invalid_argument(std::string(what) + ": non-positive size");
    const double n = span / step;
    const double rounded = std::round(n);
    if (std::abs(n - rounded) > 1e-9 * std::max(1.0, n))
        throw std::invalid_argument(std::string(what) + ": span is not a whole number of cells");
    return static_cast<int>(rounded);
}

}  // namespace

StateMatrix MotionModel::transition() const {
    StateMatrix f = StateMatrix::Identity();
    f(0, 2) = dt;
    f(1, 3) = dt;
    return f;
}

StateMatrix MotionModel::process_noise() const {
    const double dt2 = dt * dt, dt3 = dt2 * dt, dt4 = dt3 * dt;
    StateMatrix q = StateMatrix::Zero();
    q(0, 0) = q(1, 1) = dt4 / 4.0;
    q(0, 2) = q(2, 0) = q(1, 3) = q(3, 1) = dt3 / 2.0;
    q(2, 2) = q(3, 3) = dt2;
    return q_var * q;
}

SensorGrid::SensorGrid(double r_min, double r_max, double cell_dr, double cell_dtheta)
    : r_min_(r_min), r_max_(r_max), dr_(cell_dr), dtheta_(cell_dtheta) {
    if (!(r_min >= 0.0 && r_max > r_min)) throw std::invalid_argument("sensor grid: bad range bounds");
    n_range_ = checked_count(r_max - r_min, cell_dr, "range cells");
    n_bearing_ = checked_count(2.0 * std::numbers::pi, cell_dtheta, "bearing cells");
}

bool SensorGrid::contains(const MeasVector& z) const {
    return std::isfinite(z(0)) && std::isfinite(z(1)) && z(0) >= r_min_ && z(0) <= r_max_ &&
           z(1) > -std::numbers::pi && z(1) <= std::numbers::pi;
}

CellIndex SensorGrid::cell_of(const MeasVector& z) const {
    if (!contains(z))
        throw std::out_of_range("observation (" + std::to_string(z(0)) + ", " + std::to_string(z(1)) +
                                ") outside sensor bounds");
    const int i = std::min(n_range_ - 1, static_cast<int>(std::floor((z(0) - r_min_) / dr_)));
    const int j = std::min(n_bearing_ - 1, static_cast<int>(std::floor((z(1) + std::numbers::pi) / dtheta_)));
    return {std::max(0, i), std::max(0, j)};
}

CellBounds SensorGrid::bounds(CellIndex c) const {
    return {r_min_ + c.range * dr_, r_min_ + (c.range + 1) * dr_, -std::numbers::pi + c.bearing * dtheta_,
            -std::numbers::pi + (c.bearing + 1) * dtheta_};
}

MeasVector SensorGrid::centre(CellIndex c) const {
    const auto b = bounds(c);
    return {0.5 * (b.r_lo + b.r_hi), 0.5 * (b.theta_lo + b.theta_hi)};
}

double SensorGrid::cartesian_area(CellIndex c) const {
    const auto b = bounds(c);
    return 0.5 * (b.r_hi * b.r_hi - b.r_lo * b.r_lo) * (b.theta_hi - b.theta_lo);
}

double SensorGrid::surveillance_area() const {
    return std::numbers::pi * (r_max_ * r_max_ - r_min_ * r_min_);
}

MeasMatrix ObservationModel::noise() const {
    MeasMatrix r = MeasMatrix::Zero();
    r(0, 0) = sigma_r * sigma_r;
    r(1, 1) = sigma_theta * sigma_theta;
    return r;
}

Linearization range_bearing(const StateVector& state) {
    const double x = state(0), y = state(1);
    const double r2 = x * x + y * y;
    if (!(r2 > 0.0)) throw std::domain_error("range_bearing: state at the sensor origin");
    const double r = std::sqrt(r2);
    Linearization lin;
    lin.predicted << r, std::atan2(y, x);
    lin.jacobian << x / r, y / r, 0.0, 0.0,
                    -y / r2, x / r2, 0.0, 0.0;
    return lin;
}

bool in_surveillance(const SensorGrid& grid, const StateVector& state) {
    const double r = std::hypot(state(0), state(1));
    return r >= grid.r_min() && r <= grid.r_max();
}

double birth_probability(const SensorGrid& grid, const BirthModel& birth, CellIndex cell) {
    return std::clamp(birth.p_birth * grid.cartesian_area(cell), 0.0, 1.0);
}

GaussianComponent cell_gaussian(const SensorGrid& grid, CellIndex cell, double sigma_v) {
    const auto b = grid.bounds(cell);
    const double r1 = b.r_lo, r2 = b.r_hi, t1 = b.theta_lo, t2 = b.theta_hi;
    const double dt = t2 - t1;
    // Density proportional to r on the polar rectangle.
    const double area_r = 0.5 * (r2 * r2 - r1 * r1);
    const double er = (r2 * r2 * r2 - r1 * r1 * r1) / 3.0 / area_r;
    const double er2 = (r2 * r2 * r2 * r2 - r1 * r1 * r1 * r1) / 4.0 / area_r;
    const double ec = (std::sin(t2) - std::sin(t1)) / dt;
    const double es = (std::cos(t1) - std::cos(t2)) / dt;
    const double s2 = (std::sin(2.0 * t2) - std::sin(2.0 * t1)) / (4.0 * dt);
    const double ecc = 0.5 + s2;
    const double ess = 0.5 - s2;
    const double ecs = (std::sin(t2) * std::sin(t2) - std::sin(t1) * std::sin(t1)) / (2.0 * dt);

    GaussianComponent g;
    g.weight = 1.0;
    g.mean << er * ec, er * es, 0.0, 0.0;
    g.cov.setZero();
    g.cov(0, 0) = er2 * ecc - g.mean(0) * g.mean(0);
    g.cov(1, 1) = er2 * ess - g.mean(1) * g.mean(1);
    g.cov(0, 1) = g.cov(1, 0) = er2 * ecs - g.mean(0) * g.mean(1);
    g.cov(2, 2) = g.cov(3, 3) = sigma_v * sigma_v;
    symmetrize(g.cov);
    return g;
}

ExtendedLaw birth_law_for(const SensorGrid& grid, const BirthModel& birth, const MeasVector& z) {
    const CellIndex cell = grid.cell_of(z);
    const double beta = birth_probability(grid, birth, cell);
    ExtendedLaw law;
    law.mass_psi = 0.0;
    law.mass_phi = 1.0 - beta;
    GaussianComponent g = cell_gaussian(grid, cell, birth.sigma_v);
    g.weight = beta;
    law.alive.components.push_back(g);
    return law;
}

double clutter_terms(const ClutterModel& clutter, const MeasVector&) { return clutter.p_false_alarm; }

Scan make_scan(const SensorGrid& grid, int step, double time, const std::vector<MeasVector>& values) {
    Scan scan;
    scan.step = step;
    scan.time = time;
    scan.observations.reserve(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
        Observation o;
        o.id = {step, static_cast<int>(k)};
        o.value = values[k];
        o.cell = grid.cell_of(values[k]);
        scan.observations.push_back(o);
    }
    return scan;
}

}  // namespace hisp

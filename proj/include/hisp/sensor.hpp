#pragma once

#include <numbers>
#include <vector>

#include "hisp/gaussian.hpp"
#include "hisp/hypothesis.hpp"

namespace hisp {

/// Constant-velocity motion with piecewise-constant white acceleration noise.
struct MotionModel {
    double dt = 4.0;            // [s]
    double q_var = 0.05;        // acceleration noise variance [m^2 s^-4]
    double p_survival = 1.0;

    [[nodiscard]] StateMatrix transition() const;
    [[nodiscard]] StateMatrix process_noise() const;
};

struct CellIndex {
    int range = 0;
    int bearing = 0;
    friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

struct CellBounds {
    double r_lo, r_hi, theta_lo, theta_hi;
};

/// Polar resolution-cell partition of the observation space. Bearing covers
/// (-pi, pi]; cell (i, j) spans [r_min + i dr, r_min + (i+1) dr] x
/// [-pi + j dtheta, -pi + (j+1) dtheta].
class SensorGrid {
public:
    SensorGrid() : SensorGrid(50.0, 500.0, 15.0, std::numbers::pi / 180.0) {}
    SensorGrid(double r_min, double r_max, double cell_dr, double cell_dtheta);

    [[nodiscard]] double r_min() const { return r_min_; }
    [[nodiscard]] double r_max() const { return r_max_; }
    [[nodiscard]] double cell_dr() const { return dr_; }
    [[nodiscard]] double cell_dtheta() const { return dtheta_; }
    [[nodiscard]] int range_cells() const { return n_range_; }
    [[nodiscard]] int bearing_cells() const { return n_bearing_; }
    [[nodiscard]] int cell_count() const { return n_range_ * n_bearing_; }

    [[nodiscard]] bool contains(const MeasVector& z) const;
    /// Throws std::out_of_range for an observation outside the sensor bounds.
    [[nodiscard]] CellIndex cell_of(const MeasVector& z) const;
    [[nodiscard]] int flat_id(CellIndex c) const { return c.range * n_bearing_ + c.bearing; }
    [[nodiscard]] CellIndex from_flat(int id) const { return {id / n_bearing_, id % n_bearing_}; }
    [[nodiscard]] CellBounds bounds(CellIndex c) const;
    /// Cell representative z_omega (cell centre).
    [[nodiscard]] MeasVector centre(CellIndex c) const;
    /// Cartesian area of the cell [m^2].
    [[nodiscard]] double cartesian_area(CellIndex c) const;
    /// Volume of a cell in observation coordinates [m rad].
    [[nodiscard]] double cell_volume() const { return dr_ * dtheta_; }
    /// Cartesian area of the whole surveillance annulus [m^2].
    [[nodiscard]] double surveillance_area() const;

private:
    double r_min_, r_max_, dr_, dtheta_;
    int n_range_, n_bearing_;
};

/// Range-bearing sensor at the origin.
struct ObservationModel {
    double sigma_r = 6.2;          // [m]
    double sigma_theta = 4.5e-3;   // [rad]
    double p_detect = 0.5;

    [[nodiscard]] MeasMatrix noise() const;
};

/// h(x) = (sqrt(x^2 + y^2), atan2(y, x)) and its Jacobian. Throws
/// std::domain_error at the origin.
Linearization range_bearing(const StateVector& state);

/// True when h(state) lies inside the grid's range bounds.
bool in_surveillance(const SensorGrid& grid, const StateVector& state);

struct BirthModel {
    double p_birth = 1e-6;   // per-m^2 birth probability
    double sigma_v = 1.5;    // newborn velocity std [m/s]
};

struct ClutterModel {
    double p_false_alarm = 1.34e-3;   // per cell

    [[nodiscard]] double expected_count(const SensorGrid& grid) const {
        return p_false_alarm * grid.cell_count();
    }
};

/// Everything the observation update needs about the sensor.
struct SensorModel {
    SensorGrid grid;
    ObservationModel observation;
    BirthModel birth;
    ClutterModel clutter;
};

/// Probability of one newborn individual in the cell: clamp(p_b * area, 0, 1).
double birth_probability(const SensorGrid& grid, const BirthModel& birth, CellIndex cell);

/// Unit-weight Gaussian moment-matched to a uniform (in area) distribution
/// over the polar cell, with zero-mean velocity of std sigma_v.
GaussianComponent cell_gaussian(const SensorGrid& grid, CellIndex cell, double sigma_v);

/// Law of the newborn representation localised by observation z.
ExtendedLaw birth_law_for(const SensorGrid& grid, const BirthModel& birth, const MeasVector& z);

/// Per-cell false-alarm probability for observation z.
double clutter_terms(const ClutterModel& clutter, const MeasVector& z);

struct Observation {
    ObservationId id;
    MeasVector value = MeasVector::Zero();
    CellIndex cell;
};

/// One time step's observation set.
struct Scan {
    int step = 0;
    double time = 0.0;
    std::vector<Observation> observations;
};

/// Builds a scan from raw observations, assigning ids and cell indices.
Scan make_scan(const SensorGrid& grid, int step, double time, const std::vector<MeasVector>& values);

}  // namespace hisp

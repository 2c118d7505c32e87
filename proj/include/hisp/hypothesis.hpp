#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hisp/gaussian.hpp"

namespace hisp {

/// An observation is identified by the scan it came from and its index in that scan.
struct ObservationId {
    int step = 0;
    int index = 0;

    friend bool operator==(const ObservationId&, const ObservationId&) = default;
    friend auto operator<=>(const ObservationId&, const ObservationId&) = default;
};

/// One entry per processed scan: the observation assigned at that scan, or
/// nothing (the empty observation).
class ObservationPath {
public:
    using Entry = std::optional<ObservationId>;

    ObservationPath() = default;
    /// The all-empty path of the given length.
    static ObservationPath empty_of_length(std::size_t length);

    [[nodiscard]] ObservationPath extended(Entry entry) const;
    [[nodiscard]] std::size_t length() const { return entries_.size(); }
    [[nodiscard]] const std::vector<Entry>& entries() const { return entries_; }
    /// Last entry; nullopt for an empty path or a trailing empty observation.
    [[nodiscard]] Entry tail() const;
    [[nodiscard]] bool all_empty() const;

    friend bool operator==(const ObservationPath&, const ObservationPath&) = default;

private:
    std::vector<Entry> entries_;
};

enum class IndividualKind { propagated, birth, clutter };

/// A potential individual: time interval of existence and observation path.
struct PotentialIndividual {
    /// First step of the existence interval; nullopt encodes the empty
    /// interval of a clutter representation.
    std::optional<int> birth_step;
    int last_step = 0;
    ObservationPath path;
    IndividualKind kind = IndividualKind::propagated;
};

/// Law on the extended space {phi, psi} u X.
///   mass_phi: the potential individual does not exist
///   mass_psi: it existed and has disappeared
///   alive:    sub-probability Gaussian mixture on the state space
struct ExtendedLaw {
    double mass_phi = 1.0;
    double mass_psi = 0.0;
    GaussianMixture alive;

    [[nodiscard]] double total() const { return mass_phi + mass_psi + alive.total_weight(); }
    /// True when all masses are in [0,1] and they sum to one within `tol`.
    [[nodiscard]] bool is_normalized(double tol = 1e-9) const;
};

double individual_probability(const ExtendedLaw& law);
double alive_probability(const ExtendedLaw& law);

struct Hypothesis {
    std::uint64_t id = 0;
    PotentialIndividual individual;
    ExtendedLaw law;
    bool confirmed = false;
};

struct ConfirmationThresholds {
    double confirm = 0.99;
    double keep = 0.9;
};

/// Confirmation with hysteresis on the alive probability.
Hypothesis update_confirmation(Hypothesis hypothesis, const ConfirmationThresholds& thresholds);

}  // namespace hisp

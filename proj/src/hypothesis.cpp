#include "hisp/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hisp {

ObservationPath ObservationPath::empty_of_length(std::size_t length) {
    ObservationPath p;
    p.entries_.assign(length, std::nullopt);
    return p;
}

ObservationPath ObservationPath::extended(Entry entry) const {
    ObservationPath p = *this;
    p.entries_.push_back(entry);
    return p;
}

ObservationPath::Entry ObservationPath::tail() const {
    if (entries_.empty()) return std::nullopt;
    return entries_.back();
}

bool ObservationPath::all_empty() const {
    return std::none_of(entries_.begin(), entries_.end(), [](const Entry& e) { return e.has_value(); });
}

bool ExtendedLaw::is_normalized(double tol) const {
    const double a = alive.total_weight();
    auto in_unit = [tol](double v) { return v >= -tol && v <= 1.0 + tol; };
    if (!in_unit(mass_phi) || !in_unit(mass_psi) || !in_unit(a)) return false;
    return std::abs(mass_phi + mass_psi + a - 1.0) <= tol;
}

double individual_probability(const ExtendedLaw& law) {
    return law.mass_psi + law.alive.total_weight();
}

double alive_probability(const ExtendedLaw& law) { return law.alive.total_weight(); }

Hypothesis update_confirmation(Hypothesis hypothesis, const ConfirmationThresholds& thresholds) {
    if (!(0.0 <= thresholds.keep && thresholds.keep <= thresholds.confirm && thresholds.confirm <= 1.0))
        throw std::invalid_argument("confirmation thresholds must satisfy 0 <= keep <= confirm <= 1");
    const double p = alive_probability(hypothesis.law);
    hypothesis.confirmed = p >= thresholds.confirm || (hypothesis.confirmed && p >= thresholds.keep);
    return hypothesis;
}

}  // namespace hisp

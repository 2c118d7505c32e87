#pragma once

#include <random>

#include "hisp/association.hpp"

namespace hisp {

enum class GatingPattern {
    matching,   // every row gates at most one column and vice versa
    sparse,     // each row gates a few random columns
    dense       // every pair is gated
};

struct SyntheticTableSpec {
    std::size_t rows = 4;
    std::size_t columns = 4;
    GatingPattern pattern = GatingPattern::sparse;
    double mean_degree = 2.0;   // expected gated columns per row (sparse)
};

/// Random association table with masses in ranges typical of the tracking
/// scenario. Posterior mixtures are left empty.
AssociationTable random_table(const SyntheticTableSpec& spec, std::mt19937_64& rng);

}  // namespace hisp

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hisp/gaussian.hpp"
#include "hisp/hypothesis.hpp"
#include "hisp/sensor.hpp"

namespace hisp {

// Rows of the association problem are the propagated hypotheses X_t plus, for
// every observation z, a newborn representation b_z and a false-alarm
// representation op_z. Columns are the observations plus the empty
// observation. Birth and clutter rows only ever touch their own column and
// the empty one, so they are stored per column.

/// Gated pair (x, z) of a propagated row.
struct AssociationEntry {
    std::size_t column = 0;
    double mass = 0.0;            // p^{x,z}(1)
    GaussianMixture posterior;    // conditional law on X given x <-> z, unit mass
};

struct PropagatedRow {
    double miss_mass = 0.0;       // p^{x,phi}(1)
    /// Unnormalised p^{x,phi} on {phi, psi} u X; total equals miss_mass.
    ExtendedLaw miss_law;
    /// Sorted by column; only strictly positive masses are stored.
    std::vector<AssociationEntry> entries;
};

struct ObservationColumn {
    double birth_hit = 0.0;       // p^{b_z,z}
    double birth_miss = 1.0;      // p^{b_z,phi}
    double clutter_hit = 0.0;     // p^{op_z,z}
    double clutter_miss = 1.0;    // p^{op_z,phi}
    GaussianMixture birth_posterior;
};

struct AssociationTable {
    std::vector<PropagatedRow> rows;
    std::vector<ObservationColumn> columns;

    [[nodiscard]] std::size_t num_rows() const { return rows.size(); }
    [[nodiscard]] std::size_t num_columns() const { return columns.size(); }
    /// p^{x,z}(1) for a propagated row; 0 when the pair is not gated.
    [[nodiscard]] double mass(std::size_t row, std::size_t column) const;
    /// Throws std::invalid_argument on negative, non-finite or unsorted entries.
    void validate() const;
};

struct TableOptions {
    /// Squared Mahalanobis gate on the innovation; pairs outside get mass 0.
    double gate = 25.0;
};

/// Builds the table for `hypotheses` (one propagated row each, same order)
/// against `scan`. Rows are filled in parallel.
AssociationTable build_table(const std::vector<Hypothesis>& hypotheses, const Scan& scan,
                             const SensorModel& sensor, const TableOptions& options = {});

/// Single-threaded reference of build_table.
AssociationTable build_table_serial(const std::vector<Hypothesis>& hypotheses, const Scan& scan,
                                    const SensorModel& sensor, const TableOptions& options = {});

/// C^z = p^{b_z,z}/p^{b_z,phi} + p^{op_z,z}/p^{op_z,phi}. Throws
/// std::invalid_argument when either denominator is zero.
double compute_cz(const ObservationColumn& column);

/// Joint weights w(x, z), all in log domain. Entries of `log_hit` line up with
/// `AssociationTable::rows[i].entries`.
struct WeightTable {
    std::vector<double> log_miss;                 // w(x, phi), propagated rows
    std::vector<std::vector<double>> log_hit;     // w(x, z), gated pairs
    std::vector<double> log_birth_hit;            // w(b_z, z)
    std::vector<double> log_birth_miss;           // w(b_z, phi)
    std::vector<double> log_clutter_hit;          // w(op_z, z)
    std::vector<double> log_clutter_miss;         // w(op_z, phi)
    double log_total = 0.0;                       // log P_t
};

/// Factorised weights under the "at most one observation per hypothesis"
/// product form, O(|X_t| |Z_t|). Rows are processed in parallel.
WeightTable compute_weights_approx1(const AssociationTable& table);

/// Dense single-threaded reference of compute_weights_approx1; leave-one-out
/// products are recomputed directly.
WeightTable compute_weights_approx1_serial(const AssociationTable& table);

struct ExactOptions {
    std::size_t max_rows = 10;         // per connected component
    std::size_t max_columns = 10;      // per connected component, at most 24
};

/// Exact weights: the sum over every admissible association. The gating
/// graph is split into connected components, which factorise exactly; within
/// a component the sum runs over subsets of taken observations, row by row,
/// so the cost is O(rows log(rows) 2^columns). Throws std::length_error when a
/// component exceeds the limits in `options`.
WeightTable compute_weights_exact(const AssociationTable& table, const ExactOptions& options = {});

/// log P_t under the per-observation product form:
///   sum_x log p^{x,phi} + sum_z log(C^z + sum_x p^{x,z} / p^{x,phi}) + log K,
/// where K is the product of the birth and clutter miss masses. Throws
/// std::domain_error when some p^{x,phi} is zero.
double log_factorised_total_approx2(const AssociationTable& table);
double factorised_P_approx2(const AssociationTable& table);

/// Normalised association masses from both forms of the update.
struct AssociationPosterior {
    // Per observation: w p / sum over X^z_t of w p.
    std::vector<std::vector<double>> hit_by_column;   // aligned with entries
    std::vector<double> birth_by_column;
    std::vector<double> clutter_by_column;
    // Per individual: w p / sum over Z-bar of w p.
    std::vector<double> miss_by_row;
    std::vector<std::vector<double>> hit_by_row;
    std::vector<double> birth_hit_by_row, birth_miss_by_row;
    std::vector<double> clutter_hit_by_row, clutter_miss_by_row;
    // log of the normalisers; each equals log P_t when the weights are exact.
    std::vector<double> log_column_sum;     // one per observation
    std::vector<double> log_row_sum;        // propagated rows
    std::vector<double> log_birth_row_sum;  // one per observation
    std::vector<double> log_clutter_row_sum;
};

AssociationPosterior posterior_masses(const AssociationTable& table, const WeightTable& weights);

/// Largest |exp(a - log P_t) - 1| over every column and row normaliser.
double max_consistency_error(const AssociationPosterior& posterior, double log_total);

/// Delimited dump: hypothesis-id,observation-id,log-mass. `row_ids` labels the
/// propagated rows; birth and clutter rows are written as b:<obs> and op:<obs>.
void write_table_dump(std::ostream& os, const AssociationTable& table,
                      const std::vector<std::uint64_t>& row_ids, const Scan& scan);

double log_sum_exp(const std::vector<double>& values);

}  // namespace hisp

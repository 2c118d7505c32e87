#pragma once

#include <vector>

#include <Eigen/Dense>

namespace hisp {

struct Assignment {
    /// row_to_col[i] is the column assigned to row i, or -1.
    std::vector<int> row_to_col;
    double cost = 0.0;
};

/// Exact minimum-cost assignment on a rectangular cost matrix (Hungarian
/// method with potentials). Every row is assigned when rows <= cols, every
/// column otherwise.
Assignment optimal_assignment(const Eigen::MatrixXd& cost);

struct OspaParams {
    double cutoff = 100.0;   // c [m]
    double order = 1.0;      // p
};

struct OspaResult {
    double total = 0.0;
    double localisation = 0.0;
    double cardinality = 0.0;
};

/// OSPA between two sets of 2-d positions. The components satisfy
/// total^p = localisation^p + cardinality^p.
OspaResult ospa(const std::vector<Eigen::Vector2d>& x, const std::vector<Eigen::Vector2d>& y,
                const OspaParams& params = {});

}  // namespace hisp

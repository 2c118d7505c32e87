#include "hisp/ospa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hisp {

namespace {

// Rows <= cols. Shortest augmenting paths with row and column potentials.
std::vector<int> hungarian(const Eigen::MatrixXd& a) {
    const int n = static_cast<int>(a.rows());
    const int m = static_cast<int>(a.cols());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<bool> used(m + 1, false);
        do {
            used[j0] = true;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= m; ++j)
        if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

}  // namespace

Assignment optimal_assignment(const Eigen::MatrixXd& cost) {
    Assignment out;
    if (cost.size() == 0) {
        out.row_to_col.assign(cost.rows(), -1);
        return out;
    }
    if (!cost.allFinite()) throw std::invalid_argument("optimal_assignment: non-finite cost");
    if (cost.rows() <= cost.cols()) {
        out.row_to_col = hungarian(cost);
    } else {
        const std::vector<int> col_to_row = hungarian(cost.transpose());
        out.row_to_col.assign(cost.rows(), -1);
        for (std::size_t j = 0; j < col_to_row.size(); ++j) out.row_to_col[col_to_row[j]] = static_cast<int>(j);
    }
    for (std::size_t i = 0; i < out.row_to_col.size(); ++i)
        if (out.row_to_col[i] >= 0) out.cost += cost(static_cast<Eigen::Index>(i), out.row_to_col[i]);
    return out;
}

OspaResult ospa(const std::vector<Eigen::Vector2d>& x, const std::vector<Eigen::Vector2d>& y,
                const OspaParams& params) {
    if (!(params.cutoff > 0.0) || !(params.order >= 1.0))
        throw std::invalid_argument("ospa: need cutoff > 0 and order >= 1");
    OspaResult r;
    const std::size_t nx = x.size(), ny = y.size();
    const std::size_t n = std::max(nx, ny);
    if (n == 0) return r;
    const double c = params.cutoff, p = params.order;

    double loc_sum = 0.0;
    if (nx > 0 && ny > 0) {
        Eigen::MatrixXd cost(nx, ny);
        for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t j = 0; j < ny; ++j)
                cost(i, j) = std::pow(std::min(c, (x[i] - y[j]).norm()), p);
        loc_sum = optimal_assignment(cost).cost;
    }
    const double card_sum = std::pow(c, p) * static_cast<double>(n - std::min(nx, ny));
    const double nn = static_cast<double>(n);
    r.localisation = std::pow(loc_sum / nn, 1.0 / p);
    r.cardinality = std::pow(card_sum / nn, 1.0 / p);
    r.total = std::pow((loc_sum + card_sum) / nn, 1.0 / p);
    return r;
}

}  // namespace hisp

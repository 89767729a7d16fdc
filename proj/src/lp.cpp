#include "npcall/lp.hpp"

#include "npcall/error.hpp"

#include <limits>

namespace npcall::lp {

Result maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    const Eigen::Index m = A.rows(), n = A.cols();
    if (b.minCoeff() < 0.0)
        throw InfeasibleError("origin is not feasible (negative right-hand side)");

    // Tableau rows 0..m-1 are constraints with slacks, row m is the objective.
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
    T.topLeftCorner(m, n) = A;
    T.block(0, n, m, m).setIdentity();
    T.topRightCorner(m, 1) = b;
    T.bottomLeftCorner(1, n) = -c.transpose();
    Eigen::VectorXi basis(m);
    for (Eigen::Index i = 0; i < m; ++i)
        basis[i] = static_cast<int>(n + i);

    const double eps = 1e-12;
    const int max_iter = 50 * static_cast<int>(n + m + 1);
    Result res;
    for (int it = 0; it < max_iter; ++it) {
        res.iterations = it;
        Eigen::Index enter = -1;
        for (Eigen::Index j = 0; j < n + m; ++j) {
            if (T(m, j) < -eps) {
                enter = j;
                break;
            }
        }
        if (enter < 0) {
            res.status = Status::optimal;
            res.value = T(m, n + m);
            res.x = Eigen::VectorXd::Zero(n);
            for (Eigen::Index i = 0; i < m; ++i)
                if (basis[i] < n)
                    res.x[basis[i]] = T(i, n + m);
            return res;
        }
        Eigen::Index leave = -1;
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < m; ++i) {
            const double a = T(i, enter);
            if (a > eps) {
                const double ratio = T(i, n + m) / a;
                if (ratio < best - eps || (ratio <= best + eps && leave >= 0 && basis[i] < basis[leave])) {
                    best = ratio;
                    leave = i;
                }
            }
        }
        if (leave < 0) {
            res.status = Status::unbounded;
            res.value = std::numeric_limits<double>::infinity();
            return res;
        }
        T.row(leave) /= T(leave, enter);
        for (Eigen::Index i = 0; i <= m; ++i)
            if (i != leave && T(i, enter) != 0.0)
                T.row(i) -= T(i, enter) * T.row(leave);
        basis[leave] = static_cast<int>(enter);
    }
    throw SolverError("simplex did not terminate", max_iter);
}

} // namespace npcall::lp

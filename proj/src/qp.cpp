#include "npcall/qp.hpp"

#include "npcall/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace npcall::qp {

namespace {

// Solves [G -A'; A 0][p; l] = [-g; 0] where A stacks the equality rows and the
// working set. The KKT matrix may be singular through dependent rows, in which
// case the minimum-norm solution is taken.
void kkt_step(const Problem& pr, const std::vector<int>& work, const Eigen::VectorXd& grad,
              Eigen::VectorXd& step, Eigen::VectorXd& lambda) {
    const Eigen::Index n = pr.G.rows();
    const Eigen::Index me = pr.A_eq.rows();
    const Eigen::Index m = me + static_cast<Eigen::Index>(work.size());
    Eigen::MatrixXd A(m, n);
    if (me > 0)
        A.topRows(me) = pr.A_eq;
    for (std::size_t r = 0; r < work.size(); ++r)
        A.row(me + static_cast<Eigen::Index>(r)) = pr.A_in.row(work[r]);

    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + m, n + m);
    K.topLeftCorner(n, n) = pr.G;
    K.topRightCorner(n, m) = -A.transpose();
    K.bottomLeftCorner(m, n) = A;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + m);
    rhs.head(n) = -grad;

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(K);
    cod.setThreshold(1e-12);
    const Eigen::VectorXd sol = cod.solve(rhs);
    step = sol.head(n);
    lambda = sol.tail(m);
}

Result solve_scaled(const Problem& pr, const Eigen::VectorXd& x0, int max_iter);

} // namespace

// Variables are rescaled to unit Hessian diagonal and constraint rows to unit
// norm, so the tolerances below are meaningful whatever the units of x.
Result solve(const Problem& pr, const Eigen::VectorXd& x0, int max_iter) {
    const Eigen::Index n = pr.G.rows();
    Eigen::VectorXd d(n);
    for (Eigen::Index i = 0; i < n; ++i)
        d[i] = pr.G(i, i) > 0.0 ? 1.0 / std::sqrt(pr.G(i, i)) : 1.0;
    const auto D = d.asDiagonal();

    Problem sc;
    sc.G = D * pr.G * D;
    sc.c = D * pr.c;
    auto rows = [&](const Eigen::MatrixXd& A, const Eigen::VectorXd& b, Eigen::MatrixXd& As, Eigen::VectorXd& bs,
                    Eigen::VectorXd& norms) {
        As = A * D;
        bs = b;
        norms = Eigen::VectorXd::Ones(A.rows());
        for (Eigen::Index r = 0; r < A.rows(); ++r) {
            const double nr = As.row(r).norm();
            if (nr > 0.0) {
                norms[r] = nr;
                As.row(r) /= nr;
                bs[r] /= nr;
            }
        }
    };
    Eigen::VectorXd eq_norms, in_norms;
    rows(pr.A_eq, pr.b_eq, sc.A_eq, sc.b_eq, eq_norms);
    rows(pr.A_in, pr.b_in, sc.A_in, sc.b_in, in_norms);

    Result res = solve_scaled(sc, x0.cwiseQuotient(d), max_iter);
    res.x = res.x.cwiseProduct(d);
    res.lambda_in = res.lambda_in.cwiseQuotient(in_norms);
    return res;
}

namespace {

Result solve_scaled(const Problem& pr, const Eigen::VectorXd& x0, int max_iter) {
    const Eigen::Index me = pr.A_eq.rows();
    const Eigen::Index mi = pr.A_in.rows();
    const double feas_tol = 1e-9;

    Eigen::VectorXd x = x0;
    if (me > 0 && (pr.A_eq * x - pr.b_eq).cwiseAbs().maxCoeff() > feas_tol)
        throw InfeasibleError("QP start violates an equality constraint");

    std::vector<int> work;
    if (mi > 0) {
        const Eigen::VectorXd slack = pr.A_in * x - pr.b_in;
        for (Eigen::Index i = 0; i < mi; ++i) {
            if (slack[i] < -feas_tol)
                throw InfeasibleError("QP start violates an inequality constraint");
            if (slack[i] <= feas_tol)
                work.push_back(static_cast<int>(i));
        }
    }

    Result res;
    Eigen::VectorXd p, lambda;
    for (int it = 0; it < max_iter; ++it) {
        res.iterations = it + 1;
        const Eigen::VectorXd grad = pr.G * x + pr.c;
        kkt_step(pr, work, grad, p, lambda);
        const double scale = 1.0 + x.cwiseAbs().maxCoeff();

        if (p.cwiseAbs().maxCoeff() <= 1e-12 * scale) {
            // Stationary on the working set: check the inequality multipliers.
            int drop = -1;
            double most_neg = -1e-12;
            for (std::size_t r = 0; r < work.size(); ++r) {
                const double l = lambda[me + static_cast<Eigen::Index>(r)];
                if (l < most_neg) {
                    most_neg = l;
                    drop = static_cast<int>(r);
                }
            }
            if (drop < 0) {
                res.x = x;
                res.lambda_in = Eigen::VectorXd::Zero(mi);
                for (std::size_t r = 0; r < work.size(); ++r)
                    res.lambda_in[work[r]] = std::max(lambda[me + static_cast<Eigen::Index>(r)], 0.0);
                res.active = work;
                std::sort(res.active.begin(), res.active.end());
                return res;
            }
            work.erase(work.begin() + drop);
            continue;
        }

        // Longest feasible step along p, capped at 1.
        double alpha = 1.0;
        int block = -1;
        for (Eigen::Index i = 0; i < mi; ++i) {
            if (std::find(work.begin(), work.end(), static_cast<int>(i)) != work.end())
                continue;
            const double ap = pr.A_in.row(i).dot(p);
            if (ap < -1e-14) {
                const double a = (pr.b_in[i] - pr.A_in.row(i).dot(x)) / ap;
                if (a < alpha) {
                    alpha = std::max(a, 0.0);
                    block = static_cast<int>(i);
                }
            }
        }
        x += alpha * p;
        if (block >= 0)
            work.push_back(block);
    }
    throw SolverError("active-set QP did not converge", max_iter);
}

} // namespace

} // namespace npcall::qp

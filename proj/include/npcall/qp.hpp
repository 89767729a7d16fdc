#pragma once

#include <Eigen/Dense>

#include <vector>

namespace npcall::qp {

// min 1/2 x'Gx + c'x  s.t.  A_eq x = b_eq,  A_in x >= b_in.
// G must be positive definite on the null space of the equalities. Redundant
// but consistent equality rows are allowed.
struct Problem {
    Eigen::MatrixXd G;
    Eigen::VectorXd c;
    Eigen::MatrixXd A_eq;
    Eigen::VectorXd b_eq;
    Eigen::MatrixXd A_in;
    Eigen::VectorXd b_in;
};

struct Result {
    Eigen::VectorXd x;
    Eigen::VectorXd lambda_in; // multipliers of the inequalities (0 when inactive)
    std::vector<int> active;   // indices of active inequalities at the solution
    int iterations = 0;
};

// Primal active-set method started from a feasible x0. Throws SolverError
// when max_iter is exceeded and InfeasibleError when x0 is not feasible.
Result solve(const Problem& p, const Eigen::VectorXd& x0, int max_iter = 500);

} // namespace npcall::qp

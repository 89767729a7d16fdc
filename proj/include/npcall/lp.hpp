#pragma once

#include <Eigen/Dense>

namespace npcall::lp {

enum class Status { optimal, unbounded };

struct Result {
    Status status = Status::optimal;
    double value = 0.0;
    Eigen::VectorXd x;
    int iterations = 0;
};

// max c'x  s.t.  A x <= b, x >= 0, with b >= 0 so the origin is feasible.
// Dense tableau simplex with Bland's rule.
Result maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

} // namespace npcall::lp

#pragma once

#include <Eigen/Dense>

namespace qem {

struct LpResult {
  Eigen::VectorXd x;
  double objective = 0.0;
};

// Dense two-phase simplex with Bland's rule for
//   min c.x  subject to  A x <= b,  x >= 0.
// Throws DecompositionError when infeasible (carrying the phase-1 residual)
// and NumericError when unbounded. Intended for the small programs that the
// quasiprobability decomposition produces.
LpResult simplex_minimize(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                          const Eigen::VectorXd& b);

}  // namespace qem

#pragma once

#include <Eigen/Dense>

namespace qem {

struct NnlsResult {
  Eigen::VectorXd x;
  double residual_norm = 0.0;  // ||A x - b||_2
  int iterations = 0;
};

// Lawson-Hanson active-set iteration for
//   min ||A x - b||_2  subject to  x >= 0.
// Throws NumericError (carrying the current residual) if the iteration limit
// is exceeded; max_iterations <= 0 selects 3 * max(n, 10).
NnlsResult nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                int max_iterations = 0);

}  // namespace qem

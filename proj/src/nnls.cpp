#include "qem/nnls.hpp"

#include <limits>
#include <vector>

#include "qem/errors.hpp"

namespace qem {

namespace {

// Least-squares solve restricted to the passive column set.
Eigen::VectorXd passive_solve(const Eigen::MatrixXd& A,
                              const Eigen::VectorXd& b,
                              const std::vector<int>& passive) {
  Eigen::MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(passive.size()));
  for (std::size_t k = 0; k < passive.size(); ++k) Ap.col(k) = A.col(passive[k]);
  return Ap.colPivHouseholderQr().solve(b);
}

}  // namespace

NnlsResult nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                int max_iterations) {
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  if (b.size() != m) throw DimensionError("nnls: rhs size mismatch");
  if (max_iterations <= 0)
    max_iterations = 3 * static_cast<int>(std::max<Eigen::Index>(n, 10));

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> in_passive(n, false);
  std::vector<int> passive;
  const double tol =
      10.0 * std::numeric_limits<double>::epsilon() *
      A.cwiseAbs().maxCoeff() * static_cast<double>(std::max(m, n));

  int iterations = 0;
  Eigen::VectorXd residual = b;
  while (true) {
    // dual vector; Kuhn-Tucker optimality when no positive entry remains
    Eigen::VectorXd w = A.transpose() * residual;
    int best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (in_passive[j]) continue;
      if (w(j) > best_w) {
        best_w = w(j);
        best = static_cast<int>(j);
      }
    }
    if (best < 0) break;

    in_passive[best] = true;
    passive.push_back(best);

    while (true) {
      if (++iterations > max_iterations) {
        const double res = (A * x - b).norm();
        throw NumericError("nnls: iteration limit exceeded", res);
      }
      Eigen::VectorXd z = passive_solve(A, b, passive);

      bool feasible = true;
      for (std::size_t k = 0; k < passive.size(); ++k)
        if (z(static_cast<Eigen::Index>(k)) <= tol) feasible = false;
      if (feasible) {
        x.setZero();
        for (std::size_t k = 0; k < passive.size(); ++k)
          x(passive[k]) = z(static_cast<Eigen::Index>(k));
        break;
      }

      // step toward z until the first passive coefficient hits zero
      double alpha = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < passive.size(); ++k) {
        const double zk = z(static_cast<Eigen::Index>(k));
        if (zk <= tol) {
          const double xk = x(passive[k]);
          const double t = xk / (xk - zk);
          alpha = std::min(alpha, t);
        }
      }
      if (!std::isfinite(alpha)) alpha = 0.0;
      for (std::size_t k = 0; k < passive.size(); ++k) {
        const Eigen::Index j = passive[k];
        x(j) += alpha * (z(static_cast<Eigen::Index>(k)) - x(j));
      }
      std::vector<int> still;
      for (int j : passive) {
        if (x(j) > tol) {
          still.push_back(j);
        } else {
          x(j) = 0.0;
          in_passive[j] = false;
        }
      }
      passive = std::move(still);
      if (passive.empty()) break;
    }
    residual = b - A * x;
  }

  NnlsResult out;
  out.x = std::move(x);
  out.residual_norm = (A * out.x - b).norm();
  out.iterations = iterations;
  return out;
}

}  // namespace qem

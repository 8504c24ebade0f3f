#include "qem/simplex.hpp"

#include <limits>
#include <vector>

#include "qem/errors.hpp"

namespace qem {

namespace {

constexpr double kTol = 1e-9;
constexpr double kPivotTol = 1e-9;

struct Tableau {
  Eigen::MatrixXd t;          // m x (vars + 1), last column = rhs
  std::vector<int> basis;     // variable basic in each row
  int vars = 0;

  double rhs(int row) const { return t(row, vars); }
};

// Bland's rule keeps the iteration finite on degenerate programs.
bool simplex_phase(Tableau& tab, const Eigen::VectorXd& cost,
                   const std::vector<bool>& allowed) {
  const int m = static_cast<int>(tab.t.rows());
  while (true) {
    Eigen::VectorXd dual = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < m; ++i) dual(i) = cost(tab.basis[i]);

    int entering = -1;
    for (int j = 0; j < tab.vars; ++j) {
      if (!allowed[j]) continue;
      const double reduced = cost(j) - dual.dot(tab.t.col(j));
      if (reduced < -kTol) {
        entering = j;
        break;
      }
    }
    if (entering < 0) return true;  // optimal

    int leaving = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const double a = tab.t(i, entering);
      if (a > kTol) {
        const double ratio = tab.rhs(i) / a;
        if (ratio < best_ratio - kTol ||
            (ratio < best_ratio + kTol &&
             (leaving < 0 || tab.basis[i] < tab.basis[leaving]))) {
          best_ratio = ratio;
          leaving = i;
        }
      }
    }
    if (leaving < 0) return false;  // unbounded

    const double pivot = tab.t(leaving, entering);
    tab.t.row(leaving) /= pivot;
    for (int i = 0; i < m; ++i) {
      if (i == leaving) continue;
      const double factor = tab.t(i, entering);
      if (factor != 0.0) tab.t.row(i) -= factor * tab.t.row(leaving);
    }
    tab.basis[leaving] = entering;
  }
}

}  // namespace

LpResult simplex_minimize(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                          const Eigen::VectorXd& b) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (c.size() != n || b.size() != m)
    throw DimensionError("simplex_minimize: inconsistent dimensions");

  // variables: n structural + m slacks + (rows with negative rhs) artificials
  int artificials = 0;
  for (int i = 0; i < m; ++i)
    if (b(i) < 0.0) ++artificials;
  const int vars = n + m + artificials;

  Tableau tab;
  tab.vars = vars;
  tab.t = Eigen::MatrixXd::Zero(m, vars + 1);
  tab.basis.assign(m, -1);

  int art = 0;
  for (int i = 0; i < m; ++i) {
    const double sign = (b(i) < 0.0) ? -1.0 : 1.0;
    tab.t.block(i, 0, 1, n) = sign * A.row(i);
    tab.t(i, n + i) = sign;  // slack
    tab.t(i, vars) = sign * b(i);
    if (b(i) < 0.0) {
      tab.t(i, n + m + art) = 1.0;
      tab.basis[i] = n + m + art;
      ++art;
    } else {
      tab.basis[i] = n + i;
    }
  }

  std::vector<bool> allowed(vars, true);
  if (artificials > 0) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(vars);
    for (int k = 0; k < artificials; ++k) phase1(n + m + k) = 1.0;
    if (!simplex_phase(tab, phase1, allowed))
      throw NumericError("simplex: phase-1 unbounded");
    double infeasibility = 0.0;
    for (int i = 0; i < m; ++i)
      if (tab.basis[i] >= n + m) infeasibility += tab.rhs(i);
    if (infeasibility > 1e-7)
      throw DecompositionError("simplex: infeasible program", infeasibility);

    // pivot zero-level artificials out of the basis; rows that offer no
    // pivot column are redundant and can be dropped
    std::vector<int> keep;
    for (int i = 0; i < m; ++i) {
      if (tab.basis[i] < n + m) {
        keep.push_back(i);
        continue;
      }
      int col = -1;
      for (int j = 0; j < n + m; ++j)
        if (std::abs(tab.t(i, j)) > kPivotTol) {
          col = j;
          break;
        }
      if (col < 0) continue;  // redundant constraint
      const double pivot = tab.t(i, col);
      tab.t.row(i) /= pivot;
      for (int r = 0; r < m; ++r) {
        if (r == i) continue;
        const double factor = tab.t(r, col);
        if (factor != 0.0) tab.t.row(r) -= factor * tab.t.row(i);
      }
      tab.basis[i] = col;
      keep.push_back(i);
    }
    if (static_cast<int>(keep.size()) != m) {
      Eigen::MatrixXd reduced(static_cast<Eigen::Index>(keep.size()),
                              tab.t.cols());
      std::vector<int> new_basis;
      for (std::size_t k = 0; k < keep.size(); ++k) {
        reduced.row(static_cast<Eigen::Index>(k)) = tab.t.row(keep[k]);
        new_basis.push_back(tab.basis[keep[k]]);
      }
      tab.t = std::move(reduced);
      tab.basis = std::move(new_basis);
    }
    for (int k = 0; k < artificials; ++k) allowed[n + m + k] = false;
  }

  Eigen::VectorXd cost = Eigen::VectorXd::Zero(vars);
  cost.head(n) = c;
  if (!simplex_phase(tab, cost, allowed))
    throw NumericError("simplex: objective unbounded below");

  LpResult out;
  out.x = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < tab.basis.size(); ++i)
    if (tab.basis[i] < n) out.x(tab.basis[i]) = tab.rhs(static_cast<int>(i));
  out.objective = c.dot(out.x);
  return out;
}

}  // namespace qem

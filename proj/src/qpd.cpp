#include "qem/qpd.hpp"

#include <cmath>

#include "qem/errors.hpp"
#include "qem/noisy_sim.hpp"
#include "qem/pauli.hpp"
#include "qem/simplex.hpp"

namespace qem {

namespace {

std::size_t qubits_from_dim(Eigen::Index dim) {
  std::size_t n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim)
    throw DimensionError("operator dimension is not a power of two");
  return n;
}

}  // namespace

Superoperator ptm_from_kraus(std::span<const Eigen::MatrixXcd> kraus,
                             const std::string& name) {
  if (kraus.empty()) throw std::invalid_argument("empty Kraus set");
  const Eigen::Index dim = kraus[0].rows();
  const std::size_t n = qubits_from_dim(dim);
  Eigen::MatrixXcd completeness = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& k : kraus) {
    if (k.rows() != dim || k.cols() != dim)
      throw DimensionError("Kraus operators must share one square dimension");
    completeness += k.adjoint() * k;
  }
  if ((completeness - Eigen::MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff() >
      1e-10)
    throw std::invalid_argument("Kraus set is not trace preserving");

  const std::size_t paulis = std::size_t{1} << (2 * n);
  Superoperator s;
  s.n_qubits = n;
  s.name = name;
  s.ptm.resize(paulis, paulis);
  std::vector<Eigen::MatrixXcd> pauli_mats(paulis);
  for (std::size_t a = 0; a < paulis; ++a)
    pauli_mats[a] = dense_matrix(pauli_from_ptm_index(a, n));
  for (std::size_t b = 0; b < paulis; ++b) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& k : kraus) out += k * pauli_mats[b] * k.adjoint();
    for (std::size_t a = 0; a < paulis; ++a)
      s.ptm(a, b) = ((pauli_mats[a] * out).trace() / static_cast<double>(dim))
                        .real();
  }
  return s;
}

Superoperator ptm_from_unitary(const Eigen::MatrixXcd& u,
                               const std::string& name) {
  if ((u * u.adjoint() -
       Eigen::MatrixXcd::Identity(u.rows(), u.rows()))
          .cwiseAbs()
          .maxCoeff() > 1e-10)
    throw std::invalid_argument("matrix is not unitary");
  const Eigen::MatrixXcd kraus[] = {u};
  return ptm_from_kraus(kraus, name);
}

QpdRepresentation optimal_representation(const Superoperator& target,
                                         std::vector<Superoperator> basis,
                                         double tolerance) {
  if (basis.empty()) throw std::invalid_argument("empty channel basis");
  const Eigen::Index dim = target.ptm.rows();
  for (const auto& b : basis)
    if (b.ptm.rows() != dim || b.ptm.cols() != dim)
      throw DimensionError("basis PTM dimension mismatch");

  const Eigen::Index entries = dim * dim;
  const Eigen::Index m = static_cast<Eigen::Index>(basis.size());

  // split eta = eta+ - eta-, minimize the one-norm subject to entrywise
  // reconstruction within +/- tolerance
  Eigen::MatrixXd a(2 * entries, 2 * m);
  Eigen::VectorXd rhs(2 * entries);
  for (Eigen::Index e = 0; e < entries; ++e) {
    const Eigen::Index row = e / dim;
    const Eigen::Index col = e % dim;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double v = basis[j].ptm(row, col);
      a(e, j) = v;
      a(e, m + j) = -v;
      a(entries + e, j) = -v;
      a(entries + e, m + j) = v;
    }
    rhs(e) = target.ptm(row, col) + tolerance;
    rhs(entries + e) = -(target.ptm(row, col) - tolerance);
  }
  const Eigen::VectorXd cost = Eigen::VectorXd::Ones(2 * m);

  LpResult lp;
  try {
    lp = simplex_minimize(cost, a, rhs);
  } catch (const DecompositionError& e) {
    throw DecompositionError(
        "target channel lies outside the span of the basis", e.residual);
  }

  QpdRepresentation rep;
  rep.basis = std::move(basis);
  rep.eta = lp.x.head(m) - lp.x.tail(m);
  Eigen::MatrixXd reconstruction = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index j = 0; j < m; ++j)
    reconstruction += rep.eta(j) * rep.basis[j].ptm;
  rep.reconstruction_error =
      (reconstruction - target.ptm).cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < m; ++j) {
    if (rep.eta(j) > 0)
      rep.gamma_plus += rep.eta(j);
    else
      rep.gamma_minus -= rep.eta(j);
  }
  rep.gamma = rep.gamma_plus + rep.gamma_minus;
  return rep;
}

ScaledRep noise_scaled_rep(const QpdRepresentation& rep, double xi) {
  if (xi < 0.0) throw std::invalid_argument("noise strength must be >= 0");
  if (rep.gamma > 1.0 + 1e-12) {
    const double xi_max = (rep.gamma + 1.0) / (rep.gamma - 1.0);
    if (xi > xi_max + 1e-12)
      throw std::invalid_argument("noise strength beyond (gamma+1)/(gamma-1)");
  }
  ScaledRep s;
  s.xi = xi;
  s.weight_plus = rep.gamma_plus - xi * rep.gamma_minus;
  s.weight_minus = -(1.0 - xi) * rep.gamma_minus;
  s.gamma_xi = std::abs(s.weight_plus) + std::abs(s.weight_minus);
  return s;
}

QpdSample sample_qpd(const QpdRepresentation& rep, const ScaledRep& scaled,
                     Rng& rng) {
  QpdSample sample;
  sample.weight = scaled.gamma_xi;
  const double p_plus =
      scaled.gamma_xi > 0 ? std::abs(scaled.weight_plus) / scaled.gamma_xi : 1.0;
  const bool plus = rng.next_double() < p_plus;
  sample.sign = plus ? 1 : (scaled.weight_minus < 0 ? -1 : 1);

  // draw a channel within the chosen component proportional to |eta|
  double total = 0.0;
  for (Eigen::Index j = 0; j < rep.eta.size(); ++j) {
    const double e = rep.eta(j);
    if (plus ? e > 0 : e < 0) total += std::abs(e);
  }
  if (total <= 0.0) {
    // component empty (gamma- = 0): fall back to the positive part
    total = rep.gamma_plus;
    double u = rng.next_double() * total;
    for (Eigen::Index j = 0; j < rep.eta.size(); ++j) {
      if (rep.eta(j) <= 0) continue;
      u -= rep.eta(j);
      if (u <= 0) {
        sample.channel = static_cast<std::size_t>(j);
        break;
      }
    }
    sample.sign = 1;
    return sample;
  }
  double u = rng.next_double() * total;
  for (Eigen::Index j = 0; j < rep.eta.size(); ++j) {
    const double e = rep.eta(j);
    if (plus ? e <= 0 : e >= 0) continue;
    u -= std::abs(e);
    if (u <= 0) {
      sample.channel = static_cast<std::size_t>(j);
      return sample;
    }
  }
  // numerical tail: last matching channel
  for (Eigen::Index j = rep.eta.size() - 1; j >= 0; --j) {
    const double e = rep.eta(j);
    if (plus ? e > 0 : e < 0) {
      sample.channel = static_cast<std::size_t>(j);
      break;
    }
  }
  return sample;
}

}  // namespace qem

#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "qem/rng.hpp"

namespace qem {

// Channel in the Pauli transfer representation: real 4^n x 4^n matrix with
// S_ab = (1/2^n) Tr(P_a L(P_b)); composition is matrix product.
struct Superoperator {
  std::size_t n_qubits = 0;
  Eigen::MatrixXd ptm;
  std::string name;
};

Superoperator ptm_from_unitary(const Eigen::MatrixXcd& u,
                               const std::string& name = {});
Superoperator ptm_from_kraus(std::span<const Eigen::MatrixXcd> kraus,
                             const std::string& name = {});

// Quasiprobability representation of a target channel over noisy basis
// channels: target = sum_a eta_a basis_a with minimal one-norm gamma.
struct QpdRepresentation {
  std::vector<Superoperator> basis;
  Eigen::VectorXd eta;
  double gamma_plus = 0.0;   // sum of positive eta
  double gamma_minus = 0.0;  // |sum| of negative eta
  double gamma = 0.0;        // gamma_plus + gamma_minus
  double reconstruction_error = 0.0;  // max-norm residual
};

// Linear program: minimize sum |eta| subject to the entrywise reconstruction
// constraints relaxed to +/- tolerance. Throws DecompositionError (carrying
// the infeasibility residual) when the target lies outside the basis span.
QpdRepresentation optimal_representation(const Superoperator& target,
                                         std::vector<Superoperator> basis,
                                         double tolerance = 1e-8);

// Noise-scaled two-component form
//   G^(xi) = (gamma+ - xi gamma-) Phi+ - (1 - xi) gamma- Phi-
// with sampling overhead gamma - xi (gamma - 1) on xi in [0,1] and exactly 1
// beyond (the representation becomes a proper mixture).
struct ScaledRep {
  double xi = 0.0;
  double weight_plus = 0.0;    // coefficient of Phi+
  double weight_minus = 0.0;   // signed coefficient of Phi-; negative below xi=1
  double gamma_xi = 1.0;
};

ScaledRep noise_scaled_rep(const QpdRepresentation& rep, double xi);

struct QpdSample {
  std::size_t channel = 0;
  int sign = 1;
  double weight = 1.0;  // gamma^(xi)
};

// Draw a basis channel from the scaled two-component mixture; the estimator
// is sign * weight * (measured value under the sampled channel).
QpdSample sample_qpd(const QpdRepresentation& rep, const ScaledRep& scaled,
                     Rng& rng);

}  // namespace qem

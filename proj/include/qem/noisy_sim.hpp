#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qem/circuit.hpp"
#include "qem/pauli.hpp"

namespace qem {

// Sparse Pauli-Lindblad model for one Clifford layer: jump rates lambda_k on
// generator Paulis P_k. As a superoperator the channel is
//   Lambda = prod_k ( w_k I + (1 - w_k) P_k . P_k ),  w_k = (1 + e^{-2 l_k})/2.
struct NoiseTerm {
  PauliString pauli;
  double rate = 0.0;  // lambda_k >= 0
};

struct SparseNoiseModel {
  std::uint64_t layer_id = 0;
  std::vector<NoiseTerm> terms;

  double total_rate() const;
};

inline double decay_weight(double lambda) {
  return 0.5 * (1.0 + std::exp(-2.0 * lambda));
}

struct ReadoutError {
  double p01 = 0.0;  // P(read 1 | prepared 0)
  double p10 = 0.0;  // P(read 0 | prepared 1)
};

// Simulator ground truth: per-layer Pauli models, optional per-qubit
// amplitude damping applied with each Clifford layer, per-qubit readout
// confusion applied to the diagonal before sampling.
struct NoiseSpec {
  std::map<std::uint64_t, SparseNoiseModel> layers;
  std::vector<double> damping;        // empty = none
  std::vector<ReadoutError> readout;  // empty = ideal readout

  bool trivial() const {
    return layers.empty() && damping.empty() && readout.empty();
  }
};

// bitstring -> count; leftmost bit is qubit 0.
using CountsTable = std::map<std::string, std::int64_t>;

// rho <- prod_k [ w_k rho + (1 - w_k) P_k rho P_k ], applied sequentially.
// Trace is preserved exactly.
void apply_pauli_channel(Eigen::MatrixXcd& rho, const SparseNoiseModel& model);

// Pauli fidelity f_a = exp(-2 sum_{ {P_a,P_k} = 0 } lambda_k) of the channel.
double pauli_fidelity(const SparseNoiseModel& model, const PauliString& pauli);

// All 4^n fidelities; index digits base 4 with (I,X,Y,Z) = (0,1,2,3) and
// qubit 0 as the most significant digit.
Eigen::VectorXd ptm_diagonal(const SparseNoiseModel& model,
                             std::size_t n_qubits);

PauliString pauli_from_ptm_index(std::size_t index, std::size_t n_qubits);
std::size_t ptm_index(const PauliString& pauli);

struct SimOptions {
  std::size_t max_qubits = 10;
  int threads = 0;  // 0 = auto
};

// Density-matrix executor: evolves |0..0> through the gates, applies the
// matching layer noise (plus optional damping) after each Clifford layer,
// applies readout confusion to the diagonal, then samples `shots` bitstrings.
// Deterministic given (seed, counter_base): circuit i uses the stream
// derive_seed(seed, counter_base + i).
std::vector<CountsTable> execute(std::span<const Circuit> circuits,
                                 std::int64_t shots, const NoiseSpec& noise,
                                 std::uint64_t seed,
                                 std::uint64_t counter_base = 0,
                                 const SimOptions& options = {});

// Final density matrix after noisy evolution (no readout confusion).
Eigen::MatrixXcd evolve_density(const Circuit& circuit, const NoiseSpec& noise,
                                const SimOptions& options = {});

// Tr(P rho_final) with noise; readout confusion is not applied.
double noisy_expectation(const Circuit& circuit, const PauliString& observable,
                         const NoiseSpec& noise, const SimOptions& options = {});

// Exact Tr(P rho_final) from noiseless evolution.
double noiseless_expectation(const Circuit& circuit,
                             const PauliString& observable,
                             const SimOptions& options = {});

}  // namespace qem

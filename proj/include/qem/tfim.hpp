#pragma once

#include "qem/circuit.hpp"

namespace qem {

// One first-order Trotter step for the transverse-field Ising chain
//   H = -J sum_j Z_j Z_{j+1} - h sum_j X_j
// on n qubits: RX(-2 h dt) on every qubit, then exp(i theta ZZ/2) bond terms
// realized as CX-RZ(2 J dt)-CX sandwiches on even bonds followed by odd bonds,
// with the RZ on the CX target.
Circuit tfim_trotter_step(std::size_t n_qubits, double coupling, double field,
                          double dt);

Circuit tfim_trotter_circuit(std::size_t n_qubits, int steps, double coupling,
                             double field, double dt);

}  // namespace qem

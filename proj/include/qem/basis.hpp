#pragma once

#include <string>

#include "qem/circuit.hpp"
#include "qem/pauli.hpp"
#include "qem/rng.hpp"

namespace qem {

// A measurement basis is a string over {X,Y,Z}, one letter per qubit.

// term is measurable in a basis when its non-identity letters match.
bool diagonal_in(const PauliString& term, const std::string& basis);

// Rotations taking |0..0> to the joint +1 eigenbasis: H for X, H then S
// for Y, nothing for Z.
Circuit basis_prep(const std::string& basis);

// Inverse rotations, mapping the basis eigenstates back to bitstrings.
Circuit basis_unprep(const std::string& basis);

// Gates realizing a Pauli operator (X/Y/Z per non-identity letter).
void append_pauli_gates(Circuit& circuit, const PauliString& pauli);

PauliString random_pauli(std::size_t n_qubits, Rng& rng);

}  // namespace qem

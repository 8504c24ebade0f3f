#include "qem/basis.hpp"

#include "qem/errors.hpp"

namespace qem {

bool diagonal_in(const PauliString& term, const std::string& basis) {
  if (term.n_qubits() != basis.size())
    throw DimensionError("diagonal_in: width mismatch");
  for (std::size_t q = 0; q < basis.size(); ++q) {
    const char l = term.letter(q);
    if (l != 'I' && l != basis[q]) return false;
  }
  return true;
}

Circuit basis_prep(const std::string& basis) {
  Circuit c(basis.size());
  for (std::size_t q = 0; q < basis.size(); ++q) {
    switch (basis[q]) {
      case 'X': c.add(Gate::h(q)); break;
      case 'Y': c.add(Gate::h(q)).add(Gate::s(q)); break;
      case 'Z': break;
      default: throw BasisError(std::string("invalid basis letter '") +
                                basis[q] + "'");
    }
  }
  return c;
}

Circuit basis_unprep(const std::string& basis) {
  Circuit c(basis.size());
  for (std::size_t q = 0; q < basis.size(); ++q) {
    switch (basis[q]) {
      case 'X': c.add(Gate::h(q)); break;
      case 'Y': c.add(Gate::sdg(q)).add(Gate::h(q)); break;
      case 'Z': break;
      default: throw BasisError(std::string("invalid basis letter '") +
                                basis[q] + "'");
    }
  }
  return c;
}

void append_pauli_gates(Circuit& circuit, const PauliString& pauli) {
  for (std::size_t q = 0; q < pauli.n_qubits(); ++q) {
    switch (pauli.letter(q)) {
      case 'X': circuit.add(Gate::x(q)); break;
      case 'Y': circuit.add(Gate::y(q)); break;
      case 'Z': circuit.add(Gate::z(q)); break;
      default: break;
    }
  }
}

PauliString random_pauli(std::size_t n_qubits, Rng& rng) {
  static constexpr char kLetters[4] = {'I', 'X', 'Y', 'Z'};
  PauliString p(n_qubits);
  for (std::size_t q = 0; q < n_qubits; ++q)
    p.set_letter(q, kLetters[rng.next_below(4)]);
  return p;
}

}  // namespace qem

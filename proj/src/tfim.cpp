#include "qem/tfim.hpp"

#include <stdexcept>

namespace qem {

Circuit tfim_trotter_step(std::size_t n_qubits, double coupling, double field,
                          double dt) {
  if (n_qubits < 2) throw std::invalid_argument("TFIM needs >= 2 qubits");
  Circuit c(n_qubits);
  for (std::size_t q = 0; q < n_qubits; ++q)
    c.add(Gate::rx(q, -2.0 * field * dt));
  const double zz_angle = 2.0 * coupling * dt;
  for (std::size_t parity = 0; parity < 2; ++parity) {
    for (std::size_t q = parity; q + 1 < n_qubits; q += 2)
      c.add(Gate::cx(q, q + 1));
    for (std::size_t q = parity; q + 1 < n_qubits; q += 2)
      c.add(Gate::rz(q + 1, zz_angle));
    for (std::size_t q = parity; q + 1 < n_qubits; q += 2)
      c.add(Gate::cx(q, q + 1));
  }
  return c;
}

Circuit tfim_trotter_circuit(std::size_t n_qubits, int steps, double coupling,
                             double field, double dt) {
  Circuit c(n_qubits);
  for (int s = 0; s < steps; ++s)
    c.append(tfim_trotter_step(n_qubits, coupling, field, dt));
  return c;
}

}  // namespace qem

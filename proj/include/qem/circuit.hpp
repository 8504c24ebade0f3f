#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qem/pauli.hpp"

namespace qem {

enum class GateKind { RX, RY, RZ, H, S, SDG, X, Y, Z, CX, CZ };

bool gate_is_two_qubit(GateKind kind);
bool gate_has_angle(GateKind kind);
std::string_view gate_name(GateKind kind);
std::optional<GateKind> gate_kind_from_name(std::string_view name);

struct Gate {
  GateKind kind;
  std::size_t q0 = 0;
  std::size_t q1 = 0;  // second operand of CX/CZ
  double angle = 0.0;  // RX/RY/RZ only

  static Gate rx(std::size_t q, double angle) { return {GateKind::RX, q, 0, angle}; }
  static Gate ry(std::size_t q, double angle) { return {GateKind::RY, q, 0, angle}; }
  static Gate rz(std::size_t q, double angle) { return {GateKind::RZ, q, 0, angle}; }
  static Gate h(std::size_t q) { return {GateKind::H, q, 0, 0.0}; }
  static Gate s(std::size_t q) { return {GateKind::S, q, 0, 0.0}; }
  static Gate sdg(std::size_t q) { return {GateKind::SDG, q, 0, 0.0}; }
  static Gate x(std::size_t q) { return {GateKind::X, q, 0, 0.0}; }
  static Gate y(std::size_t q) { return {GateKind::Y, q, 0, 0.0}; }
  static Gate z(std::size_t q) { return {GateKind::Z, q, 0, 0.0}; }
  static Gate cx(std::size_t control, std::size_t target) {
    return {GateKind::CX, control, target, 0.0};
  }
  static Gate cz(std::size_t a, std::size_t b) { return {GateKind::CZ, a, b, 0.0}; }

  bool two_qubit() const { return gate_is_two_qubit(kind); }
};

struct Circuit {
  std::size_t n_qubits = 0;
  std::vector<Gate> gates;

  Circuit() = default;
  explicit Circuit(std::size_t n) : n_qubits(n) {}

  Circuit& add(const Gate& g);
  void append(const Circuit& other);
};

// Single-qubit block followed by a self-adjoint Clifford layer. A layer with
// an empty Clifford part carries no noise and is never benchmarked.
// `entanglers` keeps the two-qubit gates in arrival order; `clifford` is the
// canonical (sorted) form used for layer identity. Flattening in arrival
// order makes parse_dressed a fixed point.
struct DressedLayer {
  std::vector<Gate> singles;
  std::vector<Gate> entanglers;
  CliffordLayerSpec clifford;
};

struct DressedCircuit {
  std::size_t n_qubits = 0;
  std::vector<DressedLayer> layers;

  // Concatenation of the layers; reproduces the source circuit's unitary.
  Circuit flatten() const;
};

// Greedy left-to-right decomposition into dressed layers. Single-qubit gates
// accumulate into the current block; a two-qubit Clifford opens a layer that
// absorbs further two-qubit gates with disjoint support until a conflict
// (overlapping support, or a single-qubit gate on a qubit the open layer
// touches) closes it. A single-qubit gate on an untouched qubit is deferred
// to the next block, and its qubit blocks further absorption. Trailing
// single-qubit gates form a final layer with an empty Clifford part.
DressedCircuit parse_dressed(const Circuit& circuit);

// Deduplicated non-empty Clifford layers keyed by id; deterministic order.
std::vector<CliffordLayerSpec> distinct_clifford_layers(
    std::span<const DressedCircuit> circuits);

}  // namespace qem

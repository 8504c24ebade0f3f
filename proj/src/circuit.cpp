#include "qem/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "qem/errors.hpp"

namespace qem {

bool gate_is_two_qubit(GateKind kind) {
  return kind == GateKind::CX || kind == GateKind::CZ;
}

bool gate_has_angle(GateKind kind) {
  return kind == GateKind::RX || kind == GateKind::RY || kind == GateKind::RZ;
}

std::string_view gate_name(GateKind kind) {
  switch (kind) {
    case GateKind::RX: return "rx";
    case GateKind::RY: return "ry";
    case GateKind::RZ: return "rz";
    case GateKind::H: return "h";
    case GateKind::S: return "s";
    case GateKind::SDG: return "sdg";
    case GateKind::X: return "x";
    case GateKind::Y: return "y";
    case GateKind::Z: return "z";
    case GateKind::CX: return "cx";
    case GateKind::CZ: return "cz";
  }
  return "?";
}

std::optional<GateKind> gate_kind_from_name(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "rx") return GateKind::RX;
  if (lower == "ry") return GateKind::RY;
  if (lower == "rz") return GateKind::RZ;
  if (lower == "h") return GateKind::H;
  if (lower == "s") return GateKind::S;
  if (lower == "sdg" || lower == "sdag") return GateKind::SDG;
  if (lower == "x") return GateKind::X;
  if (lower == "y") return GateKind::Y;
  if (lower == "z") return GateKind::Z;
  if (lower == "cx" || lower == "cnot") return GateKind::CX;
  if (lower == "cz") return GateKind::CZ;
  return std::nullopt;
}

Circuit& Circuit::add(const Gate& g) {
  if (g.q0 >= n_qubits || (g.two_qubit() && g.q1 >= n_qubits))
    throw DimensionError("gate acts outside register");
  if (g.two_qubit() && g.q0 == g.q1)
    throw DimensionError("two-qubit gate needs distinct qubits");
  if (gate_has_angle(g.kind) && !std::isfinite(g.angle))
    throw ParseError("gate angle must be finite");
  gates.push_back(g);
  return *this;
}

void Circuit::append(const Circuit& other) {
  if (other.n_qubits != n_qubits)
    throw DimensionError("appending circuit of different width");
  gates.insert(gates.end(), other.gates.begin(), other.gates.end());
}

Circuit DressedCircuit::flatten() const {
  Circuit c(n_qubits);
  for (const auto& layer : layers) {
    for (const auto& g : layer.singles) c.add(g);
    for (const auto& g : layer.entanglers) c.add(g);
  }
  return c;
}

DressedCircuit parse_dressed(const Circuit& circuit) {
  DressedCircuit out;
  out.n_qubits = circuit.n_qubits;

  std::vector<Gate> block;      // single-qubit block of the open layer
  std::vector<Gate> acc;        // singles accumulating for the next block
  std::vector<Gate> open;       // two-qubit gates of the open layer
  std::vector<bool> touched(circuit.n_qubits, false);
  std::vector<bool> pending(circuit.n_qubits, false);
  bool layer_open = false;

  auto emit = [&]() {
    if (block.empty() && open.empty()) return;
    DressedLayer layer;
    layer.singles = std::move(block);
    layer.entanglers = open;
    std::vector<LayerGate> gates;
    for (const auto& g : open) {
      const auto kind =
          (g.kind == GateKind::CX) ? LayerGateKind::CX : LayerGateKind::CZ;
      gates.push_back(LayerGate{kind, g.q0, g.q1});
    }
    layer.clifford = CliffordLayerSpec(circuit.n_qubits, std::move(gates));
    out.layers.push_back(std::move(layer));
    block = {};
    open = {};
    std::fill(touched.begin(), touched.end(), false);
    std::fill(pending.begin(), pending.end(), false);
    layer_open = false;
  };

  for (const auto& g : circuit.gates) {
    if (g.q0 >= circuit.n_qubits || (g.two_qubit() && g.q1 >= circuit.n_qubits))
      throw ParseError("gate acts outside register");
    if (!g.two_qubit()) {
      if (!layer_open) {
        acc.push_back(g);
      } else if (touched[g.q0]) {
        emit();
        acc.push_back(g);
      } else {
        // commutes with everything absorbed so far; belongs to the next block
        acc.push_back(g);
        pending[g.q0] = true;
      }
      continue;
    }
    if (g.kind != GateKind::CX && g.kind != GateKind::CZ)
      throw ParseError(std::string("unsupported gate in dressed parse: ") +
                       std::string(gate_name(g.kind)));
    const bool conflict = touched[g.q0] || touched[g.q1] || pending[g.q0] ||
                          pending[g.q1];
    if (layer_open && conflict) emit();
    if (!layer_open) {
      block = std::move(acc);
      acc = {};
      std::fill(pending.begin(), pending.end(), false);
      layer_open = true;
    }
    open.push_back(g);
    touched[g.q0] = true;
    touched[g.q1] = true;
  }
  emit();
  if (!acc.empty()) {
    DressedLayer trailing;
    trailing.singles = std::move(acc);
    trailing.clifford = CliffordLayerSpec(circuit.n_qubits, {});
    out.layers.push_back(std::move(trailing));
  }
  return out;
}

std::vector<CliffordLayerSpec> distinct_clifford_layers(
    std::span<const DressedCircuit> circuits) {
  std::map<std::uint64_t, CliffordLayerSpec> by_id;
  for (const auto& dc : circuits)
    for (const auto& layer : dc.layers)
      if (!layer.clifford.empty()) by_id.emplace(layer.clifford.id(), layer.clifford);
  std::vector<CliffordLayerSpec> out;
  out.reserve(by_id.size());
  for (auto& [id, spec] : by_id) out.push_back(spec);
  return out;
}

}  // namespace qem

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qem {

// n-qubit Pauli operator in symplectic (x-bits, z-bits) form. The global
// phase is deliberately not tracked: for Pauli-twirl statistics and Pauli
// noise channels only the label matters, since P rho P is insensitive to a
// phase on P. Where a conjugation sign is needed (degeneracy-lifting
// measurements) use conjugation_sign().
class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(std::size_t n_qubits)
      : x_(n_qubits, 0), z_(n_qubits, 0) {}

  // Text form over {I,X,Y,Z}; leftmost character is qubit 0.
  static PauliString from_label(std::string_view label);
  static PauliString single(std::size_t n_qubits, std::size_t qubit,
                            char letter);

  std::size_t n_qubits() const { return x_.size(); }

  bool x_bit(std::size_t q) const { return x_[q] != 0; }
  bool z_bit(std::size_t q) const { return z_[q] != 0; }
  void set_x(std::size_t q, bool v) { x_[q] = v ? 1 : 0; }
  void set_z(std::size_t q, bool v) { z_[q] = v ? 1 : 0; }

  char letter(std::size_t q) const {
    static constexpr char table[4] = {'I', 'X', 'Z', 'Y'};
    return table[(x_[q] ? 1 : 0) | (z_[q] ? 2 : 0)];
  }
  void set_letter(std::size_t q, char letter);

  std::string label() const;

  bool is_identity() const;
  int weight() const;
  std::vector<std::size_t> support() const;

  // Label-level product (bitwise xor); the phase of the product is dropped.
  PauliString operator*(const PauliString& rhs) const;

  bool operator==(const PauliString& rhs) const {
    return x_ == rhs.x_ && z_ == rhs.z_;
  }
  bool operator!=(const PauliString& rhs) const { return !(*this == rhs); }
  bool operator<(const PauliString& rhs) const {
    return label() < rhs.label();
  }

 private:
  std::vector<std::uint8_t> x_;
  std::vector<std::uint8_t> z_;
};

// 0 if a and b commute, 1 if they anticommute; the parity of
// sum_j (a.x_j b.z_j + a.z_j b.x_j).
int symplectic_product(const PauliString& a, const PauliString& b);

enum class LayerGateKind { CX, CZ, Swap, H, X, Y, Z };

std::string_view layer_gate_name(LayerGateKind kind);

struct LayerGate {
  LayerGateKind kind;
  std::size_t q0;
  std::size_t q1;  // ignored for single-qubit kinds

  bool two_qubit() const {
    return kind == LayerGateKind::CX || kind == LayerGateKind::CZ ||
           kind == LayerGateKind::Swap;
  }
};

// A layer of self-adjoint Clifford gates with pairwise disjoint supports.
// Gates are stored in a canonical sorted order so that equal layers (same
// gates on the same qubits, in any order) compare equal and hash equal.
class CliffordLayerSpec {
 public:
  CliffordLayerSpec() = default;
  CliffordLayerSpec(std::size_t n_qubits, std::vector<LayerGate> gates);

  std::size_t n_qubits() const { return n_qubits_; }
  const std::vector<LayerGate>& gates() const { return gates_; }
  bool empty() const { return gates_.empty(); }

  // FNV-1a over the canonical gate list; stable across runs and platforms.
  std::uint64_t id() const { return id_; }

  bool touches(std::size_t q) const;

  bool operator==(const CliffordLayerSpec& rhs) const {
    return n_qubits_ == rhs.n_qubits_ && id_ == rhs.id_;
  }

 private:
  std::size_t n_qubits_ = 0;
  std::vector<LayerGate> gates_;
  std::uint64_t id_ = 0;
};

// Q with C P C^dag = +/- Q; the sign is discarded.
PauliString conjugate_by_layer(const PauliString& p,
                               const CliffordLayerSpec& layer);

// The +/- sign dropped by conjugate_by_layer, computed gate-wise from dense
// 2x2 / 4x4 conjugation. Exact for any register size since layer gates have
// disjoint supports.
int conjugation_sign(const PauliString& p, const CliffordLayerSpec& layer);

// Kronecker product of single-qubit Pauli matrices; qubit 0 is the first
// (most significant) factor.
Eigen::MatrixXcd dense_matrix(const PauliString& p, std::size_t max_qubits = 6);

// All weight-1 Paulis plus all weight-2 Paulis supported on a connected
// pair; deduplicated, ordered lexicographically on (weight, qubit indices,
// Pauli letters). The count is 3n + 9|E| exactly.
std::vector<PauliString> enumerate_model_terms(
    std::size_t n_qubits,
    const std::vector<std::pair<std::size_t, std::size_t>>& edges);

}  // namespace qem

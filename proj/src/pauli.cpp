#include "qem/pauli.hpp"

#include <algorithm>
#include <set>

#include "qem/errors.hpp"

namespace qem {

namespace {

const Eigen::Matrix2cd& pauli_matrix_1q(char letter) {
  using namespace std::complex_literals;
  static const Eigen::Matrix2cd kI = Eigen::Matrix2cd::Identity();
  static const Eigen::Matrix2cd kX = (Eigen::Matrix2cd() << 0, 1, 1, 0).finished();
  static const Eigen::Matrix2cd kY =
      (Eigen::Matrix2cd() << 0.0, -1.0i, 1.0i, 0.0).finished();
  static const Eigen::Matrix2cd kZ = (Eigen::Matrix2cd() << 1, 0, 0, -1).finished();
  switch (letter) {
    case 'I': return kI;
    case 'X': return kX;
    case 'Y': return kY;
    default: return kZ;
  }
}

}  // namespace

PauliString PauliString::from_label(std::string_view label) {
  PauliString p(label.size());
  for (std::size_t q = 0; q < label.size(); ++q) p.set_letter(q, label[q]);
  return p;
}

PauliString PauliString::single(std::size_t n_qubits, std::size_t qubit,
                                char letter) {
  PauliString p(n_qubits);
  if (qubit >= n_qubits) throw DimensionError("Pauli qubit index out of range");
  p.set_letter(qubit, letter);
  return p;
}

void PauliString::set_letter(std::size_t q, char letter) {
  switch (letter) {
    case 'I': x_[q] = 0; z_[q] = 0; break;
    case 'X': x_[q] = 1; z_[q] = 0; break;
    case 'Y': x_[q] = 1; z_[q] = 1; break;
    case 'Z': x_[q] = 0; z_[q] = 1; break;
    default:
      throw ParseError(std::string("invalid Pauli letter '") + letter + "'");
  }
}

std::string PauliString::label() const {
  std::string s(n_qubits(), 'I');
  for (std::size_t q = 0; q < n_qubits(); ++q) s[q] = letter(q);
  return s;
}

bool PauliString::is_identity() const {
  for (std::size_t q = 0; q < n_qubits(); ++q)
    if (x_[q] || z_[q]) return false;
  return true;
}

int PauliString::weight() const {
  int w = 0;
  for (std::size_t q = 0; q < n_qubits(); ++q)
    if (x_[q] || z_[q]) ++w;
  return w;
}

std::vector<std::size_t> PauliString::support() const {
  std::vector<std::size_t> s;
  for (std::size_t q = 0; q < n_qubits(); ++q)
    if (x_[q] || z_[q]) s.push_back(q);
  return s;
}

PauliString PauliString::operator*(const PauliString& rhs) const {
  if (n_qubits() != rhs.n_qubits())
    throw DimensionError("Pauli product: size mismatch");
  PauliString out(n_qubits());
  for (std::size_t q = 0; q < n_qubits(); ++q) {
    out.x_[q] = x_[q] ^ rhs.x_[q];
    out.z_[q] = z_[q] ^ rhs.z_[q];
  }
  return out;
}

int symplectic_product(const PauliString& a, const PauliString& b) {
  if (a.n_qubits() != b.n_qubits())
    throw DimensionError("symplectic_product: size mismatch");
  int parity = 0;
  for (std::size_t q = 0; q < a.n_qubits(); ++q) {
    parity ^= (a.x_bit(q) && b.z_bit(q)) ? 1 : 0;
    parity ^= (a.z_bit(q) && b.x_bit(q)) ? 1 : 0;
  }
  return parity;
}

std::string_view layer_gate_name(LayerGateKind kind) {
  switch (kind) {
    case LayerGateKind::CX: return "CX";
    case LayerGateKind::CZ: return "CZ";
    case LayerGateKind::Swap: return "SWAP";
    case LayerGateKind::H: return "H";
    case LayerGateKind::X: return "X";
    case LayerGateKind::Y: return "Y";
    case LayerGateKind::Z: return "Z";
  }
  return "?";
}

CliffordLayerSpec::CliffordLayerSpec(std::size_t n_qubits,
                                     std::vector<LayerGate> gates)
    : n_qubits_(n_qubits), gates_(std::move(gates)) {
  std::vector<bool> used(n_qubits_, false);
  for (auto& g : gates_) {
    if (g.q0 >= n_qubits_ || (g.two_qubit() && g.q1 >= n_qubits_))
      throw DimensionError("layer gate qubit out of range");
    if (g.two_qubit() && g.q0 == g.q1)
      throw DimensionError("two-qubit layer gate needs distinct qubits");
    if (used[g.q0] || (g.two_qubit() && used[g.q1]))
      throw ParseError("layer gates must have disjoint supports");
    used[g.q0] = true;
    if (g.two_qubit()) used[g.q1] = true;
    // CZ and SWAP are symmetric; normalize operand order.
    if ((g.kind == LayerGateKind::CZ || g.kind == LayerGateKind::Swap) &&
        g.q1 < g.q0)
      std::swap(g.q0, g.q1);
  }
  std::sort(gates_.begin(), gates_.end(),
            [](const LayerGate& a, const LayerGate& b) {
              if (a.q0 != b.q0) return a.q0 < b.q0;
              if (a.q1 != b.q1) return a.q1 < b.q1;
              return static_cast<int>(a.kind) < static_cast<int>(b.kind);
            });
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 1099511628211ULL;
    }
  };
  feed(n_qubits_);
  for (const auto& g : gates_) {
    feed(static_cast<std::uint64_t>(g.kind));
    feed(g.q0);
    feed(g.two_qubit() ? g.q1 : g.q0);
  }
  id_ = h;
}

bool CliffordLayerSpec::touches(std::size_t q) const {
  for (const auto& g : gates_)
    if (g.q0 == q || (g.two_qubit() && g.q1 == q)) return true;
  return false;
}

namespace {

// Symplectic update rules for the supported self-adjoint gates, acting on
// (x, z) bit pairs. Phases are dropped.
void conjugate_gate(const LayerGate& g, PauliString& p) {
  const std::size_t a = g.q0;
  const std::size_t b = g.q1;
  switch (g.kind) {
    case LayerGateKind::CX: {
      // control a, target b: X_a -> X_a X_b, Z_b -> Z_a Z_b
      p.set_x(b, p.x_bit(b) ^ p.x_bit(a));
      p.set_z(a, p.z_bit(a) ^ p.z_bit(b));
      break;
    }
    case LayerGateKind::CZ: {
      // X_a -> X_a Z_b, X_b -> Z_a X_b
      p.set_z(b, p.z_bit(b) ^ p.x_bit(a));
      p.set_z(a, p.z_bit(a) ^ p.x_bit(b));
      break;
    }
    case LayerGateKind::Swap: {
      bool xa = p.x_bit(a), za = p.z_bit(a);
      p.set_x(a, p.x_bit(b));
      p.set_z(a, p.z_bit(b));
      p.set_x(b, xa);
      p.set_z(b, za);
      break;
    }
    case LayerGateKind::H: {
      bool xa = p.x_bit(a);
      p.set_x(a, p.z_bit(a));
      p.set_z(a, xa);
      break;
    }
    case LayerGateKind::X:
    case LayerGateKind::Y:
    case LayerGateKind::Z:
      // Pauli conjugation fixes every Pauli label.
      break;
  }
}

Eigen::MatrixXcd layer_gate_matrix(LayerGateKind kind) {
  Eigen::MatrixXcd u;
  switch (kind) {
    case LayerGateKind::CX:
      u = Eigen::MatrixXcd::Zero(4, 4);
      u(0, 0) = u(1, 1) = u(2, 3) = u(3, 2) = 1.0;
      return u;
    case LayerGateKind::CZ:
      u = Eigen::MatrixXcd::Identity(4, 4);
      u(3, 3) = -1.0;
      return u;
    case LayerGateKind::Swap:
      u = Eigen::MatrixXcd::Zero(4, 4);
      u(0, 0) = u(1, 2) = u(2, 1) = u(3, 3) = 1.0;
      return u;
    case LayerGateKind::H:
      u.resize(2, 2);
      u << 1, 1, 1, -1;
      return u / std::sqrt(2.0);
    case LayerGateKind::X: return pauli_matrix_1q('X');
    case LayerGateKind::Y: return pauli_matrix_1q('Y');
    case LayerGateKind::Z: return pauli_matrix_1q('Z');
  }
  throw UnsupportedGateError("unknown layer gate kind");
}

}  // namespace

PauliString conjugate_by_layer(const PauliString& p,
                               const CliffordLayerSpec& layer) {
  if (p.n_qubits() != layer.n_qubits())
    throw DimensionError("conjugate_by_layer: register size mismatch");
  PauliString out = p;
  for (const auto& g : layer.gates()) conjugate_gate(g, out);
  return out;
}

int conjugation_sign(const PauliString& p, const CliffordLayerSpec& layer) {
  if (p.n_qubits() != layer.n_qubits())
    throw DimensionError("conjugation_sign: register size mismatch");
  int sign = 1;
  for (const auto& g : layer.gates()) {
    PauliString sub(g.two_qubit() ? 2 : 1);
    sub.set_letter(0, p.letter(g.q0));
    if (g.two_qubit()) sub.set_letter(1, p.letter(g.q1));
    PauliString image = sub;
    CliffordLayerSpec local(sub.n_qubits(),
                            {LayerGate{g.kind, 0, g.two_qubit() ? 1u : 0u}});
    image = conjugate_by_layer(sub, local);
    const Eigen::MatrixXcd u = layer_gate_matrix(g.kind);
    const Eigen::MatrixXcd lhs = u * dense_matrix(sub) * u.adjoint();
    const Eigen::MatrixXcd rhs = dense_matrix(image);
    // lhs == s * rhs with s in {+1, -1}
    const double s =
        ((lhs.array() * rhs.array().conjugate()).sum().real()) /
        static_cast<double>(rhs.rows());
    sign *= (s < 0.0) ? -1 : 1;
  }
  return sign;
}

Eigen::MatrixXcd dense_matrix(const PauliString& p, std::size_t max_qubits) {
  const std::size_t n = p.n_qubits();
  if (n > max_qubits)
    throw ResourceError("dense_matrix: register exceeds brute-force cap");
  // qubit 0 is the outermost Kronecker factor
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Ones(1, 1);
  for (std::size_t q = n; q-- > 0;) {
    const Eigen::Matrix2cd& f = pauli_matrix_1q(p.letter(q));
    Eigen::MatrixXcd next(m.rows() * 2, m.cols() * 2);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c)
        next.block(r * m.rows(), c * m.cols(), m.rows(), m.cols()) =
            f(r, c) * m;
    m = std::move(next);
  }
  return m;
}

std::vector<PauliString> enumerate_model_terms(
    std::size_t n_qubits,
    const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  static constexpr char kLetters[3] = {'X', 'Y', 'Z'};
  std::vector<PauliString> terms;
  for (std::size_t q = 0; q < n_qubits; ++q)
    for (char l : kLetters) terms.push_back(PauliString::single(n_qubits, q, l));

  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::vector<std::pair<std::size_t, std::size_t>> canonical;
  for (auto [a, b] : edges) {
    if (a >= n_qubits || b >= n_qubits)
      throw DimensionError("connectivity edge references invalid qubit");
    if (a == b) continue;
    auto e = std::minmax(a, b);
    if (seen.insert(e).second) canonical.push_back(e);
  }
  std::sort(canonical.begin(), canonical.end());

  for (auto [a, b] : canonical) {
    for (char la : kLetters)
      for (char lb : kLetters) {
        PauliString p(n_qubits);
        p.set_letter(a, la);
        p.set_letter(b, lb);
        terms.push_back(p);
      }
  }
  return terms;
}

}  // namespace qem

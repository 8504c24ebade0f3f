#include "qem/noisy_sim.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "qem/errors.hpp"
#include "qem/rng.hpp"

namespace qem {

using cd = std::complex<double>;

double SparseNoiseModel::total_rate() const {
  double s = 0.0;
  for (const auto& t : terms) s += t.rate;
  return s;
}

namespace {

Eigen::Matrix2cd single_qubit_unitary(const Gate& g) {
  using namespace std::complex_literals;
  Eigen::Matrix2cd u;
  const double half = 0.5 * g.angle;
  switch (g.kind) {
    case GateKind::RX:
      u << std::cos(half), -1.0i * std::sin(half),
           -1.0i * std::sin(half), std::cos(half);
      return u;
    case GateKind::RY:
      u << std::cos(half), -std::sin(half), std::sin(half), std::cos(half);
      return u;
    case GateKind::RZ:
      u << std::exp(-0.5i * g.angle), 0.0, 0.0, std::exp(0.5i * g.angle);
      return u;
    case GateKind::H:
      u << 1, 1, 1, -1;
      return u / std::sqrt(2.0);
    case GateKind::S:
      u << 1.0, 0.0, 0.0, 1.0i;
      return u;
    case GateKind::SDG:
      u << 1.0, 0.0, 0.0, -1.0i;
      return u;
    case GateKind::X:
      u << 0, 1, 1, 0;
      return u;
    case GateKind::Y:
      u << 0.0, -1.0i, 1.0i, 0.0;
      return u;
    case GateKind::Z:
      u << 1, 0, 0, -1;
      return u;
    default:
      throw UnsupportedGateError("not a single-qubit gate");
  }
}

// qubit 0 is the most significant index bit
inline std::size_t bit_stride(std::size_t n, std::size_t q) {
  return std::size_t{1} << (n - 1 - q);
}

void apply_1q(Eigen::MatrixXcd& rho, const Eigen::Matrix2cd& u, std::size_t q,
              std::size_t n) {
  const std::size_t dim = std::size_t{1} << n;
  const std::size_t s = bit_stride(n, q);
  // rho <- U rho
  for (std::size_t i = 0; i < dim; ++i) {
    if (i & s) continue;
    for (std::size_t c = 0; c < dim; ++c) {
      const cd a = rho(i, c), b = rho(i | s, c);
      rho(i, c) = u(0, 0) * a + u(0, 1) * b;
      rho(i | s, c) = u(1, 0) * a + u(1, 1) * b;
    }
  }
  // rho <- rho U^dag
  for (std::size_t j = 0; j < dim; ++j) {
    if (j & s) continue;
    for (std::size_t r = 0; r < dim; ++r) {
      const cd a = rho(r, j), b = rho(r, j | s);
      rho(r, j) = a * std::conj(u(0, 0)) + b * std::conj(u(0, 1));
      rho(r, j | s) = a * std::conj(u(1, 0)) + b * std::conj(u(1, 1));
    }
  }
}

void apply_2q(Eigen::MatrixXcd& rho, const Eigen::Matrix4cd& u, std::size_t q0,
              std::size_t q1, std::size_t n) {
  const std::size_t dim = std::size_t{1} << n;
  const std::size_t s0 = bit_stride(n, q0);
  const std::size_t s1 = bit_stride(n, q1);
  std::array<std::size_t, 4> off{0, s1, s0, s0 | s1};
  for (std::size_t i = 0; i < dim; ++i) {
    if (i & (s0 | s1)) continue;
    for (std::size_t c = 0; c < dim; ++c) {
      std::array<cd, 4> v;
      for (int k = 0; k < 4; ++k) v[k] = rho(i | off[k], c);
      for (int r = 0; r < 4; ++r) {
        cd acc = 0.0;
        for (int k = 0; k < 4; ++k) acc += u(r, k) * v[k];
        rho(i | off[r], c) = acc;
      }
    }
  }
  for (std::size_t j = 0; j < dim; ++j) {
    if (j & (s0 | s1)) continue;
    for (std::size_t r = 0; r < dim; ++r) {
      std::array<cd, 4> v;
      for (int k = 0; k < 4; ++k) v[k] = rho(r, j | off[k]);
      for (int cidx = 0; cidx < 4; ++cidx) {
        cd acc = 0.0;
        for (int k = 0; k < 4; ++k) acc += v[k] * std::conj(u(cidx, k));
        rho(r, j | off[cidx]) = acc;
      }
    }
  }
}

Eigen::Matrix4cd two_qubit_unitary(GateKind kind) {
  Eigen::Matrix4cd u = Eigen::Matrix4cd::Zero();
  if (kind == GateKind::CX) {
    // local basis: bit 0 = q0 (control, high), bit 1 = q1 (target)
    u(0, 0) = u(1, 1) = u(2, 3) = u(3, 2) = 1.0;
  } else {
    u = Eigen::Matrix4cd::Identity();
    u(3, 3) = -1.0;
  }
  return u;
}

void apply_gate(Eigen::MatrixXcd& rho, const Gate& g, std::size_t n) {
  if (g.two_qubit())
    apply_2q(rho, two_qubit_unitary(g.kind), g.q0, g.q1, n);
  else
    apply_1q(rho, single_qubit_unitary(g), g.q0, n);
}

struct PauliMasks {
  std::size_t xor_mask = 0;
  std::vector<double> sigma;  // (-1)^{parity of z-marked bits}
};

PauliMasks pauli_masks(const PauliString& p, std::size_t n) {
  PauliMasks m;
  std::size_t zmask = 0;
  for (std::size_t q = 0; q < n; ++q) {
    if (p.x_bit(q)) m.xor_mask |= bit_stride(n, q);
    if (p.z_bit(q)) zmask |= bit_stride(n, q);
  }
  const std::size_t dim = std::size_t{1} << n;
  m.sigma.resize(dim);
  for (std::size_t i = 0; i < dim; ++i)
    m.sigma[i] = (std::popcount(i & zmask) & 1) ? -1.0 : 1.0;
  return m;
}

void apply_pauli_term(Eigen::MatrixXcd& rho, Eigen::MatrixXcd& scratch,
                      const PauliMasks& m, double w) {
  const auto dim = rho.rows();
  // scratch = P rho P
  for (Eigen::Index j = 0; j < dim; ++j) {
    const std::size_t js = static_cast<std::size_t>(j) ^ m.xor_mask;
    for (Eigen::Index i = 0; i < dim; ++i) {
      const std::size_t is = static_cast<std::size_t>(i) ^ m.xor_mask;
      scratch(i, j) = m.sigma[is] * m.sigma[js] * rho(is, js);
    }
  }
  rho = w * rho + (1.0 - w) * scratch;
}

void apply_damping(Eigen::MatrixXcd& rho, double p, std::size_t q,
                   std::size_t n) {
  if (p <= 0.0) return;
  const std::size_t dim = std::size_t{1} << n;
  const std::size_t s = bit_stride(n, q);
  const double keep = std::sqrt(1.0 - p);
  for (std::size_t i = 0; i < dim; ++i) {
    if (i & s) continue;
    for (std::size_t j = 0; j < dim; ++j) {
      if (j & s) continue;
      const cd r00 = rho(i, j), r01 = rho(i, j | s);
      const cd r10 = rho(i | s, j), r11 = rho(i | s, j | s);
      rho(i, j) = r00 + p * r11;
      rho(i, j | s) = keep * r01;
      rho(i | s, j) = keep * r10;
      rho(i | s, j | s) = (1.0 - p) * r11;
    }
  }
}

void apply_layer_noise(Eigen::MatrixXcd& rho, Eigen::MatrixXcd& scratch,
                       const CliffordLayerSpec& layer, const NoiseSpec& noise,
                       std::size_t n) {
  auto it = noise.layers.find(layer.id());
  if (it != noise.layers.end()) {
    for (const auto& term : it->second.terms) {
      if (term.rate < 0.0)
        throw NumericError("negative Lindblad rate in noise model");
      if (term.rate == 0.0) continue;
      apply_pauli_term(rho, scratch, pauli_masks(term.pauli, n),
                       decay_weight(term.rate));
    }
  }
  for (std::size_t q = 0; q < noise.damping.size() && q < n; ++q)
    apply_damping(rho, noise.damping[q], q, n);
}

Eigen::MatrixXcd evolve(const Circuit& circuit, const NoiseSpec& noise,
                        bool with_noise, const SimOptions& options) {
  if (circuit.n_qubits > options.max_qubits)
    throw ResourceError("circuit exceeds simulator qubit cap");
  const std::size_t n = circuit.n_qubits;
  const std::size_t dim = std::size_t{1} << n;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  rho(0, 0) = 1.0;

  if (!with_noise || noise.trivial() ||
      (noise.layers.empty() && noise.damping.empty())) {
    for (const auto& g : circuit.gates) apply_gate(rho, g, n);
    return rho;
  }

  Eigen::MatrixXcd scratch(dim, dim);
  const DressedCircuit dressed = parse_dressed(circuit);
  for (const auto& layer : dressed.layers) {
    for (const auto& g : layer.singles) apply_gate(rho, g, n);
    if (layer.clifford.empty()) continue;
    for (const auto& g : layer.clifford.gates()) {
      switch (g.kind) {
        case LayerGateKind::CX:
          apply_2q(rho, two_qubit_unitary(GateKind::CX), g.q0, g.q1, n);
          break;
        case LayerGateKind::CZ:
          apply_2q(rho, two_qubit_unitary(GateKind::CZ), g.q0, g.q1, n);
          break;
        default:
          throw UnsupportedGateError("simulator layer gate");
      }
    }
    apply_layer_noise(rho, scratch, layer.clifford, noise, n);
  }
  return rho;
}

std::vector<double> readout_probabilities(const Eigen::MatrixXcd& rho,
                                          const NoiseSpec& noise,
                                          std::size_t n) {
  const std::size_t dim = std::size_t{1} << n;
  std::vector<double> p(dim);
  for (std::size_t i = 0; i < dim; ++i) p[i] = std::max(0.0, rho(i, i).real());
  for (std::size_t q = 0; q < noise.readout.size() && q < n; ++q) {
    const auto& r = noise.readout[q];
    if (r.p01 == 0.0 && r.p10 == 0.0) continue;
    const std::size_t s = bit_stride(n, q);
    for (std::size_t i = 0; i < dim; ++i) {
      if (i & s) continue;
      const double p0 = p[i], p1 = p[i | s];
      p[i] = (1.0 - r.p01) * p0 + r.p10 * p1;
      p[i | s] = r.p01 * p0 + (1.0 - r.p10) * p1;
    }
  }
  double total = 0.0;
  for (double v : p) total += v;
  if (total > 0.0)
    for (double& v : p) v /= total;
  return p;
}

std::string index_to_bitstring(std::size_t index, std::size_t n) {
  std::string s(n, '0');
  for (std::size_t q = 0; q < n; ++q)
    if (index & bit_stride(n, q)) s[q] = '1';
  return s;
}

CountsTable sample_counts(const std::vector<double>& probs, std::int64_t shots,
                          std::size_t n, Rng& rng) {
  std::vector<double> cdf(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    cdf[i] = acc;
  }
  std::map<std::size_t, std::int64_t> sampled;
  for (std::int64_t s = 0; s < shots; ++s) {
    const double u = rng.next_double() * acc;
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    std::size_t idx = static_cast<std::size_t>(it - cdf.begin());
    if (idx >= probs.size()) idx = probs.size() - 1;
    ++sampled[idx];
  }
  CountsTable counts;
  for (const auto& [idx, c] : sampled) counts[index_to_bitstring(idx, n)] = c;
  return counts;
}

}  // namespace

void apply_pauli_channel(Eigen::MatrixXcd& rho, const SparseNoiseModel& model) {
  const auto dim = rho.rows();
  std::size_t n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim || rho.cols() != dim)
    throw DimensionError("apply_pauli_channel: matrix is not 2^n x 2^n");
  Eigen::MatrixXcd scratch(dim, dim);
  for (const auto& term : model.terms) {
    if (term.pauli.n_qubits() != n)
      throw DimensionError("apply_pauli_channel: term size mismatch");
    if (term.rate < 0.0)
      throw NumericError("apply_pauli_channel: negative rate");
    if (term.rate == 0.0) continue;
    apply_pauli_term(rho, scratch, pauli_masks(term.pauli, n),
                     decay_weight(term.rate));
  }
}

double pauli_fidelity(const SparseNoiseModel& model, const PauliString& pauli) {
  double rate_sum = 0.0;
  for (const auto& term : model.terms)
    if (symplectic_product(pauli, term.pauli) == 1) rate_sum += term.rate;
  return std::exp(-2.0 * rate_sum);
}

PauliString pauli_from_ptm_index(std::size_t index, std::size_t n_qubits) {
  static constexpr char kDigits[4] = {'I', 'X', 'Y', 'Z'};
  PauliString p(n_qubits);
  for (std::size_t q = 0; q < n_qubits; ++q) {
    const std::size_t shift = 2 * (n_qubits - 1 - q);
    p.set_letter(q, kDigits[(index >> shift) & 3]);
  }
  return p;
}

std::size_t ptm_index(const PauliString& pauli) {
  std::size_t idx = 0;
  for (std::size_t q = 0; q < pauli.n_qubits(); ++q) {
    std::size_t digit = 0;
    switch (pauli.letter(q)) {
      case 'I': digit = 0; break;
      case 'X': digit = 1; break;
      case 'Y': digit = 2; break;
      case 'Z': digit = 3; break;
    }
    idx = idx * 4 + digit;
  }
  return idx;
}

Eigen::VectorXd ptm_diagonal(const SparseNoiseModel& model,
                             std::size_t n_qubits) {
  const std::size_t total = std::size_t{1} << (2 * n_qubits);
  Eigen::VectorXd diag(total);
  for (std::size_t a = 0; a < total; ++a)
    diag(a) = pauli_fidelity(model, pauli_from_ptm_index(a, n_qubits));
  return diag;
}

std::vector<CountsTable> execute(std::span<const Circuit> circuits,
                                 std::int64_t shots, const NoiseSpec& noise,
                                 std::uint64_t seed,
                                 std::uint64_t counter_base,
                                 const SimOptions& options) {
  if (shots <= 0) throw std::invalid_argument("shots must be positive");
  std::vector<CountsTable> results(circuits.size());

  auto run_one = [&](std::size_t i) {
    const Circuit& c = circuits[i];
    Eigen::MatrixXcd rho = evolve(c, noise, true, options);
    const auto probs = readout_probabilities(rho, noise, c.n_qubits);
    Rng rng(derive_seed(seed, counter_base + i));
    results[i] = sample_counts(probs, shots, c.n_qubits, rng);
  };

  int threads = options.threads;
  if (threads <= 0) {
    const char* env = std::getenv("QEM_THREADS");
    if (env != nullptr) threads = std::atoi(env);
    if (threads <= 0)
      threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
  }
  threads = std::min<int>(threads, static_cast<int>(circuits.size()));

  if (threads <= 1 || circuits.size() < 2) {
    for (std::size_t i = 0; i < circuits.size(); ++i) run_one(i);
    return results;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::atomic<bool> failed{false};
  std::string error_message;
  std::mutex error_mutex;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= circuits.size() || failed.load()) return;
        try {
          run_one(i);
        } catch (const std::exception& e) {
          std::scoped_lock lock(error_mutex);
          failed.store(true);
          if (error_message.empty()) error_message = e.what();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failed.load()) throw ExecutorError("simulation failed: " + error_message);
  return results;
}

Eigen::MatrixXcd evolve_density(const Circuit& circuit, const NoiseSpec& noise,
                                const SimOptions& options) {
  return evolve(circuit, noise, true, options);
}

double noisy_expectation(const Circuit& circuit, const PauliString& observable,
                         const NoiseSpec& noise, const SimOptions& options) {
  if (observable.n_qubits() != circuit.n_qubits)
    throw DimensionError("observable width does not match circuit");
  const Eigen::MatrixXcd rho = evolve(circuit, noise, true, options);
  const std::size_t n = circuit.n_qubits;
  const auto m = pauli_masks(observable, n);
  int ny = 0;
  for (std::size_t q = 0; q < n; ++q)
    if (observable.letter(q) == 'Y') ++ny;
  const cd phase = std::pow(cd(0.0, 1.0), ny);
  cd acc = 0.0;
  const std::size_t dim = std::size_t{1} << n;
  for (std::size_t i = 0; i < dim; ++i) {
    const std::size_t is = i ^ m.xor_mask;
    acc += phase * m.sigma[is] * rho(is, i);
  }
  return acc.real();
}

double noiseless_expectation(const Circuit& circuit,
                             const PauliString& observable,
                             const SimOptions& options) {
  return noisy_expectation(circuit, observable, NoiseSpec{}, options);
}

}  // namespace qem

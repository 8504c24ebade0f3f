#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qem/errors.hpp"
#include "qem/noisy_sim.hpp"
#include "qem/rng.hpp"

using namespace qem;
using Eigen::MatrixXcd;

namespace {

SparseNoiseModel model_from(
    std::initializer_list<std::pair<const char*, double>> terms) {
  SparseNoiseModel m;
  for (const auto& [label, rate] : terms)
    m.terms.push_back({PauliString::from_label(label), rate});
  return m;
}

MatrixXcd plus_state() {
  MatrixXcd rho(2, 2);
  rho << 0.5, 0.5, 0.5, 0.5;
  return rho;
}

SparseNoiseModel random_model(std::size_t n,
                              const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                              double max_rate, Rng& rng) {
  SparseNoiseModel m;
  for (const auto& term : enumerate_model_terms(n, edges))
    m.terms.push_back({term, max_rate * rng.next_double()});
  return m;
}

}  // namespace

TEST_CASE("pauli channel basics") {
  SUBCASE("zero rates leave the state alone") {
    MatrixXcd rho = plus_state();
    apply_pauli_channel(rho, model_from({{"X", 0.0}, {"Z", 0.0}}));
    CHECK((rho - plus_state()).norm() < 1e-15);
  }
  SUBCASE("dephasing shrinks the Bloch x component to e^{-2l}") {
    const double lambda = 0.17;
    MatrixXcd rho = plus_state();
    apply_pauli_channel(rho, model_from({{"Z", lambda}}));
    CHECK(rho(0, 1).real() == doctest::Approx(0.5 * std::exp(-2.0 * lambda)));
    CHECK(std::abs(rho.trace().real() - 1.0) < 1e-14);
  }
  SUBCASE("dimension mismatch") {
    MatrixXcd rho = plus_state();
    auto bad = model_from({{"ZZ", 0.1}});
    CHECK_THROWS_AS(apply_pauli_channel(rho, bad), DimensionError);
  }
}

TEST_CASE("ptm diagonal matches Eq-7 style analytic form and brute force") {
  SUBCASE("single-qubit dephasing") {
    const auto m = model_from({{"Z", 0.05}});
    CHECK(pauli_fidelity(m, PauliString::from_label("X")) ==
          doctest::Approx(std::exp(-0.1)).epsilon(1e-12));
    CHECK(pauli_fidelity(m, PauliString::from_label("Z")) == 1.0);
    CHECK(pauli_fidelity(m, PauliString::from_label("I")) == 1.0);
  }
  SUBCASE("brute-force PTM of the channel is diagonal and matches") {
    Rng rng(41);
    for (std::size_t n = 1; n <= 3; ++n) {
      std::vector<std::pair<std::size_t, std::size_t>> edges;
      for (std::size_t q = 0; q + 1 < n; ++q) edges.push_back({q, q + 1});
      const auto m = random_model(n, edges, 0.1, rng);
      const auto ptm = oracle::channel_ptm(
          [&](const MatrixXcd& rho) {
            MatrixXcd out = rho;
            apply_pauli_channel(out, m);
            return out;
          },
          n);
      const Eigen::VectorXd diag = ptm_diagonal(m, n);
      CHECK((ptm.diagonal() - diag).cwiseAbs().maxCoeff() < 1e-10);
      Eigen::MatrixXd offdiag = ptm;
      offdiag.diagonal().setZero();
      CHECK(offdiag.cwiseAbs().maxCoeff() < 1e-10);
      for (Eigen::Index i = 0; i < diag.size(); ++i) {
        CHECK(diag(i) > 0.0);
        CHECK(diag(i) <= 1.0 + 1e-12);
      }
    }
  }
}

TEST_CASE("execute basic counts") {
  SUBCASE("empty circuit") {
    Circuit c(3);
    const auto counts = execute({&c, 1}, 100, NoiseSpec{}, 1);
    REQUIRE(counts.size() == 1);
    CHECK(counts[0].at("000") == 100);
  }
  SUBCASE("X on qubit 0") {
    Circuit c(3);
    c.add(Gate::x(0));
    const auto counts = execute({&c, 1}, 64, NoiseSpec{}, 1);
    CHECK(counts[0].at("100") == 64);
  }
  SUBCASE("dephasing commutes with Z measurement") {
    Circuit c(2);
    c.add(Gate::x(0)).add(Gate::cx(0, 1));
    NoiseSpec spec;
    SparseNoiseModel m = model_from({{"ZI", 0.3}, {"IZ", 0.2}});
    m.layer_id = parse_dressed(c).layers[0].clifford.id();
    spec.layers[m.layer_id] = m;
    const auto counts = execute({&c, 1}, 500, spec, 7);
    CHECK(counts[0].at("11") == 500);
  }
  SUBCASE("X noise damps the Z expectation") {
    Circuit c(2);
    c.add(Gate::x(0)).add(Gate::cx(0, 1));
    NoiseSpec spec;
    SparseNoiseModel m = model_from({{"XI", 0.2}});
    m.layer_id = parse_dressed(c).layers[0].clifford.id();
    spec.layers[m.layer_id] = m;
    const std::int64_t shots = 20000;
    const auto counts = execute({&c, 1}, shots, spec, 99);
    double z0 = 0.0;
    for (const auto& [bits, cnt] : counts[0])
      z0 += (bits[0] == '1' ? -1.0 : 1.0) * static_cast<double>(cnt);
    z0 /= static_cast<double>(shots);
    const double expected = -std::exp(-0.4);
    const double sigma = std::sqrt((1 - expected * expected) / shots);
    CHECK(std::abs(z0 - expected) < 3 * sigma);
  }
}

TEST_CASE("execute determinism and batching") {
  Rng rng(2);
  std::vector<Circuit> batch;
  for (int i = 0; i < 4; ++i) batch.push_back(oracle::random_circuit(3, 10, rng));
  NoiseSpec spec;
  spec.readout = {{0.02, 0.03}, {0.01, 0.0}, {0.0, 0.05}};

  const auto all = execute(batch, 200, spec, 12345);
  const auto again = execute(batch, 200, spec, 12345);
  CHECK(all == again);

  // splitting the batch with counter_base reproduces per-circuit results
  const auto first_half = execute({batch.data(), 2}, 200, spec, 12345, 0);
  const auto second_half = execute({batch.data() + 2, 2}, 200, spec, 12345, 2);
  CHECK(first_half[0] == all[0]);
  CHECK(first_half[1] == all[1]);
  CHECK(second_half[0] == all[2]);
  CHECK(second_half[1] == all[3]);

  const auto other_seed = execute(batch, 200, spec, 54321);
  CHECK(other_seed != all);
}

TEST_CASE("trace and positivity preserved through noisy evolution") {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const auto c = oracle::random_circuit(3, 14, rng);
    NoiseSpec spec;
    for (const auto& layer :
         distinct_clifford_layers(std::vector<DressedCircuit>{parse_dressed(c)})) {
      auto m = random_model(3, {{0, 1}, {1, 2}}, 0.05, rng);
      m.layer_id = layer.id();
      spec.layers[layer.id()] = m;
    }
    spec.damping = {0.01, 0.02, 0.01};
    const MatrixXcd rho = evolve_density(c, spec);
    CHECK(std::abs(rho.trace().real() - 1.0) < 1e-12);
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho);
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
  }
}

TEST_CASE("exact Pauli twirl diagonalizes an arbitrary channel") {
  // fixed two-qubit CPTP map: partial rotation mixed with damping on qubit 0
  const std::size_t n = 2;
  Circuit rot(n);
  rot.add(Gate::rx(0, 0.7)).add(Gate::ry(1, 0.4)).add(Gate::cz(0, 1));
  const MatrixXcd u = oracle::dense_unitary(rot);
  const double p = 0.08;
  MatrixXcd k0 = MatrixXcd::Identity(4, 4);
  MatrixXcd k1 = MatrixXcd::Zero(4, 4);
  // damping on qubit 0 embedded in the 2-qubit space
  k0(2, 2) = k0(3, 3) = std::sqrt(1 - p);
  k1(0, 2) = std::sqrt(p);
  k1(1, 3) = std::sqrt(p);

  auto channel = [&](const MatrixXcd& rho) {
    MatrixXcd out = u * rho * u.adjoint();
    return oracle::apply_kraus(out, {k0, k1});
  };
  auto twirled = [&](const MatrixXcd& rho) {
    MatrixXcd acc = MatrixXcd::Zero(4, 4);
    for (std::size_t a = 0; a < 16; ++a) {
      const MatrixXcd pa = dense_matrix(pauli_from_ptm_index(a, n));
      acc += pa * channel(pa * rho * pa) * pa;
    }
    return MatrixXcd(acc / 16.0);
  };
  const Eigen::MatrixXd ptm = oracle::channel_ptm(twirled, n);
  Eigen::MatrixXd offdiag = ptm;
  offdiag.diagonal().setZero();
  CHECK(offdiag.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("readout confusion and damping act as specified") {
  SUBCASE("confusion flips bits at the stated rate") {
    Circuit c(1);
    c.add(Gate::x(0));
    NoiseSpec spec;
    spec.readout = {{0.0, 0.1}};
    const std::int64_t shots = 50000;
    const auto counts = execute({&c, 1}, shots, spec, 5);
    const double zero_frac =
        static_cast<double>(counts[0].count("0") ? counts[0].at("0") : 0) / shots;
    CHECK(std::abs(zero_frac - 0.1) < 3 * std::sqrt(0.1 * 0.9 / shots));
  }
  SUBCASE("damping populations after a noisy layer") {
    Circuit c(2);
    c.add(Gate::x(0)).add(Gate::x(1)).add(Gate::cx(0, 1));
    // CX maps |11> -> |10>; damping then acts on that state
    NoiseSpec spec;
    spec.damping = {0.25, 0.25};
    const MatrixXcd rho = evolve_density(c, spec);
    CHECK(rho(2, 2).real() == doctest::Approx(0.75));
    CHECK(rho(0, 0).real() == doctest::Approx(0.25));
  }
}

TEST_CASE("noiseless expectation oracle") {
  Circuit c(1);
  CHECK(noiseless_expectation(c, PauliString::from_label("Z")) ==
        doctest::Approx(1.0));
  c.add(Gate::x(0));
  CHECK(noiseless_expectation(c, PauliString::from_label("Z")) ==
        doctest::Approx(-1.0));

  // cross-check against a dense statevector for a random circuit
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const auto rc = oracle::random_circuit(3, 12, rng);
    const auto obs = pauli_from_ptm_index(1 + rng.next_below(63), 3);
    const Eigen::VectorXcd psi = oracle::dense_unitary(rc).col(0);
    const double expected =
        (psi.adjoint() * dense_matrix(obs) * psi)(0, 0).real();
    CHECK(noiseless_expectation(rc, obs) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("resource cap") {
  Circuit big(11);
  CHECK_THROWS_AS(noiseless_expectation(big, PauliString(11)), ResourceError);
}

#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qem/errors.hpp"
#include "qem/noisy_sim.hpp"
#include "qem/qpd.hpp"
#include "qem/rng.hpp"
#include "qem/serialize.hpp"

using namespace qem;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;

namespace {

// single-qubit depolarizing channel as a Kraus set
std::vector<MatrixXcd> depolarizing_kraus(double p) {
  std::vector<MatrixXcd> kraus;
  kraus.push_back(std::sqrt(1.0 - 0.75 * p) * MatrixXcd::Identity(2, 2));
  for (const char* l : {"X", "Y", "Z"})
    kraus.push_back(std::sqrt(0.25 * p) * dense_matrix(PauliString::from_label(l)));
  return kraus;
}

// noisy Pauli basis: depolarizing noise composed after each Pauli gate
std::vector<Superoperator> noisy_pauli_basis(double p) {
  const Superoperator noise = ptm_from_kraus(depolarizing_kraus(p), "depol");
  std::vector<Superoperator> basis;
  for (const char* l : {"I", "X", "Y", "Z"}) {
    Superoperator s = ptm_from_unitary(dense_matrix(PauliString::from_label(l)), l);
    s.ptm = noise.ptm * s.ptm;
    s.name = std::string("noisy ") + l;
    basis.push_back(std::move(s));
  }
  return basis;
}

double depolarizing_gamma(double p) { return (1.0 + 0.5 * p) / (1.0 - p); }

MatrixXd scaled_map(const QpdRepresentation& rep, const ScaledRep& s) {
  const double gp = rep.gamma_plus, gm = rep.gamma_minus;
  MatrixXd plus = MatrixXd::Zero(rep.basis[0].ptm.rows(), rep.basis[0].ptm.cols());
  MatrixXd minus = plus;
  for (Eigen::Index j = 0; j < rep.eta.size(); ++j) {
    if (rep.eta(j) > 0)
      plus += (rep.eta(j) / gp) * rep.basis[j].ptm;
    else if (rep.eta(j) < 0)
      minus += (-rep.eta(j) / gm) * rep.basis[j].ptm;
  }
  return s.weight_plus * plus + s.weight_minus * minus;
}

}  // namespace

TEST_CASE("ptm conversions") {
  SUBCASE("identity unitary") {
    const auto s = ptm_from_unitary(MatrixXcd::Identity(2, 2));
    CHECK((s.ptm - MatrixXd::Identity(4, 4)).norm() < 1e-12);
  }
  SUBCASE("Z unitary in (I,X,Y,Z) order") {
    const auto s = ptm_from_unitary(dense_matrix(PauliString::from_label("Z")));
    Eigen::Vector4d expected(1, -1, -1, 1);
    CHECK((s.ptm - MatrixXd(expected.asDiagonal())).norm() < 1e-12);
  }
  SUBCASE("depolarizing Kraus set") {
    const auto s = ptm_from_kraus(depolarizing_kraus(0.2), "depol");
    Eigen::Vector4d expected(1, 0.8, 0.8, 0.8);
    CHECK((s.ptm - MatrixXd(expected.asDiagonal())).norm() < 1e-12);
  }
  SUBCASE("composition is matrix product") {
    Rng rng(3);
    const auto c1 = oracle::random_circuit(1, 4, rng);
    const auto c2 = oracle::random_circuit(1, 4, rng);
    const auto s1 = ptm_from_unitary(oracle::dense_unitary(c1));
    const auto s2 = ptm_from_unitary(oracle::dense_unitary(c2));
    Circuit both = c1;
    both.append(c2);
    const auto s12 = ptm_from_unitary(oracle::dense_unitary(both));
    CHECK((s12.ptm - s2.ptm * s1.ptm).norm() < 1e-10);
  }
  SUBCASE("invalid inputs") {
    MatrixXcd not_unitary = 2.0 * MatrixXcd::Identity(2, 2);
    CHECK_THROWS_AS(ptm_from_unitary(not_unitary), std::invalid_argument);
    std::vector<MatrixXcd> bad{0.5 * MatrixXcd::Identity(2, 2)};
    CHECK_THROWS_AS(ptm_from_kraus(bad, ""), std::invalid_argument);
  }
}

TEST_CASE("optimal representation") {
  SUBCASE("target inside the basis costs gamma = 1") {
    auto basis = noisy_pauli_basis(0.1);
    const Superoperator target = basis[1];
    const auto rep = optimal_representation(target, basis);
    CHECK(rep.gamma == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(rep.reconstruction_error < 1e-7);
  }
  SUBCASE("depolarizing inverse matches the closed form") {
    for (double p : {0.05, 0.2, 0.327354260089686}) {
      auto basis = noisy_pauli_basis(p);
      const auto target =
          ptm_from_unitary(dense_matrix(PauliString::from_label("X")), "X");
      const auto rep = optimal_representation(target, basis);
      CHECK(rep.gamma == doctest::Approx(depolarizing_gamma(p)).epsilon(1e-6));
      CHECK(rep.reconstruction_error < 1e-7);
      CHECK(rep.gamma == doctest::Approx(1.0 + 2.0 * rep.gamma_minus).epsilon(1e-6));
    }
  }
  SUBCASE("the 1.73-overhead fixture and its depth-8 cost") {
    const double p = 0.73 / 2.23;  // gamma = 1.73 exactly in the closed form
    auto basis = noisy_pauli_basis(p);
    const auto target =
        ptm_from_unitary(dense_matrix(PauliString::from_label("X")), "X");
    const auto rep = optimal_representation(target, basis);
    CHECK(rep.gamma == doctest::Approx(1.73).epsilon(1e-6));
    CHECK(std::pow(rep.gamma, 8) == doctest::Approx(80.2).epsilon(2e-3));
  }
  SUBCASE("target outside the span is infeasible") {
    std::vector<Superoperator> basis{
        ptm_from_unitary(MatrixXcd::Identity(2, 2), "I")};
    const auto target =
        ptm_from_unitary(dense_matrix(PauliString::from_label("X")), "X");
    CHECK_THROWS_AS(optimal_representation(target, basis), DecompositionError);
  }
}

TEST_CASE("noise scaled representation") {
  const double p = 0.2;
  auto basis = noisy_pauli_basis(p);
  const auto target =
      ptm_from_unitary(dense_matrix(PauliString::from_label("X")), "X");
  const auto rep = optimal_representation(target, basis);

  SUBCASE("xi = 0 reconstructs the target") {
    const auto s = noise_scaled_rep(rep, 0.0);
    CHECK((scaled_map(rep, s) - target.ptm).cwiseAbs().maxCoeff() < 1e-7);
    CHECK(s.gamma_xi == doctest::Approx(rep.gamma).epsilon(1e-7));
  }
  SUBCASE("xi = 1 is the positive component alone") {
    const auto s = noise_scaled_rep(rep, 1.0);
    CHECK(s.weight_minus == doctest::Approx(0.0));
    CHECK(s.gamma_xi == doctest::Approx(1.0).epsilon(1e-7));
  }
  SUBCASE("the scaled map is affine in xi") {
    const auto s0 = noise_scaled_rep(rep, 0.0);
    const auto s1 = noise_scaled_rep(rep, 1.0);
    for (double xi : {0.25, 0.5, 0.8}) {
      const auto s = noise_scaled_rep(rep, xi);
      const MatrixXd expected =
          (1 - xi) * scaled_map(rep, s0) + xi * scaled_map(rep, s1);
      CHECK((scaled_map(rep, s) - expected).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
  SUBCASE("overhead is affine decreasing with gamma(1) = 1") {
    double prev = rep.gamma + 1e-9;
    for (double xi : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const auto s = noise_scaled_rep(rep, xi);
      CHECK(s.gamma_xi == doctest::Approx(rep.gamma - xi * (rep.gamma - 1))
                              .epsilon(1e-7));
      CHECK(s.gamma_xi < prev);
      prev = s.gamma_xi;
    }
  }
  SUBCASE("amplification beyond xi = 1 is a proper mixture") {
    // the one-norm collapses to sum eta = 1 up to the LP box tolerance
    const auto s = noise_scaled_rep(rep, 1.5);
    CHECK(s.weight_minus > 0.0);
    CHECK(s.gamma_xi == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("out-of-range strengths are rejected") {
    CHECK_THROWS_AS(noise_scaled_rep(rep, -0.5), std::invalid_argument);
    const double xi_max = (rep.gamma + 1) / (rep.gamma - 1);
    CHECK_THROWS_AS(noise_scaled_rep(rep, xi_max + 0.1), std::invalid_argument);
  }
}

TEST_CASE("qpd sampling statistics") {
  const double p = 0.25;
  auto basis = noisy_pauli_basis(p);
  const auto target =
      ptm_from_unitary(dense_matrix(PauliString::from_label("X")), "X");
  const auto rep = optimal_representation(target, basis);

  // estimator expectation by exhaustive enumeration of (component, channel)
  auto exact_estimator_mean = [&](double xi, const Eigen::Vector4d& z_values) {
    const auto s = noise_scaled_rep(rep, xi);
    double mean = 0.0;
    for (Eigen::Index j = 0; j < rep.eta.size(); ++j) {
      const double e = rep.eta(j);
      if (e == 0.0) continue;
      const double component_weight =
          e > 0 ? std::abs(s.weight_plus) * (e / rep.gamma_plus)
                : std::abs(s.weight_minus) * (-e / rep.gamma_minus);
      const double sign =
          e > 0 ? 1.0 : (s.weight_minus < 0 ? -1.0 : 1.0);
      const double prob = component_weight / s.gamma_xi;
      mean += prob * sign * s.gamma_xi * z_values(j);
    }
    return mean;
  };

  // <Z> after applying each noisy basis channel to |0>
  Eigen::Vector4d z_after;
  for (int j = 0; j < 4; ++j) {
    // PTM acts on the Pauli vector (1, 0, 0, z)
    Eigen::Vector4d in(1, 0, 0, 1);
    const Eigen::Vector4d out = basis[j].ptm * in;
    z_after(j) = out(3);
  }

  SUBCASE("enumerated mean equals the scaled-map prediction") {
    for (double xi : {0.0, 0.5, 1.0}) {
      const auto s = noise_scaled_rep(rep, xi);
      Eigen::Vector4d in(1, 0, 0, 1);
      const Eigen::Vector4d out = scaled_map(rep, s) * in;
      CHECK(exact_estimator_mean(xi, z_after) ==
            doctest::Approx(out(3)).epsilon(1e-9));
    }
  }
  SUBCASE("mean approaches -1 as xi decreases and sampling agrees") {
    double prev = 0.0;
    bool first = true;
    for (double xi : {1.0, 0.5, 0.0}) {
      const auto s = noise_scaled_rep(rep, xi);
      Rng rng(2024);
      const int samples = 200000;
      double mean = 0.0;
      for (int k = 0; k < samples; ++k) {
        const auto draw = sample_qpd(rep, s, rng);
        mean += draw.sign * draw.weight * z_after(draw.channel);
      }
      mean /= samples;
      const double exact = exact_estimator_mean(xi, z_after);
      CHECK(std::abs(mean - exact) < 3.0 * s.gamma_xi / std::sqrt(samples));
      if (!first) CHECK(exact < prev);
      prev = exact;
      first = false;
    }
  }
  SUBCASE("gamma_minus = 0 always draws the positive component") {
    auto clean = noisy_pauli_basis(0.0);
    const auto rep1 = optimal_representation(
        ptm_from_unitary(dense_matrix(PauliString::from_label("X")), "X"),
        clean);
    CHECK(rep1.gamma_minus == doctest::Approx(0.0).epsilon(1e-9));
    const auto s = noise_scaled_rep(rep1, 0.0);
    Rng rng(5);
    for (int k = 0; k < 100; ++k) {
      const auto draw = sample_qpd(rep1, s, rng);
      CHECK(draw.sign == 1);
    }
  }
}

TEST_CASE("qpd problem file round trip feeds the decomposition") {
  const double p = 0.2;
  QpdProblem problem;
  problem.target =
      ptm_from_unitary(dense_matrix(PauliString::from_label("X")), "X");
  problem.basis = noisy_pauli_basis(p);

  const auto j = qpd_problem_to_json(problem);
  const auto back = qpd_problem_from_json(j);
  REQUIRE(back.basis.size() == 4);
  CHECK(back.basis[1].name == "noisy X");
  CHECK((back.target.ptm - problem.target.ptm).norm() == 0.0);

  const auto rep = optimal_representation(back.target, back.basis);
  CHECK(rep.gamma == doctest::Approx(depolarizing_gamma(p)).epsilon(1e-6));

  CHECK_THROWS_AS(
      qpd_problem_from_json(nlohmann::json{{"n_qubits", 1},
                                           {"basis", nlohmann::json::array()},
                                           {"target", {{1.0}}}}),
      ParseError);
}

#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "qem/errors.hpp"
#include "qem/pauli.hpp"
#include "qem/rng.hpp"

using namespace qem;

namespace {

PauliString random_pauli(std::size_t n, Rng& rng) {
  PauliString p(n);
  static constexpr char kLetters[4] = {'I', 'X', 'Y', 'Z'};
  for (std::size_t q = 0; q < n; ++q)
    p.set_letter(q, kLetters[rng.next_below(4)]);
  return p;
}

}  // namespace

TEST_CASE("pauli label round trip") {
  for (const char* label : {"I", "XYZ", "IZXI", "YYYY"}) {
    const auto p = PauliString::from_label(label);
    CHECK(p.label() == label);
  }
  CHECK_THROWS_AS(PauliString::from_label("XQ"), ParseError);
  CHECK(PauliString::from_label("IXYI").weight() == 2);
  CHECK(PauliString::from_label("IXYI").support() ==
        std::vector<std::size_t>{1, 2});
  CHECK(PauliString(3).is_identity());
}

TEST_CASE("symplectic product basics") {
  const auto x = PauliString::from_label("X");
  const auto z = PauliString::from_label("Z");
  CHECK(symplectic_product(x, x) == 0);
  CHECK(symplectic_product(z, z) == 0);
  CHECK(symplectic_product(x, z) == 1);

  const auto xz = PauliString::from_label("XZ");
  const auto zx = PauliString::from_label("ZX");
  CHECK(symplectic_product(xz, zx) == 0);
  // brute force: the 4x4 commutator of XZ and ZX is zero
  const auto a = dense_matrix(xz);
  const auto b = dense_matrix(zx);
  CHECK((a * b - b * a).norm() < 1e-14);

  CHECK_THROWS_AS(symplectic_product(x, xz), DimensionError);
}

TEST_CASE("symplectic product matches dense commutator on <=3 qubits") {
  for (std::size_t n = 1; n <= 3; ++n) {
    const std::size_t total = std::size_t{1} << (2 * n);
    for (std::size_t ia = 0; ia < total; ++ia) {
      const auto pa = pauli_from_ptm_index(ia, n);
      const auto ma = dense_matrix(pa);
      for (std::size_t ib = 0; ib < total; ++ib) {
        const auto pb = pauli_from_ptm_index(ib, n);
        const auto mb = dense_matrix(pb);
        const bool anticommute = (ma * mb + mb * ma).norm() < 1e-12;
        CHECK(symplectic_product(pa, pb) == (anticommute ? 1 : 0));
        CHECK(symplectic_product(pa, pb) == symplectic_product(pb, pa));
      }
    }
  }
}

TEST_CASE("conjugation by layer") {
  const CliffordLayerSpec cx(2, {LayerGate{LayerGateKind::CX, 0, 1}});
  CHECK(conjugate_by_layer(PauliString::from_label("II"), cx).label() == "II");
  CHECK(conjugate_by_layer(PauliString::from_label("XI"), cx).label() == "XX");
  CHECK(conjugate_by_layer(PauliString::from_label("IZ"), cx).label() == "ZZ");
  CHECK(conjugate_by_layer(PauliString::from_label("IX"), cx).label() == "IX");
  CHECK(conjugate_by_layer(PauliString::from_label("ZI"), cx).label() == "ZI");
}

TEST_CASE("conjugation matches dense oracle on random layers") {
  Rng rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 3;
    std::vector<LayerGate> gates;
    const auto style = rng.next_below(4);
    if (style == 0)
      gates = {LayerGate{LayerGateKind::CX, 0, 1}, LayerGate{LayerGateKind::H, 2}};
    else if (style == 1)
      gates = {LayerGate{LayerGateKind::CZ, 1, 2}};
    else if (style == 2)
      gates = {LayerGate{LayerGateKind::Swap, 0, 2}, LayerGate{LayerGateKind::Z, 1}};
    else
      gates = {LayerGate{LayerGateKind::CX, 2, 0}};
    const CliffordLayerSpec layer(n, gates);
    const auto u = oracle::layer_unitary(layer);

    const auto p = random_pauli(n, rng);
    const auto q = conjugate_by_layer(p, layer);
    const Eigen::MatrixXcd lhs = u * dense_matrix(p) * u.adjoint();
    const int sign = conjugation_sign(p, layer);
    CHECK((lhs - double(sign) * dense_matrix(q)).norm() < 1e-12);

    // involution for self-adjoint layers
    CHECK(conjugate_by_layer(q, layer) == p);

    // commutation preserved
    const auto p2 = random_pauli(n, rng);
    CHECK(symplectic_product(p, p2) ==
          symplectic_product(q, conjugate_by_layer(p2, layer)));
  }
}

TEST_CASE("conjugation sign example CX: YY -> -XZ") {
  const CliffordLayerSpec cx(2, {LayerGate{LayerGateKind::CX, 0, 1}});
  const auto yy = PauliString::from_label("YY");
  CHECK(conjugate_by_layer(yy, cx).label() == "XZ");
  CHECK(conjugation_sign(yy, cx) == -1);
  CHECK(conjugation_sign(PauliString::from_label("XI"), cx) == 1);
}

TEST_CASE("dense matrix forms") {
  CHECK((dense_matrix(PauliString::from_label("I")) -
         Eigen::MatrixXcd::Identity(2, 2))
            .norm() < 1e-15);
  Eigen::MatrixXcd x(2, 2);
  x << 0, 1, 1, 0;
  CHECK((dense_matrix(PauliString::from_label("X")) - x).norm() < 1e-15);

  const auto zz = dense_matrix(PauliString::from_label("ZZ"));
  Eigen::VectorXcd diag(4);
  diag << 1, -1, -1, 1;
  CHECK((zz - Eigen::MatrixXcd(diag.asDiagonal())).norm() < 1e-15);

  const auto m = dense_matrix(PauliString::from_label("XYZ"));
  CHECK((m - m.adjoint()).norm() < 1e-13);
  CHECK((m * m - Eigen::MatrixXcd::Identity(8, 8)).norm() < 1e-13);
  CHECK(std::abs(m.trace()) < 1e-13);

  CHECK_THROWS_AS(dense_matrix(PauliString(7)), ResourceError);
  CHECK_NOTHROW(dense_matrix(PauliString(7), 8));
}

TEST_CASE("model term enumeration") {
  const auto one = enumerate_model_terms(1, {});
  REQUIRE(one.size() == 3);
  CHECK(one[0].label() == "X");
  CHECK(one[1].label() == "Y");
  CHECK(one[2].label() == "Z");

  const auto pair = enumerate_model_terms(2, {{0, 1}});
  CHECK(pair.size() == 15);

  const auto path = enumerate_model_terms(4, {{0, 1}, {1, 2}, {2, 3}});
  CHECK(path.size() == 39);

  // duplicate and reversed edges collapse
  const auto dup = enumerate_model_terms(2, {{0, 1}, {1, 0}, {0, 1}});
  CHECK(dup.size() == 15);

  std::set<std::string> labels;
  for (const auto& t : path) labels.insert(t.label());
  CHECK(labels.size() == path.size());

  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.next_below(5);
    std::set<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t e = 0; e < n; ++e) {
      auto a = rng.next_below(n), b = rng.next_below(n);
      if (a == b) continue;
      edges.insert(std::minmax(a, b));
    }
    std::vector<std::pair<std::size_t, std::size_t>> ev(edges.begin(),
                                                        edges.end());
    CHECK(enumerate_model_terms(n, ev).size() == 3 * n + 9 * ev.size());
  }
}

TEST_CASE("layer validation") {
  CHECK_THROWS_AS(CliffordLayerSpec(2, {LayerGate{LayerGateKind::CX, 0, 1},
                                        LayerGate{LayerGateKind::H, 1}}),
                  ParseError);
  CHECK_THROWS_AS(CliffordLayerSpec(2, {LayerGate{LayerGateKind::CX, 0, 0}}),
                  DimensionError);
  // order-insensitive identity
  const CliffordLayerSpec a(4, {LayerGate{LayerGateKind::CX, 0, 1},
                                LayerGate{LayerGateKind::CZ, 3, 2}});
  const CliffordLayerSpec b(4, {LayerGate{LayerGateKind::CZ, 2, 3},
                                LayerGate{LayerGateKind::CX, 0, 1}});
  CHECK(a.id() == b.id());

  // self-adjointness on dense matrices
  const auto u = oracle::layer_unitary(a);
  CHECK((u * u - Eigen::MatrixXcd::Identity(16, 16)).norm() < 1e-12);
}

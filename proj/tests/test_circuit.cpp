#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "qem/circuit.hpp"
#include "qem/errors.hpp"
#include "qem/rng.hpp"
#include "qem/tfim.hpp"

using namespace qem;

TEST_CASE("dressed parse canonical forms") {
  SUBCASE("single block plus one Clifford layer") {
    Circuit c(2);
    c.add(Gate::rx(0, 0.3)).add(Gate::cx(0, 1));
    const auto d = parse_dressed(c);
    REQUIRE(d.layers.size() == 1);
    CHECK(d.layers[0].singles.size() == 1);
    CHECK(d.layers[0].clifford.gates().size() == 1);
  }
  SUBCASE("no two-qubit gates -> one Clifford-free layer") {
    Circuit c(3);
    c.add(Gate::h(0)).add(Gate::rz(2, 0.1));
    const auto d = parse_dressed(c);
    REQUIRE(d.layers.size() == 1);
    CHECK(d.layers[0].clifford.empty());
    CHECK(d.layers[0].singles.size() == 2);
  }
  SUBCASE("single-qubit gate on untouched qubit defers to the next block") {
    Circuit c(4);
    c.add(Gate::cx(0, 1)).add(Gate::rx(2, 0.5)).add(Gate::cx(2, 3));
    const auto d = parse_dressed(c);
    REQUIRE(d.layers.size() == 2);
    CHECK(d.layers[0].singles.empty());
    CHECK(d.layers[1].singles.size() == 1);
    CHECK(d.layers[1].clifford.gates().size() == 1);
  }
  SUBCASE("deferred single does not block disjoint absorption") {
    Circuit c(6);
    c.add(Gate::cx(0, 1)).add(Gate::rx(2, 0.5)).add(Gate::cx(4, 5));
    const auto d = parse_dressed(c);
    REQUIRE(d.layers.size() == 2);
    CHECK(d.layers[0].clifford.gates().size() == 2);
    CHECK(d.layers[1].singles.size() == 1);
    CHECK(d.layers[1].clifford.empty());
  }
}

TEST_CASE("trotter step parses into the two entangling patterns") {
  const Circuit step = tfim_trotter_step(4, 0.15, 1.0, 0.2);
  const auto d = parse_dressed(step);
  REQUIRE(d.layers.size() == 4);
  CHECK(d.layers[0].singles.size() == 4);  // RX on every qubit
  CHECK(d.layers[0].clifford.gates().size() == 2);
  CHECK(d.layers[1].singles.size() == 2);  // RZ on bond targets
  CHECK(d.layers[1].clifford.gates().size() == 2);
  CHECK(d.layers[0].clifford.id() == d.layers[1].clifford.id());
  CHECK(d.layers[2].clifford.gates().size() == 1);
  CHECK(d.layers[3].clifford.id() == d.layers[2].clifford.id());

  std::vector<DressedCircuit> many;
  for (int reps = 0; reps < 15; ++reps)
    many.push_back(parse_dressed(tfim_trotter_circuit(4, reps + 1, 0.15, 1.0, 0.2)));
  CHECK(distinct_clifford_layers(many).size() == 2);
}

TEST_CASE("distinct clifford layers") {
  CHECK(distinct_clifford_layers({}).empty());

  Circuit a(3);
  a.add(Gate::cx(0, 1));
  Circuit b(3);
  b.add(Gate::rz(0, 0.4)).add(Gate::cx(0, 1)).add(Gate::h(2)).add(Gate::cz(1, 2));
  const std::vector<DressedCircuit> parsed{parse_dressed(a), parse_dressed(b)};
  const auto layers = distinct_clifford_layers(parsed);
  CHECK(layers.size() == 2);
}

TEST_CASE("parse keeps the unitary on random circuits") {
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng.next_below(3);
    const auto c = oracle::random_circuit(n, 12, rng);
    const auto d = parse_dressed(c);
    const auto u_in = oracle::dense_unitary(c);
    const auto u_out = oracle::dense_unitary(d.flatten());
    CHECK(oracle::equal_up_to_phase(u_out, u_in, 1e-10));
  }
}

TEST_CASE("parse is idempotent") {
  Rng rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const auto c = oracle::random_circuit(3, 15, rng);
    const auto d1 = parse_dressed(c);
    const auto d2 = parse_dressed(d1.flatten());
    REQUIRE(d1.layers.size() == d2.layers.size());
    for (std::size_t i = 0; i < d1.layers.size(); ++i) {
      CHECK(d1.layers[i].clifford.id() == d2.layers[i].clifford.id());
      CHECK(d1.layers[i].singles.size() == d2.layers[i].singles.size());
    }
  }
}

TEST_CASE("layer ids collision-free across a random corpus") {
  Rng rng(5);
  std::set<std::uint64_t> ids;
  std::set<std::string> canon;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 8;
    std::vector<LayerGate> gates;
    std::vector<bool> used(n, false);
    const std::size_t count = 1 + rng.next_below(3);
    for (std::size_t g = 0; g < count; ++g) {
      const std::size_t q0 = rng.next_below(n);
      const std::size_t q1 = rng.next_below(n);
      if (q0 == q1 || used[q0] || used[q1]) continue;
      used[q0] = used[q1] = true;
      const auto kind = rng.next_below(2) ? LayerGateKind::CX : LayerGateKind::CZ;
      gates.push_back(LayerGate{kind, q0, q1});
    }
    if (gates.empty()) continue;
    const CliffordLayerSpec layer(n, gates);
    std::string key;
    for (const auto& g : layer.gates())
      key += std::string(layer_gate_name(g.kind)) + std::to_string(g.q0) + "," +
             std::to_string(g.q1) + ";";
    ids.insert(layer.id());
    canon.insert(key);
  }
  CHECK(ids.size() == canon.size());
}

TEST_CASE("gate and register validation") {
  Circuit c(2);
  CHECK_THROWS_AS(c.add(Gate::x(2)), DimensionError);
  CHECK_THROWS_AS(c.add(Gate::cx(0, 0)), DimensionError);
  CHECK_THROWS_AS(c.add(Gate::rx(0, std::nan(""))), ParseError);
}

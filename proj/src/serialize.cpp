#include "qem/serialize.hpp"

#include <fstream>

#include "qem/errors.hpp"

namespace qem {

using nlohmann::json;

json circuit_to_json(const Circuit& circuit) {
  json gates = json::array();
  for (const auto& g : circuit.gates) {
    json jg;
    jg["kind"] = std::string(gate_name(g.kind));
    if (g.two_qubit())
      jg["qubits"] = {g.q0, g.q1};
    else
      jg["qubits"] = {g.q0};
    if (gate_has_angle(g.kind)) jg["angle"] = g.angle;
    gates.push_back(std::move(jg));
  }
  return json{{"n_qubits", circuit.n_qubits}, {"gates", std::move(gates)}};
}

Circuit circuit_from_json(const json& j) {
  if (!j.contains("n_qubits") || !j.contains("gates"))
    throw ParseError("circuit JSON needs n_qubits and gates");
  Circuit c(j.at("n_qubits").get<std::size_t>());
  for (const auto& jg : j.at("gates")) {
    const std::string kind_name = jg.at("kind").get<std::string>();
    const auto kind = gate_kind_from_name(kind_name);
    if (!kind) throw ParseError("unknown gate kind '" + kind_name + "'");
    const auto qubits = jg.at("qubits").get<std::vector<std::size_t>>();
    Gate g;
    g.kind = *kind;
    if (gate_is_two_qubit(*kind)) {
      if (qubits.size() != 2)
        throw ParseError("gate '" + kind_name + "' needs two qubits");
      g.q0 = qubits[0];
      g.q1 = qubits[1];
    } else {
      if (qubits.size() != 1)
        throw ParseError("gate '" + kind_name + "' needs one qubit");
      g.q0 = qubits[0];
    }
    if (gate_has_angle(*kind)) {
      if (!jg.contains("angle"))
        throw ParseError("gate '" + kind_name + "' needs an angle");
      g.angle = jg.at("angle").get<double>();
    }
    c.add(g);
  }
  return c;
}

std::vector<Circuit> circuits_from_json_file(const std::string& path) {
  const json j = read_json_file(path);
  std::vector<Circuit> out;
  if (j.is_array())
    for (const auto& jc : j) out.push_back(circuit_from_json(jc));
  else
    out.push_back(circuit_from_json(j));
  return out;
}

json batch_to_json(std::span<const Circuit> circuits, std::int64_t shots) {
  json arr = json::array();
  for (const auto& c : circuits) arr.push_back(circuit_to_json(c));
  return json{{"shots", shots}, {"circuits", std::move(arr)}};
}

std::vector<CountsTable> counts_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("counts JSON must be an array");
  std::vector<CountsTable> out;
  for (const auto& jc : j) {
    CountsTable t;
    for (auto it = jc.begin(); it != jc.end(); ++it)
      t[it.key()] = it.value().get<std::int64_t>();
    out.push_back(std::move(t));
  }
  return out;
}

json counts_to_json(std::span<const CountsTable> counts) {
  json arr = json::array();
  for (const auto& t : counts) {
    json jc = json::object();
    for (const auto& [bits, c] : t) jc[bits] = c;
    arr.push_back(std::move(jc));
  }
  return arr;
}

namespace {

json layer_gates_to_json(const CliffordLayerSpec& layer) {
  json gates = json::array();
  for (const auto& g : layer.gates()) {
    json jg;
    jg["kind"] = std::string(layer_gate_name(g.kind));
    if (g.two_qubit())
      jg["qubits"] = {g.q0, g.q1};
    else
      jg["qubits"] = {g.q0};
    gates.push_back(std::move(jg));
  }
  return gates;
}

CliffordLayerSpec layer_from_json(const json& jl, std::size_t n_qubits) {
  std::vector<LayerGate> gates;
  for (const auto& jg : jl) {
    const std::string name = jg.at("kind").get<std::string>();
    LayerGateKind kind;
    if (name == "CX" || name == "cx")
      kind = LayerGateKind::CX;
    else if (name == "CZ" || name == "cz")
      kind = LayerGateKind::CZ;
    else if (name == "SWAP" || name == "swap")
      kind = LayerGateKind::Swap;
    else if (name == "H" || name == "h")
      kind = LayerGateKind::H;
    else if (name == "X" || name == "x")
      kind = LayerGateKind::X;
    else if (name == "Y" || name == "y")
      kind = LayerGateKind::Y;
    else if (name == "Z" || name == "z")
      kind = LayerGateKind::Z;
    else
      throw ParseError("unknown layer gate kind '" + name + "'");
    const auto qubits = jg.at("qubits").get<std::vector<std::size_t>>();
    LayerGate g{kind, qubits.at(0), qubits.size() > 1 ? qubits.at(1) : qubits.at(0)};
    gates.push_back(g);
  }
  return CliffordLayerSpec(n_qubits, std::move(gates));
}

}  // namespace

json noise_spec_to_json(const NoiseSpec& spec, std::size_t n_qubits,
                        const std::vector<CliffordLayerSpec>& layers) {
  json jlayers = json::array();
  for (const auto& layer : layers) {
    auto it = spec.layers.find(layer.id());
    if (it == spec.layers.end()) continue;
    json terms = json::array();
    for (const auto& t : it->second.terms)
      terms.push_back({{"pauli", t.pauli.label()}, {"lambda", t.rate}});
    jlayers.push_back(
        {{"gates", layer_gates_to_json(layer)}, {"terms", std::move(terms)}});
  }
  json j{{"n_qubits", n_qubits}, {"layers", std::move(jlayers)}};
  if (!spec.damping.empty()) j["damping"] = spec.damping;
  if (!spec.readout.empty()) {
    json jr = json::array();
    for (const auto& r : spec.readout)
      jr.push_back({{"p01", r.p01}, {"p10", r.p10}});
    j["readout"] = std::move(jr);
  }
  return j;
}

NoiseSpec noise_spec_from_json(const json& j) {
  NoiseSpec spec;
  const auto n_qubits = j.at("n_qubits").get<std::size_t>();
  for (const auto& jl : j.at("layers")) {
    CliffordLayerSpec layer = layer_from_json(jl.at("gates"), n_qubits);
    SparseNoiseModel model;
    model.layer_id = layer.id();
    for (const auto& jt : jl.at("terms")) {
      NoiseTerm t;
      t.pauli = PauliString::from_label(jt.at("pauli").get<std::string>());
      t.rate = jt.at("lambda").get<double>();
      if (t.rate < 0.0) throw ParseError("noise spec rate must be >= 0");
      model.terms.push_back(std::move(t));
    }
    spec.layers[model.layer_id] = std::move(model);
  }
  if (j.contains("damping"))
    spec.damping = j.at("damping").get<std::vector<double>>();
  if (j.contains("readout"))
    for (const auto& jr : j.at("readout"))
      spec.readout.push_back(ReadoutError{jr.at("p01").get<double>(),
                                          jr.at("p10").get<double>()});
  for (double p : spec.damping)
    if (p < 0.0 || p > 1.0) throw ParseError("damping probability outside [0,1]");
  for (const auto& r : spec.readout)
    if (r.p01 < 0.0 || r.p01 > 1.0 || r.p10 < 0.0 || r.p10 > 1.0)
      throw ParseError("readout probability outside [0,1]");
  return spec;
}

NoiseSpec noise_spec_from_file(const std::string& path) {
  return noise_spec_from_json(read_json_file(path));
}

std::string layer_id_hex(std::uint64_t id) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(id));
  return std::string(buf);
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ExecutorError("cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ExecutorError("cannot open '" + path + "'");
  json j;
  in >> j;
  return j;
}

}  // namespace qem

namespace qem {

namespace {

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.size();
  if (rows == 0) throw ParseError("empty PTM matrix");
  const auto cols = j.at(0).size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (j.at(r).size() != cols) throw ParseError("ragged PTM matrix");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

QpdProblem qpd_problem_from_json(const json& j) {
  QpdProblem problem;
  const auto n = j.at("n_qubits").get<std::size_t>();
  const Eigen::Index dim = Eigen::Index{1} << (2 * n);
  problem.target.n_qubits = n;
  problem.target.name = "target";
  problem.target.ptm = matrix_from_json(j.at("target"));
  if (problem.target.ptm.rows() != dim || problem.target.ptm.cols() != dim)
    throw ParseError("target PTM must be 4^n x 4^n");
  for (const auto& jb : j.at("basis")) {
    Superoperator s;
    s.n_qubits = n;
    s.name = jb.value("name", "");
    s.ptm = matrix_from_json(jb.at("ptm"));
    if (s.ptm.rows() != dim || s.ptm.cols() != dim)
      throw ParseError("basis PTM must be 4^n x 4^n");
    problem.basis.push_back(std::move(s));
  }
  if (problem.basis.empty()) throw ParseError("PTM file has no basis channels");
  return problem;
}

json qpd_problem_to_json(const QpdProblem& problem) {
  json basis = json::array();
  for (const auto& b : problem.basis)
    basis.push_back({{"name", b.name}, {"ptm", matrix_to_json(b.ptm)}});
  return json{{"n_qubits", problem.target.n_qubits},
              {"basis", std::move(basis)},
              {"target", matrix_to_json(problem.target.ptm)}};
}

}  // namespace qem

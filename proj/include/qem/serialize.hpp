#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "qem/circuit.hpp"
#include "qem/noisy_sim.hpp"
#include "qem/qpd.hpp"

namespace qem {

// Circuit wire schema:
//   {"n_qubits": int, "gates": [{"kind": str, "qubits": [int], "angle": float?}]}
nlohmann::json circuit_to_json(const Circuit& circuit);
Circuit circuit_from_json(const nlohmann::json& j);

std::vector<Circuit> circuits_from_json_file(const std::string& path);

// Executor file adapter: a batch is {"shots": int, "circuits": [...]},
// counts come back as a JSON array of {bitstring: count} objects.
nlohmann::json batch_to_json(std::span<const Circuit> circuits,
                             std::int64_t shots);
std::vector<CountsTable> counts_from_json(const nlohmann::json& j);
nlohmann::json counts_to_json(std::span<const CountsTable> counts);

// Simulator ground-truth spec. Layers are identified by their gate lists;
// ids are recomputed on load.
//   {"n_qubits": int,
//    "layers": [{"gates": [{"kind": str, "qubits": [int]}],
//                "terms": [{"pauli": str, "lambda": float}]}],
//    "damping": [float per qubit]?,
//    "readout": [{"p01": float, "p10": float} per qubit]?}
nlohmann::json noise_spec_to_json(const NoiseSpec& spec, std::size_t n_qubits,
                                  const std::vector<CliffordLayerSpec>& layers);
NoiseSpec noise_spec_from_json(const nlohmann::json& j);
NoiseSpec noise_spec_from_file(const std::string& path);

std::string layer_id_hex(std::uint64_t id);

// Quasiprobability decomposition problem:
//   {"n_qubits": int, "basis": [{"name": str, "ptm": [[float]]}],
//    "target": [[float]]}
struct QpdProblem {
  Superoperator target;
  std::vector<Superoperator> basis;
};
QpdProblem qpd_problem_from_json(const nlohmann::json& j);
nlohmann::json qpd_problem_to_json(const QpdProblem& problem);

void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

}  // namespace qem

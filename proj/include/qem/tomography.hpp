#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qem/basis.hpp"
#include "qem/circuit.hpp"
#include "qem/executor.hpp"
#include "qem/noisy_sim.hpp"
#include "qem/pauli.hpp"

namespace qem {

// Global measurement bases such that every sparse-model term is diagonal in
// at least one of them. Greedy first-fit sweep in model-term order; on a
// path (or any two-colorable connectivity) this packs into exactly nine
// bases: the three uniform ones plus the six alternating letter patterns.
std::vector<std::string> select_pair_bases(const std::vector<PauliString>& terms,
                                           std::size_t n_qubits);

// One degeneracy-lifting measurement setting: prepare in prep_basis, apply
// the layer once, measure in meas_basis. Each listed member m satisfies
// conj(m) diagonal in prep_basis and m diagonal in meas_basis, so the
// measured expectation is sign(m) * spam * f_m.
struct SingleBasisPlan {
  std::string prep_basis;
  std::string meas_basis;
  std::vector<PauliString> members;
};

// Covers one member of every degenerate fidelity pair {f_a, f_a'} of the
// layer. The count stays small (at most six for a CX layer) independent of
// the register size.
std::vector<SingleBasisPlan> select_single_bases(
    const CliffordLayerSpec& layer, const std::vector<PauliString>& terms);

struct BenchmarkInstance {
  enum class Kind { Pair, Single };
  std::uint64_t layer_id = 0;
  Kind kind = Kind::Pair;
  int depth = 0;                    // layer applications; even for Pair, 1 for Single
  int setting_index = 0;            // pair-basis index or single-plan index
  std::string prep_basis;
  std::string meas_basis;
  std::vector<bool> readout_twirl;  // X inserted before measurement
  Circuit circuit;
};

struct TomographyConfig {
  std::vector<int> depths{2, 4, 8, 16};
  int twirl_samples = 32;
  int single_samples = 200;
  std::uint64_t seed = 0;
};

// Benchmark circuits for one Clifford layer: prep -> [twirl -> layer ->
// conjugated twirl]^depth -> unprep -> readout twirl -> measure.
std::vector<BenchmarkInstance> generate_benchmarks(
    const CliffordLayerSpec& layer, const std::vector<PauliString>& terms,
    const TomographyConfig& config);

// Readout-untwirled expectation of a term diagonal in the measurement basis.
double estimate_expectation(const BenchmarkInstance& instance,
                            const CountsTable& counts, const PauliString& term);

struct DecayFit {
  double amplitude = 1.0;  // SPAM coefficient a
  double rate = 0.0;       // per-application decay b; e^{-b} = sqrt(f_a f_a')
  double rate_std_error = 0.0;
};

// Least squares of mean(depth) = a e^{-b depth} over the positive points:
// log-linear solve, refined by a few Gauss-Newton steps in linear space when
// standard errors are supplied (the log transform alone biases b at deep,
// noisy points). Throws FitError when fewer than two usable points remain.
DecayFit fit_pair_decay(const std::map<int, double>& depth_means,
                        const std::map<int, double>& std_errors = {});

struct DepthStat {
  int depth = 0;
  double mean = 0.0;
  double std_error = 0.0;
  int samples = 0;
};

struct TermRecord {
  PauliString term;
  PauliString partner;          // conj by the layer
  std::vector<DepthStat> pair_stats;
  DecayFit fit;
  double pair_fidelity = 1.0;   // e^{-2b} = f_a * f_a'
  std::optional<double> single_estimate;  // sign-corrected, SPAM-divided
  double single_std_error = 0.0;
  double fidelity = 1.0;        // resolved f_a
  double partner_fidelity = 1.0;
  double fidelity_log_std_error = 0.0;  // sigma of -ln(resolved fidelity)
};

// One b-vector entry with its F1/F2 bookkeeping Paulis. The weight is the
// inverse standard error of -ln(value); zero means unweighted.
struct FidelityRow {
  PauliString f1;
  PauliString f2;
  double value;
  double weight = 0.0;
};

struct NoiseSolveResult {
  SparseNoiseModel model;
  double residual = 0.0;
};

// Solve (M1 + M2) lambda = -ln(b) in the nonnegative least-squares sense,
// where [M1]_rk = <F1_r, P_k>_sp and [M2]_rk = <F2_r, P_k>_sp over the model
// terms P_k.
NoiseSolveResult solve_noise_model(const std::vector<FidelityRow>& rows,
                                   const std::vector<PauliString>& terms,
                                   std::uint64_t layer_id);

struct LayerReport {
  std::uint64_t layer_id = 0;
  CliffordLayerSpec layer;
  std::vector<TermRecord> records;
  std::map<std::string, double> basis_spam;
  std::vector<double> qubit_spam;
  SparseNoiseModel model;
  double solve_residual = 0.0;
  std::vector<std::string> warnings;
};

// Link between tomography and PER: per-layer sparse models plus per-qubit
// SPAM coefficients for readout mitigation.
struct NoiseDataFrame {
  std::map<std::uint64_t, SparseNoiseModel> models;
  std::vector<double> qubit_spam;
};

nlohmann::json noise_dataframe_to_json(const NoiseDataFrame& frame);
NoiseDataFrame noise_dataframe_from_json(const nlohmann::json& j);

struct AnalysisResult {
  NoiseDataFrame frame;
  std::vector<LayerReport> layers;
};

// Orchestrates layer learning for every distinct Clifford layer of the input
// circuits: generate -> run(executor) -> analyze.
class TomographyExperiment {
 public:
  TomographyExperiment(std::span<const Circuit> circuits,
                       std::vector<std::pair<std::size_t, std::size_t>> connectivity,
                       TomographyConfig config);

  void generate();
  const std::vector<BenchmarkInstance>& instances() const { return instances_; }
  const std::vector<CliffordLayerSpec>& layers() const { return layers_; }
  const std::vector<PauliString>& terms() const { return terms_; }

  void run(Executor& executor, std::int64_t shots);
  void set_counts(std::vector<CountsTable> counts);  // external execution path

  AnalysisResult analyze() const;

 private:
  std::size_t n_qubits_ = 0;
  std::vector<PauliString> terms_;
  std::vector<CliffordLayerSpec> layers_;
  std::map<std::uint64_t, std::vector<SingleBasisPlan>> single_plans_;
  std::vector<std::string> pair_bases_;
  TomographyConfig config_;
  std::vector<BenchmarkInstance> instances_;
  std::vector<CountsTable> counts_;
};

}  // namespace qem

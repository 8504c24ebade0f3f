#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qem/basis.hpp"
#include "qem/circuit.hpp"
#include "qem/executor.hpp"
#include "qem/noisy_sim.hpp"
#include "qem/pauli.hpp"
#include "qem/rng.hpp"
#include "qem/tomography.hpp"

namespace qem {

// Partial inverse of a layer's Pauli channel at noise strength xi:
//   w_k^(xi) = (1 + e^{-2|1-xi| l_k})/2,
//   gamma^(xi) = exp[2(1-xi) sum_k l_k] for xi < 1, else 1.
// Sampling the product form inserts P_k with probability 1 - w_k^(xi); for
// xi < 1 every insertion flips the estimator sign.
struct PartialInverseParams {
  double xi = 1.0;
  std::uint64_t layer_id = 0;
  std::vector<PauliString> paulis;
  std::vector<double> insert_probability;
  double gamma = 1.0;
};

PartialInverseParams partial_inverse(const SparseNoiseModel& model, double xi);

struct PerOptions {
  bool pauli_twirl = true;
  bool readout_twirl = true;
};

struct PERInstance {
  std::size_t circuit_index = 0;
  double xi = 1.0;
  double alpha = 1.0;  // +/- prod_l gamma_l^(xi); exactly 1 for xi >= 1
  std::string meas_basis;
  std::vector<bool> readout_twirl;
  Circuit circuit;
};

// Algorithm: per dressed layer, compose the singles, wrap the Clifford part
// in a Pauli twirl, then sample the partial noise inverse and compose the
// sampled Paulis after the layer. Basis change and readout twirl close the
// circuit. Every Clifford layer must have params; a missing layer raises
// CoverageError.
PERInstance sample_per_circuit(
    const DressedCircuit& dressed,
    const std::map<std::uint64_t, PartialInverseParams>& params,
    const std::string& meas_basis, Rng& rng, const PerOptions& options = {});

// Readout-untwirled estimate, divided by the product of per-qubit SPAM
// coefficients on the observable's support, scaled by alpha when xi < 1.
double adjusted_expectation(const PERInstance& instance,
                            const CountsTable& counts,
                            const PauliString& observable,
                            std::span<const double> qubit_spam);

struct MeasurementGroup {
  std::string basis;
  std::vector<PauliString> observables;
};

// Greedy grouping of qubit-wise compatible observables into shared bases.
std::vector<MeasurementGroup> plan_measurements(
    const std::vector<PauliString>& observables);

struct VznePoint {
  double xi = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  int samples = 0;
};

struct VzneFit {
  double amplitude = 0.0;  // zero-noise estimate a
  double rate = 0.0;       // b >= 0
  double amplitude_std_error = 0.0;
  double residual = 0.0;   // weighted RMS misfit
  bool linear_fallback = false;
};

// Weighted fit of mean(xi) = a e^{-b xi}: log-linear when the means share a
// sign, Gauss-Newton refinement otherwise, and a flagged weighted-linear
// extrapolation when the nonlinear path fails to converge.
VzneFit vzne_fit(std::span<const VznePoint> points);

struct ObservableResult {
  PauliString observable;
  std::vector<VznePoint> points;                 // one per noise strength
  std::vector<std::vector<double>> estimates;    // adjusted samples per strength
  VzneFit fit;
};

struct CircuitPerResult {
  std::size_t circuit_index = 0;
  std::vector<ObservableResult> observables;
  double gamma_zero = 1.0;  // product over layers of gamma^(0)
};

struct PerConfig {
  std::vector<double> noise_strengths{0.5, 1.0, 2.0};
  int samples_per_strength = 1000;
  std::uint64_t seed = 0;
  PerOptions options;
};

// Orchestrates PER over a circuit list: instance sampling at each noise
// strength, execution, adjusted estimation, and vZNE per observable.
// Instances are regenerated deterministically one source circuit at a time,
// so only counts and light metadata stay resident.
class PERExperiment {
 public:
  PERExperiment(std::span<const Circuit> circuits,
                std::vector<PauliString> observables,
                const NoiseDataFrame& frame, PerConfig config);

  void generate();

  // The sampled instances of one source circuit, in execution order.
  std::vector<PERInstance> circuit_instances(std::size_t circuit_index) const;

  std::size_t instance_count() const;
  const std::vector<MeasurementGroup>& groups() const { return groups_; }

  void run(Executor& executor, std::int64_t shots);

  std::vector<CircuitPerResult> analyze() const;

 private:
  struct InstanceMeta {
    double xi = 1.0;
    double alpha = 1.0;
    std::vector<bool> readout_twirl;
    std::size_t group = 0;
    std::size_t strength = 0;
  };

  std::vector<DressedCircuit> dressed_;
  std::vector<PauliString> observables_;
  std::vector<MeasurementGroup> groups_;
  NoiseDataFrame frame_;
  PerConfig config_;
  bool generated_ = false;
  std::vector<std::vector<InstanceMeta>> meta_;     // per source circuit
  std::vector<std::vector<CountsTable>> counts_;    // per source circuit
};

}  // namespace qem

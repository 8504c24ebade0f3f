#include "qem/per.hpp"

#include <algorithm>
#include <cmath>

#include "qem/errors.hpp"

namespace qem {

PartialInverseParams partial_inverse(const SparseNoiseModel& model, double xi) {
  if (xi < 0.0) throw std::invalid_argument("noise strength must be >= 0");
  PartialInverseParams params;
  params.xi = xi;
  params.layer_id = model.layer_id;
  const double scale = std::abs(1.0 - xi);
  for (const auto& term : model.terms) {
    if (term.rate < 0.0)
      throw NumericError("partial_inverse: negative model rate");
    params.paulis.push_back(term.pauli);
    const double w = 0.5 * (1.0 + std::exp(-2.0 * scale * term.rate));
    params.insert_probability.push_back(1.0 - w);
  }
  params.gamma =
      xi < 1.0 ? std::exp(2.0 * (1.0 - xi) * model.total_rate()) : 1.0;
  return params;
}

PERInstance sample_per_circuit(
    const DressedCircuit& dressed,
    const std::map<std::uint64_t, PartialInverseParams>& params,
    const std::string& meas_basis, Rng& rng, const PerOptions& options) {
  const std::size_t n = dressed.n_qubits;
  if (meas_basis.size() != n)
    throw DimensionError("measurement basis width mismatch");

  PERInstance inst;
  Circuit c(n);
  double alpha = 1.0;
  int sign = 1;
  double xi = 1.0;

  for (const auto& layer : dressed.layers) {
    for (const auto& g : layer.singles) c.add(g);
    if (layer.clifford.empty()) continue;

    const auto it = params.find(layer.clifford.id());
    if (it == params.end())
      throw CoverageError("no noise model for layer " +
                          std::to_string(layer.clifford.id()));
    const PartialInverseParams& p = it->second;
    xi = p.xi;

    PauliString twirl(n);
    if (options.pauli_twirl) twirl = random_pauli(n, rng);
    append_pauli_gates(c, twirl);
    for (const auto& g : layer.entanglers) c.add(g);
    append_pauli_gates(c, conjugate_by_layer(twirl, layer.clifford));

    PauliString inserted(n);
    for (std::size_t k = 0; k < p.paulis.size(); ++k) {
      if (!rng.bernoulli(p.insert_probability[k])) continue;
      inserted = inserted * p.paulis[k];
      if (p.xi < 1.0) sign = -sign;
    }
    append_pauli_gates(c, inserted);
    alpha *= p.gamma;
  }

  c.append(basis_unprep(meas_basis));
  inst.readout_twirl.assign(n, false);
  if (options.readout_twirl) {
    for (std::size_t q = 0; q < n; ++q) {
      inst.readout_twirl[q] = rng.next_bool();
      if (inst.readout_twirl[q]) c.add(Gate::x(q));
    }
  }

  inst.xi = xi;
  inst.alpha = sign * alpha;
  inst.meas_basis = meas_basis;
  inst.circuit = std::move(c);
  return inst;
}

double adjusted_expectation(const PERInstance& instance,
                            const CountsTable& counts,
                            const PauliString& observable,
                            std::span<const double> qubit_spam) {
  if (!diagonal_in(observable, instance.meas_basis))
    throw BasisError("observable " + observable.label() +
                     " not measurable in basis " + instance.meas_basis);
  const auto support = observable.support();
  double acc = 0.0;
  std::int64_t total = 0;
  for (const auto& [bits, count] : counts) {
    int parity = 0;
    for (std::size_t q : support) {
      bool bit = bits[q] == '1';
      if (instance.readout_twirl[q]) bit = !bit;
      parity ^= bit ? 1 : 0;
    }
    acc += (parity ? -1.0 : 1.0) * static_cast<double>(count);
    total += count;
  }
  if (total == 0) throw ExecutorError("empty counts table");
  double value = acc / static_cast<double>(total);

  for (std::size_t q : support) {
    if (q < qubit_spam.size()) {
      if (qubit_spam[q] <= 0.0)
        throw MitigationError("nonpositive SPAM coefficient for qubit " +
                              std::to_string(q));
      value /= qubit_spam[q];
    }
  }
  if (instance.xi < 1.0) value *= instance.alpha;
  return value;
}

std::vector<MeasurementGroup> plan_measurements(
    const std::vector<PauliString>& observables) {
  if (observables.empty()) return {};
  const std::size_t n = observables[0].n_qubits();
  for (const auto& o : observables)
    if (o.n_qubits() != n)
      throw DimensionError("observables must share one register");

  std::vector<std::string> patterns;  // '?' = unconstrained
  std::vector<MeasurementGroup> groups;
  for (const auto& obs : observables) {
    bool placed = false;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      std::string& pattern = patterns[g];
      bool ok = true;
      for (std::size_t q = 0; q < n && ok; ++q) {
        const char l = obs.letter(q);
        if (l != 'I' && pattern[q] != '?' && pattern[q] != l) ok = false;
      }
      if (!ok) continue;
      for (std::size_t q = 0; q < n; ++q)
        if (obs.letter(q) != 'I') pattern[q] = obs.letter(q);
      groups[g].observables.push_back(obs);
      placed = true;
      break;
    }
    if (!placed) {
      std::string pattern(n, '?');
      for (std::size_t q = 0; q < n; ++q)
        if (obs.letter(q) != 'I') pattern[q] = obs.letter(q);
      patterns.push_back(pattern);
      groups.push_back(MeasurementGroup{{}, {obs}});
    }
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::string basis = patterns[g];
    for (char& ch : basis)
      if (ch == '?') ch = 'Z';
    groups[g].basis = std::move(basis);
  }
  return groups;
}

namespace {

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double intercept_var = 0.0;
};

LinearFit weighted_line(std::span<const double> x, std::span<const double> y,
                        std::span<const double> w) {
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    swx += w[i] * x[i];
    swy += w[i] * y[i];
    swxx += w[i] * x[i] * x[i];
    swxy += w[i] * x[i] * y[i];
  }
  const double denom = sw * swxx - swx * swx;
  LinearFit fit;
  fit.slope = (sw * swxy - swx * swy) / denom;
  fit.intercept = (swy - fit.slope * swx) / sw;
  fit.intercept_var = swxx / denom;
  return fit;
}

}  // namespace

VzneFit vzne_fit(std::span<const VznePoint> points) {
  std::vector<double> xis;
  for (const auto& p : points)
    if (std::find(xis.begin(), xis.end(), p.xi) == xis.end())
      xis.push_back(p.xi);
  if (xis.size() < 2)
    throw std::invalid_argument("vZNE needs at least two noise strengths");

  std::vector<double> weight(points.size());
  bool have_errors = true;
  for (const auto& p : points)
    if (!(p.std_error > 0.0)) have_errors = false;
  for (std::size_t i = 0; i < points.size(); ++i)
    weight[i] = have_errors
                    ? 1.0 / (points[i].std_error * points[i].std_error)
                    : 1.0;

  auto weighted_rms = [&](double a, double b) {
    double acc = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double r = points[i].mean - a * std::exp(-b * points[i].xi);
      acc += weight[i] * r * r;
      wsum += weight[i];
    }
    return std::sqrt(acc / wsum);
  };

  bool all_positive = true, all_negative = true;
  for (const auto& p : points) {
    if (!(p.mean > 0.0)) all_positive = false;
    if (!(p.mean < 0.0)) all_negative = false;
  }

  VzneFit fit;
  if (all_positive || all_negative) {
    // log-linear: ln|m| = ln a - b xi, delta-method weights (m/sigma)^2
    std::vector<double> x, y, w;
    for (std::size_t i = 0; i < points.size(); ++i) {
      x.push_back(points[i].xi);
      y.push_back(std::log(std::abs(points[i].mean)));
      w.push_back(have_errors ? (points[i].mean * points[i].mean) /
                                    (points[i].std_error * points[i].std_error)
                              : 1.0);
    }
    LinearFit line = weighted_line(x, y, w);
    if (line.slope > 0.0) {
      // b >= 0: fall back to the weighted mean at b = 0
      double sw = 0, swy = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        swy += w[i] * y[i];
      }
      line.slope = 0.0;
      line.intercept = swy / sw;
      line.intercept_var = 1.0 / sw;
    }
    const double magnitude = std::exp(line.intercept);
    fit.amplitude = all_negative ? -magnitude : magnitude;
    fit.rate = -line.slope;
    fit.amplitude_std_error = magnitude * std::sqrt(std::max(0.0, line.intercept_var));
    fit.residual = weighted_rms(fit.amplitude, fit.rate);
    return fit;
  }

  // sign-mixed data: Gauss-Newton on (a, b)
  double a = 0.0;
  {
    double best_xi = points[0].xi;
    for (const auto& p : points)
      if (p.xi < best_xi) best_xi = p.xi;
    double acc = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
      if (points[i].xi == best_xi) {
        acc += weight[i] * points[i].mean;
        wsum += weight[i];
      }
    a = wsum > 0 ? acc / wsum : 0.0;
  }
  double b = 0.0;
  bool converged = false;
  for (int iter = 0; iter < 100 && !converged; ++iter) {
    double j11 = 0, j12 = 0, j22 = 0, g1 = 0, g2 = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double e = std::exp(-b * points[i].xi);
      const double r = points[i].mean - a * e;
      const double da = e;
      const double db = -a * points[i].xi * e;
      j11 += weight[i] * da * da;
      j12 += weight[i] * da * db;
      j22 += weight[i] * db * db;
      g1 += weight[i] * da * r;
      g2 += weight[i] * db * r;
    }
    const double det = j11 * j22 - j12 * j12;
    if (std::abs(det) < 1e-14) break;
    const double step_a = (j22 * g1 - j12 * g2) / det;
    const double step_b = (j11 * g2 - j12 * g1) / det;
    a += step_a;
    b += step_b;
    if (b < 0.0) b = 0.0;
    if (std::abs(step_a) < 1e-12 && std::abs(step_b) < 1e-12) converged = true;
  }
  if (converged && std::isfinite(a) && std::isfinite(b)) {
    fit.amplitude = a;
    fit.rate = b;
    double j11 = 0, j12 = 0, j22 = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double e = std::exp(-b * points[i].xi);
      j11 += weight[i] * e * e;
      const double db = -a * points[i].xi * e;
      j12 += weight[i] * e * db;
      j22 += weight[i] * db * db;
    }
    const double det = j11 * j22 - j12 * j12;
    fit.amplitude_std_error =
        det > 0 ? std::sqrt(std::max(0.0, j22 / det)) : 0.0;
    fit.residual = weighted_rms(a, b);
    return fit;
  }

  // flagged fallback: weighted linear extrapolation to xi = 0
  std::vector<double> x, y;
  for (const auto& p : points) {
    x.push_back(p.xi);
    y.push_back(p.mean);
  }
  const LinearFit line = weighted_line(x, y, weight);
  fit.amplitude = line.intercept;
  fit.rate = 0.0;
  fit.amplitude_std_error = std::sqrt(std::max(0.0, line.intercept_var));
  fit.residual = weighted_rms(line.intercept, 0.0);
  fit.linear_fallback = true;
  return fit;
}

PERExperiment::PERExperiment(std::span<const Circuit> circuits,
                             std::vector<PauliString> observables,
                             const NoiseDataFrame& frame, PerConfig config)
    : observables_(std::move(observables)), frame_(frame),
      config_(std::move(config)) {
  if (circuits.empty()) throw std::invalid_argument("no circuits given");
  for (const auto& c : circuits) dressed_.push_back(parse_dressed(c));
  groups_ = plan_measurements(observables_);
  for (double xi : config_.noise_strengths)
    if (xi < 0.0) throw std::invalid_argument("noise strengths must be >= 0");
  if (config_.samples_per_strength <= 0)
    throw std::invalid_argument("samples per strength must be positive");

  // fail early on missing layer models
  for (std::size_t ci = 0; ci < dressed_.size(); ++ci)
    for (const auto& layer : dressed_[ci].layers)
      if (!layer.clifford.empty() &&
          frame_.models.find(layer.clifford.id()) == frame_.models.end())
        throw CoverageError("circuit " + std::to_string(ci) +
                            " uses layer " +
                            std::to_string(layer.clifford.id()) +
                            " absent from the noise model");
}

void PERExperiment::generate() {
  generated_ = true;
  meta_.assign(dressed_.size(), {});
  counts_.assign(dressed_.size(), {});
}

std::vector<PERInstance> PERExperiment::circuit_instances(
    std::size_t circuit_index) const {
  Rng rng(derive_seed(config_.seed, circuit_index));
  std::vector<PERInstance> out;
  for (std::size_t si = 0; si < config_.noise_strengths.size(); ++si) {
    const double xi = config_.noise_strengths[si];
    std::map<std::uint64_t, PartialInverseParams> params;
    for (const auto& [id, model] : frame_.models)
      params[id] = partial_inverse(model, xi);
    for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
      for (int s = 0; s < config_.samples_per_strength; ++s) {
        PERInstance inst = sample_per_circuit(dressed_[circuit_index], params,
                                              groups_[gi].basis, rng,
                                              config_.options);
        inst.circuit_index = circuit_index;
        out.push_back(std::move(inst));
      }
    }
  }
  return out;
}

std::size_t PERExperiment::instance_count() const {
  return dressed_.size() * config_.noise_strengths.size() * groups_.size() *
         static_cast<std::size_t>(config_.samples_per_strength);
}

void PERExperiment::run(Executor& executor, std::int64_t shots) {
  if (!generated_) generate();
  for (std::size_t ci = 0; ci < dressed_.size(); ++ci) {
    auto instances = circuit_instances(ci);
    std::vector<Circuit> circuits;
    circuits.reserve(instances.size());
    for (auto& inst : instances) circuits.push_back(std::move(inst.circuit));
    counts_[ci] = executor.run(circuits, shots);
    meta_[ci].clear();
    std::size_t index = 0;
    for (std::size_t si = 0; si < config_.noise_strengths.size(); ++si)
      for (std::size_t gi = 0; gi < groups_.size(); ++gi)
        for (int s = 0; s < config_.samples_per_strength; ++s, ++index) {
          InstanceMeta m;
          m.xi = instances[index].xi;
          m.alpha = instances[index].alpha;
          m.readout_twirl = instances[index].readout_twirl;
          m.group = gi;
          m.strength = si;
          meta_[ci].push_back(std::move(m));
        }
  }
}

std::vector<CircuitPerResult> PERExperiment::analyze() const {
  for (std::size_t ci = 0; ci < dressed_.size(); ++ci)
    if (counts_.size() != dressed_.size() || counts_[ci].empty())
      throw ExecutorError("PER has not been run");

  std::vector<CircuitPerResult> results;
  for (std::size_t ci = 0; ci < dressed_.size(); ++ci) {
    CircuitPerResult circuit_result;
    circuit_result.circuit_index = ci;
    for (const auto& layer : dressed_[ci].layers)
      if (!layer.clifford.empty())
        circuit_result.gamma_zero *=
            partial_inverse(frame_.models.at(layer.clifford.id()), 0.0).gamma;

    for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
      for (const auto& obs : groups_[gi].observables) {
        ObservableResult obs_result;
        obs_result.observable = obs;
        obs_result.estimates.resize(config_.noise_strengths.size());
        for (std::size_t i = 0; i < meta_[ci].size(); ++i) {
          const InstanceMeta& m = meta_[ci][i];
          if (m.group != gi) continue;
          PERInstance view;
          view.circuit_index = ci;
          view.xi = m.xi;
          view.alpha = m.alpha;
          view.readout_twirl = m.readout_twirl;
          view.meas_basis = groups_[gi].basis;
          obs_result.estimates[m.strength].push_back(adjusted_expectation(
              view, counts_[ci][i], obs, frame_.qubit_spam));
        }
        for (std::size_t si = 0; si < config_.noise_strengths.size(); ++si) {
          const auto& values = obs_result.estimates[si];
          VznePoint point;
          point.xi = config_.noise_strengths[si];
          point.samples = static_cast<int>(values.size());
          double mean = 0.0;
          for (double v : values) mean += v;
          if (!values.empty()) mean /= static_cast<double>(values.size());
          double var = 0.0;
          for (double v : values) var += (v - mean) * (v - mean);
          point.mean = mean;
          point.std_error =
              values.size() > 1
                  ? std::sqrt(var / (values.size() * (values.size() - 1.0)))
                  : 0.0;
          obs_result.points.push_back(point);
        }
        if (obs_result.points.size() >= 2)
          obs_result.fit = vzne_fit(obs_result.points);
        else {
          obs_result.fit.amplitude = obs_result.points[0].mean;
          obs_result.fit.amplitude_std_error = obs_result.points[0].std_error;
          obs_result.fit.linear_fallback = true;
        }
        circuit_result.observables.push_back(std::move(obs_result));
      }
    }
    results.push_back(std::move(circuit_result));
  }
  return results;
}

}  // namespace qem

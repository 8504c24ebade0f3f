#include "qem/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qem/errors.hpp"
#include "qem/nnls.hpp"
#include "qem/rng.hpp"
#include "qem/serialize.hpp"

namespace qem {

namespace {

bool compatible(const PauliString& term, const std::string& pattern) {
  for (std::size_t q = 0; q < term.n_qubits(); ++q) {
    const char l = term.letter(q);
    if (l == 'I') continue;
    if (pattern[q] != '?' && pattern[q] != l) return false;
  }
  return true;
}

void assign(const PauliString& term, std::string& pattern) {
  for (std::size_t q = 0; q < term.n_qubits(); ++q)
    if (term.letter(q) != 'I') pattern[q] = term.letter(q);
}

void fill_unassigned(std::string& pattern) {
  for (char& c : pattern)
    if (c == '?') c = 'Z';
}

}  // namespace

std::vector<std::string> select_pair_bases(const std::vector<PauliString>& terms,
                                           std::size_t n_qubits) {
  std::vector<PauliString> uncovered = terms;
  std::vector<std::string> bases;
  while (!uncovered.empty()) {
    std::string basis(n_qubits, '?');
    std::vector<PauliString> rest;
    for (const auto& term : uncovered) {
      if (compatible(term, basis))
        assign(term, basis);
      else
        rest.push_back(term);
    }
    fill_unassigned(basis);
    bases.push_back(basis);
    uncovered = std::move(rest);
  }
  return bases;
}

std::vector<SingleBasisPlan> select_single_bases(
    const CliffordLayerSpec& layer, const std::vector<PauliString>& terms) {
  // one degenerate pair per model term whose conjugate differs
  struct Pair {
    PauliString a;  // model term
    PauliString b;  // partner (not necessarily a model term)
  };
  std::vector<Pair> pairs;
  std::set<std::string> seen;
  for (const auto& term : terms) {
    const PauliString partner = conjugate_by_layer(term, layer);
    if (partner == term) continue;
    const std::string key = std::min(term.label(), partner.label()) + "|" +
                            std::max(term.label(), partner.label());
    if (seen.insert(key).second) pairs.push_back({term, partner});
  }

  std::vector<SingleBasisPlan> plans;
  std::vector<bool> covered(pairs.size(), false);
  std::size_t remaining = pairs.size();
  while (remaining > 0) {
    const std::size_t n = layer.n_qubits();
    std::string prep(n, '?');
    std::string meas(n, '?');
    SingleBasisPlan plan;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (covered[i]) continue;
      for (const PauliString* m : {&pairs[i].a, &pairs[i].b}) {
        const PauliString other = conjugate_by_layer(*m, layer);
        if (compatible(other, prep) && compatible(*m, meas)) {
          assign(other, prep);
          assign(*m, meas);
          plan.members.push_back(*m);
          covered[i] = true;
          --remaining;
          break;
        }
      }
    }
    fill_unassigned(prep);
    fill_unassigned(meas);
    plan.prep_basis = std::move(prep);
    plan.meas_basis = std::move(meas);
    plans.push_back(std::move(plan));
  }
  return plans;
}

namespace {

Circuit layer_as_circuit(const CliffordLayerSpec& layer) {
  Circuit c(layer.n_qubits());
  for (const auto& g : layer.gates()) {
    switch (g.kind) {
      case LayerGateKind::CX: c.add(Gate::cx(g.q0, g.q1)); break;
      case LayerGateKind::CZ: c.add(Gate::cz(g.q0, g.q1)); break;
      default:
        throw UnsupportedGateError(
            "benchmarking supports CX/CZ Clifford layers only");
    }
  }
  return c;
}

BenchmarkInstance make_instance(const CliffordLayerSpec& layer,
                                BenchmarkInstance::Kind kind, int depth,
                                int setting_index, const std::string& prep,
                                const std::string& meas, Rng& rng) {
  const std::size_t n = layer.n_qubits();
  const Circuit layer_circuit = layer_as_circuit(layer);

  BenchmarkInstance inst;
  inst.layer_id = layer.id();
  inst.kind = kind;
  inst.depth = depth;
  inst.setting_index = setting_index;
  inst.prep_basis = prep;
  inst.meas_basis = meas;

  Circuit c(n);
  c.append(basis_prep(prep));
  for (int rep = 0; rep < depth; ++rep) {
    const PauliString twirl = random_pauli(n, rng);
    append_pauli_gates(c, twirl);
    c.append(layer_circuit);
    append_pauli_gates(c, conjugate_by_layer(twirl, layer));
  }
  c.append(basis_unprep(meas));
  inst.readout_twirl.resize(n);
  for (std::size_t q = 0; q < n; ++q) {
    inst.readout_twirl[q] = rng.next_bool();
    if (inst.readout_twirl[q]) c.add(Gate::x(q));
  }
  inst.circuit = std::move(c);
  return inst;
}

}  // namespace

std::vector<BenchmarkInstance> generate_benchmarks(
    const CliffordLayerSpec& layer, const std::vector<PauliString>& terms,
    const TomographyConfig& config) {
  for (int d : config.depths)
    if (d <= 0 || d % 2 != 0)
      throw std::invalid_argument("pair depths must be positive and even");
  if (config.twirl_samples <= 0 || config.single_samples <= 0)
    throw std::invalid_argument("sample counts must be positive");

  Rng rng(derive_seed(config.seed, layer.id()));
  std::vector<BenchmarkInstance> out;

  const auto pair_bases = select_pair_bases(terms, layer.n_qubits());
  for (std::size_t b = 0; b < pair_bases.size(); ++b)
    for (int depth : config.depths)
      for (int s = 0; s < config.twirl_samples; ++s)
        out.push_back(make_instance(layer, BenchmarkInstance::Kind::Pair, depth,
                                    static_cast<int>(b), pair_bases[b],
                                    pair_bases[b], rng));

  const auto plans = select_single_bases(layer, terms);
  for (std::size_t p = 0; p < plans.size(); ++p)
    for (int s = 0; s < config.single_samples; ++s)
      out.push_back(make_instance(layer, BenchmarkInstance::Kind::Single, 1,
                                  static_cast<int>(p), plans[p].prep_basis,
                                  plans[p].meas_basis, rng));
  return out;
}

double estimate_expectation(const BenchmarkInstance& instance,
                            const CountsTable& counts,
                            const PauliString& term) {
  if (!diagonal_in(term, instance.meas_basis))
    throw BasisError("term " + term.label() + " not measurable in basis " +
                     instance.meas_basis);
  const auto support = term.support();
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
  return acc / static_cast<double>(total);
}

DecayFit fit_pair_decay(const std::map<int, double>& depth_means,
                        const std::map<int, double>& std_errors) {
  struct Point {
    double x, y, w;
  };
  std::vector<Point> points;
  bool weighted = !std_errors.empty();
  for (const auto& [d, m] : depth_means) {
    if (!(m > 0.0)) continue;
    double w = 1.0;
    if (weighted) {
      const auto it = std_errors.find(d);
      if (it == std_errors.end() || !(it->second > 0.0)) {
        weighted = false;
      } else {
        w = (m / it->second) * (m / it->second);
      }
    }
    points.push_back({static_cast<double>(d), std::log(m), w});
  }
  if (points.size() < 2)
    throw FitError("fewer than two positive depth means; cannot fit decay");
  if (!weighted)
    for (auto& p : points) p.w = 1.0;

  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (const auto& p : points) {
    sw += p.w;
    swx += p.w * p.x;
    swy += p.w * p.y;
    swxx += p.w * p.x * p.x;
    swxy += p.w * p.x * p.y;
  }
  const double denom = sw * swxx - swx * swx;
  double slope = (sw * swxy - swx * swy) / denom;
  double intercept = (swy - slope * swx) / sw;
  if (slope > 0.0) {
    slope = 0.0;
    intercept = swy / sw;
  }
  double a = std::min(std::exp(intercept), 1.05);
  double b = -slope;

  // Gauss-Newton refinement against the raw means; the log-linear fit is
  // biased where the relative errors are large (deep depths)
  double rate_var = denom > 0 ? sw / denom : 0.0;
  if (weighted) {
    for (int iter = 0; iter < 50; ++iter) {
      double j11 = 0, j12 = 0, j22 = 0, g1 = 0, g2 = 0;
      for (const auto& [d, m] : depth_means) {
        const auto it = std_errors.find(d);
        if (it == std_errors.end() || !(it->second > 0.0)) continue;
        const double w = 1.0 / (it->second * it->second);
        const double e = std::exp(-b * d);
        const double r = m - a * e;
        const double da = e;
        const double db = -a * d * e;
        j11 += w * da * da;
        j12 += w * da * db;
        j22 += w * db * db;
        g1 += w * da * r;
        g2 += w * db * r;
      }
      const double det = j11 * j22 - j12 * j12;
      if (std::abs(det) < 1e-14) break;
      const double step_a = (j22 * g1 - j12 * g2) / det;
      const double step_b = (j11 * g2 - j12 * g1) / det;
      a = std::min(std::max(a + step_a, 1e-6), 1.05);
      b = std::max(b + step_b, 0.0);
      rate_var = j11 / det;
      if (std::abs(step_a) < 1e-12 && std::abs(step_b) < 1e-12) break;
    }
  }

  DecayFit fit;
  fit.rate = b;
  fit.amplitude = a;
  fit.rate_std_error = rate_var > 0 ? std::sqrt(rate_var) : 0.0;
  return fit;
}

NoiseSolveResult solve_noise_model(const std::vector<FidelityRow>& rows,
                                   const std::vector<PauliString>& terms,
                                   std::uint64_t layer_id) {
  const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index k = static_cast<Eigen::Index>(terms.size());
  Eigen::MatrixXd m(r, k);
  Eigen::VectorXd rhs(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto& row = rows[i];
    if (!(row.value > 0.0))
      throw FitError("nonpositive fidelity entry for " + row.f1.label());
    for (Eigen::Index j = 0; j < k; ++j)
      m(i, j) = symplectic_product(row.f1, terms[j]) +
                symplectic_product(row.f2, terms[j]);
    rhs(i) = -std::log(row.value);
  }
  // inverse-variance row weighting when every row carries an error estimate
  bool weighted = true;
  for (const auto& row : rows)
    if (!(row.weight > 0.0)) weighted = false;
  if (weighted) {
    for (Eigen::Index i = 0; i < r; ++i) {
      m.row(i) *= rows[i].weight;
      rhs(i) *= rows[i].weight;
    }
  }

  const NnlsResult solution = nnls(m, rhs);
  NoiseSolveResult out;
  out.model.layer_id = layer_id;
  for (Eigen::Index j = 0; j < k; ++j)
    out.model.terms.push_back({terms[j], solution.x(j)});
  // residual reported on the unweighted system
  Eigen::VectorXd raw_residual(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    double acc = std::log(rows[i].value);
    for (Eigen::Index j = 0; j < k; ++j)
      acc += (symplectic_product(rows[i].f1, terms[j]) +
              symplectic_product(rows[i].f2, terms[j])) *
             solution.x(j);
    raw_residual(i) = acc;
  }
  out.residual = raw_residual.norm();
  return out;
}

TomographyExperiment::TomographyExperiment(
    std::span<const Circuit> circuits,
    std::vector<std::pair<std::size_t, std::size_t>> connectivity,
    TomographyConfig config)
    : config_(config) {
  if (circuits.empty()) throw std::invalid_argument("no circuits given");
  n_qubits_ = circuits[0].n_qubits;
  for (const auto& c : circuits)
    if (c.n_qubits != n_qubits_)
      throw DimensionError("tomography circuits must share one register");
  terms_ = enumerate_model_terms(n_qubits_, connectivity);
  std::vector<DressedCircuit> parsed;
  for (const auto& c : circuits) parsed.push_back(parse_dressed(c));
  layers_ = distinct_clifford_layers(parsed);
}

void TomographyExperiment::generate() {
  instances_.clear();
  pair_bases_ = select_pair_bases(terms_, n_qubits_);
  for (const auto& layer : layers_) {
    single_plans_[layer.id()] = select_single_bases(layer, terms_);
    auto batch = generate_benchmarks(layer, terms_, config_);
    instances_.insert(instances_.end(),
                      std::make_move_iterator(batch.begin()),
                      std::make_move_iterator(batch.end()));
  }
}

void TomographyExperiment::run(Executor& executor, std::int64_t shots) {
  std::vector<Circuit> circuits;
  circuits.reserve(instances_.size());
  for (const auto& inst : instances_) circuits.push_back(inst.circuit);
  counts_ = executor.run(circuits, shots);
}

void TomographyExperiment::set_counts(std::vector<CountsTable> counts) {
  if (counts.size() != instances_.size())
    throw ExecutorError("counts do not match generated instances");
  counts_ = std::move(counts);
}

namespace {

double geometric_mean_spam(const std::vector<TermRecord>& records,
                           const std::string& basis) {
  double log_sum = 0.0;
  int n = 0;
  for (const auto& rec : records) {
    if (!diagonal_in(rec.term, basis)) continue;
    log_sum += std::log(rec.fit.amplitude);
    ++n;
  }
  return n > 0 ? std::exp(log_sum / n) : 1.0;
}

}  // namespace

AnalysisResult TomographyExperiment::analyze() const {
  if (counts_.size() != instances_.size())
    throw ExecutorError("tomography has not been run");

  AnalysisResult result;
  result.frame.qubit_spam.assign(n_qubits_, 0.0);

  for (const auto& layer : layers_) {
    LayerReport report;
    report.layer_id = layer.id();
    report.layer = layer;

    for (const auto& term : terms_) {
      TermRecord rec;
      rec.term = term;
      rec.partner = conjugate_by_layer(term, layer);
      report.records.push_back(std::move(rec));
    }

    // every member of a degenerate pair plus the fixed model terms; a fixed
    // term observed at depth 1 gives its fidelity directly as an extra
    // single-fidelity entry of the b vector
    std::vector<PauliString> members;
    {
      std::set<std::string> seen;
      for (const auto& term : terms_) {
        const PauliString partner = conjugate_by_layer(term, layer);
        for (const auto& m : {term, partner})
          if (seen.insert(m.label()).second) members.push_back(m);
      }
    }

    // pool pair estimates by depth; pool SPAM-corrected single estimates by
    // member across every plan that happens to measure it
    std::map<std::string, std::map<int, std::vector<double>>> pair_pool;
    std::map<std::string, std::vector<std::pair<double, std::string>>>
        single_pool;  // member -> (sign-corrected estimate, meas basis)
    const auto& plans = single_plans_.at(layer.id());

    for (std::size_t i = 0; i < instances_.size(); ++i) {
      const auto& inst = instances_[i];
      if (inst.layer_id != layer.id()) continue;
      if (inst.kind == BenchmarkInstance::Kind::Pair) {
        for (const auto& term : terms_) {
          if (!diagonal_in(term, inst.prep_basis)) continue;
          pair_pool[term.label()][inst.depth].push_back(
              estimate_expectation(inst, counts_[i], term));
        }
      } else {
        for (const auto& member : members) {
          if (!diagonal_in(member, inst.meas_basis)) continue;
          if (!diagonal_in(conjugate_by_layer(member, layer), inst.prep_basis))
            continue;
          const double raw = estimate_expectation(inst, counts_[i], member);
          const int sign = conjugation_sign(member, layer);
          single_pool[member.label()].push_back({sign * raw, inst.meas_basis});
        }
      }
    }

    // exponential fits per term
    for (auto& rec : report.records) {
      const auto it = pair_pool.find(rec.term.label());
      if (it == pair_pool.end() || it->second.size() < 2)
        throw FitError("term " + rec.term.label() +
                       " lacks pair measurements at two depths");
      std::map<int, double> means;
      std::map<int, double> errors;
      for (const auto& [depth, values] : it->second) {
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        const int n = static_cast<int>(values.size());
        DepthStat stat;
        stat.depth = depth;
        stat.mean = mean;
        stat.std_error = n > 1 ? std::sqrt(var / (n * (n - 1.0))) : 0.0;
        stat.samples = n;
        rec.pair_stats.push_back(stat);
        means[depth] = mean;
        if (stat.std_error > 0.0) errors[depth] = stat.std_error;
      }
      try {
        rec.fit = fit_pair_decay(means, errors);
      } catch (const FitError& e) {
        throw FitError("term " + rec.term.label() + ": " + e.what());
      }
      rec.pair_fidelity = std::exp(-2.0 * rec.fit.rate);
    }

    for (const auto& basis : pair_bases_)
      report.basis_spam[basis] = geometric_mean_spam(report.records, basis);

    // readout-mitigation coefficients: average SPAM of the weight-1 terms
    report.qubit_spam.assign(n_qubits_, 1.0);
    for (std::size_t q = 0; q < n_qubits_; ++q) {
      double acc = 0.0;
      int n = 0;
      for (const auto& rec : report.records) {
        if (rec.term.weight() != 1 || rec.term.support()[0] != q) continue;
        acc += rec.fit.amplitude;
        ++n;
      }
      if (n > 0) report.qubit_spam[q] = acc / n;
    }

    // resolve fidelities; degenerate pairs need a single-depth estimate
    for (auto& rec : report.records) {
      struct SingleEstimate {
        double value;
        double log_std_error;
      };
      auto resolve = [&](const PauliString& member)
          -> std::optional<SingleEstimate> {
        const auto it = single_pool.find(member.label());
        if (it == single_pool.end() || it->second.empty()) return std::nullopt;
        // each contribution is divided by its own plan's SPAM coefficient
        std::map<std::string, double> spam_cache;
        double mean = 0.0;
        std::vector<double> corrected;
        for (const auto& [value, basis] : it->second) {
          auto sit = spam_cache.find(basis);
          if (sit == spam_cache.end())
            sit = spam_cache
                      .emplace(basis,
                               geometric_mean_spam(report.records, basis))
                      .first;
          corrected.push_back(value / sit->second);
          mean += corrected.back();
        }
        const double n = static_cast<double>(corrected.size());
        mean /= n;
        double var = 0.0;
        for (double v : corrected) var += (v - mean) * (v - mean);
        const double std_error = n > 1 ? std::sqrt(var / (n * (n - 1))) : 0.0;
        return SingleEstimate{mean, mean > 0 ? std_error / mean : 0.0};
      };
      auto clamp_member = [&](double value, const PauliString& member) {
        const double lo = rec.pair_fidelity;
        if (value < lo || value > 1.0) {
          report.warnings.push_back(
              "single fidelity for " + member.label() + " = " +
              std::to_string(value) + " clamped to [" + std::to_string(lo) +
              ", 1]; pair constraint f_a f_a' <= 1 enforced");
          value = std::min(1.0, std::max(lo, value));
        }
        return value;
      };
      if (rec.partner == rec.term) {
        rec.fidelity = std::exp(-rec.fit.rate);
        rec.partner_fidelity = rec.fidelity;
        rec.fidelity_log_std_error = rec.fit.rate_std_error;
        // a depth-1 estimate, when a plan happens to measure this fixed
        // term, enters the solve as an extra single-fidelity row
        if (auto direct = resolve(rec.term)) {
          rec.single_estimate = direct->value;
          rec.single_std_error = direct->log_std_error * std::abs(direct->value);
        }
        continue;
      }
      if (auto own = resolve(rec.term)) {
        rec.fidelity = clamp_member(own->value, rec.term);
        rec.single_estimate = own->value;
        rec.single_std_error = own->log_std_error * std::abs(own->value);
        rec.partner_fidelity = rec.pair_fidelity / rec.fidelity;
        rec.fidelity_log_std_error = own->log_std_error;
      } else if (auto other = resolve(rec.partner)) {
        rec.partner_fidelity = clamp_member(other->value, rec.partner);
        rec.single_estimate = other->value;
        rec.single_std_error = other->log_std_error * std::abs(other->value);
        rec.fidelity = rec.pair_fidelity / rec.partner_fidelity;
        // f_a = pair^2 / f_partner propagates both error sources
        rec.fidelity_log_std_error =
            std::sqrt(4.0 * rec.fit.rate_std_error * rec.fit.rate_std_error +
                      other->log_std_error * other->log_std_error);
      } else {
        throw CoverageError("degenerate pair {" + rec.term.label() + ", " +
                            rec.partner.label() +
                            "} has no single-depth measurement");
      }
    }

    std::vector<FidelityRow> rows;
    for (const auto& rec : report.records) {
      FidelityRow pair_row{rec.term, rec.partner, std::exp(-rec.fit.rate)};
      if (rec.fit.rate_std_error > 0)
        pair_row.weight = 1.0 / rec.fit.rate_std_error;
      rows.push_back(std::move(pair_row));
      if (!(rec.partner == rec.term)) {
        FidelityRow single_row{rec.term, rec.term, rec.fidelity};
        if (rec.fidelity_log_std_error > 0)
          single_row.weight = 1.0 / rec.fidelity_log_std_error;
        rows.push_back(std::move(single_row));
      } else if (rec.single_estimate && *rec.single_estimate > 0.0) {
        const double value = std::min(1.0, *rec.single_estimate);
        FidelityRow direct_row{rec.term, rec.term, value};
        if (rec.single_std_error > 0 && *rec.single_estimate > 0)
          direct_row.weight = *rec.single_estimate / rec.single_std_error;
        rows.push_back(std::move(direct_row));
      }
    }
    auto solved = solve_noise_model(rows, terms_, layer.id());
    report.model = std::move(solved.model);
    report.solve_residual = solved.residual;

    result.frame.models[layer.id()] = report.model;
    result.layers.push_back(std::move(report));
  }

  for (std::size_t q = 0; q < n_qubits_; ++q) {
    double acc = 0.0;
    for (const auto& report : result.layers) acc += report.qubit_spam[q];
    result.frame.qubit_spam[q] =
        result.layers.empty() ? 1.0 : acc / result.layers.size();
  }
  return result;
}

nlohmann::json noise_dataframe_to_json(const NoiseDataFrame& frame) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [id, model] : frame.models) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : model.terms)
      terms.push_back({{"pauli", t.pauli.label()}, {"lambda", t.rate}});
    j[layer_id_hex(id)] = {{"terms", std::move(terms)}};
  }
  nlohmann::json spam = nlohmann::json::object();
  for (std::size_t q = 0; q < frame.qubit_spam.size(); ++q)
    spam[std::to_string(q)] = frame.qubit_spam[q];
  j["spam"] = std::move(spam);
  return j;
}

NoiseDataFrame noise_dataframe_from_json(const nlohmann::json& j) {
  NoiseDataFrame frame;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "spam") continue;
    SparseNoiseModel model;
    model.layer_id = std::stoull(it.key(), nullptr, 16);
    for (const auto& jt : it.value().at("terms"))
      model.terms.push_back(
          {PauliString::from_label(jt.at("pauli").get<std::string>()),
           jt.at("lambda").get<double>()});
    frame.models[model.layer_id] = std::move(model);
  }
  if (j.contains("spam")) {
    const auto& spam = j.at("spam");
    frame.qubit_spam.assign(spam.size(), 1.0);
    for (auto it = spam.begin(); it != spam.end(); ++it) {
      const std::size_t q = std::stoul(it.key());
      if (q >= frame.qubit_spam.size()) frame.qubit_spam.resize(q + 1, 1.0);
      frame.qubit_spam[q] = it.value().get<double>();
    }
  }
  return frame;
}

}  // namespace qem

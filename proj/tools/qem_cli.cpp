// Command-line pipeline: sparse Pauli noise tomography, probabilistic error
// reduction with virtual zero-noise extrapolation, the TFIM Trotter demo, and
// quasiprobability overhead tables.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "qem/demo.hpp"
#include "qem/errors.hpp"
#include "qem/executor.hpp"
#include "qem/per.hpp"
#include "qem/serialize.hpp"
#include "qem/tfim.hpp"
#include "qem/tomography.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonOptions {
  std::uint64_t seed = 2024;
  std::int64_t shots = 1024;
  std::string out_dir = "out";
  std::string executor = "sim";
  std::string noise_spec_path;
  std::string connectivity = "auto";
};

void require_file(const std::string& path, const char* what) {
  if (!fs::exists(path))
    throw std::invalid_argument(std::string(what) + " file '" + path +
                                "' does not exist");
}

std::unique_ptr<qem::Executor> make_executor(const CommonOptions& options) {
  if (options.executor == "sim") {
    qem::NoiseSpec spec;
    if (!options.noise_spec_path.empty()) {
      require_file(options.noise_spec_path, "noise spec");
      spec = qem::noise_spec_from_file(options.noise_spec_path);
    }
    return std::make_unique<qem::SimExecutor>(std::move(spec), options.seed);
  }
  if (options.executor.rfind("files:", 0) == 0)
    return std::make_unique<qem::FileExecutor>(options.executor.substr(6));
  throw std::invalid_argument("unknown executor '" + options.executor +
                              "'; use sim or files:<dir>");
}

std::vector<std::pair<std::size_t, std::size_t>> parse_connectivity(
    const std::string& text, const std::vector<qem::Circuit>& circuits) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  if (text == "auto") {
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& c : circuits)
      for (const auto& g : c.gates)
        if (g.two_qubit()) seen.insert(std::minmax(g.q0, g.q1));
    edges.assign(seen.begin(), seen.end());
    return edges;
  }
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto dash = text.find('-', pos);
    if (dash == std::string::npos)
      throw std::invalid_argument("connectivity must look like 0-1,1-2");
    auto comma = text.find(',', dash);
    if (comma == std::string::npos) comma = text.size();
    edges.push_back({std::stoul(text.substr(pos, dash - pos)),
                     std::stoul(text.substr(dash + 1, comma - dash - 1))});
    pos = comma + (comma < text.size() ? 1 : 0);
  }
  return edges;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw qem::ExecutorError("cannot open '" + path + "' for writing");
  out << text;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void write_decay_csv(const std::string& path,
                     const std::vector<qem::LayerReport>& reports) {
  std::string csv =
      "layer_id,term,partner,depth,mean,std_error,samples,fit_amplitude,"
      "fit_rate,pair_fidelity,fidelity,partner_fidelity\n";
  for (const auto& report : reports) {
    for (const auto& rec : report.records) {
      for (const auto& stat : rec.pair_stats) {
        csv += qem::layer_id_hex(report.layer_id) + "," + rec.term.label() +
               "," + rec.partner.label() + "," + std::to_string(stat.depth) +
               "," + format_double(stat.mean) + "," +
               format_double(stat.std_error) + "," +
               std::to_string(stat.samples) + "," +
               format_double(rec.fit.amplitude) + "," +
               format_double(rec.fit.rate) + "," +
               format_double(rec.pair_fidelity) + "," +
               format_double(rec.fidelity) + "," +
               format_double(rec.partner_fidelity) + "\n";
      }
    }
  }
  write_text_file(path, csv);
}

int run_tomo(const CommonOptions& common, const std::string& circuits_path,
             const qem::TomographyConfig& config) {
  require_file(circuits_path, "circuits");
  const auto circuits = qem::circuits_from_json_file(circuits_path);
  const auto edges = parse_connectivity(common.connectivity, circuits);

  qem::TomographyExperiment experiment(circuits, edges, config);
  experiment.generate();
  auto executor = make_executor(common);
  experiment.run(*executor, common.shots);
  const auto analysis = experiment.analyze();

  fs::create_directories(common.out_dir);
  qem::write_json_file((fs::path(common.out_dir) / "noise_model.json").string(),
                       qem::noise_dataframe_to_json(analysis.frame));
  write_decay_csv((fs::path(common.out_dir) / "decays.csv").string(),
                  analysis.layers);
  std::size_t warnings = 0;
  for (const auto& report : analysis.layers) {
    for (const auto& w : report.warnings)
      std::fprintf(stderr, "warning: layer %s: %s\n",
                   qem::layer_id_hex(report.layer_id).c_str(), w.c_str());
    warnings += report.warnings.size();
    std::printf("layer %s: %zu terms, solve residual %.3g\n",
                qem::layer_id_hex(report.layer_id).c_str(),
                report.records.size(), report.solve_residual);
  }
  std::printf("wrote %s and %s (%zu warnings)\n",
              (fs::path(common.out_dir) / "noise_model.json").c_str(),
              (fs::path(common.out_dir) / "decays.csv").c_str(), warnings);
  return 0;
}

int run_per(const CommonOptions& common, const std::string& circuits_path,
            const std::string& model_path, const std::string& observables_text,
            qem::PerConfig config) {
  require_file(circuits_path, "circuits");
  require_file(model_path, "noise model");
  const auto circuits = qem::circuits_from_json_file(circuits_path);
  const auto frame =
      qem::noise_dataframe_from_json(qem::read_json_file(model_path));

  std::vector<qem::PauliString> observables;
  std::size_t pos = 0;
  while (pos < observables_text.size()) {
    auto comma = observables_text.find(',', pos);
    if (comma == std::string::npos) comma = observables_text.size();
    observables.push_back(qem::PauliString::from_label(
        observables_text.substr(pos, comma - pos)));
    pos = comma + (comma < observables_text.size() ? 1 : 0);
  }
  if (observables.empty())
    throw std::invalid_argument("no observables given");

  qem::PERExperiment experiment(circuits, observables, frame, config);
  experiment.generate();
  auto executor = make_executor(common);
  experiment.run(*executor, common.shots);
  const auto results = experiment.analyze();

  fs::create_directories(common.out_dir);
  json jresults;
  jresults["circuits_file"] = circuits_path;
  jresults["noise_model_file"] = model_path;
  json jobs_list = json::array();
  for (const auto& o : observables) jobs_list.push_back(o.label());
  jresults["observables"] = std::move(jobs_list);
  jresults["noise_strengths"] = config.noise_strengths;
  jresults["samples_per_strength"] = config.samples_per_strength;
  jresults["shots"] = common.shots;
  jresults["seed"] = common.seed;
  json jcircuits = json::array();
  std::string csv = "circuit,observable,xi,mean,std_error,samples\n";
  for (const auto& cr : results) {
    json jc;
    jc["circuit"] = cr.circuit_index;
    jc["gamma_zero"] = cr.gamma_zero;
    json jobs = json::array();
    for (const auto& obs : cr.observables) {
      json jo;
      jo["observable"] = obs.observable.label();
      json jpoints = json::array();
      for (const auto& p : obs.points) {
        jpoints.push_back({{"xi", p.xi},
                           {"mean", p.mean},
                           {"std_error", p.std_error},
                           {"samples", p.samples}});
        csv += std::to_string(cr.circuit_index) + "," +
               obs.observable.label() + "," + format_double(p.xi) + "," +
               format_double(p.mean) + "," + format_double(p.std_error) + "," +
               std::to_string(p.samples) + "\n";
      }
      jo["points"] = std::move(jpoints);
      jo["zero_noise"] = obs.fit.amplitude;
      jo["zero_noise_std_error"] = obs.fit.amplitude_std_error;
      jo["fit_rate"] = obs.fit.rate;
      jo["fit_residual"] = obs.fit.residual;
      jo["linear_fallback"] = obs.fit.linear_fallback;
      if (obs.fit.linear_fallback)
        std::fprintf(stderr,
                     "warning: circuit %zu observable %s used the linear "
                     "fallback extrapolation\n",
                     cr.circuit_index, obs.observable.label().c_str());
      jobs.push_back(std::move(jo));
    }
    jc["observables"] = std::move(jobs);
    jcircuits.push_back(std::move(jc));
  }
  jresults["circuits"] = std::move(jcircuits);
  if (config.noise_strengths.size() < 2)
    jresults["note"] =
        "single noise strength: results are twirled estimates without "
        "extrapolation";
  qem::write_json_file((fs::path(common.out_dir) / "results.json").string(),
                       jresults);
  write_text_file((fs::path(common.out_dir) / "vzne.csv").string(), csv);
  std::printf("wrote %s and %s\n",
              (fs::path(common.out_dir) / "results.json").c_str(),
              (fs::path(common.out_dir) / "vzne.csv").c_str());
  return 0;
}

int run_demo(const CommonOptions& common, qem::DemoConfig config) {
  config.seed = common.seed;
  config.shots = common.shots;
  const auto result = qem::run_tfim_demo(config);

  fs::create_directories(common.out_dir);
  std::string csv =
      "step,time,exact,unmitigated,unmitigated_error,mitigated,"
      "mitigated_error\n";
  for (const auto& row : result.trajectory)
    csv += std::to_string(row.step) + "," + format_double(row.time) + "," +
           format_double(row.exact) + "," + format_double(row.unmitigated) +
           "," + format_double(row.unmitigated_error) + "," +
           format_double(row.mitigated) + "," +
           format_double(row.mitigated_error) + "\n";
  write_text_file((fs::path(common.out_dir) / "magnetization.csv").string(),
                  csv);

  std::string scatter = "xi,sample,mz_estimate\n";
  for (std::size_t si = 0; si < result.final_step_scatter.size(); ++si)
    for (std::size_t k = 0; k < result.final_step_scatter[si].size(); ++k)
      scatter += format_double(result.scatter_strengths[si]) + "," +
                 std::to_string(k) + "," +
                 format_double(result.final_step_scatter[si][k]) + "\n";
  write_text_file((fs::path(common.out_dir) / "estimator_scatter.csv").string(),
                  scatter);

  qem::write_json_file(
      (fs::path(common.out_dir) / "planted_noise_spec.json").string(),
      qem::noise_spec_to_json(result.planted, config.n_qubits, result.layers));
  qem::write_json_file(
      (fs::path(common.out_dir) / "learned_noise_model.json").string(),
      qem::noise_dataframe_to_json(result.learned));

  std::printf("planted overheads at %d steps: gamma(0) = %.3g, gamma(0.5) = %.3g\n",
              config.steps, result.planted_gamma_zero,
              result.planted_gamma_half);
  std::printf("learned overheads at %d steps: gamma(0) = %.3g, gamma(0.5) = %.3g\n",
              config.steps, result.learned_gamma_zero,
              result.learned_gamma_half);
  std::printf(
      "sample budget for precision delta: PEC %.0f/delta^2 vs PER %.0f/delta^2\n",
      result.pec_budget, result.per_budget);
  std::printf("wrote magnetization.csv, estimator_scatter.csv, "
              "planted_noise_spec.json, learned_noise_model.json under %s\n",
              common.out_dir.c_str());
  return 0;
}

int run_overhead(double gamma, const std::vector<double>& strengths,
                 int max_depth) {
  if (gamma < 1.0)
    throw std::invalid_argument("overhead requires gamma >= 1");
  std::printf("depth");
  for (double xi : strengths) std::printf(",xi=%g", xi);
  std::printf("\n");
  for (int l = 1; l <= max_depth; ++l) {
    std::printf("%d", l);
    for (double xi : strengths) {
      const double per_layer = xi <= 1.0 ? gamma - xi * (gamma - 1.0) : 1.0;
      std::printf(",%.6g", std::pow(per_layer, l));
    }
    std::printf("\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layer-level Pauli noise tomography and probabilistic error "
               "reduction"};
  app.require_subcommand(1);

  CommonOptions common;
  qem::TomographyConfig tomo_config;
  qem::PerConfig per_config;
  qem::DemoConfig demo_config;

  std::string circuits_path, model_path, observables_text;
  double overhead_gamma = 1.73;
  std::vector<double> overhead_strengths{0.0, 0.5, 0.8, 1.0};
  int overhead_depth = 8;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", common.seed, "master seed");
    cmd->add_option("--shots", common.shots, "shots per circuit");
    cmd->add_option("--out", common.out_dir, "output directory");
    cmd->add_option("--executor", common.executor, "sim or files:<dir>");
    cmd->add_option("--noise-spec", common.noise_spec_path,
                    "simulator ground-truth noise spec (sim executor)");
  };

  auto* tomo = app.add_subcommand("tomo", "learn layer noise models");
  tomo->add_option("circuits", circuits_path, "circuits JSON")->required();
  add_common(tomo);
  tomo->add_option("--samples", tomo_config.twirl_samples,
                   "Pauli-twirl samples per depth");
  tomo->add_option("--single-samples", tomo_config.single_samples,
                   "degeneracy-lifting samples per basis");
  tomo->add_option("--depths", tomo_config.depths, "even benchmark depths");
  tomo->add_option("--connectivity", common.connectivity,
                   "edges like 0-1,1-2 (default: infer from circuits)");

  auto* per = app.add_subcommand("per", "probabilistic error reduction + vZNE");
  per->add_option("circuits", circuits_path, "circuits JSON")->required();
  per->add_option("noise_model", model_path, "noise model JSON")->required();
  per->add_option("--observables", observables_text,
                  "comma-separated Pauli labels")
      ->required();
  add_common(per);
  per->add_option("--noise-strengths", per_config.noise_strengths,
                  "noise strengths xi");
  per->add_option("--per-samples", per_config.samples_per_strength,
                  "PER circuits per strength");

  auto* demo = app.add_subcommand("demo-tfim", "transverse-field Ising demo");
  add_common(demo);
  demo->add_option("--steps", demo_config.steps, "Trotter steps (<= max)");
  demo->add_option("--per-samples", demo_config.per_samples,
                   "PER circuits per strength");
  demo->add_option("--samples", demo_config.twirl_samples,
                   "tomography twirl samples");
  demo->add_option("--single-samples", demo_config.single_samples,
                   "tomography degeneracy samples");
  demo->add_option("--depths", demo_config.depths, "tomography depths");
  demo->add_option("--noise-strengths", demo_config.noise_strengths,
                   "noise strengths xi");
  demo->add_option("--gamma-target", demo_config.gamma_zero_target,
                   "planted full-circuit overhead at xi=0");

  auto* overhead = app.add_subcommand("overhead", "sampling-overhead table");
  overhead->add_option("--gamma", overhead_gamma, "per-layer overhead")
      ->required();
  overhead->add_option("--xi-list", overhead_strengths, "noise strengths");
  overhead->add_option("--depth", overhead_depth, "maximum circuit depth");

  CLI11_PARSE(app, argc, argv);

  try {
    if (tomo->parsed()) {
      tomo_config.seed = common.seed;
      return run_tomo(common, circuits_path, tomo_config);
    }
    if (per->parsed()) {
      per_config.seed = common.seed;
      return run_per(common, circuits_path, model_path, observables_text,
                     per_config);
    }
    if (demo->parsed()) return run_demo(common, demo_config);
    if (overhead->parsed())
      return run_overhead(overhead_gamma, overhead_strengths, overhead_depth);
  } catch (const qem::CoverageError& e) {
    std::fprintf(stderr, "coverage error: %s\n", e.what());
    return 3;
  } catch (const qem::FitError& e) {
    std::fprintf(stderr, "fit error: %s\n", e.what());
    return 3;
  } catch (const qem::MitigationError& e) {
    std::fprintf(stderr, "mitigation error: %s\n", e.what());
    return 3;
  } catch (const qem::NumericError& e) {
    std::fprintf(stderr, "numeric error: %s (residual %.3g)\n", e.what(),
                 e.residual);
    return 3;
  } catch (const qem::DecompositionError& e) {
    std::fprintf(stderr, "decomposition error: %s (residual %.3g)\n", e.what(),
                 e.residual);
    return 3;
  } catch (const qem::ExecutorError& e) {
    std::fprintf(stderr, "executor error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}

// heraldsim: exact herald analysis, efficiency sweeps and Monte Carlo runs
// for `.exp` experiment files.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "heraldsim/analysis.h"
#include "heraldsim/dsl.h"
#include "heraldsim/experiment.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace heraldsim;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct ConfigFailure {
  std::string message;
};

ExperimentConfig load_config(const std::string& path) {
  ExperimentConfig cfg;
  try {
    cfg = parse_experiment_file(path);
  } catch (const ConfigError& e) {
    throw ConfigFailure{fmt::format("{}: {}", path, e.what())};
  }
  const auto diags = validate(cfg);
  for (const auto& d : diags) std::cerr << path << ": " << format_diagnostic(d) << "\n";
  if (has_errors(diags)) throw ConfigFailure{fmt::format("{}: configuration has errors", path)};
  return cfg;
}

std::string hex_digest(const ExperimentConfig& cfg) { return fmt::format("{:016x}", config_digest(cfg)); }

std::optional<double> first_reflectivity(const CircuitSpec& c) {
  for (const auto& e : c.elements) {
    if (const auto* bs = std::get_if<BeamSplitterSpec>(&e)) return bs->R;
  }
  return std::nullopt;
}

CircuitSpec with_reflectivity(CircuitSpec c, double R) {
  for (auto& e : c.elements) {
    if (auto* bs = std::get_if<BeamSplitterSpec>(&e)) {
      bs->R = R;
      bs->T = 1.0 - R;
    }
  }
  return c;
}

DetectionLayout with_trigger_efficiency(DetectionLayout layout, double eta) {
  for (auto& d : layout.detectors) {
    if (std::find(layout.triggers.begin(), layout.triggers.end(), d.id) != layout.triggers.end()) {
      d.coupling = eta;
      d.quantum_efficiency = 1.0;
    }
  }
  return layout;
}

HeraldResult herald_sector(unsigned n, const SourceNoise& noise, const CircuitSpec& circuit,
                           const DetectionLayout& layout) {
  MixedState lossless;
  for (const auto& b : merge_equivalent(noise_branches(n, noise))) {
    lossless.branches.push_back({b.weight, apply_circuit(b.state, circuit), {}});
  }
  return herald(lossless, layout.detectors, layout.triggers, layout.output_modes());
}

json number_or_null(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

std::optional<FourPairCorrection> try_four_pair(const ExperimentConfig& cfg, const CircuitSpec& circuit,
                                                const DetectionLayout& layout) {
  auto params = cfg.source.spdc();
  params.n_max = std::max(params.n_max, 4u);
  try {
    return four_pair_correction(params, circuit, layout, cfg.source.source_noise());
  } catch (const UndefinedEstimate&) {
    return std::nullopt;
  }
}

int cmd_herald(const std::string& path, bool as_json) {
  const auto cfg = load_config(path);
  const auto layout = cfg.layout();
  const auto R = first_reflectivity(cfg.circuit);
  const double eta_t = layout.mean_trigger_efficiency();

  const auto ideal = herald_sector(3, SourceNoise{}, cfg.circuit, layout);
  const auto noisy = herald_sector(3, cfg.source.source_noise(), cfg.circuit, layout);
  const auto fp = try_four_pair(cfg, cfg.circuit, layout);
  std::optional<double> theory;
  if (R) theory = eff_theory(*R, eta_t);
  std::optional<double> eff, eff_noisy, fid;
  if (ideal.heralded()) eff = ideal.preparation_efficiency;
  if (noisy.heralded()) eff_noisy = noisy.preparation_efficiency;
  if (noisy.heralded() && noisy.preparation_efficiency > 0.0) fid = noisy.fidelity_phi_plus();
  const auto& dec = *ideal.decomposition;

  json out;
  out["config"] = path;
  out["digest"] = hex_digest(cfg);
  out["R"] = number_or_null(R);
  out["eta_t"] = eta_t;
  out["herald_probability"] = ideal.herald_probability;
  out["efficiency"] = number_or_null(eff);
  out["efficiency_with_noise"] = number_or_null(eff_noisy);
  out["eff_theory"] = number_or_null(theory);
  out["fidelity_phi_plus"] = number_or_null(fid);
  if (fp) {
    out["four_pair"] = {{"eff3", fp->eff3}, {"eff34", fp->eff34}, {"shift", fp->shift}};
  } else {
    out["four_pair"] = nullptr;
  }
  out["decomposition"] = {{"alpha_sq", dec.alpha_sq}, {"beta_sq", dec.beta_sq}, {"gamma_sq", dec.gamma_sq}};

  if (as_json) {
    std::cout << out.dump(2) << "\n";
    return 0;
  }
  auto show = [](const json& v) { return v.is_null() ? std::string("undefined") : v.dump(); };
  std::cout << fmt::format("config               {}\n", path);
  std::cout << fmt::format("herald probability   {:.6g}\n", ideal.herald_probability);
  std::cout << fmt::format("efficiency (exact)   {}\n", show(out["efficiency"]));
  std::cout << fmt::format("  with source noise  {}\n", show(out["efficiency_with_noise"]));
  std::cout << fmt::format("eff_theory           {}\n", show(out["eff_theory"]));
  std::cout << fmt::format("fidelity to phi+     {}\n", show(out["fidelity_phi_plus"]));
  if (fp) {
    std::cout << fmt::format("four-pair shift      {:+.4f} (eff {:.6g} -> {:.6g})\n", fp->shift, fp->eff3, fp->eff34);
  } else {
    std::cout << "four-pair shift      undefined\n";
  }
  std::cout << fmt::format("alpha^2 beta^2 gamma^2  {:.6g} {:.6g} {:.6g}\n", dec.alpha_sq, dec.beta_sq, dec.gamma_sq);
  return 0;
}

std::string csv_number(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return "nan";
  return fmt::format("{:.10g}", *v);
}

int cmd_sweep(const std::string& path, double from, double to, int steps, std::optional<double> eta_override) {
  if (steps < 2) throw ConfigFailure{"--steps must be >= 2"};
  if (!(from >= 0.0 && from <= 1.0 && to >= 0.0 && to <= 1.0)) throw ConfigFailure{"R range must lie in [0, 1]"};
  if (eta_override && !(*eta_override >= 0.0 && *eta_override <= 1.0)) throw ConfigFailure{"--eta-t outside [0, 1]"};
  const auto cfg = load_config(path);
  auto layout = cfg.layout();
  if (eta_override) layout = with_trigger_efficiency(layout, *eta_override);
  const double eta_t = layout.mean_trigger_efficiency();

  std::cout << "R,eff_theory,eff_exact_enumerated,four_pair_corrected\n";
  for (int i = 0; i < steps; ++i) {
    const double R = from + (to - from) * i / (steps - 1);
    const auto circuit = with_reflectivity(cfg.circuit, R);
    const auto h = herald_sector(3, SourceNoise{}, circuit, layout);
    std::optional<double> exact;
    if (h.heralded()) exact = h.preparation_efficiency;
    std::optional<double> corrected;
    if (auto fp = try_four_pair(cfg, circuit, layout)) corrected = fp->eff34;
    std::cout << fmt::format("{:.10g},{},{},{}\n", R, csv_number(eff_theory(R, eta_t)), csv_number(exact),
                             csv_number(corrected));
  }
  return 0;
}

std::string iso_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", p.string()));
  out << content;
  if (!out) throw std::runtime_error(fmt::format("write failed for {}", p.string()));
}

json record_json(const CountRecord& r) {
  return {{"basis", r.basis.str()},
          {"pulses", r.pulses},
          {"n_t", r.n_t},
          {"n_s", r.n_s},
          {"outcomes",
           {{"00", r.outcomes[0][0]}, {"01", r.outcomes[0][1]}, {"10", r.outcomes[1][0]}, {"11", r.outcomes[1][1]}}},
          {"incomplete", r.incomplete},
          {"ambiguous", r.ambiguous},
          {"dark_assisted_sixfold", r.dark_assisted_sixfold}};
}

struct McOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> pulses;
  unsigned threads = 1;
  std::string out_dir;
  std::string sampler = "auto";
};

int cmd_montecarlo(const std::string& path, const McOptions& opt, const std::vector<std::string>& argv) {
  const std::string started = iso_now();
  auto cfg = load_config(path);
  if (opt.seed) cfg.seed = opt.seed;
  if (opt.pulses) cfg.pulses = opt.pulses;
  if (!cfg.pulses) throw ConfigFailure{"no pulse count: add a pulses line or pass --pulses"};
  if (!cfg.seed) throw ConfigFailure{"no seed: add a seed line or pass --seed"};
  if (cfg.bases.empty()) throw ConfigFailure{"no basis settings to measure"};
  if (opt.threads == 0) throw ConfigFailure{"--threads must be >= 1"};

  RunOptions ro;
  ro.threads = opt.threads;
  try {
    ro.sampler = parse_sampler(opt.sampler);
  } catch (const ConfigError& e) {
    throw ConfigFailure{e.what()};
  }
  ro.progress = [](const std::string& line) { std::cerr << "[montecarlo] " << line << "\n"; };

  OutcomeTables tables;
  try {
    tables = precompute_outcome_tables(cfg);
  } catch (const ConfigError& e) {
    throw ConfigFailure{e.what()};
  }
  const McResult res = run_experiment(cfg, tables, ro);

  fs::path dir = opt.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv("HERALDSIM_OUT");
    dir = env && *env ? env : "heraldsim_out";
  }
  fs::create_directories(dir);

  std::vector<std::string> outputs;
  for (const auto& r : res.records) {
    const std::string name = fmt::format("counts_{}.csv", r.basis.str());
    std::string csv = "basis,pulses,n_t,n_s,n_00,n_01,n_10,n_11,incomplete,ambiguous,dark_assisted_sixfold\n";
    csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.basis.str(), r.pulses, r.n_t, r.n_s, r.outcomes[0][0],
                       r.outcomes[0][1], r.outcomes[1][0], r.outcomes[1][1], r.incomplete, r.ambiguous,
                       r.dark_assisted_sixfold);
    write_file(dir / name, csv);
    outputs.push_back(name);
  }

  const auto layout = cfg.layout();
  json summary;
  summary["config_digest"] = hex_digest(cfg);
  summary["seed"] = *cfg.seed;
  summary["pulses"] = *cfg.pulses;
  summary["duration_s"] = static_cast<double>(*cfg.pulses) / cfg.source.rep_rate;
  summary["sampler"] = std::string(sampler_name(res.sampler));
  json recs = json::array();
  for (const auto& r : res.records) recs.push_back(record_json(r));
  summary["records"] = recs;
  summary["mean_output_efficiency"] = res.mean_output_efficiency;
  if (res.efficiency) {
    summary["eff_exp"] = {{"value", res.efficiency->value}, {"sigma", res.efficiency->sigma}};
  } else {
    summary["eff_exp"] = nullptr;
  }
  const auto R = first_reflectivity(cfg.circuit);
  summary["eff_theory"] = R ? json(eff_theory(*R, layout.mean_trigger_efficiency())) : json(nullptr);
  if (res.fidelity) {
    summary["fidelity"] = {{"value", res.fidelity->value}, {"sigma", res.fidelity->sigma}};
    summary["chsh"] = {{"threshold", chsh_werner_threshold()},
                       {"violates", res.chsh->violates},
                       {"n_sigmas", number_or_null(res.chsh->n_sigmas)}};
  } else {
    summary["fidelity"] = nullptr;
    summary["chsh"] = nullptr;
  }
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  outputs.push_back("summary.json");

  json manifest;
  manifest["command_line"] = argv;
  manifest["config"] = path;
  manifest["config_digest"] = hex_digest(cfg);
  manifest["seed"] = *cfg.seed;
  manifest["pulses"] = *cfg.pulses;
  manifest["threads"] = opt.threads;
  manifest["sampler"] = std::string(sampler_name(res.sampler));
  manifest["tool_version"] = HERALDSIM_VERSION;
  manifest["outputs"] = outputs;
  manifest["started"] = started;
  manifest["finished"] = iso_now();
  manifest["wall_seconds"] = res.wall_seconds;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");

  std::cout << fmt::format("wrote {} files to {}\n", outputs.size() + 1, dir.string());
  if (res.efficiency) {
    std::cout << fmt::format("eff_exp = {:.4f} +- {:.4f}\n", res.efficiency->value, res.efficiency->sigma);
  }
  if (res.fidelity) {
    std::cout << fmt::format("fidelity = {:.4f} +- {:.4f}, CHSH violation {} ({:.1f} sigma)\n", res.fidelity->value,
                             res.fidelity->sigma, res.chsh->violates ? "yes" : "no", res.chsh->n_sigmas);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heralded polarization-entanglement source simulator"};
  app.set_version_flag("--version", std::string(HERALDSIM_VERSION));
  app.require_subcommand(1);

  std::string config;
  bool as_json = false;
  auto* herald_cmd = app.add_subcommand("herald", "Exact herald analysis of the three-pair sector");
  herald_cmd->add_option("config", config, "Experiment file (.exp)")->required();
  herald_cmd->add_flag("--json", as_json, "Print JSON");

  double from = 0.3, to = 0.9;
  int steps = 13;
  std::optional<double> eta_t;
  auto* sweep_cmd = app.add_subcommand("sweep", "Efficiency versus beam-splitter reflectivity (CSV)");
  sweep_cmd->add_option("config", config, "Experiment file (.exp)")->required();
  sweep_cmd->add_option("--from", from, "First R");
  sweep_cmd->add_option("--to", to, "Last R");
  sweep_cmd->add_option("--steps", steps, "Number of rows (>= 2)");
  sweep_cmd->add_option("--eta-t", eta_t, "Override the trigger detection efficiency");

  McOptions mc;
  auto* mc_cmd = app.add_subcommand("montecarlo", "Pulse-level Monte Carlo run");
  mc_cmd->add_option("config", config, "Experiment file (.exp)")->required();
  mc_cmd->add_option("--seed", mc.seed, "Override the seed");
  mc_cmd->add_option("--pulses", mc.pulses, "Override the pulse count per basis");
  mc_cmd->add_option("--threads", mc.threads, "Worker threads (1 = bit-exact reference mode)");
  mc_cmd->add_option("--out", mc.out_dir, "Output directory (default $HERALDSIM_OUT or ./heraldsim_out)");
  mc_cmd->add_option("--sampler", mc.sampler, "auto, per-pulse or aggregate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  std::vector<std::string> args(argv, argv + argc);
  try {
    if (herald_cmd->parsed()) return cmd_herald(config, as_json);
    if (sweep_cmd->parsed()) return cmd_sweep(config, from, to, steps, eta_t);
    if (mc_cmd->parsed()) return cmd_montecarlo(config, mc, args);
  } catch (const ConfigFailure& f) {
    std::cerr << "error: " << f.message << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}

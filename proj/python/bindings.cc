// Python bindings: configuration parsing, closed-form estimators and the
// Monte Carlo driver.

#include <optional>
#include <string>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "heraldsim/analysis.h"
#include "heraldsim/dsl.h"
#include "heraldsim/experiment.h"

namespace py = pybind11;
using namespace heraldsim;

namespace {

py::object estimate_or_none(const std::optional<Estimate>& e) {
  if (!e) return py::none();
  py::dict d;
  d["value"] = e->value;
  d["sigma"] = e->sigma;
  return std::move(d);
}

py::dict record_dict(const CountRecord& r) {
  py::dict d;
  d["basis"] = r.basis.str();
  d["pulses"] = r.pulses;
  d["n_t"] = r.n_t;
  d["n_s"] = r.n_s;
  py::dict outcomes;
  for (unsigned a = 0; a < 2; ++a) {
    for (unsigned b = 0; b < 2; ++b) outcomes[py::str(std::to_string(a) + std::to_string(b))] = r.outcomes[a][b];
  }
  d["outcomes"] = outcomes;
  d["incomplete"] = r.incomplete;
  d["ambiguous"] = r.ambiguous;
  d["dark_assisted_sixfold"] = r.dark_assisted_sixfold;
  return d;
}

py::dict herald_summary(const ExperimentConfig& cfg) {
  const auto layout = cfg.layout();
  MixedState lossless;
  for (const auto& b : merge_equivalent(noise_branches(3, cfg.source.source_noise()))) {
    lossless.branches.push_back({b.weight, apply_circuit(b.state, cfg.circuit), {}});
  }
  const auto r = herald(lossless, layout.detectors, layout.triggers, layout.output_modes());
  py::dict d;
  d["herald_probability"] = r.herald_probability;
  d["efficiency"] = r.heralded() ? py::cast(r.preparation_efficiency) : py::none();
  d["fidelity_phi_plus"] =
      r.heralded() && r.preparation_efficiency > 0.0 ? py::cast(r.fidelity_phi_plus()) : py::none();
  d["eta_t"] = layout.mean_trigger_efficiency();
  return d;
}

py::dict run(const ExperimentConfig& cfg, unsigned threads, const std::string& sampler) {
  RunOptions opt;
  opt.threads = threads;
  opt.sampler = parse_sampler(sampler);
  McResult res;
  {
    py::gil_scoped_release release;
    res = run_experiment(cfg, opt);
  }
  py::dict d;
  py::list records;
  for (const auto& r : res.records) records.append(record_dict(r));
  d["records"] = records;
  d["sampler"] = std::string(sampler_name(res.sampler));
  d["mean_output_efficiency"] = res.mean_output_efficiency;
  d["eff_exp"] = estimate_or_none(res.efficiency);
  d["fidelity"] = estimate_or_none(res.fidelity);
  if (res.chsh) {
    py::dict c;
    c["violates"] = res.chsh->violates;
    c["n_sigmas"] = res.chsh->n_sigmas;
    d["chsh"] = c;
  } else {
    d["chsh"] = py::none();
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_heraldsim, m) {
  m.doc() = "Heralded polarization-entanglement source simulator";
  m.attr("__version__") = HERALDSIM_VERSION;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<UndefinedEstimate>(m, "UndefinedEstimate", PyExc_ArithmeticError);

  py::class_<ExperimentConfig>(m, "Experiment")
      .def_static("parse", [](const std::string& text) { return parse_experiment(text); }, py::arg("text"))
      .def_static("load", [](const std::string& path) { return parse_experiment_file(path); }, py::arg("path"))
      .def("serialize", [](const ExperimentConfig& c) { return serialize(c); })
      .def("digest", [](const ExperimentConfig& c) { return config_digest(c); })
      .def("diagnostics",
           [](const ExperimentConfig& c) {
             std::vector<std::string> out;
             for (const auto& d : validate(c)) out.push_back(format_diagnostic(d));
             return out;
           })
      .def_property_readonly("pulses", [](const ExperimentConfig& c) { return c.pulses; })
      .def_property_readonly("seed", [](const ExperimentConfig& c) { return c.seed; })
      .def("herald", &herald_summary)
      .def("run", &run, py::arg("threads") = 1, py::arg("sampler") = "auto")
      .def("__eq__", [](const ExperimentConfig& a, const ExperimentConfig& b) { return a == b; });

  m.def("eff_theory", &eff_theory, py::arg("R"), py::arg("eta_t"));
  m.def("eff_exp", [](std::uint64_t n_s, std::uint64_t n_t, double eta_s) {
    const auto e = eff_exp(n_s, n_t, eta_s);
    return py::make_tuple(e.value, e.sigma);
  }, py::arg("n_s"), py::arg("n_t"), py::arg("eta_s"));
  m.def("pair_probability", &pair_probability, py::arg("n"), py::arg("r"));
  m.def("coupling_from_rate", &coupling_from_rate, py::arg("p1"));
  m.def("chsh_werner_threshold", &chsh_werner_threshold);
  m.def("dark_count_ratio", &dark_count_ratio, py::arg("n_d"), py::arg("window"), py::arg("eta"));
}

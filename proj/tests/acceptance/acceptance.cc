// Acceptance checks: one PASS/FAIL line per criterion.
//
// Usage: heraldsim_acceptance [--expect-fail 3,7]
// Exit status is 0 when the failing criteria are exactly the expected ones.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "heraldsim/analysis.h"
#include "heraldsim/dsl.h"
#include "heraldsim/experiment.h"

using namespace heraldsim;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fixture(const std::string& name) { return std::string(HERALDSIM_FIXTURES) + "/" + name; }

const char* const kSplitFixtures[] = {"split_5050.exp", "split_6040.exp", "split_7030.exp"};

MixedState circuit_output(const PureState& input, const CircuitSpec& circuit) {
  return MixedState::from_pure(apply_circuit(input, circuit));
}

// 1. Ideal number-resolving herald on three pairs.
Outcome ideal_herald() {
  const auto t0 = Clock::now();
  const auto layout = standard_layout(1.0, 1.0, 0.0, 0.0, DetectorKind::number_resolving);
  const auto psi3 = n_pair_state(3);
  double worst_f = 0.0, worst_p = 0.0;
  for (double R : {0.3, 0.486, 0.57, 0.685}) {
    const double T = 1.0 - R;
    const auto h = herald(circuit_output(psi3, heralding_circuit(R)), layout.detectors, layout.triggers,
                          layout.output_modes());
    worst_f = std::max(worst_f, std::abs(h.fidelity_phi_plus() - 1.0));
    worst_p = std::max(worst_p, std::abs(h.herald_probability - std::pow(T, 4) * R * R / 2.0));
  }
  const double dt = seconds_since(t0);
  return {worst_f <= 1e-12 && worst_p <= 1e-12 && dt < 10.0,
          fmt::format("max |F-1| = {:.1e}, max |P - T^4 R^2/2| = {:.1e}, {:.2f} s", worst_f, worst_p, dt)};
}

// 2. Enumerated threshold-trigger efficiency against the closed form.
Outcome closed_form_grid() {
  const auto t0 = Clock::now();
  const auto psi3 = n_pair_state(3);
  double worst = 0.0;
  for (double R : {0.3, 0.4, 0.5, 0.6, 0.7}) {
    const auto out = circuit_output(psi3, heralding_circuit(R));
    for (double eta : {0.1, 0.325, 0.55, 0.775, 1.0}) {
      const auto layout = standard_layout(eta, 1.0);
      const auto h = herald(out, layout.detectors, layout.triggers, layout.output_modes());
      const double T = 1.0 - R;
      const double oracle = R * R / ((1.0 - eta * T / 2.0) * (1.0 - eta * T / 2.0));
      worst = std::max(worst, std::abs(h.preparation_efficiency - oracle));
    }
  }
  const double dt = seconds_since(t0);
  return {worst <= 1e-10 && dt < 60.0, fmt::format("5x5 grid, max deviation {:.1e}, {:.2f} s", worst, dt)};
}

// 3. Curve points and efficiencies from the published counts.
Outcome reference_points() {
  struct Point {
    std::string label;
    double value, target;
  };
  const std::vector<Point> pts{
      {"eff_theory(0.486)", eff_theory(0.486, 0.1823), 0.2595},
      {"eff_theory(0.570)", eff_theory(0.570, 0.1823), 0.336},
      {"eff_theory(0.685)", eff_theory(0.685, 0.1823), 0.492},
      {"eff_exp(37,9710)", eff_exp(37, 9710, 0.129).value, 0.229},
      {"eff_exp(14,1347)", eff_exp(14, 1347, 0.15).value, 0.462},
  };
  bool pass = true;
  std::string detail;
  for (const auto& p : pts) {
    const bool ok = std::abs(p.value - p.target) <= 1e-3;
    pass = pass && ok;
    detail += fmt::format("{}{} = {:.4f} (target {}{})", detail.empty() ? "" : ", ", p.label, p.value, p.target,
                          ok ? "" : ", off");
  }
  return {pass, detail};
}

// 4. Multi-pair emission probabilities at p1 = 0.047.
Outcome pair_statistics() {
  const double r = coupling_from_rate(0.047);
  const double p3 = pair_probability(3, r), p4 = pair_probability(4, r);
  const bool pass = p3 >= 5.5e-5 && p3 <= 5.9e-5 && p4 >= 1.6e-6 && p4 <= 1.9e-6 && p3 / p4 >= 31 && p3 / p4 <= 35;
  return {pass, fmt::format("p3 = {:.3e}, p4 = {:.3e}, p3/p4 = {:.2f}", p3, p4, p3 / p4)};
}

// 5. Four-pair efficiency shift, averaged over the three published configurations.
Outcome four_pair_shift() {
  double sum = 0.0;
  std::string per;
  for (const char* name : kSplitFixtures) {
    const auto cfg = parse_experiment_file(fixture(name));
    const auto c = four_pair_correction(cfg.source.spdc(), cfg.circuit, cfg.layout(), cfg.source.source_noise());
    sum += std::abs(c.shift);
    per += fmt::format("{}{:+.2f}%", per.empty() ? "" : " ", 100 * c.shift);
  }
  const double mean = sum / 3.0;
  return {mean >= 0.03 && mean <= 0.06, fmt::format("mean |shift| = {:.2f}% (per configuration {})", 100 * mean, per)};
}

// 6. Largest herald probability over T.
Outcome herald_maximum() {
  auto f = [](double T) { return std::pow(T, 4) * (1 - T) * (1 - T) / 2.0; };
  // Golden-section search on [0, 1].
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = 1.0;
  while (b - a > 1e-12) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    (f(c) > f(d) ? b : a) = (f(c) > f(d) ? d : c);
  }
  const double T = 0.5 * (a + b);
  const auto layout = standard_layout(1.0, 1.0, 0.0, 0.0, DetectorKind::number_resolving);
  const double enumerated = herald(circuit_output(n_pair_state(3), heralding_circuit(1.0 - T)), layout.detectors,
                                   layout.triggers, layout.output_modes())
                                .herald_probability;
  const bool pass = std::abs(T - 2.0 / 3.0) < 1e-6 && std::abs(f(T) - 0.01097) <= 5e-4 &&
                    std::abs(enumerated - f(T)) < 1e-12;
  return {pass, fmt::format("argmax T = {:.6f}, max = {:.5f}, enumerated herald probability {:.5f}", T, f(T), enumerated)};
}

// 7. Dark-count ratio and the simulated dark-assisted six-fold fraction.
Outcome dark_counts() {
  const double ratio = dark_count_ratio(300.0, 12e-9, 0.15);
  bool pass = std::abs(ratio - 2.4e-5) < 1e-12;
  std::string per;
  for (const char* name : kSplitFixtures) {
    auto cfg = parse_experiment_file(fixture(name));
    const auto tables = precompute_outcome_tables(cfg);
    // Ten hours give only tens of six-folds; the fraction is resolved with a
    // much longer aggregate run on the same tables.
    cfg.pulses = 40'000'000'000'000'000ULL;
    const auto res = run_experiment(cfg, tables, {1, SamplerKind::aggregate, {}});
    const auto tot = res.total();
    const double frac = static_cast<double>(tot.dark_assisted_sixfold) / static_cast<double>(tot.n_s);
    double exact_dark = 0.0, exact_six = 0.0;
    for (const auto& b : tables.bases) {
      exact_dark += b.mixture.sixfold_dark_assisted();
      exact_six += b.mixture.sixfold();
    }
    pass = pass && frac < 1e-4;
    per += fmt::format("{}{} {:.2e} (exact {:.2e}, n_s {})", per.empty() ? "" : "; ", name, frac,
                       exact_dark / exact_six, tot.n_s);
  }
  return {pass, fmt::format("n_d t / eta = {:.2e}; dark-assisted six-fold fraction: {}", ratio, per)};
}

// 8. CHSH threshold from an angle optimization, plus Monte Carlo fidelities.
Eigen::Matrix4cd werner(double v) {
  Eigen::Vector4cd p = Eigen::Vector4cd::Zero();
  p[0] = p[3] = 1.0 / std::sqrt(2.0);
  return v * (p * p.adjoint()) + (1.0 - v) / 4.0 * Eigen::Matrix4cd::Identity();
}

double max_chsh(const Eigen::Matrix4cd& rho) {
  auto obs = [](double t) {
    Eigen::Matrix2cd m;
    m << std::cos(t), std::sin(t), std::sin(t), -std::cos(t);
    return m;
  };
  auto corr = [&](double a, double b) {
    const Eigen::Matrix2cd A = obs(a), B = obs(b);
    Eigen::Matrix4cd k;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) k.block<2, 2>(2 * i, 2 * j) = A(i, j) * B;
    }
    return (rho * k).trace().real();
  };
  auto chsh = [&](const std::array<double, 4>& x) {
    return corr(x[0], x[2]) + corr(x[0], x[3]) + corr(x[1], x[2]) - corr(x[1], x[3]);
  };
  // Coarse grid over all four angles, then coordinate refinement.
  std::array<double, 4> best{};
  double best_s = -1e9;
  const int n = 8;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
          std::array<double, 4> x{M_PI * i / n, M_PI * j / n, M_PI * k / n, M_PI * l / n};
          const double s = chsh(x);
          if (s > best_s) {
            best_s = s;
            best = x;
          }
        }
      }
    }
  }
  for (double step = M_PI / n; step > 1e-10; step /= 2.0) {
    bool moved = true;
    while (moved) {
      moved = false;
      for (int c = 0; c < 4; ++c) {
        for (double dir : {-1.0, 1.0}) {
          auto x = best;
          x[c] += dir * step;
          const double s = chsh(x);
          if (s > best_s + 1e-15) {
            best_s = s;
            best = x;
            moved = true;
          }
        }
      }
    }
  }
  return best_s;
}

ExperimentConfig heralded_config(double visibility, double eta_t, std::uint64_t pulses) {
  ExperimentConfig c;
  c.source = {0.2, 3, visibility, NoiseModel::dephasing, 76e6};
  c.circuit = heralding_circuit(0.5);
  c.detectors = standard_layout(eta_t, 1.0).detectors;
  c.herald = {"t1", "t2", "t3", "t4"};
  c.bases = tomography_bases();
  c.pulses = pulses;
  c.seed = 8;
  return c;
}

ExperimentConfig one_pair_config(double visibility, std::uint64_t pulses) {
  ExperimentConfig c;
  c.source = {0.2, 1, visibility, NoiseModel::dephasing, 76e6};
  c.circuit.input_modes = source_modes();
  c.circuit.elements = {WavePlateSpec{45.0, "b"}, WavePlateSpec{0.0, "b"}};
  const std::pair<const char*, ModeId> dets[] = {
      {"s1", {"a", "x"}}, {"s2", {"a", "y"}}, {"s3", {"b", "x"}}, {"s4", {"b", "y"}}};
  for (const auto& [id, mode] : dets) c.detectors.push_back({id, mode, DetectorKind::threshold, 1.0, 1.0, 0.0, 0.0});
  c.bases = tomography_bases();
  c.pulses = pulses;
  c.seed = 9;
  return c;
}

double enumerated_fidelity(const ExperimentConfig& c) {
  const auto layout = c.layout();
  const auto params = c.source.spdc();
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  for (unsigned n = 3; n <= params.n_max; ++n) {
    MixedState out;
    for (const auto& b : noise_branches(n, c.source.source_noise())) {
      out.branches.push_back({b.weight, apply_circuit(b.state, c.circuit), ""});
    }
    const auto h = herald(out, layout.detectors, layout.triggers, layout.output_modes());
    if (h.heralded()) rho += pair_probability(n, params.r) * h.herald_probability * h.output;
  }
  return overlap_phi_plus(rho / rho.trace().real());
}

Outcome chsh_and_fidelity() {
  double lo = 0.5, hi = 1.0;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (max_chsh(werner(mid)) > 2.0 ? hi : lo) = mid;
  }
  const double v = 0.5 * (lo + hi);
  const double f_oracle = overlap_phi_plus(werner(v));
  const double thr = chsh_werner_threshold();
  const auto quoted = violates_chsh({0.87, 0.029});

  const auto ideal = run_experiment(heralded_config(1.0, 1.0, 10'000'000));
  const auto& fi = *ideal.fidelity;
  const bool ideal_ok = std::abs(fi.value - 1.0) <= std::max(3.0 * fi.sigma, 1e-12);

  const double vis = 0.91;
  const auto one = run_experiment(one_pair_config(vis, 2'000'000));
  const double closed = (1.0 + vis) / 2.0;
  const bool one_ok = std::abs(one.fidelity->value - closed) <= 3.0 * one.fidelity->sigma;

  const auto hcfg = heralded_config(vis, 0.6, 20'000'000);
  const auto heralded = run_experiment(hcfg);
  const double exact = enumerated_fidelity(hcfg);
  const bool her_ok = std::abs(heralded.fidelity->value - exact) <= 3.0 * heralded.fidelity->sigma;

  const bool pass = std::abs(thr - 0.780330) <= 1e-6 && std::abs(f_oracle - thr) <= 1e-6 && quoted.violates &&
                    quoted.n_sigmas >= 3.0 && ideal_ok && one_ok && her_ok;
  return {pass, fmt::format("threshold {:.6f} (optimized {:.6f}); F=0.87+-0.029 -> {:.2f} sigma; MC F(V=1) = {:.4f}+-{:.4f}; "
                            "one pair V=0.91: {:.4f}+-{:.4f} vs {:.4f}; heralded V=0.91: {:.4f}+-{:.4f} vs {:.4f}",
                            thr, f_oracle, quoted.n_sigmas, fi.value, fi.sigma, one.fidelity->value,
                            one.fidelity->sigma, closed, heralded.fidelity->value, heralded.fidelity->sigma, exact)};
}

// 9. Property suites.
Outcome properties() {
  std::vector<std::string> failed;
  auto check = [&](bool ok, const char* what) {
    if (!ok) failed.push_back(what);
  };

  // Norm conservation through the circuit for every sector and a range of R.
  double worst_norm = 0.0;
  for (double R : {0.0, 0.2, 0.486, 0.8, 1.0}) {
    for (unsigned n = 0; n <= 4; ++n) {
      worst_norm = std::max(worst_norm, std::abs(apply_circuit(n_pair_state(n), heralding_circuit(R)).norm_sq() - 1.0));
    }
  }
  check(worst_norm < 1e-12, "norm");

  // Hong-Ou-Mandel: |1,1> on a balanced splitter has no coincidence term.
  {
    const ModeId a{"a", "x"}, b{"b", "x"}, c{"c", "x"}, d{"d", "x"};
    const double s = 1.0 / std::sqrt(2.0);
    ModeTransform t;
    t.columns[a] = {{s, c}, {s, d}};
    t.columns[b] = {{s, c}, {-s, d}};
    PureState in;
    in.add(FockBasisState({{a, 1}, {b, 1}}), 1.0);
    check(std::abs(substitute_modes(in, t).amplitude(FockBasisState({{c, 1}, {d, 1}}))) < 1e-12, "HOM");
  }

  // Two pairs cannot herald and still leave one photon per output arm.
  {
    const auto layout = standard_layout(1.0, 1.0, 0.0, 0.0, DetectorKind::number_resolving);
    double worst = 0.0;
    for (double R : {0.3, 0.5, 0.7}) {
      const auto h = herald(circuit_output(n_pair_state(2), heralding_circuit(R)), layout.detectors, layout.triggers,
                            layout.output_modes());
      worst = std::max(worst, h.herald_probability * h.preparation_efficiency);
    }
    check(worst < 1e-12, "two-pair suppression");
  }

  // Click distributions sum to one.
  {
    const auto layout = standard_layout(0.3, 0.15, 1e5, 1e-6, DetectorKind::number_resolving);
    double worst = 0.0;
    for (unsigned n = 0; n <= 3; ++n) {
      const auto dist = click_distribution_direct(circuit_output(n_pair_state(n), heralding_circuit(0.57)),
                                                  layout.detectors);
      double sum = 0.0;
      for (const auto& [_, p] : dist) sum += p;
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    check(worst < 1e-10, "click normalization");
  }

  // Parser round trip and fuzz totality.
  {
    bool round_trip = true, total = true;
    std::mt19937_64 rng(17);
    for (const char* name : kSplitFixtures) {
      std::ifstream in(fixture(name));
      std::stringstream ss;
      ss << in.rdbuf();
      const std::string text = ss.str();
      const auto cfg = parse_experiment(text);
      round_trip = round_trip && parse_experiment(serialize(cfg)) == cfg;
      for (int i = 0; i < 500; ++i) {
        std::string m = text;
        const std::size_t pos = rng() % m.size();
        m[pos] = static_cast<char>(32 + rng() % 95);
        if (rng() % 2) m.erase(rng() % m.size(), 1 + rng() % 6);
        try {
          parse_experiment(m);
        } catch (const ParseError&) {
        } catch (...) {
          total = false;
        }
      }
    }
    check(round_trip, "parser round trip");
    check(total, "parser fuzz");
  }

  // Monte Carlo determinism and shard-merge invariance.
  {
    auto cfg = heralded_config(0.91, 0.5, 400'000);
    const auto tables = precompute_outcome_tables(cfg);
    const auto a = run_experiment(cfg, tables, {1, SamplerKind::per_pulse, {}});
    const auto b = run_experiment(cfg, tables, {1, SamplerKind::per_pulse, {}});
    const auto c = run_experiment(cfg, tables, {4, SamplerKind::per_pulse, {}});
    check(a.records == b.records, "MC determinism");
    auto merged = sample_pulses(tables.bases[0], *cfg.seed, 0, 0, 150'001);
    merged += sample_pulses(tables.bases[0], *cfg.seed, 0, 150'001, 249'999);
    check(a.records == c.records && merged == a.records[0], "MC shard merge");
  }

  if (failed.empty()) return {true, "norm, HOM, two-pair suppression, click normalization, parser, MC determinism"};
  std::string which;
  for (const auto& f : failed) which += (which.empty() ? "" : ", ") + f;
  return {false, "failed: " + which};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> expect_fail;
  app.add_option("--expect-fail", expect_fail, "Criteria known to fail (comma separated)")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  const std::set<int> expected(expect_fail.begin(), expect_fail.end());

  const std::vector<std::function<Outcome()>> criteria{ideal_herald,    closed_form_grid, reference_points,
                                                        pair_statistics, four_pair_shift,  herald_maximum,
                                                        dark_counts,     chsh_and_fidelity, properties};
  const auto t0 = Clock::now();
  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    std::cout << fmt::format("criterion {}: {} {}", id, o.pass ? "PASS" : "FAIL", o.detail) << std::endl;
    if (o.pass == expected.contains(id)) ++unexpected;
  }
  std::cerr << fmt::format("total {:.1f} s; {} unexpected result(s)\n", seconds_since(t0), unexpected);
  return unexpected == 0 ? 0 : 1;
}

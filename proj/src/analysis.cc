#include "heraldsim/analysis.h"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "heraldsim/errors.h"
#include "heraldsim/optics.h"

namespace heraldsim {

void PauliCorrelation::validate() const {
  for (double c : {xx, yy, zz}) {
    if (!(c >= -1.0 - 1e-12 && c <= 1.0 + 1e-12)) throw DomainError(fmt::format("correlation {} outside [-1,1]", c));
  }
}

double eff_theory(double R, double eta_t) {
  if (!(R >= 0.0 && R <= 1.0) || !(eta_t >= 0.0 && eta_t <= 1.0)) {
    throw DomainError(fmt::format("eff_theory needs R, eta_t in [0,1], got {}, {}", R, eta_t));
  }
  const double T = 1.0 - R;
  const double d = 1.0 - eta_t * T / 2.0;
  return R * R / (d * d);
}

EfficiencyEstimate eff_exp(std::uint64_t n_s, std::uint64_t n_t, double eta_s) {
  if (n_t == 0) throw UndefinedEstimate("eff_exp needs n_t > 0");
  if (!(eta_s > 0.0 && eta_s <= 1.0)) throw DomainError(fmt::format("eta_s={} outside (0,1]", eta_s));
  const double s = static_cast<double>(n_s), t = static_cast<double>(n_t);
  const double scale = t * eta_s * eta_s;
  const double value = s / scale;
  // d/dn_s = 1/scale, d/dn_t = -value/t; var(n) = n.
  const double sigma = std::sqrt(s + s * s / t) / scale;
  return {value, sigma};
}

Estimate correlation_from_counts(const OutcomeCounts& counts) {
  const double same = static_cast<double>(counts[0][0] + counts[1][1]);
  const double diff = static_cast<double>(counts[0][1] + counts[1][0]);
  const double n = same + diff;
  if (n == 0.0) throw UndefinedEstimate("no coincidences in this basis");
  return {(same - diff) / n, 2.0 * std::sqrt(same * diff / (n * n * n))};
}

FidelityEstimate fidelity_phi_plus(const PauliCorrelation& corr) {
  const double f = 0.25 * (1.0 + corr.xx - corr.yy + corr.zz);
  const auto& e = corr.errors;
  return {f, 0.25 * std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2])};
}

PauliCorrelation pauli_correlations(const Eigen::Matrix4cd& rho) {
  Eigen::Matrix2cd x, y, z;
  const std::complex<double> i{0.0, 1.0};
  x << 0, 1, 1, 0;
  y << 0, -i, i, 0;
  z << 1, 0, 0, -1;
  auto kron = [](const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
    Eigen::Matrix4cd k;
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) k.block<2, 2>(2 * r, 2 * c) = a(r, c) * b;
    }
    return k;
  };
  PauliCorrelation p;
  p.xx = (rho * kron(x, x)).trace().real();
  p.yy = (rho * kron(y, y)).trace().real();
  p.zz = (rho * kron(z, z)).trace().real();
  return p;
}

double overlap_phi_plus(const Eigen::Matrix4cd& rho) {
  return 0.5 * (rho(0, 0) + rho(0, 3) + rho(3, 0) + rho(3, 3)).real();
}

double fidelity_from_visibilities(double vx, double vy, double vz) { return 0.25 * (1.0 + vx + vy + vz); }

double chsh_werner_threshold() { return (1.0 + 3.0 / std::sqrt(2.0)) / 4.0; }

ChshCheck violates_chsh(const FidelityEstimate& f) {
  const double excess = f.value - chsh_werner_threshold();
  ChshCheck c;
  c.violates = excess > 0.0;
  if (f.sigma > 0.0) {
    c.n_sigmas = excess / f.sigma;
  } else {
    c.n_sigmas = excess > 0.0 ? std::numeric_limits<double>::infinity()
                              : (excess < 0.0 ? -std::numeric_limits<double>::infinity() : 0.0);
  }
  return c;
}

double dark_count_ratio(double n_d, double window, double eta) {
  if (!(eta > 0.0)) throw DomainError("dark_count_ratio needs eta > 0");
  return n_d * window / eta;
}

FourPairCorrection combine_sectors(double p3, double herald3, double eff3, double p4, double herald4, double eff4) {
  FourPairCorrection c;
  c.herald3 = herald3;
  c.herald4 = herald4;
  c.eff3 = eff3;
  c.eff4 = eff4;
  const double w3 = p3 * herald3, w4 = p4 * herald4;
  if (w3 + w4 <= 0.0 || eff3 == 0.0) {
    throw UndefinedEstimate("no heralded weight in the three- and four-pair sectors");
  }
  c.eff34 = (w3 * eff3 + (w4 > 0.0 ? w4 * eff4 : 0.0)) / (w3 + w4);
  c.shift = (c.eff34 - eff3) / eff3;
  return c;
}

FourPairCorrection four_pair_correction(const SpdcParams& params, const CircuitSpec& circuit,
                                        const DetectionLayout& layout, const SourceNoise& noise) {
  params.validate();
  if (params.n_max < 4) throw ConfigError("four-pair correction needs n_max >= 4");
  const auto outputs = layout.output_modes();
  auto sector = [&](unsigned n) {
    MixedState lossless;
    for (const auto& b : merge_equivalent(noise_branches(n, noise))) {
      lossless.branches.push_back({b.weight, apply_circuit(b.state, circuit), {}});
    }
    return herald(lossless, layout.detectors, layout.triggers, outputs);
  };
  const auto h3 = sector(3);
  const auto h4 = sector(4);
  auto eff = [](const HeraldResult& h) { return h.heralded() ? h.preparation_efficiency : 0.0; };
  return combine_sectors(pair_probability(3, params.r), h3.herald_probability, eff(h3),
                         pair_probability(4, params.r), h4.herald_probability, eff(h4));
}

FourPairCorrection four_pair_correction(const SpdcParams& params, double R, const DetectionLayout& layout,
                                        const SourceNoise& noise) {
  return four_pair_correction(params, heralding_circuit(R), layout, noise);
}

}  // namespace heraldsim

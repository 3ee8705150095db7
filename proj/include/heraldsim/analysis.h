#pragma once

// Closed-form efficiencies, Pauli-correlation fidelity, Poisson errors and
// the CHSH bound for Werner states.

#include <array>
#include <cstdint>

#include <Eigen/Dense>

#include "heraldsim/detection.h"
#include "heraldsim/source.h"

namespace heraldsim {

struct Estimate {
  double value = 0.0;
  double sigma = 0.0;
};

using EfficiencyEstimate = Estimate;
using FidelityEstimate = Estimate;

struct PauliCorrelation {
  double xx = 0.0;
  double yy = 0.0;
  double zz = 0.0;
  std::array<double, 3> errors{};  ///< sigma of xx, yy, zz

  void validate() const;
};

/// Coincidence counts of one basis setting, indexed [first arm][second arm]
/// with 0 = first basis vector.
using OutcomeCounts = std::array<std::array<std::uint64_t, 2>, 2>;

/// R^2 / (1 - eta_t T / 2)^2 with T = 1 - R.
double eff_theory(double R, double eta_t);

/// n_s / (n_t eta_s^2). Sigma is first-order propagation of independent
/// Poisson errors on n_s and n_t.
EfficiencyEstimate eff_exp(std::uint64_t n_s, std::uint64_t n_t, double eta_s);

/// (N_same - N_diff) / N. Sigma is the binomial error 2 sqrt(N_same N_diff / N^3).
Estimate correlation_from_counts(const OutcomeCounts& counts);

/// 1/4 (1 + xx - yy + zz).
FidelityEstimate fidelity_phi_plus(const PauliCorrelation& corr);

/// <xx>, <yy>, <zz> of a two-qubit density matrix in the |HH>, |HV>, |VH>, |VV> basis.
PauliCorrelation pauli_correlations(const Eigen::Matrix4cd& rho);

/// <phi+| rho |phi+>.
double overlap_phi_plus(const Eigen::Matrix4cd& rho);

/// Singlet form 1/4 (1 + Vx + Vy + Vz). For phi+ the y term enters with the
/// opposite sign; use fidelity_phi_plus there.
double fidelity_from_visibilities(double vx, double vy, double vz);

/// Fidelity of the Werner state whose CHSH value is exactly 2: (1 + 3/sqrt 2) / 4.
double chsh_werner_threshold();

struct ChshCheck {
  bool violates = false;
  double n_sigmas = 0.0;
};

ChshCheck violates_chsh(const FidelityEstimate& f);

/// n_d t / eta.
double dark_count_ratio(double n_d, double window, double eta);

struct FourPairCorrection {
  double herald3 = 0.0;  ///< herald probability of the three-pair state
  double herald4 = 0.0;
  double eff3 = 0.0;     ///< preparation efficiency, three-pair sector only
  double eff4 = 0.0;
  double eff34 = 0.0;    ///< sectors mixed with weights p3 herald3 and p4 herald4
  double shift = 0.0;    ///< (eff34 - eff3) / eff3
};

/// Mixes two heralded sectors.
FourPairCorrection combine_sectors(double p3, double herald3, double eff3, double p4, double herald4, double eff4);

/// Runs herald() on the three- and four-pair states behind `circuit`.
FourPairCorrection four_pair_correction(const SpdcParams& params, const CircuitSpec& circuit,
                                        const DetectionLayout& layout, const SourceNoise& noise = {});
/// Same with heralding_circuit(R).
FourPairCorrection four_pair_correction(const SpdcParams& params, double R, const DetectionLayout& layout,
                                        const SourceNoise& noise = {});

}  // namespace heraldsim

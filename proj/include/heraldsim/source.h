#pragma once

// Multi-pair SPDC input states.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "heraldsim/fock.h"

namespace heraldsim {

struct SpdcParams {
  double r = 0.0;  ///< coupling coefficient
  unsigned n_max = 4;
  double rep_rate = 76e6;  ///< pulses per second
  std::optional<double> pair_rate;

  void validate() const;
};

enum class NoiseModel { dephasing, white };

struct SourceNoise {
  double visibility = 1.0;
  NoiseModel model = NoiseModel::dephasing;

  void validate() const;
};

std::string_view noise_model_name(NoiseModel m);
NoiseModel parse_noise_model(std::string_view name);

/// p_n = (n+1) tanh^{2n} r / cosh^4 r.
double pair_probability(unsigned n, double r);

/// Largest achievable p_1 (= 8/27 at tanh^2 r = 1/3).
double max_single_pair_probability();

/// Inverts p_1(r) by bisection on the rising branch.
double coupling_from_rate(double p1);

/// Normalized (a_x b_y - a_y b_x)^n |vac> on modes a:x, a:y, b:x, b:y.
PureState n_pair_state(unsigned n, unsigned photon_limit = kDefaultPhotonLimit);

/// Unnormalized (a_x b_y - a_y b_x)^n |vac>.
PureState n_pair_operator_power(unsigned n, unsigned photon_limit = kDefaultPhotonLimit);

/// sum_{n <= n_max} sqrt(p_n) |n pairs>. Sub-normalized by the truncated tail.
PureState spdc_state(const SpdcParams& params);

/// Tail probability sum_{n > n_max} p_n.
double truncation_deficit(const SpdcParams& params);

/// Two-photon operators emitted per pair, in the order psi-, psi+, phi-, phi+.
enum class BellPair : unsigned { psi_minus = 0, psi_plus = 1, phi_minus = 2, phi_plus = 3 };

/// Normalized product prod_k (pair operator k)^{counts[k]} |vac>.
PureState bell_pair_product(const std::array<unsigned, 4>& counts, unsigned photon_limit = kDefaultPhotonLimit);

/// One noise branch of an n-pair emission.
struct NoiseBranch {
  double weight = 0.0;
  unsigned noisy_pairs = 0;            ///< pairs drawn from the noise admixture
  std::array<unsigned, 4> pair_types{};  ///< counts per BellPair
  PureState state;
};

/// Each pair is ideal with probability V and noisy with probability 1 - V.
/// Dephasing: a noisy pair is a singlet or a sigma_z-flipped singlet with
/// equal probability. White: a noisy pair is any of the four Bell pairs with
/// equal probability.
std::vector<NoiseBranch> noise_branches(unsigned n_pairs, const SourceNoise& noise,
                                        unsigned photon_limit = kDefaultPhotonLimit);

/// Same branches as a MixedState, labelled "noisy=k types=a,b,c,d".
MixedState dephased_source(unsigned n_pairs, const SourceNoise& noise,
                           unsigned photon_limit = kDefaultPhotonLimit);

/// Merges noise branches with identical pair content (the noisy/ideal split
/// does not change the state).
std::vector<NoiseBranch> merge_equivalent(std::vector<NoiseBranch> branches);

}  // namespace heraldsim

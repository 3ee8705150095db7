#include "heraldsim/source.h"

#include <cmath>
#include <map>

#include <fmt/format.h>

#include "heraldsim/errors.h"

namespace heraldsim {

namespace {

const ModeId kAx{"a", "x"}, kAy{"a", "y"}, kBx{"b", "x"}, kBy{"b", "y"};

// Applies the pair operator once: psi -> a_x b_y -/+ a_y b_x, phi -> a_x b_x -/+ a_y b_y.
PureState apply_pair(const PureState& s, BellPair type) {
  const bool psi = type == BellPair::psi_minus || type == BellPair::psi_plus;
  const double sign = (type == BellPair::psi_minus || type == BellPair::phi_minus) ? -1.0 : 1.0;
  PureState first = apply_creation(apply_creation(s, kAx), psi ? kBy : kBx);
  PureState second = apply_creation(apply_creation(s, kAy), psi ? kBx : kBy);
  for (const auto& [basis, amp] : second) first.add(basis, sign * amp);
  first.prune();
  return first;
}

double binomial(unsigned n, unsigned k) {
  double c = 1.0;
  for (unsigned i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

}  // namespace

void SpdcParams::validate() const {
  if (!(r >= 0.0)) throw ConfigError(fmt::format("coupling r={} must be >= 0", r));
  if (n_max < 1) throw ConfigError("n_max must be >= 1");
  if (!(rep_rate > 0.0)) throw ConfigError("repetition rate must be positive");
}

void SourceNoise::validate() const {
  if (!(visibility >= 0.0 && visibility <= 1.0)) {
    throw ConfigError(fmt::format("visibility {} outside [0,1]", visibility));
  }
}

std::string_view noise_model_name(NoiseModel m) { return m == NoiseModel::dephasing ? "dephasing" : "white"; }

NoiseModel parse_noise_model(std::string_view name) {
  if (name == "dephasing") return NoiseModel::dephasing;
  if (name == "white") return NoiseModel::white;
  throw ConfigError(fmt::format("unknown noise model '{}'", name));
}

double pair_probability(unsigned n, double r) {
  if (r < 0.0) throw DomainError("coupling must be >= 0");
  if (r == 0.0) return n == 0 ? 1.0 : 0.0;
  const double t2 = std::tanh(r) * std::tanh(r);
  const double c2 = std::cosh(r) * std::cosh(r);
  return (n + 1) * std::pow(t2, n) / (c2 * c2);
}

double max_single_pair_probability() { return 8.0 / 27.0; }

double coupling_from_rate(double p1) {
  if (!(p1 >= 0.0) || p1 >= max_single_pair_probability()) {
    throw DomainError(fmt::format("p1={} outside [0, {})", p1, max_single_pair_probability()));
  }
  if (p1 == 0.0) return 0.0;
  // p_1 rises monotonically on [0, atanh(1/sqrt 3)].
  double lo = 0.0, hi = std::atanh(1.0 / std::sqrt(3.0));
  while (hi - lo > 1e-15) {
    double mid = 0.5 * (lo + hi);
    if (pair_probability(1, mid) < p1) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

PureState n_pair_operator_power(unsigned n, unsigned photon_limit) {
  if (2 * n > photon_limit) {
    throw OverflowError(fmt::format("{} pairs exceed the photon limit {}", n, photon_limit));
  }
  std::vector<ModeId> modes{kAx, kAy, kBx, kBy};
  PureState s = make_vacuum(modes, photon_limit);
  for (unsigned k = 0; k < n; ++k) s = apply_pair(s, BellPair::psi_minus);
  return s;
}

PureState n_pair_state(unsigned n, unsigned photon_limit) { return n_pair_operator_power(n, photon_limit).normalized(); }

PureState spdc_state(const SpdcParams& params) {
  params.validate();
  const unsigned limit = std::max(kDefaultPhotonLimit, 2 * params.n_max);
  PureState out(limit);
  for (unsigned n = 0; n <= params.n_max; ++n) {
    double p = pair_probability(n, params.r);
    if (p == 0.0) continue;
    for (const auto& [basis, amp] : n_pair_state(n, limit)) out.add(basis, std::sqrt(p) * amp);
  }
  out.prune();
  return out;
}

double truncation_deficit(const SpdcParams& params) {
  // Direct tail sum; 1 - sum_{n<=n_max} p_n loses the small deficit to rounding.
  double tail = 0.0;
  for (unsigned n = params.n_max + 1; n < params.n_max + 400; ++n) {
    double p = pair_probability(n, params.r);
    tail += p;
    if (p < 1e-300 || p < tail * 1e-17) break;
  }
  return tail;
}

PureState bell_pair_product(const std::array<unsigned, 4>& counts, unsigned photon_limit) {
  unsigned total = counts[0] + counts[1] + counts[2] + counts[3];
  if (2 * total > photon_limit) {
    throw OverflowError(fmt::format("{} pairs exceed the photon limit {}", total, photon_limit));
  }
  std::vector<ModeId> modes{kAx, kAy, kBx, kBy};
  PureState s = make_vacuum(modes, photon_limit);
  for (unsigned t = 0; t < 4; ++t) {
    for (unsigned k = 0; k < counts[t]; ++k) s = apply_pair(s, static_cast<BellPair>(t));
  }
  return s.normalized();
}

std::vector<NoiseBranch> noise_branches(unsigned n_pairs, const SourceNoise& noise, unsigned photon_limit) {
  noise.validate();
  const double v = noise.visibility;
  std::vector<NoiseBranch> out;
  if (v == 1.0 || n_pairs == 0) {
    out.push_back({1.0, 0, {n_pairs, 0, 0, 0}, bell_pair_product({n_pairs, 0, 0, 0}, photon_limit)});
    return out;
  }
  std::map<std::array<unsigned, 4>, PureState> cache;
  auto state_for = [&](const std::array<unsigned, 4>& types) -> const PureState& {
    auto it = cache.find(types);
    if (it == cache.end()) it = cache.emplace(types, bell_pair_product(types, photon_limit)).first;
    return it->second;
  };

  for (unsigned k = 0; k <= n_pairs; ++k) {
    const double wk = binomial(n_pairs, k) * std::pow(v, n_pairs - k) * std::pow(1.0 - v, k);
    if (wk == 0.0) continue;
    if (noise.model == NoiseModel::dephasing) {
      for (unsigned j = 0; j <= k; ++j) {
        std::array<unsigned, 4> types{n_pairs - j, j, 0, 0};
        double w = wk * binomial(k, j) * std::pow(0.5, k);
        out.push_back({w, k, types, state_for(types)});
      }
    } else {
      // Multinomial over the four Bell pairs for the k noisy pairs.
      for (unsigned c1 = 0; c1 <= k; ++c1) {
        for (unsigned c2 = 0; c1 + c2 <= k; ++c2) {
          for (unsigned c3 = 0; c1 + c2 + c3 <= k; ++c3) {
            unsigned c0 = k - c1 - c2 - c3;
            double multi = binomial(k, c0) * binomial(k - c0, c1) * binomial(k - c0 - c1, c2);
            double w = wk * multi * std::pow(0.25, k);
            std::array<unsigned, 4> types{n_pairs - k + c0, c1, c2, c3};
            out.push_back({w, k, types, state_for(types)});
          }
        }
      }
    }
  }
  return out;
}

MixedState dephased_source(unsigned n_pairs, const SourceNoise& noise, unsigned photon_limit) {
  MixedState m;
  for (auto& b : noise_branches(n_pairs, noise, photon_limit)) {
    auto label = fmt::format("noisy={} types={},{},{},{}", b.noisy_pairs, b.pair_types[0], b.pair_types[1],
                             b.pair_types[2], b.pair_types[3]);
    m.branches.push_back({b.weight, std::move(b.state), std::move(label)});
  }
  return m;
}

std::vector<NoiseBranch> merge_equivalent(std::vector<NoiseBranch> branches) {
  std::map<std::array<unsigned, 4>, NoiseBranch> merged;
  for (auto& b : branches) {
    auto it = merged.find(b.pair_types);
    if (it == merged.end()) {
      merged.emplace(b.pair_types, std::move(b));
    } else {
      it->second.weight += b.weight;
      it->second.noisy_pairs = std::max(it->second.noisy_pairs, b.noisy_pairs);
    }
  }
  std::vector<NoiseBranch> out;
  for (auto& [_, b] : merged) out.push_back(std::move(b));
  return out;
}

}  // namespace heraldsim

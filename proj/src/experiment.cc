#include "heraldsim/experiment.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "heraldsim/errors.h"

namespace heraldsim {

namespace {

constexpr std::size_t kCategories = 2 * kEventClasses;

std::size_t category(std::size_t event_class, bool dark) { return 2 * event_class + (dark ? 1 : 0); }

std::array<double, kCategories> category_weights(const EventDistribution& e) {
  std::array<double, kCategories> w{};
  for (std::size_t c = 0; c < kEventClasses; ++c) {
    w[category(c, false)] = e.clean[c];
    w[category(c, true)] = e.dark_assisted[c];
  }
  return w;
}

void record_event(CountRecord& rec, std::size_t cat, std::uint64_t n = 1) {
  const std::size_t c = cat / 2;
  const bool dark = cat % 2 == 1;
  switch (static_cast<EventClass>(c)) {
    case EventClass::not_triggered:
      return;
    case EventClass::incomplete:
      rec.n_t += n;
      rec.incomplete += n;
      return;
    case EventClass::ambiguous:
      rec.n_t += n;
      rec.ambiguous += n;
      return;
    default:
      break;
  }
  const std::size_t o = c - 3;
  rec.n_t += n;
  rec.n_s += n;
  rec.outcomes[o / 2][o % 2] += n;
  if (dark) rec.dark_assisted_sixfold += n;
}

inline std::uint64_t mul_hi64(std::uint64_t a, std::uint64_t b) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) >> 64);
}

}  // namespace

SpdcParams SourceConfig::spdc() const {
  validate();
  SpdcParams p;
  p.r = coupling_from_rate(p1);
  p.n_max = n_max;
  p.rep_rate = rep_rate;
  p.pair_rate = p1 * rep_rate;
  return p;
}

void SourceConfig::validate() const {
  if (!(p1 >= 0.0 && p1 < max_single_pair_probability())) {
    throw ConfigError(fmt::format("p1={} outside [0, 8/27)", p1));
  }
  if (n_max < 1 || n_max > 6) throw ConfigError(fmt::format("nmax={} outside [1, 6]", n_max));
  if (!(rep_rate > 0.0)) throw ConfigError("repetition rate must be positive");
  source_noise().validate();
}

DetectionLayout ExperimentConfig::layout() const { return DetectionLayout::from(detectors, herald); }

std::vector<BasisSetting> tomography_bases() {
  return {{Basis::HV, Basis::HV}, {Basis::DA, Basis::DA}, {Basis::RL, Basis::RL}};
}

OutcomeTables precompute_outcome_tables(const ExperimentConfig& config) {
  const auto params = config.source.spdc();
  const auto noise = config.source.source_noise();
  const auto layout = config.layout();
  const std::vector<ModeId> produced = config.circuit.output_modes();
  for (const auto& d : layout.detectors) {
    if (!std::binary_search(produced.begin(), produced.end(), d.mode)) {
      throw ConfigError(fmt::format("detector {} watches mode {} which the circuit does not produce", d.id,
                                    d.mode.str()));
    }
  }
  if (config.bases.empty()) throw ConfigError("no basis settings");

  OutcomeTables out;
  double total = 0.0;
  for (unsigned n = 0; n <= params.n_max; ++n) {
    out.sector_weights.push_back(pair_probability(n, params.r));
    total += out.sector_weights.back();
  }
  for (auto& w : out.sector_weights) w /= total;

  struct Branch {
    unsigned n;
    NoiseBranch noise;
    MixedState lossless;
  };
  const unsigned limit = std::max(kDefaultPhotonLimit, 2 * params.n_max);
  std::vector<Branch> branches;
  for (unsigned n = 0; n <= params.n_max; ++n) {
    if (out.sector_weights[n] == 0.0) continue;
    for (auto& b : merge_equivalent(noise_branches(n, noise, limit))) {
      MixedState m;
      m.branches.push_back({1.0, apply_circuit(b.state, config.circuit), {}});
      branches.push_back({n, std::move(b), std::move(m)});
    }
  }

  for (const auto& basis : config.bases) {
    BasisTables bt;
    bt.basis = basis;
    for (const auto& b : branches) {
      SectorTable st;
      st.n_pairs = b.n;
      st.sector_weight = out.sector_weights[b.n];
      st.branch_weight = b.noise.weight;
      st.pair_types = b.noise.pair_types;
      st.table = outcome_table(b.lossless, layout, basis);
      bt.mixture += st.table.events.scaled(st.sector_weight * st.branch_weight);
      bt.entries.push_back(std::move(st));
    }
    out.bases.push_back(std::move(bt));
  }
  return out;
}

// ---------------------------------------------------------------------------

Philox4x32::Block Philox4x32::generate(Block ctr, Key key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

AliasTable::AliasTable(std::span<const double> weights) {
  const std::size_t n = weights.size();
  if (n == 0) throw ConfigError("alias table needs at least one category");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ConfigError("alias table weights must be >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw ConfigError("alias table weights sum to zero");

  prob_.assign(n, 0.0);
  alias_.resize(n);
  std::vector<double> scaled(n);
  std::vector<std::uint32_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = weights[i] * static_cast<double>(n) / total;
    alias_[i] = static_cast<std::uint32_t>(i);
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const auto s = small.back(), l = large.back();
    small.pop_back();
    large.pop_back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    (scaled[l] < 1.0 ? small : large).push_back(l);
  }
  for (auto i : large) prob_[i] = 1.0;
  // Leftovers from rounding; their true scaled weight is 1.
  for (auto i : small) prob_[i] = weights[i] > 0.0 ? 1.0 : 0.0;
}

std::size_t AliasTable::sample(std::uint64_t column_bits, double u) const {
  const std::size_t col = mul_hi64(column_bits, prob_.size());
  return u < prob_[col] ? col : alias_[col];
}

CountRecord& CountRecord::operator+=(const CountRecord& o) {
  pulses += o.pulses;
  n_t += o.n_t;
  n_s += o.n_s;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) outcomes[i][j] += o.outcomes[i][j];
  }
  incomplete += o.incomplete;
  ambiguous += o.ambiguous;
  dark_assisted_sixfold += o.dark_assisted_sixfold;
  return *this;
}

std::string_view sampler_name(SamplerKind k) {
  switch (k) {
    case SamplerKind::automatic:
      return "auto";
    case SamplerKind::per_pulse:
      return "per-pulse";
    case SamplerKind::aggregate:
      return "aggregate";
  }
  return "?";
}

SamplerKind parse_sampler(std::string_view name) {
  if (name == "auto") return SamplerKind::automatic;
  if (name == "per-pulse") return SamplerKind::per_pulse;
  if (name == "aggregate") return SamplerKind::aggregate;
  throw ConfigError(fmt::format("unknown sampler '{}'", name));
}

CountRecord sample_pulses(const BasisTables& tables, std::uint64_t seed, std::uint32_t basis_index,
                          std::uint64_t first, std::uint64_t count) {
  const auto weights = category_weights(tables.mixture);
  const AliasTable alias(weights);
  const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};

  std::array<std::uint64_t, kCategories> hits{};
  for (std::uint64_t k = first; k < first + count; ++k) {
    const auto block = Philox4x32::generate(
        {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32), basis_index, 0u}, key);
    const std::uint64_t column = (static_cast<std::uint64_t>(block[0]) << 32) | block[1];
    const std::uint64_t coin = ((static_cast<std::uint64_t>(block[2]) << 32) | block[3]) >> 11;
    ++hits[alias.sample(column, static_cast<double>(coin) * 0x1.0p-53)];
  }
  CountRecord rec;
  rec.basis = tables.basis;
  rec.pulses = count;
  for (std::size_t c = 0; c < kCategories; ++c) {
    if (hits[c] > 0) record_event(rec, c, hits[c]);
  }
  return rec;
}

CountRecord sample_aggregate(const BasisTables& tables, std::uint64_t seed, std::uint32_t basis_index,
                             std::uint64_t pulses) {
  const auto weights = category_weights(tables.mixture);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), basis_index, 0xA66u};
  std::mt19937_64 rng(seq);

  // Rarest categories first; each binomial uses the directly summed mass of
  // the categories still open, which keeps tiny probabilities accurate.
  std::array<std::size_t, kCategories> order{};
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return weights[a] < weights[b]; });

  CountRecord rec;
  rec.basis = tables.basis;
  rec.pulses = pulses;
  std::uint64_t left = pulses;
  for (std::size_t i = 0; i < kCategories && left > 0; ++i) {
    const std::size_t c = order[i];
    if (weights[c] == 0.0) continue;
    double open = 0.0;
    for (std::size_t j = i; j < kCategories; ++j) open += weights[order[j]];
    std::uint64_t k = left;
    if (i + 1 < kCategories) {
      const double p = std::min(1.0, weights[c] / open);
      if (p < 1.0) k = std::binomial_distribution<std::uint64_t>(left, p)(rng);
    }
    if (k > 0) record_event(rec, c, k);
    left -= k;
  }
  return rec;
}

CountRecord McResult::total() const {
  CountRecord t;
  for (const auto& r : records) t += r;
  return t;
}

McResult run_experiment(const ExperimentConfig& config, const OutcomeTables& tables, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  if (!config.pulses || *config.pulses == 0) throw ConfigError("pulses must be set and > 0");
  if (!config.seed) throw ConfigError("seed must be set");
  const std::uint64_t pulses = *config.pulses, seed = *config.seed;
  McResult result;
  result.sampler = options.sampler;
  if (result.sampler == SamplerKind::automatic) {
    result.sampler = pulses > kPerPulseLimit ? SamplerKind::aggregate : SamplerKind::per_pulse;
  }
  const unsigned threads = std::max(1u, options.threads);

  for (std::size_t b = 0; b < tables.bases.size(); ++b) {
    const auto& bt = tables.bases[b];
    const auto idx = static_cast<std::uint32_t>(b);
    CountRecord rec;
    if (result.sampler == SamplerKind::aggregate) {
      rec = sample_aggregate(bt, seed, idx, pulses);
    } else if (threads == 1) {
      rec = sample_pulses(bt, seed, idx, 0, pulses);
    } else {
      std::vector<CountRecord> shards(threads);
      std::vector<std::thread> pool;
      const std::uint64_t chunk = pulses / threads;
      for (unsigned t = 0; t < threads; ++t) {
        const std::uint64_t first = t * chunk;
        const std::uint64_t count = t + 1 == threads ? pulses - first : chunk;
        pool.emplace_back([&, t, first, count] { shards[t] = sample_pulses(bt, seed, idx, first, count); });
      }
      for (auto& th : pool) th.join();
      rec.basis = bt.basis;
      for (const auto& s : shards) rec += s;
    }
    if (options.progress) {
      options.progress(fmt::format("basis {}: {} pulses, n_t={} n_s={}", bt.basis.str(), rec.pulses, rec.n_t, rec.n_s));
    }
    result.records.push_back(rec);
  }

  const auto layout = config.layout();
  result.mean_output_efficiency = layout.mean_output_efficiency();
  const auto total = result.total();
  if (total.n_t > 0 && result.mean_output_efficiency > 0.0) {
    result.efficiency = eff_exp(total.n_s, total.n_t, result.mean_output_efficiency);
  }
  try {
    result.fidelity = estimate_fidelity(result.records);
    result.chsh = violates_chsh(*result.fidelity);
  } catch (const ConfigError&) {
  } catch (const UndefinedEstimate&) {
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

McResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  return run_experiment(config, precompute_outcome_tables(config), options);
}

FidelityEstimate estimate_fidelity(std::span<const CountRecord> records) {
  auto find = [&](Basis b) -> const CountRecord& {
    for (const auto& r : records) {
      if (r.basis.first == b && r.basis.second == b) return r;
    }
    throw ConfigError(fmt::format("fidelity needs the {} {} basis setting", basis_name(b), basis_name(b)));
  };
  const auto& hv = find(Basis::HV);
  const auto& da = find(Basis::DA);
  const auto& rl = find(Basis::RL);
  const auto zz = correlation_from_counts(hv.outcomes);
  const auto xx = correlation_from_counts(da.outcomes);
  const auto yy = correlation_from_counts(rl.outcomes);
  PauliCorrelation corr{xx.value, yy.value, zz.value, {xx.sigma, yy.sigma, zz.sigma}};
  return fidelity_phi_plus(corr);
}

}  // namespace heraldsim

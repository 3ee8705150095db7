#pragma once

// Pulse-level Monte Carlo driven by exact per-sector outcome tables.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "heraldsim/analysis.h"
#include "heraldsim/detection.h"
#include "heraldsim/optics.h"
#include "heraldsim/source.h"

namespace heraldsim {

struct SourceConfig {
  double p1 = 0.047;  ///< single-pair probability per pulse; fixes r
  unsigned n_max = 4;
  double visibility = 1.0;
  NoiseModel noise = NoiseModel::dephasing;
  double rep_rate = 76e6;

  bool operator==(const SourceConfig&) const = default;

  SpdcParams spdc() const;
  SourceNoise source_noise() const { return {visibility, noise}; }
  void validate() const;
};

struct ExperimentConfig {
  SourceConfig source;
  CircuitSpec circuit;
  std::vector<DetectorSpec> detectors;
  std::vector<std::string> herald;  ///< trigger detector ids; may be empty
  std::vector<BasisSetting> bases;
  std::optional<std::uint64_t> pulses;
  std::optional<std::uint64_t> seed;

  bool operator==(const ExperimentConfig&) const = default;

  DetectionLayout layout() const;
};

/// The standard three-basis setting (HV HV, DA DA, RL RL).
std::vector<BasisSetting> tomography_bases();

/// Outcome table of one (pair sector, noise branch) for one basis setting.
struct SectorTable {
  unsigned n_pairs = 0;
  double sector_weight = 0.0;  ///< p_n renormalized over n <= n_max
  double branch_weight = 0.0;  ///< noise-branch weight within the sector
  std::array<unsigned, 4> pair_types{};
  OutcomeTable table;
};

struct BasisTables {
  BasisSetting basis;
  std::vector<SectorTable> entries;
  /// Weighted sum of entries[i].table.events; what a single pulse samples.
  EventDistribution mixture;
};

struct OutcomeTables {
  std::vector<double> sector_weights;  ///< index n = pair number
  std::vector<BasisTables> bases;
};

OutcomeTables precompute_outcome_tables(const ExperimentConfig& config);

/// Philox4x32-10 counter-based generator (one block per call).
struct Philox4x32 {
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;
  static Block generate(Block counter, Key key);
};

/// Walker/Vose alias table.
class AliasTable {
 public:
  explicit AliasTable(std::span<const double> weights);
  /// `column_bits` picks the column, `u` in [0,1) the coin.
  std::size_t sample(std::uint64_t column_bits, double u) const;
  std::size_t size() const { return prob_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

struct CountRecord {
  BasisSetting basis;
  std::uint64_t pulses = 0;
  std::uint64_t n_t = 0;  ///< all trigger detectors fired
  std::uint64_t n_s = 0;  ///< six-fold: triggers plus one detector per output arm
  OutcomeCounts outcomes{};
  std::uint64_t incomplete = 0;
  std::uint64_t ambiguous = 0;
  std::uint64_t dark_assisted_sixfold = 0;

  bool operator==(const CountRecord&) const = default;
  CountRecord& operator+=(const CountRecord& other);
  double duration(double rep_rate) const { return static_cast<double>(pulses) / rep_rate; }
};

enum class SamplerKind { automatic, per_pulse, aggregate };

std::string_view sampler_name(SamplerKind k);
SamplerKind parse_sampler(std::string_view name);

/// Above this pulse count `automatic` switches to the aggregate sampler.
inline constexpr std::uint64_t kPerPulseLimit = 1'000'000'000ULL;

/// Draws pulses [first, first + count) of one basis. Each pulse uses the
/// Philox block keyed by (seed, basis index, pulse index), so any split of a
/// pulse range into shards sums to the same record.
CountRecord sample_pulses(const BasisTables& tables, std::uint64_t seed, std::uint32_t basis_index,
                          std::uint64_t first, std::uint64_t count);

/// Multinomial draw of the event classes for `pulses` pulses at once
/// (sequential binomials, mt19937_64 seeded from seed and basis index).
CountRecord sample_aggregate(const BasisTables& tables, std::uint64_t seed, std::uint32_t basis_index,
                             std::uint64_t pulses);

struct RunOptions {
  unsigned threads = 1;
  SamplerKind sampler = SamplerKind::automatic;
  std::function<void(const std::string&)> progress;
};

struct McResult {
  std::vector<CountRecord> records;
  SamplerKind sampler = SamplerKind::per_pulse;
  double mean_output_efficiency = 0.0;
  std::optional<EfficiencyEstimate> efficiency;  ///< eff_exp over all bases; empty if n_t = 0
  std::optional<FidelityEstimate> fidelity;      ///< needs the three tomography bases
  std::optional<ChshCheck> chsh;
  double wall_seconds = 0.0;

  CountRecord total() const;
};

McResult run_experiment(const ExperimentConfig& config, const OutcomeTables& tables, const RunOptions& options = {});
McResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Pauli correlations from the HV HV (zz), DA DA (xx) and RL RL (yy) records,
/// then the phi+ fidelity. Throws ConfigError if a basis is missing.
FidelityEstimate estimate_fidelity(std::span<const CountRecord> records);

}  // namespace heraldsim

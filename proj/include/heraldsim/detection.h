#pragma once

// Detector models, loss, dark counts and herald conditioning.

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "heraldsim/fock.h"
#include "heraldsim/optics.h"

namespace heraldsim {

enum class DetectorKind { threshold, number_resolving };

std::string_view detector_kind_name(DetectorKind k);
DetectorKind parse_detector_kind(std::string_view name);

struct DetectorSpec {
  std::string id;
  ModeId mode;
  DetectorKind kind = DetectorKind::threshold;
  double coupling = 1.0;
  double quantum_efficiency = 1.0;
  double dark_rate = 0.0;  ///< counts per second
  double window = 0.0;     ///< coincidence window, seconds

  bool operator==(const DetectorSpec&) const = default;

  /// eta = p q, applied as a Bernoulli loss per photon.
  double efficiency() const { return coupling * quantum_efficiency; }
  /// Probability of a dark event in one window.
  double dark_probability() const { return dark_rate * window; }
  void validate() const;
};

/// Detector id -> clicked (threshold) or reported count (number-resolving).
using ClickPattern = std::map<std::string, unsigned>;
using ClickDistribution = std::map<ClickPattern, double>;

/// Inserts a loss channel of transmission eta before each detector and
/// traces the environment modes out (one branch per escape pattern).
MixedState apply_detector_losses(const PureState& state, std::span<const DetectorSpec> detectors);
MixedState apply_detector_losses(const MixedState& state, std::span<const DetectorSpec> detectors);

/// Click statistics of a state whose losses were already applied: photons
/// present at a detector mode are all registered. Dark events are
/// independent per detector and OR-ed into threshold clicks (+1 for
/// number-resolving detectors).
ClickDistribution click_distribution(const MixedState& lossy, std::span<const DetectorSpec> detectors);

/// Same distribution computed from the lossless state with per-photon
/// Bernoulli survival instead of the environment dilation.
ClickDistribution click_distribution_direct(const MixedState& lossless, std::span<const DetectorSpec> detectors);

/// Output modes in qubit order (c_H, c_V, d_H, d_V).
using OutputModes = std::array<ModeId, 4>;

/// Herald-class weights of the lossless circuit output.
struct HeraldDecomposition {
  double alpha_sq = 0.0;  ///< one photon per trigger mode, two output photons
  double beta_sq = 0.0;   ///< every trigger mode occupied, not the alpha class
  double gamma_sq = 0.0;  ///< everything else

  /// alpha^2 / (alpha^2 + beta^2); NaN if no term triggers.
  double ideal_efficiency() const;
};

struct HeraldResult {
  double herald_probability = 0.0;
  /// Unnormalized (c, d) polarization density matrix in the basis
  /// |HH>, |HV>, |VH>, |VV>; its trace is the preparation efficiency.
  Eigen::Matrix4cd output = Eigen::Matrix4cd::Zero();
  /// Weight of the vacuum / single-photon / multi-photon output sectors.
  double remainder = 0.0;
  double preparation_efficiency = std::numeric_limits<double>::quiet_NaN();
  std::optional<HeraldDecomposition> decomposition;

  bool heralded() const { return herald_probability > 0.0; }
  Eigen::Matrix4cd normalized_output() const;
  /// <phi+| rho |phi+> of the normalized qubit block.
  double fidelity_phi_plus() const;
};

/// Conditions `state` (circuit output, before detector loss) on every trigger
/// detector firing. Trigger losses and dark counts are applied here; the
/// output modes stay lossless.
HeraldResult herald(const MixedState& state, std::span<const DetectorSpec> detectors,
                    std::span<const std::string> trigger_ids, const OutputModes& outputs);

HeraldDecomposition decompose_s1(const PureState& state, std::span<const ModeId> trigger_modes,
                                 const OutputModes& outputs);

/// Bases for the two output analyzers.
struct BasisSetting {
  Basis first = Basis::HV;
  Basis second = Basis::HV;

  auto operator<=>(const BasisSetting&) const = default;
  bool operator==(const BasisSetting&) const = default;
  std::string str() const;
};

/// One output arm: two detectors behind an analyzer, pols[0] = first basis
/// vector outcome.
struct OutputArm {
  std::string spatial;
  std::array<std::string, 2> pols;
  std::array<std::string, 2> detector_ids;
};

/// Trigger detectors plus two output arms.
struct DetectionLayout {
  std::vector<DetectorSpec> detectors;
  std::vector<std::string> triggers;
  std::array<OutputArm, 2> arms;

  /// Non-trigger detectors must form two spatial arms with two detectors
  /// each; arms are ordered by spatial label, detectors within an arm by
  /// polarization label.
  static DetectionLayout from(std::vector<DetectorSpec> detectors, std::vector<std::string> triggers);

  const DetectorSpec& detector(std::string_view id) const;
  std::size_t index_of(std::string_view id) const;
  OutputModes output_modes() const;
  std::vector<ModeId> trigger_modes() const;
  double mean_trigger_efficiency() const;
  double mean_output_efficiency() const;
};

/// Layout for heralding_circuit(): four threshold triggers and two H/V arms.
DetectionLayout standard_layout(double eta_trigger, double eta_output, double dark_rate = 0.0,
                                double window = 0.0, DetectorKind trigger_kind = DetectorKind::threshold);

/// Event classes seen by the coincidence logic.
enum class EventClass : std::uint8_t {
  not_triggered = 0,
  incomplete = 1,   ///< triggered, some output arm silent
  ambiguous = 2,    ///< triggered, both detectors of an arm fired
  sixfold_00 = 3,   ///< outcome index = 3 + 2 * (first arm) + (second arm)
  sixfold_01 = 4,
  sixfold_10 = 5,
  sixfold_11 = 6,
};
inline constexpr std::size_t kEventClasses = 7;

/// Event class probabilities split by whether dark counts changed the class
/// relative to the photon-only outcome.
struct EventDistribution {
  std::array<double, kEventClasses> clean{};
  std::array<double, kEventClasses> dark_assisted{};

  double probability(EventClass c) const;
  double triggered() const;
  double sixfold() const;
  double sixfold_dark_assisted() const;
  double total() const;
  EventDistribution& operator+=(const EventDistribution& other);
  EventDistribution scaled(double w) const;
};

/// Outcome symbols: threshold {0, 1}; number-resolving {0, 1, 2 = two or more}.
struct PatternSpace {
  std::vector<unsigned> radix;
  std::vector<std::size_t> stride;

  explicit PatternSpace(std::span<const DetectorSpec> detectors);
  std::size_t size() const;
  unsigned symbol(std::size_t code, std::size_t detector) const { return (code / stride[detector]) % radix[detector]; }
};

struct OutcomeTable {
  std::vector<double> final_patterns;  ///< indexed by PatternSpace code, sums to 1
  EventDistribution events;
};

/// Exact click statistics of a lossless circuit output measured with the
/// output analyzers set to `basis`.
OutcomeTable outcome_table(const MixedState& lossless, const DetectionLayout& layout, BasisSetting basis);

/// Probability that all triggers and the two output detectors selected by
/// `outcome` (0 = first basis vector) fire, with the other detector of each
/// arm silent.
double sixfold_probability(const MixedState& lossless, const DetectionLayout& layout, BasisSetting basis,
                           std::array<unsigned, 2> outcome);

}  // namespace heraldsim

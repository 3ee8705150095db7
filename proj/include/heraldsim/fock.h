#pragma once

// Sparse multi-mode bosonic Fock states.
//
// Amplitudes are stored in the orthonormal occupation-number basis, so the
// norm and all outcome probabilities are plain sums of |amp|^2. Linear optical
// elements act by substituting creation operators (ModeTransform); the
// sqrt(n!) factors are applied when a basis state is expanded into an
// operator monomial and again when the result is folded back.

#include <complex>
#include <compare>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace heraldsim {

using Amplitude = std::complex<double>;

inline constexpr double kDropTolerance = 1e-12;
inline constexpr unsigned kDefaultPhotonLimit = 8;

/// A (spatial path, polarization) pair. Environment modes carry a spatial
/// label starting with '~', which the circuit DSL cannot produce.
struct ModeId {
  std::string spatial;
  std::string pol;

  auto operator<=>(const ModeId&) const = default;
  bool operator==(const ModeId&) const = default;

  bool is_environment() const { return !spatial.empty() && spatial.front() == '~'; }
  std::string str() const { return spatial + ":" + pol; }

  /// Parses "spatial:pol".
  static ModeId parse(std::string_view text);
};

/// Deterministic environment partner of `mode` (loss dilation). Distinct tags
/// give distinct environment modes for repeated losses on the same mode.
ModeId environment_mode(const ModeId& mode, std::string_view tag = {});

class FockBasisState {
 public:
  using Entry = std::pair<ModeId, unsigned>;

  FockBasisState() = default;
  /// Sorts, merges repeated modes and drops zero occupations.
  explicit FockBasisState(std::vector<Entry> occupations);

  unsigned count(const ModeId& mode) const;
  unsigned total() const;
  bool empty() const { return occ_.empty(); }
  const std::vector<Entry>& occupations() const { return occ_; }

  FockBasisState with_added(const ModeId& mode, unsigned n = 1) const;
  /// Occupations restricted to / with `modes` removed.
  FockBasisState restricted_to(std::span<const ModeId> modes) const;
  FockBasisState without(std::span<const ModeId> modes) const;

  /// Product of n! over modes.
  double factorial_product() const;

  std::string str() const;

  auto operator<=>(const FockBasisState&) const = default;
  bool operator==(const FockBasisState&) const = default;

 private:
  std::vector<Entry> occ_;
};

struct KetTerm {
  Amplitude amplitude;
  FockBasisState basis;
};

class PureState {
 public:
  using TermMap = std::map<FockBasisState, Amplitude>;

  explicit PureState(unsigned photon_limit = kDefaultPhotonLimit) : limit_(photon_limit) {}

  static PureState from_terms(std::span<const KetTerm> terms,
                              unsigned photon_limit = kDefaultPhotonLimit);

  /// Adds `amp` to the coefficient of `basis` (merging duplicates).
  void add(const FockBasisState& basis, Amplitude amp);
  /// Drops terms with |amp| <= tol.
  void prune(double tol = kDropTolerance);

  double norm_sq() const;
  PureState normalized() const;
  PureState scaled(Amplitude factor) const;

  Amplitude amplitude(const FockBasisState& basis) const;
  std::vector<ModeId> occupied_modes() const;
  unsigned max_photons() const;

  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  unsigned photon_limit() const { return limit_; }
  void set_photon_limit(unsigned limit) { limit_ = limit; }

  const TermMap& terms() const { return terms_; }
  TermMap::const_iterator begin() const { return terms_.begin(); }
  TermMap::const_iterator end() const { return terms_.end(); }

 private:
  TermMap terms_;
  unsigned limit_;
};

struct MixedBranch {
  double weight = 0.0;
  PureState state;
  std::string label;
};

/// Probabilistic mixture of normalized pure branches. Weights may sum to less
/// than one when the mixture describes a conditional or truncated state.
struct MixedState {
  std::vector<MixedBranch> branches;

  /// One branch carrying the norm of `state` as its weight.
  static MixedState from_pure(const PureState& state, std::string label = {});
  double total_weight() const;
};

/// Linear map on creation operators: each input mode is replaced by the
/// listed superposition of output modes. Coefficients are applied to
/// creation operators as written (for a unitary U on annihilation operators
/// in the real-coefficient case this is the same matrix).
struct ModeTransform {
  using Column = std::vector<std::pair<Amplitude, ModeId>>;
  std::map<ModeId, Column> columns;

  const Column& column(const ModeId& mode) const;
  bool covers(const ModeId& mode) const { return columns.contains(mode); }
  std::vector<ModeId> inputs() const;
  std::vector<ModeId> outputs() const;
  /// Adds identity columns for every mode in `modes` not already mapped.
  ModeTransform extended_identity(std::span<const ModeId> modes) const;
};

PureState make_vacuum(std::span<const ModeId> modes, unsigned photon_limit = kDefaultPhotonLimit);
PureState apply_creation(const PureState& state, const ModeId& mode);
Amplitude inner_product(const PureState& bra, const PureState& ket);
PureState substitute_modes(const PureState& state, const ModeTransform& transform);

struct Projection {
  PureState conditional;
  double probability = 0.0;
};

/// Conditions on exact occupations of the listed modes. With
/// `remaining_photons` set, the photon number outside the condition must also
/// match. The conditional state lives on the remaining modes.
Projection project_occupation(const PureState& state, const std::map<ModeId, unsigned>& condition,
                              std::optional<unsigned> remaining_photons = std::nullopt);

/// Measures (and discards) the occupation of `env_modes`: one branch per
/// pattern, weight = marginal probability.
MixedState branch_on_modes(const PureState& state, std::span<const ModeId> env_modes);

/// Canonical text form: one term per line, `re im | spatial:pol:count ...`.
std::string to_text(const PureState& state);
PureState from_text(std::string_view text, unsigned photon_limit = kDefaultPhotonLimit);

}  // namespace heraldsim

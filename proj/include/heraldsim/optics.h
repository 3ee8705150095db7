#pragma once

// Linear optical elements as creation-operator substitutions, and circuits
// made of them.

#include <array>
#include <string>
#include <variant>
#include <vector>

#include "heraldsim/fock.h"

namespace heraldsim {

/// Non-polarizing partially reflecting beam splitter. R and T are intensity
/// coefficients; loss is modelled separately, so R + T = 1.
struct BeamSplitterSpec {
  double R = 0.5;
  double T = 0.5;
  std::string input;
  std::string reflected_out;
  std::string transmitted_out;
  /// Extra phase (degrees) on the reflected port. Zero for the ideal circuit.
  double phase_deg = 0.0;

  bool operator==(const BeamSplitterSpec&) const = default;
};

struct WavePlateSpec {
  double angle_deg = 0.0;
  std::string target;
  std::array<std::string, 2> input_pols{"x", "y"};
  std::array<std::string, 2> output_pols{"x", "y"};

  bool operator==(const WavePlateSpec&) const = default;
};

/// Ideal PBS: the first polarization leaves on `<input>_t`, the second on
/// `<input>_r`.
struct PbsSpec {
  std::string input;
  std::array<std::string, 2> pols{"x", "y"};

  bool operator==(const PbsSpec&) const = default;
};

struct PhaseSpec {
  ModeId mode;
  double phi_deg = 0.0;

  bool operator==(const PhaseSpec&) const = default;
};

struct LossSpec {
  ModeId mode;
  double eta = 1.0;
  std::string tag;

  bool operator==(const LossSpec&) const = default;
};

using Element = std::variant<BeamSplitterSpec, WavePlateSpec, PbsSpec, PhaseSpec, LossSpec>;

/// Elements in propagation order acting on an initial mode universe.
struct CircuitSpec {
  std::vector<ModeId> input_modes;
  std::vector<Element> elements;

  bool operator==(const CircuitSpec&) const = default;

  /// Mode universe after all elements; throws ConfigError if an element's
  /// input modes do not exist at its position.
  std::vector<ModeId> output_modes() const;
  void validate() const { (void)output_modes(); }
};

ModeTransform beam_splitter(const BeamSplitterSpec& spec);
/// h -> cos2t h' + sin2t v',  v -> sin2t h' - cos2t v'.
ModeTransform half_wave_plate(const WavePlateSpec& spec);
ModeTransform polarizing_beam_splitter(const PbsSpec& spec);
ModeTransform phase_shift(const PhaseSpec& spec);
/// mode -> sqrt(eta) mode + sqrt(1 - eta) environment_mode(mode, tag).
ModeTransform loss_channel(const ModeId& mode, double eta, std::string_view tag = {});

/// Transform of one element, given the modes present at its input.
ModeTransform element_transform(const Element& element);

PureState apply_circuit(const PureState& state, const CircuitSpec& circuit);

struct IsometryReport {
  bool pass = false;
  double max_deviation = 0.0;
};

/// max |G - I| over the Gram matrix of the transform's columns.
IsometryReport validate_isometry(const ModeTransform& transform, double tol = 1e-9);

/// Local measurement bases for the output analyzers.
enum class Basis { HV, DA, RL };

std::string_view basis_name(Basis b);
Basis parse_basis(std::string_view name);

/// Maps lab polarizations (pols[0] = H, pols[1] = V) on `spatial` onto the
/// analyzer outputs: after the transform pols[0] counts photons in the first
/// basis vector (H, +, R) and pols[1] in the second (V, -, L).
ModeTransform analyzer_rotation(const std::string& spatial, const std::array<std::string, 2>& pols, Basis basis);

/// The heralding circuit: two partially reflecting beam splitters (a -> c/e,
/// b -> d/f), a HWP at -22.5 deg on f (outputs x', y'), and PBSs on e and f.
/// Trigger modes: e_t:x, e_r:y, f_t:x', f_r:y'. Output modes: c:x, c:y, d:x, d:y.
CircuitSpec heralding_circuit(double R);

/// Source modes a:x, a:y, b:x, b:y.
std::vector<ModeId> source_modes();

}  // namespace heraldsim

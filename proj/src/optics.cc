#include "heraldsim/optics.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <fmt/format.h>

#include "heraldsim/errors.h"

namespace heraldsim {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

ModeTransform beam_splitter(const BeamSplitterSpec& spec) {
  if (spec.R < 0.0 || spec.R > 1.0 || spec.T < 0.0 || spec.T > 1.0) {
    throw ConfigError(fmt::format("beam splitter R={} T={} outside [0,1]", spec.R, spec.T));
  }
  if (std::abs(spec.R + spec.T - 1.0) > 1e-9) {
    throw ConfigError(fmt::format("beam splitter R+T={} != 1", spec.R + spec.T));
  }
  const Amplitude r = std::polar(std::sqrt(spec.R), spec.phase_deg * kDeg);
  const Amplitude t = std::sqrt(spec.T);
  ModeTransform tr;
  for (const char* pol : {"x", "y"}) {
    tr.columns[{spec.input, pol}] = {{r, {spec.reflected_out, pol}}, {t, {spec.transmitted_out, pol}}};
  }
  return tr;
}

ModeTransform half_wave_plate(const WavePlateSpec& spec) {
  if (!(spec.angle_deg > -90.0 && spec.angle_deg <= 90.0)) {
    throw ConfigError(fmt::format("wave plate angle {} outside (-90, 90]", spec.angle_deg));
  }
  const double c = std::cos(2.0 * spec.angle_deg * kDeg);
  const double s = std::sin(2.0 * spec.angle_deg * kDeg);
  const ModeId h_out{spec.target, spec.output_pols[0]};
  const ModeId v_out{spec.target, spec.output_pols[1]};
  ModeTransform tr;
  tr.columns[{spec.target, spec.input_pols[0]}] = {{c, h_out}, {s, v_out}};
  tr.columns[{spec.target, spec.input_pols[1]}] = {{s, h_out}, {-c, v_out}};
  return tr;
}

ModeTransform polarizing_beam_splitter(const PbsSpec& spec) {
  ModeTransform tr;
  tr.columns[{spec.input, spec.pols[0]}] = {{1.0, {spec.input + "_t", spec.pols[0]}}};
  tr.columns[{spec.input, spec.pols[1]}] = {{1.0, {spec.input + "_r", spec.pols[1]}}};
  return tr;
}

ModeTransform phase_shift(const PhaseSpec& spec) {
  ModeTransform tr;
  tr.columns[spec.mode] = {{std::polar(1.0, spec.phi_deg * kDeg), spec.mode}};
  return tr;
}

ModeTransform loss_channel(const ModeId& mode, double eta, std::string_view tag) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw ConfigError(fmt::format("loss transmission {} for {} outside [0,1]", eta, mode.str()));
  }
  ModeTransform tr;
  auto& col = tr.columns[mode];
  if (eta > 0.0) col.emplace_back(std::sqrt(eta), mode);
  if (eta < 1.0) col.emplace_back(std::sqrt(1.0 - eta), environment_mode(mode, tag));
  return tr;
}

ModeTransform element_transform(const Element& element) {
  return std::visit(overloaded{
                        [](const BeamSplitterSpec& s) { return beam_splitter(s); },
                        [](const WavePlateSpec& s) { return half_wave_plate(s); },
                        [](const PbsSpec& s) { return polarizing_beam_splitter(s); },
                        [](const PhaseSpec& s) { return phase_shift(s); },
                        [](const LossSpec& s) { return loss_channel(s.mode, s.eta, s.tag); },
                    },
                    element);
}

std::vector<ModeId> CircuitSpec::output_modes() const {
  std::set<ModeId> universe(input_modes.begin(), input_modes.end());
  if (universe.size() != input_modes.size()) throw ConfigError("circuit input modes are not distinct");
  for (std::size_t i = 0; i < elements.size(); ++i) {
    auto tr = element_transform(elements[i]);
    for (const auto& m : tr.inputs()) {
      if (!universe.contains(m)) {
        throw ConfigError(fmt::format("element {} acts on mode {} which does not exist at that point", i + 1,
                                      m.str()));
      }
    }
    for (const auto& m : tr.inputs()) universe.erase(m);
    for (const auto& m : tr.outputs()) {
      if (universe.contains(m)) {
        throw ConfigError(fmt::format("element {} writes to mode {} which is already occupied", i + 1, m.str()));
      }
      universe.insert(m);
    }
  }
  return {universe.begin(), universe.end()};
}

PureState apply_circuit(const PureState& state, const CircuitSpec& circuit) {
  PureState current = state;
  for (const auto& element : circuit.elements) {
    auto modes = current.occupied_modes();
    current = substitute_modes(current, element_transform(element).extended_identity(modes));
  }
  return current;
}

IsometryReport validate_isometry(const ModeTransform& transform, double tol) {
  std::vector<std::map<ModeId, Amplitude>> cols;
  for (const auto& [_, col] : transform.columns) {
    std::map<ModeId, Amplitude> v;
    for (const auto& [c, m] : col) v[m] += c;
    cols.push_back(std::move(v));
  }
  double dev = 0.0;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      Amplitude g{};
      for (const auto& [m, c] : cols[i]) {
        auto it = cols[j].find(m);
        if (it != cols[j].end()) g += std::conj(c) * it->second;
      }
      dev = std::max(dev, std::abs(g - Amplitude(i == j ? 1.0 : 0.0)));
    }
  }
  return {dev <= tol, dev};
}

std::string_view basis_name(Basis b) {
  switch (b) {
    case Basis::HV:
      return "HV";
    case Basis::DA:
      return "DA";
    case Basis::RL:
      return "RL";
  }
  return "?";
}

Basis parse_basis(std::string_view name) {
  if (name == "HV") return Basis::HV;
  if (name == "DA") return Basis::DA;
  if (name == "RL") return Basis::RL;
  throw ConfigError(fmt::format("unknown basis '{}'", name));
}

ModeTransform analyzer_rotation(const std::string& spatial, const std::array<std::string, 2>& pols, Basis basis) {
  const ModeId first{spatial, pols[0]};
  const ModeId second{spatial, pols[1]};
  const double s = 1.0 / std::numbers::sqrt2;
  const Amplitude i{0.0, 1.0};
  ModeTransform tr;
  // Column entries are <b_k|h> and <b_k|v>.
  switch (basis) {
    case Basis::HV:
      tr.columns[first] = {{1.0, first}};
      tr.columns[second] = {{1.0, second}};
      break;
    case Basis::DA:
      tr.columns[first] = {{s, first}, {s, second}};
      tr.columns[second] = {{s, first}, {-s, second}};
      break;
    case Basis::RL:
      tr.columns[first] = {{s, first}, {s, second}};
      tr.columns[second] = {{-i * s, first}, {i * s, second}};
      break;
  }
  return tr;
}

CircuitSpec heralding_circuit(double R) {
  CircuitSpec c;
  c.input_modes = source_modes();
  c.elements.emplace_back(BeamSplitterSpec{R, 1.0 - R, "a", "c", "e"});
  c.elements.emplace_back(BeamSplitterSpec{R, 1.0 - R, "b", "d", "f"});
  c.elements.emplace_back(WavePlateSpec{-22.5, "f", {"x", "y"}, {"x'", "y'"}});
  c.elements.emplace_back(PbsSpec{"e", {"x", "y"}});
  c.elements.emplace_back(PbsSpec{"f", {"x'", "y'"}});
  return c;
}

std::vector<ModeId> source_modes() { return {{"a", "x"}, {"a", "y"}, {"b", "x"}, {"b", "y"}}; }

}  // namespace heraldsim

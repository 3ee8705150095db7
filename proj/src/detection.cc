#include "heraldsim/detection.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "heraldsim/errors.h"

namespace heraldsim {

namespace {

ModeTransform loss_transform(std::span<const DetectorSpec> detectors, std::vector<ModeId>& env_modes) {
  ModeTransform tr;
  for (const auto& d : detectors) {
    d.validate();
    if (tr.covers(d.mode)) throw ConfigError(fmt::format("two detectors share mode {}", d.mode.str()));
    auto single = loss_channel(d.mode, d.efficiency(), d.id);
    tr.columns[d.mode] = single.columns.at(d.mode);
    if (d.efficiency() < 1.0) env_modes.push_back(environment_mode(d.mode, d.id));
  }
  return tr;
}

void add_dark(ClickDistribution& out, const ClickPattern& photons, double weight,
              std::span<const DetectorSpec> detectors, std::size_t i = 0) {
  if (weight == 0.0) return;
  if (i == detectors.size()) {
    out[photons] += weight;
    return;
  }
  const auto& d = detectors[i];
  const double D = d.dark_probability();
  const unsigned s = photons.at(d.id);
  const unsigned bumped = d.kind == DetectorKind::threshold ? 1u : s + 1;
  if (D == 0.0 || bumped == s) {
    add_dark(out, photons, weight, detectors, i + 1);
    return;
  }
  add_dark(out, photons, weight * (1.0 - D), detectors, i + 1);
  ClickPattern fired = photons;
  fired[d.id] = bumped;
  add_dark(out, fired, weight * D, detectors, i + 1);
}

double binomial(unsigned n, unsigned k) {
  double c = 1.0;
  for (unsigned i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

// P(herald outcome | n photons reach the trigger after loss).
double trigger_fires(const DetectorSpec& d, unsigned n) {
  const double D = d.dark_probability();
  if (d.kind == DetectorKind::threshold) return n > 0 ? 1.0 : D;
  if (n == 0) return D;
  if (n == 1) return 1.0 - D;
  return 0.0;
}

int qubit_index(const FockBasisState& out, const OutputModes& modes) {
  const unsigned ch = out.count(modes[0]), cv = out.count(modes[1]);
  const unsigned dh = out.count(modes[2]), dv = out.count(modes[3]);
  if (ch + cv != 1 || dh + dv != 1) return -1;
  return 2 * (cv == 1 ? 1 : 0) + (dv == 1 ? 1 : 0);
}

}  // namespace

std::string_view detector_kind_name(DetectorKind k) { return k == DetectorKind::threshold ? "threshold" : "pnr"; }

DetectorKind parse_detector_kind(std::string_view name) {
  if (name == "threshold") return DetectorKind::threshold;
  if (name == "pnr") return DetectorKind::number_resolving;
  throw ConfigError(fmt::format("unknown detector kind '{}'", name));
}

void DetectorSpec::validate() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(coupling) || !in_unit(quantum_efficiency)) {
    throw ConfigError(fmt::format("detector {}: efficiency factors must lie in [0,1]", id));
  }
  if (!(dark_rate >= 0.0) || !(window >= 0.0)) {
    throw ConfigError(fmt::format("detector {}: dark rate and window must be >= 0", id));
  }
  if (!(dark_probability() < 1.0)) {
    throw ConfigError(fmt::format("detector {}: dark probability per window {} must be < 1", id, dark_probability()));
  }
}

// ---------------------------------------------------------------------------

MixedState apply_detector_losses(const PureState& state, std::span<const DetectorSpec> detectors) {
  std::vector<ModeId> env;
  auto tr = loss_transform(detectors, env);
  auto modes = state.occupied_modes();
  PureState dilated = substitute_modes(state, tr.extended_identity(modes));
  return branch_on_modes(dilated, env);
}

MixedState apply_detector_losses(const MixedState& state, std::span<const DetectorSpec> detectors) {
  MixedState out;
  for (const auto& b : state.branches) {
    for (auto& lb : apply_detector_losses(b.state, detectors).branches) {
      lb.weight *= b.weight;
      if (!b.label.empty()) lb.label = b.label + "; " + lb.label;
      out.branches.push_back(std::move(lb));
    }
  }
  return out;
}

ClickDistribution click_distribution(const MixedState& lossy, std::span<const DetectorSpec> detectors) {
  ClickDistribution photons;
  for (const auto& b : lossy.branches) {
    for (const auto& [basis, amp] : b.state) {
      ClickPattern p;
      for (const auto& d : detectors) {
        unsigned n = basis.count(d.mode);
        p[d.id] = d.kind == DetectorKind::threshold ? (n > 0 ? 1u : 0u) : n;
      }
      photons[p] += b.weight * std::norm(amp);
    }
  }
  ClickDistribution out;
  for (const auto& [p, w] : photons) add_dark(out, p, w, detectors);
  return out;
}

ClickDistribution click_distribution_direct(const MixedState& lossless, std::span<const DetectorSpec> detectors) {
  ClickDistribution photons;
  for (const auto& b : lossless.branches) {
    for (const auto& [basis, amp] : b.state) {
      // Enumerate surviving counts per detector.
      std::vector<std::pair<ClickPattern, double>> partial{{ClickPattern{}, b.weight * std::norm(amp)}};
      for (const auto& d : detectors) {
        const unsigned n = basis.count(d.mode);
        const double eta = d.efficiency();
        std::vector<std::pair<ClickPattern, double>> next;
        for (const auto& [pat, w] : partial) {
          for (unsigned k = 0; k <= n; ++k) {
            double pk = binomial(n, k) * std::pow(eta, k) * std::pow(1.0 - eta, n - k);
            if (pk == 0.0) continue;
            ClickPattern q = pat;
            q[d.id] = d.kind == DetectorKind::threshold ? (k > 0 ? 1u : 0u) : k;
            next.emplace_back(std::move(q), w * pk);
          }
        }
        partial.swap(next);
      }
      for (const auto& [pat, w] : partial) photons[pat] += w;
    }
  }
  ClickDistribution out;
  for (const auto& [p, w] : photons) add_dark(out, p, w, detectors);
  return out;
}

// ---------------------------------------------------------------------------

double HeraldDecomposition::ideal_efficiency() const {
  double denom = alpha_sq + beta_sq;
  return denom > 0.0 ? alpha_sq / denom : std::numeric_limits<double>::quiet_NaN();
}

Eigen::Matrix4cd HeraldResult::normalized_output() const {
  double tr = output.trace().real();
  if (tr <= 0.0) throw UndefinedEstimate("no weight in the one-photon-per-arm sector");
  return output / tr;
}

double HeraldResult::fidelity_phi_plus() const {
  Eigen::Vector4cd phi;
  phi << 1.0, 0.0, 0.0, 1.0;
  phi /= std::sqrt(2.0);
  return (phi.adjoint() * normalized_output() * phi)(0, 0).real();
}

HeraldResult herald(const MixedState& state, std::span<const DetectorSpec> detectors,
                    std::span<const std::string> trigger_ids, const OutputModes& outputs) {
  std::vector<DetectorSpec> triggers;
  for (const auto& id : trigger_ids) {
    auto it = std::find_if(detectors.begin(), detectors.end(), [&](const DetectorSpec& d) { return d.id == id; });
    if (it == detectors.end()) throw ConfigError(fmt::format("unknown trigger detector '{}'", id));
    triggers.push_back(*it);
  }
  const std::vector<ModeId> output_list(outputs.begin(), outputs.end());

  HeraldResult result;
  for (const auto& branch : state.branches) {
    for (const auto& lossy : apply_detector_losses(branch.state, triggers).branches) {
      const double w = branch.weight * lossy.weight;
      // Trigger (and any other non-output) occupations are measured, so each
      // distinct pattern contributes incoherently.
      std::map<FockBasisState, std::vector<std::pair<FockBasisState, Amplitude>>> groups;
      for (const auto& [basis, amp] : lossy.state) {
        groups[basis.without(output_list)].emplace_back(basis.restricted_to(output_list), amp);
      }
      for (const auto& [key, terms] : groups) {
        double fire = 1.0;
        for (const auto& t : triggers) fire *= trigger_fires(t, key.count(t.mode));
        if (fire == 0.0) continue;
        Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
        double norm = 0.0;
        for (const auto& [out, amp] : terms) {
          norm += std::norm(amp);
          int q = qubit_index(out, outputs);
          if (q >= 0) v[q] += amp;
        }
        result.herald_probability += w * fire * norm;
        result.output += (w * fire) * (v * v.adjoint());
      }
    }
  }
  if (result.heralded()) {
    result.output /= result.herald_probability;
    result.preparation_efficiency = result.output.trace().real();
    result.remainder = 1.0 - result.preparation_efficiency;
  } else {
    result.output.setZero();
    result.remainder = 0.0;
  }
  if (state.branches.size() == 1) {
    std::vector<ModeId> trig_modes;
    for (const auto& t : triggers) trig_modes.push_back(t.mode);
    auto dec = decompose_s1(state.branches.front().state, trig_modes, outputs);
    for (auto* x : {&dec.alpha_sq, &dec.beta_sq, &dec.gamma_sq}) *x *= state.branches.front().weight;
    result.decomposition = dec;
  }
  return result;
}

HeraldDecomposition decompose_s1(const PureState& state, std::span<const ModeId> trigger_modes,
                                 const OutputModes& outputs) {
  HeraldDecomposition d;
  for (const auto& [basis, amp] : state) {
    bool all_single = true, all_occupied = true;
    for (const auto& m : trigger_modes) {
      unsigned n = basis.count(m);
      all_single = all_single && n == 1;
      all_occupied = all_occupied && n >= 1;
    }
    unsigned out_photons = 0;
    for (const auto& m : outputs) out_photons += basis.count(m);
    const double p = std::norm(amp);
    if (all_single && out_photons == 2) {
      d.alpha_sq += p;
    } else if (all_occupied) {
      d.beta_sq += p;
    } else {
      d.gamma_sq += p;
    }
  }
  return d;
}

// ---------------------------------------------------------------------------

std::string BasisSetting::str() const { return fmt::format("{}{}", basis_name(first), basis_name(second)); }

DetectionLayout DetectionLayout::from(std::vector<DetectorSpec> detectors, std::vector<std::string> triggers) {
  DetectionLayout layout;
  std::set<std::string> ids;
  std::set<ModeId> modes;
  for (const auto& d : detectors) {
    d.validate();
    if (!ids.insert(d.id).second) throw ConfigError(fmt::format("duplicate detector id '{}'", d.id));
    if (!modes.insert(d.mode).second) throw ConfigError(fmt::format("two detectors watch mode {}", d.mode.str()));
  }
  std::set<std::string> trig(triggers.begin(), triggers.end());
  if (trig.size() != triggers.size()) throw ConfigError("herald lists a detector twice");
  for (const auto& t : triggers) {
    if (!ids.contains(t)) throw ConfigError(fmt::format("herald names unknown detector '{}'", t));
  }
  std::map<std::string, std::vector<const DetectorSpec*>> by_arm;
  for (const auto& d : detectors) {
    if (!trig.contains(d.id)) by_arm[d.mode.spatial].push_back(&d);
  }
  if (by_arm.size() != 2) {
    throw ConfigError(fmt::format("expected two output arms outside the herald, found {}", by_arm.size()));
  }
  std::size_t k = 0;
  for (auto& [spatial, ds] : by_arm) {
    if (ds.size() != 2) {
      throw ConfigError(fmt::format("output arm '{}' needs exactly two detectors, found {}", spatial, ds.size()));
    }
    std::sort(ds.begin(), ds.end(), [](const DetectorSpec* x, const DetectorSpec* y) { return x->mode < y->mode; });
    layout.arms[k++] = OutputArm{spatial, {ds[0]->mode.pol, ds[1]->mode.pol}, {ds[0]->id, ds[1]->id}};
  }
  layout.detectors = std::move(detectors);
  layout.triggers = std::move(triggers);
  return layout;
}

const DetectorSpec& DetectionLayout::detector(std::string_view id) const { return detectors[index_of(id)]; }

std::size_t DetectionLayout::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < detectors.size(); ++i) {
    if (detectors[i].id == id) return i;
  }
  throw ConfigError(fmt::format("unknown detector '{}'", id));
}

OutputModes DetectionLayout::output_modes() const {
  return {ModeId{arms[0].spatial, arms[0].pols[0]}, ModeId{arms[0].spatial, arms[0].pols[1]},
          ModeId{arms[1].spatial, arms[1].pols[0]}, ModeId{arms[1].spatial, arms[1].pols[1]}};
}

std::vector<ModeId> DetectionLayout::trigger_modes() const {
  std::vector<ModeId> out;
  for (const auto& t : triggers) out.push_back(detector(t).mode);
  return out;
}

double DetectionLayout::mean_trigger_efficiency() const {
  if (triggers.empty()) return 1.0;
  double s = 0.0;
  for (const auto& t : triggers) s += detector(t).efficiency();
  return s / triggers.size();
}

double DetectionLayout::mean_output_efficiency() const {
  double s = 0.0;
  for (const auto& arm : arms) {
    for (const auto& id : arm.detector_ids) s += detector(id).efficiency();
  }
  return s / 4.0;
}

DetectionLayout standard_layout(double eta_trigger, double eta_output, double dark_rate, double window,
                                DetectorKind trigger_kind) {
  auto det = [&](std::string id, ModeId mode, DetectorKind kind, double eta) {
    return DetectorSpec{std::move(id), std::move(mode), kind, eta, 1.0, dark_rate, window};
  };
  std::vector<DetectorSpec> ds{
      det("t1", {"e_t", "x"}, trigger_kind, eta_trigger),  det("t2", {"e_r", "y"}, trigger_kind, eta_trigger),
      det("t3", {"f_t", "x'"}, trigger_kind, eta_trigger), det("t4", {"f_r", "y'"}, trigger_kind, eta_trigger),
      det("s1", {"c", "x"}, DetectorKind::threshold, eta_output),
      det("s2", {"c", "y"}, DetectorKind::threshold, eta_output),
      det("s3", {"d", "x"}, DetectorKind::threshold, eta_output),
      det("s4", {"d", "y"}, DetectorKind::threshold, eta_output),
  };
  return DetectionLayout::from(std::move(ds), {"t1", "t2", "t3", "t4"});
}

// ---------------------------------------------------------------------------

double EventDistribution::probability(EventClass c) const {
  auto i = static_cast<std::size_t>(c);
  return clean[i] + dark_assisted[i];
}

double EventDistribution::triggered() const { return total() - probability(EventClass::not_triggered); }

double EventDistribution::sixfold() const {
  double s = 0.0;
  for (std::size_t i = 3; i < kEventClasses; ++i) s += clean[i] + dark_assisted[i];
  return s;
}

double EventDistribution::sixfold_dark_assisted() const {
  double s = 0.0;
  for (std::size_t i = 3; i < kEventClasses; ++i) s += dark_assisted[i];
  return s;
}

double EventDistribution::total() const {
  double s = 0.0;
  for (std::size_t i = 0; i < kEventClasses; ++i) s += clean[i] + dark_assisted[i];
  return s;
}

EventDistribution& EventDistribution::operator+=(const EventDistribution& other) {
  for (std::size_t i = 0; i < kEventClasses; ++i) {
    clean[i] += other.clean[i];
    dark_assisted[i] += other.dark_assisted[i];
  }
  return *this;
}

EventDistribution EventDistribution::scaled(double w) const {
  EventDistribution e = *this;
  for (std::size_t i = 0; i < kEventClasses; ++i) {
    e.clean[i] *= w;
    e.dark_assisted[i] *= w;
  }
  return e;
}

PatternSpace::PatternSpace(std::span<const DetectorSpec> detectors) {
  std::size_t s = 1;
  for (const auto& d : detectors) {
    radix.push_back(d.kind == DetectorKind::threshold ? 2 : 3);
    stride.push_back(s);
    s *= radix.back();
  }
}

std::size_t PatternSpace::size() const {
  return radix.empty() ? 1 : stride.back() * radix.back();
}

namespace {

EventClass classify(std::size_t code, const PatternSpace& space, const std::vector<std::size_t>& trig_idx,
                    const std::array<std::array<std::size_t, 2>, 2>& arm_idx) {
  for (auto t : trig_idx) {
    if (space.symbol(code, t) != 1) return EventClass::not_triggered;
  }
  std::array<unsigned, 2> outcome{};
  bool incomplete = false;
  for (std::size_t a = 0; a < 2; ++a) {
    const bool c0 = space.symbol(code, arm_idx[a][0]) >= 1;
    const bool c1 = space.symbol(code, arm_idx[a][1]) >= 1;
    if (c0 && c1) return EventClass::ambiguous;
    if (!c0 && !c1) incomplete = true;
    outcome[a] = c1 ? 1 : 0;
  }
  if (incomplete) return EventClass::incomplete;
  return static_cast<EventClass>(3 + 2 * outcome[0] + outcome[1]);
}

}  // namespace

OutcomeTable outcome_table(const MixedState& lossless, const DetectionLayout& layout, BasisSetting basis) {
  const auto& dets = layout.detectors;
  const PatternSpace space(dets);
  const std::size_t n_det = dets.size();

  ModeTransform rotation;
  for (std::size_t a = 0; a < 2; ++a) {
    auto r = analyzer_rotation(layout.arms[a].spatial, layout.arms[a].pols, a == 0 ? basis.first : basis.second);
    rotation.columns.insert(r.columns.begin(), r.columns.end());
  }

  // Photon-only pattern distribution (losses as per-photon Bernoulli trials).
  std::vector<double> photon(space.size(), 0.0);
  std::vector<std::pair<std::size_t, double>> partial, next;
  std::vector<std::array<double, 3>> per_det(n_det);
  for (const auto& branch : lossless.branches) {
    const auto modes = branch.state.occupied_modes();
    const PureState rotated = substitute_modes(branch.state, rotation.extended_identity(modes));
    for (const auto& [b, amp] : rotated) {
      partial.assign(1, {0, branch.weight * std::norm(amp)});
      for (std::size_t i = 0; i < n_det; ++i) {
        const unsigned n = b.count(dets[i].mode);
        if (n == 0) continue;
        const double eta = dets[i].efficiency();
        const double q0 = std::pow(1.0 - eta, n);
        std::array<double, 3> q{};
        if (space.radix[i] == 2) {
          q = {q0, 1.0 - q0, 0.0};
        } else {
          const double q1 = n * eta * std::pow(1.0 - eta, n - 1);
          q = {q0, q1, std::max(0.0, 1.0 - q0 - q1)};
        }
        next.clear();
        for (const auto& [code, w] : partial) {
          for (unsigned s = 0; s < space.radix[i]; ++s) {
            if (q[s] != 0.0) next.emplace_back(code + s * space.stride[i], w * q[s]);
          }
        }
        partial.swap(next);
      }
      for (const auto& [code, w] : partial) photon[code] += w;
    }
  }

  std::vector<std::size_t> trig_idx;
  for (const auto& t : layout.triggers) trig_idx.push_back(layout.index_of(t));
  std::array<std::array<std::size_t, 2>, 2> arm_idx{};
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t k = 0; k < 2; ++k) arm_idx[a][k] = layout.index_of(layout.arms[a].detector_ids[k]);
  }

  OutcomeTable table;
  table.final_patterns.assign(space.size(), 0.0);
  for (std::size_t p = 0; p < photon.size(); ++p) {
    if (photon[p] == 0.0) continue;
    const EventClass photon_class = classify(p, space, trig_idx, arm_idx);
    partial.assign(1, {p, photon[p]});
    for (std::size_t i = 0; i < n_det; ++i) {
      const double D = dets[i].dark_probability();
      if (D == 0.0) continue;
      next.clear();
      for (const auto& [code, w] : partial) {
        const unsigned s = space.symbol(code, i);
        const unsigned bumped = space.radix[i] == 2 ? 1 : std::min(s + 1, 2u);
        if (bumped == s) {
          next.emplace_back(code, w);
        } else {
          next.emplace_back(code, w * (1.0 - D));
          next.emplace_back(code + (bumped - s) * space.stride[i], w * D);
        }
      }
      partial.swap(next);
    }
    for (const auto& [f, w] : partial) {
      table.final_patterns[f] += w;
      const EventClass c = classify(f, space, trig_idx, arm_idx);
      auto& bucket = (c == photon_class && f == p) ? table.events.clean : table.events.dark_assisted;
      bucket[static_cast<std::size_t>(c)] += w;
    }
  }
  return table;
}

double sixfold_probability(const MixedState& lossless, const DetectionLayout& layout, BasisSetting basis,
                           std::array<unsigned, 2> outcome) {
  auto table = outcome_table(lossless, layout, basis);
  return table.events.probability(static_cast<EventClass>(3 + 2 * outcome[0] + outcome[1]));
}

}  // namespace heraldsim

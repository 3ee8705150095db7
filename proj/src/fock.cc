#include "heraldsim/fock.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "heraldsim/errors.h"

namespace heraldsim {

namespace {

double factorial(unsigned n) {
  double f = 1.0;
  for (unsigned k = 2; k <= n; ++k) f *= k;
  return f;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view token) {
  // from_chars for double is available in libstdc++ >= 11.
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ConfigError(fmt::format("bad number '{}' in state text", token));
  }
  return value;
}

}  // namespace

ModeId ModeId::parse(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size() ||
      text.find(':', colon + 1) != std::string_view::npos) {
    throw ConfigError(fmt::format("mode '{}' is not of the form spatial:pol", text));
  }
  return ModeId{std::string(text.substr(0, colon)), std::string(text.substr(colon + 1))};
}

ModeId environment_mode(const ModeId& mode, std::string_view tag) {
  std::string spatial = "~" + mode.spatial;
  if (!tag.empty()) {
    spatial += "#";
    spatial += tag;
  }
  return ModeId{std::move(spatial), mode.pol};
}

// ---------------------------------------------------------------------------

FockBasisState::FockBasisState(std::vector<Entry> occupations) {
  std::sort(occupations.begin(), occupations.end(),
            [](const Entry& x, const Entry& y) { return x.first < y.first; });
  for (auto& [mode, n] : occupations) {
    if (n == 0) continue;
    if (!occ_.empty() && occ_.back().first == mode) {
      occ_.back().second += n;
    } else {
      occ_.emplace_back(std::move(mode), n);
    }
  }
}

unsigned FockBasisState::count(const ModeId& mode) const {
  auto it = std::lower_bound(occ_.begin(), occ_.end(), mode,
                             [](const Entry& e, const ModeId& m) { return e.first < m; });
  return (it != occ_.end() && it->first == mode) ? it->second : 0;
}

unsigned FockBasisState::total() const {
  unsigned n = 0;
  for (const auto& e : occ_) n += e.second;
  return n;
}

FockBasisState FockBasisState::with_added(const ModeId& mode, unsigned n) const {
  FockBasisState out = *this;
  if (n == 0) return out;
  auto it = std::lower_bound(out.occ_.begin(), out.occ_.end(), mode,
                             [](const Entry& e, const ModeId& m) { return e.first < m; });
  if (it != out.occ_.end() && it->first == mode) {
    it->second += n;
  } else {
    out.occ_.insert(it, Entry{mode, n});
  }
  return out;
}

FockBasisState FockBasisState::restricted_to(std::span<const ModeId> modes) const {
  FockBasisState out;
  for (const auto& e : occ_) {
    if (std::find(modes.begin(), modes.end(), e.first) != modes.end()) out.occ_.push_back(e);
  }
  return out;
}

FockBasisState FockBasisState::without(std::span<const ModeId> modes) const {
  FockBasisState out;
  for (const auto& e : occ_) {
    if (std::find(modes.begin(), modes.end(), e.first) == modes.end()) out.occ_.push_back(e);
  }
  return out;
}

double FockBasisState::factorial_product() const {
  double f = 1.0;
  for (const auto& e : occ_) f *= factorial(e.second);
  return f;
}

std::string FockBasisState::str() const {
  std::string s;
  for (const auto& [mode, n] : occ_) {
    if (!s.empty()) s += ' ';
    s += fmt::format("{}:{}", mode.str(), n);
  }
  return s;
}

// ---------------------------------------------------------------------------

PureState PureState::from_terms(std::span<const KetTerm> terms, unsigned photon_limit) {
  PureState s(photon_limit);
  for (const auto& t : terms) s.add(t.basis, t.amplitude);
  return s;
}

void PureState::add(const FockBasisState& basis, Amplitude amp) {
  if (basis.total() > limit_) {
    throw OverflowError(fmt::format("basis state '{}' exceeds the photon limit {}", basis.str(), limit_));
  }
  terms_[basis] += amp;
}

void PureState::prune(double tol) {
  std::erase_if(terms_, [tol](const auto& kv) { return std::abs(kv.second) <= tol; });
}

double PureState::norm_sq() const {
  double n = 0.0;
  for (const auto& [_, amp] : terms_) n += std::norm(amp);
  return n;
}

PureState PureState::normalized() const {
  double n = norm_sq();
  if (n <= 0.0) throw DomainError("cannot normalize a zero state");
  return scaled(1.0 / std::sqrt(n));
}

PureState PureState::scaled(Amplitude factor) const {
  PureState out(limit_);
  for (const auto& [basis, amp] : terms_) out.terms_.emplace_hint(out.terms_.end(), basis, amp * factor);
  return out;
}

Amplitude PureState::amplitude(const FockBasisState& basis) const {
  auto it = terms_.find(basis);
  return it == terms_.end() ? Amplitude{} : it->second;
}

std::vector<ModeId> PureState::occupied_modes() const {
  std::set<ModeId> modes;
  for (const auto& [basis, _] : terms_) {
    for (const auto& e : basis.occupations()) modes.insert(e.first);
  }
  return {modes.begin(), modes.end()};
}

unsigned PureState::max_photons() const {
  unsigned n = 0;
  for (const auto& [basis, _] : terms_) n = std::max(n, basis.total());
  return n;
}

MixedState MixedState::from_pure(const PureState& state, std::string label) {
  MixedState m;
  double w = state.norm_sq();
  if (w > 0.0) m.branches.push_back({w, state.normalized(), std::move(label)});
  return m;
}

double MixedState::total_weight() const {
  double w = 0.0;
  for (const auto& b : branches) w += b.weight;
  return w;
}

// ---------------------------------------------------------------------------

const ModeTransform::Column& ModeTransform::column(const ModeId& mode) const {
  auto it = columns.find(mode);
  if (it == columns.end()) {
    throw ConfigError(fmt::format("transform does not map occupied mode {}", mode.str()));
  }
  return it->second;
}

std::vector<ModeId> ModeTransform::inputs() const {
  std::vector<ModeId> out;
  out.reserve(columns.size());
  for (const auto& [m, _] : columns) out.push_back(m);
  return out;
}

std::vector<ModeId> ModeTransform::outputs() const {
  std::set<ModeId> out;
  for (const auto& [_, col] : columns) {
    for (const auto& [c, m] : col) out.insert(m);
  }
  return {out.begin(), out.end()};
}

ModeTransform ModeTransform::extended_identity(std::span<const ModeId> modes) const {
  ModeTransform t = *this;
  for (const auto& m : modes) {
    if (!t.columns.contains(m)) t.columns[m] = {{Amplitude{1.0}, m}};
  }
  return t;
}

// ---------------------------------------------------------------------------

PureState make_vacuum(std::span<const ModeId> modes, unsigned photon_limit) {
  std::set<ModeId> seen;
  for (const auto& m : modes) {
    if (!seen.insert(m).second) throw ConfigError(fmt::format("duplicate mode {}", m.str()));
  }
  PureState s(photon_limit);
  s.add(FockBasisState{}, 1.0);
  return s;
}

PureState apply_creation(const PureState& state, const ModeId& mode) {
  PureState out(state.photon_limit());
  for (const auto& [basis, amp] : state) {
    if (basis.total() + 1 > state.photon_limit()) {
      throw OverflowError(fmt::format("creating a photon in {} exceeds the photon limit {}", mode.str(),
                                      state.photon_limit()));
    }
    unsigned n = basis.count(mode);
    out.add(basis.with_added(mode), amp * std::sqrt(static_cast<double>(n + 1)));
  }
  return out;
}

Amplitude inner_product(const PureState& bra, const PureState& ket) {
  const auto& small = bra.size() <= ket.size() ? bra : ket;
  const auto& large = bra.size() <= ket.size() ? ket : bra;
  Amplitude acc{};
  for (const auto& [basis, amp] : small) {
    auto other = large.amplitude(basis);
    if (&small == &bra) {
      acc += std::conj(amp) * other;
    } else {
      acc += std::conj(other) * amp;
    }
  }
  return acc;
}

PureState substitute_modes(const PureState& state, const ModeTransform& transform) {
  PureState out(state.photon_limit());
  std::map<FockBasisState, Amplitude> poly, next;
  for (const auto& [basis, amp] : state) {
    // Expand prod_m (sum_j c_j o_j^dag)^{n_m} / sqrt(prod n_m!) as an operator
    // polynomial; monomial coefficients are converted back to basis
    // amplitudes by sqrt(prod k!).
    poly.clear();
    poly.emplace(FockBasisState{}, amp / std::sqrt(basis.factorial_product()));
    for (const auto& [mode, n] : basis.occupations()) {
      const auto& col = transform.column(mode);
      for (unsigned k = 0; k < n; ++k) {
        next.clear();
        for (const auto& [mono, c] : poly) {
          for (const auto& [coef, target] : col) {
            if (coef == Amplitude{}) continue;
            next[mono.with_added(target)] += c * coef;
          }
        }
        poly.swap(next);
      }
    }
    for (const auto& [mono, c] : poly) out.add(mono, c * std::sqrt(mono.factorial_product()));
  }
  out.prune();
  return out;
}

Projection project_occupation(const PureState& state, const std::map<ModeId, unsigned>& condition,
                              std::optional<unsigned> remaining_photons) {
  std::vector<ModeId> cond_modes;
  for (const auto& [m, _] : condition) cond_modes.push_back(m);

  Projection result{PureState(state.photon_limit()), 0.0};
  for (const auto& [basis, amp] : state) {
    bool match = true;
    for (const auto& [m, n] : condition) {
      if (basis.count(m) != n) {
        match = false;
        break;
      }
    }
    if (!match) continue;
    FockBasisState rest = basis.without(cond_modes);
    if (remaining_photons && rest.total() != *remaining_photons) continue;
    result.conditional.add(rest, amp);
    result.probability += std::norm(amp);
  }
  if (result.probability > 0.0) {
    result.conditional = result.conditional.normalized();
  } else {
    result.conditional = PureState(state.photon_limit());
  }
  return result;
}

MixedState branch_on_modes(const PureState& state, std::span<const ModeId> env_modes) {
  std::map<FockBasisState, PureState> groups;
  for (const auto& [basis, amp] : state) {
    auto key = basis.restricted_to(env_modes);
    auto [it, inserted] = groups.try_emplace(key, state.photon_limit());
    it->second.add(basis.without(env_modes), amp);
  }
  MixedState mixed;
  for (auto& [key, branch] : groups) {
    double w = branch.norm_sq();
    if (w <= 0.0) continue;
    mixed.branches.push_back({w, branch.normalized(), key.str()});
  }
  return mixed;
}

// ---------------------------------------------------------------------------

std::string to_text(const PureState& state) {
  std::string out;
  for (const auto& [basis, amp] : state) {
    out += fmt::format("{:.17g} {:.17g} |", amp.real(), amp.imag());
    for (const auto& [mode, n] : basis.occupations()) out += fmt::format(" {}:{}", mode.str(), n);
    out += '\n';
  }
  return out;
}

PureState from_text(std::string_view text, unsigned photon_limit) {
  PureState s(photon_limit);
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;

    auto bar = line.find('|');
    if (bar == std::string_view::npos) {
      throw ConfigError(fmt::format("state text line {}: missing '|'", line_no));
    }
    std::istringstream amps{std::string(line.substr(0, bar))};
    std::string re, im;
    if (!(amps >> re >> im)) throw ConfigError(fmt::format("state text line {}: expected two numbers", line_no));

    std::vector<FockBasisState::Entry> occ;
    std::istringstream modes{std::string(line.substr(bar + 1))};
    std::string tok;
    while (modes >> tok) {
      auto last = tok.rfind(':');
      if (last == std::string::npos) throw ConfigError(fmt::format("state text line {}: bad mode '{}'", line_no, tok));
      auto mode = ModeId::parse(std::string_view(tok).substr(0, last));
      unsigned n = 0;
      auto cnt = std::string_view(tok).substr(last + 1);
      auto [ptr, ec] = std::from_chars(cnt.data(), cnt.data() + cnt.size(), n);
      if (ec != std::errc() || ptr != cnt.data() + cnt.size()) {
        throw ConfigError(fmt::format("state text line {}: bad count in '{}'", line_no, tok));
      }
      occ.emplace_back(std::move(mode), n);
    }
    s.add(FockBasisState(std::move(occ)), Amplitude(parse_double(re), parse_double(im)));
  }
  return s;
}

}  // namespace heraldsim

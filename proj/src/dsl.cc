#include "heraldsim/dsl.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace heraldsim {

namespace {

constexpr std::string_view kKeywords = "source, bs, hwp, pbs, phase, detector, herald, basis, pulses, duration, seed";

bool token_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '\'' ||
         c == '.' || c == ',' || c == ':' || c == '=' || c == '+' || c == '-';
}

bool label_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '\'';
}

std::string printable(char c) {
  auto u = static_cast<unsigned char>(c);
  if (u >= 0x20 && u < 0x7f) return std::string(1, c);
  return fmt::format("\\x{:02x}", u);
}

std::string fmt_double(double v) { return fmt::format("{}", v); }

// Key/value arguments of one stanza.
class Args {
 public:
  Args(const Stanza& st, std::initializer_list<std::string_view> allowed) : st_(st) {
    for (const auto& tok : st.args) {
      const auto eq = tok.text.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw ParseError(fmt::format("expected key=value, got '{}'", tok.text), tok.location,
                         fmt::format("{} takes key=value arguments", st.keyword));
      }
      std::string key = tok.text.substr(0, eq);
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        std::string keys;
        for (auto k : allowed) keys += fmt::format("{}{}", keys.empty() ? "" : ", ", k);
        throw ParseError(fmt::format("unknown key '{}' for {}", key, st.keyword), tok.location,
                         fmt::format("allowed keys: {}", keys));
      }
      if (eq + 1 == tok.text.size()) {
        throw ParseError(fmt::format("empty value for '{}'", key), tok.location, "write key=value with no spaces");
      }
      if (values_.contains(key)) {
        throw ParseError(fmt::format("key '{}' given twice", key), tok.location, "remove the duplicate");
      }
      SourceLocation loc = tok.location;
      loc.column += eq + 1;
      values_.emplace(std::move(key), Token{tok.text.substr(eq + 1), loc});
    }
  }

  bool has(const std::string& key) const { return values_.contains(key); }

  const Token& get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) {
      throw ParseError(fmt::format("{} needs {}=", st_.keyword, key), st_.location,
                       fmt::format("add {}=<value> to this line", key));
    }
    return it->second;
  }

 private:
  const Stanza& st_;
  std::map<std::string, Token> values_;
};

double to_double(const Token& t, std::string_view what) {
  std::string_view s = t.text;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError(fmt::format("{} expects a number, got '{}'", what, t.text), t.location,
                     "use a decimal such as 0.486 or 1.2e-8");
  }
  return v;
}

std::uint64_t to_uint(const Token& t, std::string_view what) {
  std::string_view s = t.text;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(fmt::format("{} expects a non-negative integer, got '{}'", what, t.text), t.location,
                     "integers are written without sign, decimal point or exponent");
  }
  return v;
}

std::string to_label(const Token& t, std::string_view what) {
  if (t.text.empty() || !std::all_of(t.text.begin(), t.text.end(), label_char)) {
    throw ParseError(fmt::format("{} '{}' is not a valid label", what, t.text), t.location,
                     "labels use letters, digits, '_' and \"'\"");
  }
  return t.text;
}

std::array<std::string, 2> to_label_pair(const Token& t, std::string_view what) {
  const auto comma = t.text.find(',');
  if (comma == std::string::npos || t.text.find(',', comma + 1) != std::string::npos) {
    throw ParseError(fmt::format("{} expects two labels separated by a comma, got '{}'", what, t.text), t.location,
                     "e.g. out=x',y'");
  }
  Token a{t.text.substr(0, comma), t.location};
  Token b{t.text.substr(comma + 1), {t.location.line, t.location.column + comma + 1}};
  auto pa = to_label(a, what), pb = to_label(b, what);
  if (pa == pb) throw ParseError(fmt::format("{} names the same label twice", what), t.location, "use two labels");
  return {pa, pb};
}

ModeId to_mode(const Token& t, std::string_view what) {
  const auto colon = t.text.find(':');
  if (colon == std::string::npos) {
    throw ParseError(fmt::format("{} expects spatial:pol, got '{}'", what, t.text), t.location, "e.g. mode=e_t:x");
  }
  Token s{t.text.substr(0, colon), t.location};
  Token p{t.text.substr(colon + 1), {t.location.line, t.location.column + colon + 1}};
  return {to_label(s, what), to_label(p, what)};
}

void require_range(bool ok, const Token& t, const std::string& message, const std::string& hint) {
  if (!ok) throw ParseError(message, t.location, hint);
}

void require_positional(const Stanza& st, std::size_t n) {
  if (st.args.size() != n) {
    throw ParseError(fmt::format("{} takes {} argument{}, got {}", st.keyword, n, n == 1 ? "" : "s", st.args.size()),
                     st.location, fmt::format("write: {}", st.keyword == "basis" ? "basis HV HV" : st.keyword + " <value>"));
  }
}

// Tracks the modes present after each element, for inference and checks.
class ModeUniverse {
 public:
  ModeUniverse() {
    for (const auto& m : source_modes()) modes_.insert(m);
  }

  std::array<std::string, 2> pols_on(const std::string& spatial, const Stanza& st, std::string_view key) const {
    std::vector<std::string> pols;
    for (const auto& m : modes_) {
      if (m.spatial == spatial) pols.push_back(m.pol);
    }
    if (pols.size() != 2) {
      throw ParseError(fmt::format("path '{}' carries {} modes here", spatial, pols.size()), st.location,
                       fmt::format("name the two polarizations with {}=p,p", key));
    }
    return {pols[0], pols[1]};
  }

  void apply(const Element& e, const Stanza& st) {
    ModeTransform tr;
    try {
      tr = element_transform(e);
    } catch (const ConfigError& err) {
      throw ParseError(err.what(), st.location, "check the element parameters");
    }
    for (const auto& m : tr.inputs()) {
      if (!modes_.contains(m)) {
        throw ParseError(fmt::format("mode {} is not defined at this point", m.str()), st.location,
                         "modes come from the source (a, b) or an earlier element output");
      }
    }
    for (const auto& m : tr.inputs()) modes_.erase(m);
    for (const auto& m : tr.outputs()) {
      if (modes_.contains(m)) {
        throw ParseError(fmt::format("output mode {} already exists", m.str()), st.location,
                         "pick an unused output path label");
      }
      modes_.insert(m);
    }
  }

 private:
  std::set<ModeId> modes_;
};

void parse_source(const Stanza& st, ExperimentConfig& cfg) {
  if (st.args.empty() || st.args.front().text != "spdc") {
    throw ParseError("source must be of type spdc", st.location, "write: source spdc p1=... nmax=... visibility=...");
  }
  Stanza rest = st;
  rest.args.erase(rest.args.begin());
  Args a(rest, {"p1", "nmax", "visibility", "noise", "reprate"});
  auto& s = cfg.source;
  const auto& p1 = a.get("p1");
  s.p1 = to_double(p1, "p1");
  require_range(s.p1 >= 0.0 && s.p1 < max_single_pair_probability(), p1,
                fmt::format("p1={} outside [0, 8/27)", p1.text), "the single-pair probability peaks at 8/27");
  const auto& nmax = a.get("nmax");
  const auto n = to_uint(nmax, "nmax");
  require_range(n >= 1 && n <= 6, nmax, fmt::format("nmax={} outside [1, 6]", nmax.text),
                "use nmax=4 for the three- and four-pair sectors");
  s.n_max = static_cast<unsigned>(n);
  const auto& vis = a.get("visibility");
  s.visibility = to_double(vis, "visibility");
  require_range(s.visibility >= 0.0 && s.visibility <= 1.0, vis,
                fmt::format("visibility={} outside [0, 1]", vis.text), "visibility is a fraction, e.g. 0.91");
  if (a.has("noise")) {
    const auto& t = a.get("noise");
    if (t.text == "dephasing") {
      s.noise = NoiseModel::dephasing;
    } else if (t.text == "white") {
      s.noise = NoiseModel::white;
    } else {
      throw ParseError(fmt::format("unknown noise model '{}'", t.text), t.location, "use noise=dephasing or noise=white");
    }
  }
  if (a.has("reprate")) {
    const auto& t = a.get("reprate");
    s.rep_rate = to_double(t, "reprate");
    require_range(s.rep_rate > 0.0, t, "reprate must be positive", "pulses per second, e.g. reprate=76e6");
  }
}

Element parse_bs(const Stanza& st) {
  Args a(st, {"in", "refl", "trans", "R", "phase"});
  BeamSplitterSpec bs;
  bs.input = to_label(a.get("in"), "in");
  bs.reflected_out = to_label(a.get("refl"), "refl");
  bs.transmitted_out = to_label(a.get("trans"), "trans");
  if (bs.reflected_out == bs.transmitted_out || bs.input == bs.reflected_out || bs.input == bs.transmitted_out) {
    throw ParseError("bs paths in, refl and trans must differ", st.location, "use three distinct path labels");
  }
  const auto& r = a.get("R");
  bs.R = to_double(r, "R");
  require_range(bs.R >= 0.0 && bs.R <= 1.0, r, fmt::format("R={} outside [0, 1]", r.text),
                "R is the intensity reflectivity; T = 1 - R");
  bs.T = 1.0 - bs.R;
  if (a.has("phase")) bs.phase_deg = to_double(a.get("phase"), "phase");
  return bs;
}

Element parse_hwp(const Stanza& st, const ModeUniverse& u) {
  Args a(st, {"on", "angle", "out", "in"});
  WavePlateSpec w;
  w.target = to_label(a.get("on"), "on");
  const auto& ang = a.get("angle");
  w.angle_deg = to_double(ang, "angle");
  require_range(w.angle_deg > -90.0 && w.angle_deg <= 90.0, ang, fmt::format("angle={} outside (-90, 90]", ang.text),
                "wave plate angles are in degrees, e.g. -22.5");
  w.output_pols = to_label_pair(a.get("out"), "out");
  w.input_pols = a.has("in") ? to_label_pair(a.get("in"), "in") : u.pols_on(w.target, st, "in");
  return w;
}

Element parse_pbs(const Stanza& st, const ModeUniverse& u) {
  Args a(st, {"on", "pols"});
  PbsSpec p;
  p.input = to_label(a.get("on"), "on");
  p.pols = a.has("pols") ? to_label_pair(a.get("pols"), "pols") : u.pols_on(p.input, st, "pols");
  return p;
}

Element parse_phase(const Stanza& st) {
  Args a(st, {"mode", "phi"});
  PhaseSpec p;
  p.mode = to_mode(a.get("mode"), "mode");
  p.phi_deg = to_double(a.get("phi"), "phi");
  return p;
}

DetectorSpec parse_detector(const Stanza& st) {
  Args a(st, {"id", "mode", "kind", "eta", "dark", "window"});
  DetectorSpec d;
  d.id = to_label(a.get("id"), "id");
  d.mode = to_mode(a.get("mode"), "mode");
  const auto& kind = a.get("kind");
  if (kind.text == "threshold") {
    d.kind = DetectorKind::threshold;
  } else if (kind.text == "pnr") {
    d.kind = DetectorKind::number_resolving;
  } else {
    throw ParseError(fmt::format("unknown detector kind '{}'", kind.text), kind.location,
                     "use kind=threshold or kind=pnr");
  }
  const auto& eta = a.get("eta");
  d.coupling = to_double(eta, "eta");
  require_range(d.coupling >= 0.0 && d.coupling <= 1.0, eta, fmt::format("eta={} outside [0, 1]", eta.text),
                "eta is the detection efficiency p*q");
  if (a.has("dark")) {
    const auto& t = a.get("dark");
    d.dark_rate = to_double(t, "dark");
    require_range(d.dark_rate >= 0.0, t, "dark rate must be >= 0", "dark counts per second, e.g. dark=300");
  }
  if (a.has("window")) {
    const auto& t = a.get("window");
    d.window = to_double(t, "window");
    require_range(d.window >= 0.0, t, "window must be >= 0", "coincidence window in seconds, e.g. window=1.2e-8");
  }
  if (!(d.dark_probability() < 1.0)) {
    throw ParseError(fmt::format("dark*window = {} must be < 1", d.dark_probability()), st.location,
                     "the dark probability per window has to be a probability");
  }
  return d;
}

}  // namespace

ParseError::ParseError(const std::string& message, SourceLocation where, std::string hint)
    : ConfigError(fmt::format("line {}, column {}: {}{}", where.line, where.column, message,
                              hint.empty() ? "" : fmt::format(" (hint: {})", hint))),
      where_(where),
      hint_(std::move(hint)),
      detail_(message) {}

DslDocument tokenize(std::string_view text) {
  DslDocument doc;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
      const char c = line[i];
      if (c == '#') break;
      if (c == ' ' || c == '\t' || c == '\r') {
        ++i;
        continue;
      }
      if (!token_char(c)) {
        throw ParseError(fmt::format("unexpected character '{}'", printable(c)), {line_no, i + 1},
                         "tokens use letters, digits and _ ' . , : = + -");
      }
      const std::size_t start = i;
      while (i < line.size() && token_char(line[i])) ++i;
      tokens.push_back({std::string(line.substr(start, i - start)), {line_no, start + 1}});
    }
    if (!tokens.empty()) {
      Stanza st;
      st.keyword = tokens.front().text;
      st.location = tokens.front().location;
      st.args.assign(tokens.begin() + 1, tokens.end());
      doc.stanzas.push_back(std::move(st));
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return doc;
}

ExperimentConfig canonicalize(ExperimentConfig config) {
  std::sort(config.detectors.begin(), config.detectors.end(),
            [](const DetectorSpec& a, const DetectorSpec& b) { return a.id < b.id; });
  std::sort(config.herald.begin(), config.herald.end());
  std::sort(config.bases.begin(), config.bases.end());
  return config;
}

ExperimentConfig parse_experiment(std::string_view text) {
  const DslDocument doc = tokenize(text);
  ExperimentConfig cfg;
  cfg.circuit.input_modes = source_modes();
  ModeUniverse universe;
  bool have_source = false, have_herald = false;
  std::optional<std::pair<double, SourceLocation>> duration;
  std::optional<SourceLocation> pulses_at;
  std::set<std::string> ids;
  std::set<BasisSetting> bases;

  for (const auto& st : doc.stanzas) {
    const auto& kw = st.keyword;
    if (kw == "source") {
      if (have_source) throw ParseError("second source stanza", st.location, "declare the source once");
      parse_source(st, cfg);
      have_source = true;
    } else if (kw == "bs" || kw == "hwp" || kw == "pbs" || kw == "phase") {
      Element e = kw == "bs"    ? parse_bs(st)
                  : kw == "hwp" ? parse_hwp(st, universe)
                  : kw == "pbs" ? parse_pbs(st, universe)
                                : parse_phase(st);
      universe.apply(e, st);
      cfg.circuit.elements.push_back(std::move(e));
    } else if (kw == "detector") {
      auto d = parse_detector(st);
      if (!ids.insert(d.id).second) {
        throw ParseError(fmt::format("duplicate detector id '{}'", d.id), st.location, "detector ids must be unique");
      }
      cfg.detectors.push_back(std::move(d));
    } else if (kw == "herald") {
      if (have_herald) throw ParseError("second herald stanza", st.location, "list all trigger ids on one line");
      if (st.args.empty()) throw ParseError("herald lists no detectors", st.location, "write: herald t1 t2 t3 t4");
      std::set<std::string> seen;
      for (const auto& t : st.args) {
        auto id = to_label(t, "herald id");
        if (!seen.insert(id).second) {
          throw ParseError(fmt::format("herald names '{}' twice", id), t.location, "each trigger is listed once");
        }
        cfg.herald.push_back(std::move(id));
      }
      have_herald = true;
    } else if (kw == "basis") {
      require_positional(st, 2);
      BasisSetting b;
      for (int k = 0; k < 2; ++k) {
        const auto& t = st.args[k];
        Basis v;
        if (t.text == "HV") {
          v = Basis::HV;
        } else if (t.text == "DA") {
          v = Basis::DA;
        } else if (t.text == "RL") {
          v = Basis::RL;
        } else {
          throw ParseError(fmt::format("unknown basis '{}'", t.text), t.location, "use HV, DA or RL");
        }
        (k == 0 ? b.first : b.second) = v;
      }
      if (!bases.insert(b).second) {
        throw ParseError(fmt::format("basis {} listed twice", b.str()), st.location, "remove the duplicate");
      }
      cfg.bases.push_back(b);
    } else if (kw == "pulses") {
      require_positional(st, 1);
      if (cfg.pulses || duration) throw ParseError("pulse count given twice", st.location, "keep one pulses/duration line");
      const auto n = to_uint(st.args[0], "pulses");
      require_range(n > 0, st.args[0], "pulses must be > 0", "e.g. pulses 10000000");
      cfg.pulses = n;
      pulses_at = st.location;
    } else if (kw == "duration") {
      require_positional(st, 1);
      if (cfg.pulses || duration) throw ParseError("pulse count given twice", st.location, "keep one pulses/duration line");
      const double s = to_double(st.args[0], "duration");
      require_range(s > 0.0, st.args[0], "duration must be > 0", "seconds of integration, e.g. duration 36000");
      duration = {s, st.location};
    } else if (kw == "seed") {
      require_positional(st, 1);
      if (cfg.seed) throw ParseError("seed given twice", st.location, "keep one seed line");
      cfg.seed = to_uint(st.args[0], "seed");
    } else {
      throw ParseError(fmt::format("unknown keyword '{}'", kw), st.location, fmt::format("keywords: {}", kKeywords));
    }
  }

  const SourceLocation end{doc.stanzas.empty() ? 1 : doc.stanzas.back().location.line, 1};
  if (!have_source) throw ParseError("no source stanza", end, "add: source spdc p1=0.047 nmax=4 visibility=0.91");
  if (!have_herald) throw ParseError("no herald stanza", end, "add: herald <id> <id> <id> <id>");
  if (duration) {
    const double p = std::round(duration->first * cfg.source.rep_rate);
    if (!(p >= 1.0 && p < 1.8e19)) {
      throw ParseError("duration gives no usable pulse count", duration->second, "check duration and reprate");
    }
    cfg.pulses = static_cast<std::uint64_t>(p);
  }
  return canonicalize(std::move(cfg));
}

ExperimentConfig parse_experiment_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment(ss.str());
}

std::string serialize(const ExperimentConfig& config) {
  const ExperimentConfig c = canonicalize(config);
  std::string out;
  const auto& s = c.source;
  out += fmt::format("source spdc nmax={} noise={} p1={} reprate={} visibility={}\n", s.n_max, noise_model_name(s.noise),
                     fmt_double(s.p1), fmt_double(s.rep_rate), fmt_double(s.visibility));
  for (const auto& e : c.circuit.elements) {
    if (const auto* bs = std::get_if<BeamSplitterSpec>(&e)) {
      out += fmt::format("bs R={} in={} phase={} refl={} trans={}\n", fmt_double(bs->R), bs->input,
                         fmt_double(bs->phase_deg), bs->reflected_out, bs->transmitted_out);
    } else if (const auto* w = std::get_if<WavePlateSpec>(&e)) {
      out += fmt::format("hwp angle={} in={},{} on={} out={},{}\n", fmt_double(w->angle_deg), w->input_pols[0],
                         w->input_pols[1], w->target, w->output_pols[0], w->output_pols[1]);
    } else if (const auto* p = std::get_if<PbsSpec>(&e)) {
      out += fmt::format("pbs on={} pols={},{}\n", p->input, p->pols[0], p->pols[1]);
    } else if (const auto* ph = std::get_if<PhaseSpec>(&e)) {
      out += fmt::format("phase mode={} phi={}\n", ph->mode.str(), fmt_double(ph->phi_deg));
    } else if (const auto* l = std::get_if<LossSpec>(&e)) {
      // Not expressible in the text format; kept visible rather than dropped.
      out += fmt::format("# loss mode={} eta={} (not representable)\n", l->mode.str(), fmt_double(l->eta));
    }
  }
  for (const auto& d : c.detectors) {
    out += fmt::format("detector dark={} eta={} id={} kind={} mode={} window={}\n", fmt_double(d.dark_rate),
                       fmt_double(d.efficiency()), d.id, detector_kind_name(d.kind), d.mode.str(),
                       fmt_double(d.window));
  }
  if (!c.herald.empty()) {
    out += "herald";
    for (const auto& h : c.herald) out += " " + h;
    out += "\n";
  }
  for (const auto& b : c.bases) out += fmt::format("basis {} {}\n", basis_name(b.first), basis_name(b.second));
  if (c.pulses) out += fmt::format("pulses {}\n", *c.pulses);
  if (c.seed) out += fmt::format("seed {}\n", *c.seed);
  return out;
}

std::vector<Diagnostic> validate(const ExperimentConfig& config) {
  std::vector<Diagnostic> out;
  auto error = [&](std::string m) { out.push_back({Severity::error, std::move(m)}); };
  auto warning = [&](std::string m) { out.push_back({Severity::warning, std::move(m)}); };

  try {
    config.source.validate();
  } catch (const ConfigError& e) {
    error(e.what());
  }

  std::vector<ModeId> produced;
  try {
    produced = config.circuit.output_modes();
  } catch (const ConfigError& e) {
    error(fmt::format("circuit: {}", e.what()));
  }
  for (std::size_t i = 0; i < config.circuit.elements.size(); ++i) {
    if (const auto* bs = std::get_if<BeamSplitterSpec>(&config.circuit.elements[i])) {
      if (std::abs(bs->R + bs->T - 1.0) > 1e-9) {
        error(fmt::format("beam splitter {}: R + T = {} instead of 1", i + 1, bs->R + bs->T));
      }
    }
  }

  std::set<std::string> ids;
  for (const auto& d : config.detectors) {
    ids.insert(d.id);
    try {
      d.validate();
    } catch (const ConfigError& e) {
      error(e.what());
    }
    if (!produced.empty() && !std::binary_search(produced.begin(), produced.end(), d.mode)) {
      error(fmt::format("detector {} watches mode {} which no element produces", d.id, d.mode.str()));
    }
  }

  bool herald_ok = true;
  if (config.herald.size() != 4) {
    error(fmt::format("herald requires four trigger detectors (got {})", config.herald.size()));
    herald_ok = false;
  }
  for (const auto& h : config.herald) {
    if (!ids.contains(h)) {
      error(fmt::format("herald names unknown detector '{}'", h));
      herald_ok = false;
    }
  }
  if (!config.herald.empty() && config.source.n_max < 3) {
    warning(fmt::format("nmax={} gives fewer than the three pairs a four-fold herald needs", config.source.n_max));
  }
  if (herald_ok) {
    try {
      (void)config.layout();
    } catch (const ConfigError& e) {
      error(e.what());
    }
  }
  if (config.bases.empty()) warning("no basis settings; montecarlo has nothing to measure");
  return out;
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::error; });
}

std::string format_diagnostic(const Diagnostic& d) {
  return fmt::format("{}: {}", d.severity == Severity::error ? "error" : "warning", d.message);
}

std::uint64_t config_digest(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize(config)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace heraldsim

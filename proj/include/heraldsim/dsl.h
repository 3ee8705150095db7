#pragma once

// Line-oriented `.exp` experiment format.
//
//   source spdc p1=0.047 nmax=4 visibility=0.91 [noise=dephasing|white] [reprate=76e6]
//   bs in=a refl=c trans=e R=0.486 [phase=0]
//   hwp on=f angle=-22.5 out=x',y' [in=x,y]
//   pbs on=e [pols=x,y]
//   phase mode=c:x phi=90
//   detector id=t1 mode=e_t:x kind=threshold eta=0.167 [dark=300] [window=1.2e-8]
//   herald t1 t2 t3 t4
//   basis HV HV
//   pulses 10000000        (or: duration <seconds>, converted with the rep rate)
//   seed 42
//
// `#` starts a comment. When `in=` / `pols=` are omitted they are taken from
// the two modes present on that path at that point of the circuit.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "heraldsim/errors.h"
#include "heraldsim/experiment.h"

namespace heraldsim {

struct SourceLocation {
  std::size_t line = 0;  ///< 1-based
  std::size_t column = 0;
};

class ParseError : public ConfigError {
 public:
  ParseError(const std::string& message, SourceLocation where, std::string hint = {});

  const SourceLocation& location() const { return where_; }
  const std::string& hint() const { return hint_; }
  const std::string& detail() const { return detail_; }

 private:
  SourceLocation where_;
  std::string hint_;
  std::string detail_;
};

struct Token {
  std::string text;
  SourceLocation location;
};

struct Stanza {
  std::string keyword;
  std::vector<Token> args;
  SourceLocation location;
};

struct DslDocument {
  std::vector<Stanza> stanzas;
};

/// Splits text into stanzas; throws ParseError on characters outside the
/// token alphabet.
DslDocument tokenize(std::string_view text);

/// Parses and canonicalizes (detectors, herald ids and bases sorted).
/// Throws ParseError only.
ExperimentConfig parse_experiment(std::string_view text);
ExperimentConfig parse_experiment_file(const std::filesystem::path& path);

/// Sorts detectors by id, herald ids and basis settings.
ExperimentConfig canonicalize(ExperimentConfig config);

/// Canonical text: sorted keys, 9 significant digits, elements in order.
std::string serialize(const ExperimentConfig& config);

enum class Severity { error, warning };

struct Diagnostic {
  Severity severity = Severity::error;
  std::string message;
};

std::vector<Diagnostic> validate(const ExperimentConfig& config);
bool has_errors(const std::vector<Diagnostic>& diagnostics);
std::string format_diagnostic(const Diagnostic& d);

/// FNV-1a 64 of serialize(config).
std::uint64_t config_digest(const ExperimentConfig& config);

}  // namespace heraldsim

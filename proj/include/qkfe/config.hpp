#pragma once

#include "qkfe/kernel.hpp"
#include "qkfe/mitigate.hpp"
#include "qkfe/model.hpp"
#include "qkfe/noise.hpp"
#include "qkfe/protocol.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qkfe {

enum class RunProtocol { VirtualCopy, ReferenceState, ExactOnly };
std::string to_string(RunProtocol p);

enum class Spacing { Linear, Log };

struct TemperatureGrid {
  double min = 0.1;
  double max = 10.0;
  int count = 64;
  Spacing spacing = Spacing::Log;

  std::vector<double> values() const;
};

enum class OutputFormat { Csv, Json, Both };

/// One experiment, fully resolved. Every field has a default except the
/// model section.
struct ExperimentConfig {
  // model
  LatticeSpec lattice;
  ModelKind model = ModelKind::TFIM;
  std::optional<double> g;
  double J = 1.0;
  // qkfe
  int N = 4;
  std::optional<int> M;  // nullopt: 1 for DOS moments, max(n, 1) for observables
  WindowMethod window = WindowMethod::Oracle;
  std::optional<SeriesForm> form;  // nullopt: follows the protocol
  // protocol
  RunProtocol protocol = RunProtocol::VirtualCopy;
  std::optional<EvolutionKind> evolution;  // nullopt: Trotter for TFIM, analogue for XY
  std::optional<PauliTerm> observable;
  EstimatorConfig estimator;
  // noise, mitigation
  NoiseModel noise;
  MitigationPlan mitigation;
  // thermodynamics
  TemperatureGrid temperature;
  BandMethod bands = BandMethod::Bootstrap;
  int bootstrap_replicates = 200;
  // output
  std::string output_dir;
  bool output_dir_set = false;
  OutputFormat format = OutputFormat::Both;
  bool record_timings = false;

  HamiltonianSpec hamiltonian() const;
  EvolutionKind evolution_kind() const;
  SeriesForm series_form() const;
  EvolutionSpec evolution_for(int n, bool observable_moment) const;
};

/// Parses the JSON config text. Syntax errors raise ParseError with line and
/// column; unknown keys and cross-field conflicts raise ValidationError
/// naming the field.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::string& path);

/// Resolved config as canonical JSON (fixed key order, defaults filled).
std::string config_echo(const ExperimentConfig& cfg);

/// Cross-field checks; called by the parsers and again after overrides.
void validate_config(const ExperimentConfig& cfg);

}  // namespace qkfe

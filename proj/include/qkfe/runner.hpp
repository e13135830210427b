#pragma once

#include "qkfe/config.hpp"
#include "qkfe/exact.hpp"
#include "qkfe/mitigate.hpp"
#include "qkfe/protocol.hpp"

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qkfe {

/// Estimated (or exact) moments n = 0..N next to the exact reference when
/// the register is small enough to diagonalize.
struct MomentTable {
  Eigen::VectorXd estimate;
  Eigen::VectorXd stderr_;
  std::optional<Eigen::VectorXd> exact;
  std::vector<std::vector<double>> samples;  // per-unitary values, by order
};

struct RunResult {
  ExperimentConfig config;
  RescaleWindow window;
  SeriesForm form = SeriesForm::Generic;
  MomentTable moments;
  std::vector<MomentEstimate> raw;
  std::vector<MitigatedEstimate> mitigated;
  ThermoCurve thermo;
  std::optional<MomentTable> observable_moments;
  std::vector<double> observable_thermal;
  std::vector<double> observable_exact;
  std::map<std::string, double> timings;  // seconds per stage
};

RunResult run_experiment(const ExperimentConfig& cfg);

/// Writes moments.csv, thermo.csv, summary.json and the logs the run
/// produced into `dir` (created if needed). Returns the written file names.
std::vector<std::string> write_outputs(const RunResult& result, const std::string& dir);

/// --out beats output.directory, which beats $QKFE_OUT_DIR, then "qkfe_out".
std::string resolve_output_dir(const std::optional<std::string>& cli_out, const ExperimentConfig& cfg);

std::string moments_csv(const MomentTable& m);

}  // namespace qkfe

#pragma once

#include "qkfe/amplify.hpp"
#include "qkfe/circuit.hpp"
#include "qkfe/noise.hpp"
#include "qkfe/protocol.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qkfe {

/// Same gate layout as the target with the continuous evolution angles
/// reflected, so the whole circuit composes to the identity: the centre
/// Trotter layer is zeroed and every later evolution layer has its Rz
/// angles negated. Analogue blocks become e^{-iHt/2} P e^{-iHt/2} P with P
/// the given anticommuting layer, and the reference-state phase rotation is
/// zeroed.
Circuit build_error_estimation_circuit(const Circuit& target, const std::vector<PauliOp>& anticommuting = {});

struct MitigatedValue {
  double raw = 0.0;
  double mitigated = 0.0;
  double p_avg = 0.0;
  std::vector<std::pair<double, double>> zeta;  // (r, zeta(r))
  int outliers_removed = 0;
};

MitigatedValue gem(double target_measured, double est_measured, double est_exact, double trace_term);

/// zeta(r) = target_r / est_r * est_exact.
double zeta_value(double target_r, double est_r, double est_exact);

/// Linear extrapolation of two (r, zeta) points to r = 0.
MitigatedValue lzne(const std::vector<std::pair<double, double>>& zeta, double est_exact);

inline constexpr double kMadScale = 1.4826;

struct MadResult {
  std::vector<double> kept;
  std::vector<std::size_t> removed;
};

MadResult mad_filter(const std::vector<double>& values, double threshold_sigmas = 2.0);

enum class MitigationMethod { None, Gem, Lzne };
std::string to_string(MitigationMethod m);
MitigationMethod mitigation_method_from_string(const std::string& s);

std::string to_string(AmplifyKind k);
AmplifyKind amplify_kind_from_string(const std::string& s);

struct MitigationPlan {
  MitigationMethod method = MitigationMethod::None;
  double r1 = 1.0;
  double r2 = 3.0;
  AmplifyKind amplification = AmplifyKind::RepeatCz;
  int subset_tripled = 3;
  int subset_selections = 8;
  int fold_variants = 4;
  bool mad_enabled = false;
  double mad_threshold = 2.0;

  void validate() const;
};

struct AuditRecord {
  int n = 0;
  std::uint64_t index = 0;
  std::string descriptor;
  std::string method;
  double est_exact = 1.0;
  double trace_term = 0.0;
  std::vector<double> r;
  std::vector<double> target;
  std::vector<double> estimation;
  double mitigated = 0.0;
  bool outlier = false;
};

struct MitigatedEstimate {
  int n = 0;
  double raw_mean = 0.0;
  double raw_stderr = 0.0;
  double mitigated_mean = 0.0;
  double mitigated_stderr = 0.0;
  int outliers_removed = 0;
  std::vector<AuditRecord> audit;
};

enum class ProtocolKind { VirtualCopy, ReferenceState };

/// Per random unitary: runs target and estimation circuits at every noise
/// level the plan needs, mitigates, then averages over unitaries with the
/// optional MAD filter.
MitigatedEstimate run_mitigated_estimate(const HamiltonianSpec& h, const RescaleWindow& window, int n,
                                         const std::optional<PauliTerm>& obs, ProtocolKind protocol,
                                         const MitigationPlan& plan, const NoiseModel& noise,
                                         const EvolutionSpec& evo, const EstimatorConfig& cfg);

/// Mitigated value of one audit record from its stored measurements.
double remitigate(const AuditRecord& rec);
/// Applies the ensemble step (mean, optional MAD) to audit records.
MitigatedEstimate summarize_audit(int n, std::vector<AuditRecord> records, bool mad_enabled, double mad_threshold);

std::string audit_jsonl(const std::vector<MitigatedEstimate>& estimates);
std::vector<AuditRecord> audit_from_jsonl(const std::string& text);

}  // namespace qkfe

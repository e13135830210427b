#pragma once

#include "qkfe/circuit.hpp"
#include "qkfe/model.hpp"
#include "qkfe/noise.hpp"
#include "qkfe/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qkfe {

/// Sampled: finite shots per random unitary. Expectation: random unitaries,
/// exact outcome tables. Exhaustive: every Clifford layer (or stabilizer
/// product state) once, exact outcome tables; L <= 4 only.
enum class EstimatorMode { Sampled, Expectation, Exhaustive };
std::string to_string(EstimatorMode m);
EstimatorMode estimator_mode_from_string(const std::string& s);

enum class EvolutionKind { Trotter, Analogue };
std::string to_string(EvolutionKind k);
EvolutionKind evolution_kind_from_string(const std::string& s);

struct EvolutionSpec {
  EvolutionKind kind = EvolutionKind::Trotter;
  int M = 1;
};

struct EstimatorConfig {
  int num_random_unitaries = 400;
  int shots_per_unitary = 200;
  std::uint64_t seed = 0;
  EstimatorMode mode = EstimatorMode::Sampled;
  /// Extra (CZ layer, Clifford layer) pairs inside the outer random layer.
  int sampling_depth = 0;
  int threads = 1;

  void validate(int num_qubits) const;
};

/// Count, mean and sum of squared deviations; merge is Chan's pairwise
/// update, so merging per-item stats in index order is schedule-free.
class RunningStats {
 public:
  void add(double x);
  void merge(const RunningStats& other);

  long count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double standard_error() const { return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

 private:
  long n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct UnitaryRecord {
  std::uint64_t index = 0;
  std::string descriptor;
  int shots = 0;
  double mean = 0.0;
  double variance = 0.0;
};

struct MomentEstimate {
  int n = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
  long unitaries = 0;
  std::vector<UnitaryRecord> records;
};

/// What one random unitary contributes: the circuits to run and how their
/// outcomes turn into a value. VirtualCopy averages (-2)^{-|s|} over the
/// outcomes of circuits[0]; ReferenceState takes P(0...0) of circuits[0]
/// minus that of circuits[1].
struct ProtocolTask {
  enum class Kind { VirtualCopy, ReferenceState };
  Kind kind = Kind::VirtualCopy;
  std::string descriptor;
  std::vector<Circuit> circuits;

  /// Tr[O_meas]/D of the effective measured operator, used by GEM.
  double trace_term() const;
};

struct TaskResult {
  double value = 0.0;
  double variance = 0.0;
  int shots = 0;
};

/// Value of the task from exact outcome tables of its circuits.
double task_value(const ProtocolTask& task, const std::vector<Eigen::VectorXd>& dists);
TaskResult evaluate_task(const ProtocolTask& task, const NoiseModel& noise, EstimatorMode mode, int shots,
                         Rng& rng);

/// Appends e^{-iHt} (Trotter) or an exact analogue block.
void append_evolution(Circuit& c, const HamiltonianSpec& h, double t, const EvolutionSpec& evo);

/// (-2)^{-popcount(s)}.
double vc_weight(std::uint64_t outcome);

/// U_s^dagger O e^{-i n pi H~} U_s with U_s built from `layers`: layers[0]
/// is the outer Clifford layer, later entries are inner layers each
/// preceded by a CZ layer on the lattice bonds.
ProtocolTask vc_task(const HamiltonianSpec& h, const RescaleWindow& window, int n, const EvolutionSpec& evo,
                     const std::vector<std::vector<int>>& layers, const std::optional<PauliTerm>& obs);

/// The n-th composite moment |Tr T|^2 / D^2 with T = O e^{-i n pi H~}.
MomentEstimate vc_moment_estimate(const HamiltonianSpec& h, const RescaleWindow& window, int n,
                                  const EvolutionSpec& evo, const EstimatorConfig& cfg, const NoiseModel& noise);
MomentEstimate vc_observable_moment(const HamiltonianSpec& h, const RescaleWindow& window, int n,
                                    const EvolutionSpec& evo, const PauliTerm& obs, const EstimatorConfig& cfg,
                                    const NoiseModel& noise);

/// Stabilizer alphabet for reference-state product states.
enum StabilizerState { kZero = 0, kOne = 1, kPlus = 2, kMinus = 3, kPlusI = 4, kMinusI = 5 };

/// Layer index carried by the reference-state phase rotation.
inline constexpr int kPhaseLayer = -2;

/// U_+- : prepares (|0...0> +- |1, psi_1, ..., psi_{L-1}>)/sqrt2 and applies
/// Rz(n pi E_min / W) on the pivot qubit 0. psi[0] must be kOne.
Circuit rs_prepare_circuit(const std::vector<int>& psi, int sign, int n, const RescaleWindow& window);

ProtocolTask rs_task(const HamiltonianSpec& h, const RescaleWindow& window, int n, const EvolutionSpec& evo,
                     const std::vector<int>& psi);

/// Raises ProtocolInvalid or ReferenceNotEigenstate when the reference-state
/// estimator would be biased for h.
void rs_check_valid(const HamiltonianSpec& h);
/// Raises ProtocolInvalid when a digital virtual-copy run lacks the
/// anticommuting symmetry.
void vc_check_valid(const HamiltonianSpec& h, const EvolutionSpec& evo);

MomentEstimate rs_moment_estimate(const HamiltonianSpec& h, const RescaleWindow& window, int n,
                                  const EvolutionSpec& evo, const EstimatorConfig& cfg, const NoiseModel& noise);

/// Random draws for unitary `index` of moment n (or the exhaustive
/// enumeration when cfg.mode is Exhaustive).
std::vector<std::vector<int>> vc_layers_for(int num_qubits, int n, std::uint64_t index, const EstimatorConfig& cfg);
std::vector<int> rs_state_for(int num_qubits, int n, std::uint64_t index, const EstimatorConfig& cfg);
std::uint64_t task_count(int num_qubits, bool reference_state, const EstimatorConfig& cfg);
std::uint64_t item_seed(const EstimatorConfig& cfg, int n, std::uint64_t index);

/// One JSON object per line per unitary record.
std::string sample_log_jsonl(const std::vector<MomentEstimate>& estimates);
/// Inverse of sample_log_jsonl: per-order lists of per-unitary means.
std::vector<std::vector<double>> samples_from_jsonl(const std::string& text, int max_order);

}  // namespace qkfe

#pragma once

#include "qkfe/circuit.hpp"
#include "qkfe/rng.hpp"

#include <Eigen/Dense>

#include <vector>

namespace qkfe {

/// Isotropic depolarizing noise. A channel of strength p replaces the
/// affected qubits by their maximally mixed marginal with probability p.
/// p1 follows each single-qubit gate (virtual Rz gates only when noisy_rz),
/// p2 follows each CZ on both of its qubits, an analogue block of duration t
/// depolarizes every qubit with 1 - exp(-p_t t), and p_global is one channel
/// on the whole register just before measurement.
struct NoiseModel {
  double p1 = 0.0;
  double p2 = 0.0;
  double p_t = 0.0;
  double p_global = 0.0;
  bool noisy_rz = false;

  void validate() const;
  bool is_noiseless() const { return p1 == 0.0 && p2 == 0.0 && p_t == 0.0 && p_global == 0.0; }
  /// True when the only channel is the final global one.
  bool only_global() const { return p1 == 0.0 && p2 == 0.0 && p_t == 0.0; }
};

struct NoiseSite {
  std::vector<int> qubits;
  double p = 0.0;
};

/// Channels that follow gate g, in application order.
std::vector<NoiseSite> noise_after(const Gate& g, const NoiseModel& noise, int num_qubits);

/// Trajectory unfolding: with probability p applies one of the 4^k Pauli
/// strings on `qubits` (identity included) chosen uniformly.
void depolarize_trajectory(Eigen::Ref<Eigen::MatrixXcd> psi, const std::vector<int>& qubits, double p,
                           Rng& rng);

/// Exact channel on a density matrix.
void depolarize_density(Eigen::MatrixXcd& rho, const std::vector<int>& qubits, double p);

/// (1 - p) dist + p / D, the global channel acting on an outcome table.
Eigen::VectorXd globally_depolarize(const Eigen::VectorXd& dist, double p);

}  // namespace qkfe

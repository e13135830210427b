#pragma once

#include "qkfe/model.hpp"
#include "qkfe/statevector.hpp"

#include <Eigen/Dense>

#include <memory>

namespace qkfe {

/// Exact e^{-iHt} from one dense eigendecomposition of H.
class AnaloguePropagator {
 public:
  explicit AnaloguePropagator(const HamiltonianSpec& h);

  int num_qubits() const { return num_qubits_; }
  const Eigen::VectorXd& energies() const { return energies_; }
  const Eigen::MatrixXcd& eigenvectors() const { return vectors_; }

  Eigen::MatrixXcd unitary(double t) const;
  /// Replaces every column c of `m` by e^{-iHt} c.
  void apply(Eigen::Ref<Eigen::MatrixXcd> m, double t) const;

 private:
  int num_qubits_;
  Eigen::VectorXd energies_;
  Eigen::MatrixXcd vectors_;
};

/// Shared propagator for `h`, cached by the canonical JSON of the spec.
std::shared_ptr<const AnaloguePropagator> analogue_propagator(const HamiltonianSpec& h);

StateVector analogue_evolve(const StateVector& state, const HamiltonianSpec& h, double t);

}  // namespace qkfe

#include "qkfe/analogue.hpp"

#include "qkfe/error.hpp"

#include <map>
#include <mutex>
#include <string>

namespace qkfe {

AnaloguePropagator::AnaloguePropagator(const HamiltonianSpec& h) : num_qubits_(h.num_qubits()) {
  if (num_qubits_ > kDenseLimit) fail(ErrorCode::TooLarge, "analogue propagation beyond dense limit");
  if (is_real(h)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_hamiltonian_real(h));
    energies_ = es.eigenvalues();
    vectors_ = es.eigenvectors().cast<cplx>();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense_hamiltonian(h));
    energies_ = es.eigenvalues();
    vectors_ = es.eigenvectors();
  }
}

Eigen::MatrixXcd AnaloguePropagator::unitary(double t) const {
  const Eigen::VectorXcd phases = (cplx(0, -t) * energies_.cast<cplx>()).array().exp();
  return vectors_ * phases.asDiagonal() * vectors_.adjoint();
}

void AnaloguePropagator::apply(Eigen::Ref<Eigen::MatrixXcd> m, double t) const {
  if (t == 0.0) return;
  const Eigen::VectorXcd phases = (cplx(0, -t) * energies_.cast<cplx>()).array().exp();
  Eigen::MatrixXcd coeffs = vectors_.adjoint() * m;
  coeffs = phases.asDiagonal() * coeffs;
  m.noalias() = vectors_ * coeffs;
}

std::shared_ptr<const AnaloguePropagator> analogue_propagator(const HamiltonianSpec& h) {
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const AnaloguePropagator>> cache;
  const std::string key = to_canonical_json(h);
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto prop = std::make_shared<const AnaloguePropagator>(h);
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(key, std::move(prop)).first->second;
}

StateVector analogue_evolve(const StateVector& state, const HamiltonianSpec& h, double t) {
  if (state.num_qubits != h.num_qubits()) fail(ErrorCode::BadTarget, "state and Hamiltonian sizes differ");
  StateVector out = state;
  analogue_propagator(h)->apply(out.amplitudes, t);
  return out;
}

}  // namespace qkfe

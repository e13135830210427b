#include "qkfe/executor.hpp"

#include "qkfe/error.hpp"

namespace qkfe {

Eigen::VectorXd exact_distribution(const Circuit& c, const NoiseModel& noise) {
  c.validate();
  noise.validate();
  if (noise.only_global()) {
    StateVector psi = run_circuit(c, StateVector::zero(c.num_qubits));
    return globally_depolarize(exhaustive_distribution(psi), noise.p_global);
  }
  if (c.num_qubits > kDensityLimit) fail(ErrorCode::TooLarge, "density-matrix execution beyond L = 10");
  const Eigen::Index dim = Eigen::Index{1} << c.num_qubits;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  rho(0, 0) = 1.0;
  for (const auto& g : c.gates) {
    // rho -> U rho U^dagger as two left actions with an adjoint in between.
    apply_gate(rho, g, c);
    Eigen::MatrixXcd tmp = rho.adjoint();
    apply_gate(tmp, g, c);
    rho = tmp;
    for (const auto& site : noise_after(g, noise, c.num_qubits)) depolarize_density(rho, site.qubits, site.p);
  }
  Eigen::VectorXd dist = rho.diagonal().real();
  return globally_depolarize(dist, noise.p_global);
}

StateVector run_trajectory(const Circuit& c, const NoiseModel& noise, Rng& rng) {
  StateVector psi = StateVector::zero(c.num_qubits);
  for (const auto& g : c.gates) {
    apply_gate(psi.amplitudes, g, c);
    for (const auto& site : noise_after(g, noise, c.num_qubits)) {
      depolarize_trajectory(psi.amplitudes, site.qubits, site.p, rng);
    }
  }
  if (noise.p_global > 0) {
    std::vector<int> all(static_cast<std::size_t>(c.num_qubits));
    for (int q = 0; q < c.num_qubits; ++q) all[static_cast<std::size_t>(q)] = q;
    depolarize_trajectory(psi.amplitudes, all, noise.p_global, rng);
  }
  return psi;
}

std::vector<std::uint64_t> sample_outcomes(const Circuit& c, const NoiseModel& noise, int shots, Rng& rng) {
  c.validate();
  noise.validate();
  if (noise.only_global()) {
    const StateVector psi = run_circuit(c, StateVector::zero(c.num_qubits));
    return sample_distribution(globally_depolarize(exhaustive_distribution(psi), noise.p_global), shots, rng);
  }
  std::vector<std::uint64_t> out;
  out.reserve(static_cast<std::size_t>(shots));
  for (int s = 0; s < shots; ++s) {
    const StateVector psi = run_trajectory(c, noise, rng);
    out.push_back(sample_distribution(exhaustive_distribution(psi), 1, rng).front());
  }
  return out;
}

}  // namespace qkfe

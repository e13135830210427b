#include "qkfe/noise.hpp"

#include "qkfe/error.hpp"

#include <cmath>

namespace qkfe {

namespace {

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p < 1.0)) fail(ErrorCode::ValidationError, std::string("noise.") + name + " must lie in [0, 1)");
}

PauliMasks masks_for(const std::vector<int>& qubits, std::uint64_t code) {
  // Two bits of `code` per qubit: 0 = I, 1 = X, 2 = Y, 3 = Z.
  PauliTerm t{1.0, {}};
  for (std::size_t k = 0; k < qubits.size(); ++k) {
    const auto a = (code >> (2 * k)) & 3;
    if (a == 1) t.sites.push_back({qubits[k], Axis::X});
    if (a == 2) t.sites.push_back({qubits[k], Axis::Y});
    if (a == 3) t.sites.push_back({qubits[k], Axis::Z});
  }
  return masks_of(t);
}

}  // namespace

void NoiseModel::validate() const {
  check_probability(p1, "p1");
  check_probability(p2, "p2");
  check_probability(p_global, "p_global");
  if (!(p_t >= 0.0) || !std::isfinite(p_t)) fail(ErrorCode::ValidationError, "noise.p_t must be non-negative");
}

std::vector<NoiseSite> noise_after(const Gate& g, const NoiseModel& noise, int num_qubits) {
  std::vector<NoiseSite> out;
  switch (g.kind) {
    case GateKind::Rz:
      if (noise.noisy_rz && noise.p1 > 0) out.push_back({g.targets, noise.p1});
      break;
    case GateKind::Rx:
    case GateKind::Ry:
    case GateKind::Clifford1Q:
      if (noise.p1 > 0) out.push_back({g.targets, noise.p1});
      break;
    case GateKind::CZ:
      if (noise.p2 > 0) out.push_back({g.targets, noise.p2});
      break;
    case GateKind::PauliLayer:
      if (noise.p1 > 0) {
        for (const auto& op : g.paulis) out.push_back({{op.qubit}, noise.p1});
      }
      break;
    case GateKind::Analogue:
      if (noise.p_t > 0 && g.angle != 0.0) {
        const double p = -std::expm1(-noise.p_t * std::abs(g.angle));
        for (int q = 0; q < num_qubits; ++q) out.push_back({{q}, p});
      }
      break;
  }
  return out;
}

void depolarize_trajectory(Eigen::Ref<Eigen::MatrixXcd> psi, const std::vector<int>& qubits, double p,
                           Rng& rng) {
  if (p <= 0.0) return;
  if (uniform01(rng) >= p) return;
  const std::uint64_t n = std::uint64_t{1} << (2 * qubits.size());
  const auto code = static_cast<std::uint64_t>(uniform01(rng) * static_cast<double>(n));
  if (code == 0) return;
  const PauliMasks m = masks_for(qubits, code);
  apply_pauli_masks(psi, m.x_mask, m.z_mask, m.num_y);
}

void depolarize_density(Eigen::MatrixXcd& rho, const std::vector<int>& qubits, double p) {
  if (p <= 0.0) return;
  const std::uint64_t n = std::uint64_t{1} << (2 * qubits.size());
  Eigen::MatrixXcd acc = rho;  // identity term
  for (std::uint64_t code = 1; code < n; ++code) {
    const PauliMasks m = masks_for(qubits, code);
    Eigen::MatrixXcd t = rho;
    apply_pauli_masks(t, m.x_mask, m.z_mask, m.num_y);
    Eigen::MatrixXcd ta = t.adjoint();
    apply_pauli_masks(ta, m.x_mask, m.z_mask, m.num_y);
    acc += ta;
  }
  rho = (1.0 - p) * rho + (p / static_cast<double>(n)) * acc;
}

Eigen::VectorXd globally_depolarize(const Eigen::VectorXd& dist, double p) {
  return ((1.0 - p) * dist.array() + p / static_cast<double>(dist.size())).matrix();
}

}  // namespace qkfe

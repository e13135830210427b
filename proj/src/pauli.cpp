#include "qkfe/pauli.hpp"

#include "qkfe/error.hpp"

#include <cmath>
#include <sstream>

namespace qkfe {

char axis_char(Axis a) {
  switch (a) {
    case Axis::X: return 'X';
    case Axis::Y: return 'Y';
    case Axis::Z: return 'Z';
  }
  return '?';
}

Axis axis_from_char(char c) {
  switch (c) {
    case 'X': case 'x': return Axis::X;
    case 'Y': case 'y': return Axis::Y;
    case 'Z': case 'z': return Axis::Z;
    default: break;
  }
  fail(ErrorCode::ValidationError, std::string("unknown Pauli axis '") + c + "'");
}

std::string to_string(const PauliTerm& term) {
  if (term.sites.empty()) return "I";
  std::ostringstream os;
  for (std::size_t k = 0; k < term.sites.size(); ++k) {
    if (k) os << ' ';
    os << axis_char(term.sites[k].axis) << term.sites[k].qubit;
  }
  return os.str();
}

void validate_term(const PauliTerm& term, int num_qubits) {
  if (!std::isfinite(term.coefficient) || term.coefficient == 0.0) {
    fail(ErrorCode::ValidationError, "Pauli term coefficient must be finite and nonzero");
  }
  std::uint64_t seen = 0;
  for (const auto& op : term.sites) {
    if (op.qubit < 0 || op.qubit >= num_qubits) {
      fail(ErrorCode::BadTarget, "Pauli term site " + std::to_string(op.qubit) + " out of range");
    }
    const std::uint64_t bit = std::uint64_t{1} << op.qubit;
    if (seen & bit) fail(ErrorCode::ValidationError, "Pauli term repeats site " + std::to_string(op.qubit));
    seen |= bit;
  }
}

PauliMasks masks_of(const PauliTerm& term) {
  PauliMasks m;
  for (const auto& op : term.sites) {
    const std::uint64_t bit = std::uint64_t{1} << op.qubit;
    switch (op.axis) {
      case Axis::X: m.x_mask |= bit; break;
      case Axis::Y: m.x_mask |= bit; m.z_mask |= bit; ++m.num_y; break;
      case Axis::Z: m.z_mask |= bit; break;
    }
  }
  return m;
}

Eigen::VectorXcd apply_pauli(const PauliTerm& term, const Eigen::VectorXcd& psi) {
  const PauliMasks m = masks_of(term);
  Eigen::VectorXcd out(psi.size());
  for (std::uint64_t b = 0; b < static_cast<std::uint64_t>(psi.size()); ++b) {
    out(static_cast<Eigen::Index>(b ^ m.x_mask)) = term.coefficient * m.phase(b) * psi(static_cast<Eigen::Index>(b));
  }
  return out;
}

double pauli_expectation(const std::vector<PauliOp>& sites, const Eigen::VectorXcd& psi) {
  const PauliMasks m = masks_of(PauliTerm{1.0, sites});
  cplx acc = 0.0;
  for (std::uint64_t b = 0; b < static_cast<std::uint64_t>(psi.size()); ++b) {
    acc += std::conj(psi(static_cast<Eigen::Index>(b ^ m.x_mask))) * m.phase(b) *
           psi(static_cast<Eigen::Index>(b));
  }
  return acc.real();
}

bool paulis_commute(const PauliTerm& a, const PauliTerm& b) {
  int anti = 0;
  for (const auto& p : a.sites) {
    for (const auto& q : b.sites) {
      if (p.qubit == q.qubit && p.axis != q.axis) ++anti;
    }
  }
  return (anti % 2) == 0;
}

}  // namespace qkfe

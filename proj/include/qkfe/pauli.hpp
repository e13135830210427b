#pragma once

#include <Eigen/Dense>

#include <bit>
#include <complex>
#include <cstdint>
#include <string>
#include <type_traits>
#include <vector>

namespace qkfe {

using cplx = std::complex<double>;

enum class Axis { X, Y, Z };

char axis_char(Axis a);
Axis axis_from_char(char c);

struct PauliOp {
  int qubit = 0;
  Axis axis = Axis::Z;

  friend bool operator==(const PauliOp&, const PauliOp&) = default;
};

/// coefficient * prod_k sigma^{axis_k}_{qubit_k}. An empty site list is the identity.
struct PauliTerm {
  double coefficient = 1.0;
  std::vector<PauliOp> sites;

  friend bool operator==(const PauliTerm&, const PauliTerm&) = default;
};

/// Human-readable form, e.g. "Z0 Y1 Z2 Y3" (identity prints as "I").
std::string to_string(const PauliTerm& term);

/// Checks the PauliTerm invariants against a register of `num_qubits`.
void validate_term(const PauliTerm& term, int num_qubits);

/// Bit-mask form of a Pauli string: P = i^{num_y} X^{x_mask} Z^{z_mask},
/// with Z applied first. Qubit j is bit j of the basis index.
struct PauliMasks {
  std::uint64_t x_mask = 0;
  std::uint64_t z_mask = 0;
  int num_y = 0;

  /// Action on a basis state: P|b> = phase(b) |b ^ x_mask>.
  cplx phase(std::uint64_t basis) const {
    static const cplx kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const int sign = std::popcount(basis & z_mask) & 1;
    return (sign ? -1.0 : 1.0) * kIPow[num_y & 3];
  }
};

PauliMasks masks_of(const PauliTerm& term);

/// Returns coefficient * P |psi>.
Eigen::VectorXcd apply_pauli(const PauliTerm& term, const Eigen::VectorXcd& psi);

/// <psi| P |psi> without the coefficient.
double pauli_expectation(const std::vector<PauliOp>& sites, const Eigen::VectorXcd& psi);

/// Accumulates coeff * P into a dense (2^L x 2^L) matrix.
template <typename Scalar>
void accumulate_dense(const PauliTerm& term,
                      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& out) {
  const PauliMasks m = masks_of(term);
  const auto dim = static_cast<std::uint64_t>(out.rows());
  for (std::uint64_t b = 0; b < dim; ++b) {
    const cplx v = term.coefficient * m.phase(b);
    if constexpr (std::is_same_v<Scalar, double>) {
      out(static_cast<Eigen::Index>(b ^ m.x_mask), static_cast<Eigen::Index>(b)) += v.real();
    } else {
      out(static_cast<Eigen::Index>(b ^ m.x_mask), static_cast<Eigen::Index>(b)) += Scalar(v);
    }
  }
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dense_pauli(const PauliTerm& term,
                                                                   int num_qubits) {
  const Eigen::Index dim = Eigen::Index{1} << num_qubits;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(dim, dim);
  accumulate_dense(term, out);
  return out;
}

/// True when the two strings commute (ignoring coefficients).
bool paulis_commute(const PauliTerm& a, const PauliTerm& b);

}  // namespace qkfe

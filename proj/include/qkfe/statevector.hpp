#pragma once

#include "qkfe/rng.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <vector>

namespace qkfe {

/// Columns of the matrix argument are independent register states, so the
/// same kernels act on a single statevector and on the rows of a density
/// matrix. Qubit j is bit j of the row index.

void apply_1q(Eigen::Ref<Eigen::MatrixXcd> m, int qubit, const Eigen::Matrix2cd& u);
void apply_diag_1q(Eigen::Ref<Eigen::MatrixXcd> m, int qubit, std::complex<double> d0,
                   std::complex<double> d1);
void apply_cz(Eigen::Ref<Eigen::MatrixXcd> m, int a, int b);
/// In-place Pauli string P (unit coefficient) given by masks.
void apply_pauli_masks(Eigen::Ref<Eigen::MatrixXcd> m, std::uint64_t x_mask, std::uint64_t z_mask, int num_y);

Eigen::Matrix2cd rx_matrix(double theta);
Eigen::Matrix2cd ry_matrix(double theta);
Eigen::Matrix2cd rz_matrix(double theta);

struct StateVector {
  int num_qubits = 0;
  Eigen::VectorXcd amplitudes;

  static StateVector zero(int num_qubits);

  std::size_t dim() const { return static_cast<std::size_t>(amplitudes.size()); }
  double norm_squared() const { return amplitudes.squaredNorm(); }
};

/// |amplitude|^2 for every basis state.
Eigen::VectorXd exhaustive_distribution(const StateVector& psi);

/// Draws `shots` outcomes from a probability table by inverse CDF.
std::vector<std::uint64_t> sample_distribution(const Eigen::VectorXd& probs, int shots, Rng& rng);

std::vector<std::uint64_t> measure_samples(const StateVector& psi, int shots, std::uint64_t seed);

}  // namespace qkfe

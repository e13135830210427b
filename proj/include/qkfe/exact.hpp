#pragma once

#include "qkfe/model.hpp"
#include "qkfe/pauli.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace qkfe {

/// Full spectrum of a dense Hamiltonian, ascending, with optional
/// eigenvectors as columns.
struct Spectrum {
  int num_qubits = 0;
  Eigen::VectorXd eigenvalues;
  std::optional<Eigen::MatrixXcd> eigenvectors;

  std::size_t dim() const { return static_cast<std::size_t>(eigenvalues.size()); }
};

Spectrum diagonalize(const HamiltonianSpec& h, bool with_vectors = false);

/// Moments n = 0..N: f_n, composite f_nc and, for observable moments, d_n
/// and d_nc.
struct ExactMoments {
  Eigen::VectorXd f;
  Eigen::VectorXd fc;
  Eigen::VectorXd d;
  Eigen::VectorXd dc;

  int order() const { return static_cast<int>(f.size()) - 1; }
};

ExactMoments exact_moments(const Spectrum& spec, const RescaleWindow& window, int N);

/// d_n = Re Tr[O e^{-i n pi H~}] / D and d_nc = |Tr[O e^{-i n pi H~}]|^2 / D^2
/// for a Pauli string O (coefficient ignored). Needs eigenvectors.
ExactMoments exact_observable_moments(const Spectrum& spec, const RescaleWindow& window,
                                      const PauliTerm& obs, int N);

struct ThermoCurve {
  std::vector<double> T;
  std::vector<double> F;
  std::vector<double> S;
  std::vector<double> C;
  std::vector<double> F_err;
  std::vector<double> S_err;
  std::vector<double> C_err;
  /// Temperatures dropped because the reconstructed partition sum was not
  /// positive there.
  std::vector<double> excluded;

  bool has_bands() const { return !F_err.empty(); }
};

ThermoCurve exact_thermo(const Spectrum& spec, const std::vector<double>& T_grid);

std::vector<double> exact_observable_thermal(const Spectrum& spec, const PauliTerm& obs,
                                             const std::vector<double>& T_grid);

/// `T,F,S,C` (or `T,F,S,C,F_err,S_err,C_err` when bands are present) with
/// 17 significant digits.
std::string thermo_csv(const ThermoCurve& curve);

}  // namespace qkfe

#pragma once

#include "qkfe/pauli.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qkfe {

/// Largest register for which dense (2^L x 2^L) matrices are built.
inline constexpr int kDenseLimit = 14;

enum class LatticeKind { Ring1D, Grid2D };
enum class ModelKind { TFIM, XY };

std::string to_string(LatticeKind k);
std::string to_string(ModelKind k);
LatticeKind lattice_kind_from_string(const std::string& s);
ModelKind model_kind_from_string(const std::string& s);

using Bond = std::pair<int, int>;

/// Periodic ring of `length` sites, or an open rows x cols grid with site
/// index r * cols + c.
struct LatticeSpec {
  LatticeKind kind = LatticeKind::Ring1D;
  int length = 0;
  int rows = 0;
  int cols = 0;

  static LatticeSpec ring(int length);
  static LatticeSpec grid(int rows, int cols);

  int num_sites() const;
  void validate() const;

  /// Nearest-neighbour pairs (min, max), each once, ascending lexicographic.
  std::vector<Bond> bonds() const;

  /// Proper two-coloring, or nullopt for odd rings. Color 0 is sublattice A.
  std::optional<std::vector<int>> two_coloring() const;

  friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;
};

struct HamiltonianSpec {
  LatticeSpec lattice;
  ModelKind model = ModelKind::TFIM;
  double g = 0.0;  // transverse field, TFIM only
  double J = 1.0;
  std::vector<PauliTerm> terms;

  int num_qubits() const { return lattice.num_sites(); }
};

/// TFIM: -g X_j per site, then -J Z_j Z_k per bond. XY: +J X_j X_k and
/// +J Y_j Y_k per bond. Terms with a zero coefficient are omitted.
HamiltonianSpec build_hamiltonian(const LatticeSpec& lattice, ModelKind model,
                                  std::optional<double> g, double J);

/// Unitary Pauli string tau with {tau, H} = 0 built from the sublattice
/// coloring: Z on A and Y on B for the TFIM, Z on A for the XY model.
PauliTerm anticommuting_witness(const HamiltonianSpec& h);

struct SymmetryReport {
  bool has_u1 = false;
  bool has_spinflip = false;
  bool has_anticommuting = false;
};

SymmetryReport symmetry_check(const HamiltonianSpec& h);

/// Dense Hamiltonian. Real models come back with zero imaginary part.
Eigen::MatrixXcd dense_hamiltonian(const HamiltonianSpec& h);
/// Real symmetric form; fails if any term has an odd number of Y factors.
Eigen::MatrixXd dense_hamiltonian_real(const HamiltonianSpec& h);
bool is_real(const HamiltonianSpec& h);

struct RescaleWindow {
  double e_min = 0.0;
  double width = 1.0;

  double rescale(double energy) const { return (energy - e_min) / width; }
};

enum class WindowMethod { Oracle, NormBound };
std::string to_string(WindowMethod m);
WindowMethod window_method_from_string(const std::string& s);

RescaleWindow rescale_window(const HamiltonianSpec& h, WindowMethod method);

/// Canonical JSON with fixed key order:
/// {"model","lattice":{"kind",...},"g","J","terms":[{"coefficient","sites"}]}.
std::string to_canonical_json(const HamiltonianSpec& h);
HamiltonianSpec hamiltonian_from_json(const std::string& text);

}  // namespace qkfe

#pragma once

#include "qkfe/analogue.hpp"
#include "qkfe/model.hpp"
#include "qkfe/pauli.hpp"
#include "qkfe/statevector.hpp"

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace qkfe {

enum class GateKind { Rx, Ry, Rz, CZ, Clifford1Q, PauliLayer, Analogue };
enum class LayerTag { Prep, Evolution, Inverse, Measurement };

std::string to_string(GateKind k);
std::string to_string(LayerTag t);

/// One gate. Rotations use R_a(theta) = exp(-i theta a / 2). `angle` holds
/// the rotation angle, or the evolution time for Analogue blocks, which act
/// on every qubit through the circuit's propagator. `layer` numbers the
/// evolution layers of a Trotter circuit (-1 elsewhere).
struct Gate {
  GateKind kind = GateKind::Rz;
  std::vector<int> targets;
  double angle = 0.0;
  int clifford = 0;
  bool adjoint = false;
  std::vector<PauliOp> paulis;
  LayerTag tag = LayerTag::Evolution;
  int layer = -1;

  bool is_single_qubit() const {
    return kind == GateKind::Rx || kind == GateKind::Ry || kind == GateKind::Rz ||
           kind == GateKind::Clifford1Q;
  }
};

struct Circuit {
  int num_qubits = 0;
  std::vector<Gate> gates;
  std::shared_ptr<const AnaloguePropagator> propagator;

  void validate() const;
  std::size_t count(GateKind k) const;
  void append(const Circuit& other);
};

inline constexpr int kNumCliffords = 24;

/// Single-qubit Clifford element `index` (0..23) of the tabulated group.
const Eigen::Matrix2cd& clifford_matrix(int index);

Eigen::Matrix2cd gate_matrix_1q(const Gate& g);

void apply_gate(Eigen::Ref<Eigen::MatrixXcd> m, const Gate& g, const Circuit& c);
StateVector apply_gate(const StateVector& state, const Gate& g);
void apply_circuit(Eigen::Ref<Eigen::MatrixXcd> m, const Circuit& c);
StateVector run_circuit(const Circuit& c, const StateVector& input);

/// Full 2^L x 2^L unitary of the circuit.
Eigen::MatrixXcd dense_unitary(const Circuit& c);

/// max |U - e^{i phi} V| over the best global phase.
double distance_up_to_phase(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& v);

/// Gate-kind histogram keyed by (kind, sorted targets).
std::map<std::pair<GateKind, std::vector<int>>, int> gate_census(const Circuit& c);

/// One gate per line: `GATE kind targets angle`.
std::string to_text(const Circuit& c);

// Native-gate builders. Rx and arbitrary Ry are conjugated Rz rotations,
// ZZ rotations are CZ-based CNOT pairs around an Rz on the second qubit.
void append_rx(Circuit& c, int q, double theta, LayerTag tag, int layer = -1);
void append_ry(Circuit& c, int q, double theta, LayerTag tag, int layer = -1);
void append_rz(Circuit& c, int q, double theta, LayerTag tag, int layer = -1);
void append_cz(Circuit& c, int a, int b, LayerTag tag, int layer = -1);
void append_rzz(Circuit& c, int a, int b, double theta, LayerTag tag, int layer = -1);

/// Second-order splitting of e^{-iHt} for the TFIM in M steps, appended to c.
/// Evolution layers are numbered 0..2M in time order; even layers are X
/// layers (half steps at both ends), odd layers are ZZ layers.
void append_trotter_evolution(Circuit& c, const HamiltonianSpec& h, double t, int M);

/// Compiled e^{-i n pi H~} with the global phase dropped.
Circuit trotter_circuit(const HamiltonianSpec& h, const RescaleWindow& window, int n, int M);

}  // namespace qkfe

#include "qkfe/circuit.hpp"

#include "qkfe/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace qkfe {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Rot {
  Axis axis;
  double angle;
};

Eigen::Matrix2cd rot(const Rot& r) {
  switch (r.axis) {
    case Axis::X: return rx_matrix(r.angle);
    case Axis::Y: return ry_matrix(r.angle);
    case Axis::Z: return rz_matrix(r.angle);
  }
  return Eigen::Matrix2cd::Identity();
}

std::array<Eigen::Matrix2cd, kNumCliffords> build_cliffords() {
  constexpr double h = kPi / 2;
  // Matrix products as tabulated; the rightmost factor acts first.
  const std::vector<std::vector<Rot>> table = {
      {},
      {{Axis::X, h}},
      {{Axis::X, -h}},
      {{Axis::X, kPi}},
      {{Axis::Y, kPi}},
      {{Axis::X, kPi}, {Axis::Y, kPi}},
      {{Axis::X, h}, {Axis::Y, kPi}},
      {{Axis::X, -h}, {Axis::Y, kPi}},
      {{Axis::Y, kPi}, {Axis::Z, -h}},
      {{Axis::Z, -h}},
      {{Axis::Y, h}, {Axis::Z, -h}},
      {{Axis::Y, -h}, {Axis::Z, -h}},
      {{Axis::Z, h}},
      {{Axis::Y, kPi}, {Axis::Z, h}},
      {{Axis::Y, -h}, {Axis::Z, h}},
      {{Axis::Y, h}, {Axis::Z, h}},
      {{Axis::Z, h}, {Axis::Y, -h}},
      {{Axis::Z, -h}, {Axis::Y, -h}},
      {{Axis::Y, -h}},
      {{Axis::Z, kPi}, {Axis::Y, -h}},
      {{Axis::Z, h}, {Axis::Y, h}},
      {{Axis::Z, -h}, {Axis::Y, h}},
      {{Axis::Y, h}},
      {{Axis::Z, kPi}, {Axis::Y, h}},
  };
  std::array<Eigen::Matrix2cd, kNumCliffords> out;
  for (int i = 0; i < kNumCliffords; ++i) {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
    for (const auto& r : table[static_cast<std::size_t>(i)]) m = m * rot(r);
    out[static_cast<std::size_t>(i)] = m;
  }
  return out;
}

void check_target(int q, int L) {
  if (q < 0 || q >= L) fail(ErrorCode::BadTarget, "gate target " + std::to_string(q) + " out of range");
}

}  // namespace

std::string to_string(GateKind k) {
  switch (k) {
    case GateKind::Rx: return "rx";
    case GateKind::Ry: return "ry";
    case GateKind::Rz: return "rz";
    case GateKind::CZ: return "cz";
    case GateKind::Clifford1Q: return "clifford";
    case GateKind::PauliLayer: return "pauli";
    case GateKind::Analogue: return "analogue";
  }
  return "?";
}

std::string to_string(LayerTag t) {
  switch (t) {
    case LayerTag::Prep: return "prep";
    case LayerTag::Evolution: return "evolution";
    case LayerTag::Inverse: return "inverse";
    case LayerTag::Measurement: return "measurement";
  }
  return "?";
}

void Circuit::validate() const {
  for (const auto& g : gates) {
    for (int q : g.targets) check_target(q, num_qubits);
    if (g.kind == GateKind::CZ) {
      if (g.targets.size() != 2 || g.targets[0] == g.targets[1]) fail(ErrorCode::BadTarget, "CZ needs two distinct targets");
    } else if (g.is_single_qubit() && g.targets.size() != 1) {
      fail(ErrorCode::BadTarget, "single-qubit gate needs exactly one target");
    }
    if (g.kind == GateKind::Clifford1Q && (g.clifford < 0 || g.clifford >= kNumCliffords)) {
      fail(ErrorCode::BadTarget, "Clifford index out of range");
    }
    if (g.kind == GateKind::PauliLayer) validate_term(PauliTerm{1.0, g.paulis}, num_qubits);
    if (g.kind == GateKind::Analogue && !propagator) fail(ErrorCode::BadTarget, "analogue block without a propagator");
  }
}

std::size_t Circuit::count(GateKind k) const {
  return static_cast<std::size_t>(
      std::count_if(gates.begin(), gates.end(), [k](const Gate& g) { return g.kind == k; }));
}

void Circuit::append(const Circuit& other) {
  if (other.num_qubits != num_qubits) fail(ErrorCode::BadTarget, "appending circuits of different widths");
  if (other.propagator) propagator = other.propagator;
  gates.insert(gates.end(), other.gates.begin(), other.gates.end());
}

const Eigen::Matrix2cd& clifford_matrix(int index) {
  static const auto table = build_cliffords();
  if (index < 0 || index >= kNumCliffords) fail(ErrorCode::BadTarget, "Clifford index out of range");
  return table[static_cast<std::size_t>(index)];
}

Eigen::Matrix2cd gate_matrix_1q(const Gate& g) {
  switch (g.kind) {
    case GateKind::Rx: return rx_matrix(g.angle);
    case GateKind::Ry: return ry_matrix(g.angle);
    case GateKind::Rz: return rz_matrix(g.angle);
    case GateKind::Clifford1Q: {
      const Eigen::Matrix2cd& m = clifford_matrix(g.clifford);
      return g.adjoint ? Eigen::Matrix2cd(m.adjoint()) : m;
    }
    default: break;
  }
  fail(ErrorCode::BadTarget, "not a single-qubit gate");
}

void apply_gate(Eigen::Ref<Eigen::MatrixXcd> m, const Gate& g, const Circuit& c) {
  switch (g.kind) {
    case GateKind::Rz:
      apply_diag_1q(m, g.targets[0], std::polar(1.0, -g.angle / 2), std::polar(1.0, g.angle / 2));
      break;
    case GateKind::Rx:
    case GateKind::Ry:
    case GateKind::Clifford1Q:
      apply_1q(m, g.targets[0], gate_matrix_1q(g));
      break;
    case GateKind::CZ:
      apply_cz(m, g.targets[0], g.targets[1]);
      break;
    case GateKind::PauliLayer: {
      const PauliMasks pm = masks_of(PauliTerm{1.0, g.paulis});
      apply_pauli_masks(m, pm.x_mask, pm.z_mask, pm.num_y);
      break;
    }
    case GateKind::Analogue:
      if (!c.propagator) fail(ErrorCode::BadTarget, "analogue block without a propagator");
      c.propagator->apply(m, g.angle);
      break;
  }
}

StateVector apply_gate(const StateVector& state, const Gate& g) {
  Circuit c;
  c.num_qubits = state.num_qubits;
  c.gates.push_back(g);
  c.validate();
  StateVector out = state;
  apply_gate(out.amplitudes, g, c);
  return out;
}

void apply_circuit(Eigen::Ref<Eigen::MatrixXcd> m, const Circuit& c) {
  for (const auto& g : c.gates) apply_gate(m, g, c);
}

StateVector run_circuit(const Circuit& c, const StateVector& input) {
  c.validate();
  StateVector out = input;
  apply_circuit(out.amplitudes, c);
  return out;
}

Eigen::MatrixXcd dense_unitary(const Circuit& c) {
  c.validate();
  const Eigen::Index dim = Eigen::Index{1} << c.num_qubits;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
  apply_circuit(u, c);
  return u;
}

double distance_up_to_phase(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& v) {
  const cplx overlap = (v.adjoint() * u).trace();
  const cplx phase = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : cplx(1.0);
  return (u - phase * v).cwiseAbs().maxCoeff();
}

std::map<std::pair<GateKind, std::vector<int>>, int> gate_census(const Circuit& c) {
  std::map<std::pair<GateKind, std::vector<int>>, int> out;
  for (const auto& g : c.gates) {
    auto t = g.targets;
    std::sort(t.begin(), t.end());
    ++out[{g.kind, t}];
  }
  return out;
}

std::string to_text(const Circuit& c) {
  std::ostringstream os;
  for (const auto& g : c.gates) {
    os << "GATE " << to_string(g.kind) << ' ';
    if (g.kind == GateKind::PauliLayer) {
      for (std::size_t k = 0; k < g.paulis.size(); ++k) {
        os << (k ? "," : "") << axis_char(g.paulis[k].axis) << g.paulis[k].qubit;
      }
    } else if (g.kind == GateKind::Analogue) {
      os << "all";
    } else {
      for (std::size_t k = 0; k < g.targets.size(); ++k) os << (k ? "," : "") << g.targets[k];
    }
    os << ' ';
    if (g.kind == GateKind::Clifford1Q) {
      os << g.clifford << (g.adjoint ? "^dg" : "");
    } else {
      os << fmt17(g.angle);
    }
    os << '\n';
  }
  return os.str();
}

void append_rz(Circuit& c, int q, double theta, LayerTag tag, int layer) {
  Gate g;
  g.kind = GateKind::Rz;
  g.targets = {q};
  g.angle = theta;
  g.tag = tag;
  g.layer = layer;
  c.gates.push_back(g);
}

namespace {

void append_native(Circuit& c, GateKind kind, int q, double theta, LayerTag tag, int layer) {
  Gate g;
  g.kind = kind;
  g.targets = {q};
  g.angle = theta;
  g.tag = tag;
  g.layer = layer;
  c.gates.push_back(g);
}

}  // namespace

void append_rx(Circuit& c, int q, double theta, LayerTag tag, int layer) {
  append_native(c, GateKind::Ry, q, -kPi / 2, tag, layer);
  append_rz(c, q, theta, tag, layer);
  append_native(c, GateKind::Ry, q, kPi / 2, tag, layer);
}

void append_ry(Circuit& c, int q, double theta, LayerTag tag, int layer) {
  append_native(c, GateKind::Rx, q, kPi / 2, tag, layer);
  append_rz(c, q, theta, tag, layer);
  append_native(c, GateKind::Rx, q, -kPi / 2, tag, layer);
}

void append_cz(Circuit& c, int a, int b, LayerTag tag, int layer) {
  Gate g;
  g.kind = GateKind::CZ;
  g.targets = {a, b};
  g.tag = tag;
  g.layer = layer;
  c.gates.push_back(g);
}

void append_rzz(Circuit& c, int a, int b, double theta, LayerTag tag, int layer) {
  for (int half = 0; half < 2; ++half) {
    if (half == 1) append_rz(c, b, theta, tag, layer);
    append_native(c, GateKind::Ry, b, -kPi / 2, tag, layer);
    append_cz(c, a, b, tag, layer);
    append_native(c, GateKind::Ry, b, kPi / 2, tag, layer);
  }
}

void append_trotter_evolution(Circuit& c, const HamiltonianSpec& h, double t, int M) {
  if (h.model != ModelKind::TFIM) fail(ErrorCode::UnsupportedModel, "digital compilation supports the TFIM only");
  if (M < 1) fail(ErrorCode::ValidationError, "Trotter step count must be positive");
  if (t == 0.0) return;
  std::vector<std::pair<int, double>> x_terms;
  std::vector<std::tuple<int, int, double>> zz_terms;
  for (const auto& term : h.terms) {
    if (term.sites.size() == 1 && term.sites[0].axis == Axis::X) {
      x_terms.emplace_back(term.sites[0].qubit, term.coefficient);
    } else if (term.sites.size() == 2 && term.sites[0].axis == Axis::Z && term.sites[1].axis == Axis::Z) {
      zz_terms.emplace_back(term.sites[0].qubit, term.sites[1].qubit, term.coefficient);
    } else {
      fail(ErrorCode::UnsupportedModel, "term " + to_string(term) + " has no digital compilation");
    }
  }
  const double tau = t / M;
  auto x_layer = [&](double scale, int layer) {
    for (auto [q, coeff] : x_terms) append_rx(c, q, 2.0 * coeff * tau * scale, LayerTag::Evolution, layer);
  };
  int layer = 0;
  x_layer(0.5, layer++);
  for (int step = 0; step < M; ++step) {
    for (auto [a, b, coeff] : zz_terms) append_rzz(c, a, b, 2.0 * coeff * tau, LayerTag::Evolution, layer);
    ++layer;
    x_layer(step + 1 < M ? 1.0 : 0.5, layer++);
  }
}

Circuit trotter_circuit(const HamiltonianSpec& h, const RescaleWindow& window, int n, int M) {
  if (h.model != ModelKind::TFIM) fail(ErrorCode::UnsupportedModel, "digital compilation supports the TFIM only");
  if (n < 0) fail(ErrorCode::ValidationError, "moment order must be non-negative");
  Circuit c;
  c.num_qubits = h.num_qubits();
  append_trotter_evolution(c, h, n * kPi / window.width, M);
  return c;
}

}  // namespace qkfe

#include "oracle.hpp"

#include "qkfe/analogue.hpp"
#include "qkfe/circuit.hpp"
#include "qkfe/error.hpp"
#include "qkfe/statevector.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

using namespace qkfe;

namespace {

constexpr double kPi = std::numbers::pi;

oracle::Mat rot(char axis, double theta) {
  return oracle::expm(oracle::cplx(0, -theta / 2) * oracle::pauli(axis));
}

Circuit empty(int L) {
  Circuit c;
  c.num_qubits = L;
  return c;
}

// Projective identification of 2x2 unitaries for the Clifford group test.
bool same_up_to_phase(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  return oracle::phase_distance(a, b) < 1e-12;
}

}  // namespace

TEST_CASE("rotation matrices are exponentials of Paulis") {
  for (double t : {0.3, -1.7, kPi}) {
    CHECK((rx_matrix(t) - rot('X', t)).norm() < 1e-14);
    CHECK((ry_matrix(t) - rot('Y', t)).norm() < 1e-14);
    CHECK((rz_matrix(t) - rot('Z', t)).norm() < 1e-14);
  }
}

TEST_CASE("compiled rotations equal the target up to phase") {
  const double t = 0.913;
  Circuit cx = empty(2), cy = empty(2), czz = empty(2);
  append_rx(cx, 1, t, LayerTag::Evolution);
  append_ry(cy, 0, t, LayerTag::Evolution);
  append_rzz(czz, 0, 1, t, LayerTag::Evolution);
  CHECK(oracle::phase_distance(dense_unitary(cx), oracle::one_qubit(2, 1, rot('X', t))) < 1e-12);
  CHECK(oracle::phase_distance(dense_unitary(cy), oracle::one_qubit(2, 0, rot('Y', t))) < 1e-12);
  const oracle::Mat zz = oracle::expm(oracle::cplx(0, -t / 2) * oracle::string_op("ZZ"));
  CHECK(oracle::phase_distance(dense_unitary(czz), zz) < 1e-12);
  // Rx and arbitrary Ry use only pi/2 native rotations around an Rz.
  CHECK(cx.count(GateKind::Rz) == 1);
  CHECK(cx.count(GateKind::Ry) == 2);
  CHECK(cy.count(GateKind::Rx) == 2);
  CHECK(czz.count(GateKind::CZ) == 2);
}

TEST_CASE("CZ and Pauli layers on basis states") {
  Circuit c = empty(3);
  append_cz(c, 0, 2, LayerTag::Evolution);
  oracle::Mat cz = oracle::Mat::Identity(8, 8);
  cz(5, 5) = -1;
  cz(7, 7) = -1;
  CHECK((dense_unitary(c) - cz).norm() < 1e-14);

  Circuit p = empty(3);
  Gate g;
  g.kind = GateKind::PauliLayer;
  g.paulis = {{0, Axis::Y}, {2, Axis::X}};
  p.gates.push_back(g);
  CHECK((dense_unitary(p) - oracle::string_op("YIX")).norm() < 1e-14);
}

TEST_CASE("the Clifford table is the 24-element group") {
  std::vector<Eigen::Matrix2cd> elems;
  for (int i = 0; i < kNumCliffords; ++i) elems.push_back(clifford_matrix(i));
  for (int i = 0; i < kNumCliffords; ++i) {
    CHECK((elems[i].adjoint() * elems[i] - Eigen::Matrix2cd::Identity()).norm() < 1e-13);
    for (int j = 0; j < i; ++j) CHECK_FALSE(same_up_to_phase(elems[i], elems[j]));
  }
  // Closure under multiplication, up to phase.
  for (int i = 0; i < kNumCliffords; ++i) {
    for (int j = 0; j < kNumCliffords; ++j) {
      const Eigen::Matrix2cd prod = elems[i] * elems[j];
      bool found = false;
      for (const auto& e : elems) found = found || same_up_to_phase(prod, e);
      CHECK(found);
    }
  }
  // Each element maps Z to a signed Pauli.
  std::set<std::pair<char, int>> images;
  for (const auto& u : elems) {
    const Eigen::Matrix2cd img = u * oracle::pauli('Z') * u.adjoint();
    for (char a : {'X', 'Y', 'Z'}) {
      for (int s : {1, -1}) {
        if ((img - static_cast<double>(s) * oracle::pauli(a)).norm() < 1e-12) images.insert({a, s});
      }
    }
  }
  CHECK(images.size() == 6);
  CHECK(same_up_to_phase(clifford_matrix(0), Eigen::Matrix2cd::Identity()));
}

TEST_CASE("Trotter layer structure for one step on a 3-ring") {
  const HamiltonianSpec h = build_hamiltonian(LatticeSpec::ring(3), ModelKind::TFIM, 1.0, 1.0);
  const Circuit c = trotter_circuit(h, rescale_window(h, WindowMethod::Oracle), 1, 1);
  // Two half X layers of 3 Rx (Ry Rz Ry each) and one ZZ layer of 3 bonds.
  CHECK(c.count(GateKind::CZ) == 6);
  CHECK(c.count(GateKind::Rz) == 9);
  CHECK(c.count(GateKind::Ry) == 12 + 12);
  std::set<int> layers;
  for (const auto& g : c.gates) layers.insert(g.layer);
  CHECK(layers == std::set<int>{0, 1, 2});
}

TEST_CASE("Trotter error shrinks fourfold per doubling of the step count") {
  const HamiltonianSpec h = build_hamiltonian(LatticeSpec::ring(4), ModelKind::TFIM, 1.0, 1.0);
  const RescaleWindow w = rescale_window(h, WindowMethod::Oracle);
  const oracle::Mat H = oracle::tfim(4, oracle::ring_bonds(4), 1.0, 1.0);
  const oracle::Mat U = oracle::expm(oracle::cplx(0, -kPi / w.width) * H);
  Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(16);
  zero(0) = 1;
  const Eigen::VectorXcd exact = U * zero;
  double prev = 0.0;
  for (int M : {1, 2, 4, 8}) {
    const StateVector out = run_circuit(trotter_circuit(h, w, 1, M), StateVector::zero(4));
    const double infid = 1.0 - std::norm(exact.dot(out.amplitudes));
    if (M > 1) {
      const double ratio = prev / std::sqrt(infid);
      CHECK(ratio > 3.5);
      CHECK(ratio < 4.5);
    }
    prev = std::sqrt(infid);
  }
}

TEST_CASE("Trotter compilation rejects the XY model") {
  const HamiltonianSpec h = build_hamiltonian(LatticeSpec::ring(4), ModelKind::XY, std::nullopt, 1.0);
  CHECK_THROWS_AS(trotter_circuit(h, rescale_window(h, WindowMethod::Oracle), 1, 1), Error);
}

TEST_CASE("analogue propagator matches the matrix exponential") {
  for (const auto& h : {build_hamiltonian(LatticeSpec::ring(4), ModelKind::TFIM, 0.6, 1.0),
                        build_hamiltonian(LatticeSpec::grid(2, 2), ModelKind::XY, std::nullopt, 1.0)}) {
    const AnaloguePropagator p(h);
    const oracle::Mat H = dense_hamiltonian(h);
    for (double t : {0.4, -1.3}) {
      CHECK((p.unitary(t) - oracle::expm(oracle::cplx(0, -t) * H)).norm() < 1e-11);
    }
    CHECK(analogue_propagator(h).get() == analogue_propagator(h).get());
  }
}

TEST_CASE("sampling follows the distribution and is seeded") {
  Eigen::VectorXd p(4);
  p << 0.1, 0.2, 0.3, 0.4;
  Rng a(7), b(7);
  const auto s1 = sample_distribution(p, 20000, a);
  const auto s2 = sample_distribution(p, 20000, b);
  CHECK(s1 == s2);
  std::vector<int> counts(4, 0);
  for (auto s : s1) ++counts[s];
  for (int k = 0; k < 4; ++k) CHECK(counts[k] / 20000.0 == doctest::Approx(p(k)).epsilon(0.05));
}

TEST_CASE("circuit text form") {
  Circuit c = empty(2);
  append_cz(c, 0, 1, LayerTag::Evolution);
  append_rz(c, 1, 0.5, LayerTag::Evolution);
  const std::string text = to_text(c);
  CHECK(text.find("GATE cz 0,1 0\n") != std::string::npos);
  CHECK(text.find("GATE rz 1 0.5\n") != std::string::npos);
}

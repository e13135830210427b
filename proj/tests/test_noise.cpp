#include "oracle.hpp"

#include "qkfe/amplify.hpp"
#include "qkfe/error.hpp"
#include "qkfe/executor.hpp"
#include "qkfe/noise.hpp"
#include "qkfe/protocol.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace qkfe;

namespace {

// Depolarizing channel as the uniform Pauli twirl on `qubits`.
oracle::Mat pauli_twirl(const oracle::Mat& rho, int L, const std::vector<int>& qubits, double p) {
  const int k = static_cast<int>(qubits.size());
  oracle::Mat avg = oracle::Mat::Zero(rho.rows(), rho.cols());
  const char axes[4] = {'I', 'X', 'Y', 'Z'};
  for (int code = 0; code < (1 << (2 * k)); ++code) {
    std::vector<std::pair<int, char>> sites;
    for (int i = 0; i < k; ++i) sites.push_back({qubits[i], axes[(code >> (2 * i)) & 3]});
    const oracle::Mat P = oracle::string_op(oracle::place(L, sites));
    avg += P * rho * P.adjoint();
  }
  return (1 - p) * rho + p * avg / static_cast<double>(1 << (2 * k));
}

oracle::Mat random_density(int L, unsigned seed) {
  Rng rng(seed);
  const Eigen::Index D = Eigen::Index{1} << L;
  oracle::Mat a(D, D);
  for (Eigen::Index i = 0; i < D; ++i) {
    for (Eigen::Index j = 0; j < D; ++j) a(i, j) = oracle::cplx(uniform01(rng) - 0.5, uniform01(rng) - 0.5);
  }
  oracle::Mat rho = a * a.adjoint();
  return rho / rho.trace();
}

Circuit ghz_like(int L) {
  Circuit c;
  c.num_qubits = L;
  append_ry(c, 0, 1.1, LayerTag::Evolution);
  for (int q = 1; q < L; ++q) {
    append_ry(c, q, std::numbers::pi / 2, LayerTag::Evolution);
    append_cz(c, q - 1, q, LayerTag::Evolution);
    append_rz(c, q, 0.3 * q, LayerTag::Evolution);
  }
  return c;
}

}  // namespace

TEST_CASE("density channel equals the Pauli twirl") {
  const oracle::Mat rho0 = random_density(3, 11);
  for (const std::vector<int>& qs : {std::vector<int>{1}, std::vector<int>{0, 2}}) {
    Eigen::MatrixXcd rho = rho0;
    depolarize_density(rho, qs, 0.37);
    CHECK((rho - pauli_twirl(rho0, 3, qs, 0.37)).norm() < 1e-13);
  }
}

TEST_CASE("global channel on an outcome table") {
  Eigen::VectorXd d(4);
  d << 0.5, 0.25, 0.25, 0.0;
  const Eigen::VectorXd out = globally_depolarize(d, 0.2);
  CHECK(out(0) == doctest::Approx(0.8 * 0.5 + 0.05));
  CHECK(out(3) == doctest::Approx(0.05));
  CHECK(out.sum() == doctest::Approx(1.0));
}

TEST_CASE("noise attachment rules") {
  NoiseModel n;
  n.p1 = 0.01;
  n.p2 = 0.02;
  n.p_t = 0.5;
  Gate rz;
  rz.kind = GateKind::Rz;
  rz.targets = {0};
  CHECK(noise_after(rz, n, 2).empty());
  n.noisy_rz = true;
  CHECK(noise_after(rz, n, 2).size() == 1);
  Gate cz;
  cz.kind = GateKind::CZ;
  cz.targets = {0, 1};
  const auto sites = noise_after(cz, n, 2);
  REQUIRE(sites.size() == 1);
  CHECK(sites[0].qubits == std::vector<int>{0, 1});
  CHECK(sites[0].p == 0.02);
  Gate a;
  a.kind = GateKind::Analogue;
  a.angle = -2.0;
  const auto as = noise_after(a, n, 3);
  REQUIRE(as.size() == 3);
  CHECK(as[0].p == doctest::Approx(1 - std::exp(-1.0)));
  NoiseModel bad;
  bad.p1 = 1.5;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("density-matrix executor against a dense channel composition") {
  const int L = 3;
  const Circuit c = ghz_like(L);
  NoiseModel n;
  n.p1 = 0.03;
  n.p2 = 0.05;
  oracle::Mat rho = oracle::Mat::Zero(8, 8);
  rho(0, 0) = 1;
  for (const auto& g : c.gates) {
    Circuit one;
    one.num_qubits = L;
    one.gates = {g};
    const oracle::Mat U = dense_unitary(one);
    rho = U * rho * U.adjoint();
    for (const auto& s : noise_after(g, n, L)) rho = pauli_twirl(rho, L, s.qubits, s.p);
  }
  const Eigen::VectorXd got = exact_distribution(c, n);
  for (Eigen::Index i = 0; i < 8; ++i) CHECK(got(i) == doctest::Approx(rho(i, i).real()).epsilon(1e-12));
}

TEST_CASE("trajectories average to the density-matrix result") {
  const Circuit c = ghz_like(3);
  NoiseModel n;
  n.p1 = 0.05;
  n.p2 = 0.1;
  const Eigen::VectorXd exact = exact_distribution(c, n);
  Rng rng(3);
  const int shots = 40000;
  Eigen::VectorXd freq = Eigen::VectorXd::Zero(8);
  for (auto s : sample_outcomes(c, n, shots, rng)) freq(static_cast<Eigen::Index>(s)) += 1.0 / shots;
  for (Eigen::Index i = 0; i < 8; ++i) {
    const double sigma = std::sqrt(exact(i) * (1 - exact(i)) / shots);
    CHECK(std::abs(freq(i) - exact(i)) < 5 * sigma + 1e-12);
  }
}

TEST_CASE("only-global noise takes the analytic shortcut") {
  const Circuit c = ghz_like(3);
  NoiseModel n;
  n.p_global = 0.3;
  const Eigen::VectorXd clean = exact_distribution(c, NoiseModel{});
  const Eigen::VectorXd got = exact_distribution(c, n);
  CHECK((got - (0.7 * clean.array() + 0.3 / 8).matrix()).norm() < 1e-14);
}

TEST_CASE("amplification schedules leave the noiseless unitary unchanged") {
  const HamiltonianSpec h = build_hamiltonian(LatticeSpec::ring(4), ModelKind::TFIM, 1.0, 1.0);
  const Circuit c = trotter_circuit(h, rescale_window(h, WindowMethod::Oracle), 2, 2);
  const oracle::Mat U = dense_unitary(c);
  const int ncz = static_cast<int>(c.count(GateKind::CZ));

  AmplifySchedule rep;
  rep.repeat = 3;
  const AmplifiedCircuit a = amplify_noise(c, rep);
  CHECK(a.r_eff == 3.0);
  CHECK(a.circuit.count(GateKind::CZ) == 3 * c.count(GateKind::CZ));
  CHECK(oracle::phase_distance(dense_unitary(a.circuit), U) < 1e-10);

  Rng rng(5);
  AmplifySchedule sub;
  sub.kind = AmplifyKind::Subset;
  sub.positions = random_subset(ncz, 3, rng);
  const AmplifiedCircuit b = amplify_noise(c, sub);
  CHECK(b.r_eff == doctest::Approx(static_cast<double>(ncz + 6) / ncz));
  CHECK(oracle::phase_distance(dense_unitary(b.circuit), U) < 1e-10);

  rep.repeat = 2;
  CHECK_THROWS_AS(amplify_noise(c, rep), Error);
}

TEST_CASE("subset formula and selections") {
  CHECK(subset_r_eff(8, 1) == 1.25);
  CHECK(subset_r_eff(17, 2) == 21.0 / 17.0);
  Rng rng(1);
  const auto s = random_subset(10, 4, rng);
  CHECK(s.size() == 4);
  CHECK(std::is_sorted(s.begin(), s.end()));
  CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
  CHECK_THROWS_AS(random_subset(3, 4, rng), Error);
}

TEST_CASE("analogue folds net the original evolution") {
  for (const auto& h : {build_hamiltonian(LatticeSpec::grid(2, 2), ModelKind::XY, std::nullopt, 1.0),
                        build_hamiltonian(LatticeSpec::ring(4), ModelKind::TFIM, 0.8, 1.0)}) {
    Circuit c;
    c.num_qubits = 4;
    append_evolution(c, h, 0.77, EvolutionSpec{EvolutionKind::Analogue, 1});
    const oracle::Mat U = dense_unitary(c);
    const auto variants = fold_variants(h, 4);
    REQUIRE(variants.size() == 4);
    CHECK(variants[0].fold_q.empty());
    CHECK_FALSE(variants[3].fold_q.empty());
    for (const auto& v : variants) {
      const AmplifiedCircuit a = amplify_noise(c, v);
      CHECK(a.r_eff == 2.0);
      CHECK(oracle::phase_distance(dense_unitary(a.circuit), U) < 1e-10);
      double t = 0.0;
      for (const auto& g : a.circuit.gates) t += g.kind == GateKind::Analogue ? g.angle : 0.0;
      CHECK(t == doctest::Approx(2 * 0.77));
    }
  }
  CHECK_THROWS_AS(fold_variants(build_hamiltonian(LatticeSpec::ring(3), ModelKind::TFIM, 1.0, 1.0), 2), Error);
}

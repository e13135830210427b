#include "oracle.hpp"

#include "qkfe/error.hpp"
#include "qkfe/exact.hpp"
#include "qkfe/executor.hpp"
#include "qkfe/mitigate.hpp"

#include <doctest.h>

#include <cmath>

using namespace qkfe;

namespace {

EstimatorConfig exhaustive() {
  EstimatorConfig c;
  c.mode = EstimatorMode::Exhaustive;
  return c;
}

}  // namespace

TEST_CASE("GEM inverts a global depolarizing channel exactly") {
  const double t0 = 0.37, e0 = 1.0, c = 0.0625;
  for (double p : {0.05, 0.2, 0.5}) {
    const double t = (1 - p) * t0 + p * c;
    const double e = (1 - p) * e0 + p * c;
    const MitigatedValue v = gem(t, e, e0, c);
    CHECK(v.p_avg == doctest::Approx(p).epsilon(1e-14));
    CHECK(std::abs(v.mitigated - t0) < 1e-14);
  }
  CHECK_THROWS_AS(gem(0.1, 0.2, 0.5, 0.5), Error);
  try {
    gem(0.1, 0.0625, 1.0, 0.0625);
    FAIL("expected TotalDepolarization");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::TotalDepolarization);
  }
}

TEST_CASE("LZNE is exact for linear zeta") {
  const double a = 0.81, b = -0.047;
  const MitigatedValue v = lzne({{1.0, a + b}, {3.0, a + 3 * b}}, 1.0);
  CHECK(v.mitigated == doctest::Approx(a).epsilon(1e-15));
  CHECK(v.mitigated == (3 * (a + b) - (a + 3 * b)) / 2);
  const MitigatedValue w = lzne({{1.0, a + b}, {1.25, a + 1.25 * b}}, 1.0);
  CHECK(w.mitigated == doctest::Approx(a).epsilon(1e-13));
  CHECK_THROWS_AS(lzne({{2.0, 0.1}, {2.0, 0.2}}, 1.0), Error);
  CHECK(zeta_value(0.4, 0.8, 1.0) == 0.5);
  CHECK_THROWS_AS(zeta_value(0.4, 0.0, 1.0), Error);
}

TEST_CASE("MAD filter") {
  const std::vector<double> v{1.0, 1.1, 0.9, 1.05, 0.95, 5.0};
  const MadResult r = mad_filter(v, 2.0);
  CHECK(r.removed == std::vector<std::size_t>{5});
  CHECK(r.kept.size() == 5);
  // Median 2, MAD 1, sigma 1.4826: 2 + 2 sigma sits exactly on the threshold and stays.
  const MadResult edge = mad_filter({1.0, 2.0, 3.0, 2.0 + 2 * kMadScale}, 2.0);
  CHECK(edge.removed.empty());
  CHECK_THROWS_AS(mad_filter({1.0, 2.0}, 2.0), Error);
}

TEST_CASE("error-estimation circuits compose to the identity with the target's census") {
  for (int L : {2, 3, 4}) {
    const HamiltonianSpec h = build_hamiltonian(LatticeSpec::ring(L), ModelKind::TFIM, 0.9, 1.0);
    const RescaleWindow w = rescale_window(h, WindowMethod::Oracle);
    for (int M = 1; M <= 4; ++M) {
      for (int n : {1, 3}) {
        const Circuit target = trotter_circuit(h, w, n, M);
        const Circuit est = build_error_estimation_circuit(target);
        const oracle::Mat I = oracle::Mat::Identity(Eigen::Index{1} << L, Eigen::Index{1} << L);
        CHECK(oracle::phase_distance(dense_unitary(est), I) < 1e-10);
        CHECK(gate_census(est) == gate_census(target));
      }
    }
  }
}

TEST_CASE("estimation circuits of full protocol tasks") {
  const HamiltonianSpec h = build_hamiltonian(LatticeSpec::ring(4), ModelKind::TFIM, 1.0, 1.0);
  const RescaleWindow w = rescale_window(h, WindowMethod::Oracle);
  const ProtocolTask vc = vc_task(h, w, 2, EvolutionSpec{EvolutionKind::Trotter, 2}, {{1, 5, 9, 20}}, std::nullopt);
  const Circuit est = build_error_estimation_circuit(vc.circuits[0]);
  const Eigen::VectorXd p = exact_distribution(est, NoiseModel{});
  CHECK(p(0) == doctest::Approx(1.0).epsilon(1e-12));

  const HamiltonianSpec xy = build_hamiltonian(LatticeSpec::grid(2, 2), ModelKind::XY, std::nullopt, 1.0);
  const RescaleWindow wx = rescale_window(xy, WindowMethod::Oracle);
  const ProtocolTask rs = rs_task(xy, wx, 3, EvolutionSpec{EvolutionKind::Analogue, 1}, {1, 2, 4, 0});
  const std::vector<PauliOp> anti{{0, Axis::Z}, {3, Axis::Z}};
  const Circuit plus = build_error_estimation_circuit(rs.circuits[0], anti);
  const Circuit minus = build_error_estimation_circuit(rs.circuits[1], anti);
  CHECK(exact_distribution(plus, NoiseModel{})(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(exact_distribution(minus, NoiseModel{})(0) == doctest::Approx(0.0).scale(1).epsilon(1e-12));
  CHECK(plus.count(GateKind::Analogue) == 2);
  CHECK_THROWS_AS(build_error_estimation_circuit(rs.circuits[0]), Error);
}

TEST_CASE("asymmetric layers cannot be inverted by flipping Rz") {
  Circuit c;
  c.num_qubits = 1;
  append_rz(c, 0, 0.1, LayerTag::Evolution, 0);
  append_rz(c, 0, 0.3, LayerTag::Evolution, 1);
  append_rz(c, 0, 0.2, LayerTag::Evolution, 2);
  try {
    build_error_estimation_circuit(c);
    FAIL("expected NotInvertibleByRzFlip");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotInvertibleByRzFlip);
  }
}

TEST_CASE("GEM through the estimator under global depolarization") {
  const HamiltonianSpec h = build_hamiltonian(LatticeSpec::ring(2), ModelKind::TFIM, 1.0, 1.0);
  const RescaleWindow w = rescale_window(h, WindowMethod::Oracle);
  const EvolutionSpec evo{EvolutionKind::Trotter, 1};
  MitigationPlan plan;
  plan.method = MitigationMethod::Gem;
  const MomentEstimate clean = vc_moment_estimate(h, w, 1, evo, exhaustive(), NoiseModel{});
  for (double p : {0.05, 0.2, 0.5}) {
    NoiseModel noise;
    noise.p_global = p;
    const MitigatedEstimate m = run_mitigated_estimate(h, w, 1, std::nullopt, ProtocolKind::VirtualCopy, plan, noise,
                                                       evo, exhaustive());
    CHECK(std::abs(m.mitigated_mean - clean.mean) < 1e-10);
    CHECK(std::abs(m.raw_mean - clean.mean) > 1e-3);
  }
}

TEST_CASE("mitigation plan validation") {
  MitigationPlan p;
  p.method = MitigationMethod::Lzne;
  p.r2 = 2.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p.r2 = 3.0;
  CHECK_NOTHROW(p.validate());
  p.amplification = AmplifyKind::AnalogueFold;
  CHECK_THROWS_AS(p.validate(), Error);
  p.r2 = 2.0;
  CHECK_NOTHROW(p.validate());
  p.amplification = AmplifyKind::Subset;
  p.r1 = 3.0;
  p.r2 = 5.0;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("audit log round trip and replay") {
  const HamiltonianSpec h = build_hamiltonian(LatticeSpec::ring(2), ModelKind::TFIM, 1.0, 1.0);
  const RescaleWindow w = rescale_window(h, WindowMethod::Oracle);
  EstimatorConfig cfg;
  cfg.num_random_unitaries = 12;
  cfg.shots_per_unitary = 40;
  cfg.seed = 3;
  NoiseModel noise;
  noise.p2 = 0.02;
  MitigationPlan plan;
  plan.method = MitigationMethod::Lzne;
  plan.mad_enabled = true;
  const MitigatedEstimate m = run_mitigated_estimate(h, w, 1, std::nullopt, ProtocolKind::VirtualCopy, plan, noise,
                                                     EvolutionSpec{EvolutionKind::Trotter, 1}, cfg);
  const auto back = audit_from_jsonl(audit_jsonl({m}));
  REQUIRE(back.size() == 12);
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].target == m.audit[i].target);
    CHECK(remitigate(back[i]) == m.audit[i].mitigated);
  }
  const MitigatedEstimate again = summarize_audit(1, back, true, 2.0);
  CHECK(again.mitigated_mean == m.mitigated_mean);
  CHECK(again.outliers_removed == m.outliers_removed);
}

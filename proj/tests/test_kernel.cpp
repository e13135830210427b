#include "oracle.hpp"

#include "qkfe/error.hpp"
#include "qkfe/exact.hpp"
#include "qkfe/kernel.hpp"
#include "qkfe/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace qkfe;

namespace {

constexpr double kPi = std::numbers::pi;

// Jackson damping as the normalised autocorrelation of a sine window.
std::vector<double> jackson_autocorrelation(int N) {
  std::vector<double> a(static_cast<std::size_t>(N));
  for (int k = 0; k < N; ++k) a[static_cast<std::size_t>(k)] = std::sin(kPi * (k + 1) / (N + 1));
  double norm = 0.0;
  for (double v : a) norm += v * v;
  std::vector<double> h;
  for (int n = 0; n <= N; ++n) {
    double s = 0.0;
    for (int k = 0; k + n < N; ++k) s += a[static_cast<std::size_t>(k)] * a[static_cast<std::size_t>(k + n)];
    h.push_back(s / norm);
  }
  return h;
}

// Composite Simpson rule for int_0^1 w(eps) e^{-x eps} d eps.
template <typename Fn>
double simpson(Fn fn, int panels = 4000) {
  const double h = 1.0 / panels;
  double s = fn(0.0) + fn(1.0);
  for (int i = 1; i < panels; ++i) s += fn(i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

struct Fixture {
  HamiltonianSpec h;
  Spectrum spec;
  RescaleWindow w;
  int L;

  explicit Fixture(HamiltonianSpec hs)
      : h(std::move(hs)), spec(diagonalize(h, true)), w(rescale_window(h, WindowMethod::Oracle)), L(h.num_qubits()) {}
};

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("Jackson coefficients equal the sine-window autocorrelation") {
  for (int N : {1, 4, 8, 33}) {
    const KernelCoefficients k = jackson_coefficients(N);
    const auto want = jackson_autocorrelation(N);
    REQUIRE(k.h.size() == N + 1);
    for (int n = 0; n <= N; ++n) CHECK(k.h(n) == doctest::Approx(want[static_cast<std::size_t>(n)]).scale(1).epsilon(1e-13));
  }
  CHECK_THROWS_AS(jackson_coefficients(0), Error);
}

TEST_CASE("phi_n are the cosine-weighted Laplace integrals") {
  for (double x : {0.05, 0.7, 1.0, 3.0, 25.0}) {
    CHECK(phi(0, x) == doctest::Approx(simpson([x](double e) { return std::exp(-x * e); })).epsilon(1e-10));
    for (int n : {1, 2, 5}) {
      const double want = simpson([x, n](double e) { return 2.0 * std::cos(n * kPi * e) * std::exp(-x * e); });
      CHECK(phi(n, x) == doctest::Approx(want).epsilon(1e-9).scale(1));
    }
  }
  CHECK_THROWS_AS(phi(1, 0.0), Error);
  CHECK_THROWS_AS(phi(0, -1.0), Error);
}

TEST_CASE("phi derivatives agree with finite differences on both sides of the series switch") {
  const double h = 1e-4;
  for (int n : {0, 1, 4}) {
    for (double x : {0.3, 0.999, 1.001, 6.0}) {
      const Derivatives d = phi_derivatives(n, x);
      const double d1 = (phi(n, x + h) - phi(n, x - h)) / (2 * h);
      const double d2 = (phi(n, x + h) - 2 * phi(n, x) + phi(n, x - h)) / (h * h);
      CHECK(d.d1 == doctest::Approx(d1).epsilon(1e-7).scale(1));
      CHECK(d.d2 == doctest::Approx(d2).epsilon(1e-4).scale(1));
    }
  }
}

TEST_CASE("reconstructed density integrates to one") {
  const Fixture f(build_hamiltonian(LatticeSpec::ring(4), ModelKind::TFIM, 1.0, 1.0));
  const ExactMoments m = exact_moments(f.spec, f.w, 16);
  const KernelCoefficients k = jackson_coefficients(16);
  Eigen::VectorXd eps = Eigen::VectorXd::LinSpaced(2001, 0.0, 1.0);
  const Eigen::VectorXd rho = dos_reconstruct(m.f, k, eps);
  double integral = 0.0;
  for (Eigen::Index i = 1; i < eps.size(); ++i) integral += 0.5 * (rho(i) + rho(i - 1)) * (eps(i) - eps(i - 1));
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("cumulative density converges to the exact staircase") {
  // sup |N_N(eps) - N_exact(eps)| over a fine grid should fall with N.
  const Fixture f(build_hamiltonian(LatticeSpec::ring(6), ModelKind::TFIM, 1.0, 1.0));
  Eigen::VectorXd eps = Eigen::VectorXd::LinSpaced(4001, 0.0, 1.0);
  Eigen::VectorXd levels = (f.spec.eigenvalues.array() - f.w.e_min) / f.w.width;
  double prev = 1e9;
  for (int N : {8, 16, 32, 64}) {
    const Eigen::VectorXd rho = dos_reconstruct(exact_moments(f.spec, f.w, N).f, jackson_coefficients(N), eps);
    double cum = 0.0, worst = 0.0;
    for (Eigen::Index i = 1; i < eps.size(); ++i) {
      cum += 0.5 * (rho(i) + rho(i - 1)) * (eps(i) - eps(i - 1));
      const double exact = static_cast<double>((levels.array() <= eps(i)).count()) / static_cast<double>(levels.size());
      worst = std::max(worst, std::abs(cum - exact));
    }
    CHECK(worst < prev);
    prev = worst;
  }
  CHECK(prev < 0.1);
}

TEST_CASE("series free energy converges to the exact one") {
  const Fixture f(build_hamiltonian(LatticeSpec::ring(6), ModelKind::TFIM, 1.0, 1.0));
  const std::vector<double> T{0.5, 1.0, 2.0, 5.0};
  const ThermoCurve exact = exact_thermo(f.spec, T);
  // The broadening error falls like 1/N once N is past the pre-asymptotic
  // range, which for this window starts near N = 16.
  double prev_g = 1e9, prev_v = 1e9;
  for (int N : {16, 32, 64, 128}) {
    const ExactMoments m = exact_moments(f.spec, f.w, N);
    const KernelCoefficients k = jackson_coefficients(N);
    const double eg = max_abs_diff(thermodynamics(m.f, k, f.w, f.L, T, SeriesForm::Generic).F, exact.F);
    const double ev = max_abs_diff(thermodynamics(m.fc, k, f.w, f.L, T, SeriesForm::VirtualCopy).F, exact.F);
    CHECK(eg < prev_g);
    CHECK(ev < prev_v);
    prev_g = eg;
    prev_v = ev;
  }
  CHECK(prev_g < 0.06);
  CHECK(prev_v < 0.02);
}

TEST_CASE("virtual-copy and generic forms approach each other") {
  // Both are truncations of the same partition function; they differ at
  // finite N and agree in the limit.
  const Fixture f(build_hamiltonian(LatticeSpec::ring(4), ModelKind::TFIM, 0.7, 1.0));
  const std::vector<double> T{0.5, 1.0, 3.0};
  double prev = 1e9;
  for (int N : {16, 64, 256}) {
    const ExactMoments m = exact_moments(f.spec, f.w, N);
    const KernelCoefficients k = jackson_coefficients(N);
    const double d = max_abs_diff(thermodynamics(m.f, k, f.w, f.L, T, SeriesForm::Generic).F,
                                  thermodynamics(m.fc, k, f.w, f.L, T, SeriesForm::VirtualCopy).F);
    CHECK(d < prev);
    prev = d;
  }
  CHECK(prev < 2e-2);
}

TEST_CASE("reference-state form reproduces the generic series") {
  const Fixture f(build_hamiltonian(LatticeSpec::grid(2, 2), ModelKind::XY, std::nullopt, 1.0));
  const ExactMoments m = exact_moments(f.spec, f.w, 8);
  const KernelCoefficients k = jackson_coefficients(8);
  const std::vector<double> T{0.3, 1.0, 4.0};
  const ThermoCurve a = thermodynamics(m.f, k, f.w, f.L, T, SeriesForm::Generic);
  const ThermoCurve b = thermodynamics(m.f, k, f.w, f.L, T, SeriesForm::ReferenceState);
  CHECK(max_abs_diff(a.F, b.F) < 1e-12);
  CHECK(max_abs_diff(a.C, b.C) < 1e-12);
}

TEST_CASE("analytic S and C match finite differences of F") {
  const Fixture f(build_hamiltonian(LatticeSpec::ring(4), ModelKind::TFIM, 1.0, 1.0));
  const ExactMoments m = exact_moments(f.spec, f.w, 8);
  const KernelCoefficients k = jackson_coefficients(8);
  const double h = 1e-4;
  for (SeriesForm form : {SeriesForm::Generic, SeriesForm::VirtualCopy, SeriesForm::ReferenceState}) {
    const Eigen::VectorXd& mom = form == SeriesForm::VirtualCopy ? m.fc : m.f;
    for (double T : {0.4, 1.0, 2.5, 7.0}) {
      const ThermoCurve c = thermodynamics(mom, k, f.w, f.L, {T - h, T, T + h}, form);
      const double S_fd = -(c.F[2] - c.F[0]) / (2 * h);
      const double C_fd = -T * (c.F[2] - 2 * c.F[1] + c.F[0]) / (h * h);
      CHECK(c.S[1] == doctest::Approx(S_fd).epsilon(1e-5));
      CHECK(c.C[1] == doctest::Approx(C_fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("non-positive series sums raise or are excluded") {
  const Fixture f(build_hamiltonian(LatticeSpec::ring(4), ModelKind::TFIM, 1.0, 1.0));
  const KernelCoefficients k = jackson_coefficients(4);
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(5);
  bad(0) = 1.0;
  bad(1) = -3.0;  // outweighs h_0 phi_0 once x is large
  const std::vector<double> T{0.1, 0.2, 10.0};
  bool thrown = false;
  try {
    thermodynamics(bad, k, f.w, f.L, T, SeriesForm::Generic);
  } catch (const NegativeArgumentError& e) {
    thrown = true;
    CHECK(e.temperature() == 0.1);
  }
  CHECK(thrown);
  const ThermoCurve c = thermodynamics(bad, k, f.w, f.L, T, SeriesForm::Generic, NegativePolicy::Exclude);
  CHECK_FALSE(c.excluded.empty());
  CHECK(c.excluded.size() + c.T.size() == T.size());
  CHECK_THROWS_AS(thermodynamics(bad, k, f.w, f.L, {1.0, 0.5}, SeriesForm::Generic), Error);
}

TEST_CASE("thermal observables from moments") {
  const Fixture f(build_hamiltonian(LatticeSpec::ring(6), ModelKind::TFIM, 1.0, 1.0));
  const PauliTerm zz{1.0, {{0, Axis::Z}, {1, Axis::Z}}};
  const std::vector<double> T{1.0, 2.0, 5.0};
  const auto exact = exact_observable_thermal(f.spec, zz, T);
  const int N = 96;
  const ExactMoments m = exact_moments(f.spec, f.w, N);
  const ExactMoments d = exact_observable_moments(f.spec, f.w, zz, N);
  const KernelCoefficients k = jackson_coefficients(N);
  const auto generic = observable_thermal(d.d, m.f, k, f.w, T);
  const auto composite = composite_thermal(d.dc, m.fc, k, f.w, T);
  for (std::size_t i = 0; i < T.size(); ++i) {
    CHECK(generic[i] == doctest::Approx(exact[i]).epsilon(1e-2));
    CHECK(observable_from_composite(composite[i]).magnitude == doctest::Approx(std::abs(exact[i])).epsilon(2e-2));
  }
}

TEST_CASE("error bands") {
  const Fixture f(build_hamiltonian(LatticeSpec::ring(4), ModelKind::TFIM, 1.0, 1.0));
  const ExactMoments m = exact_moments(f.spec, f.w, 4);
  const KernelCoefficients k = jackson_coefficients(4);
  const std::vector<double> T{0.5, 1.0, 2.0};
  ThermoCurve c = thermodynamics(m.fc, k, f.w, f.L, T, SeriesForm::VirtualCopy);

  MomentSet ms = MomentSet::exact(m.fc);
  ThermoCurve none = c;
  first_order_bands(none, ms, k, f.w, f.L, SeriesForm::VirtualCopy);
  for (double e : none.F_err) CHECK(e == 0.0);
  ms.stderr_.setConstant(0.01);
  ms.stderr_(0) = 0.0;
  first_order_bands(c, ms, k, f.w, f.L, SeriesForm::VirtualCopy);
  for (double e : c.F_err) CHECK(e > 0.0);

  // Bootstrap on samples scattered around the exact moments.
  std::vector<std::vector<double>> samples(5);
  Rng rng(9);
  for (int n = 0; n <= 4; ++n) {
    for (int s = 0; s < 200; ++s) samples[n].push_back(n == 0 ? 1.0 : m.fc(n) + 0.2 * (uniform01(rng) - 0.5));
  }
  ThermoCurve b1 = thermodynamics(m.fc, k, f.w, f.L, T, SeriesForm::VirtualCopy);
  ThermoCurve b2 = b1;
  bootstrap_bands(b1, samples, k, f.w, f.L, SeriesForm::VirtualCopy, 100, 42);
  bootstrap_bands(b2, samples, k, f.w, f.L, SeriesForm::VirtualCopy, 100, 42);
  CHECK(b1.F_err == b2.F_err);
  for (double e : b1.F_err) CHECK(e > 0.0);
  CHECK(b1.has_bands());
}

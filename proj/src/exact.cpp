#include "qkfe/exact.hpp"

#include "qkfe/csv.hpp"
#include "qkfe/error.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace qkfe {

namespace {

constexpr double kWindowTol = 1e-9;

void check_temperatures(const std::vector<double>& T) {
  for (double t : T) {
    if (!(t > 0.0) || !std::isfinite(t)) fail(ErrorCode::NonPositiveTemperature, "temperatures must be positive");
  }
}

Eigen::VectorXd rescaled(const Spectrum& spec, const RescaleWindow& window) {
  Eigen::VectorXd eps = (spec.eigenvalues.array() - window.e_min) / window.width;
  if (eps.minCoeff() < -kWindowTol || eps.maxCoeff() > 1.0 + kWindowTol) {
    fail(ErrorCode::WindowViolation, "spectrum extends outside the rescale window");
  }
  return eps;
}

// Gibbs weights normalised to sum 1, shifted by the ground energy.
Eigen::VectorXd gibbs_weights(const Eigen::VectorXd& E, double T, double& log_z) {
  const double e0 = E.minCoeff();
  Eigen::VectorXd w = (-(E.array() - e0) / T).exp();
  const double z = w.sum();
  log_z = std::log(z) - e0 / T;
  return w / z;
}

}  // namespace

Spectrum diagonalize(const HamiltonianSpec& h, bool with_vectors) {
  if (h.num_qubits() > kDenseLimit) fail(ErrorCode::TooLarge, "exact diagonalization beyond L = 14");
  Spectrum s;
  s.num_qubits = h.num_qubits();
  const int opts = with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;
  if (is_real(h)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_hamiltonian_real(h), opts);
    s.eigenvalues = es.eigenvalues();
    if (with_vectors) s.eigenvectors = es.eigenvectors().cast<cplx>();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense_hamiltonian(h), opts);
    s.eigenvalues = es.eigenvalues();
    if (with_vectors) s.eigenvectors = es.eigenvectors();
  }
  return s;
}

ExactMoments exact_moments(const Spectrum& spec, const RescaleWindow& window, int N) {
  if (N < 1) fail(ErrorCode::ValidationError, "cutoff N must be at least 1");
  const Eigen::VectorXd eps = rescaled(spec, window);
  const double D = static_cast<double>(spec.dim());
  ExactMoments m;
  m.f.resize(N + 1);
  m.fc.resize(N + 1);
  for (int n = 0; n <= N; ++n) {
    const double a = n * std::numbers::pi;
    const double re = (a * eps.array()).cos().sum() / D;
    const double im = -(a * eps.array()).sin().sum() / D;
    m.f(n) = re;
    m.fc(n) = re * re + im * im;
  }
  m.f(0) = 1.0;
  m.fc(0) = 1.0;
  return m;
}

ExactMoments exact_observable_moments(const Spectrum& spec, const RescaleWindow& window,
                                      const PauliTerm& obs, int N) {
  if (!spec.eigenvectors) fail(ErrorCode::ValidationError, "observable moments need eigenvectors");
  validate_term(PauliTerm{1.0, obs.sites}, spec.num_qubits);
  ExactMoments m = exact_moments(spec, window, N);
  const Eigen::MatrixXcd& V = *spec.eigenvectors;
  const Eigen::VectorXd eps = rescaled(spec, window);
  // Diagonal of V^dagger O V gives <k|O|k>; the trace only needs those.
  Eigen::MatrixXcd OV = V;
  const PauliMasks pm = masks_of(PauliTerm{1.0, obs.sites});
  for (Eigen::Index c = 0; c < V.cols(); ++c) {
    for (std::uint64_t b = 0; b < static_cast<std::uint64_t>(V.rows()); ++b) {
      OV(static_cast<Eigen::Index>(b ^ pm.x_mask), c) = pm.phase(b) * V(static_cast<Eigen::Index>(b), c);
    }
  }
  const Eigen::VectorXcd diag = (V.adjoint().array() * OV.transpose().array()).rowwise().sum();
  const double D = static_cast<double>(spec.dim());
  m.d.resize(N + 1);
  m.dc.resize(N + 1);
  for (int n = 0; n <= N; ++n) {
    cplx tr = 0.0;
    for (Eigen::Index k = 0; k < eps.size(); ++k) tr += diag(k) * std::polar(1.0, -n * std::numbers::pi * eps(k));
    m.d(n) = tr.real() / D;
    m.dc(n) = std::norm(tr) / (D * D);
  }
  return m;
}

ThermoCurve exact_thermo(const Spectrum& spec, const std::vector<double>& T_grid) {
  check_temperatures(T_grid);
  ThermoCurve c;
  const Eigen::VectorXd& E = spec.eigenvalues;
  for (double T : T_grid) {
    double log_z = 0.0;
    const Eigen::VectorXd w = gibbs_weights(E, T, log_z);
    const double e1 = w.dot(E);
    const double var = w.dot((E.array() - e1).square().matrix());
    const double F = -T * log_z;
    c.T.push_back(T);
    c.F.push_back(F);
    c.S.push_back((e1 - F) / T);
    c.C.push_back(var / (T * T));
  }
  return c;
}

std::vector<double> exact_observable_thermal(const Spectrum& spec, const PauliTerm& obs,
                                             const std::vector<double>& T_grid) {
  check_temperatures(T_grid);
  if (!spec.eigenvectors) fail(ErrorCode::ValidationError, "thermal observables need eigenvectors");
  const Eigen::MatrixXcd& V = *spec.eigenvectors;
  const PauliMasks pm = masks_of(PauliTerm{1.0, obs.sites});
  Eigen::VectorXd diag(V.cols());
  for (Eigen::Index k = 0; k < V.cols(); ++k) {
    cplx acc = 0.0;
    for (std::uint64_t b = 0; b < static_cast<std::uint64_t>(V.rows()); ++b) {
      acc += std::conj(V(static_cast<Eigen::Index>(b ^ pm.x_mask), k)) * pm.phase(b) * V(static_cast<Eigen::Index>(b), k);
    }
    diag(k) = acc.real();
  }
  std::vector<double> out;
  for (double T : T_grid) {
    double log_z = 0.0;
    const Eigen::VectorXd w = gibbs_weights(spec.eigenvalues, T, log_z);
    out.push_back(w.dot(diag));
  }
  return out;
}

std::string thermo_csv(const ThermoCurve& curve) {
  std::ostringstream os;
  const bool bands = curve.has_bands();
  os << (bands ? "T,F,S,C,F_err,S_err,C_err\n" : "T,F,S,C\n");
  for (std::size_t i = 0; i < curve.T.size(); ++i) {
    std::vector<double> row = {curve.T[i], curve.F[i], curve.S[i], curve.C[i]};
    if (bands) row.insert(row.end(), {curve.F_err[i], curve.S_err[i], curve.C_err[i]});
    os << csv_row(row) << '\n';
  }
  return os.str();
}

}  // namespace qkfe

#include "qkfe/kernel.hpp"

#include "qkfe/error.hpp"
#include "qkfe/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qkfe {

namespace {

constexpr double kPi = std::numbers::pi;

void check_grid(const std::vector<double>& T) {
  for (std::size_t i = 0; i < T.size(); ++i) {
    if (!(T[i] > 0.0) || !std::isfinite(T[i])) fail(ErrorCode::NonPositiveTemperature, "temperatures must be positive");
    if (i > 0 && !(T[i] > T[i - 1])) fail(ErrorCode::ValidationError, "temperature grid must be strictly ascending");
  }
}

// x / (x^2 + k^2) and its first two derivatives.
Derivatives lorentz(double x, double k) {
  const double q = x * x + k * k;
  return {x / q, (k * k - x * x) / (q * q), 2.0 * x * (x * x - 3.0 * k * k) / (q * q * q)};
}

// Basis function of the sinh form: 1/x for n = 0, (-1)^n 2x/(x^2 + n^2 pi^2) otherwise.
Derivatives sinh_basis(int n, double x) {
  if (n == 0) return {1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x)};
  const Derivatives a = lorentz(x, n * kPi);
  const double s = (n % 2 == 0) ? 2.0 : -2.0;
  return {s * a.value, s * a.d1, s * a.d2};
}


Derivatives series_sum(const Eigen::VectorXd& m, const KernelCoefficients& k, double x, SeriesForm form) {
  Derivatives acc;
  const int N = std::min<int>(k.N, static_cast<int>(m.size()) - 1);
  for (int n = 0; n <= N; ++n) {
    const double w = k.h(n) * m(n);
    if (w == 0.0) continue;
    const Derivatives b = form == SeriesForm::VirtualCopy ? sinh_basis(n, x) : phi_derivatives(n, x);
    acc.value += w * b.value;
    acc.d1 += w * b.d1;
    acc.d2 += w * b.d2;
  }
  return acc;
}

void check_inputs(const Eigen::VectorXd& moments, const KernelCoefficients& kernel, const RescaleWindow& window) {
  if (moments.size() < 1) fail(ErrorCode::ValidationError, "empty moment vector");
  if (moments.size() < kernel.N + 1) fail(ErrorCode::ValidationError, "fewer moments than the kernel cutoff");
  if (!(window.width > 0.0)) fail(ErrorCode::ValidationError, "rescale window width must be positive");
}

ThermoCurve evaluate(const Eigen::VectorXd& moments, const KernelCoefficients& kernel, const RescaleWindow& window,
                     int num_qubits, const std::vector<double>& T_grid, SeriesForm form, NegativePolicy policy,
                     bool derivatives) {
  check_grid(T_grid);
  check_inputs(moments, kernel, window);
  const double log_d = num_qubits * std::numbers::ln2;
  ThermoCurve c;
  for (double T : T_grid) {
    const double x = window.width / T;
    const Derivatives g = series_sum(moments, kernel, x, form);
    if (!(g.value > 0.0) || !std::isfinite(g.value)) {
      if (policy == NegativePolicy::Exclude) {
        c.excluded.push_back(T);
        continue;
      }
      throw NegativeArgumentError(T, "series sum is not positive at T = " + std::to_string(T));
    }
    const double r1 = g.d1 / g.value;
    double l = std::log(g.value);
    double l1 = r1;
    double l2 = g.d2 / g.value - r1 * r1;
    double m = 1.0;
    double shift = window.e_min;
    if (form == SeriesForm::VirtualCopy) {
      const double e2 = std::exp(-2.0 * x);
      const double om = -std::expm1(-2.0 * x);  // 1 - e^{-2x}
      l += 2.0 * log_d + x - std::numbers::ln2 + std::log(om);
      l1 += 1.0 + 2.0 * e2 / om;
      l2 -= 4.0 * e2 / (om * om);
      m = 2.0;
      shift = 0.0;
    } else {
      l += log_d;
    }
    c.T.push_back(T);
    c.F.push_back(-T * l / m + shift);
    if (derivatives) {
      c.S.push_back((l - x * l1) / m);
      c.C.push_back(x * x * l2 / m);
    }
  }
  return c;
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double a : v) mean += a;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double a : v) ss += (a - mean) * (a - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

KernelCoefficients jackson_coefficients(int N) {
  if (N < 1) fail(ErrorCode::ValidationError, "cutoff N must be at least 1");
  KernelCoefficients k;
  k.N = N;
  k.h.resize(N + 1);
  const double q = kPi / (N + 1);
  for (int n = 0; n <= N; ++n) {
    k.h(n) = ((N - n + 1) * std::cos(q * n) + std::sin(q * n) / std::tan(q)) / (N + 1);
  }
  k.h(0) = 1.0;
  return k;
}

std::string to_string(MomentProtocol p) {
  switch (p) {
    case MomentProtocol::Exact: return "exact";
    case MomentProtocol::VirtualCopy: return "virtual_copy";
    case MomentProtocol::ReferenceState: return "reference_state";
  }
  return "?";
}

MomentSet MomentSet::exact(const Eigen::VectorXd& values) {
  MomentSet m;
  m.protocol = MomentProtocol::Exact;
  m.mean = values;
  m.stderr_ = Eigen::VectorXd::Zero(values.size());
  m.count.assign(static_cast<std::size_t>(values.size()), 0);
  return m;
}

Eigen::VectorXd dos_reconstruct(const Eigen::VectorXd& f, const KernelCoefficients& kernel, const Eigen::VectorXd& eps) {
  const int N = std::min<int>(kernel.N, static_cast<int>(f.size()) - 1);
  Eigen::VectorXd rho = Eigen::VectorXd::Constant(eps.size(), kernel.h(0) * f(0));
  for (int n = 1; n <= N; ++n) rho += (2.0 * kernel.h(n) * f(n)) * (n * kPi * eps.array()).cos().matrix();
  return rho;
}

Derivatives phi_derivatives(int n, double x) {
  if (!(x > 0.0)) fail(ErrorCode::NonPositiveX, "phi needs x > 0");
  if (n < 0) fail(ErrorCode::ValidationError, "phi needs n >= 0");
  if (n == 0) {
    if (x < 1.0) {
      // sum_k (-x)^k / (k+1)! and its termwise derivatives.
      Derivatives d;
      double fact = 1.0;  // (k+1)!
      for (int k = 0; k <= 25; ++k) {
        fact *= (k + 1);
        const double sign = (k % 2) ? -1.0 : 1.0;
        d.value += sign * std::pow(x, k) / fact;
        if (k >= 1) d.d1 += sign * k * std::pow(x, k - 1) / fact;
        if (k >= 2) d.d2 += sign * k * (k - 1) * std::pow(x, k - 2) / fact;
      }
      return d;
    }
    const double e = std::exp(-x);
    const double u = -std::expm1(-x);
    return {u / x, e / x - u / (x * x), -e / x - 2.0 * e / (x * x) + 2.0 * u / (x * x * x)};
  }
  const double s = (n % 2 == 0) ? 1.0 : -1.0;
  const double e = std::exp(-x);
  const double b = (n % 2 == 0) ? -std::expm1(-x) : 1.0 + e;
  const double b1 = s * e;
  const double b2 = -s * e;
  const Derivatives a = lorentz(x, n * kPi);
  return {2.0 * a.value * b, 2.0 * (a.d1 * b + a.value * b1), 2.0 * (a.d2 * b + 2.0 * a.d1 * b1 + a.value * b2)};
}

double phi(int n, double x) { return phi_derivatives(n, x).value; }

std::string to_string(SeriesForm f) {
  switch (f) {
    case SeriesForm::Generic: return "generic";
    case SeriesForm::VirtualCopy: return "virtual_copy";
    case SeriesForm::ReferenceState: return "reference_state";
  }
  return "?";
}

SeriesForm series_form_from_string(const std::string& s) {
  if (s == "generic") return SeriesForm::Generic;
  if (s == "virtual_copy") return SeriesForm::VirtualCopy;
  if (s == "reference_state") return SeriesForm::ReferenceState;
  fail(ErrorCode::ValidationError, "unknown series form '" + s + "'");
}

ThermoCurve thermodynamics(const Eigen::VectorXd& moments, const KernelCoefficients& kernel,
                           const RescaleWindow& window, int num_qubits, const std::vector<double>& T_grid,
                           SeriesForm form, NegativePolicy policy) {
  return evaluate(moments, kernel, window, num_qubits, T_grid, form, policy, true);
}

ThermoCurve free_energy(const Eigen::VectorXd& moments, const KernelCoefficients& kernel,
                        const RescaleWindow& window, int num_qubits, const std::vector<double>& T_grid,
                        SeriesForm form, NegativePolicy policy) {
  return evaluate(moments, kernel, window, num_qubits, T_grid, form, policy, false);
}

std::vector<double> observable_thermal(const Eigen::VectorXd& d, const Eigen::VectorXd& f,
                                       const KernelCoefficients& kernel, const RescaleWindow& window,
                                       const std::vector<double>& T_grid) {
  check_grid(T_grid);
  check_inputs(d, kernel, window);
  check_inputs(f, kernel, window);
  std::vector<double> out;
  for (double T : T_grid) {
    const double x = window.width / T;
    const double z = series_sum(f, kernel, x, SeriesForm::Generic).value;
    if (!(z > 0.0)) throw NegativeArgumentError(T, "series sum is not positive at T = " + std::to_string(T));
    out.push_back(series_sum(d, kernel, x, SeriesForm::Generic).value / z);
  }
  return out;
}

std::vector<double> composite_thermal(const Eigen::VectorXd& dc, const Eigen::VectorXd& fc,
                                      const KernelCoefficients& kernel, const RescaleWindow& window,
                                      const std::vector<double>& T_grid) {
  check_grid(T_grid);
  check_inputs(dc, kernel, window);
  check_inputs(fc, kernel, window);
  std::vector<double> out;
  for (double T : T_grid) {
    const double x = window.width / T;
    const double z = series_sum(fc, kernel, x, SeriesForm::VirtualCopy).value;
    if (!(z > 0.0)) throw NegativeArgumentError(T, "series sum is not positive at T = " + std::to_string(T));
    out.push_back(series_sum(dc, kernel, x, SeriesForm::VirtualCopy).value / z);
  }
  return out;
}

CompositeMagnitude observable_from_composite(double composite_value) {
  return {std::sqrt(std::abs(composite_value)), false};
}

std::string to_string(BandMethod b) {
  switch (b) {
    case BandMethod::None: return "none";
    case BandMethod::FirstOrder: return "first_order";
    case BandMethod::Bootstrap: return "bootstrap";
  }
  return "?";
}

BandMethod band_method_from_string(const std::string& s) {
  if (s == "none") return BandMethod::None;
  if (s == "first_order") return BandMethod::FirstOrder;
  if (s == "bootstrap") return BandMethod::Bootstrap;
  fail(ErrorCode::ValidationError, "unknown error-band method '" + s + "'");
}

void first_order_bands(ThermoCurve& curve, const MomentSet& moments, const KernelCoefficients& kernel,
                       const RescaleWindow& window, int num_qubits, SeriesForm form) {
  const std::size_t n_t = curve.T.size();
  std::vector<double> fe(n_t, 0.0), se(n_t, 0.0), ce(n_t, 0.0);
  for (int n = 1; n < moments.mean.size(); ++n) {
    const double delta = moments.stderr_(n);
    if (!(delta > 0.0)) continue;
    Eigen::VectorXd shifted = moments.mean;
    shifted(n) += delta;
    const ThermoCurve p = thermodynamics(shifted, kernel, window, num_qubits, curve.T, form, NegativePolicy::Exclude);
    std::size_t j = 0;
    for (std::size_t i = 0; i < n_t && j < p.T.size(); ++i) {
      if (p.T[j] != curve.T[i]) continue;
      fe[i] += std::pow(p.F[j] - curve.F[i], 2);
      se[i] += std::pow(p.S[j] - curve.S[i], 2);
      ce[i] += std::pow(p.C[j] - curve.C[i], 2);
      ++j;
    }
  }
  curve.F_err.clear();
  curve.S_err.clear();
  curve.C_err.clear();
  for (std::size_t i = 0; i < n_t; ++i) {
    curve.F_err.push_back(std::sqrt(fe[i]));
    curve.S_err.push_back(std::sqrt(se[i]));
    curve.C_err.push_back(std::sqrt(ce[i]));
  }
}

void bootstrap_bands(ThermoCurve& curve, const std::vector<std::vector<double>>& samples,
                     const KernelCoefficients& kernel, const RescaleWindow& window, int num_qubits,
                     SeriesForm form, int replicates, std::uint64_t seed) {
  if (replicates < 2) fail(ErrorCode::ValidationError, "bootstrap needs at least two replicates");
  const std::size_t n_t = curve.T.size();
  std::vector<std::vector<double>> fs(n_t), ss(n_t), cs(n_t);
  Rng rng(splitmix64(seed));
  for (int b = 0; b < replicates; ++b) {
    Eigen::VectorXd m(static_cast<Eigen::Index>(samples.size()));
    for (std::size_t n = 0; n < samples.size(); ++n) {
      const auto& v = samples[n];
      if (v.empty()) fail(ErrorCode::ValidationError, "bootstrap order without samples");
      double acc = 0.0;
      for (std::size_t k = 0; k < v.size(); ++k) acc += v[static_cast<std::size_t>(uniform_int(rng, static_cast<int>(v.size())))];
      m(static_cast<Eigen::Index>(n)) = acc / static_cast<double>(v.size());
    }
    const ThermoCurve p = thermodynamics(m, kernel, window, num_qubits, curve.T, form, NegativePolicy::Exclude);
    std::size_t j = 0;
    for (std::size_t i = 0; i < n_t && j < p.T.size(); ++i) {
      if (p.T[j] != curve.T[i]) continue;
      fs[i].push_back(p.F[j]);
      ss[i].push_back(p.S[j]);
      cs[i].push_back(p.C[j]);
      ++j;
    }
  }
  curve.F_err.clear();
  curve.S_err.clear();
  curve.C_err.clear();
  for (std::size_t i = 0; i < n_t; ++i) {
    curve.F_err.push_back(stddev(fs[i]));
    curve.S_err.push_back(stddev(ss[i]));
    curve.C_err.push_back(stddev(cs[i]));
  }
}

}  // namespace qkfe

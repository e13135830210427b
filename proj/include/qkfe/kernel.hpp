#pragma once

#include "qkfe/exact.hpp"
#include "qkfe/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace qkfe {

struct KernelCoefficients {
  int N = 0;
  Eigen::VectorXd h;
};

/// Jackson damping h_n, n = 0..N.
KernelCoefficients jackson_coefficients(int N);

enum class MomentProtocol { Exact, VirtualCopy, ReferenceState };
std::string to_string(MomentProtocol p);

struct MomentSet {
  MomentProtocol protocol = MomentProtocol::Exact;
  Eigen::VectorXd mean;
  Eigen::VectorXd stderr_;
  std::vector<long> count;

  int order() const { return static_cast<int>(mean.size()) - 1; }
  static MomentSet exact(const Eigen::VectorXd& values);
};

/// rho(eps) = h_0 f_0 + 2 sum_{n>=1} h_n f_n cos(n pi eps).
Eigen::VectorXd dos_reconstruct(const Eigen::VectorXd& f, const KernelCoefficients& kernel,
                                const Eigen::VectorXd& eps);

/// phi_0(x) = (1 - e^{-x}) / x,  phi_n(x) = 2 x (1 - (-1)^n e^{-x}) / (x^2 + n^2 pi^2).
double phi(int n, double x);

struct Derivatives {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

Derivatives phi_derivatives(int n, double x);

/// Generic: Z = D e^{-E_min/T} sum h_n f_n phi_n(W/T).
/// VirtualCopy: Z^2 = D^2 sinh(x) [h_0 f_0c / x + sum (-1)^n h_n f_nc 2x / (n^2 pi^2 + x^2)],
///   the square of a centro-symmetric partition sum.
/// ReferenceState: the generic series fed with reference-state moments.
enum class SeriesForm { Generic, VirtualCopy, ReferenceState };
std::string to_string(SeriesForm f);
SeriesForm series_form_from_string(const std::string& s);

enum class NegativePolicy { Throw, Exclude };

/// F, S and C on T_grid from closed-form derivatives of the series in
/// x = W/T. With NegativePolicy::Exclude, temperatures where the series sum
/// is not positive are listed in `excluded` instead of raising.
ThermoCurve thermodynamics(const Eigen::VectorXd& moments, const KernelCoefficients& kernel,
                           const RescaleWindow& window, int num_qubits, const std::vector<double>& T_grid,
                           SeriesForm form, NegativePolicy policy = NegativePolicy::Throw);

/// F only; same conventions as thermodynamics.
ThermoCurve free_energy(const Eigen::VectorXd& moments, const KernelCoefficients& kernel,
                        const RescaleWindow& window, int num_qubits, const std::vector<double>& T_grid,
                        SeriesForm form, NegativePolicy policy = NegativePolicy::Throw);

/// O(T) = sum h_n d_n phi_n / sum h_n f_n phi_n.
std::vector<double> observable_thermal(const Eigen::VectorXd& d, const Eigen::VectorXd& f,
                                       const KernelCoefficients& kernel, const RescaleWindow& window,
                                       const std::vector<double>& T_grid);

/// <O (x) O^dagger> on the doubled system from composite moments d_nc and f_nc.
std::vector<double> composite_thermal(const Eigen::VectorXd& dc, const Eigen::VectorXd& fc,
                                      const KernelCoefficients& kernel, const RescaleWindow& window,
                                      const std::vector<double>& T_grid);

struct CompositeMagnitude {
  double magnitude = 0.0;
  bool sign_determined = false;
};

CompositeMagnitude observable_from_composite(double composite_value);

enum class BandMethod { None, FirstOrder, Bootstrap };
std::string to_string(BandMethod b);
BandMethod band_method_from_string(const std::string& s);

/// Shifts each moment n >= 1 by its standard error and adds the induced
/// changes of F, S, C in quadrature.
void first_order_bands(ThermoCurve& curve, const MomentSet& moments, const KernelCoefficients& kernel,
                       const RescaleWindow& window, int num_qubits, SeriesForm form);

/// Resamples the per-unitary values of every order with replacement and
/// reports the spread of F, S, C. samples[n] holds the values for order n.
void bootstrap_bands(ThermoCurve& curve, const std::vector<std::vector<double>>& samples,
                     const KernelCoefficients& kernel, const RescaleWindow& window, int num_qubits,
                     SeriesForm form, int replicates, std::uint64_t seed);

}  // namespace qkfe

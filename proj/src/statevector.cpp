#include "qkfe/statevector.hpp"

#include "qkfe/error.hpp"
#include "qkfe/pauli.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace qkfe {

namespace {

using Index = Eigen::Index;

}  // namespace

void apply_1q(Eigen::Ref<Eigen::MatrixXcd> m, int qubit, const Eigen::Matrix2cd& u) {
  const Index stride = Index{1} << qubit;
  const Index dim = m.rows();
  const cplx u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
  for (Index c = 0; c < m.cols(); ++c) {
    cplx* col = m.col(c).data();
    for (Index base = 0; base < dim; base += 2 * stride) {
      for (Index i = base; i < base + stride; ++i) {
        const cplx a = col[i];
        const cplx b = col[i + stride];
        col[i] = u00 * a + u01 * b;
        col[i + stride] = u10 * a + u11 * b;
      }
    }
  }
}

void apply_diag_1q(Eigen::Ref<Eigen::MatrixXcd> m, int qubit, cplx d0, cplx d1) {
  const auto bit = std::uint64_t{1} << qubit;
  for (Index c = 0; c < m.cols(); ++c) {
    cplx* col = m.col(c).data();
    for (Index i = 0; i < m.rows(); ++i) col[i] *= (static_cast<std::uint64_t>(i) & bit) ? d1 : d0;
  }
}

void apply_cz(Eigen::Ref<Eigen::MatrixXcd> m, int a, int b) {
  const auto mask = (std::uint64_t{1} << a) | (std::uint64_t{1} << b);
  for (Index c = 0; c < m.cols(); ++c) {
    cplx* col = m.col(c).data();
    for (Index i = 0; i < m.rows(); ++i) {
      if ((static_cast<std::uint64_t>(i) & mask) == mask) col[i] = -col[i];
    }
  }
}

void apply_pauli_masks(Eigen::Ref<Eigen::MatrixXcd> m, std::uint64_t x_mask, std::uint64_t z_mask,
                       int num_y) {
  static const cplx kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const cplx global = kIPow[num_y & 3];
  for (Index c = 0; c < m.cols(); ++c) {
    cplx* col = m.col(c).data();
    // P|b> = phase(b)|b ^ x>: swap pairs (b, b ^ x) once each.
    for (Index i = 0; i < m.rows(); ++i) {
      const auto b = static_cast<std::uint64_t>(i);
      const auto t = b ^ x_mask;
      if (t < b) continue;
      const cplx pb = (std::popcount(b & z_mask) & 1 ? -global : global);
      const cplx pt = (std::popcount(t & z_mask) & 1 ? -global : global);
      if (t == b) {
        col[i] *= pb;
      } else {
        const cplx vb = col[i];
        const cplx vt = col[static_cast<Index>(t)];
        col[static_cast<Index>(t)] = pb * vb;
        col[i] = pt * vt;
      }
    }
  }
}

Eigen::Matrix2cd rx_matrix(double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  Eigen::Matrix2cd u;
  u << cplx(c, 0), cplx(0, -s), cplx(0, -s), cplx(c, 0);
  return u;
}

Eigen::Matrix2cd ry_matrix(double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  Eigen::Matrix2cd u;
  u << c, -s, s, c;
  return u;
}

Eigen::Matrix2cd rz_matrix(double theta) {
  Eigen::Matrix2cd u = Eigen::Matrix2cd::Zero();
  u(0, 0) = std::polar(1.0, -theta / 2);
  u(1, 1) = std::polar(1.0, theta / 2);
  return u;
}

StateVector StateVector::zero(int num_qubits) {
  if (num_qubits < 1 || num_qubits > 30) fail(ErrorCode::TooLarge, "statevector size out of range");
  StateVector s;
  s.num_qubits = num_qubits;
  s.amplitudes = Eigen::VectorXcd::Zero(Index{1} << num_qubits);
  s.amplitudes(0) = 1.0;
  return s;
}

Eigen::VectorXd exhaustive_distribution(const StateVector& psi) {
  return psi.amplitudes.cwiseAbs2();
}

std::vector<std::uint64_t> sample_distribution(const Eigen::VectorXd& probs, int shots, Rng& rng) {
  std::vector<double> cdf(static_cast<std::size_t>(probs.size()));
  double acc = 0.0;
  for (Index i = 0; i < probs.size(); ++i) {
    acc += std::max(0.0, probs(i));
    cdf[static_cast<std::size_t>(i)] = acc;
  }
  std::vector<std::uint64_t> out;
  out.reserve(static_cast<std::size_t>(std::max(shots, 0)));
  for (int s = 0; s < shots; ++s) {
    const double u = uniform01(rng) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    out.push_back(static_cast<std::uint64_t>(it - cdf.begin()));
  }
  return out;
}

std::vector<std::uint64_t> measure_samples(const StateVector& psi, int shots, std::uint64_t seed) {
  Rng rng(seed);
  return sample_distribution(exhaustive_distribution(psi), shots, rng);
}

}  // namespace qkfe

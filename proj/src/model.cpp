#include "qkfe/model.hpp"

#include "qkfe/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace qkfe {

using ojson = nlohmann::ordered_json;

std::string to_string(LatticeKind k) { return k == LatticeKind::Ring1D ? "ring1d" : "grid2d"; }
std::string to_string(ModelKind k) { return k == ModelKind::TFIM ? "tfim" : "xy"; }
std::string to_string(WindowMethod m) { return m == WindowMethod::Oracle ? "oracle" : "norm_bound"; }

LatticeKind lattice_kind_from_string(const std::string& s) {
  if (s == "ring1d") return LatticeKind::Ring1D;
  if (s == "grid2d") return LatticeKind::Grid2D;
  fail(ErrorCode::ValidationError, "unknown lattice kind '" + s + "'");
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "tfim") return ModelKind::TFIM;
  if (s == "xy") return ModelKind::XY;
  fail(ErrorCode::ValidationError, "unknown model kind '" + s + "'");
}

WindowMethod window_method_from_string(const std::string& s) {
  if (s == "oracle") return WindowMethod::Oracle;
  if (s == "norm_bound") return WindowMethod::NormBound;
  fail(ErrorCode::ValidationError, "unknown window method '" + s + "'");
}

LatticeSpec LatticeSpec::ring(int length) {
  LatticeSpec l;
  l.kind = LatticeKind::Ring1D;
  l.length = length;
  return l;
}

LatticeSpec LatticeSpec::grid(int rows, int cols) {
  LatticeSpec l;
  l.kind = LatticeKind::Grid2D;
  l.rows = rows;
  l.cols = cols;
  return l;
}

int LatticeSpec::num_sites() const {
  return kind == LatticeKind::Ring1D ? length : rows * cols;
}

void LatticeSpec::validate() const {
  if (kind == LatticeKind::Ring1D) {
    if (length < 2) fail(ErrorCode::InvalidLattice, "ring1d requires length >= 2");
  } else {
    if (rows < 1 || cols < 1 || rows * cols < 2) {
      fail(ErrorCode::InvalidLattice, "grid2d requires rows, cols >= 1 and at least two sites");
    }
  }
  if (num_sites() > 62) fail(ErrorCode::InvalidLattice, "lattice exceeds 62 sites");
}

std::vector<Bond> LatticeSpec::bonds() const {
  validate();
  std::set<Bond> unique;
  auto add = [&](int a, int b) { unique.insert({std::min(a, b), std::max(a, b)}); };
  if (kind == LatticeKind::Ring1D) {
    for (int j = 0; j < length; ++j) add(j, (j + 1) % length);
  } else {
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const int s = r * cols + c;
        if (c + 1 < cols) add(s, s + 1);
        if (r + 1 < rows) add(s, s + cols);
      }
    }
  }
  return {unique.begin(), unique.end()};
}

std::optional<std::vector<int>> LatticeSpec::two_coloring() const {
  validate();
  std::vector<int> color(static_cast<std::size_t>(num_sites()));
  if (kind == LatticeKind::Ring1D) {
    if (length % 2 != 0) return std::nullopt;
    for (int j = 0; j < length; ++j) color[static_cast<std::size_t>(j)] = j % 2;
  } else {
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) color[static_cast<std::size_t>(r * cols + c)] = (r + c) % 2;
  }
  return color;
}

HamiltonianSpec build_hamiltonian(const LatticeSpec& lattice, ModelKind model,
                                  std::optional<double> g, double J) {
  lattice.validate();
  if (model == ModelKind::TFIM && !g) fail(ErrorCode::MissingField, "TFIM requires the transverse field g");
  if (!std::isfinite(J) || (g && !std::isfinite(*g))) fail(ErrorCode::ValidationError, "couplings must be finite");

  HamiltonianSpec h;
  h.lattice = lattice;
  h.model = model;
  h.g = model == ModelKind::TFIM ? *g : 0.0;
  h.J = J;
  const auto bonds = lattice.bonds();
  if (model == ModelKind::TFIM) {
    if (h.g != 0.0) {
      for (int j = 0; j < lattice.num_sites(); ++j) h.terms.push_back({-h.g, {{j, Axis::X}}});
    }
    if (J != 0.0) {
      for (auto [a, b] : bonds) h.terms.push_back({-J, {{a, Axis::Z}, {b, Axis::Z}}});
    }
  } else if (J != 0.0) {
    for (auto [a, b] : bonds) {
      h.terms.push_back({J, {{a, Axis::X}, {b, Axis::X}}});
      h.terms.push_back({J, {{a, Axis::Y}, {b, Axis::Y}}});
    }
  }
  return h;
}

PauliTerm anticommuting_witness(const HamiltonianSpec& h) {
  const auto coloring = h.lattice.two_coloring();
  if (!coloring) fail(ErrorCode::NonBipartite, "odd ring has no two-coloring");
  PauliTerm tau{1.0, {}};
  for (int j = 0; j < h.num_qubits(); ++j) {
    const bool in_a = (*coloring)[static_cast<std::size_t>(j)] == 0;
    if (h.model == ModelKind::TFIM) {
      tau.sites.push_back({j, in_a ? Axis::Z : Axis::Y});
    } else if (in_a) {
      tau.sites.push_back({j, Axis::Z});
    }
  }
  return tau;
}

bool is_real(const HamiltonianSpec& h) {
  return std::all_of(h.terms.begin(), h.terms.end(), [](const PauliTerm& t) {
    return masks_of(t).num_y % 2 == 0;
  });
}

Eigen::MatrixXcd dense_hamiltonian(const HamiltonianSpec& h) {
  if (h.num_qubits() > kDenseLimit) fail(ErrorCode::TooLarge, "dense Hamiltonian beyond L = 14");
  const Eigen::Index dim = Eigen::Index{1} << h.num_qubits();
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& t : h.terms) accumulate_dense(t, H);
  return H;
}

Eigen::MatrixXd dense_hamiltonian_real(const HamiltonianSpec& h) {
  if (h.num_qubits() > kDenseLimit) fail(ErrorCode::TooLarge, "dense Hamiltonian beyond L = 14");
  if (!is_real(h)) fail(ErrorCode::ValidationError, "Hamiltonian has complex matrix elements");
  const Eigen::Index dim = Eigen::Index{1} << h.num_qubits();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& t : h.terms) accumulate_dense(t, H);
  return H;
}

namespace {

constexpr double kCommutatorTol = 1e-12;

// max |(P H - s H P)_{ab}| for a Pauli string P, s = +1 (commutator) or -1.
double pauli_bracket_norm(const PauliTerm& p, const Eigen::MatrixXcd& H, double s) {
  const PauliMasks m = masks_of(p);
  const auto dim = static_cast<std::uint64_t>(H.rows());
  double worst = 0.0;
  // (P H)_{ab} = phase(a ^ x) H_{a^x, b};  (H P)_{ab} = H_{a, b^x} phase(b).
  for (std::uint64_t b = 0; b < dim; ++b) {
    for (std::uint64_t a = 0; a < dim; ++a) {
      const cplx ph = m.phase(a ^ m.x_mask) * H(static_cast<Eigen::Index>(a ^ m.x_mask), static_cast<Eigen::Index>(b));
      const cplx hp = H(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b ^ m.x_mask)) * m.phase(b);
      worst = std::max(worst, std::abs(ph - s * hp));
    }
  }
  return worst;
}

}  // namespace

SymmetryReport symmetry_check(const HamiltonianSpec& h) {
  const int L = h.num_qubits();
  if (L > kDenseLimit) fail(ErrorCode::TooLarge, "symmetry check beyond dense limit");
  const Eigen::MatrixXcd H = dense_hamiltonian(h);
  const auto dim = static_cast<std::uint64_t>(H.rows());

  SymmetryReport rep;
  // [sum_j Z_j, H]_{ab} = (m_a - m_b) H_{ab}, with m the magnetization.
  double u1 = 0.0;
  for (std::uint64_t b = 0; b < dim; ++b) {
    for (std::uint64_t a = 0; a < dim; ++a) {
      const double ma = L - 2.0 * std::popcount(a);
      const double mb = L - 2.0 * std::popcount(b);
      u1 = std::max(u1, std::abs((ma - mb) * H(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))));
    }
  }
  rep.has_u1 = u1 <= kCommutatorTol;

  PauliTerm flip{1.0, {}};
  for (int j = 0; j < L; ++j) flip.sites.push_back({j, Axis::X});
  rep.has_spinflip = pauli_bracket_norm(flip, H, 1.0) <= kCommutatorTol;

  if (h.lattice.two_coloring()) {
    const PauliTerm tau = anticommuting_witness(h);
    rep.has_anticommuting = pauli_bracket_norm(tau, H, -1.0) <= kCommutatorTol;
  }
  return rep;
}

RescaleWindow rescale_window(const HamiltonianSpec& h, WindowMethod method) {
  RescaleWindow w;
  if (method == WindowMethod::NormBound) {
    double s = 0.0;
    for (const auto& t : h.terms) s += std::abs(t.coefficient);
    w.e_min = -s;
    w.width = 2.0 * s;
  } else {
    if (h.num_qubits() > kDenseLimit) fail(ErrorCode::TooLarge, "oracle window beyond dense limit");
    Eigen::VectorXd ev;
    if (is_real(h)) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_hamiltonian_real(h), Eigen::EigenvaluesOnly);
      ev = es.eigenvalues();
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense_hamiltonian(h), Eigen::EigenvaluesOnly);
      ev = es.eigenvalues();
    }
    w.e_min = ev.minCoeff();
    w.width = ev.maxCoeff() - ev.minCoeff();
  }
  if (!(w.width > 0.0)) fail(ErrorCode::ValidationError, "spectral window has zero width");
  return w;
}

std::string to_canonical_json(const HamiltonianSpec& h) {
  ojson j;
  j["model"] = to_string(h.model);
  ojson lat;
  lat["kind"] = to_string(h.lattice.kind);
  if (h.lattice.kind == LatticeKind::Ring1D) {
    lat["length"] = h.lattice.length;
  } else {
    lat["rows"] = h.lattice.rows;
    lat["cols"] = h.lattice.cols;
  }
  j["lattice"] = lat;
  j["g"] = h.g;
  j["J"] = h.J;
  ojson terms = ojson::array();
  for (const auto& t : h.terms) {
    ojson jt;
    jt["coefficient"] = t.coefficient;
    ojson sites = ojson::array();
    for (const auto& op : t.sites) sites.push_back(ojson::array({op.qubit, std::string(1, axis_char(op.axis))}));
    jt["sites"] = sites;
    terms.push_back(jt);
  }
  j["terms"] = terms;
  return j.dump();
}

HamiltonianSpec hamiltonian_from_json(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, e.what());
  }
  try {
    HamiltonianSpec h;
    h.model = model_kind_from_string(j.at("model").get<std::string>());
    const auto& lat = j.at("lattice");
    h.lattice.kind = lattice_kind_from_string(lat.at("kind").get<std::string>());
    if (h.lattice.kind == LatticeKind::Ring1D) {
      h.lattice.length = lat.at("length").get<int>();
    } else {
      h.lattice.rows = lat.at("rows").get<int>();
      h.lattice.cols = lat.at("cols").get<int>();
    }
    h.g = j.at("g").get<double>();
    h.J = j.at("J").get<double>();
    for (const auto& jt : j.at("terms")) {
      PauliTerm t;
      t.coefficient = jt.at("coefficient").get<double>();
      for (const auto& s : jt.at("sites")) {
        t.sites.push_back({s.at(0).get<int>(), axis_from_char(s.at(1).get<std::string>().at(0))});
      }
      validate_term(t, h.num_qubits());
      h.terms.push_back(std::move(t));
    }
    return h;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ValidationError, e.what());
  }
}

}  // namespace qkfe

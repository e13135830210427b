#include "qkfe/amplify.hpp"

#include "qkfe/error.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace qkfe {

namespace {

Gate pauli_layer(const std::vector<PauliOp>& ops, LayerTag tag, int layer) {
  Gate g;
  g.kind = GateKind::PauliLayer;
  g.paulis = ops;
  g.tag = tag;
  g.layer = layer;
  return g;
}

Gate analogue_block(double t, LayerTag tag, int layer) {
  Gate g;
  g.kind = GateKind::Analogue;
  g.angle = t;
  g.tag = tag;
  g.layer = layer;
  return g;
}

bool anticommutes_with_all(const PauliTerm& p, const HamiltonianSpec& h) {
  return std::all_of(h.terms.begin(), h.terms.end(), [&](const PauliTerm& t) { return !paulis_commute(p, t); });
}

bool commutes_with_all(const PauliTerm& p, const HamiltonianSpec& h) {
  return std::all_of(h.terms.begin(), h.terms.end(), [&](const PauliTerm& t) { return paulis_commute(p, t); });
}

}  // namespace

double subset_r_eff(int num_cz, int tripled) {
  if (num_cz <= 0 || tripled < 0 || tripled > num_cz) fail(ErrorCode::BadSchedule, "subset size out of range");
  return static_cast<double>(num_cz + 2 * tripled) / num_cz;
}

std::vector<int> random_subset(int n, int k, Rng& rng) {
  if (k < 0 || k > n) fail(ErrorCode::BadSchedule, "subset size out of range");
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates.
  for (int i = 0; i < k; ++i) {
    const int j = i + uniform_int(rng, n - i);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

AmplifiedCircuit amplify_noise(const Circuit& c, const AmplifySchedule& s) {
  AmplifiedCircuit out;
  out.circuit.num_qubits = c.num_qubits;
  out.circuit.propagator = c.propagator;
  const int num_cz = static_cast<int>(c.count(GateKind::CZ));

  switch (s.kind) {
    case AmplifyKind::RepeatCz: {
      if (s.repeat < 1 || s.repeat % 2 == 0) fail(ErrorCode::BadSchedule, "CZ repetition must be odd and positive");
      for (const auto& g : c.gates) {
        const int copies = g.kind == GateKind::CZ ? s.repeat : 1;
        for (int k = 0; k < copies; ++k) out.circuit.gates.push_back(g);
      }
      out.r_eff = s.repeat;
      break;
    }
    case AmplifyKind::Subset: {
      std::set<int> chosen(s.positions.begin(), s.positions.end());
      if (chosen.size() != s.positions.size()) fail(ErrorCode::BadSchedule, "subset repeats a CZ position");
      if (!chosen.empty() && (*chosen.begin() < 0 || *chosen.rbegin() >= num_cz)) {
        fail(ErrorCode::BadSchedule, "subset position beyond the CZ count");
      }
      int cz_index = 0;
      for (const auto& g : c.gates) {
        int copies = 1;
        if (g.kind == GateKind::CZ) copies = chosen.count(cz_index++) ? 3 : 1;
        for (int k = 0; k < copies; ++k) out.circuit.gates.push_back(g);
      }
      out.r_eff = num_cz > 0 ? subset_r_eff(num_cz, static_cast<int>(chosen.size())) : 1.0;
      break;
    }
    case AmplifyKind::AnalogueFold: {
      if (s.fold_p.empty()) fail(ErrorCode::BadSchedule, "analogue fold needs an anticommuting layer");
      for (const auto& g : c.gates) {
        if (g.kind != GateKind::Analogue) {
          out.circuit.gates.push_back(g);
          continue;
        }
        const double half = g.angle / 2;
        if (!s.fold_q.empty()) out.circuit.gates.push_back(pauli_layer(s.fold_q, g.tag, g.layer));
        out.circuit.gates.push_back(analogue_block(half, g.tag, g.layer));
        out.circuit.gates.push_back(pauli_layer(s.fold_p, g.tag, g.layer));
        out.circuit.gates.push_back(analogue_block(half, g.tag, g.layer));
        out.circuit.gates.push_back(pauli_layer(s.fold_p, g.tag, g.layer));
        if (!s.fold_q.empty()) out.circuit.gates.push_back(pauli_layer(s.fold_q, g.tag, g.layer));
        out.circuit.gates.push_back(g);
      }
      out.r_eff = 2.0;
      break;
    }
  }
  return out;
}

std::vector<AmplifySchedule> fold_variants(const HamiltonianSpec& h, int count) {
  if (count < 1 || count > 4) fail(ErrorCode::BadSchedule, "fold variant count must lie in 1..4");
  const auto coloring = h.lattice.two_coloring();
  if (!coloring) fail(ErrorCode::NonBipartite, "analogue fold needs a bipartite lattice");
  const int L = h.num_qubits();

  std::vector<std::vector<PauliOp>> ps(2);
  std::vector<PauliOp> q;
  for (int j = 0; j < L; ++j) {
    const int color = (*coloring)[static_cast<std::size_t>(j)];
    if (h.model == ModelKind::XY) {
      ps[static_cast<std::size_t>(color)].push_back({j, Axis::Z});
      q.push_back({j, Axis::Z});
    } else {
      ps[0].push_back({j, color == 0 ? Axis::Z : Axis::Y});
      ps[1].push_back({j, color == 0 ? Axis::Y : Axis::Z});
      q.push_back({j, Axis::X});
    }
  }
  if (!commutes_with_all(PauliTerm{1.0, q}, h)) q.clear();

  std::vector<AmplifySchedule> out;
  for (const auto& p : ps) {
    if (!anticommutes_with_all(PauliTerm{1.0, p}, h)) fail(ErrorCode::BadSchedule, "fold layer does not anticommute with H");
  }
  for (int k = 0; k < count; ++k) {
    AmplifySchedule s;
    s.kind = AmplifyKind::AnalogueFold;
    s.fold_p = ps[static_cast<std::size_t>(k % 2)];
    if (k >= 2) s.fold_q = q;
    out.push_back(s);
  }
  return out;
}

}  // namespace qkfe

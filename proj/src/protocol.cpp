#include "qkfe/protocol.hpp"

#include "qkfe/error.hpp"
#include "qkfe/executor.hpp"
#include "qkfe/parallel.hpp"

#include <json.hpp>

#include <bit>
#include <functional>
#include <map>
#include <cmath>
#include <numbers>
#include <sstream>

namespace qkfe {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t ipow(std::uint64_t base, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

Gate adjoint_of(const Gate& g, LayerTag tag) {
  Gate a = g;
  a.tag = tag;
  switch (g.kind) {
    case GateKind::Rx:
    case GateKind::Ry:
    case GateKind::Rz:
    case GateKind::Analogue:
      a.angle = -g.angle;
      break;
    case GateKind::Clifford1Q:
      a.adjoint = !g.adjoint;
      break;
    case GateKind::CZ:
    case GateKind::PauliLayer:
      break;
  }
  return a;
}

void append_inverse(Circuit& c, const std::vector<Gate>& gates, LayerTag tag) {
  for (auto it = gates.rbegin(); it != gates.rend(); ++it) c.gates.push_back(adjoint_of(*it, tag));
}

Gate clifford_gate(int q, int index, LayerTag tag) {
  Gate g;
  g.kind = GateKind::Clifford1Q;
  g.targets = {q};
  g.clifford = index;
  g.tag = tag;
  return g;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

Eigen::Vector2cd stabilizer_vector(int code) {
  const double r = 1.0 / std::sqrt(2.0);
  switch (code) {
    case kZero: return {1.0, 0.0};
    case kOne: return {0.0, 1.0};
    case kPlus: return {r, r};
    case kMinus: return {r, -r};
    case kPlusI: return {cplx(r, 0), cplx(0, r)};
    case kMinusI: return {cplx(r, 0), cplx(0, -r)};
    default: break;
  }
  fail(ErrorCode::BadProductState, "stabilizer code " + std::to_string(code) + " out of range");
}

// Angles (a, b, c) with u = e^{i alpha} Rz(a) Ry(b) Rz(c).
struct Zyz {
  double a, b, c;
};

Zyz zyz_decompose(const Eigen::Matrix2cd& u) {
  const double c0 = std::abs(u(0, 0));
  const double s0 = std::abs(u(1, 0));
  Zyz z{0.0, 2.0 * std::atan2(s0, c0), 0.0};
  if (s0 < 1e-12) {
    z.a = std::arg(u(1, 1)) - std::arg(u(0, 0));
  } else if (c0 < 1e-12) {
    z.a = std::arg(u(1, 0)) - std::arg(-u(0, 1));
  } else {
    z.a = std::arg(u(1, 0)) - std::arg(u(0, 0));
    z.c = std::arg(u(1, 1)) - std::arg(u(1, 0));
  }
  return z;
}

// Single-qubit rotation pair for one controlled target: returns beta and
// the unitary A with A Ry(beta)|0> = |0> and A Z Ry(beta)|0> = psi.
std::pair<double, Eigen::Matrix2cd> controlled_prep(int code) {
  const double beta = code == kOne ? kPi / 2 : kPi / 4;
  const Eigen::Vector2cd u = ry_matrix(beta).col(0);
  const Eigen::Vector2cd v(u(0), -u(1));
  const Eigen::Vector2cd psi = stabilizer_vector(code);
  const cplx overlap = u.dot(v);
  const Eigen::Vector2cd r = v - overlap * u;
  const Eigen::Vector2cd u_perp = r / r.norm();
  const Eigen::Vector2cd e0(1.0, 0.0);
  const Eigen::Vector2cd w = (psi - overlap * e0) / r.norm();
  const Eigen::Matrix2cd A = e0 * u.adjoint() + w * u_perp.adjoint();
  return {beta, A};
}

void check_psi(const std::vector<int>& psi) {
  if (psi.empty()) fail(ErrorCode::BadProductState, "empty product state");
  if (psi[0] != kOne) fail(ErrorCode::BadProductState, "pivot qubit must be |1>");
  for (int code : psi) {
    if (code < 0 || code > 5) fail(ErrorCode::BadProductState, "stabilizer code out of range");
  }
}

Circuit prep_circuit(const std::vector<int>& psi, int sign) {
  const int L = static_cast<int>(psi.size());
  Circuit c;
  c.num_qubits = L;
  Gate pivot;
  pivot.kind = GateKind::Ry;
  pivot.targets = {0};
  pivot.angle = sign > 0 ? kPi / 2 : -kPi / 2;
  pivot.tag = LayerTag::Prep;
  c.gates.push_back(pivot);
  for (int j = 1; j < L; ++j) {
    const int code = psi[static_cast<std::size_t>(j)];
    if (code == kZero) continue;
    const auto [beta, A] = controlled_prep(code);
    if (code == kOne) {
      Gate g;
      g.kind = GateKind::Ry;
      g.targets = {j};
      g.angle = beta;
      g.tag = LayerTag::Prep;
      c.gates.push_back(g);
    } else {
      append_ry(c, j, beta, LayerTag::Prep);
    }
    append_cz(c, 0, j, LayerTag::Prep);
    const Zyz z = zyz_decompose(A);
    append_rz(c, j, z.c, LayerTag::Prep);
    append_ry(c, j, z.b, LayerTag::Prep);
    append_rz(c, j, z.a, LayerTag::Prep);
  }
  return c;
}

MomentEstimate run_estimate(int n, int L, bool reference_state, const EstimatorConfig& cfg, const NoiseModel& noise,
                            const std::function<ProtocolTask(std::uint64_t)>& make_task) {
  const std::uint64_t count = task_count(L, reference_state, cfg);
  std::vector<UnitaryRecord> records(count);
  parallel_for(count, cfg.threads, [&](std::size_t i) {
    const ProtocolTask task = make_task(i);
    Rng rng(splitmix64(item_seed(cfg, n, i) ^ 0x5bd1e995ULL));
    const TaskResult r = evaluate_task(task, noise, cfg.mode, cfg.shots_per_unitary, rng);
    records[i] = UnitaryRecord{i, task.descriptor, r.shots, r.value, r.variance};
  });
  MomentEstimate est;
  est.n = n;
  RunningStats stats;
  for (const auto& r : records) stats.add(r.mean);
  est.mean = stats.mean();
  est.stderr_ = cfg.mode == EstimatorMode::Exhaustive ? 0.0 : stats.standard_error();
  est.unitaries = stats.count();
  est.records = std::move(records);
  return est;
}

}  // namespace

std::string to_string(EstimatorMode m) {
  switch (m) {
    case EstimatorMode::Sampled: return "sampled";
    case EstimatorMode::Expectation: return "expectation";
    case EstimatorMode::Exhaustive: return "exhaustive";
  }
  return "?";
}

EstimatorMode estimator_mode_from_string(const std::string& s) {
  if (s == "sampled") return EstimatorMode::Sampled;
  if (s == "expectation") return EstimatorMode::Expectation;
  if (s == "exhaustive") return EstimatorMode::Exhaustive;
  fail(ErrorCode::ValidationError, "unknown estimator mode '" + s + "'");
}

std::string to_string(EvolutionKind k) { return k == EvolutionKind::Trotter ? "trotter" : "analogue"; }

EvolutionKind evolution_kind_from_string(const std::string& s) {
  if (s == "trotter") return EvolutionKind::Trotter;
  if (s == "analogue") return EvolutionKind::Analogue;
  fail(ErrorCode::ValidationError, "unknown evolution kind '" + s + "'");
}

void EstimatorConfig::validate(int num_qubits) const {
  if (num_random_unitaries < 1) fail(ErrorCode::ValidationError, "num_random_unitaries must be positive");
  if (shots_per_unitary < 1) fail(ErrorCode::ValidationError, "shots_per_unitary must be positive");
  if (sampling_depth < 0) fail(ErrorCode::ValidationError, "sampling_depth must be non-negative");
  if (threads < 1) fail(ErrorCode::ValidationError, "threads must be positive");
  if (mode == EstimatorMode::Exhaustive) {
    if (num_qubits > 4) fail(ErrorCode::ValidationError, "exhaustive mode needs L <= 4");
    if (sampling_depth != 0) fail(ErrorCode::ValidationError, "exhaustive mode enumerates one layer only");
  }
}

void RunningStats::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void RunningStats::merge(const RunningStats& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const long n = n_ + o.n_;
  const double delta = o.mean_ - mean_;
  mean_ += delta * static_cast<double>(o.n_) / static_cast<double>(n);
  m2_ += o.m2_ + delta * delta * static_cast<double>(n_) * static_cast<double>(o.n_) / static_cast<double>(n);
  n_ = n;
}

double ProtocolTask::trace_term() const {
  if (kind == Kind::ReferenceState) return 0.0;
  return std::pow(0.25, circuits.front().num_qubits);
}

double vc_weight(std::uint64_t outcome) {
  const int k = std::popcount(outcome);
  return (k % 2 ? -1.0 : 1.0) * std::ldexp(1.0, -k);
}

double task_value(const ProtocolTask& task, const std::vector<Eigen::VectorXd>& dists) {
  if (task.kind == ProtocolTask::Kind::ReferenceState) return dists[0](0) - dists[1](0);
  const Eigen::VectorXd& p = dists[0];
  double acc = 0.0;
  for (Eigen::Index s = 0; s < p.size(); ++s) acc += p(s) * vc_weight(static_cast<std::uint64_t>(s));
  return acc;
}

TaskResult evaluate_task(const ProtocolTask& task, const NoiseModel& noise, EstimatorMode mode, int shots, Rng& rng) {
  TaskResult r;
  if (mode != EstimatorMode::Sampled) {
    std::vector<Eigen::VectorXd> dists;
    for (const auto& c : task.circuits) dists.push_back(exact_distribution(c, noise));
    r.value = task_value(task, dists);
    if (task.kind == ProtocolTask::Kind::VirtualCopy) {
      double second = 0.0;
      for (Eigen::Index s = 0; s < dists[0].size(); ++s) second += dists[0](s) * std::pow(vc_weight(static_cast<std::uint64_t>(s)), 2);
      r.variance = second - r.value * r.value;
    } else {
      r.variance = dists[0](0) * (1 - dists[0](0)) + dists[1](0) * (1 - dists[1](0));
    }
    return r;
  }
  r.shots = shots;
  if (task.kind == ProtocolTask::Kind::VirtualCopy) {
    RunningStats st;
    for (auto s : sample_outcomes(task.circuits[0], noise, shots, rng)) st.add(vc_weight(s));
    r.value = st.mean();
    r.variance = st.variance();
  } else {
    double freq[2];
    for (int k = 0; k < 2; ++k) {
      int zeros = 0;
      for (auto s : sample_outcomes(task.circuits[static_cast<std::size_t>(k)], noise, shots, rng)) zeros += s == 0;
      freq[k] = static_cast<double>(zeros) / shots;
    }
    r.value = freq[0] - freq[1];
    r.variance = freq[0] * (1 - freq[0]) + freq[1] * (1 - freq[1]);
  }
  return r;
}

void append_evolution(Circuit& c, const HamiltonianSpec& h, double t, const EvolutionSpec& evo) {
  if (evo.kind == EvolutionKind::Trotter) {
    append_trotter_evolution(c, h, t, evo.M);
    return;
  }
  if (t == 0.0) return;
  c.propagator = analogue_propagator(h);
  Gate g;
  g.kind = GateKind::Analogue;
  g.angle = t;
  g.tag = LayerTag::Evolution;
  c.gates.push_back(g);
}

ProtocolTask vc_task(const HamiltonianSpec& h, const RescaleWindow& window, int n, const EvolutionSpec& evo,
                     const std::vector<std::vector<int>>& layers, const std::optional<PauliTerm>& obs) {
  const int L = h.num_qubits();
  if (layers.empty()) fail(ErrorCode::ValidationError, "virtual-copy task needs a Clifford layer");
  Circuit c;
  c.num_qubits = L;
  std::vector<Gate> prep;
  const auto bonds = h.lattice.bonds();
  std::string desc;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    if (static_cast<int>(layers[k].size()) != L) fail(ErrorCode::ValidationError, "Clifford layer width differs from L");
    if (k > 0) {
      for (auto [a, b] : bonds) {
        Gate g;
        g.kind = GateKind::CZ;
        g.targets = {a, b};
        g.tag = LayerTag::Prep;
        prep.push_back(g);
      }
    }
    for (int q = 0; q < L; ++q) prep.push_back(clifford_gate(q, layers[k][static_cast<std::size_t>(q)], LayerTag::Prep));
    desc += (k ? "|" : "") + join(layers[k]);
  }
  c.gates = prep;
  append_evolution(c, h, n * kPi / window.width, evo);
  if (obs && !obs->sites.empty()) {
    Gate g;
    g.kind = GateKind::PauliLayer;
    g.paulis = obs->sites;
    g.tag = LayerTag::Evolution;
    c.gates.push_back(g);
  }
  append_inverse(c, prep, LayerTag::Inverse);
  c.validate();
  ProtocolTask t;
  t.kind = ProtocolTask::Kind::VirtualCopy;
  t.descriptor = "clifford:" + desc;
  t.circuits.push_back(std::move(c));
  return t;
}

void vc_check_valid(const HamiltonianSpec& h, const EvolutionSpec& evo) {
  if (evo.kind != EvolutionKind::Trotter) return;
  if (!h.lattice.two_coloring()) fail(ErrorCode::ProtocolInvalid, "no anticommuting symmetry on a non-bipartite lattice");
  const PauliTerm tau = anticommuting_witness(h);
  for (const auto& t : h.terms) {
    if (paulis_commute(tau, t)) fail(ErrorCode::ProtocolInvalid, "witness does not anticommute with " + to_string(t));
  }
}

std::uint64_t task_count(int num_qubits, bool reference_state, const EstimatorConfig& cfg) {
  if (cfg.mode != EstimatorMode::Exhaustive) return static_cast<std::uint64_t>(cfg.num_random_unitaries);
  return reference_state ? ipow(6, num_qubits - 1) : ipow(kNumCliffords, num_qubits);
}

std::uint64_t item_seed(const EstimatorConfig& cfg, int n, std::uint64_t index) {
  return derive_seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(n)), index);
}

std::vector<std::vector<int>> vc_layers_for(int L, int n, std::uint64_t index, const EstimatorConfig& cfg) {
  std::vector<std::vector<int>> layers;
  if (cfg.mode == EstimatorMode::Exhaustive) {
    std::vector<int> layer(static_cast<std::size_t>(L));
    for (int q = 0; q < L; ++q) {
      layer[static_cast<std::size_t>(q)] = static_cast<int>(index % kNumCliffords);
      index /= kNumCliffords;
    }
    layers.push_back(layer);
    return layers;
  }
  Rng rng(item_seed(cfg, n, index));
  for (int k = 0; k <= cfg.sampling_depth; ++k) {
    std::vector<int> layer(static_cast<std::size_t>(L));
    for (auto& c : layer) c = uniform_int(rng, kNumCliffords);
    layers.push_back(layer);
  }
  return layers;
}

std::vector<int> rs_state_for(int L, int n, std::uint64_t index, const EstimatorConfig& cfg) {
  std::vector<int> psi(static_cast<std::size_t>(L), kZero);
  psi[0] = kOne;
  if (cfg.mode == EstimatorMode::Exhaustive) {
    for (int q = 1; q < L; ++q) {
      psi[static_cast<std::size_t>(q)] = static_cast<int>(index % 6);
      index /= 6;
    }
    return psi;
  }
  Rng rng(item_seed(cfg, n, index));
  for (int q = 1; q < L; ++q) psi[static_cast<std::size_t>(q)] = uniform_int(rng, 6);
  return psi;
}

MomentEstimate vc_observable_moment(const HamiltonianSpec& h, const RescaleWindow& window, int n,
                                    const EvolutionSpec& evo, const PauliTerm& obs, const EstimatorConfig& cfg,
                                    const NoiseModel& noise) {
  const int L = h.num_qubits();
  cfg.validate(L);
  noise.validate();
  validate_term(PauliTerm{1.0, obs.sites}, L);
  vc_check_valid(h, evo);
  if (n < 0) fail(ErrorCode::ValidationError, "moment order must be non-negative");
  const std::optional<PauliTerm> o = obs.sites.empty() ? std::nullopt : std::optional<PauliTerm>(obs);
  return run_estimate(n, L, false, cfg, noise, [&](std::uint64_t i) {
    return vc_task(h, window, n, evo, vc_layers_for(L, n, i, cfg), o);
  });
}

MomentEstimate vc_moment_estimate(const HamiltonianSpec& h, const RescaleWindow& window, int n,
                                  const EvolutionSpec& evo, const EstimatorConfig& cfg, const NoiseModel& noise) {
  return vc_observable_moment(h, window, n, evo, PauliTerm{1.0, {}}, cfg, noise);
}

Circuit rs_prepare_circuit(const std::vector<int>& psi, int sign, int n, const RescaleWindow& window) {
  check_psi(psi);
  if (sign != 1 && sign != -1) fail(ErrorCode::BadProductState, "sign must be +1 or -1");
  Circuit c = prep_circuit(psi, sign);
  append_rz(c, 0, n * kPi * window.e_min / window.width, LayerTag::Prep, kPhaseLayer);
  return c;
}

ProtocolTask rs_task(const HamiltonianSpec& h, const RescaleWindow& window, int n, const EvolutionSpec& evo,
                     const std::vector<int>& psi) {
  if (static_cast<int>(psi.size()) != h.num_qubits()) fail(ErrorCode::BadProductState, "product state width differs from L");
  ProtocolTask t;
  t.kind = ProtocolTask::Kind::ReferenceState;
  t.descriptor = "psi:" + join(psi);
  const Circuit unprep = prep_circuit(psi, 1);
  for (int sign : {1, -1}) {
    Circuit c = rs_prepare_circuit(psi, sign, n, window);
    append_evolution(c, h, n * kPi / window.width, evo);
    append_inverse(c, unprep.gates, LayerTag::Inverse);
    c.validate();
    t.circuits.push_back(std::move(c));
  }
  return t;
}

void rs_check_valid(const HamiltonianSpec& h) {
  const SymmetryReport rep = symmetry_check(h);
  if (!rep.has_u1) fail(ErrorCode::ProtocolInvalid, "reference-state protocol needs U(1) symmetry");
  if (!rep.has_spinflip) fail(ErrorCode::ProtocolInvalid, "reference-state protocol needs global spin-flip symmetry");
  // H|0...0> must vanish.
  std::map<std::uint64_t, cplx> image;
  for (const auto& t : h.terms) {
    const PauliMasks m = masks_of(t);
    image[m.x_mask] += t.coefficient * m.phase(0);
  }
  for (const auto& [state, amp] : image) {
    if (std::abs(amp) > 1e-12) fail(ErrorCode::ReferenceNotEigenstate, "|0...0> is not a zero-energy eigenstate");
  }
}

MomentEstimate rs_moment_estimate(const HamiltonianSpec& h, const RescaleWindow& window, int n,
                                  const EvolutionSpec& evo, const EstimatorConfig& cfg, const NoiseModel& noise) {
  const int L = h.num_qubits();
  cfg.validate(L);
  noise.validate();
  rs_check_valid(h);
  if (n < 0) fail(ErrorCode::ValidationError, "moment order must be non-negative");
  return run_estimate(n, L, true, cfg, noise, [&](std::uint64_t i) {
    return rs_task(h, window, n, evo, rs_state_for(L, n, i, cfg));
  });
}

std::string sample_log_jsonl(const std::vector<MomentEstimate>& estimates) {
  std::string out;
  for (const auto& e : estimates) {
    for (const auto& r : e.records) {
      nlohmann::ordered_json j;
      j["n"] = e.n;
      j["index"] = r.index;
      j["descriptor"] = r.descriptor;
      j["shots"] = r.shots;
      j["mean"] = r.mean;
      j["variance"] = r.variance;
      out += j.dump() + "\n";
    }
  }
  return out;
}

std::vector<std::vector<double>> samples_from_jsonl(const std::string& text, int max_order) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(max_order + 1));
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    const int n = j.at("n").get<int>();
    if (n >= 0 && n <= max_order) out[static_cast<std::size_t>(n)].push_back(j.at("mean").get<double>());
  }
  return out;
}

}  // namespace qkfe

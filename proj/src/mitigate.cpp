#include "qkfe/mitigate.hpp"

#include "qkfe/error.hpp"
#include "qkfe/executor.hpp"
#include "qkfe/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

namespace qkfe {

namespace {

bool is_native_quarter_turn(double angle) {
  return std::abs(std::abs(angle) - std::numbers::pi / 2) < 1e-15;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Measured task value (sampled or exact) under noise.
double measure(const ProtocolTask& task, const NoiseModel& noise, const EstimatorConfig& cfg, Rng& rng) {
  return evaluate_task(task, noise, cfg.mode, cfg.shots_per_unitary, rng).value;
}

ProtocolTask with_circuits(const ProtocolTask& proto, std::vector<Circuit> circuits) {
  ProtocolTask t = proto;
  t.circuits = std::move(circuits);
  return t;
}

std::vector<PauliOp> fold_layer_for(const HamiltonianSpec& h) {
  if (!h.lattice.two_coloring()) return {};
  return fold_variants(h, 1).front().fold_p;
}

}  // namespace

Circuit build_error_estimation_circuit(const Circuit& target, const std::vector<PauliOp>& anticommuting) {
  int max_layer = -1;
  for (const auto& g : target.gates) {
    if (g.tag == LayerTag::Evolution && g.layer >= 0) max_layer = std::max(max_layer, g.layer);
  }
  if (max_layer >= 0 && max_layer % 2 != 0) {
    fail(ErrorCode::NotInvertibleByRzFlip, "evolution layers are not palindromic");
  }
  const int center = max_layer / 2;

  // Mirror layers must carry the same Rz angles in the same order.
  std::map<int, std::vector<double>> rz_by_layer;
  for (const auto& g : target.gates) {
    if (g.tag == LayerTag::Evolution && g.layer >= 0 && g.kind == GateKind::Rz) rz_by_layer[g.layer].push_back(g.angle);
  }
  for (const auto& [layer, angles] : rz_by_layer) {
    auto mirror = rz_by_layer.find(max_layer - layer);
    if (mirror == rz_by_layer.end() || mirror->second.size() != angles.size()) {
      fail(ErrorCode::NotInvertibleByRzFlip, "evolution layer " + std::to_string(layer) + " has no mirror");
    }
    for (std::size_t k = 0; k < angles.size(); ++k) {
      if (std::abs(angles[k] - mirror->second[k]) > 1e-12 * (1.0 + std::abs(angles[k]))) {
        fail(ErrorCode::NotInvertibleByRzFlip, "mirror layers carry different angles");
      }
    }
  }

  Circuit out;
  out.num_qubits = target.num_qubits;
  out.propagator = target.propagator;
  for (const auto& g : target.gates) {
    Gate e = g;
    if (g.kind == GateKind::Rz && g.layer == kPhaseLayer) {
      e.angle = 0.0;
    } else if (g.tag == LayerTag::Evolution) {
      switch (g.kind) {
        case GateKind::Rz:
          if (g.layer < 0) fail(ErrorCode::NotInvertibleByRzFlip, "evolution Rz outside a Trotter layer");
          if (g.layer == center) e.angle = 0.0;
          if (g.layer > center) e.angle = -g.angle;
          break;
        case GateKind::Rx:
        case GateKind::Ry:
          if (!is_native_quarter_turn(g.angle)) {
            fail(ErrorCode::NotInvertibleByRzFlip, "continuous angle outside an Rz gate");
          }
          break;
        case GateKind::Analogue: {
          if (anticommuting.empty()) fail(ErrorCode::NotInvertibleByRzFlip, "analogue block without an anticommuting layer");
          Gate half = g;
          half.angle = g.angle / 2;
          Gate p;
          p.kind = GateKind::PauliLayer;
          p.paulis = anticommuting;
          p.tag = g.tag;
          p.layer = g.layer;
          out.gates.push_back(half);
          out.gates.push_back(p);
          out.gates.push_back(half);
          out.gates.push_back(p);
          continue;
        }
        case GateKind::CZ:
        case GateKind::Clifford1Q:
        case GateKind::PauliLayer:
          break;
      }
    }
    out.gates.push_back(e);
  }
  return out;
}

MitigatedValue gem(double target_measured, double est_measured, double est_exact, double trace_term) {
  if (est_exact == trace_term) fail(ErrorCode::DegenerateEstimator, "estimation circuit value equals the trace term");
  MitigatedValue v;
  v.raw = target_measured;
  v.p_avg = (est_exact - est_measured) / (est_exact - trace_term);
  if (v.p_avg >= 1.0) fail(ErrorCode::TotalDepolarization, "estimated depolarization p_avg >= 1");
  v.mitigated = (target_measured - v.p_avg * trace_term) / (1.0 - v.p_avg);
  return v;
}

double zeta_value(double target_r, double est_r, double est_exact) {
  if (est_r == 0.0) fail(ErrorCode::DivByZeroEstimation, "estimation circuit measured zero");
  return target_r / est_r * est_exact;
}

MitigatedValue lzne(const std::vector<std::pair<double, double>>& zeta, double est_exact) {
  (void)est_exact;
  if (zeta.size() != 2) fail(ErrorCode::ValidationError, "LZNE needs exactly two noise levels");
  const auto [r1, z1] = zeta[0];
  const auto [r2, z2] = zeta[1];
  if (r1 == r2) fail(ErrorCode::DegeneratePair, "LZNE noise levels coincide");
  MitigatedValue v;
  v.zeta = zeta;
  v.raw = z1;
  v.mitigated = (r2 * z1 - r1 * z2) / (r2 - r1);
  return v;
}

MadResult mad_filter(const std::vector<double>& values, double threshold_sigmas) {
  if (values.size() < 3) fail(ErrorCode::TooFewValues, "MAD filter needs at least three values");
  const double med = median(values);
  std::vector<double> dev;
  dev.reserve(values.size());
  for (double v : values) dev.push_back(std::abs(v - med));
  const double sigma = kMadScale * median(dev);
  MadResult r;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::abs(values[i] - med) > threshold_sigmas * sigma) {
      r.removed.push_back(i);
    } else {
      r.kept.push_back(values[i]);
    }
  }
  return r;
}

std::string to_string(MitigationMethod m) {
  switch (m) {
    case MitigationMethod::None: return "none";
    case MitigationMethod::Gem: return "gem";
    case MitigationMethod::Lzne: return "lzne";
  }
  return "?";
}

MitigationMethod mitigation_method_from_string(const std::string& s) {
  if (s == "none") return MitigationMethod::None;
  if (s == "gem") return MitigationMethod::Gem;
  if (s == "lzne") return MitigationMethod::Lzne;
  fail(ErrorCode::ValidationError, "unknown mitigation method '" + s + "'");
}

std::string to_string(AmplifyKind k) {
  switch (k) {
    case AmplifyKind::RepeatCz: return "repeat";
    case AmplifyKind::Subset: return "subset";
    case AmplifyKind::AnalogueFold: return "analogue_fold";
  }
  return "?";
}

AmplifyKind amplify_kind_from_string(const std::string& s) {
  if (s == "repeat") return AmplifyKind::RepeatCz;
  if (s == "subset") return AmplifyKind::Subset;
  if (s == "analogue_fold") return AmplifyKind::AnalogueFold;
  fail(ErrorCode::ValidationError, "unknown amplification '" + s + "'");
}

void MitigationPlan::validate() const {
  if (mad_threshold <= 0) fail(ErrorCode::ValidationError, "mitigation.mad_threshold must be positive");
  if (method != MitigationMethod::Lzne) return;
  if (!(r2 > r1) || r1 < 1.0) fail(ErrorCode::ValidationError, "mitigation.lzne_pair needs r2 > r1 >= 1");
  switch (amplification) {
    case AmplifyKind::RepeatCz:
      for (double r : {r1, r2}) {
        if (r != std::floor(r) || static_cast<long>(r) % 2 == 0) {
          fail(ErrorCode::ValidationError, "mitigation.lzne_pair: CZ repetition reaches odd integer r only");
        }
      }
      break;
    case AmplifyKind::Subset:
      if (r1 != 1.0) fail(ErrorCode::ValidationError, "mitigation.lzne_pair: subset schedules pair with r1 = 1");
      if (subset_tripled < 1 || subset_selections < 1) fail(ErrorCode::ValidationError, "mitigation.subset sizes must be positive");
      break;
    case AmplifyKind::AnalogueFold:
      if (r1 != 1.0 || r2 != 2.0) fail(ErrorCode::ValidationError, "mitigation.lzne_pair: analogue folding reaches (1, 2) only");
      if (fold_variants < 1 || fold_variants > 4) fail(ErrorCode::ValidationError, "mitigation.fold_variants must lie in 1..4");
      break;
  }
}

double remitigate(const AuditRecord& rec) {
  if (rec.method == "gem") return gem(rec.target.at(0), rec.estimation.at(0), rec.est_exact, rec.trace_term).mitigated;
  if (rec.method == "lzne") {
    std::vector<std::pair<double, double>> z;
    for (std::size_t k = 0; k < 2; ++k) {
      z.emplace_back(rec.r.at(k), zeta_value(rec.target.at(k), rec.estimation.at(k), rec.est_exact));
    }
    return lzne(z, rec.est_exact).mitigated;
  }
  return rec.target.at(0);
}

MitigatedEstimate summarize_audit(int n, std::vector<AuditRecord> records, bool mad_enabled, double mad_threshold) {
  MitigatedEstimate est;
  est.n = n;
  RunningStats raw;
  std::vector<double> mitigated;
  for (auto& r : records) {
    raw.add(r.target.at(0));
    r.mitigated = remitigate(r);
    r.outlier = false;
    mitigated.push_back(r.mitigated);
  }
  if (mad_enabled && mitigated.size() >= 3) {
    for (std::size_t i : mad_filter(mitigated, mad_threshold).removed) records[i].outlier = true;
  }
  RunningStats kept;
  for (const auto& r : records) {
    if (r.outlier) {
      ++est.outliers_removed;
    } else {
      kept.add(r.mitigated);
    }
  }
  est.raw_mean = raw.mean();
  est.raw_stderr = raw.standard_error();
  est.mitigated_mean = kept.mean();
  est.mitigated_stderr = kept.standard_error();
  est.audit = std::move(records);
  return est;
}

MitigatedEstimate run_mitigated_estimate(const HamiltonianSpec& h, const RescaleWindow& window, int n,
                                         const std::optional<PauliTerm>& obs, ProtocolKind protocol,
                                         const MitigationPlan& plan, const NoiseModel& noise,
                                         const EvolutionSpec& evo, const EstimatorConfig& cfg) {
  const int L = h.num_qubits();
  plan.validate();
  cfg.validate(L);
  noise.validate();
  const bool rs = protocol == ProtocolKind::ReferenceState;
  if (rs) {
    rs_check_valid(h);
  } else {
    vc_check_valid(h, evo);
  }
  const std::vector<PauliOp> anti = evo.kind == EvolutionKind::Analogue ? fold_layer_for(h) : std::vector<PauliOp>{};
  std::vector<AmplifySchedule> folds;
  if (plan.method == MitigationMethod::Lzne && plan.amplification == AmplifyKind::AnalogueFold) {
    folds = fold_variants(h, plan.fold_variants);
  }
  const NoiseModel noiseless{};

  const std::uint64_t count = task_count(L, rs, cfg);
  std::vector<AuditRecord> records(count);
  parallel_for(count, cfg.threads, [&](std::size_t i) {
    const ProtocolTask task = rs ? rs_task(h, window, n, evo, rs_state_for(L, n, i, cfg))
                                 : vc_task(h, window, n, evo, vc_layers_for(L, n, i, cfg), obs);
    std::vector<Circuit> est_circuits;
    for (const auto& c : task.circuits) est_circuits.push_back(build_error_estimation_circuit(c, anti));
    const ProtocolTask est_task = with_circuits(task, est_circuits);

    Rng rng(splitmix64(item_seed(cfg, n, i) ^ 0x7f4a7c15ULL));
    AuditRecord rec;
    rec.n = n;
    rec.index = i;
    rec.descriptor = task.descriptor;
    rec.method = to_string(plan.method);
    rec.trace_term = task.trace_term();
    Rng exact_rng(0);
    rec.est_exact = evaluate_task(est_task, noiseless, EstimatorMode::Expectation, 1, exact_rng).value;

    auto amplified = [&](const ProtocolTask& base, const AmplifySchedule& s) {
      std::vector<Circuit> cs;
      for (const auto& c : base.circuits) cs.push_back(amplify_noise(c, s).circuit);
      return with_circuits(base, cs);
    };
    auto measure_level = [&](double r, bool base_level) {
      double t = 0.0, e = 0.0;
      if (base_level) {
        t = measure(task, noise, cfg, rng);
        e = plan.method == MitigationMethod::None ? 0.0 : measure(est_task, noise, cfg, rng);
      } else if (plan.amplification == AmplifyKind::RepeatCz) {
        AmplifySchedule s;
        s.kind = AmplifyKind::RepeatCz;
        s.repeat = static_cast<int>(r);
        t = measure(amplified(task, s), noise, cfg, rng);
        e = measure(amplified(est_task, s), noise, cfg, rng);
      } else if (plan.amplification == AmplifyKind::Subset) {
        // Same CZ positions in target and estimation circuits.
        for (int k = 0; k < plan.subset_selections; ++k) {
          std::vector<Circuit> tc, ec;
          for (std::size_t c = 0; c < task.circuits.size(); ++c) {
            const int ncz = static_cast<int>(task.circuits[c].count(GateKind::CZ));
            AmplifySchedule s;
            s.kind = AmplifyKind::Subset;
            s.positions = random_subset(ncz, std::min(plan.subset_tripled, ncz), rng);
            tc.push_back(amplify_noise(task.circuits[c], s).circuit);
            ec.push_back(amplify_noise(est_task.circuits[c], s).circuit);
          }
          t += measure(with_circuits(task, tc), noise, cfg, rng);
          e += measure(with_circuits(est_task, ec), noise, cfg, rng);
        }
        t /= plan.subset_selections;
        e /= plan.subset_selections;
      } else {
        for (const auto& s : folds) {
          t += measure(amplified(task, s), noise, cfg, rng);
          e += measure(amplified(est_task, s), noise, cfg, rng);
        }
        t /= static_cast<double>(folds.size());
        e /= static_cast<double>(folds.size());
      }
      rec.r.push_back(r);
      rec.target.push_back(t);
      rec.estimation.push_back(e);
    };

    if (plan.method == MitigationMethod::Lzne) {
      double r2 = plan.r2;
      if (plan.amplification == AmplifyKind::Subset) {
        const int ncz = static_cast<int>(task.circuits.front().count(GateKind::CZ));
        r2 = ncz > 0 ? subset_r_eff(ncz, std::min(plan.subset_tripled, ncz)) : 1.0;
        if (ncz == 0) fail(ErrorCode::BadSchedule, "subset amplification on a circuit without CZ gates");
      }
      measure_level(plan.r1, plan.r1 == 1.0);
      measure_level(r2, false);
    } else {
      measure_level(1.0, true);
    }
    records[i] = std::move(rec);
  });
  return summarize_audit(n, std::move(records), plan.mad_enabled, plan.mad_threshold);
}

std::string audit_jsonl(const std::vector<MitigatedEstimate>& estimates) {
  std::string out;
  for (const auto& e : estimates) {
    for (const auto& r : e.audit) {
      nlohmann::ordered_json j;
      j["n"] = r.n;
      j["index"] = r.index;
      j["descriptor"] = r.descriptor;
      j["method"] = r.method;
      j["est_exact"] = r.est_exact;
      j["trace_term"] = r.trace_term;
      j["r"] = r.r;
      j["target"] = r.target;
      j["estimation"] = r.estimation;
      std::vector<double> zeta;
      if (r.method == "lzne") {
        for (std::size_t k = 0; k < r.r.size(); ++k) zeta.push_back(zeta_value(r.target[k], r.estimation[k], r.est_exact));
      }
      j["zeta"] = zeta;
      if (r.method == "gem") {
        j["p_avg"] = gem(r.target[0], r.estimation[0], r.est_exact, r.trace_term).p_avg;
      }
      j["mitigated"] = r.mitigated;
      j["outlier"] = r.outlier;
      out += j.dump() + "\n";
    }
  }
  return out;
}

std::vector<AuditRecord> audit_from_jsonl(const std::string& text) {
  std::vector<AuditRecord> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::ParseError, std::string("audit log: ") + e.what());
    }
    AuditRecord r;
    r.n = j.at("n").get<int>();
    r.index = j.at("index").get<std::uint64_t>();
    r.descriptor = j.at("descriptor").get<std::string>();
    r.method = j.at("method").get<std::string>();
    r.est_exact = j.at("est_exact").get<double>();
    r.trace_term = j.at("trace_term").get<double>();
    r.r = j.at("r").get<std::vector<double>>();
    r.target = j.at("target").get<std::vector<double>>();
    r.estimation = j.at("estimation").get<std::vector<double>>();
    r.mitigated = j.at("mitigated").get<double>();
    r.outlier = j.at("outlier").get<bool>();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace qkfe

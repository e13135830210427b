#include "qkfe/runner.hpp"

#include "qkfe/csv.hpp"
#include "qkfe/error.hpp"
#include "qkfe/kernel.hpp"
#include "qkfe/rng.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>

namespace qkfe {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

constexpr std::uint64_t kBootstrapStream = 0xb0075ULL;

MomentTable empty_table(int N) {
  MomentTable t;
  t.estimate = Eigen::VectorXd::Zero(N + 1);
  t.stderr_ = Eigen::VectorXd::Zero(N + 1);
  t.samples.resize(static_cast<std::size_t>(N + 1));
  return t;
}

// Fills orders 1..N of `table` from the protocol, raw or mitigated.
void estimate_orders(RunResult& out, MomentTable& table, const HamiltonianSpec& h,
                     const std::optional<PauliTerm>& obs, int first) {
  const ExperimentConfig& c = out.config;
  const bool rs = c.protocol == RunProtocol::ReferenceState;
  for (int n = first; n <= c.N; ++n) {
    const EvolutionSpec evo = c.evolution_for(n, obs.has_value());
    const auto k = static_cast<std::size_t>(n);
    if (c.mitigation.method == MitigationMethod::None) {
      MomentEstimate e;
      if (rs) {
        e = rs_moment_estimate(h, out.window, n, evo, c.estimator, c.noise);
      } else if (obs) {
        e = vc_observable_moment(h, out.window, n, evo, *obs, c.estimator, c.noise);
      } else {
        e = vc_moment_estimate(h, out.window, n, evo, c.estimator, c.noise);
      }
      table.estimate(n) = e.mean;
      table.stderr_(n) = e.stderr_;
      for (const auto& r : e.records) table.samples[k].push_back(r.mean);
      out.raw.push_back(std::move(e));
    } else {
      MitigatedEstimate e = run_mitigated_estimate(h, out.window, n, obs,
                                                   rs ? ProtocolKind::ReferenceState : ProtocolKind::VirtualCopy,
                                                   c.mitigation, c.noise, evo, c.estimator);
      table.estimate(n) = e.mitigated_mean;
      table.stderr_(n) = e.mitigated_stderr;
      for (const auto& r : e.audit) {
        if (!r.outlier) table.samples[k].push_back(r.mitigated);
      }
      out.mitigated.push_back(std::move(e));
    }
  }
}

nlohmann::ordered_json thermo_json(const ThermoCurve& c) {
  nlohmann::ordered_json j;
  j["T"] = c.T;
  j["F"] = c.F;
  j["S"] = c.S;
  j["C"] = c.C;
  if (c.has_bands()) {
    j["F_err"] = c.F_err;
    j["S_err"] = c.S_err;
    j["C_err"] = c.C_err;
  }
  return j;
}

nlohmann::ordered_json table_json(const MomentTable& m) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Eigen::Index n = 0; n < m.estimate.size(); ++n) {
    nlohmann::ordered_json r;
    r["n"] = n;
    r["estimate"] = m.estimate(n);
    r["stderr"] = m.stderr_(n);
    if (m.exact) {
      r["exact"] = (*m.exact)(n);
      r["abs_diff"] = std::abs(m.estimate(n) - (*m.exact)(n));
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

std::string moments_csv(const MomentTable& m) {
  std::string out = "n,estimate,stderr,exact,abs_diff\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (Eigen::Index n = 0; n < m.estimate.size(); ++n) {
    const double ex = m.exact ? (*m.exact)(n) : nan;
    out += csv_row({static_cast<double>(n), m.estimate(n), m.stderr_(n), ex, std::abs(m.estimate(n) - ex)}) + "\n";
  }
  return out;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  RunResult out;
  out.config = cfg;
  out.form = cfg.series_form();
  const HamiltonianSpec h = cfg.hamiltonian();
  const int L = h.num_qubits();
  const int N = cfg.N;
  const bool obs_vc = cfg.observable && cfg.protocol == RunProtocol::VirtualCopy;
  if (cfg.observable && cfg.protocol == RunProtocol::ReferenceState) {
    fail(ErrorCode::ValidationError, "protocol.observable: observables use the virtual-copy or exact protocols");
  }

  auto t0 = Clock::now();
  out.window = rescale_window(h, cfg.window);
  std::optional<Spectrum> spec;
  std::optional<ExactMoments> exact;
  std::optional<ExactMoments> exact_obs;
  if (L <= kDenseLimit) {
    spec = diagonalize(h, cfg.observable.has_value());
    exact = exact_moments(*spec, out.window, N);
    if (cfg.observable) exact_obs = exact_observable_moments(*spec, out.window, *cfg.observable, N);
  } else if (cfg.protocol == RunProtocol::ExactOnly) {
    fail(ErrorCode::TooLarge, "exact_only runs need L <= 14");
  }
  out.timings["oracle"] = seconds_since(t0);

  const bool composite = cfg.protocol == RunProtocol::VirtualCopy;
  t0 = Clock::now();
  out.moments = empty_table(N);
  out.moments.estimate(0) = 1.0;
  out.moments.samples[0] = {1.0};
  if (exact) out.moments.exact = composite ? exact->fc : exact->f;
  if (cfg.protocol == RunProtocol::ExactOnly) {
    out.moments.estimate = *out.moments.exact;
  } else {
    estimate_orders(out, out.moments, h, std::nullopt, 1);
  }
  if (cfg.observable) {
    MomentTable t = empty_table(N);
    if (exact_obs) t.exact = composite ? exact_obs->dc : exact_obs->d;
    if (!obs_vc) {
      t.estimate = *t.exact;
    } else {
      // Tr O vanishes for every non-identity string, so d_0c is known.
      t.samples[0] = {0.0};
      estimate_orders(out, t, h, cfg.observable, 1);
    }
    out.observable_moments = std::move(t);
  }
  out.timings["moments"] = seconds_since(t0);

  t0 = Clock::now();
  const KernelCoefficients kernel = jackson_coefficients(N);
  const std::vector<double> T = cfg.temperature.values();
  out.thermo = thermodynamics(out.moments.estimate, kernel, out.window, L, T, out.form, NegativePolicy::Exclude);
  if (cfg.observable) {
    const auto& om = out.observable_moments->estimate;
    if (composite) {
      for (double v : composite_thermal(om, out.moments.estimate, kernel, out.window, out.thermo.T)) {
        out.observable_thermal.push_back(observable_from_composite(v).magnitude);
      }
    } else {
      out.observable_thermal = observable_thermal(om, out.moments.estimate, kernel, out.window, out.thermo.T);
    }
    if (spec) out.observable_exact = exact_observable_thermal(*spec, *cfg.observable, out.thermo.T);
  }
  out.timings["thermo"] = seconds_since(t0);

  t0 = Clock::now();
  if (cfg.protocol != RunProtocol::ExactOnly && !out.thermo.T.empty()) {
    if (cfg.bands == BandMethod::Bootstrap) {
      bootstrap_bands(out.thermo, out.moments.samples, kernel, out.window, L, out.form, cfg.bootstrap_replicates,
                      derive_seed(cfg.estimator.seed, kBootstrapStream));
    } else if (cfg.bands == BandMethod::FirstOrder) {
      MomentSet ms;
      ms.protocol = composite ? MomentProtocol::VirtualCopy : MomentProtocol::ReferenceState;
      ms.mean = out.moments.estimate;
      ms.stderr_ = out.moments.stderr_;
      first_order_bands(out.thermo, ms, kernel, out.window, L, out.form);
    }
  }
  out.timings["bands"] = seconds_since(t0);
  return out;
}

std::string resolve_output_dir(const std::optional<std::string>& cli_out, const ExperimentConfig& cfg) {
  if (cli_out && !cli_out->empty()) return *cli_out;
  if (cfg.output_dir_set && !cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv("QKFE_OUT_DIR"); env && *env) return env;
  return "qkfe_out";
}

std::vector<std::string> write_outputs(const RunResult& r, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create output directory " + dir + ": " + ec.message());
  std::vector<std::string> files;
  auto put = [&](const std::string& name, const std::string& text) {
    write_file((fs::path(dir) / name).string(), text);
    files.push_back(name);
  };
  const ExperimentConfig& c = r.config;
  const bool csv = c.format != OutputFormat::Json;
  const bool json = c.format != OutputFormat::Csv;

  if (csv) {
    put("moments.csv", moments_csv(r.moments));
    put("thermo.csv", thermo_csv(r.thermo));
    if (r.observable_moments) {
      put("observable_moments.csv", moments_csv(*r.observable_moments));
      std::string obs = r.observable_exact.empty() ? "T,value\n" : "T,value,exact\n";
      for (std::size_t i = 0; i < r.thermo.T.size(); ++i) {
        std::vector<double> row{r.thermo.T[i], r.observable_thermal[i]};
        if (!r.observable_exact.empty()) row.push_back(r.observable_exact[i]);
        obs += csv_row(row) + "\n";
      }
      put("observable.csv", obs);
    }
  }
  if (json) {
    nlohmann::ordered_json j;
    j["moments"] = table_json(r.moments);
    j["thermo"] = thermo_json(r.thermo);
    if (r.observable_moments) {
      j["observable_moments"] = table_json(*r.observable_moments);
      j["observable"]["T"] = r.thermo.T;
      j["observable"]["value"] = r.observable_thermal;
      if (!r.observable_exact.empty()) j["observable"]["exact"] = r.observable_exact;
    }
    put("results.json", j.dump(2) + "\n");
  }
  if (!r.raw.empty()) put("samples.jsonl", sample_log_jsonl(r.raw));
  if (!r.mitigated.empty()) put("audit.jsonl", audit_jsonl(r.mitigated));

  nlohmann::ordered_json s;
  s["config"] = nlohmann::ordered_json::parse(config_echo(c));
  s["window"]["e_min"] = r.window.e_min;
  s["window"]["width"] = r.window.width;
  s["seeds"]["protocol"] = c.estimator.seed;
  s["seeds"]["bootstrap"] = derive_seed(c.estimator.seed, kBootstrapStream);
  s["excluded_T"] = r.thermo.excluded;
  if (!r.thermo.T.empty()) {
    s["valid_T"] = {r.thermo.T.front(), r.thermo.T.back()};
  } else {
    s["valid_T"] = nullptr;
  }
  s["audit"] = r.mitigated.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json("audit.jsonl");
  s["samples"] = r.raw.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json("samples.jsonl");
  if (c.record_timings) {
    for (const auto& [stage, sec] : r.timings) s["timings"][stage] = sec;
  }
  files.push_back("summary.json");
  s["files"] = files;
  write_file((fs::path(dir) / "summary.json").string(), s.dump(2) + "\n");
  return files;
}

}  // namespace qkfe

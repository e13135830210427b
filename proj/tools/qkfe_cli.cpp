// qkfe: command-line front end for the thermodynamics lab.

#include "qkfe/config.hpp"
#include "qkfe/csv.hpp"
#include "qkfe/error.hpp"
#include "qkfe/mitigate.hpp"
#include "qkfe/runner.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  int threads = 1;
  std::optional<std::string> format;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool needs_config = true) {
  auto* opt = cmd->add_option("--config", f.config, "experiment config (JSON)");
  if (needs_config) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "override protocol.seed");
  cmd->add_option("--out", f.out, "output directory (default: output.directory, $QKFE_OUT_DIR, qkfe_out)");
  cmd->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--format", f.format, "csv, json or both")->check(CLI::IsMember({"csv", "json", "both"}));
}

qkfe::ExperimentConfig load(const CommonFlags& f) {
  qkfe::ExperimentConfig c = qkfe::parse_config(f.config);
  if (f.seed) c.estimator.seed = *f.seed;
  c.estimator.threads = f.threads;
  if (f.format) {
    c.format = *f.format == "csv" ? qkfe::OutputFormat::Csv
               : *f.format == "json" ? qkfe::OutputFormat::Json
                                     : qkfe::OutputFormat::Both;
  }
  qkfe::validate_config(c);
  return c;
}

ordered_json run_and_write(const qkfe::ExperimentConfig& c, const std::string& dir) {
  const qkfe::RunResult r = qkfe::run_experiment(c);
  const auto files = qkfe::write_outputs(r, dir);
  ordered_json j;
  j["status"] = "ok";
  j["directory"] = dir;
  j["files"] = files;
  j["excluded_T"] = r.thermo.excluded;
  return j;
}

std::map<std::string, std::vector<double>> read_thermo(const std::string& dir) {
  const qkfe::CsvTable t = qkfe::read_csv((fs::path(dir) / "thermo.csv").string());
  std::map<std::string, std::vector<double>> cols;
  for (const auto& name : t.header) cols[name] = t.column(name);
  return cols;
}

ordered_json compare_runs(const qkfe::RunResult& a, const qkfe::RunResult& b, const std::string& dir) {
  std::string csv = "T,F_a,F_b,S_a,S_b,C_a,C_b\n";
  double dF = 0.0, dS = 0.0, dC = 0.0;
  std::size_t common = 0;
  for (std::size_t i = 0; i < a.thermo.T.size(); ++i) {
    const auto it = std::find(b.thermo.T.begin(), b.thermo.T.end(), a.thermo.T[i]);
    if (it == b.thermo.T.end()) continue;
    const auto j = static_cast<std::size_t>(it - b.thermo.T.begin());
    ++common;
    dF = std::max(dF, std::abs(a.thermo.F[i] - b.thermo.F[j]));
    dS = std::max(dS, std::abs(a.thermo.S[i] - b.thermo.S[j]));
    dC = std::max(dC, std::abs(a.thermo.C[i] - b.thermo.C[j]));
    csv += qkfe::csv_row({a.thermo.T[i], a.thermo.F[i], b.thermo.F[j], a.thermo.S[i], b.thermo.S[j],
                          a.thermo.C[i], b.thermo.C[j]}) +
           "\n";
  }
  if (common == 0) qkfe::fail(qkfe::ErrorCode::ValidationError, "the two runs share no temperatures");
  fs::create_directories(dir);
  qkfe::write_file((fs::path(dir) / "compare.csv").string(), csv);
  ordered_json j;
  j["status"] = "ok";
  j["common_temperatures"] = common;
  j["max_abs_dF"] = dF;
  j["max_abs_dS"] = dS;
  j["max_abs_dC"] = dC;
  qkfe::write_file((fs::path(dir) / "compare.json").string(), j.dump(2) + "\n");
  return j;
}

void apply_sweep_value(qkfe::ExperimentConfig& c, const std::string& param, const std::string& value) {
  auto number = [&] {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) qkfe::fail(qkfe::ErrorCode::ValidationError, "sweep value '" + value + "' is not a number");
    return v;
  };
  if (param == "g") {
    c.g = number();
  } else if (param == "J") {
    c.J = number();
  } else if (param == "N") {
    c.N = static_cast<int>(number());
  } else if (param == "seed") {
    c.estimator.seed = static_cast<std::uint64_t>(number());
  } else if (param == "length") {
    c.lattice.length = static_cast<int>(number());
  } else if (param == "grid") {
    const auto x = value.find('x');
    if (x == std::string::npos) qkfe::fail(qkfe::ErrorCode::ValidationError, "grid values look like 3x4");
    c.lattice.kind = qkfe::LatticeKind::Grid2D;
    c.lattice.rows = std::stoi(value.substr(0, x));
    c.lattice.cols = std::stoi(value.substr(x + 1));
  } else {
    qkfe::fail(qkfe::ErrorCode::ValidationError, "unknown sweep parameter '" + param + "'");
  }
}

void print_error(qkfe::ErrorCode code, const std::string& message) {
  ordered_json j;
  j["status"] = "error";
  j["code"] = std::string(qkfe::error_code_name(code));
  j["message"] = message;
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qkfe: free energy and thermodynamics from Fourier moments of the Hamiltonian"};
  app.require_subcommand(1);

  CommonFlags oracle_flags;
  auto* oracle = app.add_subcommand("oracle", "exact-diagonalisation reference curves");
  add_common(oracle, oracle_flags);

  CommonFlags est_flags;
  auto* estimate = app.add_subcommand("estimate", "estimate moments with the configured protocol");
  add_common(estimate, est_flags);

  std::string replay_run;
  std::optional<std::string> replay_out;
  std::optional<bool> replay_mad;
  double replay_threshold = 2.0;
  auto* replay = app.add_subcommand("mitigate-replay", "recompute mitigated moments from an audit log");
  replay->add_option("--run", replay_run, "directory of a previous mitigated run")->required()->check(CLI::ExistingDirectory);
  replay->add_option("--out", replay_out, "where to write replay.csv (default: the run directory)");
  replay->add_option("--mad", replay_mad, "enable or disable the MAD filter (default: as recorded)");
  replay->add_option("--mad-threshold", replay_threshold, "MAD threshold in robust sigmas");

  CommonFlags cmp_flags;
  std::string cmp_against;
  auto* compare = app.add_subcommand("compare", "run two configs and compare F, S and C");
  add_common(compare, cmp_flags);
  compare->add_option("--against", cmp_against, "second config")->required()->check(CLI::ExistingFile);

  CommonFlags sweep_flags;
  std::string sweep_param;
  std::vector<std::string> sweep_values;
  auto* sweep = app.add_subcommand("sweep", "repeat a run over values of one parameter");
  add_common(sweep, sweep_flags);
  sweep->add_option("--param", sweep_param, "g, J, N, seed, length or grid")->required();
  sweep->add_option("--values", sweep_values, "values, comma separated")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    print_error(qkfe::ErrorCode::ValidationError, e.what());
    return 2;
  }

  try {
    ordered_json result;
    if (*oracle) {
      qkfe::ExperimentConfig c = load(oracle_flags);
      c.protocol = qkfe::RunProtocol::ExactOnly;
      c.form = qkfe::SeriesForm::Generic;
      c.mitigation.method = qkfe::MitigationMethod::None;
      c.noise = {};
      result = run_and_write(c, qkfe::resolve_output_dir(oracle_flags.out, c));
    } else if (*estimate) {
      const qkfe::ExperimentConfig c = load(est_flags);
      result = run_and_write(c, qkfe::resolve_output_dir(est_flags.out, c));
    } else if (*replay) {
      const auto audit_path = fs::path(replay_run) / "audit.jsonl";
      const auto summary = nlohmann::json::parse(qkfe::read_file((fs::path(replay_run) / "summary.json").string()));
      bool mad = summary.at("config").at("mitigation").at("mad").get<bool>();
      double threshold = summary.at("config").at("mitigation").at("mad_threshold").get<double>();
      if (replay_mad) mad = *replay_mad;
      if (replay->count("--mad-threshold")) threshold = replay_threshold;
      std::map<int, std::vector<qkfe::AuditRecord>> by_order;
      for (auto& r : qkfe::audit_from_jsonl(qkfe::read_file(audit_path.string()))) by_order[r.n].push_back(std::move(r));
      std::string csv = "n,raw,mitigated,stderr,outliers_removed\n";
      for (auto& [n, records] : by_order) {
        const qkfe::MitigatedEstimate e = qkfe::summarize_audit(n, std::move(records), mad, threshold);
        csv += qkfe::csv_row({static_cast<double>(n), e.raw_mean, e.mitigated_mean, e.mitigated_stderr,
                              static_cast<double>(e.outliers_removed)}) +
               "\n";
      }
      const std::string dir = replay_out ? *replay_out : replay_run;
      fs::create_directories(dir);
      qkfe::write_file((fs::path(dir) / "replay.csv").string(), csv);
      result["status"] = "ok";
      result["file"] = (fs::path(dir) / "replay.csv").string();
    } else if (*compare) {
      CommonFlags other = cmp_flags;
      other.config = cmp_against;
      const qkfe::ExperimentConfig a = load(cmp_flags);
      const qkfe::ExperimentConfig b = load(other);
      const std::string dir = qkfe::resolve_output_dir(cmp_flags.out, a);
      result = compare_runs(qkfe::run_experiment(a), qkfe::run_experiment(b), dir);
    } else if (*sweep) {
      const qkfe::ExperimentConfig base = load(sweep_flags);
      const std::string dir = qkfe::resolve_output_dir(sweep_flags.out, base);
      std::string csv = "index,value,T_at_C_max,C_max,F_at_T_min\n";
      for (std::size_t i = 0; i < sweep_values.size(); ++i) {
        qkfe::ExperimentConfig c = base;
        apply_sweep_value(c, sweep_param, sweep_values[i]);
        qkfe::validate_config(c);
        const std::string sub = (fs::path(dir) / ("run_" + std::to_string(i))).string();
        run_and_write(c, sub);
        const auto cols = read_thermo(sub);
        const auto& C = cols.at("C");
        const auto& T = cols.at("T");
        if (C.empty()) qkfe::fail(qkfe::ErrorCode::NegativeArgument, "run " + std::to_string(i) + " kept no temperatures");
        const auto peak = static_cast<std::size_t>(std::max_element(C.begin(), C.end()) - C.begin());
        double v = std::nan("");
        try {
          v = std::stod(sweep_values[i]);
        } catch (const std::exception&) {
        }
        csv += qkfe::csv_row({static_cast<double>(i), v, T[peak], C[peak], cols.at("F").front()}) + "\n";
      }
      fs::create_directories(dir);
      qkfe::write_file((fs::path(dir) / "sweep.csv").string(), csv);
      result["status"] = "ok";
      result["directory"] = dir;
      result["runs"] = sweep_values.size();
    }
    std::cout << result.dump() << "\n";
    return 0;
  } catch (const qkfe::NegativeArgumentError& e) {
    ordered_json j;
    j["status"] = "error";
    j["code"] = "NegativeArgument";
    j["message"] = e.what();
    j["temperature"] = e.temperature();
    std::cerr << j.dump() << "\n";
    return 1;
  } catch (const qkfe::Error& e) {
    print_error(e.code(), e.what());
    const bool config_error = e.code() == qkfe::ErrorCode::ParseError || e.code() == qkfe::ErrorCode::ValidationError ||
                              e.code() == qkfe::ErrorCode::MissingField;
    return config_error ? 2 : 1;
  } catch (const std::exception& e) {
    print_error(qkfe::ErrorCode::IoError, e.what());
    return 1;
  }
}

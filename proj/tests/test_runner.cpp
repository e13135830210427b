#include "qkfe/config.hpp"
#include "qkfe/csv.hpp"
#include "qkfe/error.hpp"
#include "qkfe/runner.hpp"

#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>

using namespace qkfe;
namespace fs = std::filesystem;

namespace {

const std::string kData = QKFE_TEST_DATA;

std::string scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qkfe_runner_" + name);
  fs::remove_all(p);
  return p.string();
}

std::map<std::string, std::string> snapshot(const std::string& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = read_file(e.path().string());
  return files;
}

}  // namespace

TEST_CASE("oracle thermodynamics match the frozen golden file") {
  const ExperimentConfig c = parse_config(kData + "/ring4_oracle.json");
  const std::string dir = scratch("oracle");
  write_outputs(run_experiment(c), dir);
  const CsvTable got = read_csv(dir + "/thermo.csv");
  const CsvTable want = read_csv(kData + "/golden/ring4_oracle_thermo.csv");
  REQUIRE(got.header == want.header);
  REQUIRE(got.rows.size() == want.rows.size());
  for (std::size_t i = 0; i < got.rows.size(); ++i) CHECK(got.rows[i] == want.rows[i]);
  CHECK_FALSE(fs::exists(dir + "/samples.jsonl"));
  CHECK_FALSE(fs::exists(dir + "/results.json"));
}

TEST_CASE("estimate runs are byte-identical across repeats and thread counts") {
  ExperimentConfig c = parse_config(kData + "/ring4_vc.json");
  const std::string a = scratch("det_a"), b = scratch("det_b"), t = scratch("det_threads");
  write_outputs(run_experiment(c), a);
  write_outputs(run_experiment(c), b);
  c.estimator.threads = 4;
  write_outputs(run_experiment(c), t);
  const auto sa = snapshot(a);
  CHECK(sa == snapshot(b));
  CHECK(sa == snapshot(t));
  for (const char* f : {"moments.csv", "thermo.csv", "results.json", "samples.jsonl", "summary.json"}) {
    CHECK(sa.count(f) == 1);
  }
  CHECK(sa.at("moments.csv").rfind("n,estimate,stderr,exact,abs_diff\n", 0) == 0);
  CHECK(sa.at("thermo.csv").rfind("T,F,S,C,F_err,S_err,C_err\n", 0) == 0);

  const auto summary = nlohmann::json::parse(sa.at("summary.json"));
  CHECK(summary.at("seeds").at("protocol") == 11);
  CHECK_FALSE(summary.contains("timings"));
  CHECK(summary.at("config").at("protocol").at("estimator").at("num_random_unitaries") == 40);

  c.estimator.seed = 12;
  const std::string d = scratch("det_seed");
  write_outputs(run_experiment(c), d);
  CHECK(snapshot(d).at("moments.csv") != sa.at("moments.csv"));
}

TEST_CASE("timings only when requested") {
  ExperimentConfig c = parse_config(kData + "/ring4_oracle.json");
  c.record_timings = true;
  const std::string dir = scratch("timings");
  write_outputs(run_experiment(c), dir);
  const auto s = nlohmann::json::parse(read_file(dir + "/summary.json"));
  CHECK(s.at("timings").contains("moments"));
}

TEST_CASE("moment table compares with the exact reference") {
  const ExperimentConfig c = parse_config(kData + "/ring4_vc.json");
  const RunResult r = run_experiment(c);
  REQUIRE(r.moments.exact.has_value());
  CHECK(r.moments.estimate(0) == 1.0);
  for (int n = 1; n <= c.N; ++n) {
    CHECK(r.moments.stderr_(n) > 0.0);
    CHECK(r.moments.samples[static_cast<std::size_t>(n)].size() == 40);
  }
  const CsvTable t = parse_csv(moments_csv(r.moments));
  const auto diff = t.column("abs_diff");
  for (std::size_t n = 0; n < diff.size(); ++n) {
    CHECK(diff[n] == std::abs(r.moments.estimate(static_cast<Eigen::Index>(n)) - (*r.moments.exact)(static_cast<Eigen::Index>(n))));
  }
}

TEST_CASE("excluded temperatures are listed in the summary") {
  ExperimentConfig c = parse_config(kData + "/ring4_vc.json");
  c.estimator.num_random_unitaries = 3;
  c.estimator.shots_per_unitary = 4;
  c.N = 8;
  c.temperature.min = 0.02;
  c.temperature.count = 30;
  bool found = false;
  for (std::uint64_t seed = 0; seed < 20 && !found; ++seed) {
    c.estimator.seed = seed;
    const RunResult r = run_experiment(c);
    if (r.thermo.excluded.empty()) continue;
    found = true;
    const std::string dir = scratch("excluded");
    write_outputs(r, dir);
    const auto s = nlohmann::json::parse(read_file(dir + "/summary.json"));
    CHECK(s.at("excluded_T").get<std::vector<double>>() == r.thermo.excluded);
    CHECK(r.thermo.T.size() + r.thermo.excluded.size() == 30);
    CHECK(read_csv(dir + "/thermo.csv").rows.size() == r.thermo.T.size());
  }
  CHECK(found);
}

TEST_CASE("mitigated runs write an audit log that replays") {
  const ExperimentConfig c = parse_config(kData + "/ring2_lzne.json");
  const RunResult r = run_experiment(c);
  const std::string dir = scratch("lzne");
  const auto files = write_outputs(r, dir);
  CHECK(std::find(files.begin(), files.end(), "audit.jsonl") != files.end());
  const auto s = nlohmann::json::parse(read_file(dir + "/summary.json"));
  CHECK(s.at("audit") == "audit.jsonl");
  std::map<int, std::vector<AuditRecord>> by_order;
  for (auto& rec : audit_from_jsonl(read_file(dir + "/audit.jsonl"))) by_order[rec.n].push_back(rec);
  REQUIRE(by_order.size() == 3);
  for (auto& [n, recs] : by_order) {
    const MitigatedEstimate e = summarize_audit(n, recs, true, 2.0);
    CHECK(e.mitigated_mean == r.moments.estimate(n));
  }
}

TEST_CASE("observable runs") {
  ExperimentConfig c = parse_config(kData + "/ring4_oracle.json");
  c.observable = PauliTerm{1.0, {{0, Axis::X}}};
  const RunResult r = run_experiment(c);
  REQUIRE(r.observable_thermal.size() == r.thermo.T.size());
  REQUIRE(r.observable_exact.size() == r.thermo.T.size());
  // N = 8 reproduces the high-temperature end well.
  CHECK(r.observable_thermal.back() == doctest::Approx(r.observable_exact.back()).epsilon(0.05));
}

TEST_CASE("output directory precedence") {
  ExperimentConfig c = parse_config(kData + "/ring4_oracle.json");
  ::unsetenv("QKFE_OUT_DIR");
  CHECK(resolve_output_dir(std::nullopt, c) == "qkfe_out");
  ::setenv("QKFE_OUT_DIR", "/tmp/from_env", 1);
  CHECK(resolve_output_dir(std::nullopt, c) == "/tmp/from_env");
  c.output_dir = "from_config";
  c.output_dir_set = true;
  CHECK(resolve_output_dir(std::nullopt, c) == "from_config");
  CHECK(resolve_output_dir(std::string("from_flag"), c) == "from_flag");
  ::unsetenv("QKFE_OUT_DIR");
}

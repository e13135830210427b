#include "qkfe/config.hpp"

#include "qkfe/csv.hpp"
#include "qkfe/error.hpp"

#include <json.hpp>

#include <cmath>
#include <set>
#include <sstream>

namespace qkfe {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(ErrorCode::ValidationError, where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) fail(ErrorCode::ValidationError, where + "." + key + ": unknown key");
  }
}

template <typename T>
T get(const json& obj, const std::string& key, const std::string& where, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::ValidationError, where + "." + key + ": wrong type");
  }
}

template <typename T>
T require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) fail(ErrorCode::MissingField, where + "." + key + ": required");
  return get<T>(obj, key, where, T{});
}

template <typename E, typename Fn>
E parse_enum(const json& obj, const std::string& key, const std::string& where, E fallback, Fn from_string) {
  if (!obj.contains(key)) return fallback;
  const auto s = get<std::string>(obj, key, where, "");
  try {
    return from_string(s);
  } catch (const Error& e) {
    fail(ErrorCode::ValidationError, where + "." + key + ": " + e.what());
  }
}

PauliTerm parse_pauli(const std::string& text) {
  PauliTerm t{1.0, {}};
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    if (tok == "I") continue;
    if (tok.size() < 2) fail(ErrorCode::ValidationError, "protocol.observable: bad token '" + tok + "'");
    t.sites.push_back({std::stoi(tok.substr(1)), axis_from_char(tok[0])});
  }
  return t;
}

RunProtocol run_protocol_from_string(const std::string& s) {
  if (s == "virtual_copy") return RunProtocol::VirtualCopy;
  if (s == "reference_state") return RunProtocol::ReferenceState;
  if (s == "exact_only") return RunProtocol::ExactOnly;
  fail(ErrorCode::ValidationError, "unknown protocol '" + s + "'");
}

std::pair<int, int> line_col(const std::string& text, std::size_t offset) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

std::string to_string(RunProtocol p) {
  switch (p) {
    case RunProtocol::VirtualCopy: return "virtual_copy";
    case RunProtocol::ReferenceState: return "reference_state";
    case RunProtocol::ExactOnly: return "exact_only";
  }
  return "?";
}

std::vector<double> TemperatureGrid::values() const {
  std::vector<double> T;
  if (count == 1) return {min};
  for (int i = 0; i < count; ++i) {
    const double u = static_cast<double>(i) / (count - 1);
    T.push_back(spacing == Spacing::Log ? min * std::pow(max / min, u) : min + (max - min) * u);
  }
  T.back() = max;
  return T;
}

HamiltonianSpec ExperimentConfig::hamiltonian() const { return build_hamiltonian(lattice, model, g, J); }

EvolutionKind ExperimentConfig::evolution_kind() const {
  if (evolution) return *evolution;
  return model == ModelKind::TFIM ? EvolutionKind::Trotter : EvolutionKind::Analogue;
}

SeriesForm ExperimentConfig::series_form() const {
  if (form) return *form;
  switch (protocol) {
    case RunProtocol::VirtualCopy: return SeriesForm::VirtualCopy;
    case RunProtocol::ReferenceState: return SeriesForm::ReferenceState;
    case RunProtocol::ExactOnly: return SeriesForm::Generic;
  }
  return SeriesForm::Generic;
}

EvolutionSpec ExperimentConfig::evolution_for(int n, bool observable_moment) const {
  EvolutionSpec e;
  e.kind = evolution_kind();
  e.M = M ? *M : (observable_moment ? std::max(n, 1) : 1);
  return e;
}

void validate_config(const ExperimentConfig& c) {
  try {
    c.lattice.validate();
  } catch (const Error& e) {
    fail(ErrorCode::ValidationError, std::string("model.lattice: ") + e.what());
  }
  if (c.model == ModelKind::TFIM && !c.g) fail(ErrorCode::ValidationError, "model.g: required for the TFIM");
  if (c.N < 1) fail(ErrorCode::ValidationError, "qkfe.N: must be at least 1");
  if (c.M && *c.M < 1) fail(ErrorCode::ValidationError, "qkfe.M: must be positive");
  const int L = c.lattice.num_sites();
  if (c.window == WindowMethod::Oracle && L > kDenseLimit) {
    fail(ErrorCode::ValidationError, "qkfe.window: oracle window needs L <= 14");
  }
  try {
    c.estimator.validate(L);
    c.noise.validate();
    c.mitigation.validate();
  } catch (const Error& e) {
    fail(ErrorCode::ValidationError, e.what());
  }
  const auto& T = c.temperature;
  if (!(T.min > 0.0) || !(T.max > T.min) || T.count < 2) {
    fail(ErrorCode::ValidationError, "temperature: need 0 < min < max and count >= 2");
  }
  if (c.bootstrap_replicates < 2) fail(ErrorCode::ValidationError, "error_bands.replicates: must be at least 2");
  if (c.observable) {
    try {
      validate_term(*c.observable, L);
    } catch (const Error& e) {
      fail(ErrorCode::ValidationError, std::string("protocol.observable: ") + e.what());
    }
  }
  if (c.model == ModelKind::XY && c.evolution_kind() == EvolutionKind::Trotter) {
    fail(ErrorCode::ValidationError, "protocol.evolution: Trotter compilation covers the TFIM only");
  }

  const HamiltonianSpec h = c.hamiltonian();
  if (c.protocol == RunProtocol::ReferenceState) {
    if (L > kDenseLimit) fail(ErrorCode::ValidationError, "protocol.kind: reference_state symmetry check needs L <= 14");
    const SymmetryReport rep = symmetry_check(h);
    if (!rep.has_u1) fail(ErrorCode::ValidationError, "protocol.kind: reference_state needs U(1) symmetry, which this model lacks");
    if (!rep.has_spinflip) fail(ErrorCode::ValidationError, "protocol.kind: reference_state needs global spin-flip symmetry");
  }
  if (c.protocol == RunProtocol::VirtualCopy) {
    try {
      vc_check_valid(h, c.evolution_for(1, false));
    } catch (const Error& e) {
      fail(ErrorCode::ValidationError, std::string("protocol.kind: ") + e.what());
    }
  }
  if (c.mitigation.method != MitigationMethod::None) {
    if (c.protocol == RunProtocol::ExactOnly) fail(ErrorCode::ValidationError, "mitigation.method: exact_only runs have nothing to mitigate");
    const bool analogue = c.evolution_kind() == EvolutionKind::Analogue;
    if (c.mitigation.method == MitigationMethod::Lzne) {
      if (analogue && c.mitigation.amplification != AmplifyKind::AnalogueFold && c.protocol == RunProtocol::VirtualCopy &&
          c.estimator.sampling_depth == 0) {
        fail(ErrorCode::ValidationError, "mitigation.amplification: analogue circuits amplify by folding");
      }
      if (!analogue && c.mitigation.amplification == AmplifyKind::AnalogueFold) {
        fail(ErrorCode::ValidationError, "mitigation.lzne_pair: digital circuits reach odd repetition or subset factors only");
      }
    }
    if (analogue && !c.lattice.two_coloring()) {
      fail(ErrorCode::ValidationError, "mitigation.method: analogue error estimation needs a bipartite lattice");
    }
  }
}

ExperimentConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string detail = e.what();
    if (const auto at = detail.find(", column "); at != std::string::npos) {
      if (const auto colon = detail.find(": ", at); colon != std::string::npos) detail = detail.substr(colon + 2);
    }
    fail(ErrorCode::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + detail);
  }
  check_keys(root, "config", {"model", "qkfe", "protocol", "noise", "mitigation", "temperature", "error_bands", "output"});
  ExperimentConfig c;

  if (!root.contains("model")) fail(ErrorCode::ValidationError, "model: required section");
  const json& m = root["model"];
  check_keys(m, "model", {"kind", "lattice", "g", "J"});
  c.model = parse_enum(m, "kind", "model", ModelKind::TFIM, model_kind_from_string);
  if (!m.contains("lattice")) fail(ErrorCode::ValidationError, "model.lattice: required");
  const json& lat = m["lattice"];
  check_keys(lat, "model.lattice", {"kind", "length", "rows", "cols"});
  c.lattice.kind = parse_enum(lat, "kind", "model.lattice", LatticeKind::Ring1D, lattice_kind_from_string);
  if (c.lattice.kind == LatticeKind::Ring1D) {
    if (lat.contains("rows") || lat.contains("cols")) fail(ErrorCode::ValidationError, "model.lattice: ring1d takes length only");
    c.lattice.length = get<int>(lat, "length", "model.lattice", 0);
  } else {
    if (lat.contains("length")) fail(ErrorCode::ValidationError, "model.lattice: grid2d takes rows and cols");
    c.lattice.rows = get<int>(lat, "rows", "model.lattice", 0);
    c.lattice.cols = get<int>(lat, "cols", "model.lattice", 0);
  }
  if (m.contains("g")) c.g = get<double>(m, "g", "model", 0.0);
  if (c.model == ModelKind::XY && c.g) fail(ErrorCode::ValidationError, "model.g: the XY model has no transverse field");
  c.J = get<double>(m, "J", "model", 1.0);

  if (root.contains("qkfe")) {
    const json& q = root["qkfe"];
    check_keys(q, "qkfe", {"N", "M", "window", "form"});
    c.N = get<int>(q, "N", "qkfe", 4);
    if (q.contains("M") && !(q["M"].is_string() && q["M"] == "auto")) c.M = get<int>(q, "M", "qkfe", 1);
    c.window = parse_enum(q, "window", "qkfe", WindowMethod::Oracle, window_method_from_string);
    if (q.contains("form") && q["form"] != "auto") {
      c.form = parse_enum(q, "form", "qkfe", SeriesForm::Generic, series_form_from_string);
    }
  }

  if (root.contains("protocol")) {
    const json& p = root["protocol"];
    check_keys(p, "protocol", {"kind", "evolution", "observable", "seed", "estimator"});
    c.protocol = parse_enum(p, "kind", "protocol", RunProtocol::VirtualCopy, run_protocol_from_string);
    if (p.contains("evolution") && p["evolution"] != "auto") {
      c.evolution = parse_enum(p, "evolution", "protocol", EvolutionKind::Trotter, evolution_kind_from_string);
    }
    if (p.contains("observable")) c.observable = parse_pauli(get<std::string>(p, "observable", "protocol", ""));
    c.estimator.seed = get<std::uint64_t>(p, "seed", "protocol", 0);
    if (p.contains("estimator")) {
      const json& e = p["estimator"];
      check_keys(e, "protocol.estimator", {"mode", "num_random_unitaries", "shots_per_unitary", "sampling_depth"});
      c.estimator.mode = parse_enum(e, "mode", "protocol.estimator", EstimatorMode::Sampled, estimator_mode_from_string);
      c.estimator.num_random_unitaries = get<int>(e, "num_random_unitaries", "protocol.estimator", c.estimator.num_random_unitaries);
      c.estimator.shots_per_unitary = get<int>(e, "shots_per_unitary", "protocol.estimator", c.estimator.shots_per_unitary);
      c.estimator.sampling_depth = get<int>(e, "sampling_depth", "protocol.estimator", 0);
    }
  }

  if (root.contains("noise")) {
    const json& n = root["noise"];
    check_keys(n, "noise", {"p1", "p2", "p_t", "p_global", "noisy_rz"});
    c.noise.p1 = get<double>(n, "p1", "noise", 0.0);
    c.noise.p2 = get<double>(n, "p2", "noise", 0.0);
    c.noise.p_t = get<double>(n, "p_t", "noise", 0.0);
    c.noise.p_global = get<double>(n, "p_global", "noise", 0.0);
    c.noise.noisy_rz = get<bool>(n, "noisy_rz", "noise", false);
  }

  if (root.contains("mitigation")) {
    const json& mi = root["mitigation"];
    check_keys(mi, "mitigation", {"method", "lzne_pair", "amplification", "subset_tripled", "subset_selections",
                                  "fold_variants", "mad", "mad_threshold"});
    auto& plan = c.mitigation;
    plan.method = parse_enum(mi, "method", "mitigation", MitigationMethod::None, mitigation_method_from_string);
    if (mi.contains("lzne_pair")) {
      const auto pair = get<std::vector<double>>(mi, "lzne_pair", "mitigation", {});
      if (pair.size() != 2) fail(ErrorCode::ValidationError, "mitigation.lzne_pair: needs two values");
      plan.r1 = pair[0];
      plan.r2 = pair[1];
    }
    plan.amplification = parse_enum(mi, "amplification", "mitigation", AmplifyKind::RepeatCz, amplify_kind_from_string);
    if (plan.amplification == AmplifyKind::AnalogueFold && !mi.contains("lzne_pair")) plan.r2 = 2.0;
    plan.subset_tripled = get<int>(mi, "subset_tripled", "mitigation", plan.subset_tripled);
    plan.subset_selections = get<int>(mi, "subset_selections", "mitigation", plan.subset_selections);
    plan.fold_variants = get<int>(mi, "fold_variants", "mitigation", plan.fold_variants);
    plan.mad_enabled = get<bool>(mi, "mad", "mitigation", false);
    plan.mad_threshold = get<double>(mi, "mad_threshold", "mitigation", 2.0);
  }

  if (root.contains("temperature")) {
    const json& t = root["temperature"];
    check_keys(t, "temperature", {"min", "max", "count", "spacing"});
    c.temperature.min = get<double>(t, "min", "temperature", 0.1);
    c.temperature.max = get<double>(t, "max", "temperature", 10.0);
    c.temperature.count = get<int>(t, "count", "temperature", 64);
    const auto sp = get<std::string>(t, "spacing", "temperature", "log");
    if (sp == "log") {
      c.temperature.spacing = Spacing::Log;
    } else if (sp == "linear") {
      c.temperature.spacing = Spacing::Linear;
    } else {
      fail(ErrorCode::ValidationError, "temperature.spacing: expected linear or log");
    }
  }

  if (root.contains("error_bands")) {
    const json& b = root["error_bands"];
    check_keys(b, "error_bands", {"method", "replicates"});
    c.bands = parse_enum(b, "method", "error_bands", BandMethod::Bootstrap, band_method_from_string);
    c.bootstrap_replicates = get<int>(b, "replicates", "error_bands", 200);
  }

  if (root.contains("output")) {
    const json& o = root["output"];
    check_keys(o, "output", {"directory", "format", "record_timings"});
    if (o.contains("directory")) {
      c.output_dir = get<std::string>(o, "directory", "output", "");
      c.output_dir_set = true;
    }
    const auto f = get<std::string>(o, "format", "output", "both");
    if (f == "csv") {
      c.format = OutputFormat::Csv;
    } else if (f == "json") {
      c.format = OutputFormat::Json;
    } else if (f == "both") {
      c.format = OutputFormat::Both;
    } else {
      fail(ErrorCode::ValidationError, "output.format: expected csv, json or both");
    }
    c.record_timings = get<bool>(o, "record_timings", "output", false);
  }

  validate_config(c);
  return c;
}

ExperimentConfig parse_config(const std::string& path) { return parse_config_text(read_file(path)); }

std::string config_echo(const ExperimentConfig& c) {
  ojson j;
  ojson lat;
  lat["kind"] = to_string(c.lattice.kind);
  if (c.lattice.kind == LatticeKind::Ring1D) {
    lat["length"] = c.lattice.length;
  } else {
    lat["rows"] = c.lattice.rows;
    lat["cols"] = c.lattice.cols;
  }
  j["model"]["kind"] = to_string(c.model);
  j["model"]["lattice"] = lat;
  if (c.g) j["model"]["g"] = *c.g;
  j["model"]["J"] = c.J;
  j["qkfe"]["N"] = c.N;
  if (c.M) {
    j["qkfe"]["M"] = *c.M;
  } else {
    j["qkfe"]["M"] = "auto";
  }
  j["qkfe"]["window"] = to_string(c.window);
  j["qkfe"]["form"] = to_string(c.series_form());
  j["protocol"]["kind"] = to_string(c.protocol);
  j["protocol"]["evolution"] = to_string(c.evolution_kind());
  if (c.observable) j["protocol"]["observable"] = to_string(*c.observable);
  j["protocol"]["seed"] = c.estimator.seed;
  j["protocol"]["estimator"]["mode"] = to_string(c.estimator.mode);
  j["protocol"]["estimator"]["num_random_unitaries"] = c.estimator.num_random_unitaries;
  j["protocol"]["estimator"]["shots_per_unitary"] = c.estimator.shots_per_unitary;
  j["protocol"]["estimator"]["sampling_depth"] = c.estimator.sampling_depth;
  j["noise"]["p1"] = c.noise.p1;
  j["noise"]["p2"] = c.noise.p2;
  j["noise"]["p_t"] = c.noise.p_t;
  j["noise"]["p_global"] = c.noise.p_global;
  j["noise"]["noisy_rz"] = c.noise.noisy_rz;
  const auto& p = c.mitigation;
  j["mitigation"]["method"] = to_string(p.method);
  j["mitigation"]["lzne_pair"] = {p.r1, p.r2};
  j["mitigation"]["amplification"] = to_string(p.amplification);
  j["mitigation"]["subset_tripled"] = p.subset_tripled;
  j["mitigation"]["subset_selections"] = p.subset_selections;
  j["mitigation"]["fold_variants"] = p.fold_variants;
  j["mitigation"]["mad"] = p.mad_enabled;
  j["mitigation"]["mad_threshold"] = p.mad_threshold;
  j["temperature"]["min"] = c.temperature.min;
  j["temperature"]["max"] = c.temperature.max;
  j["temperature"]["count"] = c.temperature.count;
  j["temperature"]["spacing"] = c.temperature.spacing == Spacing::Log ? "log" : "linear";
  j["error_bands"]["method"] = to_string(c.bands);
  j["error_bands"]["replicates"] = c.bootstrap_replicates;
  j["output"]["directory"] = c.output_dir;
  j["output"]["format"] = c.format == OutputFormat::Csv ? "csv" : c.format == OutputFormat::Json ? "json" : "both";
  j["output"]["record_timings"] = c.record_timings;
  return j.dump(2);
}

}  // namespace qkfe

#include "qkfe/config.hpp"
#include "qkfe/error.hpp"

#include <doctest.h>

#include <cmath>
#include <string>

using namespace qkfe;

namespace {

const std::string kMinimal = R"({"model": {"kind": "tfim", "lattice": {"kind": "ring1d", "length": 4}, "g": 1.0}})";

ErrorCode code_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("config was accepted: " << text);
  return ErrorCode::IoError;
}

std::string message_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

std::string with(const std::string& extra) {
  return R"({"model": {"kind": "tfim", "lattice": {"kind": "ring1d", "length": 4}, "g": 1.0}, )" + extra + "}";
}

}  // namespace

TEST_CASE("defaults") {
  const ExperimentConfig c = parse_config_text(kMinimal);
  CHECK(c.N == 4);
  CHECK(c.estimator.seed == 0);
  CHECK(c.J == 1.0);
  CHECK_FALSE(c.M.has_value());
  CHECK(c.protocol == RunProtocol::VirtualCopy);
  CHECK(c.series_form() == SeriesForm::VirtualCopy);
  CHECK(c.evolution_kind() == EvolutionKind::Trotter);
  CHECK(c.evolution_for(3, false).M == 1);
  CHECK(c.evolution_for(3, true).M == 3);
  CHECK_FALSE(c.record_timings);
  const auto T = c.temperature.values();
  REQUIRE(T.size() == 64);
  CHECK(T.front() == 0.1);
  CHECK(T.back() == 10.0);
  CHECK(T[32] / T[31] == doctest::Approx(T[1] / T[0]));
}

TEST_CASE("XY defaults to analogue evolution and the reference-state form") {
  const ExperimentConfig c = parse_config_text(
      R"({"model": {"kind": "xy", "lattice": {"kind": "grid2d", "rows": 2, "cols": 2}}, "protocol": {"kind": "reference_state"}})");
  CHECK(c.evolution_kind() == EvolutionKind::Analogue);
  CHECK(c.series_form() == SeriesForm::ReferenceState);
  CHECK(c.lattice.num_sites() == 4);
}

TEST_CASE("syntax errors carry line and column") {
  const std::string text = "{\n  \"model\": {\"kind\": \"tfim\",\n    \"g\" 1.0}\n}";
  CHECK(code_of(text) == ErrorCode::ParseError);
  CHECK(message_of(text).find("line 3, column 11: syntax error") != std::string::npos);
}

TEST_CASE("unknown keys are rejected with their path") {
  CHECK(code_of(with(R"("qkfe": {"N": 4, "cutoff": 8})")) == ErrorCode::ValidationError);
  CHECK(message_of(with(R"("qkfe": {"N": 4, "cutoff": 8})")).find("qkfe.cutoff") != std::string::npos);
  CHECK(message_of(with(R"("extras": 1)")).find("config.extras") != std::string::npos);
}

TEST_CASE("field validation names the field") {
  CHECK(message_of(with(R"("qkfe": {"N": 0})")).find("qkfe.N") != std::string::npos);
  CHECK(message_of(with(R"("temperature": {"min": 2.0, "max": 1.0})")).find("temperature") != std::string::npos);
  CHECK(message_of(with(R"("qkfe": {"N": "four"})")).find("qkfe.N") != std::string::npos);
  CHECK(code_of(R"({"model": {"kind": "tfim", "lattice": {"kind": "ring1d", "length": 4}}})") == ErrorCode::ValidationError);
  CHECK(code_of(R"({"model": {"kind": "xy", "lattice": {"kind": "ring1d", "length": 4}, "g": 1}})") == ErrorCode::ValidationError);
  CHECK(code_of(with(R"("protocol": {"observable": "Q0"})")) == ErrorCode::ValidationError);
  CHECK(code_of(with(R"("protocol": {"observable": "Z7"})")) == ErrorCode::ValidationError);
}

TEST_CASE("cross-field checks") {
  CHECK(message_of(with(R"("protocol": {"kind": "reference_state"})")).find("U(1)") != std::string::npos);
  CHECK(message_of(with(R"("mitigation": {"method": "lzne", "lzne_pair": [1, 2]})")).find("odd") != std::string::npos);
  CHECK_NOTHROW(parse_config_text(with(R"("mitigation": {"method": "lzne", "lzne_pair": [1, 3]})")));
  CHECK(code_of(with(R"("mitigation": {"method": "lzne", "amplification": "analogue_fold"})")) == ErrorCode::ValidationError);
  CHECK(code_of(R"({"model": {"kind": "tfim", "lattice": {"kind": "ring1d", "length": 5}, "g": 1.0}})") ==
        ErrorCode::ValidationError);
  CHECK_NOTHROW(parse_config_text(
      R"({"model": {"kind": "tfim", "lattice": {"kind": "ring1d", "length": 5}, "g": 1.0}, "protocol": {"kind": "exact_only"}})"));
  CHECK(code_of(R"({"model": {"kind": "tfim", "lattice": {"kind": "grid2d", "rows": 2, "cols": 3}, "g": 1.0},
                    "protocol": {"estimator": {"mode": "exhaustive"}}})") == ErrorCode::ValidationError);
  CHECK(code_of(R"({"model": {"kind": "xy", "lattice": {"kind": "ring1d", "length": 4}}, "protocol": {"evolution": "trotter"}})") ==
        ErrorCode::ValidationError);
}

TEST_CASE("echo is a fixed point of parsing") {
  const ExperimentConfig c = parse_config_text(
      with(R"("qkfe": {"N": 6, "M": 2}, "protocol": {"seed": 9, "observable": "Z0 Z1"}, "noise": {"p2": 0.01},
              "mitigation": {"method": "gem", "mad": true}, "output": {"format": "json"})"));
  const std::string echo = config_echo(c);
  CHECK(config_echo(parse_config_text(echo)) == echo);
  CHECK(echo.find("\"observable\": \"Z0 Z1\"") != std::string::npos);
}

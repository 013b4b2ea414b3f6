#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "paraprod/grid.hpp"
#include "paraprod/sweep.hpp"
#include "paraprod/windows.hpp"

namespace pp {

// Everything a command needs; serializes to the effective config written next to results.
struct RunConfig {
  std::string command;  // eval | telescope | tiles | sweep
  ParamSet params;
  Grid grid{10};
  std::uint64_t seed = 1;
  int trials = 40;
  Exponents exponents;
  std::vector<Axis> axes;
  OperatorKind op = OperatorKind::type1;
  InputModel input = InputModel::random_bandlimited;
  int Gamma = 16;
  int gamma = 0;
  int ell = 1;
  int tile_seeds = 24;
  std::string format = "json";  // json | csv
  int jobs = 1;
  int verbosity = 0;
  std::optional<nlohmann::json> f1, f2;  // explicit eval inputs

  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct RunResult {
  int exit_code = 0;  // 0 ok, 3 invariant violation
  std::string message;
  std::map<std::string, std::string> artifacts;  // file name -> contents
  std::string results_name;                        // the artifact carrying the results
};

// Throws pp::Error for configuration problems.
RunResult run_command(const RunConfig& cfg);
void write_artifacts(const std::string& dir, const RunResult& r);

}  // namespace pp

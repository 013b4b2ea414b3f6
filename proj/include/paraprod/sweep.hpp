#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "paraprod/grid.hpp"
#include "paraprod/windows.hpp"

namespace pp {

enum class OperatorKind { type1, type2 };
enum class InputModel { X_of_random_sets, random_bandlimited, zero };

OperatorKind operator_from_string(const std::string& s);
InputModel input_model_from_string(const std::string& s);
std::string to_string(OperatorKind k);
std::string to_string(InputModel m);

struct Exponents {
  double p1 = 4.0, p2 = 4.0, r = 2.0;
  void validate() const;  // p1, p2 > 1 and 1/p1 + 1/p2 = 1/r to 1e-12
};

// one axis: parameter name in {M1, M2, n1, n2, m, L1, L2} and its values
using Axis = std::pair<std::string, std::vector<long>>;

struct ExperimentPlan {
  ParamSet base;
  Grid grid{12};
  std::vector<Axis> axes;  // the sweep visits the cartesian product
  Exponents exponents;
  int trials = 40;
  std::uint64_t seed = 1;
  OperatorKind op = OperatorKind::type1;
  InputModel input = InputModel::random_bandlimited;
  int jobs = 1;

  nlohmann::json to_json() const;
};

struct RatioEstimate {
  double max_ratio = 0.0;
  double median_ratio = 0.0;
  int used = 0;  // non-degenerate trials
};

// Inputs of trial t depend only on (seed, t), so every axis point sees the same draws.
std::pair<Signal, Signal> trial_inputs(const Grid& g, InputModel model, std::uint64_t seed, int trial);

// ||Pi(f1,f2)||_r / (||f1||_p1 ||f2||_p2) over seeded trials. Throws AllTrialsDegenerate.
RatioEstimate ratio_estimate(const ParamSet& ps, const Grid& g, const Exponents& ex, int trials, std::uint64_t seed,
                             OperatorKind op, InputModel model);
// same with explicit inputs (for closed-form checks)
double ratio_of(const ParamSet& ps, const Signal& f1, const Signal& f2, const Exponents& ex, OperatorKind op);

struct SweepRow {
  std::map<std::string, long> point;
  std::string status = "ok";  // ok, empty_range, all_trials_degenerate
  RatioEstimate est;
  double norm_n = 0.0;  // max_ratio / ((1+|n1|)^10 (1+|n2|)^10)
  double norm_m = 0.0;  // max_ratio / 2^{epsilon m}
  bool cond_2large1 = false;
  std::string fingerprint;  // hash of the symbol profile at the first admissible scale
  int log_size = 0;
  JRange js;
};

struct SweepReport {
  ExperimentPlan plan;
  std::vector<SweepRow> rows;
  nlohmann::json to_json() const;
  std::string to_csv() const;
  // axis,ratio columns for external plotting (first axis)
  std::string plot_csv() const;
};

SweepReport uniformity_sweep(const ExperimentPlan& plan);

// parse "name=v1,v2,..." (also accepts a..b ranges)
Axis parse_axis(const std::string& text);

}  // namespace pp

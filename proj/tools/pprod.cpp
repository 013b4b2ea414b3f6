// pprod: command-line driver over the C interface.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "paraprod/paraprod.h"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitInvariant = 3;

struct Options {
  int log_size = 10;
  double period = 1.0;
  int L1 = 1, L2 = 1, M1 = 0, M2 = 0, n1 = 0, n2 = 0, m = 0;
  double p = 1.5, p1 = 4.0, p2 = 4.0, r = 2.0, epsilon = 0.25;
  int L_big = 8;
  int Gamma = 16, gamma = 0, ell = 1, tile_seeds = 24;
  std::uint64_t seed = 1;
  int trials = 40;
  std::vector<std::string> axes;
  std::string op = "type1", input = "random_bandlimited";
  std::string out, format = "json";
  std::string f1_path, f2_path;
  int jobs = 0;
  int verbosity = 0;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--log-size", o.log_size, "grid size exponent K (N = 2^K)");
  sub->add_option("--period", o.period, "period of the circle");
  sub->add_option("--L1", o.L1);
  sub->add_option("--L2", o.L2);
  sub->add_option("--M1", o.M1);
  sub->add_option("--M2", o.M2);
  sub->add_option("--n1", o.n1);
  sub->add_option("--n2", o.n2);
  sub->add_option("--m", o.m);
  sub->add_option("--p", o.p, "exponent of the tile seminorms");
  sub->add_option("--p1", o.p1);
  sub->add_option("--p2", o.p2);
  sub->add_option("--r", o.r);
  sub->add_option("--epsilon", o.epsilon);
  sub->add_option("--L-big", o.L_big);
  sub->add_option("--seed", o.seed);
  sub->add_option("--format", o.format)->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--out", o.out, "output directory, or - for stdout")->required();
  sub->add_option("--jobs", o.jobs, "worker threads (default: available parallelism)");
  sub->add_flag("-v,--verbose", o.verbosity);
}

std::string read_file(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CLI::ValidationError("cannot read " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

nlohmann::json build_config(const std::string& command, const Options& o) {
  nlohmann::json params{{"L1", o.L1}, {"L2", o.L2}, {"M1", o.M1},           {"M2", o.M2}, {"n1", o.n1},
                        {"n2", o.n2}, {"m", o.m},   {"epsilon", o.epsilon}, {"p", o.p},   {"L_big", o.L_big}};
  nlohmann::json c{{"command", command},
                   {"params", params},
                   {"log_size", o.log_size},
                   {"period", o.period},
                   {"seed", o.seed},
                   {"trials", o.trials},
                   {"p1", o.p1},
                   {"p2", o.p2},
                   {"r", o.r},
                   {"axes", o.axes},
                   {"operator", o.op},
                   {"input_model", o.input},
                   {"Gamma", o.Gamma},
                   {"gamma", o.gamma},
                   {"ell", o.ell},
                   {"tile_seeds", o.tile_seeds},
                   {"format", o.format},
                   {"verbosity", o.verbosity}};
  const unsigned hw = std::thread::hardware_concurrency();
  c["jobs"] = o.jobs > 0 ? o.jobs : static_cast<int>(hw ? hw : 1);
  if (!o.f1_path.empty()) c["f1"] = nlohmann::json::parse(read_file(o.f1_path));
  if (!o.f2_path.empty()) c["f2"] = nlohmann::json::parse(read_file(o.f2_path));
  return c;
}

int exit_for(pp_status s) {
  switch (s) {
    case PP_ADMISSIBILITY_VIOLATION:
    case PP_INVARIANT_VIOLATION:
    case PP_BRANCH_MISMATCH:
    case PP_INTERNAL:
      return kExitInvariant;
    default:
      return kExitUsage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"paraproduct experiments"};
  app.require_subcommand(1);
  Options o;

  auto* eval = app.add_subcommand("eval", "evaluate a paraproduct on given or generated inputs");
  add_common(eval, o);
  eval->add_option("--operator", o.op)->check(CLI::IsMember({"type1", "type2"}));
  eval->add_option("--input-model", o.input)->check(CLI::IsMember({"X_of_random_sets", "random_bandlimited", "zero"}));
  eval->add_option("--f1", o.f1_path, "first input as signal JSON (- for stdin)");
  eval->add_option("--f2", o.f2_path, "second input as signal JSON");

  auto* tele = app.add_subcommand("telescope", "decompose into admissible forms and check the identity");
  add_common(tele, o);

  auto* tiles = app.add_subcommand("tiles", "random convex tile set: organize, shadows, restricted form");
  add_common(tiles, o);
  tiles->add_option("--Gamma", o.Gamma, "scale residue modulus (default 16)");
  tiles->add_option("--gamma", o.gamma);
  tiles->add_option("--ell", o.ell)->check(CLI::Range(1, 3));
  tiles->add_option("--tile-seeds", o.tile_seeds);
  tiles->add_option("--input-model", o.input)->check(CLI::IsMember({"random_bandlimited", "zero"}));

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo norm ratios across parameter axes");
  add_common(sweep, o);
  sweep->add_option("--trials", o.trials);
  sweep->add_option("--axis", o.axes, "name=v1,v2,... (repeatable)")->required();
  sweep->add_option("--operator", o.op)->check(CLI::IsMember({"type1", "type2"}));
  sweep->add_option("--input-model", o.input)->check(CLI::IsMember({"X_of_random_sets", "random_bandlimited", "zero"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  nlohmann::json cfg;
  try {
    cfg = build_config(command, o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  const bool to_stdout = o.out == "-";
  int code = 0;
  char* results = nullptr;
  const std::string text = cfg.dump();
  const pp_status s = pp_run(text.c_str(), to_stdout ? nullptr : o.out.c_str(), &code, to_stdout ? &results : nullptr);
  if (s != PP_OK) {
    std::cerr << "error: " << pp_last_error() << "\n";
    return exit_for(s);
  }
  if (results) {
    std::fputs(results, stdout);
    pp_string_free(results);
  }
  if (code != 0) {
    std::cerr << "invariant violation: " << pp_last_error() << "\n";
    return kExitInvariant;
  }
  if (o.verbosity > 0 && !to_stdout) std::cerr << "wrote " << o.out << "\n";
  return 0;
}

#include "pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "paraprod/io.hpp"
#include "paraprod/paraproduct.hpp"
#include "paraprod/rng.hpp"
#include "paraprod/telescope.hpp"
#include "paraprod/tiles.hpp"

namespace pp {

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kIdentityTol = 1e-8;
constexpr double kVanishTol = 1e-12;

template <class T>
T get_or(const nlohmann::json& j, const char* key, T dflt) {
  if (!j.contains(key)) return dflt;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config field '") + key + "': " + e.what());
  }
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

Signal random_input(const Grid& g, std::uint64_t seed, int which) {
  const auto [a, b] = trial_inputs(g, InputModel::random_bandlimited, derive_seed(seed, 0x3u), which);
  return a;
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("config must be a JSON object");
  RunConfig c;
  c.command = get_or<std::string>(j, "command", "");
  if (c.command != "eval" && c.command != "telescope" && c.command != "tiles" && c.command != "sweep")
    throw InvalidArgument("unknown command: '" + c.command + "'");
  if (j.contains("params")) c.params = ParamSet::from_json(j.at("params"));
  c.grid = Grid(get_or<int>(j, "log_size", 10), get_or<double>(j, "period", 1.0));
  c.seed = get_or<std::uint64_t>(j, "seed", 1);
  c.trials = get_or<int>(j, "trials", 40);
  c.exponents.p1 = get_or<double>(j, "p1", 4.0);
  c.exponents.p2 = get_or<double>(j, "p2", 4.0);
  c.exponents.r = get_or<double>(j, "r", 2.0);
  if (j.contains("axes")) {
    for (const auto& a : j.at("axes")) {
      if (a.is_string()) {
        c.axes.push_back(parse_axis(a.get<std::string>()));
      } else {
        c.axes.push_back({get_or<std::string>(a, "name", ""), get_or<std::vector<long>>(a, "values", {})});
      }
    }
  }
  c.op = operator_from_string(get_or<std::string>(j, "operator", "type1"));
  c.input = input_model_from_string(get_or<std::string>(j, "input_model", "random_bandlimited"));
  c.Gamma = get_or<int>(j, "Gamma", 16);
  c.gamma = get_or<int>(j, "gamma", 0);
  c.ell = get_or<int>(j, "ell", 1);
  c.tile_seeds = get_or<int>(j, "tile_seeds", 24);
  c.format = get_or<std::string>(j, "format", "json");
  if (c.format != "json" && c.format != "csv") throw InvalidArgument("format must be json or csv");
  c.jobs = get_or<int>(j, "jobs", 1);
  c.verbosity = get_or<int>(j, "verbosity", 0);
  if (j.contains("f1")) c.f1 = j.at("f1");
  if (j.contains("f2")) c.f2 = j.at("f2");
  if (c.trials < 1) throw InvalidArgument("trials must be positive");
  if (c.ell < 1 || c.ell > 3) throw InvalidArgument("ell must be 1, 2 or 3");
  if (c.grid.log_size < 4 || c.grid.log_size > 26) throw InvalidArgument("log_size must lie in [4, 26]");
  if (!(c.grid.period > 0.0)) throw InvalidArgument("period must be positive");
  return c;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json ax = nlohmann::json::array();
  for (const auto& [name, vals] : axes) ax.push_back({{"name", name}, {"values", vals}});
  nlohmann::json j{{"command", command},
                   {"params", params.to_json()},
                   {"log_size", grid.log_size},
                   {"period", grid.period},
                   {"seed", seed},
                   {"trials", trials},
                   {"p1", exponents.p1},
                   {"p2", exponents.p2},
                   {"r", exponents.r},
                   {"axes", ax},
                   {"operator", to_string(op)},
                   {"input_model", to_string(input)},
                   {"Gamma", Gamma},
                   {"gamma", gamma},
                   {"ell", ell},
                   {"tile_seeds", tile_seeds},
                   {"format", format},
                   {"verbosity", verbosity}};
  // jobs is left out: results do not depend on it
  if (f1) j["f1"] = *f1;
  if (f2) j["f2"] = *f2;
  return j;
}

namespace {

RunResult cmd_eval(const RunConfig& c) {
  RunResult r;
  Signal f1, f2;
  if (c.f1 || c.f2) {
    if (!c.f1 || !c.f2) throw InvalidArgument("eval needs both f1 and f2 when inputs are given");
    f1 = signal_from_json(*c.f1);
    f2 = signal_from_json(*c.f2);
  } else {
    std::tie(f1, f2) = trial_inputs(c.grid, c.input, c.seed, 0);
  }
  c.exponents.validate();
  const Signal out =
      c.op == OperatorKind::type1 ? paraproduct_type1(f1, f2, c.params) : paraproduct_type2(f1, f2, c.params);
  const double n1 = lp_norm(f1, c.exponents.p1), n2 = lp_norm(f2, c.exponents.p2);
  const double no = lp_norm(out, c.exponents.r);
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!std::isfinite(out[i].real()) || !std::isfinite(out[i].imag())) {
      r.exit_code = 3;
      r.message = "non-finite output sample";
      break;
    }
  nlohmann::json res{{"operator", to_string(c.op)},
                     {"norm_f1_p1", n1},
                     {"norm_f2_p2", n2},
                     {"norm_out_r", no},
                     {"ratio", n1 * n2 > 0.0 ? nlohmann::json(no / (n1 * n2)) : nlohmann::json(nullptr)}};
  if (c.format == "csv") {
    r.artifacts["output.csv"] = signal_to_csv(out);
    r.artifacts["norms.json"] = dump(res);
    r.results_name = "output.csv";
  } else {
    res["output"] = signal_to_json(out);
    r.artifacts["results.json"] = dump(res);
    r.results_name = "results.json";
  }
  return r;
}

RunResult cmd_telescope(const RunConfig& c) {
  RunResult r;
  const Decomposition d = telescope_decompose(c.params, c.grid);
  nlohmann::json adm = nlohmann::json::array();
  int failures = 0;
  for (const auto& form : d.forms) {
    const AdmissibilityReport rep = check_admissible(form, kVanishTol, false);
    if (!rep.ok) ++failures;
    nlohmann::json e = rep.to_json();
    e["form"] = to_string(form.label);
    adm.push_back(e);
  }
  const Signal f1 = random_input(c.grid, c.seed, 1), f2 = random_input(c.grid, c.seed, 2),
               f3 = random_input(c.grid, c.seed, 3);
  const IdentityReport id = verify_identity(d, f1, f2, f3);
  const auto certs = dropped_term_certificates(c.params, c.grid);
  int certified = 0;
  double dropped_max = 0.0;
  for (const auto& k : certs) {
    if (!k.certified) continue;
    ++certified;
    const auto [v, s] = dropped_term_value(c.params, f1, f2, f3, k.j);
    if (s > 0.0) dropped_max = std::max(dropped_max, v / s);
  }
  const SupportFactReport sf = check_support_facts(d);
  nlohmann::json per = nlohmann::json::array();
  for (std::size_t i = 0; i < id.per_form.size(); ++i)
    per.push_back({{"form", to_string(d.forms[i].label)},
                   {"re", id.per_form[i].real()},
                   {"im", id.per_form[i].imag()}});
  nlohmann::json res{{"form_count", d.forms.size()},
                     {"nonempty_form_count", d.nonempty_count()},
                     {"J", {d.J.lo, d.J.hi}},
                     {"J_small", {d.J_small.lo, d.J_small.hi}},
                     {"J_tele", {d.J_tele.lo, d.J_tele.hi}},
                     {"lhs", {id.lhs.real(), id.lhs.imag()}},
                     {"rhs", {id.rhs.real(), id.rhs.imag()}},
                     {"residual", id.residual},
                     {"per_form", per},
                     {"admissibility", adm},
                     {"admissibility_failures", failures},
                     {"dropped_certified", certified},
                     {"dropped_max_relative", dropped_max},
                     {"support_facts_checked", sf.checked},
                     {"support_fact_violations", sf.violations}};
  if (id.residual > kIdentityTol || failures > 0 || sf.violations > 0) {
    r.exit_code = 3;
    r.message = "telescoping invariant failed";
  }
  if (c.format == "csv") {
    std::ostringstream os;
    os << "form,terms,re,im,admissible\n";
    for (std::size_t i = 0; i < d.forms.size(); ++i)
      os << to_string(d.forms[i].label) << ',' << d.forms[i].terms.size() << ',' << fmt_num(id.per_form[i].real())
         << ',' << fmt_num(id.per_form[i].imag()) << ',' << (adm[i]["ok"].get<bool>() ? 1 : 0) << '\n';
    r.artifacts["forms.csv"] = os.str();
    res.erase("per_form");
    res.erase("admissibility");
    r.artifacts["summary.json"] = dump(res);
    r.results_name = "forms.csv";
  } else {
    res["decomposition"] = d.to_json();
    r.artifacts["results.json"] = dump(res);
    r.results_name = "results.json";
  }
  return r;
}

RunResult cmd_tiles(const RunConfig& c) {
  RunResult r;
  const TileFrame frame = TileFrame::make(c.params, c.grid, Context::lambda_sec4, c.Gamma, c.gamma);
  const Signal f = c.input == InputModel::zero ? Signal::zeros(c.grid) : random_input(c.grid, c.seed, 1);
  const TileSet S = random_convex_tileset(frame, static_cast<std::size_t>(c.tile_seeds), derive_seed(c.seed, 0x711e));
  const auto [S1, S2] = partition_S1_S2(S);
  TileAnalysis A(frame, f, c.ell);
  nlohmann::json branches = nlohmann::json::array();
  bool ok = true;
  for (const auto* part : {&S1, &S2}) {
    const OrganizeResult o = organize(A, *part);
    // the maximal-function containment carries an unspecified constant; it is reported, not enforced
    ok = ok && o.halving_ok && o.tops_disjoint;
    branches.push_back({{"tiles", part->size()},
                        {"size_star_S", o.size_star_S},
                        {"size_star_S2", o.size_star_S2},
                        {"halving_ok", o.halving_ok},
                        {"tops_disjoint", o.tops_disjoint},
                        {"maximal_function_ok", o.maximal_function_ok},
                        {"maximal_function_ratio", o.maximal_function_ratio},
                        {"count_constant", o.count_constant},
                        {"iterations", o.iterations},
                        {"forest", forest_to_json(frame, o.S1)},
                        {"remainder", tileset_to_json(o.S2)}});
  }
  const Signal g2 = random_input(c.grid, c.seed, 2), g3 = random_input(c.grid, c.seed, 3);
  const LambdaSResult ls = lambda_S(f, g2, g3, S);
  double worst_C = 0.0;
  bool witnesses = true;
  for (const auto& T : maximal_trees(S).trees) {
    const ShadowReport sr = shadow_report(frame, T);
    worst_C = std::max(worst_C, sr.C);
    witnesses = witnesses && sr.witnesses_disjoint;
  }
  ok = ok && witnesses && is_convex(S);
  if (!ok) {
    r.exit_code = 3;
    r.message = "organize or shadow post-condition failed";
  }
  nlohmann::json res{{"tileset", tileset_to_json(S)},
                     {"convex", is_convex(S)},
                     {"branches", branches},
                     {"lambda_S", {ls.value.real(), ls.value.imag()}},
                     {"partition_defect", ls.partition_defect},
                     {"shadow_C_max", worst_C},
                     {"shadow_witnesses_disjoint", witnesses},
                     {"zeta_skipped", A.zeta_skipped()}};
  r.artifacts["tiles_plot.csv"] = tiles_plot_csv(S);
  r.artifacts["results.json"] = dump(res);
  r.results_name = "results.json";
  return r;
}

RunResult cmd_sweep(const RunConfig& c) {
  RunResult r;
  ExperimentPlan plan;
  plan.base = c.params;
  plan.grid = c.grid;
  plan.axes = c.axes;
  plan.exponents = c.exponents;
  plan.trials = c.trials;
  plan.seed = c.seed;
  plan.op = c.op;
  plan.input = c.input;
  plan.jobs = c.jobs;
  const SweepReport rep = uniformity_sweep(plan);
  if (c.format == "csv") {
    r.artifacts["sweep.csv"] = rep.to_csv();
    r.results_name = "sweep.csv";
  } else {
    r.artifacts["sweep.json"] = dump(rep.to_json());
    r.results_name = "sweep.json";
  }
  r.artifacts["plot.csv"] = rep.plot_csv();
  return r;
}

}  // namespace

RunResult run_command(const RunConfig& cfg) {
  cfg.params.validate();
  RunResult r;
  if (cfg.command == "eval") r = cmd_eval(cfg);
  else if (cfg.command == "telescope") r = cmd_telescope(cfg);
  else if (cfg.command == "tiles") r = cmd_tiles(cfg);
  else if (cfg.command == "sweep") r = cmd_sweep(cfg);
  else throw InvalidArgument("unknown command: '" + cfg.command + "'");
  r.artifacts["config.json"] = dump(cfg.to_json());
  nlohmann::json files = nlohmann::json::object();
  for (const auto& [name, body] : r.artifacts) files[name] = sha256_hex(body);
  const nlohmann::json manifest{
      {"tool", "pprod"},
      {"version", kVersion},
      {"modules",
       {{"grid", kVersion}, {"windows", kVersion}, {"paraproduct", kVersion}, {"telescope", kVersion},
        {"classic", kVersion}, {"tiles", kVersion}, {"sweep", kVersion}}},
      {"tolerances", {{"identity_residual", kIdentityTol}, {"vanish", kVanishTol}}},
      {"command", cfg.command},
      {"exit_code", r.exit_code},
      {"files", files}};
  r.artifacts["manifest.json"] = dump(manifest);
  return r;
}

void write_artifacts(const std::string& dir, const RunResult& r) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create output directory " + dir + ": " + ec.message());
  for (const auto& [name, body] : r.artifacts) {
    std::ofstream os(fs::path(dir) / name, std::ios::binary);
    os << body;
    if (!os) throw Error(ErrorCode::io_error, "cannot write " + name);
  }
}

}  // namespace pp

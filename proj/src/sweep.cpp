#include "paraprod/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <mutex>
#include <thread>

#include "paraprod/io.hpp"
#include "paraprod/paraproduct.hpp"
#include "paraprod/rng.hpp"

namespace pp {

OperatorKind operator_from_string(const std::string& s) {
  if (s == "type1") return OperatorKind::type1;
  if (s == "type2") return OperatorKind::type2;
  throw ParseError("unknown operator: " + s);
}

InputModel input_model_from_string(const std::string& s) {
  if (s == "X_of_random_sets") return InputModel::X_of_random_sets;
  if (s == "random_bandlimited") return InputModel::random_bandlimited;
  if (s == "zero") return InputModel::zero;
  throw ParseError("unknown input model: " + s);
}

std::string to_string(OperatorKind k) { return k == OperatorKind::type1 ? "type1" : "type2"; }

std::string to_string(InputModel m) {
  switch (m) {
    case InputModel::X_of_random_sets: return "X_of_random_sets";
    case InputModel::random_bandlimited: return "random_bandlimited";
    case InputModel::zero: return "zero";
  }
  return "?";
}

void Exponents::validate() const {
  if (!(p1 > 1.0) || !(p2 > 1.0)) throw InvalidArgument("p1 and p2 must exceed 1");
  if (!(r > 0.5)) throw InvalidArgument("r must exceed 1/2");
  if (std::abs(1.0 / p1 + 1.0 / p2 - 1.0 / r) > 1e-12) throw InvalidArgument("need 1/p1 + 1/p2 = 1/r");
}

nlohmann::json ExperimentPlan::to_json() const {
  nlohmann::json ax = nlohmann::json::array();
  for (const auto& [name, vals] : axes) ax.push_back({{"name", name}, {"values", vals}});
  return {{"base", base.to_json()},
          {"log_size", grid.log_size},
          {"period", grid.period},
          {"axes", ax},
          {"p1", exponents.p1},
          {"p2", exponents.p2},
          {"r", exponents.r},
          {"trials", trials},
          {"seed", seed},
          {"operator", to_string(op)},
          {"input_model", to_string(input)}};
}

namespace {

Signal bandlimited(const Grid& g, Rng& rng) {
  const std::size_t n = g.size();
  Spectrum S{g, CVec(n)};
  const long cut = static_cast<long>(n / 4);
  // unit expected L2 norm on a unit period
  const double amp = static_cast<double>(n) / std::sqrt(2.0 * static_cast<double>(2 * cut + 1) * g.period);
  for (std::size_t b = 0; b < n; ++b) {
    const double re = rng.normal(), im = rng.normal();
    if (std::abs(g.signed_index(b)) <= cut) S.coeffs[b] = amp * cplx(re, im);
  }
  return dft_inverse(S);
}

Signal set_input(const Grid& g, Rng& rng, std::uint64_t seed) {
  const double measure = g.period * rng.uniform(0.05, 0.5);
  const MeasurableSet F = random_set(g, measure, seed, SetShape::bernoulli);
  return sample_X_of(F, derive_seed(seed, 0xf1u), SampleMode::random_phase);
}

void set_param(ParamSet& ps, const std::string& name, long v) {
  const int iv = static_cast<int>(v);
  if (name == "M1") ps.M1 = iv;
  else if (name == "M2") ps.M2 = iv;
  else if (name == "n1") ps.n1 = iv;
  else if (name == "n2") ps.n2 = iv;
  else if (name == "m") ps.m = iv;
  else if (name == "L1") ps.L1 = iv;
  else if (name == "L2") ps.L2 = iv;
  else throw InvalidArgument("unknown axis: " + name);
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Context context_of(OperatorKind op) { return op == OperatorKind::type1 ? Context::pi_type1 : Context::pi_type2; }

std::string fingerprint(const ParamSet& ps, const Grid& g, OperatorKind op, int j) {
  std::string bytes;
  const Modulation m1 = op == OperatorKind::type1 ? Modulation::integer(ps.n1) : Modulation::power(ps.m);
  const Modulation m2 = op == OperatorKind::type1 ? Modulation::integer(ps.n2) : Modulation::power(ps.m);
  for (int ell = 1; ell <= 2; ++ell) {
    const auto sym = symbol_of(ps, ell, j, ell == 1 ? m1 : m2, g, context_of(op));
    for (const auto& c : sym.values) bytes += fmt_num(c.real()) + "," + fmt_num(c.imag()) + ";";
  }
  return sha256_hex(bytes).substr(0, 16);
}

}  // namespace

std::pair<Signal, Signal> trial_inputs(const Grid& g, InputModel model, std::uint64_t seed, int trial) {
  const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(trial), 0x7a1u);
  Rng rng(s);
  switch (model) {
    case InputModel::zero: return {Signal::zeros(g), Signal::zeros(g)};
    case InputModel::random_bandlimited: {
      Signal a = bandlimited(g, rng);
      Signal b = bandlimited(g, rng);
      return {a, b};
    }
    case InputModel::X_of_random_sets: {
      Signal a = set_input(g, rng, derive_seed(s, 1));
      Signal b = set_input(g, rng, derive_seed(s, 2));
      return {a, b};
    }
  }
  return {};
}

double ratio_of(const ParamSet& ps, const Signal& f1, const Signal& f2, const Exponents& ex, OperatorKind op) {
  const double den = lp_norm(f1, ex.p1) * lp_norm(f2, ex.p2);
  if (!(den > 0.0)) return std::nan("");
  const Signal P = op == OperatorKind::type1 ? paraproduct_type1(f1, f2, ps) : paraproduct_type2(f1, f2, ps);
  return lp_norm(P, ex.r) / den;
}

RatioEstimate ratio_estimate(const ParamSet& ps, const Grid& g, const Exponents& ex, int trials, std::uint64_t seed,
                             OperatorKind op, InputModel model) {
  if (trials < 1) throw InvalidArgument("trials must be positive");
  ex.validate();
  std::vector<double> ratios;
  for (int t = 0; t < trials; ++t) {
    const auto [f1, f2] = trial_inputs(g, model, seed, t);
    const double r = ratio_of(ps, f1, f2, ex, op);
    if (std::isfinite(r)) ratios.push_back(r);
  }
  if (ratios.empty()) throw AllTrialsDegenerate("every trial had a zero denominator");
  RatioEstimate e;
  e.used = static_cast<int>(ratios.size());
  e.max_ratio = *std::max_element(ratios.begin(), ratios.end());
  e.median_ratio = median_of(ratios);
  return e;
}

Axis parse_axis(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ParseError("axis must look like name=v1,v2,...");
  Axis a{text.substr(0, eq), {}};
  std::stringstream ss(text.substr(eq + 1));
  std::string item;
  try {
    while (std::getline(ss, item, ',')) {
      const auto dots = item.find("..");
      if (dots != std::string::npos) {
        const long lo = std::stol(item.substr(0, dots)), hi = std::stol(item.substr(dots + 2));
        for (long v = lo; v <= hi; ++v) a.second.push_back(v);
      } else {
        a.second.push_back(std::stol(item));
      }
    }
  } catch (const std::logic_error&) {
    throw ParseError("bad axis value in: " + text);
  }
  if (a.second.empty()) throw ParseError("axis has no values: " + text);
  ParamSet probe;
  set_param(probe, a.first, 0);
  return a;
}

SweepReport uniformity_sweep(const ExperimentPlan& plan) {
  if (plan.axes.empty()) throw InvalidArgument("sweep needs at least one axis");
  plan.exponents.validate();
  SweepReport rep;
  rep.plan = plan;
  // cartesian product, last axis fastest
  std::vector<std::map<std::string, long>> points(1);
  for (const auto& [name, vals] : plan.axes) {
    std::vector<std::map<std::string, long>> next;
    for (const auto& p : points)
      for (long v : vals) {
        auto q = p;
        q[name] = v;
        next.push_back(std::move(q));
      }
    points = std::move(next);
  }
  rep.rows.resize(points.size());

  auto work = [&](std::size_t i) {
    SweepRow& row = rep.rows[i];
    row.point = points[i];
    row.log_size = plan.grid.log_size;
    ParamSet ps = plan.base;
    for (const auto& [name, v] : row.point) set_param(ps, name, v);
    try {
      ps.validate();
      row.js = admissible_j_range(ps, plan.grid, context_of(plan.op));
    } catch (const Error&) {
      row.status = "empty_range";
      return;
    }
    row.cond_2large1 = condition_2large1(ps, row.js);
    row.fingerprint = fingerprint(ps, plan.grid, plan.op, row.js.lo);
    try {
      row.est = ratio_estimate(ps, plan.grid, plan.exponents, plan.trials, plan.seed, plan.op, plan.input);
    } catch (const AllTrialsDegenerate&) {
      row.status = "all_trials_degenerate";
      return;
    }
    row.norm_n = row.est.max_ratio / (std::pow(1.0 + std::abs(ps.n1), 10) * std::pow(1.0 + std::abs(ps.n2), 10));
    row.norm_m = row.est.max_ratio / std::exp2(ps.epsilon * ps.m);
  };

  const std::size_t jobs = static_cast<std::size_t>(std::max(1, plan.jobs));
  if (jobs == 1 || points.size() == 1) {
    for (std::size_t i = 0; i < points.size(); ++i) work(i);
  } else {
    // rows are written by index, so the schedule does not affect the report
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex mu;
    std::size_t next = 0;
    for (std::size_t w = 0; w < std::min(jobs, points.size()); ++w)
      pool.emplace_back([&] {
        for (;;) {
          std::size_t i;
          {
            std::lock_guard<std::mutex> lk(mu);
            if (next >= points.size() || err) return;
            i = next++;
          }
          try {
            work(i);
          } catch (...) {
            std::lock_guard<std::mutex> lk(mu);
            if (!err) err = std::current_exception();
          }
        }
      });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
  }
  return rep;
}

nlohmann::json SweepReport::to_json() const {
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json pt = nlohmann::json::object();
    for (const auto& [k, v] : r.point) pt[k] = v;
    rs.push_back({{"point", pt},
                  {"status", r.status},
                  {"max_ratio", r.est.max_ratio},
                  {"median_ratio", r.est.median_ratio},
                  {"trials_used", r.est.used},
                  {"normalized_n", r.norm_n},
                  {"normalized_m", r.norm_m},
                  {"condition_2large1", r.cond_2large1},
                  {"fingerprint", r.fingerprint},
                  {"log_size", r.log_size},
                  {"j_lo", r.js.lo},
                  {"j_hi", r.js.hi}});
  }
  return {{"plan", plan.to_json()}, {"rows", rs}};
}

std::string SweepReport::to_csv() const {
  std::ostringstream os;
  for (const auto& [name, vals] : plan.axes) os << name << ',';
  os << "status,max_ratio,median_ratio,trials_used,normalized_n,normalized_m,condition_2large1,fingerprint,"
        "log_size,j_lo,j_hi\n";
  for (const auto& r : rows) {
    for (const auto& [name, vals] : plan.axes) os << r.point.at(name) << ',';
    os << r.status << ',' << fmt_num(r.est.max_ratio) << ',' << fmt_num(r.est.median_ratio) << ',' << r.est.used
       << ',' << fmt_num(r.norm_n) << ',' << fmt_num(r.norm_m) << ',' << (r.cond_2large1 ? 1 : 0) << ','
       << r.fingerprint << ',' << r.log_size << ',' << r.js.lo << ',' << r.js.hi << '\n';
  }
  return os.str();
}

std::string SweepReport::plot_csv() const {
  std::ostringstream os;
  const std::string& axis = plan.axes.front().first;
  os << axis << ",ratio\n";
  for (const auto& r : rows) os << r.point.at(axis) << ',' << fmt_num(r.est.max_ratio) << '\n';
  return os.str();
}

}  // namespace pp

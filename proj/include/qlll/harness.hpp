#ifndef QLLL_HARNESS_HPP
#define QLLL_HARNESS_HPP

// Command implementations behind the qlll CLI. Each command takes a validated config and
// returns the exact bytes it would write, so runs can be compared byte for byte.

#include "qlll/core.hpp"
#include "qlll/decompose.hpp"
#include "qlll/ensembles.hpp"
#include "qlll/io.hpp"
#include "qlll/lll.hpp"
#include "qlll/qsat.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace qlll::harness {

using io::json;

struct GenConfig {
  int n = 0;
  int k = 3;
  std::string ensemble = "gknm";  // gknm | gknp | regular
  std::optional<double> alpha;
  std::optional<std::int64_t> m;
  std::optional<double> p;
  std::optional<int> degree;
  std::uint64_t seed = 0;
  bool graph_only = false;

  void validate() const {
    if (n < 1) throw InvalidArgument("--n must be >= 1");
    if (k < 1 || k > n) throw InvalidArgument("--k must lie in [1, n]");
    if (!graph_only && k > 20) throw InvalidArgument("projector data for k > 20 is too large; use --graph-only");
    if (ensemble == "gknm") {
      if (alpha.has_value() == m.has_value()) throw InvalidArgument("gknm needs exactly one of --alpha or --m");
      if (alpha && !(*alpha >= 0.0 && std::isfinite(*alpha))) throw InvalidArgument("--alpha must be finite and >= 0");
      if (m && *m < 0) throw InvalidArgument("--m must be >= 0");
    } else if (ensemble == "gknp") {
      if (!p) throw InvalidArgument("gknp needs --p");
    } else if (ensemble == "regular") {
      if (!degree || *degree < 0) throw InvalidArgument("regular needs --degree >= 0");
    } else {
      throw InvalidArgument("unknown ensemble '" + ensemble + "'");
    }
  }

  json to_json() const {
    json j{{"n", n}, {"k", k}, {"ensemble", ensemble}, {"seed", seed}, {"graph_only", graph_only}};
    if (alpha) j["alpha"] = *alpha;
    if (m) j["m"] = *m;
    if (p) j["p"] = *p;
    if (degree) j["degree"] = *degree;
    return j;
  }
};

inline Hypergraph generate_hypergraph(const GenConfig &cfg, SplitMix64 &rng) {
  if (cfg.ensemble == "gknm") {
    const auto m = cfg.m ? *cfg.m : static_cast<std::int64_t>(std::llround(*cfg.alpha * cfg.n));
    return sample_gknm(cfg.n, m, cfg.k, rng);
  }
  if (cfg.ensemble == "gknp") return sample_gknp(cfg.n, *cfg.p, cfg.k, rng);
  return sample_regular(cfg.n, *cfg.degree, cfg.k, rng);
}

/// Instance JSON (or hypergraph text with --graph-only). Same config, same bytes.
inline std::string cmd_gen(const GenConfig &cfg) {
  cfg.validate();
  SplitMix64 rng(cfg.seed);
  const Hypergraph g = generate_hypergraph(cfg, rng);
  if (cfg.graph_only) {
    std::ostringstream os;
    os << "# qlll " << kVersion << " gen " << cfg.to_json().dump() << '\n';
    write_hypergraph(os, g);
    return os.str();
  }
  QsatInstance inst{g.n_vertices, g.k, {}};
  inst.projectors.reserve(g.size());
  for (const auto &e : g.edges) inst.projectors.push_back(random_rank1_projector(e, rng));
  json j = io::to_json(inst);
  j["meta"] = {{"tool", "qlll"}, {"tool_version", kVersion}, {"command", "gen"}, {"config", cfg.to_json()}};
  return j.dump() + "\n";
}

/// Parsed input of `check`: either a full instance or only its hypergraph.
struct CheckInput {
  std::optional<QsatInstance> instance;
  Hypergraph graph;
};

inline CheckInput parse_check_input(const std::string &text, const ToleranceConfig &tol = {}) {
  CheckInput in;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error &e) {
      throw io::FormatError("byte " + std::to_string(e.byte), e.what());
    }
    in.instance = io::instance_from_json(j, tol);
    in.graph = hypergraph_of(*in.instance);
  } else {
    std::istringstream is(text);
    in.graph = read_hypergraph(is);
    validate(in.graph);
  }
  return in;
}

struct CheckConfig {
  std::string mode = "qlll";  // qlll | asymmetric | matching | hybrid
  int r_max = 1;
  std::optional<double> cutoff;
  std::optional<double> alpha;

  void validate() const {
    if (mode != "qlll" && mode != "asymmetric" && mode != "matching" && mode != "hybrid")
      throw InvalidArgument("--mode must be one of qlll, asymmetric, matching, hybrid");
    if (r_max < 1) throw InvalidArgument("--r-max must be >= 1");
    if (cutoff && !(*cutoff > 0.0)) throw InvalidArgument("--D must be > 0");
  }
  json to_json() const {
    json j{{"mode", mode}, {"r_max", r_max}};
    if (cutoff) j["D"] = *cutoff;
    if (alpha) j["alpha"] = *alpha;
    return j;
  }
};

inline json cmd_check_json(const CheckConfig &cfg, const CheckInput &in) {
  cfg.validate();
  json out{{"tool", "qlll"}, {"tool_version", kVersion}, {"command", "check"}, {"config", cfg.to_json()}};
  const auto &g = in.graph;
  if (cfg.mode == "qlll") {
    // Graph-only input: degrees need no projector data; ranks are taken as r_max.
    out["certificate"] = io::to_json(in.instance ? qsat_degree_certificate(*in.instance, cfg.r_max)
                                                 : qsat_degree_certificate(g, cfg.r_max));
  } else if (cfg.mode == "asymmetric") {
    if (!in.instance) throw InvalidArgument("asymmetric mode needs an instance JSON");
    const auto &inst = *in.instance;
    std::vector<Rational> r;
    for (const auto &p : inst.projectors)
      r.push_back(1 - Rational(p.rank()) / Rational(boost::multiprecision::cpp_int(1) << p.locality()));
    const auto graph = dependency_graph_from_instance(inst);
    const auto y = default_y(graph);
    out["certificate"] = io::to_json(asymmetric_qlll_check(r, graph, y));
  } else if (cfg.mode == "matching") {
    out["certificate"] = io::to_json(hall_matching(g.edges, g.n_vertices));
  } else {
    const double cutoff = cfg.cutoff ? *cfg.cutoff : default_cutoff(g.k);
    const auto c = in.instance ? hybrid_certificate(*in.instance, cutoff) : hybrid_certificate(g, cutoff);
    out["certificate"] = io::to_json(c);
    const double alpha = cfg.alpha ? *cfg.alpha : (g.n_vertices > 0 ? static_cast<double>(g.size()) / g.n_vertices : 0.0);
    if (g.k >= 3 && alpha > 0.0) out["region"] = io::to_json(region_report(g.n_vertices, g.k, alpha, cutoff, c.partition));
  }
  return out;
}

inline std::string cmd_check(const CheckConfig &cfg, const std::string &input_text, const ToleranceConfig &tol = {}) {
  return cmd_check_json(cfg, parse_check_input(input_text, tol)).dump(2) + "\n";
}

struct BruteResult {
  std::string report;
  std::optional<std::string> state;
};

inline BruteResult cmd_brute(const std::string &instance_text, bool want_state, const ToleranceConfig &tol = {}) {
  tol.validate();
  const auto in = parse_check_input(instance_text, tol);
  if (!in.instance) throw InvalidArgument("brute needs an instance JSON, not a bare hypergraph");
  const auto &inst = *in.instance;
  const auto dim = brute_force_sat_dim(inst, tol);
  json out{{"tool", "qlll"},
           {"tool_version", kVersion},
           {"command", "brute"},
           {"config", {{"max_qubits", tol.max_qubits}, {"tau_rank", tol.tau_rank}, {"tau_residual", tol.tau_residual}}},
           {"n_qubits", inst.n_qubits},
           {"projectors", inst.size()},
           {"dim", dim},
           {"relative_dimension", to_string(Rational(dim, Eigen::Index{1} << inst.n_qubits))},
           {"satisfiable", dim > 0}};
  BruteResult res;
  if (want_state && dim > 0) {
    const auto psi = find_satisfying_state(inst, tol);
    if (psi) {
      const auto chk = check_state(inst, *psi, tol);
      out["state_max_residual"] = chk.max_residual;
      out["state_check"] = chk.pass ? "pass" : "fail";
      res.state = io::to_json(*psi).dump() + "\n";
    }
  }
  res.report = out.dump(2) + "\n";
  return res;
}

/// Certificate JSON for a DIMACS file. An empty clause yields verdict "error".
inline std::string cmd_cnf(const std::string &dimacs_text) {
  std::istringstream is(dimacs_text);
  const CnfFormula f = read_dimacs(is);
  json out{{"tool", "qlll"}, {"tool_version", kVersion}, {"command", "cnf"}, {"n_vars", f.n_vars}, {"n_clauses", f.clauses.size()}};
  try {
    const auto c = classical_ksat_certificate(f);
    out["certificate"] = io::to_json(c);
  } catch (const EmptyClause &e) {
    out["certificate"] = {{"kind", "classical-ksat"}, {"verdict", "error"}, {"reason", e.what()}, {"witness", {{"clause", e.clause}}}};
  }
  return out.dump(2) + "\n";
}

struct MonteCarloConfig {
  std::string mode = "matching";  // matching | hybrid
  int n = 0;
  int k = 3;
  std::vector<double> alphas;
  int trials = 1;
  std::uint64_t seed = 0;
  int workers = 1;
  std::optional<double> cutoff;
  bool record_timings = false;

  void validate() const {
    if (mode != "matching" && mode != "hybrid") throw InvalidArgument("--mode must be matching or hybrid");
    if (n < 1 || k < 1 || k > n) throw InvalidArgument("need n >= 1 and 1 <= k <= n");
    if (alphas.empty()) throw InvalidArgument("need at least one --alpha");
    for (double a : alphas)
      if (!(a >= 0.0 && std::isfinite(a))) throw InvalidArgument("--alpha values must be finite and >= 0");
    if (trials < 1) throw InvalidArgument("--trials must be >= 1");
    if (workers < 1) throw InvalidArgument("--workers must be >= 1");
    if (cutoff && !(*cutoff > 0.0)) throw InvalidArgument("--D must be > 0");
  }
  /// Worker count is deliberately absent: it must not influence the output.
  json to_json() const {
    json j{{"mode", mode}, {"n", n}, {"k", k}, {"alphas", alphas}, {"trials", trials}, {"seed", seed}};
    if (cutoff) j["D"] = *cutoff;
    return j;
  }
};

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  double alpha = 0;
  std::optional<double> cutoff;
  std::optional<std::size_t> vh, h, l;
  bool matching_pass = false;
  std::optional<bool> degree_pass, hybrid_pass;
  std::optional<double> gamma, epsilon0;
  bool vh_within_2eps0 = false;
  double ms_elapsed = 0;
};

inline TrialRecord run_trial(const MonteCarloConfig &cfg, std::size_t alpha_index, int trial) {
  TrialRecord rec;
  rec.trial = trial;
  rec.alpha = cfg.alphas[alpha_index];
  rec.seed = derive_seed(cfg.seed, alpha_index * static_cast<std::uint64_t>(cfg.trials) + static_cast<std::uint64_t>(trial));
  const auto t0 = std::chrono::steady_clock::now();
  SplitMix64 rng(rec.seed);
  const auto m = static_cast<std::int64_t>(std::llround(rec.alpha * cfg.n));
  const Hypergraph g = sample_gknm(cfg.n, m, cfg.k, rng);
  if (cfg.mode == "matching") {
    rec.matching_pass = hall_matching(g.edges, g.n_vertices).complete;
  } else {
    const double cutoff = cfg.cutoff ? *cfg.cutoff : default_cutoff(cfg.k);
    rec.cutoff = cutoff;
    const auto c = hybrid_certificate(g, cutoff);
    rec.vh = c.partition.v_h.size();
    rec.h = c.partition.h_edges.size();
    rec.l = c.partition.l_edges.size();
    rec.matching_pass = c.matching_ok;
    rec.degree_pass = c.l_degree_ok;
    rec.hybrid_pass = c.passed();
    if (cfg.k >= 3 && rec.alpha > 0.0) {
      const auto r = region_report(cfg.n, cfg.k, rec.alpha, cutoff, c.partition);
      rec.gamma = r.gamma;
      rec.epsilon0 = r.epsilon0;
      rec.vh_within_2eps0 = r.vh_within_2eps0;
    }
  }
  rec.ms_elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

/// Wilson score interval for x successes out of n at normal quantile z.
inline std::pair<double, double> wilson_interval(std::int64_t x, std::int64_t n, double z = 1.96) {
  if (n <= 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double ph = static_cast<double>(x) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (ph + z2 / (2 * nn)) / denom;
  const double half = z / denom * std::sqrt(ph * (1 - ph) / nn + z2 / (4 * nn * nn));
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

struct MonteCarloResult {
  std::vector<TrialRecord> records;
  std::string csv;
  std::string summary;
  json summary_json;
};

inline constexpr const char *kCsvHeader =
    "trial,seed,n,k,alpha,D,vh,h,l,matching_pass,degree_pass,hybrid_pass,gamma,epsilon0,ms_elapsed";

namespace detail {

inline std::string fmt_double(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

template <class T>
std::string opt(const std::optional<T> &v) {
  if (!v) return "";
  if constexpr (std::is_same_v<T, double>)
    return fmt_double(*v);
  else if constexpr (std::is_same_v<T, bool>)
    return *v ? "1" : "0";
  else
    return std::to_string(*v);
}

}  // namespace detail

/// Runs every (alpha, trial) pair on `workers` threads; records land in fixed slots so the
/// output does not depend on scheduling.
inline MonteCarloResult cmd_montecarlo(const MonteCarloConfig &cfg) {
  cfg.validate();
  const std::size_t total = cfg.alphas.size() * static_cast<std::size_t>(cfg.trials);
  MonteCarloResult res;
  res.records.resize(total);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < total;)
      res.records[i] = run_trial(cfg, i / static_cast<std::size_t>(cfg.trials), static_cast<int>(i % static_cast<std::size_t>(cfg.trials)));
  };
  const int threads = std::min<int>(cfg.workers, static_cast<int>(total));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(work);
  }

  std::ostringstream csv;
  csv << kCsvHeader << '\n';
  for (const auto &r : res.records) {
    csv << r.trial << ',' << r.seed << ',' << cfg.n << ',' << cfg.k << ',' << detail::fmt_double(r.alpha) << ','
        << detail::opt(r.cutoff) << ',' << detail::opt(r.vh) << ',' << detail::opt(r.h) << ',' << detail::opt(r.l) << ','
        << (r.matching_pass ? 1 : 0) << ',' << detail::opt(r.degree_pass) << ',' << detail::opt(r.hybrid_pass) << ','
        << detail::opt(r.gamma) << ',' << detail::opt(r.epsilon0) << ','
        << (cfg.record_timings ? detail::fmt_double(r.ms_elapsed) : std::string()) << '\n';
  }
  res.csv = csv.str();

  json sweeps = json::array();
  for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
    std::int64_t pass = 0, within = 0;
    for (int t = 0; t < cfg.trials; ++t) {
      const auto &r = res.records[a * static_cast<std::size_t>(cfg.trials) + static_cast<std::size_t>(t)];
      const bool ok = cfg.mode == "matching" ? r.matching_pass : r.hybrid_pass.value_or(false);
      pass += ok;
      within += ok && r.vh_within_2eps0;
    }
    const auto [lo, hi] = wilson_interval(pass, cfg.trials);
    json s{{"alpha", cfg.alphas[a]},
           {"trials", cfg.trials},
           {"passes", pass},
           {"pass_rate", static_cast<double>(pass) / cfg.trials},
           {"wilson95", {lo, hi}}};
    if (cfg.mode == "hybrid") s["passes_with_vh_within_2eps0"] = within;
    sweeps.push_back(std::move(s));
  }
  res.summary_json = {{"tool", "qlll"},
                      {"tool_version", kVersion},
                      {"command", "montecarlo"},
                      {"ensemble", "G_k(n,m), m = round(alpha n)"},
                      {"config", cfg.to_json()},
                      {"sweeps", std::move(sweeps)}};
  res.summary = res.summary_json.dump(2) + "\n";
  return res;
}

}  // namespace qlll::harness

#endif  // QLLL_HARNESS_HPP

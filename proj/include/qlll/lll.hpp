#ifndef QLLL_LLL_HPP
#define QLLL_LLL_HPP

#include "qlll/core.hpp"
#include "qlll/ensembles.hpp"
#include "qlll/qsat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace qlll {

/// Symmetric dependency graph; adjacency lists sorted, no self-loops.
struct DependencyGraph {
  std::vector<std::vector<int>> adjacency;

  int size() const { return static_cast<int>(adjacency.size()); }
  int degree(int i) const { return static_cast<int>(adjacency[static_cast<std::size_t>(i)].size()); }
  int max_degree() const {
    int d = 0;
    for (const auto &a : adjacency) d = std::max(d, static_cast<int>(a.size()));
    return d;
  }
};

/// Edge (i, j) iff projectors i and j share a qubit.
inline DependencyGraph dependency_graph(std::span<const std::vector<int>> supports, int n_qubits) {
  DependencyGraph g;
  g.adjacency.resize(supports.size());
  std::vector<std::vector<int>> by_qubit(static_cast<std::size_t>(n_qubits));
  for (std::size_t i = 0; i < supports.size(); ++i)
    for (int q : supports[i]) by_qubit.at(static_cast<std::size_t>(q)).push_back(static_cast<int>(i));
  for (const auto &members : by_qubit)
    for (int a : members)
      for (int b : members)
        if (a != b) g.adjacency[static_cast<std::size_t>(a)].push_back(b);
  for (auto &adj : g.adjacency) {
    std::ranges::sort(adj);
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  return g;
}

inline DependencyGraph dependency_graph_from_instance(const QsatInstance &inst) {
  std::vector<std::vector<int>> supports;
  supports.reserve(inst.size());
  for (const auto &p : inst.projectors) supports.push_back(p.qubits);
  return dependency_graph(supports, inst.n_qubits);
}

/// p * e * (d + 1) <= 1, evaluated in double; an exact tie counts as failure.
inline bool symmetric_qlll_check(const Rational &p, std::int64_t d) {
  if (p < 0 || p > 1) throw InvalidArgument("p must lie in [0, 1]");
  if (d < 0) throw InvalidArgument("d must be >= 0");
  if (p == 0) return true;
  return to_double(p) * kE * static_cast<double>(d + 1) < 1.0;
}

enum class CertificateKind { symmetric_qlll, asymmetric_qlll, qsat_degree, classical_ksat, matching, hybrid };

inline const char *to_string(CertificateKind k) {
  switch (k) {
    case CertificateKind::symmetric_qlll: return "symmetric-qlll";
    case CertificateKind::asymmetric_qlll: return "asymmetric-qlll";
    case CertificateKind::qsat_degree: return "qsat-degree";
    case CertificateKind::classical_ksat: return "classical-ksat";
    case CertificateKind::matching: return "matching";
    case CertificateKind::hybrid: return "hybrid";
  }
  return "?";
}

struct Certificate {
  CertificateKind kind = CertificateKind::qsat_degree;
  Verdict verdict = Verdict::fail;
  std::string reason;
  /// Qubit, node or variable that violates the condition (on fail).
  std::optional<std::int64_t> witness;
  /// Load of the witness (degree / occurrence count).
  std::int64_t witness_load = 0;
  /// Largest admissible load, 2^k / (e r k) or 2^k / (e k).
  double threshold = 0;
  /// Lower bound on R(∩ X_i): exact when representable, else a double rounded down.
  std::optional<Rational> bound_exact;
  std::optional<double> bound;
  std::vector<Rational> y;
  /// Parameters the verdict was computed from.
  int k = 0;
  int r_max = 0;
  std::int64_t dependency_degree = 0;

  bool passed() const { return verdict == Verdict::pass; }
};

/// 2^k / (e * r * k).
inline double degree_threshold(int k, int r) {
  return std::ldexp(1.0, k) / (kE * static_cast<double>(r) * static_cast<double>(k));
}

namespace detail {

/// load <= 2^k / (e r k) tested as load * e * r * k < 2^k so ties fail.
inline bool load_within(std::int64_t load, int k, int r) {
  return static_cast<double>(load) * kE * static_cast<double>(r) * static_cast<double>(k) < std::ldexp(1.0, k);
}

/// Largest double not above x, nudged a few ulps toward zero.
inline double round_down(double x) {
  for (int i = 0; i < 4; ++i) x = std::nextafter(x, 0.0);
  return x;
}

/// Shared body of the degree certificate. `ranks[i]` / `localities[i]` describe projector i.
inline Certificate degree_certificate(const std::vector<int> &degrees, std::span<const int> ranks,
                                      std::span<const int> localities, int k, int r_max) {
  if (r_max < 1) throw InvalidArgument("r_max must be >= 1");
  if (k < 1) throw InvalidArgument("instance locality must be >= 1");
  for (int r : ranks)
    if (r > r_max) throw InvalidArgument("projector rank " + std::to_string(r) + " exceeds r_max " + std::to_string(r_max));

  Certificate c;
  c.kind = CertificateKind::qsat_degree;
  c.k = k;
  c.r_max = r_max;
  c.threshold = degree_threshold(k, r_max);

  std::int64_t dmax = 0;
  std::size_t arg = 0;
  for (std::size_t q = 0; q < degrees.size(); ++q)
    if (degrees[q] > dmax) {
      dmax = degrees[q];
      arg = q;
    }
  // Pairwise-disjoint supports are covered by the exact product rule whatever the threshold,
  // provided no single projector is full rank.
  if (dmax <= 1) {
    for (std::size_t i = 0; i < ranks.size(); ++i)
      if (localities[i] < 31 && ranks[i] >= (1 << localities[i])) {
        c.verdict = Verdict::fail;
        c.witness = static_cast<std::int64_t>(i);
        c.witness_load = ranks[i];
        c.reason = "projector " + std::to_string(i) + " has full rank";
        return c;
      }
  } else if (!load_within(dmax, k, r_max)) {
    c.verdict = Verdict::fail;
    c.witness = static_cast<std::int64_t>(arg);
    c.witness_load = dmax;
    c.reason = "qubit " + std::to_string(arg) + " appears in " + std::to_string(dmax) + " projectors";
    return c;
  }
  c.verdict = Verdict::pass;
  c.witness_load = dmax;
  const auto m = static_cast<std::int64_t>(ranks.size());
  const std::int64_t d = dmax <= 1 ? 0 : static_cast<std::int64_t>(k) * (dmax - 1);
  c.dependency_degree = d;
  if (d == 0) {
    // Disjoint supports: R(∩ X_i) = ∏ (1 - r_i 2^{-k_i}).
    Rational prod = 1;
    for (std::size_t i = 0; i < ranks.size(); ++i)
      prod *= 1 - Rational(ranks[i]) / Rational(boost::multiprecision::cpp_int(1) << localities[i]);
    c.bound_exact = prod;
    c.bound = round_down(to_double(prod));
    c.y.assign(ranks.size(), Rational(0));
    return c;
  }
  // Keep the exact value while it stays a modest size.
  const double bits = static_cast<double>(m) * std::log2(static_cast<double>(d) + 1.0);
  if (bits <= 65536.0) {
    const Rational base(d, d + 1);
    Rational prod = 1;
    for (std::int64_t i = 0; i < m; ++i) prod *= base;
    c.bound_exact = prod;
    c.bound = round_down(to_double(prod));
  } else {
    c.bound = round_down(std::exp(static_cast<double>(m) * std::log1p(-1.0 / static_cast<double>(d + 1))));
  }
  c.y.assign(ranks.size(), Rational(1, d + 1));
  return c;
}

}  // namespace detail

/// Degree criterion for k-QSAT with projector ranks <= r_max: every qubit in at most
/// 2^k / (e r_max k) projectors. On pass the bound is (1 - 1/(d+1))^m with
/// d = k (D_max - 1), or the exact product of R(X_i) when supports are disjoint.
inline Certificate qsat_degree_certificate(const QsatInstance &inst, int r_max) {
  std::vector<int> ranks, localities;
  for (const auto &p : inst.projectors) {
    ranks.push_back(p.rank());
    localities.push_back(p.locality());
  }
  return detail::degree_certificate(qubit_degrees(inst), ranks, localities, inst.k, r_max);
}

/// Same criterion from the constraint hypergraph alone, every projector taken to have rank r_max.
inline Certificate qsat_degree_certificate(const Hypergraph &g, int r_max) {
  const std::vector<int> ranks(g.size(), r_max), localities(g.size(), g.k);
  return detail::degree_certificate(degree_stats(g).degree, ranks, localities, g.k, r_max);
}

/// y_i = 1 / (d_i + 1); isolated nodes get 1/2 so that y stays below 1.
inline std::vector<Rational> default_y(const DependencyGraph &g) {
  std::vector<Rational> y;
  y.reserve(g.adjacency.size());
  for (const auto &adj : g.adjacency) y.push_back(adj.empty() ? Rational(1, 2) : Rational(1, static_cast<std::int64_t>(adj.size()) + 1));
  return y;
}

/// Checks R(X_i) >= 1 - y_i ∏_{j ~ i} (1 - y_j) for every node; on pass the bound is ∏ (1 - y_i).
inline Certificate asymmetric_qlll_check(std::span<const Rational> r_values, const DependencyGraph &graph,
                                         std::span<const Rational> y) {
  if (r_values.size() != y.size() || static_cast<int>(y.size()) != graph.size())
    throw InvalidArgument("r_values, y and graph sizes disagree");
  for (const auto &v : y)
    if (v < 0 || v >= 1) throw InvalidArgument("every y_i must lie in [0, 1)");
  for (const auto &r : r_values)
    if (r < 0 || r > 1) throw InvalidArgument("every R(X_i) must lie in [0, 1]");

  Certificate c;
  c.kind = CertificateKind::asymmetric_qlll;
  c.y.assign(y.begin(), y.end());
  for (std::size_t i = 0; i < y.size(); ++i) {
    Rational prod = 1;
    for (int j : graph.adjacency[i]) prod *= 1 - y[static_cast<std::size_t>(j)];
    const Rational need = 1 - y[i] * prod;
    if (r_values[i] < need) {
      c.verdict = Verdict::fail;
      c.witness = static_cast<std::int64_t>(i);
      c.witness_load = graph.degree(static_cast<int>(i));
      c.reason = "node " + std::to_string(i) + " has R = " + to_string(r_values[i]) + " < " + to_string(need);
      return c;
    }
  }
  Rational bound = 1;
  for (const auto &v : y) bound *= 1 - v;
  c.verdict = Verdict::pass;
  c.bound_exact = bound;
  c.bound = detail::round_down(to_double(bound));
  c.dependency_degree = graph.max_degree();
  return c;
}

/// CNF formula; literals are nonzero signed variable indices in [-n_vars, n_vars].
struct CnfFormula {
  int n_vars = 0;
  std::vector<std::vector<int>> clauses;
};

class EmptyClause : public Error {
 public:
  explicit EmptyClause(std::size_t index)
      : Error("clause " + std::to_string(index) + " is empty (formula trivially unsatisfiable)"), clause(index) {}
  std::size_t clause;
};

class MixedClauseWidths : public Error {
 public:
  using Error::Error;
};

/// Every variable in at most 2^k / (e k) clauses of a uniform-width k-CNF.
inline Certificate classical_ksat_certificate(const CnfFormula &f) {
  Certificate c;
  c.kind = CertificateKind::classical_ksat;
  c.r_max = 1;
  int k = -1;
  for (std::size_t i = 0; i < f.clauses.size(); ++i) {
    const auto &cl = f.clauses[i];
    if (cl.empty()) throw EmptyClause(i);
    for (int lit : cl)
      if (lit == 0 || std::abs(lit) > f.n_vars) throw InvalidArgument("literal out of range in clause " + std::to_string(i));
    const int w = static_cast<int>(cl.size());
    if (k < 0) k = w;
    if (w != k)
      throw MixedClauseWidths("clause " + std::to_string(i) + " has width " + std::to_string(w) + ", expected " + std::to_string(k));
  }
  if (k < 0) {
    c.verdict = Verdict::pass;
    c.reason = "no clauses";
    return c;
  }
  c.k = k;
  c.threshold = degree_threshold(k, 1);
  std::vector<std::int64_t> occ(static_cast<std::size_t>(f.n_vars) + 1, 0);
  std::vector<int> seen;
  for (const auto &cl : f.clauses) {
    seen.clear();
    for (int lit : cl) seen.push_back(std::abs(lit));
    std::ranges::sort(seen);
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (int v : seen) ++occ[static_cast<std::size_t>(v)];
  }
  const auto it = std::ranges::max_element(occ);
  const auto var = static_cast<std::int64_t>(it - occ.begin());
  c.witness_load = *it;
  // Variable-disjoint clauses are independent events of probability 2^-k < 1.
  if (*it > 1 && !detail::load_within(*it, k, 1)) {
    c.verdict = Verdict::fail;
    c.witness = var;
    c.reason = "variable " + std::to_string(var) + " occurs in " + std::to_string(*it) + " clauses";
    return c;
  }
  c.verdict = Verdict::pass;
  return c;
}

/// DIMACS CNF: comment lines start with 'c', header "p cnf <vars> <clauses>", clauses are
/// whitespace-separated literals terminated by 0 and may span lines. A '%' line ends input.
inline CnfFormula read_dimacs(std::istream &is) {
  CnfFormula f;
  bool have_header = false;
  std::int64_t announced = 0;
  std::vector<int> current;
  std::size_t lineno = 0;
  std::size_t clause_start_line = 0;
  std::string line;
  while (std::getline(is, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == 'c') continue;
    if (line[first] == '%') break;
    if (line[first] == 'p') {
      if (have_header) throw ParseError("duplicate 'p' header", lineno);
      std::istringstream hs(line.substr(first));
      std::string p, fmt, extra;
      std::int64_t vars = -1;
      if (!(hs >> p >> fmt >> vars >> announced) || p != "p" || fmt != "cnf" || vars < 0 || announced < 0 || (hs >> extra))
        throw ParseError("malformed header, expected 'p cnf <vars> <clauses>'", lineno);
      f.n_vars = static_cast<int>(vars);
      have_header = true;
      continue;
    }
    if (!have_header) throw ParseError("clause data before 'p cnf' header", lineno);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      long long lit = 0;
      try {
        lit = std::stoll(tok, &used);
      } catch (const std::exception &) {
        used = 0;
      }
      if (used != tok.size()) throw ParseError("invalid literal '" + tok + "'", lineno);
      if (lit == 0) {
        f.clauses.push_back(std::move(current));
        current.clear();
        continue;
      }
      if (std::llabs(lit) > f.n_vars)
        throw ParseError("literal " + tok + " exceeds declared variable count " + std::to_string(f.n_vars), lineno);
      if (current.empty()) clause_start_line = lineno;
      current.push_back(static_cast<int>(lit));
    }
  }
  if (!have_header) throw ParseError("missing 'p cnf' header", lineno);
  if (!current.empty()) throw ParseError("clause not terminated by 0", clause_start_line);
  if (static_cast<std::int64_t>(f.clauses.size()) != announced)
    throw ParseError("header announces " + std::to_string(announced) + " clauses, found " + std::to_string(f.clauses.size()), lineno);
  return f;
}

struct OracleReport {
  Certificate certificate;
  /// Set only when the certificate passed (a failed certificate makes no claim).
  std::optional<Eigen::Index> oracle_dim;
  std::optional<Rational> oracle_r;
  bool consistent = true;
  std::string note;
};

/// Runs the degree certificate and, if it passes, confirms it against the brute-force oracle.
inline OracleReport qlll_oracle_test(const QsatInstance &inst, int r_max = 1, const ToleranceConfig &tol = {}) {
  detail::require_brute_force(inst.n_qubits, tol);
  OracleReport rep{qsat_degree_certificate(inst, r_max), {}, {}, true, {}};
  if (!rep.certificate.passed()) {
    rep.note = "no claim";
    return rep;
  }
  const auto dim = brute_force_sat_dim(inst, tol);
  rep.oracle_dim = dim;
  rep.oracle_r = Rational(dim, Eigen::Index{1} << inst.n_qubits);
  const bool bound_ok = rep.certificate.bound_exact ? *rep.oracle_r >= *rep.certificate.bound_exact
                                                    : to_double(*rep.oracle_r) >= *rep.certificate.bound;
  rep.consistent = dim > 0 && bound_ok;
  rep.note = rep.consistent ? "certificate confirmed" : "certificate contradicted by oracle";
  return rep;
}

}  // namespace qlll

#endif  // QLLL_LLL_HPP

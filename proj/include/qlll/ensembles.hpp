#ifndef QLLL_ENSEMBLES_HPP
#define QLLL_ENSEMBLES_HPP

#include "qlll/core.hpp"
#include "qlll/qsat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

namespace qlll {

/// k-uniform hypergraph; edges are sorted vertex tuples, repeats across edges allowed.
struct Hypergraph {
  int n_vertices = 0;
  int k = 0;
  std::vector<std::vector<int>> edges;

  std::size_t size() const { return edges.size(); }
};

inline void validate(const Hypergraph &g) {
  if (g.n_vertices < 0) throw InvalidArgument("negative vertex count");
  if (g.k < 1) throw InvalidArgument("hypergraph uniformity must be >= 1");
  for (const auto &e : g.edges) {
    if (static_cast<int>(e.size()) != g.k) throw InvalidArgument("edge size differs from k");
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] < 0 || e[i] >= g.n_vertices) throw InvalidArgument("edge vertex out of range");
      if (i > 0 && e[i] <= e[i - 1]) throw InvalidArgument("edge vertices must be sorted and distinct");
    }
  }
}

/// Constraint hypergraph of an instance (sorted supports).
inline Hypergraph hypergraph_of(const QsatInstance &inst) {
  Hypergraph g{inst.n_qubits, inst.k, {}};
  g.edges.reserve(inst.size());
  for (const auto &p : inst.projectors) {
    auto e = p.qubits;
    std::ranges::sort(e);
    g.edges.push_back(std::move(e));
  }
  return g;
}

namespace detail {

/// Floyd's algorithm: k distinct values from [0, n), returned sorted.
inline std::vector<int> floyd_subset(int n, int k, SplitMix64 &rng) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int j = n - k; j < n; ++j) {
    const int t = static_cast<int>(rng.below(static_cast<std::uint64_t>(j) + 1));
    if (std::ranges::find(out, t) == out.end())
      out.push_back(t);
    else
      out.push_back(j);
  }
  std::ranges::sort(out);
  return out;
}

using u128 = unsigned __int128;

/// C(n, k) or nullopt beyond 2^63.
inline std::optional<std::uint64_t> binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  u128 acc = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    acc = acc * (n - k + i) / i;
    if (acc > (u128{1} << 63)) return std::nullopt;
  }
  return static_cast<std::uint64_t>(acc);
}

/// Combination of lexicographic rank `r` among k-subsets of [0, n).
inline std::vector<int> unrank_combination(std::uint64_t r, int n, int k) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(k));
  int v = 0;
  for (int slot = 0; slot < k; ++slot) {
    for (;; ++v) {
      const auto c = *binomial(static_cast<std::uint64_t>(n - v - 1), static_cast<std::uint64_t>(k - slot - 1));
      if (r < c) break;
      r -= c;
    }
    out.push_back(v++);
  }
  return out;
}

}  // namespace detail

/// G_k(n, m): m independent uniform k-subsets, with replacement.
inline Hypergraph sample_gknm(int n, std::int64_t m, int k, SplitMix64 &rng) {
  if (k < 1) throw InvalidArgument("k must be >= 1");
  if (k > n) throw InvalidArgument("k exceeds the number of vertices");
  if (m < 0) throw InvalidArgument("edge count must be non-negative");
  Hypergraph g{n, k, {}};
  g.edges.reserve(static_cast<std::size_t>(m));
  for (std::int64_t i = 0; i < m; ++i) g.edges.push_back(detail::floyd_subset(n, k, rng));
  return g;
}

/// G_k(n, p): edge count ~ Binomial(C(n,k), p), then that many distinct uniform k-subsets
/// (Floyd over combination ranks). Edges come out in rank order.
inline Hypergraph sample_gknp(int n, double p, int k, SplitMix64 &rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("edge probability must lie in [0, 1]");
  if (k < 1) throw InvalidArgument("k must be >= 1");
  if (k > n) throw InvalidArgument("k exceeds the number of vertices");
  const auto total = detail::binomial(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(k));
  if (!total) throw InvalidArgument("C(n, k) exceeds 2^63; use G_k(n, m) instead");
  std::binomial_distribution<std::int64_t> count_dist(static_cast<std::int64_t>(*total), p);
  const auto count = static_cast<std::uint64_t>(count_dist(rng));

  std::vector<std::uint64_t> ranks;
  if (count == *total) {
    ranks.resize(count);
    for (std::uint64_t i = 0; i < count; ++i) ranks[i] = i;
  } else {
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(count * 2);
    for (std::uint64_t j = *total - count; j < *total; ++j) {
      const std::uint64_t t = rng.below(j + 1);
      chosen.insert(chosen.contains(t) ? j : t);
    }
    ranks.assign(chosen.begin(), chosen.end());
    std::ranges::sort(ranks);
  }
  Hypergraph g{n, k, {}};
  g.edges.reserve(ranks.size());
  for (auto r : ranks) g.edges.push_back(detail::unrank_combination(r, n, k));
  return g;
}

class RejectionBudgetExhausted : public Error {
 public:
  explicit RejectionBudgetExhausted(std::int64_t attempts)
      : Error("D-regular sampler rejected " + std::to_string(attempts) + " configurations"), attempts(attempts) {}
  std::int64_t attempts;
};

/// Uniform-ish D-regular k-hypergraph via the configuration model: shuffle n*D vertex
/// stubs, cut into blocks of k, reject the whole pairing if any block repeats a vertex.
inline Hypergraph sample_regular(int n, int degree, int k, SplitMix64 &rng, std::int64_t max_attempts = 1'000'000) {
  if (k < 1 || n < 1 || degree < 0) throw InvalidArgument("invalid D-regular parameters");
  if (k > n && degree > 0) throw InvalidArgument("k exceeds the number of vertices");
  const std::int64_t stubs = static_cast<std::int64_t>(n) * degree;
  if (stubs % k != 0) throw InvalidArgument("k must divide D * n");
  std::vector<int> pool(static_cast<std::size_t>(stubs));
  for (std::int64_t attempt = 1; attempt <= max_attempts; ++attempt) {
    for (std::int64_t i = 0; i < stubs; ++i) pool[static_cast<std::size_t>(i)] = static_cast<int>(i / degree);
    for (std::int64_t i = stubs - 1; i > 0; --i)
      std::swap(pool[static_cast<std::size_t>(i)], pool[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    Hypergraph g{n, k, {}};
    g.edges.reserve(static_cast<std::size_t>(stubs / k));
    bool ok = true;
    for (std::int64_t b = 0; b < stubs && ok; b += k) {
      std::vector<int> e(pool.begin() + b, pool.begin() + b + k);
      std::ranges::sort(e);
      if (std::ranges::adjacent_find(e) != e.end()) ok = false;
      g.edges.push_back(std::move(e));
    }
    if (ok) return g;
  }
  throw RejectionBudgetExhausted(max_attempts);
}

/// Random k-QSAT: G_k(n, round(alpha n)) with an independent Haar rank-1 projector per edge.
inline QsatInstance random_instance(int n, double alpha, int k, SplitMix64 &rng) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidArgument("density must be finite and >= 0");
  const auto m = static_cast<std::int64_t>(std::llround(alpha * n));
  const Hypergraph g = sample_gknm(n, m, k, rng);
  QsatInstance inst{n, k, {}};
  inst.projectors.reserve(g.size());
  for (const auto &e : g.edges) inst.projectors.push_back(random_rank1_projector(e, rng));
  return inst;
}

struct DegreeStats {
  std::vector<int> degree;
  int max = 0;
  /// k * m / n.
  Rational mean;
  /// histogram[j] = number of vertices of degree j.
  std::vector<std::int64_t> histogram;
};

inline DegreeStats degree_stats(const Hypergraph &g) {
  DegreeStats s;
  s.degree.assign(static_cast<std::size_t>(g.n_vertices), 0);
  std::int64_t incidences = 0;
  for (const auto &e : g.edges)
    for (int v : e) {
      ++s.degree[static_cast<std::size_t>(v)];
      ++incidences;
    }
  for (int d : s.degree) s.max = std::max(s.max, d);
  s.mean = g.n_vertices > 0 ? Rational(incidences, g.n_vertices) : Rational(0);
  s.histogram.assign(static_cast<std::size_t>(s.max) + 1, 0);
  for (int d : s.degree) ++s.histogram[static_cast<std::size_t>(d)];
  return s;
}

struct PoissonConditionalReport {
  double lambda = 0;
  double c = 0;
  /// Samples are conditioned on X >= threshold = ceil(c * lambda).
  std::int64_t threshold = 0;
  std::int64_t trials = 0;
  std::int64_t hits = 0;
  double mean = 0;
  double std_error = 0;
  /// One-sided upper bound at z = 2.576.
  double upper_bound = 0;
  double claimed_bound = 0;
  Verdict verdict = Verdict::inconclusive;
};

/// Monte Carlo estimate of E[X | X >= ceil(c*lambda)] for X ~ Poisson(lambda),
/// compared with (c + 1) * lambda.
inline PoissonConditionalReport poisson_conditional_mean_check(double lambda, double c, std::int64_t trials,
                                                               SplitMix64 &rng) {
  if (!(lambda > 0.0) || !(c >= 0.0) || trials < 1) throw InvalidArgument("invalid Poisson check parameters");
  PoissonConditionalReport rep;
  rep.lambda = lambda;
  rep.c = c;
  rep.trials = trials;
  rep.threshold = static_cast<std::int64_t>(std::ceil(c * lambda));
  rep.claimed_bound = (c + 1.0) * lambda;
  std::poisson_distribution<std::int64_t> dist(lambda);
  double sum = 0, sum_sq = 0;
  for (std::int64_t i = 0; i < trials; ++i) {
    const auto x = dist(rng);
    if (x < rep.threshold) continue;
    ++rep.hits;
    sum += static_cast<double>(x);
    sum_sq += static_cast<double>(x) * static_cast<double>(x);
  }
  if (rep.hits < 30) return rep;
  const auto h = static_cast<double>(rep.hits);
  rep.mean = sum / h;
  const double var = std::max(0.0, (sum_sq - h * rep.mean * rep.mean) / (h - 1.0));
  rep.std_error = std::sqrt(var / h);
  rep.upper_bound = rep.mean + 2.576 * rep.std_error;
  rep.verdict = rep.upper_bound <= rep.claimed_bound ? Verdict::pass : Verdict::fail;
  return rep;
}

// Hypergraph text format: a header line "k n m", then one sorted edge per line.
// Blank lines and lines starting with '#' are ignored.

inline void write_hypergraph(std::ostream &os, const Hypergraph &g) {
  os << g.k << ' ' << g.n_vertices << ' ' << g.edges.size() << '\n';
  for (const auto &e : g.edges) {
    for (std::size_t i = 0; i < e.size(); ++i) os << (i ? " " : "") << e[i];
    os << '\n';
  }
}

class ParseError : public Error {
 public:
  ParseError(const std::string &what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line(line) {}
  std::size_t line;
};

inline Hypergraph read_hypergraph(std::istream &is) {
  std::string text;
  std::size_t lineno = 0;
  auto next_line = [&](std::string &out) {
    while (std::getline(is, out)) {
      ++lineno;
      const auto first = out.find_first_not_of(" \t\r");
      if (first == std::string::npos || out[first] == '#') continue;
      return true;
    }
    return false;
  };
  if (!next_line(text)) throw ParseError("missing header 'k n m'", lineno + 1);
  Hypergraph g;
  std::int64_t m = 0;
  {
    std::istringstream hs(text);
    std::string extra;
    if (!(hs >> g.k >> g.n_vertices >> m) || (hs >> extra)) throw ParseError("malformed header, expected 'k n m'", lineno);
    if (g.k < 1 || g.n_vertices < 0 || m < 0) throw ParseError("header values out of range", lineno);
  }
  g.edges.reserve(static_cast<std::size_t>(m));
  while (next_line(text)) {
    std::istringstream ls(text);
    std::vector<int> e;
    std::int64_t v;
    while (ls >> v) {
      if (v < 0 || v >= g.n_vertices) throw ParseError("vertex " + std::to_string(v) + " out of range", lineno);
      e.push_back(static_cast<int>(v));
    }
    if (!ls.eof()) throw ParseError("non-integer token", lineno);
    if (static_cast<int>(e.size()) != g.k) throw ParseError("edge has " + std::to_string(e.size()) + " vertices, expected " + std::to_string(g.k), lineno);
    std::ranges::sort(e);
    if (std::ranges::adjacent_find(e) != e.end()) throw ParseError("edge repeats a vertex", lineno);
    g.edges.push_back(std::move(e));
  }
  if (static_cast<std::int64_t>(g.edges.size()) != m)
    throw ParseError("header announces " + std::to_string(m) + " edges, found " + std::to_string(g.edges.size()), lineno);
  return g;
}

}  // namespace qlll

#endif  // QLLL_ENSEMBLES_HPP

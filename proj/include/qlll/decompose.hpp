#ifndef QLLL_DECOMPOSE_HPP
#define QLLL_DECOMPOSE_HPP

#include "qlll/core.hpp"
#include "qlll/ensembles.hpp"
#include "qlll/lll.hpp"
#include "qlll/qsat.hpp"
#include "qlll/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qlll {

/// Split of a hypergraph into the high-degree closure V_H, its induced edges H, and the rest L.
struct Partition {
  double cutoff = 0;
  std::vector<int> v_h;
  std::vector<std::size_t> h_edges;
  std::vector<std::size_t> l_edges;
  /// V_0, V_1, ... (each sorted).
  std::vector<std::vector<int>> vertex_layers;
  /// E_1, E_2, ... (each sorted); edge_layers[i] produced vertex_layers[i + 1].
  std::vector<std::vector<std::size_t>> edge_layers;
};

/// Layered closure: V_0 = {v : deg(v) > D}; at step i every edge not yet taken that has two
/// or more vertices in V_0 ∪ ... ∪ V_{i-1} joins E_i and its new vertices form V_i. Stops at
/// the first empty E_i. Each edge is revisited only when one of its vertices enters V_H.
inline Partition build_vh(const Hypergraph &g, double cutoff) {
  if (!(cutoff > 0.0)) throw InvalidArgument("cutoff D must be > 0");
  const auto n = static_cast<std::size_t>(g.n_vertices);
  const std::size_t m = g.edges.size();
  std::vector<std::vector<std::size_t>> incident(n);
  for (std::size_t e = 0; e < m; ++e)
    for (int v : g.edges[e]) incident.at(static_cast<std::size_t>(v)).push_back(e);

  Partition part;
  part.cutoff = cutoff;
  std::vector<char> in_vh(n, 0), in_h(m, 0);
  std::vector<int> hits(m, 0);

  std::vector<int> layer;
  for (std::size_t v = 0; v < n; ++v)
    if (static_cast<double>(incident[v].size()) > cutoff) {
      layer.push_back(static_cast<int>(v));
      in_vh[v] = 1;
    }
  part.vertex_layers.push_back(layer);

  std::vector<std::size_t> touched;
  while (!layer.empty()) {
    touched.clear();
    for (int v : layer)
      for (auto e : incident[static_cast<std::size_t>(v)])
        if (!in_h[e] && ++hits[e] == 2) touched.push_back(e);
    if (touched.empty()) break;
    std::ranges::sort(touched);
    std::vector<int> next;
    for (auto e : touched) {
      in_h[e] = 1;
      for (int v : g.edges[e])
        if (!in_vh[static_cast<std::size_t>(v)]) {
          in_vh[static_cast<std::size_t>(v)] = 1;
          next.push_back(v);
        }
    }
    std::ranges::sort(next);
    part.edge_layers.push_back(touched);
    part.vertex_layers.push_back(next);
    layer = std::move(next);
  }

  for (std::size_t v = 0; v < n; ++v)
    if (in_vh[v]) part.v_h.push_back(static_cast<int>(v));
  for (std::size_t e = 0; e < m; ++e) (in_h[e] ? part.h_edges : part.l_edges).push_back(e);
  return part;
}

/// Invariant violations of a partition against its hypergraph; empty means sound.
inline std::vector<std::string> audit_partition(const Hypergraph &g, const Partition &part) {
  std::vector<std::string> issues;
  const auto n = static_cast<std::size_t>(g.n_vertices);
  std::vector<int> vertex_layer(n, -1);
  for (std::size_t i = 0; i < part.vertex_layers.size(); ++i)
    for (int v : part.vertex_layers[i]) {
      if (vertex_layer.at(static_cast<std::size_t>(v)) >= 0) issues.push_back("vertex " + std::to_string(v) + " in two layers");
      vertex_layer[static_cast<std::size_t>(v)] = static_cast<int>(i);
    }
  std::vector<char> in_vh(n, 0);
  for (int v : part.v_h) in_vh.at(static_cast<std::size_t>(v)) = 1;
  for (std::size_t v = 0; v < n; ++v)
    if ((vertex_layer[v] >= 0) != static_cast<bool>(in_vh[v])) issues.push_back("V_H differs from the union of layers at " + std::to_string(v));

  const auto deg = degree_stats(g).degree;
  for (std::size_t v = 0; v < n; ++v)
    if ((static_cast<double>(deg[v]) > part.cutoff) != (vertex_layer[v] == 0))
      issues.push_back("V_0 membership wrong for vertex " + std::to_string(v));

  std::vector<int> edge_layer(g.edges.size(), -1);
  for (std::size_t i = 0; i < part.edge_layers.size(); ++i)
    for (auto e : part.edge_layers[i]) {
      if (edge_layer.at(e) >= 0) issues.push_back("edge " + std::to_string(e) + " in two layers");
      edge_layer[e] = static_cast<int>(i);
    }
  std::vector<char> in_h(g.edges.size(), 0);
  for (auto e : part.h_edges) in_h.at(e) = 1;
  for (auto e : part.l_edges)
    if (in_h.at(e)) issues.push_back("edge " + std::to_string(e) + " in both H and L");
  if (part.h_edges.size() + part.l_edges.size() != g.edges.size()) issues.push_back("H and L do not cover E");

  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    int inside = 0;
    for (int v : g.edges[e]) inside += in_vh[static_cast<std::size_t>(v)];
    const bool induced = inside == static_cast<int>(g.edges[e].size());
    if (induced != static_cast<bool>(in_h[e])) issues.push_back("H is not the induced edge set at edge " + std::to_string(e));
    if (!in_h[e] && inside > 1) issues.push_back("L edge " + std::to_string(e) + " has " + std::to_string(inside) + " vertices in V_H");
    if ((edge_layer[e] >= 0) != static_cast<bool>(in_h[e])) issues.push_back("H differs from the union of edge layers at " + std::to_string(e));
    if (edge_layer[e] >= 0) {
      // Needs >= 2 vertices from layers strictly before the step that took it.
      int earlier = 0, before = 0;
      for (int v : g.edges[e]) {
        const int l = vertex_layer[static_cast<std::size_t>(v)];
        earlier += l >= 0 && l <= edge_layer[e];
        before += l >= 0 && l < edge_layer[e];
      }
      if (earlier < 2) issues.push_back("edge " + std::to_string(e) + " joined H too early");
      if (before >= 2) issues.push_back("edge " + std::to_string(e) + " joined H too late");
    }
  }
  return issues;
}

struct HallResult {
  bool complete = false;
  /// edge index -> matched vertex, or -1.
  std::vector<int> matching;
  /// On failure: edges S with |∪S| < |S|, and ∪S.
  std::vector<std::size_t> violator;
  std::vector<int> violator_vertices;
};

/// Maximum matching of edges to their own vertices (Hopcroft-Karp). When some edge stays
/// unmatched, the alternating-path closure from it is a Hall violator with |N(S)| = |S| - 1.
inline HallResult hall_matching(std::span<const std::vector<int>> edges, int n) {
  const std::size_t m = edges.size();
  const auto nv = static_cast<std::size_t>(n);
  constexpr int kFree = -1;
  constexpr int kInf = std::numeric_limits<int>::max();
  std::vector<int> mate_edge(m, kFree);
  std::vector<int> mate_vertex(nv, kFree);
  std::vector<int> dist(m, kInf);
  for (const auto &e : edges)
    for (int v : e)
      if (v < 0 || v >= n) throw InvalidArgument("edge vertex out of range");

  // Greedy warm start.
  for (std::size_t u = 0; u < m; ++u)
    for (int v : edges[u])
      if (mate_vertex[static_cast<std::size_t>(v)] == kFree) {
        mate_vertex[static_cast<std::size_t>(v)] = static_cast<int>(u);
        mate_edge[u] = v;
        break;
      }

  std::vector<std::size_t> queue;
  auto bfs = [&]() {
    queue.clear();
    for (std::size_t u = 0; u < m; ++u) {
      if (mate_edge[u] == kFree) {
        dist[u] = 0;
        queue.push_back(u);
      } else {
        dist[u] = kInf;
      }
    }
    bool found = false;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const auto u = queue[head];
      for (int v : edges[u]) {
        const int w = mate_vertex[static_cast<std::size_t>(v)];
        if (w == kFree) {
          found = true;
        } else if (dist[static_cast<std::size_t>(w)] == kInf) {
          dist[static_cast<std::size_t>(w)] = dist[u] + 1;
          queue.push_back(static_cast<std::size_t>(w));
        }
      }
    }
    return found;
  };

  std::vector<std::size_t> cursor(m, 0);
  std::vector<std::size_t> stack;
  auto augment_from = [&](std::size_t root) {
    stack.assign(1, root);
    while (!stack.empty()) {
      const auto u = stack.back();
      auto &it = cursor[u];
      bool advanced = false;
      while (it < edges[u].size()) {
        const int v = edges[u][it];
        const int w = mate_vertex[static_cast<std::size_t>(v)];
        if (w == kFree) {
          // Flip the path root -> ... -> u -> v.
          int carry = v;
          for (auto s = stack.size(); s-- > 0;) {
            const auto x = stack[s];
            const int prev = mate_edge[x];
            mate_edge[x] = carry;
            mate_vertex[static_cast<std::size_t>(carry)] = static_cast<int>(x);
            carry = prev;
          }
          return true;
        }
        if (dist[static_cast<std::size_t>(w)] == dist[u] + 1) {
          ++it;
          stack.push_back(static_cast<std::size_t>(w));
          advanced = true;
          break;
        }
        ++it;
      }
      if (!advanced) {
        dist[u] = kInf;
        stack.pop_back();
      }
    }
    return false;
  };

  while (bfs()) {
    std::ranges::fill(cursor, 0);
    for (std::size_t u = 0; u < m; ++u)
      if (mate_edge[u] == kFree) augment_from(u);
  }

  HallResult res;
  res.matching = mate_edge;
  const auto unmatched = std::ranges::find(mate_edge, kFree);
  res.complete = unmatched == mate_edge.end();
  if (res.complete) return res;

  const auto root = static_cast<std::size_t>(unmatched - mate_edge.begin());
  std::vector<char> seen_edge(m, 0), seen_vertex(nv, 0);
  queue.assign(1, root);
  seen_edge[root] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    for (int v : edges[queue[head]]) {
      if (seen_vertex[static_cast<std::size_t>(v)]) continue;
      seen_vertex[static_cast<std::size_t>(v)] = 1;
      res.violator_vertices.push_back(v);
      const int w = mate_vertex[static_cast<std::size_t>(v)];
      if (w != kFree && !seen_edge[static_cast<std::size_t>(w)]) {
        seen_edge[static_cast<std::size_t>(w)] = 1;
        queue.push_back(static_cast<std::size_t>(w));
      }
    }
  }
  res.violator = queue;
  std::ranges::sort(res.violator);
  std::ranges::sort(res.violator_vertices);
  return res;
}

/// Decoupled instance L' on the qubits outside V_H, and where each projector came from.
struct GlueResult {
  QsatInstance decoupled;
  /// Original labels of the decoupled instance's qubits (sorted; position = new label).
  std::vector<int> remaining_qubits;
  /// Original projector index of each decoupled projector.
  std::vector<std::size_t> source;
  /// Original V_H qubit removed from each decoupled projector, or -1 for pass-through.
  std::vector<int> pivot;
  /// Projectors acting only on V_H.
  std::vector<std::size_t> h_projectors;
};

/// Replaces every L projector |v><v| that touches one V_H qubit by the projector onto
/// span{v^0, v^1} on its other k-1 qubits, where v = a_0|0>|v^0> + a_1|1>|v^1> with the V_H
/// qubit first. Components with |a_b| <= tau_rank are dropped.
inline GlueResult glue_transform(const QsatInstance &inst, std::span<const int> v_h, const ToleranceConfig &tol = {}) {
  validate(inst, tol);
  std::vector<char> in_vh(static_cast<std::size_t>(inst.n_qubits), 0);
  for (int q : v_h) {
    if (q < 0 || q >= inst.n_qubits) throw InvalidArgument("V_H qubit out of range");
    in_vh[static_cast<std::size_t>(q)] = 1;
  }
  GlueResult out;
  std::vector<int> relabel(static_cast<std::size_t>(inst.n_qubits), -1);
  for (int q = 0; q < inst.n_qubits; ++q)
    if (!in_vh[static_cast<std::size_t>(q)]) {
      relabel[static_cast<std::size_t>(q)] = static_cast<int>(out.remaining_qubits.size());
      out.remaining_qubits.push_back(q);
    }
  out.decoupled = QsatInstance{static_cast<int>(out.remaining_qubits.size()), inst.k, {}};

  for (std::size_t i = 0; i < inst.size(); ++i) {
    const auto &p = inst.projectors[i];
    if (p.rank() != 1) throw InvalidArgument("gluing requires rank-1 projectors (projector " + std::to_string(i) + ")");
    std::vector<int> pos_in_vh;
    for (int j = 0; j < p.locality(); ++j)
      if (in_vh[static_cast<std::size_t>(p.qubits[static_cast<std::size_t>(j)])]) pos_in_vh.push_back(j);
    if (static_cast<int>(pos_in_vh.size()) == p.locality()) {
      out.h_projectors.push_back(i);
      continue;
    }
    if (pos_in_vh.size() > 1)
      throw InvalidArgument("projector " + std::to_string(i) + " outside H has " + std::to_string(pos_in_vh.size()) +
                            " qubits in V_H");
    Projector q;
    for (int j = 0; j < p.locality(); ++j)
      if (!in_vh[static_cast<std::size_t>(p.qubits[static_cast<std::size_t>(j)])])
        q.qubits.push_back(relabel[static_cast<std::size_t>(p.qubits[static_cast<std::size_t>(j)])]);
    if (pos_in_vh.empty()) {
      q.vectors = p.vectors;
      out.pivot.push_back(-1);
    } else {
      const int k = p.locality();
      const int pos = pos_in_vh.front();
      const Eigen::Index half = Eigen::Index{1} << (k - 1);
      Matrix parts = Matrix::Zero(half, 2);
      for (Eigen::Index l = 0; l < (Eigen::Index{1} << k); ++l) {
        const int bit = static_cast<int>((l >> (k - 1 - pos)) & 1);
        // Drop the pivot bit from l.
        const Eigen::Index high = (l >> (k - pos)) << (k - 1 - pos);
        const Eigen::Index low = l & ((Eigen::Index{1} << (k - 1 - pos)) - 1);
        parts(high | low, bit) = p.vectors(l, 0);
      }
      std::vector<Vector> keep;
      for (int b = 0; b < 2; ++b)
        if (parts.col(b).norm() > tol.tau_rank) keep.emplace_back(parts.col(b));
      const Subspace s = span(keep, AmbientSpace(half), tol);
      q.vectors = s.basis();
      out.pivot.push_back(p.qubits[static_cast<std::size_t>(pos)]);
    }
    out.source.push_back(i);
    out.decoupled.projectors.push_back(std::move(q));
  }
  return out;
}

class GluePreconditionFailed : public Error {
 public:
  GluePreconditionFailed(std::string part, std::vector<double> residuals)
      : Error(part + " state does not satisfy its sub-instance"), part(std::move(part)), residuals(std::move(residuals)) {}
  std::string part;
  std::vector<double> residuals;
};

/// |Φ_H> ⊗ |Φ_L'> laid out on the original qubit order. Both factors are checked first.
inline StateVector glue_states(const QsatInstance &inst, std::span<const int> v_h, const StateVector &phi_h,
                               const StateVector &phi_l, const ToleranceConfig &tol = {}) {
  const auto glue = glue_transform(inst, v_h, tol);
  std::vector<int> vh_sorted(v_h.begin(), v_h.end());
  std::ranges::sort(vh_sorted);
  const auto h_inst = restrict_instance(inst, glue.h_projectors, vh_sorted);
  if (phi_h.n_qubits != static_cast<int>(vh_sorted.size())) throw DimensionMismatch("phi_H has the wrong qubit count");
  if (phi_l.n_qubits != glue.decoupled.n_qubits) throw DimensionMismatch("phi_L' has the wrong qubit count");
  if (const auto c = check_state(h_inst, phi_h, tol); !c.pass) throw GluePreconditionFailed("H", c.residuals);
  if (const auto c = check_state(glue.decoupled, phi_l, tol); !c.pass) throw GluePreconditionFailed("L'", c.residuals);

  const int n = inst.n_qubits;
  detail::require_brute_force(n, tol);
  std::vector<char> in_vh(static_cast<std::size_t>(n), 0);
  for (int q : vh_sorted) in_vh[static_cast<std::size_t>(q)] = 1;

  StateVector out{n, Vector(Eigen::Index{1} << n)};
  for (Eigen::Index g = 0; g < out.amplitudes.size(); ++g) {
    Eigen::Index a = 0, b = 0;
    for (int q = 0; q < n; ++q) {
      const Eigen::Index bit = (g >> (n - 1 - q)) & 1;
      if (in_vh[static_cast<std::size_t>(q)])
        a = (a << 1) | bit;
      else
        b = (b << 1) | bit;
    }
    out.amplitudes(g) = phi_h.amplitudes(a) * phi_l.amplitudes(b);
  }
  return out;
}

/// Brute-force both halves and glue; nullopt if either half is unsatisfiable.
inline std::optional<StateVector> glue_pipeline(const QsatInstance &inst, std::span<const int> v_h,
                                                const ToleranceConfig &tol = {}) {
  const auto glue = glue_transform(inst, v_h, tol);
  std::vector<int> vh_sorted(v_h.begin(), v_h.end());
  std::ranges::sort(vh_sorted);
  const auto h_inst = restrict_instance(inst, glue.h_projectors, vh_sorted);
  const auto phi_h = find_satisfying_state(h_inst, tol);
  if (!phi_h) return std::nullopt;
  const auto phi_l = find_satisfying_state(glue.decoupled, tol);
  if (!phi_l) return std::nullopt;
  return glue_states(inst, vh_sorted, *phi_h, *phi_l, tol);
}

struct HybridCertificate {
  Verdict verdict = Verdict::fail;
  std::string reason;
  int k = 0;
  Partition partition;
  /// Present iff H admits a complete edge-to-vertex matching.
  std::optional<std::vector<int>> matching;
  std::vector<std::size_t> hall_violator;
  std::vector<int> hall_violator_vertices;
  bool matching_ok = false;
  bool l_degree_ok = false;
  bool single_vh_qubit_ok = false;
  /// 2^k / (4 e k).
  double l_degree_threshold = 0;
  std::int64_t max_l_degree = 0;
  std::optional<int> l_degree_witness;

  bool passed() const { return verdict == Verdict::pass; }
};

/// 2^k / (4 e k).
inline double default_cutoff(int k) { return degree_threshold(k, 4); }

/// Graph-level hybrid certificate: V_H closure, Hall matching on H, L-degree bound for
/// qubits outside V_H, at most one V_H qubit per L edge.
inline HybridCertificate hybrid_certificate(const Hypergraph &g, double cutoff) {
  validate(g);
  HybridCertificate c;
  c.k = g.k;
  c.partition = build_vh(g, cutoff);
  c.l_degree_threshold = default_cutoff(g.k);
  const auto &part = c.partition;

  std::vector<std::vector<int>> h_edges;
  h_edges.reserve(part.h_edges.size());
  for (auto e : part.h_edges) h_edges.push_back(g.edges[e]);
  auto hall = hall_matching(h_edges, g.n_vertices);
  c.matching_ok = hall.complete;
  if (hall.complete) {
    std::vector<int> full(g.edges.size(), -1);
    for (std::size_t i = 0; i < part.h_edges.size(); ++i) full[part.h_edges[i]] = hall.matching[i];
    c.matching = std::move(full);
  } else {
    for (auto i : hall.violator) c.hall_violator.push_back(part.h_edges[i]);
    c.hall_violator_vertices = std::move(hall.violator_vertices);
  }

  std::vector<char> in_vh(static_cast<std::size_t>(g.n_vertices), 0);
  for (int v : part.v_h) in_vh[static_cast<std::size_t>(v)] = 1;
  std::vector<std::int64_t> load(static_cast<std::size_t>(g.n_vertices), 0);
  c.single_vh_qubit_ok = true;
  for (auto e : part.l_edges) {
    int inside = 0;
    for (int v : g.edges[e]) {
      if (in_vh[static_cast<std::size_t>(v)])
        ++inside;
      else
        ++load[static_cast<std::size_t>(v)];
    }
    if (inside > 1) c.single_vh_qubit_ok = false;
  }
  for (std::size_t v = 0; v < load.size(); ++v)
    if (load[v] > c.max_l_degree) {
      c.max_l_degree = load[v];
      c.l_degree_witness = static_cast<int>(v);
    }
  // With every outside qubit in at most one L projector the decoupled projectors (rank <= 2 on
  // k-1 >= 2 qubits) are qubit-disjoint, so L' is satisfiable whatever the threshold.
  c.l_degree_ok = (c.max_l_degree <= 1 && g.k >= 3) || detail::load_within(c.max_l_degree, g.k, 4);
  if (c.l_degree_ok) c.l_degree_witness.reset();

  if (!c.single_vh_qubit_ok) {
    c.reason = "an L edge has two or more vertices in V_H";
  } else if (!c.matching_ok) {
    c.reason = "H violates Hall's condition: " + std::to_string(c.hall_violator.size()) + " edges on " +
               std::to_string(c.hall_violator_vertices.size()) + " vertices";
  } else if (!c.l_degree_ok) {
    c.reason = "qubit " + std::to_string(*c.l_degree_witness) + " lies in " + std::to_string(c.max_l_degree) +
               " L projectors";
  } else {
    c.verdict = Verdict::pass;
    c.reason = "matching on H and degree bound on L hold";
  }
  return c;
}

inline HybridCertificate hybrid_certificate(const QsatInstance &inst, double cutoff) {
  for (std::size_t i = 0; i < inst.size(); ++i)
    if (inst.projectors[i].rank() != 1 || inst.projectors[i].locality() != inst.k)
      throw InvalidArgument("hybrid certificate requires rank-1 k-local projectors (projector " + std::to_string(i) + ")");
  return hybrid_certificate(hypergraph_of(inst), cutoff);
}

struct RegionReport {
  int n = 0;
  int k = 0;
  double alpha = 0;
  double cutoff = 0;
  /// 1 / (e (e^2 alpha)^{1/(k-2)}).
  double gamma = 0;
  /// alpha / (12 D^2 k), with alpha standing in for alpha'.
  double epsilon0 = 0;
  double vh_fraction = 0;
  bool vh_within_2eps0 = false;
  /// 2 epsilon0 < gamma.
  bool regime_ok = false;
  std::vector<double> layer_fraction;
  /// epsilon_i = 2^{-i} epsilon0.
  std::vector<double> layer_epsilon;
};

inline RegionReport region_report(int n, int k, double alpha, double cutoff, const Partition &part) {
  if (k < 3) throw InvalidArgument("region report needs k >= 3");
  if (n < 1 || !(alpha > 0.0) || !(cutoff > 0.0)) throw InvalidArgument("region report needs n >= 1, alpha > 0, D > 0");
  RegionReport r;
  r.n = n;
  r.k = k;
  r.alpha = alpha;
  r.cutoff = cutoff;
  r.gamma = 1.0 / (kE * std::pow(kE * kE * alpha, 1.0 / (k - 2)));
  r.epsilon0 = alpha / (12.0 * cutoff * cutoff * k);
  r.vh_fraction = static_cast<double>(part.v_h.size()) / n;
  r.vh_within_2eps0 = static_cast<double>(part.v_h.size()) <= 2.0 * r.epsilon0 * n;
  r.regime_ok = 2.0 * r.epsilon0 < r.gamma;
  for (std::size_t i = 0; i < part.vertex_layers.size(); ++i) {
    r.layer_fraction.push_back(static_cast<double>(part.vertex_layers[i].size()) / n);
    r.layer_epsilon.push_back(std::ldexp(r.epsilon0, -static_cast<int>(i)));
  }
  return r;
}

}  // namespace qlll

#endif  // QLLL_DECOMPOSE_HPP

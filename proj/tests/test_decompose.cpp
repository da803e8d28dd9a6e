#include "qlll/decompose.hpp"

#include "crafted.hpp"

#include <gtest/gtest.h>

#include <map>
#include <numeric>
#include <set>

using namespace qlll;

namespace {

// Def.-literal construction: rescan every edge at each step.
Partition naive_build_vh(const Hypergraph &g, double cutoff) {
  Partition p;
  p.cutoff = cutoff;
  const auto deg = degree_stats(g).degree;
  std::set<int> vh;
  std::vector<int> v0;
  for (int v = 0; v < g.n_vertices; ++v)
    if (deg[v] > cutoff) v0.push_back(v);
  vh.insert(v0.begin(), v0.end());
  p.vertex_layers.push_back(v0);
  std::set<std::size_t> taken;
  while (true) {
    std::vector<std::size_t> step;
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      if (taken.count(e)) continue;
      int inside = 0;
      for (int v : g.edges[e]) inside += vh.count(v) ? 1 : 0;
      if (inside >= 2) step.push_back(e);
    }
    if (step.empty()) break;
    std::set<int> fresh;
    for (auto e : step) {
      taken.insert(e);
      for (int v : g.edges[e])
        if (!vh.count(v)) fresh.insert(v);
    }
    vh.insert(fresh.begin(), fresh.end());
    p.edge_layers.push_back(step);
    p.vertex_layers.emplace_back(fresh.begin(), fresh.end());
  }
  p.v_h.assign(vh.begin(), vh.end());
  for (std::size_t e = 0; e < g.edges.size(); ++e) (taken.count(e) ? p.h_edges : p.l_edges).push_back(e);
  return p;
}

bool hall_holds_exhaustive(const std::vector<std::vector<int>> &edges) {
  const std::size_t m = edges.size();
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    std::set<int> nb;
    for (std::size_t i = 0; i < m; ++i)
      if (mask >> i & 1) nb.insert(edges[i].begin(), edges[i].end());
    if (nb.size() < static_cast<std::size_t>(__builtin_popcount(mask))) return false;
  }
  return true;
}

Vector random_vector(Eigen::Index d, SplitMix64 &rng) {
  Vector v(d);
  for (auto &z : v) z = Complex(rng.normal(), rng.normal());
  return v / v.norm();
}

}  // namespace

TEST(BuildVh, LowDegreeGivesEmptyVh) {
  Hypergraph g{6, 3, {{0, 1, 2}, {3, 4, 5}, {0, 3, 5}}};
  const auto p = build_vh(g, 2.0);
  EXPECT_TRUE(p.v_h.empty());
  EXPECT_TRUE(p.h_edges.empty());
  EXPECT_EQ(p.l_edges.size(), 3u);
  EXPECT_THROW(build_vh(g, 0.0), InvalidArgument);
}

TEST(BuildVh, HandTracedExample) {
  enum { a, b, c, d, e, f, gg, h, x, y };
  Hypergraph g{10, 3, {{a, b, c}, {a, d, e}, {a, f, gg}, {b, d, h}, {b, f, x}, {b, c, y}}};
  for (auto &edge : g.edges) std::ranges::sort(edge);
  const auto p = build_vh(g, 2.0);
  ASSERT_EQ(p.vertex_layers.size(), 3u);
  EXPECT_EQ(p.vertex_layers[0], (std::vector<int>{a, b}));
  EXPECT_EQ(p.edge_layers[0], (std::vector<std::size_t>{0}));
  EXPECT_EQ(p.vertex_layers[1], (std::vector<int>{c}));
  EXPECT_EQ(p.edge_layers[1], (std::vector<std::size_t>{5}));
  EXPECT_EQ(p.vertex_layers[2], (std::vector<int>{y}));
  EXPECT_EQ(p.v_h, (std::vector<int>{a, b, c, y}));
  EXPECT_EQ(p.h_edges, (std::vector<std::size_t>{0, 5}));
  EXPECT_TRUE(audit_partition(g, p).empty());
}

TEST(BuildVh, StrictCutoff) {
  Hypergraph g{5, 2, {{0, 1}, {0, 2}, {3, 4}}};
  EXPECT_TRUE(build_vh(g, 2.0).v_h.empty());
  EXPECT_EQ(build_vh(g, 1.999).vertex_layers[0], (std::vector<int>{0}));
}

TEST(BuildVh, MatchesDefinitionAndAuditOnRandomGraphs) {
  SplitMix64 rng(21);
  for (int t = 0; t < 60; ++t) {
    const int n = 20 + static_cast<int>(rng.below(200));
    const int k = 2 + static_cast<int>(rng.below(3));
    const auto g = sample_gknm(n, static_cast<std::int64_t>(rng.below(3 * n)), k, rng);
    const double cutoff = 0.5 + static_cast<double>(rng.below(8));
    const auto p = build_vh(g, cutoff);
    const auto ref = naive_build_vh(g, cutoff);
    ASSERT_EQ(p.vertex_layers, ref.vertex_layers);
    ASSERT_EQ(p.edge_layers, ref.edge_layers);
    ASSERT_EQ(p.v_h, ref.v_h);
    ASSERT_EQ(p.h_edges, ref.h_edges);
    ASSERT_TRUE(audit_partition(g, p).empty());
  }
}

TEST(BuildVh, LargeRandomAudit) {
  SplitMix64 rng(22);
  const auto g = sample_gknm(10000, 30000, 3, rng);
  const auto p = build_vh(g, 9.0);  // mean degree
  EXPECT_FALSE(p.v_h.empty());
  const auto issues = audit_partition(g, p);
  EXPECT_TRUE(issues.empty()) << issues.front();
}

TEST(BuildVh, OrderIndependent) {
  SplitMix64 rng(23);
  for (int t = 0; t < 20; ++t) {
    const int n = 300;
    const auto g = sample_gknm(n, 600, 3, rng);
    const auto p = build_vh(g, 5.0);
    // Relabel vertices and shuffle edges.
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    std::vector<std::size_t> eperm(g.size());
    std::iota(eperm.begin(), eperm.end(), 0);
    for (std::size_t i = eperm.size() - 1; i > 0; --i) std::swap(eperm[i], eperm[rng.below(i + 1)]);
    Hypergraph h{n, 3, {}};
    for (auto e : eperm) {
      std::vector<int> edge;
      for (int v : g.edges[e]) edge.push_back(perm[v]);
      std::ranges::sort(edge);
      h.edges.push_back(edge);
    }
    const auto q = build_vh(h, 5.0);
    std::set<int> mapped_vh;
    for (int v : p.v_h) mapped_vh.insert(perm[v]);
    EXPECT_EQ(mapped_vh, std::set<int>(q.v_h.begin(), q.v_h.end()));
    std::set<std::size_t> h_orig;
    for (auto e : q.h_edges) h_orig.insert(eperm[e]);
    EXPECT_EQ(h_orig, std::set<std::size_t>(p.h_edges.begin(), p.h_edges.end()));
  }
}

TEST(BuildVh, RaisingCutoffNeverEnlargesV0) {
  SplitMix64 rng(24);
  const auto g = sample_gknm(500, 1500, 3, rng);
  std::size_t prev = g.n_vertices + 1;
  for (double cutoff = 0.5; cutoff < 20; cutoff += 0.5) {
    const auto v0 = build_vh(g, cutoff).vertex_layers[0].size();
    EXPECT_LE(v0, prev);
    prev = v0;
  }
}

TEST(Hall, SmallExamples) {
  const std::vector<std::vector<int>> triangle{{0, 1}, {1, 2}, {0, 2}};
  const auto ok = hall_matching(triangle, 3);
  ASSERT_TRUE(ok.complete);
  std::set<int> used(ok.matching.begin(), ok.matching.end());
  EXPECT_EQ(used.size(), 3u);

  const std::vector<std::vector<int>> copies{{0, 1}, {0, 1}, {0, 1}};
  const auto bad = hall_matching(copies, 2);
  EXPECT_FALSE(bad.complete);
  EXPECT_EQ(bad.violator.size(), 3u);
  EXPECT_EQ(bad.violator_vertices, (std::vector<int>{0, 1}));

  EXPECT_TRUE(hall_matching(std::vector<std::vector<int>>{}, 0).complete);
}

TEST(Hall, AgreesWithExhaustiveOracle) {
  SplitMix64 rng(25);
  int failures_seen = 0;
  for (int t = 0; t < 1000; ++t) {
    const int m = 1 + static_cast<int>(rng.below(12));
    const int n = 2 + static_cast<int>(rng.below(12));
    const int k = 1 + static_cast<int>(rng.below(std::min(n, 4)));
    const auto g = sample_gknm(n, m, k, rng);
    const auto res = hall_matching(g.edges, n);
    const bool oracle = hall_holds_exhaustive(g.edges);
    ASSERT_EQ(res.complete, oracle) << "trial " << t;
    if (res.complete) {
      std::set<int> used;
      for (std::size_t e = 0; e < g.edges.size(); ++e) {
        ASSERT_TRUE(std::ranges::find(g.edges[e], res.matching[e]) != g.edges[e].end());
        ASSERT_TRUE(used.insert(res.matching[e]).second);
      }
    } else {
      ++failures_seen;
      std::set<int> nb;
      for (auto e : res.violator) nb.insert(g.edges[e].begin(), g.edges[e].end());
      ASSERT_LT(nb.size(), res.violator.size());
      ASSERT_EQ(std::vector<int>(nb.begin(), nb.end()), res.violator_vertices);
    }
  }
  EXPECT_GT(failures_seen, 50);
}

TEST(Hall, LargeGraphIsFast) {
  SplitMix64 rng(26);
  const auto g = sample_gknm(100000, 80000, 3, rng);
  const auto res = hall_matching(g.edges, g.n_vertices);
  EXPECT_TRUE(res.complete);
}

TEST(Glue, TransformExamples) {
  // |v> = |000> with qubit 0 in V_H: Q = |00><00| on the remaining two qubits.
  Vector v = Vector::Zero(8);
  v(0) = 1;
  QsatInstance inst{3, 3, {Projector{{0, 1, 2}, v}}};
  const std::vector<int> vh{0};
  auto res = glue_transform(inst, vh);
  ASSERT_EQ(res.decoupled.size(), 1u);
  EXPECT_EQ(res.decoupled.projectors[0].rank(), 1);
  EXPECT_EQ(res.decoupled.projectors[0].qubits, (std::vector<int>{0, 1}));
  EXPECT_NEAR(std::abs(res.decoupled.projectors[0].vectors(0, 0)), 1.0, 1e-12);
  EXPECT_EQ(res.pivot[0], 0);

  // (|0>|u> + |1>|w>)/sqrt2 with u ⊥ w, V_H qubit in the middle.
  SplitMix64 rng(27);
  const Vector u = random_vector(4, rng);
  Vector w = random_vector(4, rng);
  w -= u * (u.adjoint() * w)(0);
  w.normalize();
  Vector mid = Vector::Zero(8);
  for (int l = 0; l < 8; ++l) {
    const int bit = (l >> 1) & 1;
    const int rest = ((l >> 2) << 1) | (l & 1);
    mid(l) = (bit ? w(rest) : u(rest)) / std::sqrt(2.0);
  }
  QsatInstance two{4, 3, {Projector{{3, 1, 0}, mid}}};
  const std::vector<int> vh1{1};
  res = glue_transform(two, vh1);
  ASSERT_EQ(res.decoupled.projectors[0].rank(), 2);
  EXPECT_EQ(res.remaining_qubits, (std::vector<int>{0, 2, 3}));
  EXPECT_EQ(res.decoupled.projectors[0].qubits, (std::vector<int>{2, 0}));
  const Matrix proj = res.decoupled.projectors[0].local_matrix();
  EXPECT_LE((proj - (u * u.adjoint() + w * w.adjoint())).norm(), 1e-12);

  // Two V_H qubits in one non-H projector is a partition violation.
  const std::vector<int> vh2{0, 1};
  QsatInstance viol{3, 3, {Projector{{0, 1, 2}, v}, Projector{{0, 1}, Vector::Unit(4, 0)}}};
  EXPECT_THROW(glue_transform(viol, vh2), InvalidArgument);
}

TEST(Glue, DecouplingSoundness) {
  SplitMix64 rng(28);
  for (int t = 0; t < 20; ++t) {
    const auto p = random_rank1_projector({0, 1, 2}, rng);
    QsatInstance inst{3, 3, {p}};
    const std::vector<int> vh{static_cast<int>(rng.below(3))};
    const auto res = glue_transform(inst, vh);
    const auto &q = res.decoupled.projectors[0];
    ASSERT_EQ(q.rank(), 2);
    // A state on the other two qubits annihilated by Q.
    const Matrix kernel = Eigen::HouseholderQR<Matrix>(q.vectors).householderQ() * Matrix::Identity(4, 4);
    const Vector phi = kernel.rightCols(2) * random_vector(2, rng);
    StateVector phi_l{2, phi};
    for (int ext = 0; ext < 100; ++ext) {
      const StateVector phi_h{1, random_vector(2, rng)};
      const auto glued = glue_states(inst, vh, phi_h, phi_l);
      ASSERT_LE(check_state(inst, glued).max_residual, 1e-12);
    }
  }
}

TEST(Glue, EmptyHAndPassThrough) {
  SplitMix64 rng(29);
  // H empty: any phi_H works. Projector on {1,2,3} has no V_H qubit and passes through unchanged.
  QsatInstance inst{4, 3, {random_rank1_projector({0, 1, 2}, rng), random_rank1_projector({1, 2, 3}, rng)}};
  const std::vector<int> vh{0};
  const auto res = glue_transform(inst, vh);
  EXPECT_TRUE(res.h_projectors.empty());
  EXPECT_EQ(res.pivot[1], -1);
  EXPECT_EQ(res.decoupled.projectors[1].vectors, inst.projectors[1].vectors);
  const auto phi_l = find_satisfying_state(res.decoupled);
  ASSERT_TRUE(phi_l);
  const auto glued = glue_states(inst, vh, StateVector{1, random_vector(2, rng)}, *phi_l);
  EXPECT_TRUE(check_state(inst, glued).pass);
}

TEST(Glue, PreconditionFailuresReported) {
  SplitMix64 rng(30);
  QsatInstance inst{6, 3, {random_rank1_projector({0, 1, 2}, rng), random_rank1_projector({2, 4, 5}, rng)}};
  const std::vector<int> vh{0, 1, 2};
  // phi_H = the forbidden state itself.
  StateVector bad_h{3, inst.projectors[0].vectors.col(0)};
  try {
    glue_states(inst, vh, bad_h, StateVector{3, random_vector(8, rng)});
    FAIL() << "expected GluePreconditionFailed";
  } catch (const GluePreconditionFailed &e) {
    EXPECT_EQ(e.part, "H");
    EXPECT_NEAR(e.residuals[0], 1.0, 1e-12);
  }
}

TEST(Glue, CraftedPipeline) {
  SplitMix64 rng(31);
  for (int t = 0; t < 20; ++t) {
    const auto c = crafted::make_glue_case(8 + static_cast<int>(rng.below(3)), t % 2 == 1, rng);
    const auto glued = glue_pipeline(c.inst, c.v_h);
    ASSERT_TRUE(glued);
    const auto check = check_state(c.inst, *glued);
    ASSERT_TRUE(check.pass) << check.max_residual;
    EXPECT_NEAR(glued->amplitudes.norm(), 1.0, 1e-10);
  }
}

TEST(Glue, DenseDecoupledInstanceStillGlues) {
  // Outside qubits 3 and 5 sit in two L projectors each (above the condition-2 bound at k=3),
  // but L' is still satisfiable, and gluing only needs that.
  SplitMix64 rng(32);
  QsatInstance inst{8, 3, {random_rank1_projector({0, 1, 2}, rng)}};
  inst.projectors.push_back(random_rank1_projector({0, 3, 4}, rng));
  inst.projectors.push_back(random_rank1_projector({3, 5, 6}, rng));
  inst.projectors.push_back(random_rank1_projector({5, 6, 7}, rng));
  const std::vector<int> vh{0, 1, 2};
  EXPECT_FALSE(hybrid_certificate(inst, 2.0).l_degree_ok);
  const auto glued = glue_pipeline(inst, vh);
  ASSERT_TRUE(glued);
  EXPECT_TRUE(check_state(inst, *glued).pass);
}

TEST(Hybrid, Examples) {
  Hypergraph disjoint{9, 3, {{0, 1, 2}, {3, 4, 5}, {6, 7, 8}}};
  const auto ok = hybrid_certificate(disjoint, 1.0);
  EXPECT_TRUE(ok.passed()) << ok.reason;
  EXPECT_TRUE(ok.partition.v_h.empty());

  Hypergraph copies{4, 2, {{0, 1}, {0, 1}, {0, 1}}};
  const auto bad = hybrid_certificate(copies, 1.0);
  EXPECT_FALSE(bad.passed());
  EXPECT_FALSE(bad.matching_ok);
  EXPECT_EQ(bad.hall_violator.size(), 3u);
  EXPECT_EQ(bad.hall_violator_vertices, (std::vector<int>{0, 1}));

  // Crowded L: qubit 0 in many L edges at k=3 fails condition 2 with qubit 0 as witness.
  Hypergraph crowded{9, 3, {{0, 1, 2}, {0, 3, 4}, {0, 5, 6}}};
  const auto c = hybrid_certificate(crowded, 5.0);
  EXPECT_FALSE(c.l_degree_ok);
  EXPECT_EQ(*c.l_degree_witness, 0);

  SplitMix64 rng(33);
  for (int t = 0; t < 10; ++t) {
    const auto g = crafted::make_glue_case(12, true, rng);
    EXPECT_TRUE(hybrid_certificate(g.inst, 2.0).single_vh_qubit_ok);
  }
  QsatInstance rank2{3, 3, {Projector{{0, 1, 2}, Matrix::Identity(8, 2)}}};
  EXPECT_THROW(hybrid_certificate(rank2, 1.0), InvalidArgument);
}

TEST(Hybrid, DefaultCutoff) {
  EXPECT_NEAR(default_cutoff(15), std::ldexp(1.0, 15) / (4 * kE * 15), 1e-12);
  EXPECT_NEAR(default_cutoff(15), 200.9, 0.05);
}

TEST(Region, ClosedForms) {
  const Partition empty;
  const auto r = region_report(100, 4, 1.0, 2.0, empty);
  EXPECT_NEAR(r.gamma, std::exp(-2.0), 1e-15);
  EXPECT_NEAR(r.gamma, 0.1353, 1e-4);
  EXPECT_NEAR(r.epsilon0, 1.0 / (12 * 4 * 4), 1e-15);

  const double d12 = default_cutoff(12);
  const double alpha = d12 / (3 * 12);
  const auto r12 = region_report(1000, 12, alpha, d12, empty);
  EXPECT_LE(r12.epsilon0, 1.0 / (12 * d12 * 144) * (1 + 1e-12));
  EXPECT_TRUE(r12.regime_ok);

  const auto again = region_report(1000, 12, alpha, d12, empty);
  EXPECT_EQ(again.gamma, r12.gamma);
  EXPECT_EQ(again.epsilon0, r12.epsilon0);
  EXPECT_THROW(region_report(10, 2, 1.0, 1.0, empty), InvalidArgument);
}

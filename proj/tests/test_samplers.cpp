#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <set>
#include <string>

#include "ktree/metrics.hpp"
#include "ktree/samplers.hpp"
#include "ktree/series.hpp"
#include "ktree/stats.hpp"

using namespace ktree;

TEST_CASE("samplers are deterministic in the seed") {
  const auto p = ModelParams::make(2, OmegaSet::naturals());
  const auto draw = [&](std::uint64_t seed) {
    RngHandle rng(seed);
    return canonical_code(conditioned_coding_tree(p, 12, rng),
                          CodeMode::Labeled);
  };
  CHECK(draw(42) == draw(42));
  CHECK(draw(42) != draw(43));  // 12-black trees practically never collide
  RngHandle r1(7), r2(7);
  CHECK(canonical_code(boltzmann_B(p, r1), CodeMode::Labeled) ==
        canonical_code(boltzmann_B(p, r2), CodeMode::Labeled));
}

TEST_CASE("boltzmann_B size law at n=1") {
  // P[|GB| = 1] = rho / B(rho) = 1/4 for k=2, omega={0,1,2}
  const auto p = ModelParams::make(2, OmegaSet::finite({0, 1, 2}));
  RngHandle rng(11);
  const int draws = 100000;
  int ones = 0;
  for (int i = 0; i < draws; ++i) {
    const auto d = boltzmann_B_draw(p, rng, 2);
    ones += d.completed && d.tree.n_black() == 1;
  }
  const double expect = 0.25;
  const double se = std::sqrt(expect * (1 - expect) / draws);
  CHECK(std::abs(static_cast<double>(ones) / draws - expect) < 3 * se);
}

TEST_CASE("boltzmann samplers emit valid coding trees") {
  RngHandle rng(13);
  for (const auto& [k, omega] :
       std::vector<std::pair<int, OmegaSet>>{{1, OmegaSet::naturals()},
                                             {2, OmegaSet::finite({0, 1, 2})},
                                             {3, OmegaSet::naturals()}}) {
    const auto p = ModelParams::make(k, omega);
    for (int rep = 0; rep < 200; ++rep) {
      SampleReport rep_b;
      const auto b = boltzmann_B(p, rng, {100000, 64}, &rep_b);
      CHECK_NOTHROW(b.validate(&omega));
      CHECK(b.nodes[b.root].children.size() == 1);
      CHECK(rep_b.attempts >= 1);
      const auto c = boltzmann_C(p, rng, {100000, 64});
      CHECK_NOTHROW(c.validate(&omega));
    }
  }
}

TEST_CASE("boltzmann_C basics") {
  const auto p = ModelParams::make(2, OmegaSet::finite({0, 1, 2}));
  RngHandle rng(17);
  const int draws = 100000;
  int empty = 0;
  std::map<int, std::uint64_t> root_deg;
  for (int i = 0; i < draws; ++i) {
    const auto d = boltzmann_C_draw(p, rng, 50000);
    if (!d.completed) continue;
    empty += d.tree.n_black() == 0;
    ++root_deg[static_cast<int>(d.tree.nodes[d.tree.root].children.size())];
  }
  // P[size = 0] = 1 / C(rho) with C(rho) = 1 + 1 + 1/2 = 5/2
  const double expect = 0.4;
  const double se = std::sqrt(expect * (1 - expect) / draws);
  CHECK(std::abs(static_cast<double>(empty) / draws - expect) < 3 * se);
  // unconditioned root degree is exactly eta_circ
  const double tv = stats::total_variation_exact(
      root_deg, p.eta_circ().values(), p.eta_circ().probs());
  CHECK(tv < 0.01);
}

TEST_CASE("boltzmann_C size law matches the series counts") {
  const auto p = ModelParams::make(2, OmegaSet::finite({0, 1, 2}));
  const auto lc = labelled_counts(2, p.omega(), 5);
  const double c_rho = p.c_rho();
  RngHandle rng(71);
  const int draws = 200000;
  std::vector<long> counts(7, 0);
  for (int i = 0; i < draws; ++i) {
    const auto d = boltzmann_C_draw(p, rng, 6);
    if (d.completed && d.tree.n_black() <= 5) ++counts[d.tree.n_black()];
  }
  double fact = 1;
  for (int n = 0; n <= 5; ++n) {
    if (n > 0) fact *= n;
    const double expect = lc.c[n].get_d() * std::pow(p.rho(), n) / (fact * c_rho);
    const double se = std::sqrt(expect * (1 - expect) / draws);
    CHECK(std::abs(static_cast<double>(counts[n]) / draws - expect) < 4 * se);
  }
}

TEST_CASE("reduced conditioned sampler is uniform over the reduced class") {
  const auto p = ModelParams::make(2, OmegaSet::finite({0, 1, 2}));
  std::map<std::string, std::uint64_t> support;
  for (const auto& t : exact_small_sampler(p, 3, RootMode::Reduced))
    support[canonical_code(t, CodeMode::Labeled)] = 0;
  REQUIRE(support.size() == 30);  // b(3)
  RngHandle rng(73);
  const ConditionedSampler s(p, 3, {Strategy::Exact, RootMode::Reduced});
  std::map<std::string, std::uint64_t> counts;
  for (int i = 0; i < 30000; ++i) {
    const auto key = canonical_code(s.sample(rng), CodeMode::Labeled);
    REQUIRE(support.count(key) == 1);
    ++counts[key];
  }
  CHECK(stats::chi_square_uniform(counts, support.size()).pvalue > 1e-3);
}

TEST_CASE("conditioned sampler strategies agree") {
  const auto p = ModelParams::make(2, OmegaSet::finite({0, 1, 2}));
  RngHandle rng(19);
  std::map<std::string, std::uint64_t> a, b;
  const ConditionedSampler sa(p, 3, {Strategy::Rejection, RootMode::Free});
  const ConditionedSampler sb(p, 3, {Strategy::Exact, RootMode::Free});
  for (int i = 0; i < 20000; ++i) {
    ++a[canonical_code(sa.sample(rng), CodeMode::Labeled)];
    ++b[canonical_code(sb.sample(rng), CodeMode::Labeled)];
  }
  const auto res = stats::chi_square_two_sample(a, b);
  CHECK(res.pvalue > 1e-3);
}

TEST_CASE("conditioned sampler respects the span condition") {
  // omega = {0,1,3} gives Omega_out = {0,2}: reduced sizes are odd only
  const auto w = OmegaSet::finite({0, 1, 3});
  const auto p = ModelParams::make(2, w);
  const auto lc = labelled_counts(2, w, 4);
  CHECK(lc.c[2] == 0);
  CHECK(lc.b[2] == 0);
  CHECK(lc.c[3] != 0);
  CHECK_THROWS_AS(ConditionedSampler(p, 2, {Strategy::Exact, RootMode::Free}),
                  InfeasibleSize);
  CHECK_THROWS_AS(ConditionedSampler(p, 2, {Strategy::Rejection, RootMode::Free}),
                  InfeasibleSize);
  RngHandle rng(23);
  const auto c = conditioned_coding_tree(p, 3, rng);
  CHECK(c.n_black() == 3);
  CHECK_NOTHROW(c.validate(&w));
}

TEST_CASE("conditioned sampler output is valid across models and sizes") {
  RngHandle rng(29);
  for (const auto& [k, omega] :
       std::vector<std::pair<int, OmegaSet>>{{1, OmegaSet::naturals()},
                                             {2, OmegaSet::finite({0, 1, 2})},
                                             {3, OmegaSet::naturals()}}) {
    const auto p = ModelParams::make(k, omega);
    for (int n : {1, 2, 17, 160}) {
      SampleReport rep;
      const auto c = conditioned_coding_tree(p, n, rng, {}, &rep);
      CHECK(c.n_black() == n);
      CHECK_NOTHROW(c.validate(&omega));
      CHECK(rep.attempts >= 1);
      // reduced variant
      const auto b = conditioned_coding_tree(
          p, n, rng, {Strategy::Exact, RootMode::Reduced});
      CHECK(b.n_black() == n);
      CHECK(b.nodes[b.root].children.size() == 1);
    }
  }
}

TEST_CASE("k=1 conditioned trees are uniform Cayley trees") {
  // root-child count of a uniform rooted labelled tree, exhaustive oracle n=4
  const auto p = ModelParams::make(1, OmegaSet::naturals());
  const auto all = exact_small_sampler(p, 4);
  REQUIRE(all.size() == 125);  // c(4) = 5^3
  std::map<int, std::uint64_t> oracle;
  for (const auto& t : all)
    ++oracle[static_cast<int>(t.nodes[t.root].children.size())];
  RngHandle rng(31);
  const ConditionedSampler s(p, 4);
  std::map<int, std::uint64_t> emp;
  const int draws = 30000;
  for (int i = 0; i < draws; ++i)
    ++emp[static_cast<int>(s.sample(rng).nodes[0].children.size())];
  std::vector<int> vals;
  std::vector<double> probs;
  for (const auto& [d, cnt] : oracle) {
    vals.push_back(d);
    probs.push_back(static_cast<double>(cnt) / all.size());
  }
  CHECK(stats::total_variation_exact(emp, vals, probs) < 0.02);
}

TEST_CASE("exhaustive enumeration") {
  const auto p2 = ModelParams::make(2, OmegaSet::naturals());
  CHECK(exact_small_sampler(p2, 2).size() == 5);  // c(2) = 5
  const auto pf = ModelParams::make(2, OmegaSet::finite({0, 1, 2}));
  CHECK(exact_small_sampler(pf, 1).size() == 1);
  CHECK_THROWS_AS(exact_small_sampler(pf, 7), CapExceeded);
  // all enumerated trees are valid and distinct
  const auto all = exact_small_sampler(pf, 3);
  std::set<std::string> codes;
  const auto omega = OmegaSet::finite({0, 1, 2});
  for (const auto& t : all) {
    CHECK_NOTHROW(t.validate(&omega));
    codes.insert(canonical_code(t, CodeMode::Labeled));
  }
  CHECK(codes.size() == all.size());
}

TEST_CASE("spine increments") {
  SECTION("k=1 is deterministic") {
    const auto p = ModelParams::make(1, OmegaSet::naturals());
    RngHandle rng(37);
    const auto z = spine_increments(p, 20, rng);
    for (int v : z) CHECK(v == 1);
  }
  SECTION("mean approaches kH_k for generic blocks") {
    for (int k : {2, 3}) {
      const auto p = ModelParams::make(k, OmegaSet::naturals());
      RngHandle rng(41);
      double sum = 0;
      long cnt = 0;
      for (int rep = 0; rep < 10000; ++rep) {
        const auto z = spine_increments(p, 5, rng);
        for (std::size_t i = 1; i < z.size(); ++i) {
          sum += z[i];
          ++cnt;
        }
      }
      CHECK(std::abs(sum / cnt - p.m_k()) / p.m_k() < 0.03);
    }
  }
  SECTION("the fast marginal agrees with the tree construction") {
    const auto p = ModelParams::make(3, OmegaSet::naturals());
    RngHandle rng(43);
    std::map<std::string, std::uint64_t> fast, tree;
    for (int rep = 0; rep < 6000; ++rep) {
      for (int z : spine_increments(p, 4, rng)) ++fast[std::to_string(z)];
      const auto e = size_biased_tree(p, 4, rng, {false, 0, 0});
      for (int z : e.zeta) {
        CHECK(z >= 1);
        ++tree[std::to_string(z)];
      }
    }
    CHECK(stats::chi_square_two_sample(fast, tree).pvalue > 1e-3);
  }
}

TEST_CASE("size-biased tree structure") {
  const auto omega = OmegaSet::naturals();
  const auto p = ModelParams::make(2, omega);
  RngHandle rng(43);
  for (int rep = 0; rep < 50; ++rep) {
    const auto e = size_biased_tree(p, 3, rng, {true, 200000, 256});
    CHECK_NOTHROW(e.tree.validate(&omega));
    REQUIRE(e.heirs.size() == 3);
    REQUIRE(e.zeta.size() == 3);
    const auto dt = algorithm1(e.tree);
    const auto bd = block_decompose(e.tree, dt);
    // zeta values partition the spine and match the block levels
    CHECK(e.spine.size() ==
          static_cast<std::size_t>(e.zeta[0] + e.zeta[1] + e.zeta[2]));
    std::size_t pos = 0;
    for (int blk = 0; blk < 3; ++blk)
      for (int j = 0; j < e.zeta[blk]; ++j, ++pos)
        CHECK(dt.black_dist[e.spine[pos]] == blk + 1);
    for (int blk = 0; blk < 3; ++blk) {
      const int heir = e.heirs[blk];
      // the heir is good: one white child carries a constant sequence
      bool good = false;
      for (int w : e.tree.nodes[heir].children) {
        const auto& s = dt.white_seq[w];
        bool constant = true;
        for (int v : s) constant &= v == s[0];
        good |= constant;
      }
      CHECK(good);
      CHECK(bd.blocks[bd.block_of[heir]].level == blk + 1);
    }
  }
}

TEST_CASE("size-biased tree with the spine forgotten is Boltzmann-uniform") {
  // Over pointed pairs (T, heir in block 1) of a fixed size, the enriched
  // sampler is uniform; the pair count comes from exhaustive enumeration.
  const auto omega = OmegaSet::finite({0, 1, 2});
  const auto p = ModelParams::make(2, omega);
  const int n = 3;
  std::map<std::string, std::uint64_t> support;
  for (const auto& t : exact_small_sampler(p, n, RootMode::Reduced)) {
    const auto dt = algorithm1(t);
    const auto bd = block_decompose(t, dt);
    const auto code = canonical_code(t, CodeMode::Labeled);
    for (int b : bd.blocks[0].blacks) {
      bool good = false;
      for (int w : t.nodes[b].children) {
        const auto& s = dt.white_seq[w];
        bool constant = true;
        for (int v : s) constant &= v == s[0];
        good |= constant;
      }
      if (good) support[code + "#" + std::to_string(t.nodes[b].label)] = 0;
    }
  }
  REQUIRE(support.size() > 10);

  RngHandle rng(47);
  std::map<std::string, std::uint64_t> counts;
  int accepted = 0;
  for (int tries = 0; tries < 900000 && accepted < 25000; ++tries) {
    EnrichedTree e;
    try {
      e = size_biased_tree(p, 1, rng, {true, 64, 0});
    } catch (const CapExceeded&) {
      continue;
    }
    if (e.tree.n_black() != n) continue;
    const std::string key =
        canonical_code(e.tree, CodeMode::Labeled) + "#" +
        std::to_string(e.tree.nodes[e.heirs[0]].label);
    REQUIRE(support.count(key) == 1);
    ++counts[key];
    ++accepted;
  }
  REQUIRE(accepted == 25000);
  const auto res = stats::chi_square_uniform(counts, support.size());
  CHECK(res.pvalue > 1e-3);
}

TEST_CASE("kesten tree") {
  const auto p = ModelParams::make(2, OmegaSet::finite({0, 1, 2}));
  RngHandle rng(53);
  SECTION("h=0 is a bare root") {
    const auto t = kesten_tree(p, 0, rng);
    CHECK(t.size() == 1);
  }
  SECTION("root degree follows eta-hat") {
    std::map<int, std::uint64_t> emp;
    for (int i = 0; i < 100000; ++i)
      ++emp[static_cast<int>(
          kesten_tree(p, 1, rng).nodes[0].children.size())];
    CHECK(stats::total_variation_exact(emp, p.eta_hat().values(),
                                       p.eta_hat().probs()) < 0.01);
  }
  SECTION("exactly one mutant per generation") {
    for (int rep = 0; rep < 100; ++rep) {
      std::vector<int> spine;
      const auto t = kesten_tree(p, 4, rng, &spine);
      REQUIRE(spine.size() == 4);
      // spine depths are 1..4 and each spine vertex parents the next
      int depth = 0;
      for (int v : spine) {
        int d = 0;
        for (int u = v; t.nodes[u].parent >= 0; u = t.nodes[u].parent) ++d;
        CHECK(d == ++depth);
      }
      for (std::size_t i = 1; i < spine.size(); ++i)
        CHECK(t.nodes[spine[i]].parent == spine[i - 1]);
      CHECK(t.height() <= 4);
    }
  }
}

TEST_CASE("largest component deficit") {
  const auto p = ModelParams::make(2, OmegaSet::naturals());
  RngHandle rng(59);
  const auto reports = largest_deficit(p, 40, rng, 200);
  for (const auto& r : reports) {
    CHECK(r.size == 40);
    CHECK(r.largest_component_deficit >= 0);
    CHECK(r.largest_component_deficit < 40);
  }
  // a reduced tree has a single component: deficit would be zero
  ConditionedOptions opts{Strategy::Exact, RootMode::Reduced};
  const auto c = conditioned_coding_tree(p, 25, rng, opts);
  const auto sizes = root_component_sizes(c);
  REQUIRE(sizes.size() == 1);
  CHECK(sizes[0] == 25);
}

TEST_CASE("standalone blocks have unit mean good count") {
  const auto p = ModelParams::make(3, OmegaSet::naturals());
  RngHandle rng(61);
  double goods = 0;
  const int reps = 50000;
  for (int i = 0; i < reps; ++i) {
    const auto c = sample_block(p, rng);
    const auto dt = algorithm1(c, std::vector<int>(3, 1));
    const auto bd = block_decompose(c, dt);
    goods += bd.blocks[0].good_count;
  }
  CHECK(std::abs(goods / reps - 1.0) < 0.03);
}

TEST_CASE("kesten neighborhood matches large conditioned neighborhoods") {
  // The full code distribution has a long tail of rare shapes, so empirical
  // TV carries a noise floor; compare a coarse joint statistic instead and
  // the frequency of the single most common shape.
  const auto p = ModelParams::make(2, OmegaSet::naturals());
  RngHandle rng(67);
  std::map<std::string, std::uint64_t> finite_side, limit_side;
  std::map<std::string, std::uint64_t> finite_codes, limit_codes;
  const ConditionedSampler s(p, 300);
  const int draws = 4000;
  for (int i = 0; i < draws; ++i) {
    const auto sub = neighborhood_subtree(s.sample(rng), 1);
    ++finite_side["d" + std::to_string(sub.nodes[sub.root].children.size()) +
                  "b" + std::to_string(sub.n_black())];
    ++finite_codes[canonical_code(sub, CodeMode::ShapeUnordered)];
    const auto kc = kesten_neighborhood(p, 1, rng);
    ++limit_side["d" + std::to_string(kc.nodes[kc.root].children.size()) +
                 "b" + std::to_string(kc.n_black())];
    ++limit_codes[canonical_code(kc, CodeMode::ShapeUnordered)];
  }
  // ~0.05 noise floor at this sample size plus O(n^{-1/2}) finite-size bias;
  // a wrong offspring or spine law lands well above 0.3
  CHECK(stats::total_variation(finite_side, limit_side) < 0.12);
  std::string top;
  std::uint64_t best = 0;
  for (const auto& [code, cnt] : limit_codes)
    if (cnt > best) {
      best = cnt;
      top = code;
    }
  const double p_lim = static_cast<double>(best) / draws;
  const double p_fin = static_cast<double>(finite_codes[top]) / draws;
  CHECK(std::abs(p_lim - p_fin) < 0.02);
}

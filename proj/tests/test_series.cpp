#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "ktree/samplers.hpp"
#include "ktree/series.hpp"

using namespace ktree;

TEST_CASE("closed forms for N0") {
  for (int k : {1, 2, 3}) {
    const auto rep = closed_form_check(k, 10);
    INFO("k=" << k);
    CHECK(rep.all_pass());
  }
  const auto lc2 = labelled_counts(2, OmegaSet::naturals(), 3);
  CHECK(lc2.b[3] == 36);   // (kn)^{n-1}
  CHECK(lc2.c[3] == 49);   // (kn+1)^{n-1}
  const auto lc1 = labelled_counts(1, OmegaSet::naturals(), 3);
  CHECK(lc1.b[3] == 9);    // n^{n-1}
}

TEST_CASE("base cases and finite degree sets") {
  const auto w012 = OmegaSet::finite({0, 1, 2});
  const auto lc = labelled_counts(2, w012, 4);
  CHECK(lc.b[0] == 0);
  CHECK(lc.c[0] == 1);
  CHECK(lc.b[1] == 1);
  CHECK(lc.b[2] == 4);
  // every (k, omega) has a unique single-hedron tree
  for (int k : {1, 2, 3}) {
    const auto lcn = labelled_counts(k, OmegaSet::naturals(), 1);
    CHECK(lcn.b[1] == 1);
  }
}

TEST_CASE("front-rooted counts") {
  CHECK(partial_ktree_count(2, OmegaSet::naturals(), 3) == 70);
  CHECK(partial_ktree_count(1, OmegaSet::naturals(), 3) == 16);
  CHECK(partial_ktree_count(2, OmegaSet::finite({0, 1, 2}), 1) == 1);
  // integrality of binom(n+k,k) c(n) / (kn+1) across a grid
  for (int k : {1, 2, 3})
    for (int n = 1; n <= 8; ++n) {
      partial_ktree_count(k, OmegaSet::naturals(), n);
      if (k >= 2) partial_ktree_count(k, OmegaSet::finite({0, 1, 2}), n);
    }
}

TEST_CASE("fixed point solves its own equation exactly") {
  // recompute x * C_circ(B)^k from the final series and compare term-by-term
  for (const auto& [k, omega] :
       std::vector<std::pair<int, OmegaSet>>{{2, OmegaSet::naturals()},
                                             {3, OmegaSet::finite({0, 1, 2})},
                                             {2, OmegaSet::finite({0, 1, 3})}}) {
    const int N = 12;
    const auto lc = labelled_counts(k, omega, N);
    const auto cc = detail::egf_exp_like(lc.b_series, omega, true, N);
    const auto pw = detail::egf_pow(cc, k, N);
    for (int n = 1; n <= N; ++n)
      CHECK(lc.b_series.coeffs[n] == pw.coeffs[n - 1]);
    CHECK(lc.b_series.coeffs[0] == 0);
  }
}

namespace {

// Independent expansion of the Set decomposition: c(n) as a sum over ordered
// compositions of n into d >= 1 parts (d in Omega) of multinomial(n; parts)
// times the product of b-counts, divided by d!.
mpz_class set_decomposition_c(const LabelledCounts& lc, const OmegaSet& omega,
                              int n) {
  if (n == 0) return omega.contains(0) ? 1 : 0;
  mpq_class total(0);
  const std::function<void(int, int, mpq_class)> rec =
      [&](int remaining, int parts, mpq_class acc) {
        if (remaining == 0) {
          if (parts > 0 && omega.contains(parts)) {
            mpq_class term = acc;
            for (int i = 2; i <= parts; ++i) term /= i;
            total += term;
          }
          return;
        }
        for (int m = 1; m <= remaining; ++m) {
          mpq_class factor(lc.b[m]);
          factor /= detail::factorial(m);
          rec(remaining - m, parts + 1, acc * factor);
        }
      };
  rec(n, 0, mpq_class(1));
  total *= detail::factorial(n);
  total.canonicalize();
  REQUIRE(total.get_den() == 1);
  return total.get_num();
}

}  // namespace

TEST_CASE("set decomposition agrees with the coupled fixed point") {
  for (const auto& [k, omega] :
       std::vector<std::pair<int, OmegaSet>>{{2, OmegaSet::naturals()},
                                             {2, OmegaSet::finite({0, 1, 2})},
                                             {3, OmegaSet::naturals()}}) {
    const auto lc = labelled_counts(k, omega, 6);
    for (int n = 0; n <= 6; ++n)
      CHECK(lc.c[n] == set_decomposition_c(lc, omega, n));
  }
}

TEST_CASE("series counts match exhaustive enumeration") {
  for (const auto& [k, omega] :
       std::vector<std::pair<int, OmegaSet>>{{2, OmegaSet::naturals()},
                                             {2, OmegaSet::finite({0, 1, 2})},
                                             {3, OmegaSet::naturals()}}) {
    const auto p = ModelParams::make(k, omega);
    const auto lc = labelled_counts(k, omega, 4);
    for (int n = 1; n <= 4; ++n) {
      INFO("k=" << k << " omega=" << omega.to_string() << " n=" << n);
      CHECK(mpz_class(exact_small_sampler(p, n, RootMode::Free).size()) ==
            lc.c[n]);
      CHECK(mpz_class(exact_small_sampler(p, n, RootMode::Reduced).size()) ==
            lc.b[n]);
    }
  }
}

namespace {

// Brute-force enumeration of unlabeled coding-tree shapes: a black root
// carries k ordered slots, each an unordered multiset of sub-shapes.  Shapes
// are canonical strings; multisets are sorted joins.
std::vector<std::set<std::string>> shape_table(int k, int max_n) {
  std::vector<std::set<std::string>> shapes(max_n + 1);
  const auto multisets_of_total = [&](int total,
                                      auto&& self) -> std::set<std::string> {
    // all sorted lists of shapes with sizes summing to `total`
    std::set<std::string> out;
    if (total == 0) {
      out.insert("");
      return out;
    }
    for (int first = 1; first <= total; ++first)
      for (const auto& s : shapes[first])
        for (const auto& rest : self(total - first, self)) {
          std::vector<std::string> parts{s};
          std::size_t pos = 0;
          while (pos < rest.size()) {
            const auto next = rest.find('|', pos);
            parts.push_back(rest.substr(pos, next - pos));
            pos = next == std::string::npos ? rest.size() : next + 1;
          }
          std::sort(parts.begin(), parts.end());
          std::string joined;
          for (std::size_t i = 0; i < parts.size(); ++i) {
            if (i) joined += "|";
            joined += parts[i];
          }
          out.insert(joined);
        }
    return out;
  };
  for (int n = 1; n <= max_n; ++n) {
    // distribute n-1 blacks over k ordered slots
    std::vector<int> split(k, 0);
    const std::function<void(int, int)> rec = [&](int slot, int left) {
      if (slot == k - 1) {
        split[slot] = left;
        std::vector<std::set<std::string>> per_slot(k);
        for (int s = 0; s < k; ++s)
          per_slot[s] = multisets_of_total(split[s], multisets_of_total);
        std::vector<std::set<std::string>::iterator> its;
        const std::function<void(int, std::string)> cross = [&](int s,
                                                                std::string acc) {
          if (s == k) {
            shapes[n].insert("B[" + acc + "]");
            return;
          }
          for (const auto& choice : per_slot[s])
            cross(s + 1, acc + "{" + choice + "}");
        };
        cross(0, "");
        return;
      }
      for (int take = 0; take <= left; ++take) {
        split[slot] = take;
        rec(slot + 1, left - take);
      }
    };
    rec(0, n - 1);
  }
  return shapes;
}

}  // namespace

TEST_CASE("unlabeled counts") {
  SECTION("k=1 gives the rooted unlabeled trees") {
    const auto u = unlabeled_counts(1, OmegaSet::naturals(), 6);
    const std::vector<long> expect_white{1, 1, 2, 4, 9, 20, 48};
    for (int n = 0; n <= 6; ++n) CHECK(u.white_rooted.coeffs[n] == expect_white[n]);
    CHECK(u.black_rooted.coeffs[0] == 0);
    CHECK(u.black_rooted.coeffs[1] == 1);
    CHECK(u.white_rooted.coeffs[0] == 1);  // the bare root
  }
  SECTION("general omega refused") {
    CHECK_THROWS_AS(unlabeled_counts(2, OmegaSet::finite({0, 1, 2}), 4),
                    UnsupportedOmega);
  }
  SECTION("k=2 matches brute-force canonical shape enumeration") {
    const auto u = unlabeled_counts(2, OmegaSet::naturals(), 4);
    const auto shapes = shape_table(2, 4);
    for (int n = 1; n <= 4; ++n)
      CHECK(u.black_rooted.coeffs[n] == mpz_class(shapes[n].size()));
  }
  SECTION("radius estimate is positive and below 1") {
    const auto u = unlabeled_counts(1, OmegaSet::naturals(), 40);
    const double tau = ogf_radius_estimate(u.black_rooted);
    CHECK(tau > 0.30);
    CHECK(tau < 0.40);  // Otter-type radius for rooted trees is ~0.3383
  }
}

TEST_CASE("subexponential ratio diagnostics") {
  SECTION("k=2, N0 at n=1") {
    const auto r = subexponential_ratio(2, OmegaSet::naturals(), 1);
    CHECK(r[1] == Catch::Approx(1.0 / (2.0 * std::exp(1.0))));
  }
  SECTION("k=1, N0 flattens to 1/sqrt(2 pi)") {
    const auto r = subexponential_ratio(1, OmegaSet::naturals(), 64);
    CHECK(std::abs(r[50] - 1.0 / std::sqrt(2 * M_PI)) < 2e-3);
    CHECK(std::abs(r[64] - r[32]) < std::abs(r[32] - r[16]));
  }
  SECTION("finite omega flattens as well") {
    const auto r = subexponential_ratio(2, OmegaSet::finite({0, 1, 2}), 48);
    CHECK(r[48] > 0.0);
    CHECK(std::abs(r[48] - r[24]) < std::abs(r[24] - r[12]));
  }
}

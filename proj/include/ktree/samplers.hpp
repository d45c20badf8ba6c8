#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "ktree/errors.hpp"
#include "ktree/model.hpp"
#include "ktree/rng.hpp"
#include "ktree/trees.hpp"

namespace ktree {

enum class Strategy { Rejection, Exact };
enum class RootMode { Free, Reduced };

struct SampleReport {
  int size = 0;
  int largest_component_deficit = 0;
  std::vector<int> spine_lengths;
  std::uint64_t attempts = 0;
};

namespace detail {

inline void assign_uniform_labels(CodingTree& c, RngHandle& rng) {
  const auto blacks = c.black_ids();
  const int n = static_cast<int>(blacks.size());
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) labels[i] = c.k + 1 + i;
  for (int i = n - 1; i > 0; --i)
    std::swap(labels[i], labels[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  for (int i = 0; i < n; ++i) c.nodes[blacks[i]].label = labels[i];
  c.root_front.resize(c.k);
  for (int i = 0; i < c.k; ++i) c.root_front[i] = i + 1;
}

// Grow xi_circ-distributed black offspring below every white node queued,
// until done or more than `black_cap` black nodes exist.
inline bool grow_plain(CodingTree& c, std::vector<int> white_queue,
                       const ModelParams& p, RngHandle& rng,
                       std::uint64_t black_cap) {
  std::uint64_t blacks = static_cast<std::uint64_t>(c.n_black());
  while (!white_queue.empty()) {
    const int w = white_queue.back();
    white_queue.pop_back();
    const int m = p.xi_circ().sample(rng);
    for (int t = 0; t < m; ++t) {
      if (++blacks > black_cap) return false;
      const int b = c.add_node(Color::Black, w);
      for (int i = 0; i < p.k(); ++i)
        white_queue.push_back(c.add_node(Color::White, b));
    }
  }
  return true;
}

inline std::optional<CodingTree> try_boltzmann(const ModelParams& p,
                                               RngHandle& rng, RootMode mode,
                                               std::uint64_t black_cap) {
  CodingTree c = CodingTree::make_root(p.k());
  const int root_deg =
      mode == RootMode::Reduced ? 1 : p.eta_circ().sample(rng);
  std::vector<int> whites;
  std::uint64_t blacks = 0;
  for (int t = 0; t < root_deg; ++t) {
    if (++blacks > black_cap) return std::nullopt;
    const int b = c.add_node(Color::Black, c.root);
    for (int i = 0; i < p.k(); ++i)
      whites.push_back(c.add_node(Color::White, b));
  }
  if (!grow_plain(c, std::move(whites), p, rng, black_cap)) return std::nullopt;
  assign_uniform_labels(c, rng);
  return c;
}

}  // namespace detail

struct BoltzmannOptions {
  std::uint64_t black_cap = 10'000'000;  // abort pathological runs, then retry
  std::uint64_t max_retries = 1024;
};

struct BoltzmannDraw {
  CodingTree tree;       // valid only when completed
  bool completed = false;
};

// Single attempt with a hard cap on the number of black nodes; an incomplete
// draw means the tree exceeded the cap.
inline BoltzmannDraw boltzmann_B_draw(const ModelParams& p, RngHandle& rng,
                                      std::uint64_t black_cap) {
  auto t = detail::try_boltzmann(p, rng, RootMode::Reduced, black_cap);
  if (!t) return {CodingTree{}, false};
  return {std::move(*t), true};
}

inline BoltzmannDraw boltzmann_C_draw(const ModelParams& p, RngHandle& rng,
                                      std::uint64_t black_cap) {
  auto t = detail::try_boltzmann(p, rng, RootMode::Free, black_cap);
  if (!t) return {CodingTree{}, false};
  return {std::move(*t), true};
}

// Boltzmann sampler for reduced coding trees at the critical parameter: a
// size-n tree is drawn with probability rho^n / (n! B(rho)).  Aborted runs
// (cap hit) are re-drawn; the count lands in `report.attempts`.
inline CodingTree boltzmann_B(const ModelParams& p, RngHandle& rng,
                              const BoltzmannOptions& opts = {},
                              SampleReport* report = nullptr) {
  for (std::uint64_t i = 0; i < opts.max_retries; ++i) {
    auto d = boltzmann_B_draw(p, rng, opts.black_cap);
    if (d.completed) {
      if (report) {
        report->attempts = i + 1;
        report->size = d.tree.n_black();
      }
      return std::move(d.tree);
    }
  }
  throw CapExceeded("boltzmann_B: every retry hit the node cap");
}

inline CodingTree boltzmann_C(const ModelParams& p, RngHandle& rng,
                              const BoltzmannOptions& opts = {},
                              SampleReport* report = nullptr) {
  for (std::uint64_t i = 0; i < opts.max_retries; ++i) {
    auto d = boltzmann_C_draw(p, rng, opts.black_cap);
    if (d.completed) {
      if (report) {
        report->attempts = i + 1;
        report->size = d.tree.n_black();
      }
      return std::move(d.tree);
    }
  }
  throw CapExceeded("boltzmann_C: every retry hit the node cap");
}

// --- exact-size sampling ----------------------------------------------------

struct ConditionedOptions {
  Strategy strategy = Strategy::Exact;
  RootMode root = RootMode::Free;
  std::uint64_t max_attempts = 50'000'000;
};

// Uniform sampler over coding trees with exactly n black nodes and root front
// {1..k}.  Strategy Rejection repeats the Boltzmann sampler until the size
// matches.  Strategy Exact samples the white plane tree with kn+1 vertices:
// root degree from its exact conditional law, remaining outdegrees i.i.d.
// conditioned on their total (rejection on the sum, fast near the mean by the
// local CLT), then one uniform rotation among the cyclic shifts the cycle
// lemma certifies as valid trees, then psi and uniform black labels.
class ConditionedSampler {
 public:
  ConditionedSampler(const ModelParams& p, int n, ConditionedOptions opts = {})
      : params_(&p), n_(n), opts_(opts) {
    if (n < 1) throw InfeasibleSize("n must be >= 1");
    prepare_exact();  // also the feasibility check for the rejection strategy
  }

  CodingTree sample(RngHandle& rng, SampleReport* report = nullptr) const {
    return opts_.strategy == Strategy::Exact ? sample_exact(rng, report)
                                             : sample_rejection(rng, report);
  }

 private:
  void prepare_exact() {
    const ModelParams& p = *params_;
    const int m = p.k() * n_;  // non-root plane vertices = N - 1
    // Distribution of the sum of m i.i.d. xi_circ draws, windowed around the
    // mean; only targets within O(1) of the mean are ever queried.
    const auto& xs = p.xi_circ();
    const double mu = xs.mean();
    const double sd = std::sqrt(std::max(xs.variance(), 1e-12));
    const int pad = 64 + xs.max_value() +
                    (p.eta_circ().max_value() + 1);
    std::vector<double> cur{1.0};
    long cur_lo = 0;
    if (m <= 20000) {
      for (int t = 1; t <= m; ++t) {
        const long span_hi = cur_lo + static_cast<long>(cur.size()) - 1 +
                             xs.max_value();
        std::vector<double> next(static_cast<std::size_t>(span_hi - cur_lo) + 1,
                                 0.0);
        for (std::size_t i = 0; i < cur.size(); ++i) {
          if (cur[i] == 0.0) continue;
          for (std::size_t j = 0; j < xs.values().size(); ++j)
            next[i + xs.values()[j]] += cur[i] * xs.probs()[j];
        }
        // shrink to a +-12 sigma window around the running mean
        const double mean_t = mu * t;
        const long w = static_cast<long>(12.0 * sd * std::sqrt(t)) + pad;
        long lo = std::max(cur_lo, static_cast<long>(mean_t) - w);
        long hi = std::min(span_hi, static_cast<long>(mean_t) + w);
        std::vector<double> win(static_cast<std::size_t>(hi - lo) + 1);
        for (long s = lo; s <= hi; ++s) win[s - lo] = next[s - cur_lo];
        cur = std::move(win);
        cur_lo = lo;
      }
      sum_pmf_ = std::move(cur);
      sum_lo_ = cur_lo;
      sum_exact_ = true;
    } else {
      sum_exact_ = false;  // local-CLT weights instead
    }

    // conditional root-degree law: w(d) ~ P(eta_circ = d) * d * P(S = n - d)
    std::vector<int> ds;
    std::vector<double> ws;
    const auto& eta = p.eta_circ();
    for (std::size_t i = 0; i < eta.values().size(); ++i) {
      const int d = eta.values()[i];
      if (opts_.root == RootMode::Reduced && d != 1) continue;
      if (d < 1 || d > n_) continue;
      const double w = eta.probs()[i] * d * sum_prob(m, n_ - d);
      if (w > 0.0) {
        ds.push_back(d);
        ws.push_back(opts_.root == RootMode::Reduced ? 1.0 : w);
      }
    }
    if (ds.empty())
      throw InfeasibleSize("no feasible size-" + std::to_string(n_) +
                           " tree for this degree set");
    root_law_ = DiscretePmf(std::move(ds), std::move(ws));
  }

  double sum_prob(int m, long target) const {
    if (target < 0) return 0.0;
    if (sum_exact_) {
      const long idx = target - sum_lo_;
      if (idx < 0 || idx >= static_cast<long>(sum_pmf_.size())) return 0.0;
      return sum_pmf_[idx];
    }
    const auto& xs = params_->xi_circ();
    int g = 0;
    for (int v : xs.values())
      if (v > 0) g = std::gcd(g, v);
    if (g == 0) return target == 0 ? 1.0 : 0.0;
    if (target % g != 0) return 0.0;
    const double mu = xs.mean() * m;
    const double var = xs.variance() * m;
    const double z = (static_cast<double>(target) - mu);
    return std::exp(-z * z / (2.0 * var)) * g / std::sqrt(2 * M_PI * var);
  }

  CodingTree sample_rejection(RngHandle& rng, SampleReport* report) const {
    const std::uint64_t cap = static_cast<std::uint64_t>(n_);
    for (std::uint64_t it = 1; it <= opts_.max_attempts; ++it) {
      auto d = opts_.root == RootMode::Reduced
                   ? boltzmann_B_draw(*params_, rng, cap)
                   : boltzmann_C_draw(*params_, rng, cap);
      if (d.completed && d.tree.n_black() == n_) {
        if (report) {
          report->attempts = it;
          report->size = n_;
        }
        return std::move(d.tree);
      }
    }
    throw StrategyTimeout("rejection sampler exceeded its attempt budget");
  }

  CodingTree sample_exact(RngHandle& rng, SampleReport* report) const {
    const ModelParams& p = *params_;
    const int k = p.k();
    const int m = k * n_;  // tail length
    const int d_circ = root_law_.sample(rng);
    const long target = n_ - d_circ;  // required sum of tail xi_circ draws

    std::vector<int> tail(static_cast<std::size_t>(m));
    std::uint64_t attempts = 0;
    const auto& xs = p.xi_circ();
    for (;;) {
      if (++attempts > opts_.max_attempts)
        throw StrategyTimeout("conditioned tail resampling exceeded budget");
      long sum = 0;
      bool ok = true;
      for (int j = 0; j < m; ++j) {
        const int v = xs.sample(rng);
        sum += v;
        if (sum > target) {
          ok = false;
          break;
        }
        tail[j] = v;
      }
      if (ok && sum == target) break;
    }

    // Lukasiewicz walk over the tail in plane units; a rotation starting
    // after position u is a valid tree iff B_u is a strict prefix minimum and
    // every later prefix stays above B_u - d.  The cycle lemma yields exactly
    // d valid rotations, d = k * d_circ.
    const int d = k * d_circ;
    std::vector<long> pre(static_cast<std::size_t>(m) + 1);
    pre[0] = 0;
    for (int j = 1; j <= m; ++j)
      pre[j] = pre[j - 1] + (static_cast<long>(k) * tail[j - 1] - 1);
    std::vector<long> suf_min(static_cast<std::size_t>(m) + 2);
    suf_min[m + 1] = std::numeric_limits<long>::max();
    for (int j = m; j >= 1; --j) suf_min[j] = std::min(suf_min[j + 1], pre[j]);
    std::vector<int> starts;
    long run_min = std::numeric_limits<long>::max();
    for (int u = 1; u <= m; ++u) {
      if (pre[u] < run_min && suf_min[u + 1] > pre[u] - d) starts.push_back(u);
      run_min = std::min(run_min, pre[u]);
    }
    if (static_cast<int>(starts.size()) != d)
      throw Error("cycle lemma rotation count mismatch");
    const int u = starts[rng.below(starts.size())];

    std::vector<int> degs;
    degs.reserve(static_cast<std::size_t>(m) + 1);
    degs.push_back(d);
    for (int j = 0; j < m; ++j) degs.push_back(k * tail[(u + j) % m]);
    PlaneTree t = PlaneTree::from_outdegrees(degs);
    CodingTree c = psi(t, k);
    detail::assign_uniform_labels(c, rng);
    if (report) {
      report->attempts = attempts;
      report->size = n_;
    }
    return c;
  }

  const ModelParams* params_;
  int n_;
  ConditionedOptions opts_;
  DiscretePmf root_law_;
  std::vector<double> sum_pmf_;
  long sum_lo_ = 0;
  bool sum_exact_ = false;
};

inline CodingTree conditioned_coding_tree(const ModelParams& p, int n,
                                          RngHandle& rng,
                                          ConditionedOptions opts = {},
                                          SampleReport* report = nullptr) {
  return ConditionedSampler(p, n, opts).sample(rng, report);
}

// --- exhaustive enumeration (uniformity oracle) ------------------------------

namespace detail {

struct Frag {
  int label;
  std::vector<std::vector<Frag>> slots;  // k ordered slots of black children
};

inline void enumerate_whiteset(const std::vector<int>& labels, int k,
                               const OmegaSet& omega, bool root_set,
                               std::vector<std::vector<Frag>>& out);

// All black subtrees on exactly the given nonempty label set.
inline std::vector<Frag> enumerate_black(const std::vector<int>& labels, int k,
                                         const OmegaSet& omega) {
  std::vector<Frag> out;
  for (std::size_t ri = 0; ri < labels.size(); ++ri) {
    std::vector<int> rest = labels;
    const int r = rest[ri];
    rest.erase(rest.begin() + ri);
    // every assignment of the remaining labels to the k ordered slots
    const std::size_t total =
        [&] {
          std::size_t t = 1;
          for (std::size_t i = 0; i < rest.size(); ++i) t *= k;
          return t;
        }();
    for (std::size_t code = 0; code < total; ++code) {
      std::vector<std::vector<int>> slot_labels(k);
      std::size_t c = code;
      for (int x : rest) {
        slot_labels[c % k].push_back(x);
        c /= k;
      }
      std::vector<std::vector<std::vector<Frag>>> per_slot(k);
      bool feasible = true;
      for (int s = 0; s < k && feasible; ++s) {
        enumerate_whiteset(slot_labels[s], k, omega, /*root_set=*/false,
                           per_slot[s]);
        feasible = !per_slot[s].empty();
      }
      if (!feasible) continue;
      std::vector<std::size_t> idx(k, 0);
      for (;;) {
        Frag f;
        f.label = r;
        f.slots.resize(k);
        for (int s = 0; s < k; ++s) f.slots[s] = per_slot[s][idx[s]];
        out.push_back(std::move(f));
        int s = k - 1;
        while (s >= 0 && ++idx[s] == per_slot[s].size()) idx[s--] = 0;
        if (s < 0) break;
      }
    }
  }
  return out;
}

inline void enumerate_children_rec(const std::vector<int>& remaining, int k,
                                   const OmegaSet& omega, bool root_set,
                                   int count, std::vector<Frag>& acc,
                                   std::vector<std::vector<Frag>>& out) {
  if (remaining.empty()) {
    const bool ok = root_set ? omega.contains(count) : omega.out_contains(count);
    if (ok) out.push_back(acc);
    return;
  }
  const int rl = static_cast<int>(remaining.size());
  for (std::uint64_t mask = 0; mask < (1ULL << (rl - 1)); ++mask) {
    std::vector<int> group{remaining[0]}, rest;
    for (int i = 1; i < rl; ++i)
      ((mask >> (i - 1)) & 1 ? group : rest).push_back(remaining[i]);
    for (auto& head : enumerate_black(group, k, omega)) {
      acc.push_back(std::move(head));
      enumerate_children_rec(rest, k, omega, root_set, count + 1, acc, out);
      acc.pop_back();
    }
  }
}

// All unordered child sets of a white node covering exactly `labels`, with
// the child count constrained to Omega (root) or Omega_out (elsewhere).
// Sibling groups are ordered canonically (each group holds the smallest
// remaining label) so every set is produced once.
inline void enumerate_whiteset(const std::vector<int>& labels, int k,
                               const OmegaSet& omega, bool root_set,
                               std::vector<std::vector<Frag>>& out) {
  std::vector<Frag> acc;
  enumerate_children_rec(labels, k, omega, root_set, 0, acc, out);
}

inline void frag_attach(CodingTree& c, int white, const Frag& f) {
  const int b = c.add_node(Color::Black, white, f.label);
  for (int s = 0; s < c.k; ++s) {
    const int w = c.add_node(Color::White, b);
    for (const Frag& g : f.slots[s]) frag_attach(c, w, g);
  }
}

}  // namespace detail

// Complete duplicate-free list of coding trees with n black nodes and root
// front {1..k}; the reduced variant restricts the root to one black child.
// The count equals c(n) (resp. b(n)) from the series module.
inline std::vector<CodingTree> exact_small_sampler(const ModelParams& p, int n,
                                                   RootMode mode = RootMode::Free,
                                                   int cap = 6) {
  if (n > cap) throw CapExceeded("exhaustive enumeration capped at n=" +
                                 std::to_string(cap));
  std::vector<int> labels;
  for (int i = 0; i < n; ++i) labels.push_back(p.k() + 1 + i);
  std::vector<std::vector<detail::Frag>> sets;
  if (mode == RootMode::Free) {
    detail::enumerate_whiteset(labels, p.k(), p.omega(), /*root_set=*/true, sets);
  } else {
    // root outdegree forced to 1
    for (auto& f : detail::enumerate_black(labels, p.k(), p.omega()))
      sets.push_back({f});
  }
  std::vector<CodingTree> out;
  std::vector<int> front;
  for (int i = 1; i <= p.k(); ++i) front.push_back(i);
  for (const auto& children : sets) {
    CodingTree c = CodingTree::make_root(p.k(), front);
    for (const auto& f : children) detail::frag_attach(c, c.root, f);
    out.push_back(std::move(c));
  }
  return out;
}

// --- size-biased enriched tree -----------------------------------------------

struct SizeBiasOptions {
  bool expand_bulk = true;
  std::uint64_t black_cap = 10'000'000;
  std::uint64_t max_retries = 64;
};

struct EnrichedTree {
  CodingTree tree;
  std::vector<int> spine;   // node ids of the spine blacks, root-to-heir order
  std::vector<int> heirs;   // one good node per mutant block
  std::vector<int> zeta;    // per-block spine lengths, zeta[i] for block i+1
  std::uint64_t aborted = 0;
};

// Spine-length marginal of the size-biased enriched tree: the per-block
// increments zeta_i without materializing the bulk.  Block 1 starts at the
// reduced root (one minimal entry); later blocks start at a constant-sequence
// white (k minimal entries).
inline std::vector<int> spine_increments(const ModelParams& p, int m,
                                         RngHandle& rng) {
  const int k = p.k();
  std::vector<int> zeta;
  zeta.reserve(m);
  for (int block = 1; block <= m; ++block) {
    int mins = block == 1 ? 1 : k;
    int steps = 0;
    for (;;) {
      ++steps;  // one spine black
      const bool hit = rng.below(static_cast<std::uint64_t>(k)) <
                       static_cast<std::uint64_t>(mins);
      if (hit) {
        if (mins == 1) break;  // heir found
        --mins;
      }
    }
    zeta.push_back(steps);
  }
  return zeta;
}

// Full construction of the enriched tree B-hat^(m): mutant blocks along a
// spine with size-biased offspring, plain Boltzmann everywhere else.  With
// expand_bulk=false only the spine skeleton is built (exact marginal for the
// spine statistics; no cap aborts possible).
inline EnrichedTree size_biased_tree(const ModelParams& p, int m, RngHandle& rng,
                                     const SizeBiasOptions& opts = {}) {
  const int k = p.k();
  const DiscretePmf xi_hat_circ = p.xi_circ().size_biased();
  EnrichedTree result;
  for (std::uint64_t attempt = 0; attempt <= opts.max_retries; ++attempt) {
    CodingTree c = CodingTree::make_root(k);
    std::vector<int> spine, heirs, zeta;
    std::vector<int> bulk_whites;  // expanded plainly afterwards
    bool ok = true;

    int spine_white = c.root;
    // slot positions of the current white's minimal distance-sequence
    // entries; (0, 1^{k-1}) at the root makes that the single slot 0
    std::vector<int> min_slots{0};
    int block = 1;
    int steps = 0;
    bool root_step = true;
    while (block <= m) {
      // black children of the current spine white
      const int count = root_step ? 1 : xi_hat_circ.sample(rng);
      root_step = false;
      const int pick = static_cast<int>(rng.below(count));
      int spine_black = -1;
      for (int t = 0; t < count; ++t) {
        const int b = c.add_node(Color::Black, spine_white);
        if (t == pick) {
          spine_black = b;
        } else {
          for (int i = 0; i < k; ++i)
            bulk_whites.push_back(c.add_node(Color::White, b));
        }
      }
      spine.push_back(spine_black);
      ++steps;
      // the spine passes into a uniformly chosen slot of the spine black;
      // slot j replaces sequence position j, so hitting a minimal slot
      // shrinks the minimal set, and hitting the last one marks the heir
      std::vector<int> slots(k);
      for (int i = 0; i < k; ++i)
        slots[i] = c.add_node(Color::White, spine_black);
      const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
      const auto it_min = std::find(min_slots.begin(), min_slots.end(), j);
      const bool hit = it_min != min_slots.end();
      if (hit && min_slots.size() == 1) {
        heirs.push_back(spine_black);
        zeta.push_back(steps);
        steps = 0;
        ++block;
        if (block > m) {
          for (int s : slots) bulk_whites.push_back(s);
          break;
        }
        // slot j has the constant sequence and roots the next mutant block
        spine_white = slots[j];
        min_slots.resize(k);
        std::iota(min_slots.begin(), min_slots.end(), 0);
        for (int i = 0; i < k; ++i)
          if (i != j) bulk_whites.push_back(slots[i]);
      } else {
        spine_white = slots[j];
        if (hit) min_slots.erase(it_min);
        for (int i = 0; i < k; ++i)
          if (i != j) bulk_whites.push_back(slots[i]);
      }
    }
    if (opts.expand_bulk) {
      ok = detail::grow_plain(c, std::move(bulk_whites), p, rng,
                              opts.black_cap);
    }
    if (!ok) {
      ++result.aborted;
      continue;
    }
    detail::assign_uniform_labels(c, rng);
    result.tree = std::move(c);
    result.spine = std::move(spine);
    result.heirs = std::move(heirs);
    result.zeta = std::move(zeta);
    return result;
  }
  throw CapExceeded("size_biased_tree: every retry hit the node cap");
}

// --- Kesten limit tree --------------------------------------------------------

// The modified Galton-Watson plane tree truncated at height h: root degree
// eta-hat with one uniform mutant child, normal vertices reproduce by xi,
// mutant vertices by xi-hat with one uniform mutant child.  The spine holds
// exactly one mutant per generation 1..h.
inline PlaneTree kesten_tree(const ModelParams& p, int h, RngHandle& rng,
                             std::vector<int>* spine_out = nullptr) {
  PlaneTree t = PlaneTree::single();
  if (spine_out) spine_out->clear();
  if (h <= 0) return t;
  struct Item {
    int node;
    int depth;
    bool mutant;
  };
  std::vector<Item> queue{{t.root, 0, true}};
  while (!queue.empty()) {
    const Item it = queue.back();
    queue.pop_back();
    if (it.depth >= h) continue;
    int deg;
    int mutant_child = -1;
    if (it.mutant) {
      deg = it.depth == 0 ? p.eta_hat().sample(rng) : p.xi_hat().sample(rng);
      mutant_child = static_cast<int>(rng.below(deg));
    } else {
      deg = p.xi().sample(rng);
    }
    for (int i = 0; i < deg; ++i) {
      const int ch = t.add_child(it.node);
      const bool is_mut = i == mutant_child;
      if (is_mut && spine_out) spine_out->push_back(ch);
      queue.push_back({ch, it.depth + 1, is_mut});
    }
  }
  if (spine_out) {
    // queue order scrambles depths; rebuild in depth order
    std::sort(spine_out->begin(), spine_out->end(), [&](int a, int b) {
      int da = 0, db = 0;
      for (int v = a; t.nodes[v].parent >= 0; v = t.nodes[v].parent) ++da;
      for (int v = b; t.nodes[v].parent >= 0; v = t.nodes[v].parent) ++db;
      return da < db;
    });
  }
  return t;
}

// One generic i-block of the Boltzmann coding tree, grown standalone: the
// white root carries a constant sequence (here (1^k)), every in-block white
// reproduces by xi_circ, and growth stops at the constant-sequence children
// that root the neighboring blocks.  Feeding the result to algorithm1 with
// the all-ones input and block_decompose recovers exactly this block as the
// first one.  Standalone draws are i.i.d., unlike blocks pooled from whole
// finite trees, whose good counts always average (#blocks-1)/#blocks.
inline CodingTree sample_block(const ModelParams& p, RngHandle& rng) {
  const int k = p.k();
  CodingTree c = CodingTree::make_root(k);
  struct Item {
    int white;
    std::vector<char> is_min;  // slots still holding the minimal entry
  };
  std::vector<Item> stack;
  stack.push_back({c.root, std::vector<char>(k, 1)});
  while (!stack.empty()) {
    Item it = std::move(stack.back());
    stack.pop_back();
    const int count = p.xi_circ().sample(rng);
    for (int t = 0; t < count; ++t) {
      const int b = c.add_node(Color::Black, it.white);
      for (int i = 0; i < k; ++i) {
        const int w = c.add_node(Color::White, b);
        std::vector<char> mins = it.is_min;
        mins[i] = 0;
        bool any = false;
        for (char x : mins) any |= x;
        if (any) stack.push_back({w, std::move(mins)});
        // constant-sequence children stay childless: they root other blocks
      }
    }
  }
  return c;
}

// U_ell of the infinite limit k-tree, generated lazily as a coding tree.
// Whites carry their front-distance sequences; a white whose minimum already
// reached ell only roots hedra beyond the neighborhood and is pruned, which
// also ends the (otherwise infinite) spine almost surely.
inline CodingTree kesten_neighborhood(const ModelParams& p, int ell,
                                      RngHandle& rng,
                                      std::uint64_t black_cap = 10'000'000) {
  const int k = p.k();
  const DiscretePmf eta_hat_circ = p.eta_circ().size_biased();
  const DiscretePmf xi_hat_circ = p.xi_circ().size_biased();
  CodingTree c = CodingTree::make_root(k);
  struct Item {
    int white;
    std::vector<int> seq;
    bool spine;
  };
  std::vector<Item> stack;
  stack.push_back({c.root, std::vector<int>(k, 0), true});
  std::uint64_t blacks = 0;
  while (!stack.empty()) {
    Item it = std::move(stack.back());
    stack.pop_back();
    const int mn = *std::min_element(it.seq.begin(), it.seq.end());
    if (mn >= ell) continue;
    const int mark = mn + 1;
    int count, spine_black = -1, spine_slot = -1;
    if (it.spine) {
      count = (it.white == c.root ? eta_hat_circ : xi_hat_circ).sample(rng);
      spine_black = static_cast<int>(rng.below(count));
      spine_slot = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
    } else {
      count = p.xi_circ().sample(rng);
    }
    for (int t = 0; t < count; ++t) {
      if (++blacks > black_cap)
        throw CapExceeded("kesten_neighborhood hit the node cap");
      const int b = c.add_node(Color::Black, it.white);
      for (int i = 0; i < k; ++i) {
        const int w = c.add_node(Color::White, b);
        std::vector<int> seq = it.seq;
        seq[i] = mark;
        stack.push_back(
            {w, std::move(seq), it.spine && t == spine_black && i == spine_slot});
      }
    }
  }
  return c;
}

// --- largest component deficit -------------------------------------------------

// Black-node counts of the subtrees hanging off the root.
inline std::vector<int> root_component_sizes(const CodingTree& c) {
  std::vector<int> sizes;
  for (int b : c.nodes[c.root].children) {
    int count = 0;
    std::vector<int> stack{b};
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      if (c.nodes[v].color == Color::Black) ++count;
      for (int ch : c.nodes[v].children) stack.push_back(ch);
    }
    sizes.push_back(count);
  }
  return sizes;
}

// Sample conditioned trees and record n - L_{n,k}, the black nodes missing
// from the largest root component.
inline std::vector<SampleReport> largest_deficit(const ModelParams& p, int n,
                                                 RngHandle& rng, int reps,
                                                 ConditionedOptions opts = {}) {
  ConditionedSampler sampler(p, n, opts);
  std::vector<SampleReport> out;
  out.reserve(reps);
  for (int r = 0; r < reps; ++r) {
    SampleReport rep;
    CodingTree c = sampler.sample(rng, &rep);
    const auto sizes = root_component_sizes(c);
    const int largest =
        sizes.empty() ? 0 : *std::max_element(sizes.begin(), sizes.end());
    rep.largest_component_deficit = n - largest;
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace ktree

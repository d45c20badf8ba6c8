#pragma once

#include <atomic>
#include <cstdio>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "ktree/metrics.hpp"
#include "ktree/model.hpp"
#include "ktree/samplers.hpp"
#include "ktree/stats.hpp"
#include "ktree/trees.hpp"

namespace ktree {

struct ModelSpec {
  int k = 2;
  OmegaSet omega = OmegaSet::naturals();

  std::string name() const {
    return "k=" + std::to_string(k) + " omega=" + omega.to_string();
  }
};

// --- CSV rows -----------------------------------------------------------------

// One emitted statistic; `seed` is the replicate's derived stream seed so a
// row is reproducible in isolation.  The rescaled column is filled only for
// graph-distance statistics (factor kH_k sigma / (2 sqrt n)).
struct StatRow {
  std::string experiment;
  int k;
  std::string omega;
  int n;
  std::uint64_t seed;
  std::string stat;
  double value;
  bool has_rescaled = false;
  double rescaled = 0.0;
};

inline std::string csv_header() {
  return "experiment,k,omega,n,seed,stat,value,rescaled\n";
}

inline void append_csv_row(std::string& out, const StatRow& r) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.17g", r.value);
  out += r.experiment + "," + std::to_string(r.k) + "," + r.omega + "," +
         std::to_string(r.n) + "," + std::to_string(r.seed) + "," + r.stat +
         "," + buf + ",";
  if (r.has_rescaled) {
    std::snprintf(buf, sizeof buf, "%.17g", r.rescaled);
    out += buf;
  }
  out += "\n";
}

// Deterministic worker pool: replicate i always runs with the same derived
// stream and lands in slot i, so the merged output is byte-identical for any
// thread count.
template <typename F>
inline void parallel_replicates(int count, int threads, F&& body) {
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        body(i);
      }
    });
  for (auto& th : pool) th.join();
}

// --- scaling-limit experiment ----------------------------------------------------

struct ScalingConfig {
  std::vector<ModelSpec> models;
  int n = 5000;
  int replicates = 2000;
  std::uint64_t seed = 20250801;
  int threads = 1;
  double ks_alpha = 1e-3;
  Strategy strategy = Strategy::Exact;
};

struct ScalingResult {
  std::string csv;
  nlohmann::json summary;
  bool pass = false;
  // rescaled root-to-uniform-vertex samples per model
  std::vector<std::vector<double>> rescaled_root_dist;
};

// Sample conditioned trees per model, record rescaled distance statistics,
// and run pairwise two-sample KS tests on the rescaled root-to-uniform
// distances; a common limit law is the theorem's testable consequence.
inline ScalingResult run_scaling_experiment(const ScalingConfig& cfg) {
  ScalingResult result;
  std::vector<StatRow> rows(cfg.models.size() * cfg.replicates * 4);
  result.rescaled_root_dist.assign(cfg.models.size(), {});

  const RngHandle master(cfg.seed);
  for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) {
    const ModelSpec& spec = cfg.models[mi];
    const ModelParams params = ModelParams::make(spec.k, spec.omega);
    ConditionedOptions copts;
    copts.strategy = cfg.strategy;
    const ConditionedSampler sampler(params, cfg.n, copts);
    const double sc = params.scale(cfg.n);
    std::vector<double> rescaled(cfg.replicates);

    parallel_replicates(cfg.replicates, cfg.threads, [&](int i) {
      RngHandle rng = master.derived(mi * 1'000'003ULL + i);
      const std::uint64_t row_seed = rng.seed();
      const CodingTree c = sampler.sample(rng);
      const DistanceTable dt = algorithm1(c);
      const auto blacks = c.black_ids();
      const int target = blacks[rng.below(blacks.size())];
      const double root_dist = dt.black_dist[target];

      const KTreeGraph g = phi_inverse(c);
      const int u = c.nodes[blacks[rng.below(blacks.size())]].label;
      const int v = c.nodes[blacks[rng.below(blacks.size())]].label;
      const double pair_dist = bfs_distances(g, u)[v];

      const BlackTreeStats bt = black_tree_stats(black_tree(c));

      const std::size_t base = (mi * cfg.replicates + i) * 4;
      const auto row = [&](std::size_t off, const char* stat, double value,
                           bool resc) {
        rows[base + off] = {"scaling", spec.k,       spec.omega.to_string(),
                            cfg.n,     row_seed,     stat,
                            value,     resc,         resc ? value * sc : 0.0};
      };
      row(0, "root_to_uniform_dist", root_dist, true);
      row(1, "uniform_pair_dist", pair_dist, true);
      row(2, "black_tree_height", bt.height, false);
      row(3, "black_tree_diameter", bt.diameter, false);
      rescaled[i] = root_dist * sc;
    });
    result.rescaled_root_dist[mi] = std::move(rescaled);
  }

  result.csv = csv_header();
  for (const auto& r : rows) append_csv_row(result.csv, r);

  nlohmann::json ks = nlohmann::json::array();
  bool pass = true;
  for (std::size_t a = 0; a < cfg.models.size(); ++a)
    for (std::size_t b = a + 1; b < cfg.models.size(); ++b) {
      const auto res = stats::ks_two_sample(result.rescaled_root_dist[a],
                                            result.rescaled_root_dist[b]);
      pass &= res.pvalue > cfg.ks_alpha;
      ks.push_back({{"model_a", cfg.models[a].name()},
                    {"model_b", cfg.models[b].name()},
                    {"ks_stat", res.stat},
                    {"pvalue", res.pvalue}});
    }
  result.pass = pass;
  result.summary = {{"schema_version", 1},
                    {"experiment", "scaling"},
                    {"n", cfg.n},
                    {"replicates", cfg.replicates},
                    {"seed", cfg.seed},
                    {"ks_alpha", cfg.ks_alpha},
                    {"ks_tests", ks},
                    {"pass", pass}};
  return result;
}

// --- local-limit experiment -------------------------------------------------------

struct LocalConfig {
  ModelSpec model;
  std::vector<int> n_list{500, 1000, 2000};
  int samples_per_n = 10000;
  int limit_samples = 100000;  // draws of the limit objects
  int height = 2;              // truncation h for the plane-tree comparison
  int ell = 1;                 // neighborhood radius for U_ell
  bool with_neighborhoods = true;
  std::uint64_t seed = 20250802;
  int threads = 1;
  double tv_root_degree = 0.05;
  double tv_code = 0.08;
};

struct LocalResult {
  std::string csv;
  nlohmann::json summary;
  bool pass = false;
  std::vector<double> tv_root_degree;  // per n
  std::vector<double> tv_height_code;  // per n
  std::vector<double> tv_neighborhood; // per n (empty unless enabled)
};

inline LocalResult run_local_experiment(const LocalConfig& cfg) {
  LocalResult result;
  const ModelParams params = ModelParams::make(cfg.model.k, cfg.model.omega);
  const RngHandle master(cfg.seed);

  // reference tables from the limit objects
  std::map<std::string, std::uint64_t> limit_codes, limit_nbhd;
  {
    RngHandle rng = master.derived(0xBEEF);
    for (int i = 0; i < cfg.limit_samples; ++i)
      ++limit_codes[canonical_code(kesten_tree(params, cfg.height, rng))];
    if (cfg.with_neighborhoods) {
      for (int i = 0; i < cfg.limit_samples; ++i)
        ++limit_nbhd[canonical_code(kesten_neighborhood(params, cfg.ell, rng),
                                    CodeMode::ShapeUnordered)];
    }
  }

  result.csv = csv_header();
  for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
    const int n = cfg.n_list[ni];
    const ConditionedSampler sampler(params, n);
    std::vector<int> root_deg(cfg.samples_per_n);
    std::vector<std::string> codes(cfg.samples_per_n);
    std::vector<std::string> nbhd(cfg.samples_per_n);
    parallel_replicates(cfg.samples_per_n, cfg.threads, [&](int i) {
      RngHandle rng = master.derived(1 + ni * 10'000'019ULL + i);
      const CodingTree c = sampler.sample(rng);
      root_deg[i] =
          params.k() * static_cast<int>(c.nodes[c.root].children.size());
      codes[i] = canonical_code(psi_inverse(c).truncated(cfg.height));
      if (cfg.with_neighborhoods) nbhd[i] = neighborhood_code(c, cfg.ell);
    });

    std::map<int, std::uint64_t> deg_counts;
    for (int d : root_deg) ++deg_counts[d];
    const double tv_deg = stats::total_variation_exact(
        deg_counts, params.eta_hat().values(), params.eta_hat().probs());
    std::map<std::string, std::uint64_t> code_counts, nbhd_counts;
    for (auto& s : codes) ++code_counts[s];
    const double tv_codes = stats::total_variation(code_counts, limit_codes);
    result.tv_root_degree.push_back(tv_deg);
    result.tv_height_code.push_back(tv_codes);

    const std::uint64_t row_seed = master.derived(1 + ni * 10'000'019ULL).seed();
    StatRow r{"local", cfg.model.k, cfg.model.omega.to_string(), n, row_seed,
              "tv_root_degree", tv_deg};
    append_csv_row(result.csv, r);
    r.stat = "tv_truncated_tree_code";
    r.value = tv_codes;
    append_csv_row(result.csv, r);
    if (cfg.with_neighborhoods) {
      for (auto& s : nbhd) ++nbhd_counts[s];
      const double tv_n = stats::total_variation(nbhd_counts, limit_nbhd);
      result.tv_neighborhood.push_back(tv_n);
      r.stat = "tv_neighborhood_code";
      r.value = tv_n;
      append_csv_row(result.csv, r);
    }
  }

  bool pass = result.tv_root_degree.back() <= cfg.tv_root_degree;
  for (double tv : result.tv_height_code) pass &= tv <= cfg.tv_code;
  for (std::size_t i = 1; i < result.tv_height_code.size(); ++i)
    pass &= result.tv_height_code[i] < result.tv_height_code[i - 1];
  result.pass = pass;
  result.summary = {{"schema_version", 1},
                    {"experiment", "local"},
                    {"model", cfg.model.name()},
                    {"n_list", cfg.n_list},
                    {"samples_per_n", cfg.samples_per_n},
                    {"limit_samples", cfg.limit_samples},
                    {"height", cfg.height},
                    {"ell", cfg.ell},
                    {"seed", cfg.seed},
                    {"tv_root_degree", result.tv_root_degree},
                    {"tv_truncated_tree_code", result.tv_height_code},
                    {"tv_neighborhood_code", result.tv_neighborhood},
                    {"pass", pass}};
  return result;
}

// --- uniformity suite ---------------------------------------------------------------

struct UniformityConfig {
  ModelSpec model;
  int n = 3;
  std::uint64_t draws = 100000;
  std::uint64_t seed = 20250803;
  double alpha = 1e-3;
  int enum_cap = 6;
};

struct UniformityResult {
  std::uint64_t cells = 0;
  stats::ChiSquare rejection_fit;  // strategy A vs exhaustive enumeration
  stats::ChiSquare exact_fit;      // strategy B vs exhaustive enumeration
  stats::ChiSquare cross;          // strategy A vs strategy B
  bool pass = false;
  nlohmann::json summary;
};

// Chi-square of sampled labelled shapes against the exhaustive enumeration,
// plus a two-sample consistency check between the two strategies.
inline UniformityResult run_uniformity_suite(const UniformityConfig& cfg) {
  UniformityResult result;
  const ModelParams params = ModelParams::make(cfg.model.k, cfg.model.omega);
  const auto all = exact_small_sampler(params, cfg.n, RootMode::Free, cfg.enum_cap);
  std::map<std::string, std::uint64_t> support;
  for (const auto& t : all) support[canonical_code(t, CodeMode::Labeled)] = 0;
  result.cells = support.size();

  RngHandle rng(cfg.seed);
  std::map<std::string, std::uint64_t> counts_a, counts_b;
  ConditionedOptions rej{Strategy::Rejection, RootMode::Free};
  ConditionedOptions exa{Strategy::Exact, RootMode::Free};
  const ConditionedSampler sa(params, cfg.n, rej);
  const ConditionedSampler sb(params, cfg.n, exa);
  for (std::uint64_t i = 0; i < cfg.draws; ++i) {
    const std::string ca = canonical_code(sa.sample(rng), CodeMode::Labeled);
    const std::string cb = canonical_code(sb.sample(rng), CodeMode::Labeled);
    if (!support.count(ca) || !support.count(cb))
      throw Error("sampler produced a tree outside the exhaustive enumeration");
    ++counts_a[ca];
    ++counts_b[cb];
  }
  result.rejection_fit = stats::chi_square_uniform(counts_a, result.cells);
  result.exact_fit = stats::chi_square_uniform(counts_b, result.cells);
  result.cross = stats::chi_square_two_sample(counts_a, counts_b);
  result.pass = result.rejection_fit.pvalue > cfg.alpha &&
                result.exact_fit.pvalue > cfg.alpha &&
                result.cross.pvalue > cfg.alpha;
  result.summary = {{"schema_version", 1},
                    {"experiment", "uniformity"},
                    {"model", cfg.model.name()},
                    {"n", cfg.n},
                    {"draws", cfg.draws},
                    {"cells", result.cells},
                    {"seed", cfg.seed},
                    {"alpha", cfg.alpha},
                    {"pvalue_rejection", result.rejection_fit.pvalue},
                    {"pvalue_exact", result.exact_fit.pvalue},
                    {"pvalue_cross", result.cross.pvalue},
                    {"pass", result.pass}};
  return result;
}

// --- largest-component deficit --------------------------------------------------------

struct DeficitConfig {
  ModelSpec model;
  std::vector<int> n_list{500, 1000, 2000};
  int replicates = 1000;
  double epsilon = 0.25;
  std::uint64_t seed = 20250804;
  int threads = 1;
};

struct DeficitResult {
  std::string csv;
  nlohmann::json summary;
  std::vector<double> exceedance;  // fraction with deficit >= n^epsilon, per n
  bool decreasing = false;
};

inline DeficitResult run_deficit_experiment(const DeficitConfig& cfg) {
  DeficitResult result;
  const ModelParams params = ModelParams::make(cfg.model.k, cfg.model.omega);
  const RngHandle master(cfg.seed);
  result.csv = csv_header();
  for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
    const int n = cfg.n_list[ni];
    const ConditionedSampler sampler(params, n);
    std::vector<int> deficits(cfg.replicates);
    parallel_replicates(cfg.replicates, cfg.threads, [&](int i) {
      RngHandle rng = master.derived(ni * 7'000'003ULL + i);
      const CodingTree c = sampler.sample(rng);
      const auto sizes = root_component_sizes(c);
      const int largest =
          sizes.empty() ? 0 : *std::max_element(sizes.begin(), sizes.end());
      deficits[i] = n - largest;
    });
    const double threshold = std::pow(n, cfg.epsilon);
    int exceed = 0;
    for (int d : deficits) exceed += d >= threshold;
    const double frac = static_cast<double>(exceed) / cfg.replicates;
    result.exceedance.push_back(frac);
    StatRow r{"deficit", cfg.model.k, cfg.model.omega.to_string(), n,
              master.derived(ni * 7'000'003ULL).seed(), "exceedance_fraction",
              frac};
    append_csv_row(result.csv, r);
  }
  result.decreasing = true;
  for (std::size_t i = 1; i < result.exceedance.size(); ++i)
    result.decreasing &= result.exceedance[i] < result.exceedance[i - 1];
  result.summary = {{"schema_version", 1},
                    {"experiment", "deficit"},
                    {"model", cfg.model.name()},
                    {"n_list", cfg.n_list},
                    {"replicates", cfg.replicates},
                    {"epsilon", cfg.epsilon},
                    {"seed", cfg.seed},
                    {"exceedance", result.exceedance},
                    {"strictly_decreasing", result.decreasing}};
  return result;
}

}  // namespace ktree

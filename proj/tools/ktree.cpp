// Command-line surface over the Omega-k-tree toolkit: exact counting,
// sampling, distance checks and the limit-theorem experiment suites.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "ktree/experiments.hpp"
#include "ktree/metrics.hpp"
#include "ktree/model.hpp"
#include "ktree/samplers.hpp"
#include "ktree/series.hpp"
#include "ktree/trees.hpp"

namespace {

using nlohmann::json;

struct GlobalOpts {
  std::uint64_t seed = 1;
  int threads = 1;
  std::string format = "csv";
  std::string out;
};

void write_output(const GlobalOpts& g, const std::string& payload,
                  const json* summary = nullptr) {
  if (!g.out.empty()) {
    std::ofstream f(g.out);
    f << payload;
    if (summary) std::cout << summary->dump(2) << "\n";
  } else {
    std::cout << payload;
    if (summary) std::cerr << summary->dump(2) << "\n";
  }
}

std::vector<ktree::ModelSpec> parse_models(const std::string& spec) {
  // semicolon-separated "k:omega" entries, e.g. "1:N0;2:N0;2:{0,1,2}"
  std::vector<ktree::ModelSpec> models;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ';')) {
    if (tok.empty()) continue;
    const auto colon = tok.find(':');
    if (colon == std::string::npos)
      throw CLI::ValidationError("--models entries look like k:omega");
    models.push_back({std::stoi(tok.substr(0, colon)),
                      ktree::OmegaSet::parse(tok.substr(colon + 1))});
  }
  return models;
}

ktree::ModelSpec make_spec(int k, const std::string& omega) {
  return {k, ktree::OmegaSet::parse(omega)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constructive toolkit for random Omega-k-trees"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  app.set_config("--config", "", "flat key=value config file; flags override");

  GlobalOpts g;
  app.add_option("--seed", g.seed, "master seed")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads")->capture_default_str();
  app.add_option("--format", g.format, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_option("--out", g.out, "output file (default stdout)");

  int k = 2;
  std::string omega = "N0";
  const auto add_model_opts = [&](CLI::App* cmd) {
    cmd->add_option("--k", k, "clique parameter")->capture_default_str();
    cmd->add_option("--omega", omega, "degree set, N0 or e.g. {0,1,2}")
        ->capture_default_str();
  };

  // params
  auto* cmd_params = app.add_subcommand("params", "analytic constants report");
  double tol = 1e-12;
  add_model_opts(cmd_params);
  cmd_params->add_option("--tol", tol, "solver tolerance")->capture_default_str();
  cmd_params->callback([&] {
    const auto p = ktree::ModelParams::make(k, ktree::OmegaSet::parse(omega), tol);
    write_output(g, p.to_json().dump(2) + "\n");
  });

  // count
  auto* cmd_count = app.add_subcommand("count", "exact enumeration table");
  int max_n = 10;
  bool unlabeled = false;
  add_model_opts(cmd_count);
  cmd_count->add_option("--max-n", max_n, "largest size")->capture_default_str();
  cmd_count->add_flag("--unlabeled", unlabeled,
                      "emit unlabeled shape counts (Omega = N0 only)");
  cmd_count->callback([&] {
    const auto w = ktree::OmegaSet::parse(omega);
    if (unlabeled) {
      const auto u = ktree::unlabeled_counts(k, w, max_n);
      if (g.format == "json") {
        json j = json::array();
        for (int n = 0; n <= max_n; ++n)
          j.push_back({{"n", n},
                       {"a", u.black_rooted.coeffs[n].get_str()},
                       {"u", u.white_rooted.coeffs[n].get_str()}});
        write_output(g, j.dump(2) + "\n");
      } else {
        std::string csv = "n,a,u\n";
        for (int n = 0; n <= max_n; ++n)
          csv += std::to_string(n) + "," + u.black_rooted.coeffs[n].get_str() +
                 "," + u.white_rooted.coeffs[n].get_str() + "\n";
        write_output(g, csv);
      }
      return;
    }
    const auto lc = ktree::labelled_counts(k, w, max_n);
    if (g.format == "json") {
      json j = json::array();
      for (int n = 1; n <= max_n; ++n)
        j.push_back({{"n", n},
                     {"b", lc.b[n].get_str()},
                     {"c", lc.c[n].get_str()},
                     {"par", ktree::partial_ktree_count_from(lc, k, n).get_str()}});
      write_output(g, j.dump(2) + "\n");
    } else {
      std::string csv = "n,b,c,par\n";
      for (int n = 1; n <= max_n; ++n)
        csv += std::to_string(n) + "," + lc.b[n].get_str() + "," +
               lc.c[n].get_str() + "," +
               ktree::partial_ktree_count_from(lc, k, n).get_str() + "\n";
      write_output(g, csv);
    }
  });

  // sample
  auto* cmd_sample = app.add_subcommand("sample", "random coding trees");
  int sample_n = 100, sample_count = 1;
  std::string strategy = "exact";
  bool as_graph = false, reduced = false;
  add_model_opts(cmd_sample);
  cmd_sample->add_option("--n", sample_n, "black nodes")->capture_default_str();
  cmd_sample->add_option("--count", sample_count, "samples")->capture_default_str();
  cmd_sample->add_option("--strategy", strategy, "rejection|exact")
      ->check(CLI::IsMember({"rejection", "exact"}))
      ->capture_default_str();
  cmd_sample->add_flag("--graph", as_graph, "emit k-tree edge lists");
  cmd_sample->add_flag("--reduced", reduced, "reduced trees (root degree 1)");
  cmd_sample->callback([&] {
    const auto p = ktree::ModelParams::make(k, ktree::OmegaSet::parse(omega));
    ktree::ConditionedOptions opts;
    opts.strategy = strategy == "exact" ? ktree::Strategy::Exact
                                        : ktree::Strategy::Rejection;
    opts.root = reduced ? ktree::RootMode::Reduced : ktree::RootMode::Free;
    const ktree::ConditionedSampler sampler(p, sample_n, opts);
    ktree::RngHandle rng(g.seed);
    std::string payload;
    for (int i = 0; i < sample_count; ++i) {
      const auto c = sampler.sample(rng);
      payload += as_graph ? ktree::ktree_edge_list(ktree::phi_inverse(c))
                          : ktree::coding_tree_to_json(c).dump() + "\n";
    }
    write_output(g, payload);
  });

  // distances
  auto* cmd_dist = app.add_subcommand("distances", "Algorithm 1 marks");
  std::string in_file;
  bool check_lemma = false;
  std::uint64_t pair_budget = 100000;
  cmd_dist->add_option("--in", in_file, "coding tree json (one per line)")
      ->required();
  cmd_dist->add_flag("--check-lemma", check_lemma,
                     "histogram of dist - delta over black pairs");
  cmd_dist->add_option("--pairs", pair_budget, "sampled pairs per tree")
      ->capture_default_str();
  cmd_dist->callback([&] {
    std::ifstream f(in_file);
    if (!f) throw CLI::ValidationError("cannot open " + in_file);
    std::string line, payload;
    ktree::RngHandle rng(g.seed);
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      const auto c = ktree::coding_tree_from_json(json::parse(line));
      const auto dt = ktree::algorithm1(c);
      if (check_lemma) {
        const auto bd = ktree::block_decompose(c, dt);
        const auto g2 = ktree::phi_inverse(c);
        const auto rep = ktree::check_dist_delta(g2, c, bd, &rng, pair_budget);
        json j = {{"pairs", rep.pairs},
                  {"histogram",
                   {rep.histogram[0], rep.histogram[1], rep.histogram[2],
                    rep.histogram[3]}}};
        payload += j.dump() + "\n";
      } else {
        json j = json::object();
        for (int v = 1; v < static_cast<int>(dt.by_label.size()); ++v)
          j[std::to_string(v)] = dt.by_label[v];
        payload += j.dump() + "\n";
      }
    }
    write_output(g, payload);
  });

  // gh
  auto* cmd_gh = app.add_subcommand("gh", "brute-force Gromov-Hausdorff");
  std::string file_a, file_b;
  bool pointed = false;
  cmd_gh->add_option("--a", file_a, "metric space json {\"d\":[[..]],\"base\":0}")
      ->required();
  cmd_gh->add_option("--b", file_b, "metric space json")->required();
  cmd_gh->add_flag("--pointed", pointed, "match the base points");
  cmd_gh->callback([&] {
    const auto load = [](const std::string& path) {
      std::ifstream f(path);
      if (!f) throw CLI::ValidationError("cannot open " + path);
      json j;
      f >> j;
      ktree::FiniteMetricSpace m;
      m.d = j.at("d").get<std::vector<std::vector<double>>>();
      m.base = j.value("base", 0);
      m.validate();
      return m;
    };
    const auto x = load(file_a), y = load(file_b);
    const double d = ktree::gh_bruteforce(x, y, {pointed, 7});
    json j = {{"d_gh", d}, {"pointed", pointed}};
    write_output(g, j.dump(2) + "\n");
  });

  // scaling
  auto* cmd_scaling = app.add_subcommand("scaling", "CRT scaling-limit experiment");
  std::string models_spec = "1:N0;2:N0;2:{0,1,2}";
  int scaling_n = 5000, replicates = 2000;
  cmd_scaling->add_option("--models", models_spec, "semicolon-separated k:omega")
      ->capture_default_str();
  cmd_scaling->add_option("--n", scaling_n, "tree size")->capture_default_str();
  cmd_scaling->add_option("--replicates", replicates, "samples per model")
      ->capture_default_str();
  double ks_alpha = 1e-3;
  cmd_scaling->add_option("--ks-alpha", ks_alpha, "KS significance")
      ->capture_default_str();
  cmd_scaling->callback([&] {
    ktree::ScalingConfig cfg;
    cfg.models = parse_models(models_spec);
    cfg.n = scaling_n;
    cfg.replicates = replicates;
    cfg.seed = g.seed;
    cfg.threads = g.threads;
    cfg.ks_alpha = ks_alpha;
    const auto res = ktree::run_scaling_experiment(cfg);
    write_output(g, res.csv, &res.summary);
  });

  // local
  auto* cmd_local = app.add_subcommand("local", "local weak limit experiment");
  std::string n_list = "500,1000,2000";
  int samples = 10000, limit_samples = 100000, height = 2, ell = 1;
  add_model_opts(cmd_local);
  cmd_local->add_option("--n-list", n_list, "comma-separated sizes")
      ->capture_default_str();
  cmd_local->add_option("--samples", samples, "samples per size")
      ->capture_default_str();
  cmd_local->add_option("--limit-samples", limit_samples, "limit-object draws")
      ->capture_default_str();
  cmd_local->add_option("--height", height, "truncation height h")
      ->capture_default_str();
  cmd_local->add_option("--ell", ell, "neighborhood radius")
      ->capture_default_str();
  cmd_local->callback([&] {
    ktree::LocalConfig cfg;
    cfg.model = make_spec(k, omega);
    cfg.n_list.clear();
    std::stringstream ss(n_list);
    std::string tok;
    while (std::getline(ss, tok, ',')) cfg.n_list.push_back(std::stoi(tok));
    cfg.samples_per_n = samples;
    cfg.limit_samples = limit_samples;
    cfg.height = height;
    cfg.ell = ell;
    cfg.seed = g.seed;
    cfg.threads = g.threads;
    const auto res = ktree::run_local_experiment(cfg);
    write_output(g, res.csv, &res.summary);
  });

  // uniformity
  auto* cmd_unif = app.add_subcommand("uniformity", "sampler vs enumeration");
  int unif_n = 3;
  std::uint64_t draws = 100000;
  add_model_opts(cmd_unif);
  cmd_unif->add_option("--n", unif_n, "size (enumeration scale)")
      ->capture_default_str();
  cmd_unif->add_option("--draws", draws, "samples per strategy")
      ->capture_default_str();
  cmd_unif->callback([&] {
    ktree::UniformityConfig cfg;
    cfg.model = make_spec(k, omega);
    cfg.n = unif_n;
    cfg.draws = draws;
    cfg.seed = g.seed;
    const auto res = ktree::run_uniformity_suite(cfg);
    write_output(g, res.summary.dump(2) + "\n");
  });

  // deficit
  auto* cmd_def = app.add_subcommand("deficit", "largest-component deficit trend");
  std::string def_n_list = "500,1000,2000";
  int def_reps = 1000;
  double epsilon = 0.25;
  add_model_opts(cmd_def);
  cmd_def->add_option("--n-list", def_n_list, "comma-separated sizes")
      ->capture_default_str();
  cmd_def->add_option("--replicates", def_reps, "samples per size")
      ->capture_default_str();
  cmd_def->add_option("--epsilon", epsilon, "threshold exponent")
      ->capture_default_str();
  cmd_def->callback([&] {
    ktree::DeficitConfig cfg;
    cfg.model = make_spec(k, omega);
    cfg.n_list.clear();
    std::stringstream ss(def_n_list);
    std::string tok;
    while (std::getline(ss, tok, ',')) cfg.n_list.push_back(std::stoi(tok));
    cfg.replicates = def_reps;
    cfg.epsilon = epsilon;
    cfg.seed = g.seed;
    cfg.threads = g.threads;
    const auto res = ktree::run_deficit_experiment(cfg);
    write_output(g, res.csv, &res.summary);
  });

  try {
    CLI11_PARSE(app, argc, argv);
  } catch (const ktree::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

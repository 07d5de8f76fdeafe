// Copyright 2026 The fairrank Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end for the fairrank workbench.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fairrank/datagen.hpp"
#include "fairrank/dataio.hpp"
#include "fairrank/desiderata.hpp"
#include "fairrank/experiment.hpp"
#include "fairrank/interventions.hpp"
#include "fairrank/render.hpp"

namespace fs = std::filesystem;
using namespace fairrank;

namespace {

constexpr int kStageError = 1;
constexpr int kUsageError = 2;

fs::path output_root() {
  const char* env = std::getenv("FAIRRANK_OUTPUT_ROOT");
  return env && *env ? fs::path(env) : fs::path("runs");
}

// Options shared by every subcommand that builds an ExperimentConfig.
struct ConfigOptions {
  std::string preset = "desk";
  std::string dataset = "synth-normal";
  std::string config_file;
  std::string libsvm;
  std::vector<std::uint64_t> seeds;
  std::optional<std::size_t> n;
  std::optional<int> iterations;
  std::optional<int> checkpoint_every;
  std::optional<int> k;
  std::optional<int> jobs;
  std::optional<int> click_log_iterations;
  std::vector<std::string> interventions;
  std::string selection_rule;
  std::string out;

  void attach(CLI::App* app) {
    app->add_option("--preset", preset, "desk or full")->check(CLI::IsMember({"desk", "full"}));
    app->add_option("--dataset", dataset, "synth-normal, synth-pareto or fairtrec-like");
    app->add_option("--config", config_file, "JSON config; flags override its values");
    app->add_option("--libsvm", libsvm, "read items from a libsvm file instead of generating them");
    app->add_option("--seeds", seeds, "training seeds");
    app->add_option("--n", n, "number of synthetic items");
    app->add_option("--iterations", iterations, "training iterations");
    app->add_option("--checkpoint-every", checkpoint_every, "iterations between checkpoints");
    app->add_option("--k", k, "top-k cutoff for exposure and interventions");
    app->add_option("--jobs", jobs, "seeds trained in parallel");
    app->add_option("--click-log", click_log_iterations, "dump sessions of the first N iterations");
    app->add_option("--intervention", interventions, "none, detcons, detconstsort (repeatable)");
    app->add_option("--selection-rule", selection_rule, "proportional or geyik");
    app->add_option("--out", out, "run directory (default: $FAIRRANK_OUTPUT_ROOT/<dataset>)");
  }

  ExperimentConfig build() const {
    ExperimentConfig cfg = preset_config(preset_from_string(preset), dataset);
    cfg.output_dir = output_root() / dataset;
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw Error("missing file: " + config_file);
      cfg = experiment_config_from_json(nlohmann::json::parse(in), cfg);
    }
    nlohmann::json patch = nlohmann::json::object();
    if (!libsvm.empty()) {
      patch["dataset"]["source"] = "libsvm";
      patch["dataset"]["path"] = libsvm;
      patch["dataset"]["name"] = fs::path(libsvm).stem().string();
    }
    if (!seeds.empty()) patch["seeds"] = seeds;
    if (n) patch["dataset"]["dag"]["n"] = *n;
    if (iterations) patch["train"]["iterations"] = *iterations;
    if (checkpoint_every) patch["train"]["checkpoint_every"] = *checkpoint_every;
    if (k) patch["k"] = *k;
    if (jobs) patch["jobs"] = *jobs;
    if (click_log_iterations) patch["click_log_iterations"] = *click_log_iterations;
    if (!interventions.empty()) {
      patch["interventions"] = nlohmann::json::array();
      for (const auto& i : interventions)
        if (i != "none") patch["interventions"].push_back(i);
    }
    if (!selection_rule.empty()) patch["selection_rule"] = selection_rule;
    if (!out.empty()) patch["output_dir"] = out;
    return experiment_config_from_json(patch, cfg);
  }
};

void print_run(const RunSummary& run) {
  std::cout << "run " << run.dir.string() << " (config " << run.config_hash << ")\n";
  for (const auto& s : run.seeds) {
    std::cout << "  seed " << s.seed << ": ";
    if (s.ok) std::cout << "ok, best iteration " << s.best_iteration << "\n";
    else std::cout << "error: " << s.error << "\n";
  }
}

int run_all(const ConfigOptions& base, const std::vector<std::string>& datasets, bool sweep, int bins,
            bool reuse) {
  std::vector<std::pair<std::string, DesiderataReport>> rows;
  bool ok = true;
  for (const auto& name : datasets) {
    ConfigOptions opt = base;
    opt.dataset = name;
    opt.out = base.out.empty() ? "" : (fs::path(base.out) / name).string();
    const auto cfg = opt.build();
    const auto run = run_experiment(cfg, reuse);
    print_run(run);
    ok = ok && run.ok();
    if (std::any_of(run.seeds.begin(), run.seeds.end(), [](const SeedOutcome& s) { return s.ok; })) {
      std::cout << format_comparison_table(compare_fairness(cfg.output_dir));
      RenderOptions ro;
      ro.histogram_bins = bins;
      render_run(cfg.output_dir, ro);
    }
    rows.emplace_back(name, run.desiderata);
    if (sweep && name != "fairtrec-like") {
      ExperimentConfig sc = cfg;
      sc.output_dir = cfg.output_dir / "imbalance";
      const auto rep = sweep_imbalance(sc, default_sweep_fractions(), reuse);
      for (const auto& e : rep.errors) std::cerr << "sweep: " << e << "\n";
      ok = ok && rep.errors.empty();
    }
  }
  const std::string table = format_verdict_table(rows);
  std::cout << table;
  const fs::path root = base.out.empty() ? output_root() : fs::path(base.out);
  fs::create_directories(root);
  std::ofstream(root / "desiderata_table.txt") << table;
  return ok ? 0 : kStageError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fairrank: click-based relevance and exposure fairness workbench"};
  app.require_subcommand(1);
  int exit_code = 0;

  // generate
  auto* gen = app.add_subcommand("generate", "sample a synthetic dataset and write it as libsvm");
  std::string gen_dataset = "synth-normal", gen_preset = "full", gen_out;
  std::optional<std::size_t> gen_n;
  std::uint64_t gen_seed = 0;
  gen->add_option("--dataset", gen_dataset, "synth-normal, synth-pareto or fairtrec-like");
  gen->add_option("--preset", gen_preset)->check(CLI::IsMember({"desk", "full"}));
  gen->add_option("--n", gen_n, "number of items");
  gen->add_option("--seed", gen_seed, "data seed");
  gen->add_option("--out", gen_out, "output file")->required();
  gen->callback([&] {
    auto spec = dataset_preset(gen_dataset, preset_from_string(gen_preset));
    if (gen_n) spec.dag.n = *gen_n;
    spec.data_seed = gen_seed;
    const auto data = sample_synthetic(spec.dag, spec.data_seed);
    std::ofstream out(gen_out);
    if (!out) throw Error("cannot write " + gen_out);
    write_libsvm(out, data.dataset);
    // Sidecar with the generating config and the continuous utility per id.
    nlohmann::ordered_json side;
    side["dataset"] = gen_dataset;
    side["seed"] = gen_seed;
    side["dag"] = to_json(spec.dag);
    side["utility"] = std::vector<double>(data.utility.data(), data.utility.data() + data.utility.size());
    write_json_file(gen_out + ".json", side);
    std::cout << "wrote " << data.dataset.size() << " items to " << gen_out << "\n";
  });

  // train / run
  ConfigOptions train_opt;
  auto* train_cmd = app.add_subcommand("train", "train every seed and write a run directory");
  train_opt.attach(train_cmd);
  bool print_config = false;
  train_cmd->add_flag("--print-config", print_config, "print the resolved config and exit");
  train_cmd->callback([&] {
    const auto cfg = train_opt.build();
    if (print_config) {
      std::cout << canonical_json(to_json(cfg)).dump(2) << "\n";
      return;
    }
    const auto run = run_experiment(cfg);
    print_run(run);
    if (!run.ok()) exit_code = kStageError;
  });

  // audit
  auto* audit_cmd = app.add_subcommand("audit", "audit the five desiderata over a run directory");
  std::string audit_dir;
  audit_cmd->add_option("run", audit_dir, "run directory")->required();
  audit_cmd->callback([&] {
    const auto report = audit_run(audit_dir);
    const auto run = load_run(audit_dir);
    std::cout << format_verdict_table({{run.config.dataset.name, report}});
  });

  // intervene
  auto* iv_cmd = app.add_subcommand("intervene", "re-rank the top k of every seed in a run directory");
  std::string iv_dir, iv_alg = "detcons", iv_rule = "proportional", iv_relevance = "predicted";
  int iv_k = 10;
  iv_cmd->add_option("run", iv_dir, "run directory")->required();
  iv_cmd->add_option("--algorithm", iv_alg)->check(CLI::IsMember({"none", "detcons", "detconstsort"}));
  iv_cmd->add_option("--k", iv_k);
  iv_cmd->add_option("--selection-rule", iv_rule)->check(CLI::IsMember({"proportional", "geyik"}));
  iv_cmd->add_option("--relevance", iv_relevance, "relevance for targets and metrics")
      ->check(CLI::IsMember({"true", "predicted"}));
  iv_cmd->callback([&] {
    const auto run = load_run(iv_dir);
    const auto alg = algorithm_from_string(iv_alg);
    const auto rule = iv_rule == "geyik" ? SelectionRule::kGeyik : SelectionRule::kProportional;
    const bool use_true = iv_relevance == "true";
    const std::string tag = iv_alg + "_k" + std::to_string(iv_k) + "_" + iv_rule + "_" + iv_relevance;
    std::ofstream csv(fs::path(iv_dir) / ("intervention_" + tag + ".csv"));
    csv << "seed,stage,metric,value\n";
    for (const auto& s : run.seeds) {
      const Vector rel = use_true ? to_vector(s.test_grades) : s.test_softmax;
      const auto res = evaluate_intervention(s.test_logits, rel, s.test_grades, s.test_groups, alg, iv_k,
                                             use_true ? ScoreSource::kTrueGrade : ScoreSource::kPredicted, rule,
                                             run.config.normalize);
      std::ofstream top(fs::path(iv_dir) / ("seed_" + std::to_string(s.seed)) / ("reranked_" + tag + ".csv"));
      write_reranked_csv(top, res.top, s.test_ids);
      for (const auto& [stage, rep] : {std::pair{"pre", res.pre}, std::pair{"post", res.post}}) {
        const double ef = rep.exposure_fairness.defined ? rep.exposure_fairness.value : std::nan("");
        csv << s.seed << ',' << stage << ",exposure_fairness," << format_real(ef) << '\n';
        csv << s.seed << ',' << stage << ",ndcg," << format_real(rep.ndcg_at_k) << '\n';
      }
      std::cout << "seed " << s.seed << ": exposure fairness " << format_real(res.pre.exposure_fairness.value)
                << " -> " << format_real(res.post.exposure_fairness.value) << "\n";
    }
  });

  // compare
  auto* cmp_cmd = app.add_subcommand("compare", "paired tests of true vs predicted relevance fairness");
  std::string cmp_dir;
  cmp_cmd->add_option("run", cmp_dir, "run directory")->required();
  cmp_cmd->callback([&] { std::cout << format_comparison_table(compare_fairness(cmp_dir)); });

  // sweep-imbalance
  ConfigOptions sweep_opt;
  auto* sweep_cmd = app.add_subcommand("sweep-imbalance", "exposure fairness gap across group imbalance");
  sweep_opt.attach(sweep_cmd);
  std::vector<double> fractions = default_sweep_fractions();
  std::optional<std::size_t> subsample_n;
  sweep_cmd->add_option("--fractions", fractions, "majority-group shares");
  sweep_cmd->add_option("--subsample", subsample_n, "items kept per subsample");
  bool sweep_reuse = false;
  sweep_cmd->add_flag("--reuse", sweep_reuse, "keep finished runs of the same config");
  sweep_cmd->callback([&] {
    auto cfg = sweep_opt.build();
    if (sweep_opt.out.empty()) cfg.output_dir = output_root() / sweep_opt.dataset / "imbalance";
    if (subsample_n) cfg.dataset.subsample_n = *subsample_n;
    const auto rep = sweep_imbalance(cfg, fractions, sweep_reuse);
    std::cout << "fraction  mean delta (predicted - true)\n";
    for (std::size_t i = 0; i < rep.fractions.size(); ++i)
      std::cout << format_real(rep.fractions[i]) << "       " << format_real(rep.mean_delta[i]) << "\n";
    for (const auto& e : rep.errors) std::cerr << e << "\n";
    if (!rep.errors.empty()) exit_code = kStageError;
  });

  // render
  auto* render_cmd = app.add_subcommand("render", "write SVG plots and summary tables for a run");
  std::string render_dir;
  RenderOptions render_opt;
  render_cmd->add_option("run", render_dir, "run directory")->required();
  render_cmd->add_option("--bins", render_opt.histogram_bins, "histogram bins");
  render_cmd->callback([&] {
    for (const auto& f : render_run(render_dir, render_opt)) std::cout << f.string() << "\n";
  });

  // run-all
  ConfigOptions all_opt;
  auto* all_cmd = app.add_subcommand("run-all", "train, audit, compare and render every dataset");
  all_opt.attach(all_cmd);
  std::vector<std::string> all_datasets = {"synth-normal", "synth-pareto", "fairtrec-like"};
  bool all_sweep = false;
  int all_bins = 50;
  all_cmd->add_option("--datasets", all_datasets);
  all_cmd->add_flag("--sweep", all_sweep, "also run the imbalance sweep on synthetic datasets");
  all_cmd->add_option("--bins", all_bins, "histogram bins");
  bool all_reuse = false;
  all_cmd->add_flag("--reuse", all_reuse, "keep finished runs of the same config");
  all_cmd->callback([&] { exit_code = run_all(all_opt, all_datasets, all_sweep, all_bins, all_reuse); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ValidationError& e) {
    std::cerr << "fairrank: invalid input: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "fairrank: " << e.what() << "\n";
    return kStageError;
  }
  return exit_code;
}

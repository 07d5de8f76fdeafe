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

#include "fairrank/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "fairrank/metrics.hpp"

namespace fairrank {

namespace fs = std::filesystem;

namespace {

double round6(double v) {
  if (!std::isfinite(v)) return v;
  // strtod, unlike stod, accepts subnormals such as underflowed softmax tails.
  return std::strtod(format_real(v).c_str(), nullptr);
}

Vector round6(const Vector& v) { return v.unaryExpr([](double x) { return round6(x); }); }

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("missing file: " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const fs::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Reads a headed CSV; every row must have as many cells as the header.
std::vector<std::vector<std::string>> read_csv(const fs::path& file,
                                               const std::vector<std::string>& expected_header) {
  std::ifstream in(file);
  if (!in) throw Error("missing file: " + file.string());
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) != expected_header)
    throw ParseError(1, file.string() + ": unexpected header");
  std::vector<std::vector<std::string>> rows;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != expected_header.size())
      throw ParseError(n, file.string() + ": expected " + std::to_string(expected_header.size()) +
                              " cells");
    rows.push_back(std::move(cells));
  }
  return rows;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw ValidationError("not a number: '" + s + "'");
  return v;
}

std::string fraction_label(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", f);
  return buf;
}

const std::vector<std::string> kPredictionHeader = {"split", "item_id", "logit", "softmax", "grade", "group"};
const std::vector<std::string> kFairnessHeader = {"seed", "ranking", "relevance", "metric", "value"};

void write_predictions(std::ostream& out, const Dataset& ds, const Vector& logits, const Vector& softmax) {
  out << "split,item_id,logit,softmax,grade,group\n";
  const std::string split_name(to_string(ds.split));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& it = ds.items[i];
    const auto r = static_cast<Index>(i);
    out << split_name << ',' << it.id << ',' << format_real(logits[r]) << ','
        << format_real(softmax[r]) << ',' << it.grade << ',' << it.group << '\n';
  }
}

struct PredictionTable {
  std::vector<std::int64_t> ids;
  Vector logits;
  Vector softmax;
  std::vector<int> grades;
  std::vector<int> groups;
};

PredictionTable read_predictions(const fs::path& file) {
  const auto rows = read_csv(file, kPredictionHeader);
  PredictionTable t;
  t.logits.resize(static_cast<Index>(rows.size()));
  t.softmax.resize(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    t.ids.push_back(std::stoll(rows[i][1]));
    t.logits[static_cast<Index>(i)] = parse_double(rows[i][2]);
    t.softmax[static_cast<Index>(i)] = parse_double(rows[i][3]);
    t.grades.push_back(std::stoi(rows[i][4]));
    t.groups.push_back(std::stoi(rows[i][5]));
  }
  return t;
}

void add_report_rows(std::vector<FairnessRow>& rows, std::uint64_t seed, const std::string& ranking,
                     const FairnessReport& r) {
  const std::string rel(to_string(r.relevance_source));
  const auto add = [&](const char* metric, double v) { rows.push_back({seed, ranking, rel, metric, v}); };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  add("ndcg", r.ndcg_at_k);
  add("exposure_g0", r.exposure.g0);
  add("exposure_g1", r.exposure.g1);
  add("relevance_g0", r.relevance.g0);
  add("relevance_g1", r.relevance.g1);
  add("demographic_parity", r.demographic_parity.defined ? r.demographic_parity.value : nan);
  add("exposure_fairness", r.exposure_fairness.defined ? r.exposure_fairness.value : nan);
  add("individual_fairness", r.individual_fairness);
}

void write_fairness_rows(std::ostream& out, const std::vector<FairnessRow>& rows) {
  out << "seed,ranking,relevance,metric,value\n";
  for (const auto& r : rows)
    out << r.seed << ',' << r.ranking << ',' << r.relevance << ',' << r.metric << ','
        << format_real(r.value) << '\n';
}

std::string digest_dir(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) {
    all += f.filename().string();
    all.push_back('\0');
    all += read_file(f);
  }
  return fnv1a_hex(all);
}

fs::path seed_dir(const fs::path& run, std::uint64_t seed) {
  return run / ("seed_" + std::to_string(seed));
}

struct SeedResult {
  SeedOutcome outcome;
  std::vector<FairnessRow> rows;
};

SeedResult run_seed(const ExperimentConfig& cfg, const DatasetSplit& data, std::uint64_t seed) {
  SeedResult res;
  res.outcome.seed = seed;
  const fs::path dir = seed_dir(cfg.output_dir, seed);
  fs::create_directories(dir);

  TrainConfig tc = cfg.train;
  tc.seed = seed;

  std::ofstream clicks;
  std::size_t session_id = 0;
  SessionObserver observe;
  if (cfg.click_log_iterations > 0) {
    clicks = open_out(dir / "clicks.csv");
    write_click_log_header(clicks);
    observe = [&](int iteration, const ClickSession& s) {
      if (iteration <= cfg.click_log_iterations) write_click_log(clicks, session_id++, s);
    };
  }
  const TrainedModel model = train(data.train, data.validation, cfg.pbm, tc, observe);
  if (clicks.is_open()) clicks.close();

  nlohmann::ordered_json summary;
  summary["seed"] = seed;
  summary["best_iteration"] = model.best_checkpoint().iteration;
  summary["checkpoints"] = nlohmann::ordered_json::array();
  for (const auto& ck : model.checkpoints) {
    const Vector logits = round6(ck.validation_logits);
    auto out = open_out(dir / ("predictions_" + std::to_string(ck.iteration) + ".csv"));
    write_predictions(out, data.validation, logits, round6(softmax(logits)));
    nlohmann::ordered_json cj;
    cj["iteration"] = ck.iteration;
    cj["validation_ndcg"] = ck.validation_ndcg;
    cj["file"] = "predictions_" + std::to_string(ck.iteration) + ".csv";
    summary["checkpoints"].push_back(cj);
  }
  summary["loss_history"] = model.loss_history;
  save_checkpoint(model.best_checkpoint().scorer, dir / "model_best",
                  {{"seed", seed}, {"iteration", model.best_checkpoint().iteration}});

  const auto pred = predict(model.best_checkpoint().scorer, data.test);
  const Vector logits = round6(pred.logits);
  const Vector soft = round6(pred.softmax);
  {
    auto out = open_out(dir / "predictions_test.csv");
    write_predictions(out, data.test, logits, soft);
  }

  const auto grades = data.test.grades();
  const auto groups = data.test.groups();
  const Vector truth = to_vector(grades);
  const Ranking ranking = rank_by_scores(logits);
  const auto rep_true =
      fairness_report(ranking, truth, grades, groups, cfg.k, ScoreSource::kTrueGrade, cfg.normalize);
  const auto rep_pred =
      fairness_report(ranking, soft, grades, groups, cfg.k, ScoreSource::kPredicted, cfg.normalize);
  add_report_rows(res.rows, seed, "model", rep_true);
  add_report_rows(res.rows, seed, "model", rep_pred);
  summary["fairness"]["model"] = {to_json(rep_true), to_json(rep_pred)};

  const auto ids = data.test.ids();
  for (const auto alg : cfg.interventions) {
    if (alg == Algorithm::kNone) continue;
    const std::string name(to_string(alg));
    const auto iv = evaluate_intervention(logits, soft, grades, groups, alg, cfg.k,
                                          ScoreSource::kPredicted, cfg.selection_rule, cfg.normalize);
    const auto post_true =
        fairness_report(iv.ranking, truth, grades, groups, cfg.k, ScoreSource::kTrueGrade, cfg.normalize);
    add_report_rows(res.rows, seed, name, post_true);
    add_report_rows(res.rows, seed, name, iv.post);
    auto out = open_out(dir / ("reranked_" + name + ".csv"));
    write_reranked_csv(out, iv.top, ids);
    summary["fairness"][name] = {to_json(post_true), to_json(iv.post)};
    summary["targets"][name] = iv.target.p;
  }
  {
    auto out = open_out(dir / "summary.json");
    out << canonical_json(summary).dump(2) << '\n';
  }
  res.outcome.ok = true;
  res.outcome.best_iteration = model.best_checkpoint().iteration;
  res.outcome.digest = digest_dir(dir);
  return res;
}

std::string selection_rule_name(SelectionRule r) {
  return r == SelectionRule::kGeyik ? "geyik" : "proportional";
}

SelectionRule selection_rule_from(const std::string& s) {
  if (s == "geyik") return SelectionRule::kGeyik;
  if (s == "proportional") return SelectionRule::kProportional;
  throw ValidationError("unknown selection rule '" + s + "'");
}

nlohmann::ordered_json dataset_summary(const DatasetSplit& d) {
  nlohmann::ordered_json j;
  for (const auto* part : {&d.train, &d.validation, &d.test}) {
    nlohmann::ordered_json pj;
    pj["n"] = part->size();
    std::vector<std::size_t> grade_counts(static_cast<std::size_t>(part->grade_max + 1), 0);
    std::size_t g1 = 0;
    for (const auto& it : part->items) {
      ++grade_counts[static_cast<std::size_t>(it.grade)];
      g1 += it.group == 1;
    }
    pj["grade_counts"] = grade_counts;
    pj["group1"] = g1;
    j[std::string(to_string(part->split))] = pj;
  }
  return j;
}

double mean_of(const std::vector<double>& v) { return v.empty() ? std::nan("") : stats::mean(v); }
double sd_of(const std::vector<double>& v) { return v.empty() ? std::nan("") : stats::stddev(v); }

}  // namespace

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ValidationError("at least one seed is required");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw ValidationError("seeds must be distinct");
  if (k < 1) throw ValidationError("k must be >= 1");
  if (jobs < 1) throw ValidationError("jobs must be >= 1");
  if (click_log_iterations < 0) throw ValidationError("click_log_iterations must be >= 0");
  if (dataset.source == DatasetSpec::Source::kSynthetic) dataset.dag.validate();
  else if (dataset.path.empty()) throw ValidationError("libsvm dataset needs a path");
  if (dataset.majority_fraction && !(*dataset.majority_fraction >= 0.0 && *dataset.majority_fraction <= 1.0))
    throw ValidationError("majority fraction must lie in [0, 1]");
  pbm.validate();
  train.validate();
  thresholds.validate();
  if (output_dir.empty()) throw ValidationError("output directory is empty");
}

Preset preset_from_string(std::string_view name) {
  if (name == "desk") return Preset::kDesk;
  if (name == "full") return Preset::kFull;
  throw ValidationError("unknown preset '" + std::string(name) + "'");
}

DatasetSpec dataset_preset(std::string_view name, Preset preset) {
  DatasetSpec spec;
  spec.name = std::string(name);
  if (name == "synth-normal") {
    spec.dag.dist = Distribution::normal();
  } else if (name == "synth-pareto") {
    spec.dag.dist = Distribution::pareto();
  } else if (name == "fairtrec-like") {
    // Binary relevance and a 90 % majority group.
    spec.dag.dist = Distribution::normal();
    spec.dag.p_group = 0.1;
    spec.dag.n_grades = 2;
  } else {
    throw ValidationError("unknown dataset '" + std::string(name) +
                          "' (synth-normal, synth-pareto, fairtrec-like)");
  }
  spec.dag.n = preset == Preset::kDesk ? 5000 : 50000;
  spec.subsample_n = preset == Preset::kDesk ? 2500 : 25000;
  return spec;
}

ExperimentConfig preset_config(Preset preset, std::string_view dataset_name) {
  ExperimentConfig cfg;
  cfg.dataset = dataset_preset(dataset_name, preset);
  cfg.train.iterations = preset == Preset::kDesk ? 200 : 500;
  cfg.seeds.clear();
  for (std::uint64_t s = 0; s < (preset == Preset::kDesk ? 5u : 10u); ++s) cfg.seeds.push_back(s);
  cfg.interventions = {Algorithm::kDetCons, Algorithm::kDetConstSort};
  cfg.output_dir = fs::path("runs") / std::string(dataset_name);
  return cfg;
}

nlohmann::ordered_json to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  auto& d = j["dataset"];
  d["name"] = cfg.dataset.name;
  d["source"] = cfg.dataset.source == DatasetSpec::Source::kSynthetic ? "synthetic" : "libsvm";
  d["dag"] = to_json(cfg.dataset.dag);
  d["path"] = cfg.dataset.path.string();
  d["grade_max"] = cfg.dataset.grade_max;
  d["data_seed"] = cfg.dataset.data_seed;
  d["majority_fraction"] = cfg.dataset.majority_fraction ? nlohmann::json(*cfg.dataset.majority_fraction)
                                                         : nlohmann::json(nullptr);
  d["subsample_n"] = cfg.dataset.subsample_n;
  j["splits"] = {{"train", cfg.splits.train}, {"validation", cfg.splits.validation}, {"test", cfg.splits.test}};
  j["pbm"] = to_json(cfg.pbm);
  j["train"] = to_json(cfg.train);
  j["seeds"] = cfg.seeds;
  j["k"] = cfg.k;
  j["normalize"] = cfg.normalize;
  j["interventions"] = nlohmann::json::array();
  for (const auto a : cfg.interventions) j["interventions"].push_back(std::string(to_string(a)));
  j["selection_rule"] = selection_rule_name(cfg.selection_rule);
  j["thresholds"] = to_json(cfg.thresholds);
  j["audit_score"] = cfg.audit_score == AuditScore::kSoftmax ? "softmax" : "logit";
  j["click_log_iterations"] = cfg.click_log_iterations;
  j["jobs"] = cfg.jobs;
  j["output_dir"] = cfg.output_dir.string();
  return j;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& patch, ExperimentConfig base) {
  if (!patch.is_object()) throw ValidationError("experiment config must be a JSON object");
  nlohmann::json j = to_json(base);
  // A bare intervention name is accepted in place of a list.
  nlohmann::json p = patch;
  if (p.contains("intervention") && !p.contains("interventions")) {
    p["interventions"] = p["intervention"].is_array() ? p["intervention"] : nlohmann::json::array({p["intervention"]});
    p.erase("intervention");
  }
  if (p.contains("interventions") && p["interventions"].is_string())
    p["interventions"] = nlohmann::json::array({p["interventions"]});
  const bool fraction_given = p.contains("dataset") && p["dataset"].contains("majority_fraction");
  j.merge_patch(p);

  ExperimentConfig cfg;
  const auto& d = j.at("dataset");
  cfg.dataset.name = d.at("name").get<std::string>();
  const auto source = d.at("source").get<std::string>();
  if (source == "synthetic") cfg.dataset.source = DatasetSpec::Source::kSynthetic;
  else if (source == "libsvm") cfg.dataset.source = DatasetSpec::Source::kLibsvm;
  else throw ValidationError("unknown dataset source '" + source + "'");
  cfg.dataset.dag = dag_config_from_json(d.at("dag"));
  cfg.dataset.path = d.value("path", std::string());
  cfg.dataset.grade_max = d.value("grade_max", 4);
  cfg.dataset.data_seed = d.value("data_seed", std::uint64_t{0});
  if (d.contains("majority_fraction") && !d["majority_fraction"].is_null())
    cfg.dataset.majority_fraction = d["majority_fraction"].get<double>();
  else if (!fraction_given)
    cfg.dataset.majority_fraction = base.dataset.majority_fraction;
  cfg.dataset.subsample_n = d.value("subsample_n", cfg.dataset.subsample_n);
  const auto& s = j.at("splits");
  cfg.splits = {s.value("train", 0.7), s.value("validation", 0.1), s.value("test", 0.2)};
  cfg.pbm = pbm_config_from_json(j.at("pbm"));
  cfg.train = train_config_from_json(j.at("train"));
  cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  cfg.k = j.at("k").get<int>();
  cfg.normalize = j.at("normalize").get<bool>();
  for (const auto& a : j.at("interventions")) cfg.interventions.push_back(algorithm_from_string(a.get<std::string>()));
  cfg.selection_rule = selection_rule_from(j.at("selection_rule").get<std::string>());
  cfg.thresholds = thresholds_from_json(j.at("thresholds"));
  const auto score = j.at("audit_score").get<std::string>();
  if (score == "softmax") cfg.audit_score = AuditScore::kSoftmax;
  else if (score == "logit") cfg.audit_score = AuditScore::kLogit;
  else throw ValidationError("unknown audit score '" + score + "'");
  cfg.click_log_iterations = j.at("click_log_iterations").get<int>();
  cfg.jobs = j.at("jobs").get<int>();
  cfg.output_dir = j.at("output_dir").get<std::string>();
  cfg.validate();
  return cfg;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const ExperimentConfig& cfg) {
  return fnv1a_hex(canonical_json(to_json(cfg)).dump());
}

nlohmann::json canonical_json(const nlohmann::ordered_json& j) {
  if (j.is_object()) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [k, v] : j.items()) out[k] = canonical_json(v);
    return out;
  }
  if (j.is_array()) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& v : j) out.push_back(canonical_json(v));
    return out;
  }
  if (j.is_number_float()) {
    const double v = j.get<double>();
    return std::isfinite(v) ? nlohmann::json(round6(v)) : nlohmann::json(nullptr);
  }
  return nlohmann::json::parse(j.dump());
}

void write_json_file(const fs::path& file, const nlohmann::ordered_json& j) {
  auto out = open_out(file);
  out << canonical_json(j).dump(2) << '\n';
}

nlohmann::json read_json_file(const fs::path& file) {
  const std::string text = read_file(file);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(file.string() + ": " + e.what());
  }
}

Dataset load_dataset(const DatasetSpec& spec) {
  Dataset ds;
  if (spec.source == DatasetSpec::Source::kSynthetic) {
    ds = sample_synthetic(spec.dag, spec.data_seed).dataset;
  } else {
    std::ifstream in(spec.path);
    if (!in) throw Error("missing file: " + spec.path.string());
    ds = parse_libsvm(in, spec.grade_max);
  }
  if (spec.majority_fraction)
    ds = subsample_imbalanced(ds, *spec.majority_fraction, spec.subsample_n, spec.data_seed);
  return ds;
}

DatasetSplit prepare_data(const ExperimentConfig& cfg) {
  auto parts = split(load_dataset(cfg.dataset), cfg.splits, cfg.dataset.data_seed);
  const auto scaler = robust_scale_fit(parts.train);
  parts.train = robust_scale_apply(scaler, parts.train);
  parts.validation = robust_scale_apply(scaler, parts.validation);
  parts.test = robust_scale_apply(scaler, parts.test);
  return parts;
}

bool RunSummary::ok() const {
  return !seeds.empty() &&
         std::all_of(seeds.begin(), seeds.end(), [](const SeedOutcome& s) { return s.ok; });
}

bool run_is_current(const ExperimentConfig& cfg) {
  const fs::path file = cfg.output_dir / "manifest.json";
  if (!fs::exists(file)) return false;
  try {
    const auto m = read_json_file(file);
    return m.value("config_hash", "") == config_hash(cfg) && m.value("ok", false);
  } catch (const std::exception&) {
    return false;
  }
}

RunSummary run_experiment(const ExperimentConfig& cfg, bool reuse_current) {
  cfg.validate();
  if (reuse_current && run_is_current(cfg)) {
    RunSummary summary;
    summary.dir = cfg.output_dir;
    summary.config_hash = config_hash(cfg);
    const auto manifest = read_json_file(cfg.output_dir / "manifest.json");
    for (const auto& sj : manifest.at("seeds")) {
      SeedOutcome s;
      s.seed = sj.at("seed").get<std::uint64_t>();
      s.ok = sj.at("status") == "ok";
      s.best_iteration = sj.value("best_iteration", 0);
      s.digest = sj.value("digest", "");
      summary.seeds.push_back(s);
    }
    summary.desiderata = audit_all(audit_inputs(load_run(cfg.output_dir)));
    return summary;
  }
  RunSummary summary;
  summary.dir = cfg.output_dir;
  summary.config_hash = config_hash(cfg);
  fs::create_directories(cfg.output_dir);

  std::vector<SeedResult> results(cfg.seeds.size());
  nlohmann::ordered_json data_json;
  try {
    const DatasetSplit data = prepare_data(cfg);
    data_json = dataset_summary(data);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
      for (std::size_t i = next++; i < cfg.seeds.size(); i = next++) {
        try {
          results[i] = run_seed(cfg, data, cfg.seeds[i]);
        } catch (const std::exception& e) {
          results[i].outcome = {cfg.seeds[i], false, e.what(), 0, ""};
          results[i].rows.clear();
        }
      }
    };
    const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(cfg.jobs), cfg.seeds.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
  } catch (const std::exception& e) {
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
      results[i].outcome = {cfg.seeds[i], false, std::string("data preparation: ") + e.what(), 0, ""};
  }

  std::vector<FairnessRow> rows;
  for (const auto& r : results) {
    summary.seeds.push_back(r.outcome);
    rows.insert(rows.end(), r.rows.begin(), r.rows.end());
  }
  {
    auto out = open_out(cfg.output_dir / "fairness.csv");
    write_fairness_rows(out, rows);
  }

  nlohmann::ordered_json manifest;
  manifest["format"] = "fairrank-run-v1";
  manifest["config"] = to_json(cfg);
  manifest["config_hash"] = summary.config_hash;
  manifest["data"] = data_json;
  manifest["seeds"] = nlohmann::ordered_json::array();
  for (const auto& s : summary.seeds) {
    nlohmann::ordered_json sj;
    sj["seed"] = s.seed;
    sj["status"] = s.ok ? "ok" : "error";
    if (!s.ok) sj["error"] = s.error;
    if (s.ok) {
      sj["best_iteration"] = s.best_iteration;
      sj["digest"] = s.digest;
    }
    manifest["seeds"].push_back(sj);
  }
  manifest["fairness_digest"] = fnv1a_hex(read_file(cfg.output_dir / "fairness.csv"));
  manifest["ok"] = summary.ok();
  write_json_file(cfg.output_dir / "manifest.json", manifest);

  if (std::any_of(summary.seeds.begin(), summary.seeds.end(), [](const SeedOutcome& s) { return s.ok; })) {
    summary.desiderata = audit_run(cfg.output_dir);
  } else {
    for (Verdict* v : std::initializer_list<Verdict*>{&summary.desiderata.credibility, &summary.desiderata.consistency,
                                                      &summary.desiderata.stability, &summary.desiderata.comparability,
                                                      &summary.desiderata.availability}) {
      v->evaluated = false;
      v->note = "no successful seed";
    }
    write_json_file(cfg.output_dir / "desiderata.json", to_json(summary.desiderata));
  }
  return summary;
}

std::vector<FairnessRow> read_fairness_csv(const fs::path& file) {
  std::vector<FairnessRow> out;
  for (const auto& cells : read_csv(file, kFairnessHeader))
    out.push_back({std::stoull(cells[0]), cells[1], cells[2], cells[3], parse_double(cells[4])});
  return out;
}

RunDump load_run(const fs::path& dir) {
  RunDump run;
  run.dir = dir;
  if (!fs::is_directory(dir)) throw Error("run directory not found: " + dir.string());
  run.manifest = read_json_file(dir / "manifest.json");
  run.config = experiment_config_from_json(run.manifest.at("config"));
  for (const auto& sj : run.manifest.at("seeds")) {
    if (sj.at("status") != "ok") continue;
    SeedDump s;
    s.seed = sj.at("seed").get<std::uint64_t>();
    const fs::path sd = seed_dir(dir, s.seed);
    const auto summary = read_json_file(sd / "summary.json");
    s.best_iteration = summary.at("best_iteration").get<int>();
    for (const auto& ck : summary.at("checkpoints")) {
      s.iterations.push_back(ck.at("iteration").get<int>());
      s.validation_logits.push_back(read_predictions(sd / ck.at("file").get<std::string>()).logits);
    }
    auto test = read_predictions(sd / "predictions_test.csv");
    s.test_ids = std::move(test.ids);
    s.test_logits = std::move(test.logits);
    s.test_softmax = std::move(test.softmax);
    s.test_grades = std::move(test.grades);
    s.test_groups = std::move(test.groups);
    run.seeds.push_back(std::move(s));
  }
  return run;
}

AuditInputs audit_inputs(const RunDump& run) {
  if (run.seeds.empty()) throw ValidationError("run has no successful seed");
  AuditInputs in;
  in.thresholds = run.config.thresholds;
  in.score = run.config.audit_score;
  in.grades = run.seeds.front().test_grades;
  in.groups = run.seeds.front().test_groups;
  for (const auto& s : run.seeds) {
    if (s.test_ids != run.seeds.front().test_ids)
      throw ValidationError("seed " + std::to_string(s.seed) + " was evaluated on a different test set");
    SeedPredictions p;
    p.seed = s.seed;
    p.test_logits = s.test_logits;
    p.test_softmax = s.test_softmax;
    p.checkpoint_iterations = s.iterations;
    p.checkpoint_validation_logits = s.validation_logits;
    in.seeds.push_back(std::move(p));
  }
  return in;
}

DesiderataReport audit_run(const fs::path& dir) {
  const RunDump run = load_run(dir);
  const auto inputs = audit_inputs(run);
  DesiderataReport report = audit_all(inputs);
  auto j = to_json(report);
  j["dataset"] = run.config.dataset.name;
  j["credibility_per_seed"] = nlohmann::ordered_json::array();
  for (const auto& c : audit_credibility_per_seed(inputs)) {
    nlohmann::ordered_json cj;
    cj["seed"] = c.seeds.empty() ? 0 : c.seeds.front();
    cj["pass"] = c.pass;
    cj["kruskal_wallis"] = stats::to_json(c.kruskal_wallis);
    cj["medians"] = c.medians;
    j["credibility_per_seed"].push_back(cj);
  }
  write_json_file(dir / "desiderata.json", j);
  auto out = open_out(dir / "desiderata.txt");
  out << format_verdict_table({{run.config.dataset.name, report}});
  return report;
}

ComparisonReport compare_fairness(const fs::path& dir) {
  const auto rows = read_fairness_csv(dir / "fairness.csv");
  ComparisonReport report;

  std::vector<std::string> rankings;
  for (const auto& r : rows)
    if (std::find(rankings.begin(), rankings.end(), r.ranking) == rankings.end()) rankings.push_back(r.ranking);

  for (const auto& ranking : rankings) {
    for (const std::string metric : {"exposure_fairness", "demographic_parity", "individual_fairness"}) {
      std::map<std::uint64_t, std::pair<double, double>> pairs;
      std::set<std::uint64_t> seen_true, seen_pred;
      for (const auto& r : rows) {
        if (r.ranking != ranking || r.metric != metric) continue;
        auto& slot = pairs.try_emplace(r.seed, std::nan(""), std::nan("")).first->second;
        (r.relevance == "true" ? slot.first : slot.second) = r.value;
      }
      std::vector<double> t, p;
      for (const auto& [seed, v] : pairs) {
        if (!std::isfinite(v.first) || !std::isfinite(v.second)) continue;
        t.push_back(v.first);
        p.push_back(v.second);
      }
      if (t.empty()) continue;
      ComparisonRow row;
      row.metric = metric;
      row.ranking = ranking;
      row.deviation = "sd across seeds";
      row.true_mean = mean_of(t);
      row.true_sd = sd_of(t);
      row.predicted_mean = mean_of(p);
      row.predicted_sd = sd_of(p);
      row.paired = stats::wilcoxon_signed_rank(t, p);
      row.unpaired = stats::mann_whitney_u(t, p);
      report.rows.push_back(std::move(row));
    }
  }

  // Per-item individual fairness terms for the model ranking, pooled over seeds.
  const RunDump run = load_run(dir);
  if (!run.seeds.empty()) {
    std::vector<double> t, p;
    for (const auto& s : run.seeds) {
      const Vector exposure = item_exposure(rank_by_scores(s.test_logits), run.config.k);
      const Vector tt = individual_fairness_terms(exposure, to_vector(s.test_grades), run.config.normalize);
      const Vector pp = individual_fairness_terms(exposure, s.test_softmax, run.config.normalize);
      t.insert(t.end(), tt.data(), tt.data() + tt.size());
      p.insert(p.end(), pp.data(), pp.data() + pp.size());
    }
    ComparisonRow row;
    row.metric = "individual_fairness_item";
    row.ranking = "model";
    row.deviation = "sd across items";
    row.true_mean = mean_of(t);
    row.true_sd = sd_of(t);
    row.predicted_mean = mean_of(p);
    row.predicted_sd = sd_of(p);
    row.paired = stats::wilcoxon_signed_rank(t, p);
    row.unpaired = stats::mann_whitney_u(t, p);
    report.rows.push_back(std::move(row));
  }

  write_json_file(dir / "comparison.json", to_json(report));
  auto out = open_out(dir / "comparison.txt");
  out << format_comparison_table(report);
  return report;
}

nlohmann::ordered_json to_json(const ComparisonReport& report) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    nlohmann::ordered_json rj;
    rj["metric"] = r.metric;
    rj["ranking"] = r.ranking;
    rj["deviation"] = r.deviation;
    rj["true_mean"] = r.true_mean;
    rj["true_sd"] = r.true_sd;
    rj["predicted_mean"] = r.predicted_mean;
    rj["predicted_sd"] = r.predicted_sd;
    rj["paired"] = stats::to_json(r.paired);
    rj["unpaired"] = stats::to_json(r.unpaired);
    j.push_back(rj);
  }
  return j;
}

std::string format_comparison_table(const ComparisonReport& report) {
  std::vector<std::vector<std::string>> table = {
      {"metric", "ranking", "true", "predicted", "deviation", "paired W", "paired p", "unpaired p"}};
  const auto pm = [](double m, double s) { return format_real(m) + " +- " + format_real(s); };
  for (const auto& r : report.rows) {
    table.push_back({r.metric, r.ranking, pm(r.true_mean, r.true_sd), pm(r.predicted_mean, r.predicted_sd),
                     r.deviation, format_real(r.paired.statistic),
                     format_real(r.paired.p_value) + (r.paired.degenerate ? " (degenerate)" : ""),
                     format_real(r.unpaired.p_value)});
  }
  std::vector<std::size_t> width(table.front().size(), 0);
  for (const auto& row : table)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::ostringstream out;
  for (const auto& row : table)
    for (std::size_t c = 0; c < row.size(); ++c)
      out << std::left << std::setw(static_cast<int>(width[c])) << row[c] << (c + 1 < row.size() ? "  " : "\n");
  return out.str();
}

std::vector<double> default_sweep_fractions() { return {0.5, 0.6, 0.7, 0.8, 0.9}; }

SweepReport sweep_imbalance(const ExperimentConfig& base, const std::vector<double>& fractions,
                            bool reuse_current) {
  if (fractions.empty()) throw ValidationError("sweep needs at least one fraction");
  SweepReport report;
  report.fractions = fractions;
  fs::create_directories(base.output_dir);
  for (const double f : fractions) {
    ExperimentConfig cfg = base;
    cfg.dataset.majority_fraction = f;
    cfg.output_dir = base.output_dir / ("f" + fraction_label(f));
    const auto run = run_experiment(cfg, reuse_current);
    for (const auto& s : run.seeds)
      if (!s.ok) report.errors.push_back("fraction " + fraction_label(f) + " seed " + std::to_string(s.seed) + ": " + s.error);
    std::map<std::uint64_t, std::pair<double, double>> ef;
    for (const auto& r : read_fairness_csv(cfg.output_dir / "fairness.csv")) {
      if (r.ranking != "model" || r.metric != "exposure_fairness") continue;
      auto& slot = ef.try_emplace(r.seed, std::nan(""), std::nan("")).first->second;
      (r.relevance == "true" ? slot.first : slot.second) = r.value;
    }
    std::vector<double> deltas;
    for (const auto& [seed, v] : ef) {
      SweepPoint pt{f, seed, v.first, v.second, v.second - v.first};
      report.points.push_back(pt);
      if (std::isfinite(pt.delta)) deltas.push_back(pt.delta);
    }
    report.mean_delta.push_back(mean_of(deltas));
  }
  {
    auto out = open_out(base.output_dir / "sweep.csv");
    out << "fraction,seed,exposure_fairness_true,exposure_fairness_predicted,delta\n";
    for (const auto& p : report.points)
      out << fraction_label(p.fraction) << ',' << p.seed << ',' << format_real(p.exposure_fairness_true) << ','
          << format_real(p.exposure_fairness_predicted) << ',' << format_real(p.delta) << '\n';
  }
  {
    auto out = open_out(base.output_dir / "sweep_summary.csv");
    out << "fraction,mean_delta\n";
    for (std::size_t i = 0; i < fractions.size(); ++i)
      out << fraction_label(fractions[i]) << ',' << format_real(report.mean_delta[i]) << '\n';
  }
  return report;
}

}  // namespace fairrank

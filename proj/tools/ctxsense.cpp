// ctxsense command-line tool. Exit codes: 0 ok, 2 bad arguments or
// configuration, 3 input that fails to parse, 4 insufficient data.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "ctxsense/cluster.hpp"
#include "ctxsense/io.hpp"
#include "ctxsense/learn/benchmarks.hpp"
#include "ctxsense/learn/cv.hpp"
#include "ctxsense/learn/importance.hpp"
#include "ctxsense/log.hpp"
#include "ctxsense/parallel.hpp"
#include "ctxsense/pipeline.hpp"
#include "ctxsense/stats.hpp"
#include "ctxsense/synth.hpp"

namespace fs = std::filesystem;
using namespace ctxsense;

namespace {

enum Exit { kOk = 0, kInternal = 1, kBadArgs = 2, kParse = 3, kNoData = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::uint64_t seed = 0;
  std::size_t jobs = default_jobs();

  // extract
  std::string study, out, exclusions, nn_out, nn_filter = "automatic";
  std::vector<double> windows{30, 60, 120, 0};

  // analyze / bench / cluster
  std::string features, task = "all", nn_features, pairing = "participant_median", inner = "lopo";
  std::size_t trees = 500, k_max = 0, resamples = 10000, repeats = 10;
  bool center = true, scale = false;
  std::vector<double> ccp_grid{0.0, 0.001, 0.01, 0.05, 0.1};

  // cluster
  std::size_t k = 0, min_cluster_size = 5, min_samples = 5;
  std::vector<std::string> columns;
  std::string phase;
  bool leaf = false, allow_single = false;

  // synth
  long participants = 46;
  bool complete = false, archetypes = false;
  std::string preset, synth_config;
  double artifacts = -1.0;
};

ojson run_config_json(const Options& o, std::string_view command) {
  ojson j{{"command", command}};
  if (command == "extract")
    j.update({{"nn_filter", o.nn_filter}, {"windows_s", o.windows}, {"ppg_filter", "bandpass 0.5-8 Hz order 3"},
              {"eda", {{"lowpass_hz", 3.0}, {"tonic_cutoff_hz", 0.05}, {"scr_min_amplitude", 0.01},
                       {"scr_min_separation_s", 1.0}}}});
  if (command == "analyze" || command == "bench" || command == "cluster")
    j.update({{"task", o.task}, {"center", o.center}, {"scale", o.scale}});
  if (command == "analyze" || command == "bench")
    j.update({{"trees", o.trees},     {"max_features", "sqrt"}, {"ccp_grid", o.ccp_grid},
              {"inner_cv", o.inner},  {"selectors", {"anova", "mutual_info"}},
              {"k_max", o.k_max},     {"pairing", o.pairing},   {"bootstrap_resamples", o.resamples},
              {"importance_repeats", o.repeats}});
  if (command == "cluster")
    j.update({{"k", o.k}, {"columns", o.columns}, {"min_cluster_size", o.min_cluster_size},
              {"min_samples", o.min_samples}, {"selection", o.leaf ? "leaf" : "eom"},
              {"allow_single_cluster", o.allow_single}, {"phase", o.phase.empty() ? "all" : o.phase}});
  return j;
}

learn::CVConfig cv_config(const Options& o) {
  learn::CVConfig cv;
  if (o.trees == 0) throw UsageError("--trees must be at least 1");
  cv.forest.n_trees = o.trees;
  cv.ccp_grid = o.ccp_grid;
  cv.inner = learn::parse_inner_cv(o.inner);
  cv.seed = o.seed;
  cv.jobs = o.jobs;
  return cv;
}

std::vector<TaskKind> tasks_of(const std::string& token) {
  if (token == "all") return {kAllTasks.begin(), kAllTasks.end()};
  return {parse_task(token)};
}

FeatureMatrix load_features(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("feature table " + path + " not found");
  try {
    return parse_features(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

int cmd_synth(const Options& o) {
  if (o.participants < 0) throw UsageError("--participants must be non-negative");
  if (o.out.empty()) throw UsageError("--out is required");
  SynthConfig cfg;
  if (!o.preset.empty()) {
    if (o.preset != "paper594") throw UsageError("unknown preset '" + o.preset + "'");
    cfg = preset594_config(o.seed);
  } else {
    cfg.participants = static_cast<std::size_t>(o.participants);
  }
  if (!o.synth_config.empty()) {
    if (!fs::exists(o.synth_config)) throw UsageError("synth config " + o.synth_config + " not found");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(o.synth_config));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("synth config is not valid JSON: ") + e.what());
    }
    cfg = synth_config_from_json(j, cfg);
  }
  if (o.complete) cfg.social_events.clear();
  if (o.artifacts >= 0) cfg.artifact_per_min = o.artifacts;
  if (o.archetypes) {
    cfg.social_archetypes = 6;
    cfg.alone_archetypes = 1;
  }
  cfg.seed = o.seed;
  const auto n = write_study(cfg, o.out);
  std::cout << "wrote " << cfg.participants << " sessions, " << n << " intervals to " << o.out << "\n";
  return kOk;
}

int cmd_extract(const Options& o) {
  if (o.out.empty()) throw UsageError("--out is required");
  if (o.study.empty()) throw UsageError("--study is required");
  std::vector<fs::path> sessions;
  if (fs::exists(fs::path(o.study) / std::string(kTimelineFile)))
    sessions.push_back(o.study);
  else
    try {
      sessions = study_sessions(o.study);
    } catch (const std::runtime_error& e) {
      throw UsageError(e.what());
    }
  if (sessions.empty()) throw UsageError("no session directories under " + o.study);
  for (const auto& s : sessions) {
    if (!fs::exists(s / std::string(kTimelineFile)))
      throw UsageError("missing timeline file " + (s / std::string(kTimelineFile)).string());
    for (auto kind : kAllSensors)
      if (!fs::exists(s / std::string(file_name(kind))))
        throw UsageError("missing stream file " + (s / std::string(file_name(kind))).string());
  }

  PipelineConfig pc;
  pc.nn_cleaning = parse_nn_cleaning(o.nn_filter);
  std::vector<SessionFeatures> results(sessions.size());
  parallel_for(sessions.size(), o.jobs, [&](std::size_t i) {
    const auto loaded = load_session(sessions[i]);
    results[i] = extract_session(loaded, pc);
  });

  std::vector<FeatureRow> rows;
  std::vector<Exclusion> excluded;
  std::vector<std::pair<FeatureRow, NNSeries>> raw_nn;
  std::size_t n_intervals = 0;
  for (auto& r : results) {
    n_intervals += r.rows.size() + r.excluded.size();
    rows.insert(rows.end(), r.rows.begin(), r.rows.end());
    excluded.insert(excluded.end(), r.excluded.begin(), r.excluded.end());
    raw_nn.insert(raw_nn.end(), r.raw_nn.begin(), r.raw_nn.end());
  }
  const auto provenance = provenance_header(run_config_json(o, "extract"), o.seed);
  const fs::path out(o.out);
  const auto stem = (out.parent_path() / out.stem()).string();
  write_file(o.exclusions.empty() ? stem + ".exclusions.csv" : o.exclusions, serialize_exclusions(excluded, provenance));
  if (rows.empty()) throw InsufficientDataError("all " + std::to_string(n_intervals) + " intervals were excluded");
  const auto matrix = assemble_matrix(std::move(rows));
  write_file(out, serialize_features(matrix, provenance));

  const std::vector<NNCleaning> methods{NNCleaning::None, NNCleaning::Median, NNCleaning::Automatic,
                                        NNCleaning::Rules};
  write_file(o.nn_out.empty() ? stem + ".nn.csv" : o.nn_out,
             serialize_nn_sets(nn_benchmark_sets(raw_nn, methods, o.windows, pc), provenance));
  std::cout << "extracted " << matrix.size() << " of " << n_intervals << " intervals (" << excluded.size()
            << " excluded) to " << o.out << "\n";
  return kOk;
}

ojson analyze_task(const FeatureMatrix& raw, const FeatureMatrix& conditioned, TaskKind task, const Options& o,
                   const fs::path& dir, const std::string& provenance) {
  const auto raw_task = build_task(raw, task);
  const auto data = build_task(conditioned, task);
  const std::string name(to_token(task));

  StatsConfig sc;
  sc.seed = derive_seed(o.seed, 1);
  sc.n_resamples = o.resamples;
  if (o.pairing == "per_event") sc.pairing = Pairing::PerEvent;
  else if (o.pairing != "participant_median") throw UsageError("unknown pairing '" + o.pairing + "'");
  const auto univariate = paired_feature_tests(raw_task, sc);

  auto cv = cv_config(o);
  cv.seed = derive_seed(o.seed, 2);
  const auto labeled = learn::to_labeled(data);
  const auto curve = learn::kbest_curve(labeled, cv, o.k_max);

  // Final model: the minimal-k features chosen on the full task data.
  const auto& at_k = curve.points[curve.minimal_k - 1];
  std::map<std::pair<learn::Selector, double>, std::size_t> votes;
  for (const auto& f : at_k.folds)
    if (!f.skipped) ++votes[{f.selector, f.ccp_alpha}];
  std::pair<learn::Selector, double> choice{learn::Selector::Anova, cv.ccp_grid.front()};
  std::size_t best_votes = 0;
  for (const auto& [key, n] : votes)
    if (n > best_votes) best_votes = n, choice = key;
  const auto selected = learn::select_k_best(labeled.X, labeled.y, curve.minimal_k, choice.first);
  learn::ForestParams fp = cv.forest;
  fp.seed = derive_seed(o.seed, 3);
  fp.ccp_alpha = choice.second;
  const auto X = labeled.X.select_cols(selected);
  const auto model = learn::train_forest(X, labeled.y, fp);
  const auto importance = learn::permutation_importance(model, X, labeled.y, o.repeats, derive_seed(o.seed, 4));
  std::vector<std::string_view> selected_names;
  for (auto i : selected) selected_names.push_back(kFeatureNames[i]);

  ojson report{{"task", name},
               {"classes", class_names(task)},
               {"n_rows", data.size()},
               {"n_participants", data.participants.size()},
               {"univariate", to_json(univariate)},
               {"kbest", to_json(curve, kFeatureNames, true)},
               {"final_model",
                {{"features", selected_names}, {"selector", learn::to_token(choice.first)}, {"ccp_alpha", choice.second}}},
               {"importance", to_json(importance, selected_names)}};
  write_file(dir / (name + ".univariate.csv"), univariate_csv(univariate, provenance));
  write_file(dir / (name + ".kbest.csv"), kbest_csv(curve, provenance));
  write_file(dir / (name + ".importance.csv"), importance_csv(importance, selected_names, provenance));
  spdlog::info("{}: minimal k = {}, peak {:.3f}", name, curve.minimal_k, curve.points[curve.peak_k - 1].mean);
  return report;
}

ojson run_conditioning(const FeatureMatrix& raw, const std::vector<TaskKind>& tasks, const Options& o) {
  auto cv = cv_config(o);
  cv.seed = derive_seed(o.seed, 5);
  return conditioning_json(learn::conditioning_benchmark(raw, tasks, cv));
}

ojson run_nn_benchmark(const std::string& path, const std::vector<TaskKind>& tasks, const Options& o) {
  if (!fs::exists(path)) throw UsageError("NN feature table " + path + " not found");
  std::map<std::pair<NNCleaning, double>, FeatureMatrix> sets;
  try {
    sets = parse_nn_sets(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
  auto cv = cv_config(o);
  cv.seed = derive_seed(o.seed, 6);
  return nn_benchmark_json(learn::nn_filter_benchmark(sets, tasks, cv));
}

std::string default_nn_path(const std::string& features) {
  const fs::path p(features);
  return (p.parent_path() / p.stem()).string() + ".nn.csv";
}

int cmd_analyze(const Options& o) {
  if (o.features.empty()) throw UsageError("--features is required");
  if (o.out.empty()) throw UsageError("--out is required");
  const auto tasks = tasks_of(o.task);
  const auto raw = load_features(o.features);
  const auto conditioned = condition_matrix(raw, o.center, o.scale);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  const auto cfg = run_config_json(o, "analyze");
  const auto provenance = provenance_header(cfg, o.seed);

  ojson summary = provenance_json(cfg, o.seed);
  summary["n_rows"] = raw.size();
  summary["n_features"] = kNumFeatures;
  ojson task_reports = ojson::object();
  for (auto t : tasks) {
    auto report = analyze_task(raw, conditioned, t, o, dir, provenance);
    ojson full = provenance_json(cfg, o.seed);
    full.update(report);
    write_file(dir / (std::string(to_token(t)) + ".report.json"), full.dump(2) + "\n");
    task_reports[std::string(to_token(t))] = {{"minimal_k", report["kbest"]["minimal_k"]},
                                              {"significant", report["univariate"]["ranked_significant"]}};
  }
  summary["tasks"] = task_reports;
  if (o.task == "all") {
    ojson cond = provenance_json(cfg, o.seed);
    cond["conditioning"] = run_conditioning(raw, tasks, o);
    write_file(dir / "conditioning.json", cond.dump(2) + "\n");
    const auto nn_path = o.nn_features.empty() ? default_nn_path(o.features) : o.nn_features;
    if (fs::exists(nn_path)) {
      ojson nn = provenance_json(cfg, o.seed);
      nn["nn_filters"] = run_nn_benchmark(nn_path, tasks, o);
      write_file(dir / "nn_filters.json", nn.dump(2) + "\n");
    } else {
      spdlog::warn("no NN feature table at {}; skipping the NN-cleaning benchmark", nn_path);
    }
  }
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  std::cout << "analysis written to " << o.out << "\n";
  return kOk;
}

int cmd_bench(const Options& o, const std::string& which) {
  if (o.out.empty()) throw UsageError("--out is required");
  const auto tasks = tasks_of(o.task);
  const auto cfg = run_config_json(o, "bench");
  ojson out = provenance_json(cfg, o.seed);
  if (which == "conditioning") {
    if (o.features.empty()) throw UsageError("--features is required");
    out["conditioning"] = run_conditioning(load_features(o.features), tasks, o);
  } else {
    const auto path = !o.nn_features.empty() ? o.nn_features
                      : !o.features.empty()  ? default_nn_path(o.features)
                                             : throw UsageError("--nn-features is required");
    out["nn_filters"] = run_nn_benchmark(path, tasks, o);
  }
  write_file(o.out, out.dump(2) + "\n");
  std::cout << which << " benchmark written to " << o.out << "\n";
  return kOk;
}

int cmd_cluster(const Options& o) {
  if (o.features.empty()) throw UsageError("--features is required");
  if (o.out.empty()) throw UsageError("--out is required");
  if (o.task == "all") throw UsageError("cluster needs a single --task");
  const auto task = parse_task(o.task);
  const auto conditioned = condition_matrix(load_features(o.features), o.center, o.scale);
  auto data = build_task(conditioned, task);
  if (!o.phase.empty()) {
    const auto phase = parse_phase(o.phase);
    std::erase_if(data.rows, [&](const TaskRow& r) { return r.phase != phase; });
    if (data.rows.empty()) throw TaskConstructionError("no " + o.phase + " rows in task " + o.task);
  }
  const auto labeled = learn::to_labeled(data);

  std::vector<std::size_t> columns;
  if (!o.columns.empty()) {
    for (const auto& c : o.columns) columns.push_back(feature_index(c));
  } else {
    const std::size_t k = o.k ? o.k : (task == TaskKind::DuringVsPrePost ? 5 : 2);
    columns = learn::select_k_best(labeled.X, labeled.y, k, learn::Selector::Anova);
  }
  // Columns are z-scored so no feature dominates the Euclidean metric by unit alone.
  auto X = labeled.X.select_cols(columns);
  for (std::size_t c = 0; c < X.cols; ++c) {
    std::vector<double> col(X.rows);
    for (std::size_t r = 0; r < X.rows; ++r) col[r] = X(r, c);
    const double mu = mean(col), sd = X.rows > 1 ? sample_sd(col) : 0.0;
    for (std::size_t r = 0; r < X.rows; ++r) X(r, c) = sd > 0 ? (X(r, c) - mu) / sd : 0.0;
  }
  HdbscanParams hp;
  hp.min_cluster_size = o.min_cluster_size;
  hp.min_samples = o.min_samples;
  hp.selection = o.leaf ? ClusterSelection::Leaf : ClusterSelection::ExcessOfMass;
  hp.allow_single_cluster = o.allow_single;
  const auto assignment = hdbscan_fit(X, hp);
  const auto names = class_names(task);
  const auto report = cluster_report(assignment, labeled.y, names);

  const auto cfg = run_config_json(o, "cluster");
  ojson out = provenance_json(cfg, o.seed);
  std::vector<std::string_view> cols;
  for (auto c : columns) cols.push_back(kFeatureNames[c]);
  out["task"] = to_token(task);
  out["features"] = cols;
  out["report"] = to_json(report);
  out["stability"] = assignment.stability;
  const fs::path dir(o.out);
  fs::create_directories(dir);
  write_file(dir / (std::string(to_token(task)) + ".clusters.json"), out.dump(2) + "\n");
  std::vector<FeatureRow> rows;
  for (const auto& r : data.rows) rows.push_back({r.participant_id, r.event, r.phase, 0.0, r.values});
  write_file(dir / (std::string(to_token(task)) + ".points.csv"),
             cluster_points_csv(rows, columns, labeled.y, assignment, provenance_header(cfg, o.seed)));
  std::cout << report.clusters.size() << " clusters written to " << o.out << "\n";
  return kOk;
}

template <class Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const UsageError& e) {
    spdlog::error("{}", e.what());
    return kBadArgs;
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kBadArgs;
  } catch (const ParseError& e) {
    spdlog::error("{}", e.what());
    return kParse;
  } catch (const SchemaError& e) {
    spdlog::error("{}", e.what());
    return kParse;
  } catch (const TimelineError& e) {
    spdlog::error("{}", e.what());
    return kParse;
  } catch (const CoverageError& e) {
    spdlog::error("{}", e.what());
    return kParse;
  } catch (const InsufficientDataError& e) {
    spdlog::error("{}", e.what());
    return kNoData;
  } catch (const TaskConstructionError& e) {
    spdlog::error("{}", e.what());
    return kNoData;
  } catch (const std::invalid_argument& e) {
    spdlog::error("{}", e.what());
    return kBadArgs;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kInternal;
  }
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();
  Options o;
  CLI::App app{"Context sensing from wristband physiology"};
  app.set_config("--config", "", "TOML/INI file with option values");
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", o.seed, "Master seed")->capture_default_str();
  app.add_option("--jobs", o.jobs, "Parallel workers (1 disables threading)")->check(CLI::PositiveNumber);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic study");
  synth->add_option("--out", o.out, "Output directory")->required();
  synth->add_option("--participants", o.participants, "Participant count")->capture_default_str();
  synth->add_flag("--complete", o.complete, "Every participant completes all four social events");
  synth->add_option("--preset", o.preset, "Named configuration (paper594)");
  synth->add_option("--synth-config", o.synth_config, "JSON generator configuration");
  synth->add_option("--artifacts", o.artifacts, "PPG saturation bursts per minute");
  synth->add_flag("--archetypes", o.archetypes, "Plant 6 social and 1 alone response archetypes");

  auto* extract = app.add_subcommand("extract", "Clean signals and compute the feature table");
  extract->add_option("--study", o.study, "Study directory or single session directory")->required();
  extract->add_option("--out", o.out, "Feature table CSV")->required();
  extract->add_option("--nn-filter", o.nn_filter, "NN cleaning: none|median|automatic|rules")
      ->check(CLI::IsMember({"none", "median", "automatic", "rules"}))
      ->capture_default_str();
  extract->add_option("--exclusions", o.exclusions, "Exclusion log CSV (default <out>.exclusions.csv)");
  extract->add_option("--nn-out", o.nn_out, "NN benchmark features CSV (default <out>.nn.csv)");
  extract->add_option("--windows", o.windows, "NN benchmark windows in seconds (0 = all data)");

  auto add_model_options = [&](CLI::App* cmd) {
    cmd->add_option("--trees", o.trees, "Trees per forest")->capture_default_str();
    cmd->add_option("--inner", o.inner, "Inner CV: lopo|group5")
        ->check(CLI::IsMember({"lopo", "group5"}))
        ->capture_default_str();
    cmd->add_option("--ccp-grid", o.ccp_grid, "Cost-complexity pruning grid");
    cmd->add_option("--task", o.task, "Task token or 'all'")->capture_default_str();
    auto* center = cmd->add_flag("--center,!--no-center", o.center, "Participant median centering");
    (void)center;
    cmd->add_flag("--scale", o.scale, "Participant IQR scaling");
  };

  auto* analyze = app.add_subcommand("analyze", "Univariate tests, k-best curves and importances");
  analyze->add_option("--features", o.features, "Feature table CSV")->required();
  analyze->add_option("--out", o.out, "Report directory")->required();
  analyze->add_option("--nn-features", o.nn_features, "NN benchmark features (default <features>.nn.csv)");
  analyze->add_option("--k-max", o.k_max, "Largest k on the k-best curve (0 = all)");
  analyze->add_option("--pairing", o.pairing, "participant_median|per_event")->capture_default_str();
  analyze->add_option("--resamples", o.resamples, "Bootstrap resamples")->capture_default_str();
  analyze->add_option("--repeats", o.repeats, "Permutation importance repeats")->capture_default_str();
  add_model_options(analyze);

  auto* bench = app.add_subcommand("bench", "Cross-task benchmarks");
  bench->require_subcommand(1);
  bench->fallthrough();
  auto* bench_nn = bench->add_subcommand("nn-filters", "Compare NN cleaning methods");
  auto* bench_cond = bench->add_subcommand("conditioning", "Participant-level conditioning ablation");
  for (auto* b : {bench_nn, bench_cond}) {
    b->add_option("--features", o.features, "Feature table CSV");
    b->add_option("--nn-features", o.nn_features, "NN benchmark features CSV");
    b->add_option("--out", o.out, "Report JSON")->required();
    add_model_options(b);
  }

  auto* cluster = app.add_subcommand("cluster", "HDBSCAN of selected features with purity report");
  cluster->add_option("--features", o.features, "Feature table CSV")->required();
  cluster->add_option("--out", o.out, "Output directory")->required();
  cluster->add_option("--task", o.task, "Task token")->required();
  cluster->add_option("--k", o.k, "Features chosen by ANOVA F (default 2, or 5 for during-prepost)");
  cluster->add_option("--columns", o.columns, "Explicit feature names instead of --k");
  cluster->add_option("--phase", o.phase, "Keep only rows of this phase: pre|during|post");
  cluster->add_option("--min-cluster-size", o.min_cluster_size)->capture_default_str();
  cluster->add_option("--min-samples", o.min_samples)->capture_default_str();
  cluster->add_flag("--leaf", o.leaf, "Leaf cluster selection instead of excess of mass");
  cluster->add_flag("--allow-single-cluster", o.allow_single);
  cluster->add_flag("--center,!--no-center", o.center, "Participant median centering");
  cluster->add_flag("--scale", o.scale, "Participant IQR scaling");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadArgs;
  }

  if (*synth) return guarded([&] { return cmd_synth(o); });
  if (*extract) return guarded([&] { return cmd_extract(o); });
  if (*analyze) return guarded([&] { return cmd_analyze(o); });
  if (*bench_nn) return guarded([&] { return cmd_bench(o, "nn-filters"); });
  if (*bench_cond) return guarded([&] { return cmd_bench(o, "conditioning"); });
  if (*cluster) return guarded([&] { return cmd_cluster(o); });
  return kBadArgs;
}

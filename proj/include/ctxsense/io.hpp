#pragma once

// File formats: feature tables, exclusion logs, JSON reports, figure-data
// CSVs and synthetic study bundles. Every file carries the tool version, the
// resolved configuration and the master seed; nothing time-dependent.

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ctxsense/cluster.hpp"
#include "ctxsense/error.hpp"
#include "ctxsense/features.hpp"
#include "ctxsense/ingest.hpp"
#include "ctxsense/learn/benchmarks.hpp"
#include "ctxsense/learn/cv.hpp"
#include "ctxsense/learn/importance.hpp"
#include "ctxsense/pipeline.hpp"
#include "ctxsense/stats.hpp"
#include "ctxsense/synth.hpp"
#include "ctxsense/version.hpp"

namespace ctxsense {

using ojson = nlohmann::ordered_json;

inline void write_file(const std::filesystem::path& p, std::string_view bytes) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + p.string());
}

/// `#`-prefixed header lines; the CSV readers skip them.
inline std::string provenance_header(const ojson& config, std::uint64_t seed) {
  std::string out = "# " + std::string(kToolName) + " " + std::string(kVersion) + "\n";
  out += "# seed: " + std::to_string(seed) + "\n";
  out += "# config: " + config.dump() + "\n";
  return out;
}

inline ojson provenance_json(const ojson& config, std::uint64_t seed) {
  return ojson{{"tool", kToolName}, {"version", kVersion}, {"seed", seed}, {"config", config}};
}

// ---------------------------------------------------------------------------
// Feature table

inline std::string feature_csv_header() {
  std::string h = "participant_id,event,phase,start_unix";
  for (auto n : kFeatureNames) h += "," + std::string(n);
  return h;
}

inline std::string serialize_features(const FeatureMatrix& m, std::string_view provenance = {}) {
  std::string out(provenance);
  out += feature_csv_header();
  out += '\n';
  for (const auto& r : m.rows) {
    out += r.participant_id;
    out += ',';
    out += to_token(r.event);
    out += ',';
    out += to_token(r.phase);
    out += ',';
    detail::append_number(out, r.start);
    for (double v : r.values) {
      out += ',';
      detail::append_number(out, v);
    }
    out += '\n';
  }
  return out;
}

inline FeatureMatrix parse_features(std::string_view bytes) {
  const auto rows = detail::lines(bytes);
  std::vector<FeatureRow> out;
  bool header_seen = false;
  const std::size_t n_fields = 4 + kNumFeatures;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto line = detail::trim(rows[i]);
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != feature_csv_header()) throw ParseError("unexpected feature table header", line_no);
      header_seen = true;
      continue;
    }
    const auto f = detail::split(line, ',');
    if (f.size() != n_fields) throw ParseError("expected " + std::to_string(n_fields) + " fields", line_no);
    FeatureRow r;
    r.participant_id = std::string(f[0]);
    try {
      r.event = parse_event(f[1]);
      r.phase = parse_phase(f[2]);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
    const auto start = detail::to_double(f[3]);
    if (!start) throw ParseError("non-numeric start time", line_no);
    r.start = *start;
    for (std::size_t k = 0; k < kNumFeatures; ++k) {
      const auto v = detail::to_double(f[4 + k]);
      if (!v) throw ParseError("non-numeric value for " + std::string(kFeatureNames[k]), line_no);
      r.values[k] = *v;
    }
    out.push_back(std::move(r));
  }
  if (!header_seen) throw ParseError("feature table has no header");
  return assemble_matrix(std::move(out));
}

inline std::string serialize_exclusions(const std::vector<Exclusion>& ex, std::string_view provenance = {}) {
  std::string out(provenance);
  out += "participant_id,event,phase,reason\n";
  for (const auto& e : ex) {
    std::string reason = e.reason;
    std::replace(reason.begin(), reason.end(), ',', ';');
    std::replace(reason.begin(), reason.end(), '\n', ' ');
    out += e.participant_id + "," + std::string(to_token(e.event)) + "," + std::string(to_token(e.phase)) + "," +
           reason + "\n";
  }
  return out;
}

/// Long-format NN-only features for the cleaning benchmark; window 0 = all data.
inline std::string serialize_nn_sets(const std::map<std::pair<NNCleaning, double>, FeatureMatrix>& sets,
                                     std::string_view provenance = {}) {
  std::string out(provenance);
  out += "method,window_s,participant_id,event,phase,start_unix";
  for (std::size_t k = 0; k < kNumNNFeatures; ++k) out += "," + std::string(kFeatureNames[k]);
  out += '\n';
  for (const auto& [key, m] : sets)
    for (const auto& r : m.rows) {
      out += to_token(key.first);
      out += ',';
      detail::append_number(out, key.second);
      out += "," + r.participant_id + "," + std::string(to_token(r.event)) + "," + std::string(to_token(r.phase)) + ",";
      detail::append_number(out, r.start);
      for (std::size_t k = 0; k < kNumNNFeatures; ++k) {
        out += ',';
        detail::append_number(out, r.values[k]);
      }
      out += '\n';
    }
  return out;
}

inline std::map<std::pair<NNCleaning, double>, FeatureMatrix> parse_nn_sets(std::string_view bytes) {
  std::map<std::pair<NNCleaning, double>, std::vector<FeatureRow>> acc;
  bool header_seen = false;
  const auto rows = detail::lines(bytes);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto line = detail::trim(rows[i]);
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto f = detail::split(line, ',');
    if (f.size() != 6 + kNumNNFeatures) throw ParseError("malformed NN benchmark row", i + 1);
    FeatureRow r;
    const auto window = detail::to_double(f[1]);
    const auto start = detail::to_double(f[5]);
    if (!window || !start) throw ParseError("non-numeric field", i + 1);
    r.participant_id = std::string(f[2]);
    r.event = parse_event(f[3]);
    r.phase = parse_phase(f[4]);
    r.start = *start;
    for (std::size_t k = 0; k < kNumNNFeatures; ++k) {
      const auto v = detail::to_double(f[6 + k]);
      if (!v) throw ParseError("non-numeric field", i + 1);
      r.values[k] = *v;
    }
    acc[{parse_nn_cleaning(f[0]), *window}].push_back(std::move(r));
  }
  std::map<std::pair<NNCleaning, double>, FeatureMatrix> out;
  for (auto& [k, v] : acc) out[k] = assemble_matrix(std::move(v));
  return out;
}

// ---------------------------------------------------------------------------
// Reports

inline ojson to_json(const MedianCI& ci) { return {{"median", ci.median}, {"lo", ci.lo}, {"hi", ci.hi}}; }

inline ojson to_json(const FeatureTestReport& r) {
  const auto names = class_names(r.task);
  ojson features = ojson::array();
  for (const auto& t : r.per_feature)
    features.push_back({{"feature", t.feature},
                        {std::string(names[0]), to_json(t.class_a)},
                        {std::string(names[1]), to_json(t.class_b)},
                        {"median_difference", t.median_difference},
                        {"n_pairs", t.n_pairs},
                        {"excluded_participants", t.excluded_participants},
                        {"statistic", t.statistic},
                        {"p_value", t.p_value},
                        {"exact", t.exact},
                        {"significant", t.significant}});
  return {{"task", to_token(r.task)},
          {"alpha", r.alpha},
          {"pairing", to_token(r.pairing)},
          {"features", features},
          {"ranked_significant", r.ranked_significant}};
}

inline ojson to_json(const learn::CVReport& r, std::span<const std::string_view> feature_names) {
  ojson folds = ojson::array();
  for (const auto& f : r.folds) {
    ojson j{{"participant", f.participant}, {"skipped", f.skipped}};
    if (f.skipped) {
      j["reason"] = f.skip_reason;
    } else {
      std::vector<std::string> feats;
      for (auto i : f.features) feats.emplace_back(feature_names[i]);
      j["macro_accuracy"] = f.macro_accuracy;
      j["ccp_alpha"] = f.ccp_alpha;
      j["selector"] = learn::to_token(f.selector);
      j["inner_score"] = f.inner_score;
      j["features"] = feats;
      j["n_train"] = f.n_train;
      j["n_test"] = f.n_test;
    }
    folds.push_back(std::move(j));
  }
  return {{"k", r.k}, {"mean", r.mean}, {"sem", r.sem}, {"n_evaluated", r.n_evaluated}, {"folds", folds}};
}

inline ojson to_json(const learn::KBestCurve& c, std::span<const std::string_view> feature_names,
                     bool include_folds = false) {
  ojson points = ojson::array();
  for (const auto& p : c.points) {
    ojson j{{"k", p.k}, {"mean", p.mean}, {"sem", p.sem}, {"n_evaluated", p.n_evaluated}};
    if (include_folds) j["cv"] = to_json(p, feature_names);
    points.push_back(std::move(j));
  }
  return {{"points", points}, {"peak_k", c.peak_k}, {"minimal_k", c.minimal_k}};
}

inline ojson to_json(const learn::FeatureImportance& imp, std::span<const std::string_view> feature_names) {
  ojson rows = ojson::array();
  for (std::size_t i = 0; i < imp.mean_drop.size(); ++i)
    rows.push_back({{"feature", feature_names[i]}, {"mean_drop", imp.mean_drop[i]}, {"sd_drop", imp.sd_drop[i]}});
  return {{"baseline_oob_macro_accuracy", imp.baseline}, {"features", rows}};
}

inline ojson to_json(const learn::BenchmarkCell& c) {
  ojson per_task = ojson::object();
  for (const auto& [t, v] : c.per_task) per_task[std::string(to_token(t))] = v;
  return {{"mean_macro_acc", c.mean}, {"sem", c.sem}, {"n_folds", c.n_folds}, {"per_task", per_task}};
}

/// One row per (center, scale) combination with the pooled score.
inline ojson conditioning_json(const std::vector<learn::ConditioningRow>& rows) {
  ojson out = ojson::array();
  for (const auto& r : rows) {
    ojson j{{"center", r.center}, {"scale", r.scale}};
    j.update(to_json(r.score));
    out.push_back(std::move(j));
  }
  return out;
}

inline ojson nn_benchmark_json(const std::vector<learn::NNBenchmarkRow>& rows) {
  ojson out = ojson::array();
  for (const auto& r : rows) {
    ojson j{{"method", to_token(r.method)}, {"window_s", r.window_s > 0 ? ojson(r.window_s) : ojson("all")}};
    j.update(to_json(r.score));
    j["best_in_window"] = r.best_in_window;
    out.push_back(std::move(j));
  }
  return out;
}

/// Per class: cluster count, expected size, expected purity and outliers.
inline ojson to_json(const ClusterReport& r) {
  ojson groups = ojson::array();
  for (const auto& g : r.per_class)
    groups.push_back({{"class", g.name},
                      {"count", g.count},
                      {"expected_size", g.mean_size},
                      {"expected_purity", g.mean_purity},
                      {"outliers", g.outliers}});
  ojson clusters = ojson::array();
  for (std::size_t i = 0; i < r.clusters.size(); ++i)
    clusters.push_back({{"cluster", i},
                        {"size", r.clusters[i].size},
                        {"majority_class", r.per_class[static_cast<std::size_t>(r.clusters[i].majority_class)].name},
                        {"purity", r.clusters[i].purity}});
  return {{"n_rows", r.n_rows}, {"groups", groups}, {"clusters", clusters}};
}

// ---------------------------------------------------------------------------
// Figure data

inline std::string kbest_csv(const learn::KBestCurve& c, std::string_view provenance) {
  std::string out(provenance);
  out += "k,mean,sem,n_evaluated\n";
  for (const auto& p : c.points) {
    out += std::to_string(p.k) + ",";
    detail::append_number(out, p.mean);
    out += ',';
    detail::append_number(out, p.sem);
    out += "," + std::to_string(p.n_evaluated) + "\n";
  }
  return out;
}

inline std::string importance_csv(const learn::FeatureImportance& imp, std::span<const std::string_view> names,
                                  std::string_view provenance) {
  std::string out(provenance);
  out += "feature,mean_drop,sd_drop\n";
  for (std::size_t i = 0; i < imp.mean_drop.size(); ++i) {
    out += std::string(names[i]) + ",";
    detail::append_number(out, imp.mean_drop[i]);
    out += ',';
    detail::append_number(out, imp.sd_drop[i]);
    out += '\n';
  }
  return out;
}

inline std::string univariate_csv(const FeatureTestReport& r, std::string_view provenance) {
  std::string out(provenance);
  out += "feature,median_a,lo_a,hi_a,median_b,lo_b,hi_b,p_value,significant\n";
  for (const auto& t : r.per_feature) {
    out += t.feature;
    for (double v : {t.class_a.median, t.class_a.lo, t.class_a.hi, t.class_b.median, t.class_b.lo, t.class_b.hi,
                     t.p_value}) {
      out += ',';
      detail::append_number(out, v);
    }
    out += t.significant ? ",1\n" : ",0\n";
  }
  return out;
}

inline std::string cluster_points_csv(const std::vector<FeatureRow>& rows, std::span<const std::size_t> columns,
                                      std::span<const int> class_labels, const ClusterAssignment& a,
                                      std::string_view provenance) {
  std::string out(provenance);
  out += "participant_id,event,phase";
  for (auto c : columns) out += "," + std::string(kFeatureNames[c]);
  out += ",class,cluster\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out += rows[i].participant_id + "," + std::string(to_token(rows[i].event)) + "," +
           std::string(to_token(rows[i].phase));
    for (auto c : columns) {
      out += ',';
      detail::append_number(out, rows[i].values[c]);
    }
    out += "," + std::to_string(class_labels[i]) + "," + std::to_string(a.labels[i]) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic configuration and study bundles

inline ojson to_json(const PhaseState& s) {
  return {{"hr_bpm", s.hr_bpm},         {"lf_amp_s", s.lf_amp_s}, {"hf_amp_s", s.hf_amp_s},
          {"jitter_s", s.jitter_s},     {"scr_per_min", s.scr_per_min}, {"acc_sd", s.acc_sd},
          {"temp_offset", s.temp_offset}, {"scl_offset", s.scl_offset}};
}

inline void from_json(const nlohmann::json& j, PhaseState& s) {
  s.hr_bpm = j.value("hr_bpm", s.hr_bpm);
  s.lf_amp_s = j.value("lf_amp_s", s.lf_amp_s);
  s.hf_amp_s = j.value("hf_amp_s", s.hf_amp_s);
  s.jitter_s = j.value("jitter_s", s.jitter_s);
  s.scr_per_min = j.value("scr_per_min", s.scr_per_min);
  s.acc_sd = j.value("acc_sd", s.acc_sd);
  s.temp_offset = j.value("temp_offset", s.temp_offset);
  s.scl_offset = j.value("scl_offset", s.scl_offset);
}

#define CTXSENSE_SYNTH_SCALARS(X)                                                                              \
  X(participants) X(social_events) X(group_hr_delta) X(explicit_hr_delta) X(nn_offset_sd) X(scl_base)         \
  X(scl_offset_sd) X(temp_base) X(temp_offset_sd) X(acc_offset_sd) X(interval_nn_sd) X(interval_acc_sd)       \
  X(ppg_amplitude) X(ppg_noise_sd) X(ppg_wander_amp) X(artifact_per_min) X(artifact_level) X(artifacts_social_only) X(eda_noise_sd)     \
  X(scr_amp_min) X(scr_amp_max) X(social_archetypes) X(alone_archetypes) X(archetype_separation) X(seed) X(epoch)

inline ojson to_json(const SynthConfig& c) {
  ojson j;
#define X(name) j[#name] = c.name;
  CTXSENSE_SYNTH_SCALARS(X)
#undef X
  ojson phys;
  for (std::size_t ctx = 0; ctx < 2; ++ctx)
    for (auto p : kAllPhases)
      phys[ctx == 0 ? "alone" : "social"][std::string(to_token(p))] = to_json(c.physiology[ctx][static_cast<std::size_t>(p)]);
  j["physiology"] = phys;
  return j;
}

/// Unknown keys are rejected so typos do not silently fall back to defaults.
inline SynthConfig synth_config_from_json(const nlohmann::json& j, SynthConfig c = {}) {
  if (!j.is_object()) throw ConfigError("synth config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      bool known = key == "physiology";
#define X(name)                             \
  if (key == #name) {                       \
    value.get_to(c.name);                   \
    known = true;                           \
  }
      CTXSENSE_SYNTH_SCALARS(X)
#undef X
      if (!known) throw ConfigError("unknown synth config key '" + key + "'");
    }
    if (j.contains("physiology"))
      for (const auto& [ctx, phases] : j["physiology"].items()) {
        if (ctx != "alone" && ctx != "social") throw ConfigError("unknown context '" + ctx + "'");
        for (const auto& [phase, state] : phases.items())
          from_json(state, c.physiology[ctx == "alone" ? 0 : 1][static_cast<std::size_t>(parse_phase(phase))]);
      }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid synth config: ") + e.what());
  } catch (const ParseError& e) {
    throw ConfigError(std::string("invalid synth config: ") + e.what());
  }
  validate(c);
  return c;
}

inline ojson to_json(const SessionTruth& t) {
  ojson intervals = ojson::array();
  for (const auto& it : t.intervals) {
    ojson labels = ojson::object();
    for (auto task : kAllTasks) {
      const auto l = task_label(task, it.event, it.phase);
      labels[std::string(to_token(task))] = l ? ojson(*l) : ojson(nullptr);
    }
    intervals.push_back({{"event", to_token(it.event)},
                         {"phase", to_token(it.phase)},
                         {"start_unix", it.start},
                         {"end_unix", it.end},
                         {"nn", it.nn},
                         {"scr_times", it.scr_times},
                         {"scr_amplitudes", it.scr_amplitudes},
                         {"acc_sd", it.acc_sd},
                         {"archetype", it.archetype},
                         {"labels", labels}});
  }
  return {{"participant_id", t.participant_id},
          {"offsets",
           {{"nn_s", t.nn_offset}, {"scl", t.scl_offset}, {"temp", t.temp_offset}, {"acc", t.acc_offset}}},
          {"intervals", intervals}};
}

inline constexpr std::string_view kManifestFile = "ground_truth.json";

inline void write_session(const std::filesystem::path& dir, const SynthSession& s) {
  std::filesystem::create_directories(dir);
  for (auto kind : kAllSensors) write_file(dir / std::string(file_name(kind)), serialize_stream(s.streams.get(kind)));
  write_file(dir / std::string(kTimelineFile), serialize_timeline(s.timeline));
}

/// Writes <dir>/<participant>/... for every participant plus the manifest.
/// Returns the number of intervals written.
inline std::size_t write_study(const SynthConfig& cfg, const std::filesystem::path& dir) {
  validate(cfg);
  std::filesystem::create_directories(dir);
  ojson participants = ojson::array();
  std::size_t n_intervals = 0;
  generate_study(cfg, [&](SynthSession&& s) {
    write_session(dir / s.truth.participant_id, s);
    n_intervals += s.truth.intervals.size();
    participants.push_back(to_json(s.truth));
  });
  ojson manifest = provenance_json(to_json(cfg), cfg.seed);
  manifest["n_participants"] = cfg.participants;
  manifest["n_intervals"] = n_intervals;
  manifest["participants"] = std::move(participants);
  write_file(dir / std::string(kManifestFile), manifest.dump(1) + "\n");
  return n_intervals;
}

/// Participant session directories of a study, in name order.
inline std::vector<std::filesystem::path> study_sessions(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw std::runtime_error("study directory " + dir.string() + " not found");
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_directory()) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace ctxsense

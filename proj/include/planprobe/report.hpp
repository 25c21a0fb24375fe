// Copyright 2026 The planprobe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "planprobe/attention.hpp"
#include "planprobe/closedloop.hpp"
#include "planprobe/config.hpp"
#include "planprobe/hash.hpp"
#include "planprobe/openloop.hpp"
#include "planprobe/probe.hpp"
#include "planprobe/version.hpp"

namespace planprobe {

/// Shortest round-trip decimal rendering; keeps CSV exports byte-stable.
inline std::string format_double(double value)
{
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

struct OpenLoopRow {
  std::string scenario_id;
  std::string scenario_type;
  double horizon_s{0.0};
  bool ok{true};
  std::string error;
  OpenLoopBreakdown breakdown;
};

inline json open_loop_row_to_json(const OpenLoopRow & row)
{
  json j;
  j["scenario_id"] = row.scenario_id;
  j["scenario_type"] = row.scenario_type;
  j["horizon_s"] = row.horizon_s;
  j["ade"] = row.breakdown.ade;
  j["fde"] = row.breakdown.fde;
  j["ahe"] = row.breakdown.ahe;
  j["fhe"] = row.breakdown.fhe;
  j["miss_rate"] = row.breakdown.miss_rate;
  j["binaries"] = {{"ade", row.breakdown.s_ade},
                   {"fde", row.breakdown.s_fde},
                   {"ahe", row.breakdown.s_ahe},
                   {"fhe", row.breakdown.s_fhe},
                   {"miss_rate", row.breakdown.s_miss_rate}};
  j["score"] = row.breakdown.composite;
  if (!row.ok) {
    j["error"] = row.error;
  }
  return j;
}

struct ClosedLoopRow {
  std::string scenario_id;
  std::string scenario_type;
  double horizon_s{0.0};
  bool ok{true};
  ClosedLoopBreakdown breakdown;
};

inline json closed_loop_row_to_json(const ClosedLoopRow & row)
{
  json j;
  j["scenario_id"] = row.scenario_id;
  j["scenario_type"] = row.scenario_type;
  j["horizon_s"] = row.horizon_s;
  j["sub_metrics"] = {{"no_collision", row.breakdown.s_no_collision},
                      {"drivable_area", row.breakdown.s_drivable},
                      {"making_progress", row.breakdown.s_progress_gate},
                      {"direction", row.breakdown.s_direction},
                      {"ttc", row.breakdown.s_ttc},
                      {"speed", row.breakdown.s_speed},
                      {"progress", row.breakdown.s_progress},
                      {"comfort", row.breakdown.s_comfort}};
  j["diagnostics"] = {{"min_ttc_s", std::isfinite(row.breakdown.min_ttc_s)
                                      ? json(row.breakdown.min_ttc_s)
                                      : json(nullptr)},
                      {"worst_wrong_way_m", row.breakdown.worst_wrong_way_m},
                      {"speed_violation_integral", row.breakdown.speed_violation_integral}};
  j["score"] = row.breakdown.composite;
  if (!row.ok) {
    j["error"] = row.breakdown.error_tag;
    j["error_detail"] = row.breakdown.error_detail;
  }
  return j;
}

inline json probe_outcome_to_json(const ProbeOutcome & outcome)
{
  json j;
  j["scenario_id"] = outcome.scenario_id;
  j["valid"] = outcome.valid;
  if (!outcome.valid) {
    j["error"] = outcome.error;
    return j;
  }
  j["final_lateral_deviation_m"] = outcome.final_lateral_deviation_m;
  j["direction_baseline"] = to_string(outcome.direction_baseline);
  j["direction_perturbed"] = to_string(outcome.direction_perturbed);
  j["flipped"] = outcome.flipped;
  if (outcome.reasoning_direction) {
    j["reasoning_direction"] = to_string(*outcome.reasoning_direction);
  }
  j["contradiction"] = outcome.contradiction;
  j["flagged"] = outcome.flagged;
  return j;
}

inline json probe_report_to_json(const ProbeReport & report)
{
  json j;
  j["spec"] = {{"kind", to_string(report.spec.kind)},
               {"offset_factor", report.spec.offset_factor},
               {"deviation_threshold_m", report.spec.deviation_threshold_m},
               {"turn_threshold_m", report.spec.turn_threshold_m},
               {"horizon_s", report.spec.horizon_s},
               {"dt_s", report.spec.dt_s}};
  j["outcomes"] = json::array();
  for (const ProbeOutcome & outcome : report.outcomes) {
    j["outcomes"].push_back(probe_outcome_to_json(outcome));
  }
  j["mean_abs_deviation_m"] = report.mean_abs_deviation_m;
  j["flagged_fraction"] = report.flagged_fraction;
  j["inversion_rate"] = report.inversion_rate;
  j["contradictions"] = report.contradictions;
  j["invalid_count"] = report.invalid_count;
  j["verdict"] = to_string(report.verdict);
  j["reference"] = {
    {"trained_vlm_offset_deviation_m",
     {kReferenceShortcutDeviationsM[0], kReferenceShortcutDeviationsM[1]}}};
  return j;
}

// CSV exports: '.' decimal, ',' separator, header row, LF line endings.
inline std::string probe_report_to_csv(const ProbeReport & report)
{
  std::string csv =
    "scenario_id,kind,valid,final_lateral_deviation_m,direction_baseline,direction_perturbed,"
    "flipped,reasoning_direction,contradiction,flagged,error\n";
  for (const ProbeOutcome & o : report.outcomes) {
    csv += o.scenario_id;
    csv += ',';
    csv += to_string(report.spec.kind);
    csv += ',';
    csv += o.valid ? "1" : "0";
    csv += ',';
    csv += o.valid ? format_double(o.final_lateral_deviation_m) : "";
    csv += ',';
    csv += o.valid ? to_string(o.direction_baseline) : "";
    csv += ',';
    csv += o.valid ? to_string(o.direction_perturbed) : "";
    csv += ',';
    csv += o.valid ? (o.flipped ? "1" : "0") : "";
    csv += ',';
    csv += o.reasoning_direction ? to_string(*o.reasoning_direction) : "";
    csv += ',';
    csv += o.valid ? (o.contradiction ? "1" : "0") : "";
    csv += ',';
    csv += o.valid ? (o.flagged ? "1" : "0") : "";
    csv += ',';
    csv += o.error;
    csv += '\n';
  }
  return csv;
}

inline json attention_report_to_json(const AttentionReport & report)
{
  json j;
  j["buckets"] = {{"shallow", report.buckets.shallow},
                  {"middle", report.buckets.middle},
                  {"final", report.buckets.final_layer}};
  j["rows"] = json::array();
  for (const AttentionReportRow & row : report.rows) {
    j["rows"].push_back({{"bucket", row.bucket},
                         {"layer", row.layer},
                         {"target", row.target},
                         {"source", row.source},
                         {"proportion", row.proportion}});
  }
  return j;
}

inline std::string attention_report_to_csv(const AttentionReport & report)
{
  std::string csv = "bucket,layer,target,source,proportion\n";
  for (const AttentionReportRow & row : report.rows) {
    csv += row.bucket;
    csv += ',';
    csv += std::to_string(row.layer);
    csv += ',';
    csv += row.target;
    csv += ',';
    csv += row.source;
    csv += ',';
    csv += format_double(row.proportion);
    csv += '\n';
  }
  return csv;
}

/// Per-horizon aggregate grouped by scenario type. Errored scenarios score 0
/// and are counted separately.
template <typename Row>
inline json summarize_rows(const std::vector<Row> & rows, const std::vector<double> & horizons)
{
  json summary = json::array();
  for (double h : horizons) {
    size_t n = 0;
    size_t errors = 0;
    double total = 0.0;
    std::map<std::string, std::pair<size_t, double>> by_type;
    for (const Row & row : rows) {
      if (row.horizon_s != h) {
        continue;
      }
      ++n;
      if (!row.ok) {
        ++errors;
      }
      total += row.breakdown.composite;
      auto & bucket = by_type[row.scenario_type];
      ++bucket.first;
      bucket.second += row.breakdown.composite;
    }
    json by_type_json;
    for (const auto & [type, bucket] : by_type) {
      by_type_json[type] = {{"n", bucket.first},
                            {"mean_score", bucket.second / static_cast<double>(bucket.first)}};
    }
    summary.push_back({{"horizon_s", h},
                       {"n_scenarios", n},
                       {"n_errors", errors},
                       {"mean_score", n == 0 ? 0.0 : total / static_cast<double>(n)},
                       {"by_scenario_type", by_type_json}});
  }
  return summary;
}

inline void write_text_file(const std::string & path, const std::string & content)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot open output file: " + path);
  }
  out << content;
  if (!out) {
    throw Error("failed while writing: " + path);
  }
}

inline std::string file_digest(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open file for digest: " + path);
  }
  const std::string bytes((std::istreambuf_iterator<char>(in)), {});
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return std::string("fnv1a64:") + hex;
}

/// Every run writes one manifest next to its result files. Timestamps live
/// only here, keeping the result files byte-reproducible.
struct RunManifest {
  std::string command;
  json config_snapshot;
  std::string corpus_digest;
  std::string started_at;
  std::string finished_at;
  std::map<std::string, std::string> results;  // logical name -> file name
};

inline json run_manifest_to_json(const RunManifest & manifest)
{
  json j;
  j["tool_version"] = kVersion;
  j["command"] = manifest.command;
  j["config"] = manifest.config_snapshot;
  j["corpus_digest"] = manifest.corpus_digest;
  j["started_at"] = manifest.started_at;
  j["finished_at"] = manifest.finished_at;
  j["results"] = manifest.results;
  return j;
}

}  // namespace planprobe

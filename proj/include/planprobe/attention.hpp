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

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "planprobe/errors.hpp"

namespace planprobe {

// Attention dump file layout:
//   bytes 0-7    magic "ATTNDMP1"
//   bytes 8-11   little-endian u32 header length
//   header       UTF-8 JSON {layers, heads, seq_len, dtype:"f32",
//                            segments: {name: [start, end)}}
//   payload      row-major little-endian f32, ordered [layer][head][query][key]
// The file size must equal 12 + header length + 4*L*H*S^2.

inline constexpr char kAttentionMagic[8] = {'A', 'T', 'T', 'N', 'D', 'M', 'P', '1'};
inline constexpr double kRowSumTolerance = 1e-4;

struct SegmentRange {
  size_t begin{0};
  size_t end{0};  // half-open

  size_t size() const { return end - begin; }
  bool contains(size_t index) const { return index >= begin && index < end; }
  bool operator==(const SegmentRange &) const = default;
};

/// Named disjoint token-index ranges. Reserved names: image, priors,
/// reasoning, planning, other_text.
struct SegmentMap {
  std::map<std::string, SegmentRange> segments;

  void validate(size_t seq_len) const
  {
    for (const auto & [name, range] : segments) {
      if (range.begin >= range.end) {
        throw ValidationError("segment `" + name + "`: empty or inverted range");
      }
      if (range.end > seq_len) {
        throw ValidationError("segment `" + name + "`: exceeds seq_len " +
                              std::to_string(seq_len));
      }
      for (const auto & [other_name, other] : segments) {
        if (other_name == name) {
          continue;
        }
        if (range.begin < other.end && other.begin < range.end) {
          throw ValidationError("segments `" + name + "` and `" + other_name + "` overlap");
        }
      }
    }
  }
};

struct AttentionDump {
  size_t layers{0};
  size_t heads{0};
  size_t seq_len{0};
  std::vector<float> weights;  // [layer][head][query][key], row-major
  SegmentMap segments;

  double at(size_t layer, size_t head, size_t query, size_t key) const
  {
    return weights[((layer * heads + head) * seq_len + query) * seq_len + key];
  }

  float & mutable_at(size_t layer, size_t head, size_t query, size_t key)
  {
    return weights[((layer * heads + head) * seq_len + query) * seq_len + key];
  }
};

/// Structural validation: causal entries above the diagonal must be exactly
/// zero and every row must sum to 1 within 1e-4 over the unmasked keys.
inline void validate_attention_dump(const AttentionDump & dump)
{
  if (dump.layers == 0 || dump.heads == 0 || dump.seq_len == 0) {
    throw ValidationError("attention dump: dimensions must be positive");
  }
  if (dump.weights.size() != dump.layers * dump.heads * dump.seq_len * dump.seq_len) {
    throw ValidationError("attention dump: weight count does not match the dimensions");
  }
  for (size_t l = 0; l < dump.layers; ++l) {
    for (size_t h = 0; h < dump.heads; ++h) {
      for (size_t i = 0; i < dump.seq_len; ++i) {
        double row_sum = 0.0;
        for (size_t j = 0; j < dump.seq_len; ++j) {
          const double a = dump.at(l, h, i, j);
          if (j > i && a != 0.0) {
            throw ValidationError("attention dump: nonzero masked entry at (layer " +
                                  std::to_string(l) + ", head " + std::to_string(h) + ", query " +
                                  std::to_string(i) + ", key " + std::to_string(j) + ")");
          }
          if (a < 0.0) {
            throw ValidationError("attention dump: negative weight at (layer " +
                                  std::to_string(l) + ", head " + std::to_string(h) + ", query " +
                                  std::to_string(i) + ")");
          }
          row_sum += a;
        }
        if (std::abs(row_sum - 1.0) > kRowSumTolerance) {
          throw ValidationError("attention dump: non-stochastic row (sum " +
                                std::to_string(row_sum) + ") at (layer " + std::to_string(l) +
                                ", head " + std::to_string(h) + ", query " + std::to_string(i) +
                                ")");
        }
      }
    }
  }
  dump.segments.validate(dump.seq_len);
}

inline AttentionDump load_attention_dump(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open attention dump: " + path);
  }
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), {});
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kAttentionMagic, 8) != 0) {
    throw ParseError(path + ": not an attention dump (bad magic)");
  }
  const auto u8 = [&](size_t at) { return static_cast<uint32_t>(static_cast<uint8_t>(bytes[at])); };
  const uint32_t header_len = u8(8) | (u8(9) << 8) | (u8(10) << 16) | (u8(11) << 24);
  if (bytes.size() < 12 + static_cast<size_t>(header_len)) {
    throw ParseError(path + ": truncated header (expected " + std::to_string(12 + header_len) +
                     " bytes before payload, file has " + std::to_string(bytes.size()) + ")");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 12, bytes.begin() + 12 + header_len);
  } catch (const nlohmann::json::exception & e) {
    throw ParseError(path + ": malformed header JSON: " + e.what());
  }
  AttentionDump dump;
  dump.layers = header.at("layers").get<size_t>();
  dump.heads = header.at("heads").get<size_t>();
  dump.seq_len = header.at("seq_len").get<size_t>();
  if (header.at("dtype").get<std::string>() != "f32") {
    throw ParseError(path + ": unsupported dtype (expected f32)");
  }
  if (header.contains("segments")) {
    for (const auto & [name, range] : header["segments"].items()) {
      dump.segments.segments[name] = {range[0].get<size_t>(), range[1].get<size_t>()};
    }
  }
  const size_t count = dump.layers * dump.heads * dump.seq_len * dump.seq_len;
  const size_t expected = 12 + static_cast<size_t>(header_len) + 4 * count;
  if (bytes.size() != expected) {
    throw ParseError(path + ": payload size mismatch (expected " + std::to_string(expected) +
                     " bytes, file has " + std::to_string(bytes.size()) + ")");
  }
  dump.weights.resize(count);
  const size_t payload = 12 + header_len;
  for (size_t n = 0; n < count; ++n) {
    const size_t at = payload + 4 * n;
    const uint32_t raw = u8(at) | (u8(at + 1) << 8) | (u8(at + 2) << 16) | (u8(at + 3) << 24);
    dump.weights[n] = std::bit_cast<float>(raw);
  }
  validate_attention_dump(dump);
  return dump;
}

inline void save_attention_dump(const std::string & path, const AttentionDump & dump)
{
  nlohmann::json header;
  header["layers"] = dump.layers;
  header["heads"] = dump.heads;
  header["seq_len"] = dump.seq_len;
  header["dtype"] = "f32";
  header["segments"] = nlohmann::json::object();
  for (const auto & [name, range] : dump.segments.segments) {
    header["segments"][name] = {range.begin, range.end};
  }
  const std::string header_str = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot open attention dump for writing: " + path);
  }
  out.write(kAttentionMagic, 8);
  const auto header_len = static_cast<uint32_t>(header_str.size());
  const char len_bytes[4] = {
    static_cast<char>(header_len & 0xff), static_cast<char>((header_len >> 8) & 0xff),
    static_cast<char>((header_len >> 16) & 0xff), static_cast<char>((header_len >> 24) & 0xff)};
  out.write(len_bytes, 4);
  out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
  for (const float w : dump.weights) {
    const auto raw = std::bit_cast<uint32_t>(w);
    const char b[4] = {static_cast<char>(raw & 0xff), static_cast<char>((raw >> 8) & 0xff),
                       static_cast<char>((raw >> 16) & 0xff),
                       static_cast<char>((raw >> 24) & 0xff)};
    out.write(b, 4);
  }
  if (!out) {
    throw Error("failed while writing attention dump: " + path);
  }
}

/// Sequence-aggregated attention: the head-averaged total attention the
/// target span pays to each preceding token j (no query normalization).
inline std::vector<double> aggregate(const AttentionDump & dump, size_t layer,
                                     const SegmentRange & target)
{
  if (layer >= dump.layers) {
    throw ValidationError("aggregate: layer " + std::to_string(layer) + " out of range");
  }
  if (target.begin >= target.end || target.end > dump.seq_len) {
    throw ValidationError("aggregate: empty or out-of-range target segment");
  }
  std::vector<double> scores(dump.seq_len, 0.0);
  for (size_t i = target.begin; i < target.end; ++i) {
    for (size_t h = 0; h < dump.heads; ++h) {
      for (size_t j = 0; j <= i; ++j) {
        scores[j] += dump.at(layer, h, i, j);
      }
    }
  }
  for (double & s : scores) {
    s /= static_cast<double>(dump.heads);
  }
  return scores;
}

namespace attention_detail {

inline void check_sources(std::span<const SegmentRange> sources, const SegmentRange & target,
                          size_t seq_len)
{
  std::vector<bool> covered(seq_len, false);
  for (const SegmentRange & s : sources) {
    for (size_t j = s.begin; j < s.end && j < seq_len; ++j) {
      if (covered[j]) {
        throw ValidationError("proportional: source segments overlap at token " +
                              std::to_string(j));
      }
      covered[j] = true;
    }
  }
  // The causal mask bounds the attended context by the last target query.
  for (size_t j = 0; j < target.end; ++j) {
    if (!covered[j]) {
      throw ValidationError("proportional: token " + std::to_string(j) +
                            " is attended by the target but not covered by any source segment");
    }
  }
}

}  // namespace attention_detail

/// Proportional attention: the share of the target span's total attention
/// that lands on `source`, with the declared sources as the denominator.
inline double proportional(const AttentionDump & dump, size_t layer, const SegmentRange & source,
                           const SegmentRange & target, std::span<const SegmentRange> sources)
{
  attention_detail::check_sources(sources, target, dump.seq_len);
  const std::vector<double> scores = aggregate(dump, layer, target);
  double numerator = 0.0;
  for (size_t j = source.begin; j < source.end && j < dump.seq_len; ++j) {
    numerator += scores[j];
  }
  double denominator = 0.0;
  for (const SegmentRange & s : sources) {
    for (size_t j = s.begin; j < s.end && j < dump.seq_len; ++j) {
      denominator += scores[j];
    }
  }
  if (denominator <= 0.0) {
    throw ValidationError("proportional: target attends only masked positions");
  }
  return numerator / denominator;
}

struct LayerBuckets {
  size_t shallow{0};
  size_t middle{0};
  size_t final_layer{0};

  /// shallow = 0, middle = floor(L/2), final = L-1.
  static LayerBuckets defaults(size_t layers)
  {
    if (layers == 0) {
      throw ValidationError("layer buckets: need at least one layer");
    }
    return {0, layers / 2, layers - 1};
  }
};

struct AttentionReportRow {
  std::string bucket;
  size_t layer{0};
  std::string target;
  std::string source;
  double proportion{0.0};
};

struct AttentionReport {
  LayerBuckets buckets;
  std::vector<AttentionReportRow> rows;
};

/// Table of proportional scores per (layer bucket, output target, source
/// segment) for the reasoning and planning targets present in the map.
inline AttentionReport build_report(const AttentionDump & dump, const SegmentMap & segmap,
                                    const LayerBuckets & buckets)
{
  segmap.validate(dump.seq_len);
  AttentionReport report;
  report.buckets = buckets;
  std::vector<SegmentRange> sources;
  std::vector<std::string> source_names;
  for (const auto & [name, range] : segmap.segments) {
    sources.push_back(range);
    source_names.push_back(name);
  }
  const std::pair<const char *, size_t> bucket_layers[] = {
    {"shallow", buckets.shallow}, {"middle", buckets.middle}, {"final", buckets.final_layer}};
  for (const char * target_name : {"reasoning", "planning"}) {
    const auto target_it = segmap.segments.find(target_name);
    if (target_it == segmap.segments.end()) {
      continue;
    }
    for (const auto & [bucket_name, layer] : bucket_layers) {
      for (size_t s = 0; s < sources.size(); ++s) {
        report.rows.push_back({bucket_name, layer, target_name, source_names[s],
                               proportional(dump, layer, sources[s], target_it->second, sources)});
      }
    }
  }
  return report;
}

}  // namespace planprobe

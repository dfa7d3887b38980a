// Copyright 2026 The qtab Authors. All Rights Reserved.
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

#include "qtab/trial_log.h"

#include <cstdio>
#include <json.hpp>
#include <utility>

#include "qtab/error.h"

namespace qtab {
namespace {

using nlohmann::json;

json point_fields(const Trial& t, const TrialLogContext& ctx) {
  const EvalPoint& p = t.point;
  json j;
  j["trial"] = p.trial_index;
  j["strategy"] = to_string(p.strategy);
  j["seed"] = ctx.seed;
  j["dataset"] = ctx.dataset_hash;
  j["evaluator"] = ctx.evaluator_id;
  j["encode"] = ctx.encode_id;
  const auto values = p.qtable.values();
  j["qtable"] = std::vector<int>(values.begin(), values.end());
  j["compression_rate"] = p.compression_rate;
  j["accuracy"] = p.accuracy;
  j["mean_psnr"] = p.mean_psnr ? json(*p.mean_psnr) : json(nullptr);
  j["y"] = t.y ? json(*t.y) : json(nullptr);
  j["source"] = t.source;
  j["improved_frontier"] = t.improved_frontier;
  j["good"] = t.good;
  return j;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

Trial trial_from_json(const json& j) {
  Trial t;
  const auto values = j.at("qtable").get<std::vector<int>>();
  if (values.size() != static_cast<std::size_t>(kBlockSize)) {
    throw InvalidArgument("qtable must have 64 entries");
  }
  t.point.qtable = QTable(values);
  t.point.trial_index = j.at("trial").get<int>();
  t.point.strategy = parse_strategy(j.at("strategy").get<std::string>());
  t.point.compression_rate = j.at("compression_rate").get<double>();
  t.point.accuracy = j.at("accuracy").get<double>();
  if (!j.at("mean_psnr").is_null()) t.point.mean_psnr = j["mean_psnr"].get<double>();
  if (!j.at("y").is_null()) t.y = j["y"].get<double>();
  t.source = j.at("source").get<std::string>();
  t.improved_frontier = j.at("improved_frontier").get<bool>();
  t.good = j.at("good").get<bool>();
  return t;
}

}  // namespace

std::filesystem::path timing_sidecar(const std::filesystem::path& log_path) {
  std::filesystem::path p = log_path;
  p.replace_extension(".timing.jsonl");
  return p;
}

std::string trial_to_json(const Trial& trial, const TrialLogContext& context) {
  return point_fields(trial, context).dump();
}

TrialLogWriter::TrialLogWriter(const std::filesystem::path& path, TrialLogContext context)
    : context_(std::move(context)), log_(open_out(path)), timing_(open_out(timing_sidecar(path))) {}

void TrialLogWriter::append(const Trial& trial) {
  log_ << trial_to_json(trial, context_) << '\n';
  log_.flush();
  timing_ << json{{"trial", trial.point.trial_index}, {"decision_seconds", trial.decision_seconds}}.dump()
          << '\n';
  timing_.flush();
  if (!log_ || !timing_) throw IoError("failed to append to trial log");
}

TrialLog read_trial_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  TrialLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      TrialLogContext ctx;
      ctx.seed = j.at("seed").get<std::uint64_t>();
      ctx.dataset_hash = j.at("dataset").get<std::string>();
      ctx.evaluator_id = j.at("evaluator").get<std::string>();
      ctx.encode_id = j.at("encode").get<std::string>();
      if (log.trials.empty()) {
        log.context = ctx;
      } else if (!(ctx == log.context)) {
        throw DatasetError(path.string() + ": run context differs from the first line", line_no);
      }
      log.trials.push_back(trial_from_json(j));
    } catch (const json::exception& e) {
      throw DatasetError(path.string() + ": " + e.what(), line_no);
    } catch (const InvalidArgument& e) {
      throw DatasetError(path.string() + ": " + e.what(), line_no);
    }
  }

  std::ifstream timing(timing_sidecar(path), std::ios::binary);
  if (timing) {
    std::map<int, double> seconds;
    while (std::getline(timing, line)) {
      if (line.empty()) continue;
      try {
        const json j = json::parse(line);
        seconds[j.at("trial").get<int>()] = j.at("decision_seconds").get<double>();
      } catch (const json::exception&) {
        break;
      }
    }
    for (Trial& t : log.trials) {
      if (auto it = seconds.find(t.point.trial_index); it != seconds.end()) t.decision_seconds = it->second;
    }
  }
  return log;
}

void write_frontier_csv(std::ostream& out, std::span<const EvalPoint> points) {
  out << "trial,strategy,compression_rate,accuracy,mean_psnr,qtable\n";
  char buf[128];
  for (const EvalPoint& p : points) {
    std::snprintf(buf, sizeof buf, "%d,%s,%.17g,%.17g,", p.trial_index, to_string(p.strategy).c_str(),
                  p.compression_rate, p.accuracy);
    out << buf;
    if (p.mean_psnr) {
      std::snprintf(buf, sizeof buf, "%.17g", *p.mean_psnr);
      out << buf;
    }
    out << ',' << p.qtable.hex() << '\n';
  }
}

void write_frontier_csv(const std::filesystem::path& path, std::span<const EvalPoint> points) {
  std::ofstream out = open_out(path);
  write_frontier_csv(out, points);
  out.flush();
  if (!out) throw IoError("failed to write " + path.string());
}

}  // namespace qtab

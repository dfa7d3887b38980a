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

#ifndef QTAB_TRIAL_LOG_H_
#define QTAB_TRIAL_LOG_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qtab/pareto.h"
#include "qtab/search.h"

namespace qtab {

// Run context repeated on every line of a trial log, so that each line is
// self-describing and a log holds exactly one line per trial.
struct TrialLogContext {
  std::uint64_t seed = 0;
  std::string dataset_hash;
  std::string evaluator_id;
  std::string encode_id;
  bool operator==(const TrialLogContext&) const = default;
};

struct TrialLog {
  TrialLogContext context;
  std::vector<Trial> trials;
};

// Wall-clock decision times go to a sidecar so that the main log only holds
// deterministic fields: identical seeds give byte-identical logs.
std::filesystem::path timing_sidecar(const std::filesystem::path& log_path);

class TrialLogWriter {
 public:
  // Truncates both files.
  TrialLogWriter(const std::filesystem::path& path, TrialLogContext context);
  // Appends one record to each file and flushes.
  void append(const Trial& trial);

 private:
  TrialLogContext context_;
  std::ofstream log_;
  std::ofstream timing_;
};

std::string trial_to_json(const Trial& trial, const TrialLogContext& context);

// Reads a log written by TrialLogWriter, attaching decision times when the
// sidecar is present. Throws DatasetError with the offending line number, and
// when lines disagree on the run context.
TrialLog read_trial_log(const std::filesystem::path& path);

// One row per member: trial,strategy,compression_rate,accuracy,mean_psnr,qtable
void write_frontier_csv(std::ostream& out, std::span<const EvalPoint> points);
void write_frontier_csv(const std::filesystem::path& path, std::span<const EvalPoint> points);

}  // namespace qtab

#endif  // QTAB_TRIAL_LOG_H_

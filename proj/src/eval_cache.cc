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

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cstring>
#include <fstream>
#include <json.hpp>

#include "qtab/error.h"
#include "qtab/eval.h"

namespace qtab {
namespace {

std::string pack_bits(const std::vector<std::uint8_t>& bits) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve((bits.size() + 3) / 4);
  for (std::size_t i = 0; i < bits.size(); i += 4) {
    int nibble = 0;
    for (std::size_t k = 0; k < 4 && i + k < bits.size(); ++k) nibble |= (bits[i + k] ? 1 : 0) << k;
    out += kHex[nibble];
  }
  return out;
}

std::optional<std::vector<std::uint8_t>> unpack_bits(const std::string& hex, std::size_t n) {
  if (hex.size() != (n + 3) / 4) return std::nullopt;
  std::vector<std::uint8_t> bits(n);
  for (std::size_t i = 0; i < n; ++i) {
    const char c = hex[i / 4];
    int v;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else return std::nullopt;
    bits[i] = (v >> (i % 4)) & 1;
  }
  return bits;
}

}  // namespace

EvalCache::EvalCache(const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw IoError("cannot create cache directory " + directory.string() + ": " + ec.message());
  file_ = directory / "evals.jsonl";
  std::ifstream in(file_);
  std::string line;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) continue;  // torn or foreign line
    try {
      CachedEval e;
      e.compression_rate = j.at("rate").get<double>();
      e.accuracy = j.at("acc").get<double>();
      if (j.contains("psnr") && !j["psnr"].is_null()) e.mean_psnr = j["psnr"].get<double>();
      auto bits = unpack_bits(j.at("correct").get<std::string>(), j.at("n").get<std::size_t>());
      if (!bits) continue;
      e.correct = std::move(*bits);
      entries_[j.at("key").get<std::string>()] = std::move(e);
    } catch (const nlohmann::json::exception&) {
      continue;
    }
  }
}

std::string EvalCache::key(const Dataset& dataset, const Evaluator& evaluator,
                           const EncodeConfig& config, const TableSet& tables, bool psnr) {
  return dataset.hash() + "|" + evaluator.id() + "|" + config.id() + "|" + tables.luma.hex() +
         "|" + tables.chroma.hex() + (psnr ? "|psnr" : "");
}

std::optional<CachedEval> EvalCache::lookup(const std::string& key) const {
  std::lock_guard lock(mu_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void EvalCache::store(const std::string& key, const CachedEval& value) {
  nlohmann::json j{{"key", key},
                   {"rate", value.compression_rate},
                   {"acc", value.accuracy},
                   {"psnr", value.mean_psnr ? nlohmann::json(*value.mean_psnr) : nlohmann::json()},
                   {"n", value.correct.size()},
                   {"correct", pack_bits(value.correct)}};
  const std::string line = j.dump() + "\n";

  std::lock_guard lock(mu_);
  entries_[key] = value;
  const int fd = ::open(file_.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw IoError("cannot open cache file " + file_.string() + ": " + std::strerror(errno));
  ::flock(fd, LOCK_EX);
  std::size_t off = 0;
  bool ok = true;
  while (off < line.size()) {
    const ssize_t n = ::write(fd, line.data() + off, line.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      ok = false;
      break;
    }
    off += static_cast<std::size_t>(n);
  }
  ::flock(fd, LOCK_UN);
  ::close(fd);
  if (!ok) throw IoError("cannot append to cache file " + file_.string());
}

std::size_t EvalCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

}  // namespace qtab

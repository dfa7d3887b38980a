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

#ifndef QTAB_EVALUATOR_H_
#define QTAB_EVALUATOR_H_

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qtab/data.h"
#include "qtab/image.h"
#include "qtab/proxy_classifier.h"

namespace qtab {

// Scores decoded images. decoded[k] is the reconstruction of
// dataset[indices[k]]; the result holds 1 for every image judged correct.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  // Stable identity used in cache keys.
  virtual std::string id() const = 0;
  virtual std::vector<std::uint8_t> judge(const Dataset& dataset,
                                          std::span<const std::size_t> indices,
                                          std::span<const RawImage> decoded, int threads) = 0;
};

// Evaluators that predict a label per image; correct = (label == truth).
class ClassifierEvaluator : public Evaluator {
 public:
  virtual std::vector<int> predict(std::span<const RawImage> images, int threads) = 0;
  std::vector<std::uint8_t> judge(const Dataset& dataset, std::span<const std::size_t> indices,
                                  std::span<const RawImage> decoded, int threads) override;
};

class ProxyEvaluator : public ClassifierEvaluator {
 public:
  explicit ProxyEvaluator(ProxyConfig config = {}) : proxy_(std::move(config)) {}
  std::string id() const override;
  std::vector<int> predict(std::span<const RawImage> images, int threads) override;
  const ProxyClassifier& proxy() const { return proxy_; }

 private:
  ProxyClassifier proxy_;
};

// Correct when the decoded image reaches `threshold_db` PSNR against the
// original.
class PsnrThresholdEvaluator : public Evaluator {
 public:
  explicit PsnrThresholdEvaluator(double threshold_db) : threshold_db_(threshold_db) {}
  std::string id() const override;
  std::vector<std::uint8_t> judge(const Dataset& dataset, std::span<const std::size_t> indices,
                                  std::span<const RawImage> decoded, int threads) override;

 private:
  double threshold_db_;
};

struct ExternalEndpoint {
  // Either a shell command whose stdin/stdout carry the protocol, or a TCP
  // host and port.
  std::string command;
  std::string host;
  int port = 0;
};

struct ExternalOptions {
  int connections = 1;
  std::chrono::milliseconds timeout{30000};
  int max_in_flight = 32;
};

// Line-delimited JSON classifier service. Requests carry base64 RGB pixels;
// the evaluator must greet with {"hello": {"classes": N}}.
class ExternalEvaluator : public ClassifierEvaluator {
 public:
  ExternalEvaluator(ExternalEndpoint endpoint, ExternalOptions options = {});
  ~ExternalEvaluator() override;
  std::string id() const override;
  std::vector<int> predict(std::span<const RawImage> images, int threads) override;
  int class_count() const { return class_count_; }

  class Connection;

 private:
  ExternalEndpoint endpoint_;
  ExternalOptions options_;
  std::vector<std::unique_ptr<Connection>> pool_;
  int class_count_ = 0;
  std::int64_t next_id_ = 0;
};

enum class EvaluatorKind { kExternalClassifier, kProxyClassifier, kPsnrThreshold };

std::string to_string(EvaluatorKind kind);
EvaluatorKind parse_evaluator_kind(std::string_view s);

struct EvaluatorSpec {
  EvaluatorKind kind = EvaluatorKind::kProxyClassifier;
  std::map<std::string, std::string> config;

  // "proxy", "proxy:classes=20", "psnr:threshold_db=32",
  // "external:command=./stub", "external:host=127.0.0.1,port=9000".
  static EvaluatorSpec parse(std::string_view text);
  std::string to_string() const;
};

// Proxy evaluators take their class count from `classes`, falling back to
// `default_class_count`. Throws InvalidArgument on missing required keys.
std::unique_ptr<Evaluator> make_evaluator(const EvaluatorSpec& spec, int default_class_count);

}  // namespace qtab

#endif  // QTAB_EVALUATOR_H_

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

#ifndef QTAB_TESTS_SUPPORT_ORACLE_EVALUATOR_H_
#define QTAB_TESTS_SUPPORT_ORACLE_EVALUATOR_H_

#include <string>
#include <vector>

#include "qtab/evaluator.h"

namespace qtab::testing {

// Reads the true label from the dataset instead of the pixels, so every image
// is classified correctly.
class LabelOracleEvaluator : public Evaluator {
 public:
  std::string id() const override { return "label-oracle"; }
  std::vector<std::uint8_t> judge(const Dataset& dataset, std::span<const std::size_t> indices,
                                  std::span<const RawImage> decoded, int) override {
    std::vector<std::uint8_t> out(indices.size());
    for (std::size_t k = 0; k < indices.size(); ++k) {
      out[k] = decoded[k].width == dataset[indices[k]].image.width &&
               decoded[k].height == dataset[indices[k]].image.height;
    }
    return out;
  }
};

// Always answers the same class.
class ConstantEvaluator : public ClassifierEvaluator {
 public:
  explicit ConstantEvaluator(int label) : label_(label) {}
  std::string id() const override { return "constant:" + std::to_string(label_); }
  std::vector<int> predict(std::span<const RawImage> images, int) override {
    return std::vector<int>(images.size(), label_);
  }

 private:
  int label_;
};

}  // namespace qtab::testing

#endif  // QTAB_TESTS_SUPPORT_ORACLE_EVALUATOR_H_

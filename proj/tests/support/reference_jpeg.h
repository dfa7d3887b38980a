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

#ifndef QTAB_TESTS_SUPPORT_REFERENCE_JPEG_H_
#define QTAB_TESTS_SUPPORT_REFERENCE_JPEG_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qtab/image.h"

namespace qtab::testing {

// Decodes with libjpeg (default settings: islow IDCT, fancy upsampling) into
// RGB. Returns false and fills `error` when libjpeg rejects the stream.
bool reference_decode(std::span<const std::uint8_t> stream, RawImage& out, std::string& error);

struct ReferenceEncodeOptions {
  int quality = 75;
  bool progressive = false;
  bool optimize_coding = false;
  int restart_interval = 0;  // in MCUs
  bool subsample = true;     // 4:2:0 when set, else 4:4:4
  bool grayscale = false;
};

// Encodes with libjpeg.
std::vector<std::uint8_t> reference_encode(const RawImage& image, const ReferenceEncodeOptions& options);

}  // namespace qtab::testing

#endif  // QTAB_TESTS_SUPPORT_REFERENCE_JPEG_H_

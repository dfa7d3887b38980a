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

#ifndef QTAB_IMAGE_H_
#define QTAB_IMAGE_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace qtab {

// Interleaved 8-bit RGB, row-major.
struct RawImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  RawImage() = default;
  RawImage(int w, int h);  // zero-filled
  RawImage(int w, int h, std::vector<std::uint8_t> rgb);

  std::size_t raw_bytes() const { return static_cast<std::size_t>(width) * height * 3; }
  std::uint8_t* row(int y) { return pixels.data() + static_cast<std::size_t>(y) * width * 3; }
  const std::uint8_t* row(int y) const {
    return pixels.data() + static_cast<std::size_t>(y) * width * 3;
  }
  bool operator==(const RawImage&) const = default;
};

// Throws InvalidArgument unless dimensions are positive and the pixel buffer
// matches them.
void validate(const RawImage& image);

// Binary PPM (P6, maxval 255).
RawImage read_ppm(const std::filesystem::path& path);
RawImage parse_ppm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_ppm(const RawImage& image);
void write_ppm(const std::filesystem::path& path, const RawImage& image);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// Peak signal-to-noise ratio over all channels, in dB. Identical images give
// +infinity.
double psnr(const RawImage& a, const RawImage& b);

}  // namespace qtab

#endif  // QTAB_IMAGE_H_

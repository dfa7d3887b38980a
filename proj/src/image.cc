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

#include "qtab/image.h"

#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "qtab/error.h"

namespace qtab {

RawImage::RawImage(int w, int h)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0) {}

RawImage::RawImage(int w, int h, std::vector<std::uint8_t> rgb)
    : width(w), height(h), pixels(std::move(rgb)) {
  validate(*this);
}

void validate(const RawImage& image) {
  if (image.width <= 0 || image.height <= 0) {
    throw InvalidArgument("image dimensions must be positive, got " +
                          std::to_string(image.width) + "x" + std::to_string(image.height));
  }
  if (image.pixels.size() != image.raw_bytes()) {
    throw InvalidArgument("pixel buffer holds " + std::to_string(image.pixels.size()) +
                          " bytes, expected " + std::to_string(image.raw_bytes()));
  }
}

namespace {

// Reads one whitespace/comment separated header token from a PNM header.
class PnmHeaderReader {
 public:
  explicit PnmHeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  long next_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw IoError("malformed PPM header");
    }
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_++] - '0');
      if (value > 1'000'000) throw IoError("PPM header value out of range");
    }
    return value;
  }

  std::size_t pos() const { return pos_; }
  void skip(std::size_t n) { pos_ += n; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

RawImage parse_ppm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw IoError("not a binary PPM (P6) file");
  }
  PnmHeaderReader reader(bytes);
  reader.skip(2);
  const long w = reader.next_int();
  const long h = reader.next_int();
  const long maxval = reader.next_int();
  if (w <= 0 || h <= 0) throw IoError("PPM has empty dimensions");
  if (maxval != 255) throw IoError("only 8-bit PPM (maxval 255) is supported");
  // exactly one whitespace byte separates the header from the raster
  std::size_t start = reader.pos() + 1;
  const std::size_t need = static_cast<std::size_t>(w) * h * 3;
  if (start > bytes.size() || bytes.size() - start < need) {
    throw IoError("PPM raster truncated");
  }
  return RawImage(static_cast<int>(w), static_cast<int>(h),
                  std::vector<std::uint8_t>(bytes.begin() + start, bytes.begin() + start + need));
}

std::vector<std::uint8_t> encode_ppm(const RawImage& image) {
  validate(image);
  const std::string header =
      "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

RawImage read_ppm(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return parse_ppm(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_ppm(const std::filesystem::path& path, const RawImage& image) {
  write_file(path, encode_ppm(image));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

double psnr(const RawImage& a, const RawImage& b) {
  validate(a);
  validate(b);
  if (a.width != b.width || a.height != b.height) {
    throw InvalidArgument("psnr: image dimensions differ");
  }
  double sse = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = static_cast<double>(a.pixels[i]) - b.pixels[i];
    sse += d * d;
  }
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / static_cast<double>(a.pixels.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

}  // namespace qtab

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

#include "qtab/dct.h"

#include <cmath>
#include <numbers>

namespace qtab {
namespace {

// kBasis[u][x] = 1/2 C(u) cos((2x+1) u pi / 16); orthonormal rows.
struct DctBasis {
  double m[8][8];
  DctBasis() {
    for (int u = 0; u < 8; ++u) {
      const double cu = u == 0 ? std::numbers::sqrt2 / 2.0 : 1.0;
      for (int x = 0; x < 8; ++x) {
        m[u][x] = 0.5 * cu * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
      }
    }
  }
};

const DctBasis& basis() {
  static const DctBasis b;
  return b;
}

}  // namespace

Block forward_dct(const Block& spatial) {
  const auto& c = basis().m;
  double tmp[8][8];
  // rows: tmp[y][u] = sum_x f[y][x] c[u][x]
  for (int y = 0; y < 8; ++y) {
    for (int u = 0; u < 8; ++u) {
      double s = 0.0;
      for (int x = 0; x < 8; ++x) s += spatial[8 * y + x] * c[u][x];
      tmp[y][u] = s;
    }
  }
  Block out;
  for (int v = 0; v < 8; ++v) {
    for (int u = 0; u < 8; ++u) {
      double s = 0.0;
      for (int y = 0; y < 8; ++y) s += tmp[y][u] * c[v][y];
      out[8 * v + u] = s;
    }
  }
  return out;
}

Block inverse_dct(const Block& coefficients) {
  const auto& c = basis().m;
  double tmp[8][8];
  // columns first: tmp[y][u] = sum_v F[v][u] c[v][y]
  for (int y = 0; y < 8; ++y) {
    for (int u = 0; u < 8; ++u) {
      double s = 0.0;
      for (int v = 0; v < 8; ++v) s += coefficients[8 * v + u] * c[v][y];
      tmp[y][u] = s;
    }
  }
  Block out;
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      double s = 0.0;
      for (int u = 0; u < 8; ++u) s += tmp[y][u] * c[u][x];
      out[8 * y + x] = s;
    }
  }
  return out;
}

}  // namespace qtab

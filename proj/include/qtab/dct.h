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

#ifndef QTAB_DCT_H_
#define QTAB_DCT_H_

#include "qtab/block.h"

namespace qtab {

// Orthonormal 2D DCT-II with the JPEG normalization
//   F(u,v) = 1/4 C(u) C(v) sum_x sum_y f(x,y) cos((2x+1)u pi/16) cos((2y+1)v pi/16)
// with C(0) = 1/sqrt(2). The input is expected to be level-shifted by -128.
Block forward_dct(const Block& spatial);

// Exact inverse of forward_dct (real arithmetic, no rounding).
Block inverse_dct(const Block& coefficients);

}  // namespace qtab

#endif  // QTAB_DCT_H_

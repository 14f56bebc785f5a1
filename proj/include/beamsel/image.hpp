// SPDX-License-Identifier: Apache-2.0
//
// beamsel: analog beam selection toolkit for THz beamspace MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <vector>

#include "beamsel/common.hpp"

namespace beamsel
{
    /// side x side x 3 image, stored channel-major (c, y, x). Channels 1 and 2 are always zero.
    struct ImageTensor
    {
        std::size_t side = 0;
        std::vector<double> data;
        std::uint64_t source_sample_id = 0;

        static constexpr std::size_t channels = 3;

        double &at(std::size_t c, std::size_t y, std::size_t x) { return data[(c * side + y) * side + x]; }
        double at(std::size_t c, std::size_t y, std::size_t x) const { return data[(c * side + y) * side + x]; }
    };

    enum class Embedding
    {
        outer_product, // M = v v^T
        tiling         // every row of M is v
    };

    /// Catmull-Rom (a = -0.5) kernel weight at distance t.
    double catmull_rom(double t);

    /// Separable bicubic resize. Output corners coincide with input corners, and samples past the
    /// border are extrapolated linearly, so constant and affine images are reproduced exactly.
    RMatrix bicubic_resize(const RMatrix &src, std::size_t out_rows, std::size_t out_cols);

    RMatrix embed_features(const RVector &v, Embedding embedding = Embedding::outer_product);

    /// Embeds the feature vector as a square matrix, resizes it to target x target, and
    /// places it in channel 0.
    ImageTensor expand_to_image(const RVector &features, std::size_t target, std::uint64_t sample_id = 0,
                                Embedding embedding = Embedding::outer_product);
}

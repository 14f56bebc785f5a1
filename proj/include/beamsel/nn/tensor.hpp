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

#include <cstddef>

#include <Eigen/Dense>

namespace beamsel::nn
{
    using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    /// Minibatch activation: one row per channel, columns ordered (sample, y, x).
    struct Tensor
    {
        std::size_t channels = 0;
        std::size_t batch = 0;
        std::size_t height = 1;
        std::size_t width = 1;
        RowMatrix data;

        Tensor() = default;
        Tensor(std::size_t c, std::size_t b, std::size_t h, std::size_t w)
            : channels(c), batch(b), height(h), width(w),
              data(RowMatrix::Zero(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(b * h * w))) {}

        std::size_t plane() const { return height * width; }

        double &at(std::size_t c, std::size_t b, std::size_t y, std::size_t x)
        {
            return data(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>((b * height + y) * width + x));
        }
        double at(std::size_t c, std::size_t b, std::size_t y, std::size_t x) const
        {
            return data(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>((b * height + y) * width + x));
        }

        bool same_shape(const Tensor &o) const
        {
            return channels == o.channels && batch == o.batch && height == o.height && width == o.width;
        }
    };
}

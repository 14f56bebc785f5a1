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

#include "beamsel/image.hpp"

#include <array>
#include <cmath>

namespace beamsel
{
    double catmull_rom(double t)
    {
        constexpr double a = -0.5;
        t = std::abs(t);
        if (t < 1.0)
            return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
        if (t < 2.0)
            return (((t - 5.0) * t + 8.0) * t - 4.0) * a;
        return 0.0;
    }

    namespace
    {
        // Sample i of a 1-D signal with linear extrapolation outside [0, n).
        double sample(const double *s, std::ptrdiff_t stride, std::ptrdiff_t n, std::ptrdiff_t i)
        {
            if (n == 1)
                return s[0];
            if (i < 0)
                return s[0] + static_cast<double>(i) * (s[stride] - s[0]);
            if (i >= n)
                return s[(n - 1) * stride] + static_cast<double>(i - n + 1) * (s[(n - 1) * stride] - s[(n - 2) * stride]);
            return s[i * stride];
        }

        struct Taps
        {
            std::ptrdiff_t base;
            std::array<double, 4> w;
        };

        std::vector<Taps> taps_for(std::size_t in, std::size_t out)
        {
            std::vector<Taps> taps(out);
            const double scale = out > 1 ? static_cast<double>(in - 1) / static_cast<double>(out - 1) : 0.0;
            for (std::size_t o = 0; o < out; ++o)
            {
                const double x = static_cast<double>(o) * scale;
                const double fl = std::floor(x);
                const double t = x - fl;
                taps[o].base = static_cast<std::ptrdiff_t>(fl) - 1;
                taps[o].w = {catmull_rom(t + 1.0), catmull_rom(t), catmull_rom(1.0 - t), catmull_rom(2.0 - t)};
            }
            return taps;
        }
    }

    RMatrix bicubic_resize(const RMatrix &src, std::size_t out_rows, std::size_t out_cols)
    {
        if (src.size() == 0 || out_rows == 0 || out_cols == 0)
            throw Error(ErrorKind::invalid_argument, "bicubic_resize: empty input or output");
        const auto in_r = src.rows();
        const auto in_c = src.cols();
        const auto col_taps = taps_for(static_cast<std::size_t>(in_c), out_cols);
        const auto row_taps = taps_for(static_cast<std::size_t>(in_r), out_rows);

        // horizontal pass (row-major scratch: in_r x out_cols)
        const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = src;
        RMatrix tmp(in_r, static_cast<Eigen::Index>(out_cols));
        for (Eigen::Index r = 0; r < in_r; ++r)
        {
            const double *row = rm.data() + r * in_c;
            for (std::size_t o = 0; o < out_cols; ++o)
            {
                const auto &tp = col_taps[o];
                double acc = 0.0;
                for (std::ptrdiff_t k = 0; k < 4; ++k)
                    acc += tp.w[static_cast<std::size_t>(k)] * sample(row, 1, in_c, tp.base + k);
                tmp(r, static_cast<Eigen::Index>(o)) = acc;
            }
        }

        // vertical pass (column-major: columns are contiguous)
        RMatrix out(static_cast<Eigen::Index>(out_rows), static_cast<Eigen::Index>(out_cols));
        for (Eigen::Index c = 0; c < out.cols(); ++c)
        {
            const double *col = tmp.data() + c * in_r;
            for (std::size_t o = 0; o < out_rows; ++o)
            {
                const auto &tp = row_taps[o];
                double acc = 0.0;
                for (std::ptrdiff_t k = 0; k < 4; ++k)
                    acc += tp.w[static_cast<std::size_t>(k)] * sample(col, 1, in_r, tp.base + k);
                out(static_cast<Eigen::Index>(o), c) = acc;
            }
        }
        return out;
    }

    RMatrix embed_features(const RVector &v, Embedding embedding)
    {
        if (embedding == Embedding::tiling)
            return RVector::Ones(v.size()) * v.transpose();
        return v * v.transpose();
    }

    ImageTensor expand_to_image(const RVector &features, std::size_t target, std::uint64_t sample_id, Embedding embedding)
    {
        if (target < 4)
            throw Error(ErrorKind::invalid_argument, "expand_to_image: target side must be >= 4");
        const RMatrix resized = bicubic_resize(embed_features(features, embedding), target, target);
        ImageTensor img;
        img.side = target;
        img.source_sample_id = sample_id;
        img.data.assign(ImageTensor::channels * target * target, 0.0);
        for (std::size_t y = 0; y < target; ++y)
            for (std::size_t x = 0; x < target; ++x)
                img.at(0, y, x) = resized(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x));
        return img;
    }
}

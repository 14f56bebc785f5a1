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

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "beamsel/nn/network.hpp"

namespace beamsel::testing
{
    /// x / (1 + e^-x) in 50-digit arithmetic.
    inline double swish_oracle(double x)
    {
        using hp = boost::multiprecision::cpp_bin_float_50;
        const hp v(x);
        return static_cast<double>(v / (1 + exp(-v)));
    }

    inline double relative_error(double a, double b, double floor)
    {
        return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
    }

    /// The small network the gradient check runs on: 8x8 input, every width <= 4, no dropout.
    inline nn::NetworkSpec downsized_spec(nn::ActivationKind act)
    {
        nn::NetworkSpec s;
        s.input_side = 8;
        s.stem = {4, 3, 1};
        s.inception_blocks = {{2, 3, 2, 2, 2, 2}, {4, 2, 3, 2, 3, 4}};
        s.dropout_rate = 0.0;
        s.n_classes = 3;
        s.activation = act;
        return s;
    }

    struct GradientCheck
    {
        double max_rel_error = 0.0;
        std::size_t coordinates = 0;
    };

    /// Backprop against central differences on randomly chosen parameter coordinates. Relative
    /// error uses max(|a|, |n|, floor) as denominator so round-off on near-zero entries is not
    /// mistaken for a wrong derivative.
    inline GradientCheck gradient_check(nn::ClassifierModel &model, const nn::Tensor &x,
                                        const std::vector<std::uint8_t> &labels, std::size_t coords, double h,
                                        std::uint64_t seed, double floor = 1e-6)
    {
        Rng unused(0);
        model.loss_and_gradient(x, labels, false, unused);
        const RVector analytic = model.gradient();
        Rng pick(seed);
        std::uniform_int_distribution<Eigen::Index> dist(0, analytic.size() - 1);
        GradientCheck out;
        for (std::size_t i = 0; i < coords; ++i)
        {
            const Eigen::Index k = dist(pick);
            const double p0 = model.parameters()[k];
            model.parameters()[k] = p0 + h;
            const double lp = model.loss_and_gradient(x, labels, false, unused);
            model.parameters()[k] = p0 - h;
            const double lm = model.loss_and_gradient(x, labels, false, unused);
            model.parameters()[k] = p0;
            const double numeric = (lp - lm) / (2 * h);
            out.max_rel_error = std::max(out.max_rel_error, relative_error(analytic[k], numeric, floor));
            ++out.coordinates;
        }
        return out;
    }

    inline nn::Tensor random_tensor(std::size_t c, std::size_t b, std::size_t side, std::uint64_t seed)
    {
        nn::Tensor t(c, b, side, side);
        Rng rng(seed);
        std::normal_distribution<double> n(0.0, 1.0);
        for (Eigen::Index i = 0; i < t.data.size(); ++i)
            t.data.data()[i] = n(rng);
        return t;
    }
}

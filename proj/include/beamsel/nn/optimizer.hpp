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

#include <string>

#include "beamsel/common.hpp"

namespace beamsel::nn
{
    enum class OptimizerKind
    {
        sgdm,
        adam,
        rmsprop
    };

    std::string to_string(OptimizerKind k);
    OptimizerKind parse_optimizer(const std::string &name);

    struct OptimizerParams
    {
        double momentum = 0.9;        // sgdm
        double beta1 = 0.9;           // adam
        double beta2 = 0.999;         // adam
        double rms_decay = 0.99;      // rmsprop
        double epsilon = 1e-8;        // adam, rmsprop
    };

    /// Owns the per-parameter state of one optimizer run.
    class Optimizer
    {
    public:
        Optimizer(OptimizerKind kind, std::size_t n, OptimizerParams p = {});

        /// sgdm:    v <- m v + g,  p <- p - lr v
        /// adam:    bias-corrected first/second moments
        /// rmsprop: s <- d s + (1 - d) g^2,  p <- p - lr g / (sqrt(s) + eps)
        void step(RVector &params, const RVector &grads, double lr);

        OptimizerKind kind() const { return kind_; }
        std::size_t steps() const { return t_; }

    private:
        OptimizerKind kind_;
        OptimizerParams p_;
        RVector m_, v_;
        std::size_t t_ = 0;
    };
}

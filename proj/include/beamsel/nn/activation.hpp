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

namespace beamsel::nn
{
    enum class ActivationType
    {
        relu,
        leaky_relu,
        swish,
        sigmoid
    };

    struct ActivationKind
    {
        ActivationType type = ActivationType::relu;
        double slope = 0.01; // leaky_relu only, in (0, 1)

        static ActivationKind relu() { return {ActivationType::relu, 0.0}; }
        static ActivationKind leaky_relu(double slope) { return {ActivationType::leaky_relu, slope}; }
        static ActivationKind swish() { return {ActivationType::swish, 0.0}; }
        static ActivationKind sigmoid() { return {ActivationType::sigmoid, 0.0}; }

        void validate() const;
        bool operator==(const ActivationKind &) const = default;
    };

    double sigmoid(double x);

    /// Swish is x * sigmoid(x).
    double activation(const ActivationKind &kind, double x);
    double activation_grad(const ActivationKind &kind, double x);

    std::string to_string(const ActivationKind &kind);
    /// Accepts "relu", "leaky_relu", "leaky_relu:<slope>", "swish", "sigmoid".
    ActivationKind parse_activation(const std::string &name);
}

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

#include "beamsel/nn/activation.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

#include "beamsel/common.hpp"

namespace beamsel::nn
{
    void ActivationKind::validate() const
    {
        if (type == ActivationType::leaky_relu && !(slope > 0.0 && slope < 1.0))
            throw Error(ErrorKind::invalid_argument, "leaky ReLU slope must be in (0, 1)");
    }

    double sigmoid(double x)
    {
        if (x >= 0.0)
            return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
    }

    double activation(const ActivationKind &kind, double x)
    {
        switch (kind.type)
        {
        case ActivationType::relu:
            return x > 0.0 ? x : 0.0;
        case ActivationType::leaky_relu:
            return x > 0.0 ? x : kind.slope * x;
        case ActivationType::swish:
            return x * sigmoid(x);
        case ActivationType::sigmoid:
            return sigmoid(x);
        }
        return x;
    }

    double activation_grad(const ActivationKind &kind, double x)
    {
        switch (kind.type)
        {
        case ActivationType::relu:
            return x > 0.0 ? 1.0 : 0.0;
        case ActivationType::leaky_relu:
            return x > 0.0 ? 1.0 : kind.slope;
        case ActivationType::swish:
        {
            const double s = sigmoid(x);
            return s + x * s * (1.0 - s);
        }
        case ActivationType::sigmoid:
        {
            const double s = sigmoid(x);
            return s * (1.0 - s);
        }
        }
        return 1.0;
    }

    std::string to_string(const ActivationKind &kind)
    {
        switch (kind.type)
        {
        case ActivationType::relu:
            return "relu";
        case ActivationType::leaky_relu:
            return "leaky_relu:" + std::to_string(kind.slope);
        case ActivationType::swish:
            return "swish";
        case ActivationType::sigmoid:
            return "sigmoid";
        }
        return "relu";
    }

    ActivationKind parse_activation(const std::string &raw)
    {
        std::string name;
        for (char c : raw)
            name += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (name == "leakyrelu")
            name = "leaky_relu";
        if (name == "relu")
            return ActivationKind::relu();
        if (name == "swish")
            return ActivationKind::swish();
        if (name == "sigmoid")
            return ActivationKind::sigmoid();
        if (name == "leaky_relu")
            return ActivationKind::leaky_relu(0.01);
        if (name.rfind("leaky_relu:", 0) == 0)
        {
            ActivationKind k;
            try
            {
                k = ActivationKind::leaky_relu(std::stod(name.substr(11)));
            }
            catch (const std::logic_error &)
            {
                throw Error(ErrorKind::invalid_argument, "bad leaky_relu slope in \"" + raw + "\"");
            }
            k.validate();
            return k;
        }
        throw Error(ErrorKind::invalid_argument, "unknown activation \"" + raw + "\"");
    }
}

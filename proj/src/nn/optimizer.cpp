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

#include "beamsel/nn/optimizer.hpp"

#include <cctype>
#include <cmath>

namespace beamsel::nn
{
    std::string to_string(OptimizerKind k)
    {
        switch (k)
        {
        case OptimizerKind::sgdm:
            return "sgdm";
        case OptimizerKind::adam:
            return "adam";
        case OptimizerKind::rmsprop:
            return "rmsprop";
        }
        return "?";
    }

    OptimizerKind parse_optimizer(const std::string &name)
    {
        std::string s;
        for (char c : name)
            s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (s == "sgdm")
            return OptimizerKind::sgdm;
        if (s == "adam")
            return OptimizerKind::adam;
        if (s == "rmsprop")
            return OptimizerKind::rmsprop;
        throw Error(ErrorKind::config, "unknown optimizer '" + name + "'");
    }

    Optimizer::Optimizer(OptimizerKind kind, std::size_t n, OptimizerParams p)
        : kind_(kind), p_(p), m_(RVector::Zero(static_cast<Eigen::Index>(n))), v_(RVector::Zero(static_cast<Eigen::Index>(n)))
    {
    }

    void Optimizer::step(RVector &params, const RVector &grads, double lr)
    {
        if (params.size() != m_.size() || grads.size() != m_.size())
            throw Error(ErrorKind::invalid_argument, "optimizer state size mismatch");
        ++t_;
        switch (kind_)
        {
        case OptimizerKind::sgdm:
            m_ = p_.momentum * m_ + grads;
            params -= lr * m_;
            break;
        case OptimizerKind::adam:
        {
            m_ = p_.beta1 * m_ + (1.0 - p_.beta1) * grads;
            v_ = p_.beta2 * v_ + (1.0 - p_.beta2) * grads.cwiseAbs2();
            const double c1 = 1.0 - std::pow(p_.beta1, static_cast<double>(t_));
            const double c2 = 1.0 - std::pow(p_.beta2, static_cast<double>(t_));
            params.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + p_.epsilon);
            break;
        }
        case OptimizerKind::rmsprop:
            v_ = p_.rms_decay * v_ + (1.0 - p_.rms_decay) * grads.cwiseAbs2();
            params.array() -= lr * grads.array() / (v_.array().sqrt() + p_.epsilon);
            break;
        }
    }
}

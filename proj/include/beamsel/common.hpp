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

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace beamsel
{
    using cplx = std::complex<double>;
    using CMatrix = Eigen::MatrixXcd;
    using CVector = Eigen::VectorXcd;
    using RMatrix = Eigen::MatrixXd;
    using RVector = Eigen::VectorXd;

    // Single engine type for every stochastic step so runs are reproducible from one seed.
    using Rng = std::mt19937_64;

    enum class ErrorKind
    {
        invalid_argument,
        degenerate_channel,
        invalid_selection,
        budget_exceeded,
        component_collapse,
        training_diverged,
        ensemble_failed,
        io,
        config
    };

    const char *to_string(ErrorKind kind);

    class Error : public std::runtime_error
    {
    public:
        Error(ErrorKind kind, const std::string &message)
            : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

        ErrorKind kind() const noexcept { return kind_; }

    private:
        ErrorKind kind_;
    };

    // Derives an independent stream seed from a base seed and a stream index (splitmix64).
    std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);
}

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

#include <array>
#include <vector>

#include "beamsel/common.hpp"

namespace beamsel
{
    /// A point in (aoa, aod, |gain|) space.
    using GmmPoint = std::array<double, 3>;

    struct GmmComponent
    {
        double weight = 1.0;
        std::array<double, 3> mean{};
        std::array<double, 3> sigma{1.0, 1.0, 1.0};
    };

    struct GmmModel
    {
        double amplitude = 0.0;
        std::vector<GmmComponent> components;
        std::vector<double> log_likelihood; // mean log-likelihood after each iteration
        std::size_t iterations = 0;

        /// q = [A; q_1; ...; q_K] with q_k = [w, mu_r, mu_t, mu_a, sigma_r, sigma_t, sigma_a].
        std::vector<double> flattened() const;

        /// Mixture density at x (separable Gaussians).
        double density(const GmmPoint &x) const;
    };

    struct GmmOptions
    {
        std::size_t components = 1;
        double tol = 1e-8;
        std::size_t max_iter = 200;
        std::uint64_t seed = 1;
        // sigma below this value is a collapse; a component gets one re-initialisation before the fit fails
        double collapse_sigma = 1e-6;
        // > 0 clamps sigma from below instead of treating small values as collapse
        double variance_floor = 0.0;
    };

    /// Diagonal-covariance EM. Axes on which the data itself has no spread keep sigma = collapse_sigma.
    GmmModel fit_gmm(const std::vector<GmmPoint> &points, const GmmOptions &opt);
}

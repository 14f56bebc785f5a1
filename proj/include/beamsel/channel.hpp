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
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "beamsel/common.hpp"

namespace beamsel
{
    struct ChannelConfig
    {
        std::size_t n_tx = 16;
        std::size_t n_rx = 8;
        std::size_t n_clusters = 4;
        std::size_t n_rays = 2;
        double wavelength = 1.36;
        double antenna_spacing = 0.68; // lambda / 2
        double tx_power_db_min = 0.0;
        double tx_power_db_max = 30.0;
        std::uint64_t seed = 1;

        std::size_t n_paths() const { return n_clusters * n_rays; }

        // Throws Error(invalid_argument) naming the offending field.
        void validate() const;
    };

    struct PathComponent
    {
        std::size_t cluster_id = 0;
        std::size_t ray_id = 0;
        cplx gain{1.0, 0.0};
        double aod_spatial = 0.0;
        double aoa_spatial = 0.0;
    };

    struct ChannelRealization
    {
        ChannelConfig config;
        std::vector<PathComponent> paths;
        CMatrix spatial;   // n_rx x n_tx
        CMatrix beamspace; // n_rx x n_tx
        double tx_power_db = 0.0;
    };

    /// ULA steering vector; element k is exp(-j 2 pi phi k) / sqrt(n).
    CVector array_response(double phi, std::size_t n);

    /// Unitary n-point DFT codebook. Column i is array_response((i - (n-1)/2) / n, n).
    CMatrix dft_codebook(std::size_t n);

    /// gamma * sum_l sum_u alpha a_r(phi_r) a_t(phi_t)^H with gamma = sqrt(Nr Nt / (Ncl Nray)).
    CMatrix assemble_spatial(const ChannelConfig &cfg, const std::vector<PathComponent> &paths);

    /// H_b = U_r^H H U_t. A path steered at grid angle i lands on beam i.
    CMatrix spatial_to_beamspace(const CMatrix &h);
    CMatrix beamspace_to_spatial(const CMatrix &h_b);

    /// Draws paths (spatial angles uniform, gains CN(0,1)) and the transmit power.
    ChannelRealization generate_realization(const ChannelConfig &cfg, Rng &rng);

    /// Same as above with an engine seeded from cfg.seed.
    ChannelRealization generate_realization(const ChannelConfig &cfg);

    /// Builds a realization from explicit paths (matrices are derived).
    ChannelRealization make_realization(const ChannelConfig &cfg, std::vector<PathComponent> paths, double tx_power_db);

    /// Number of singular values above rel_tol * sigma_max.
    std::size_t numerical_rank(const CMatrix &m, double rel_tol = 1e-8);

    // Binary record "BSMC" (see docs/formats.md) and JSON config sidecar.
    void write_realization(std::ostream &out, const ChannelRealization &r);
    ChannelRealization read_realization(std::istream &in);

    nlohmann::json to_json(const ChannelConfig &cfg);
    ChannelConfig channel_config_from_json(const nlohmann::json &j);
}

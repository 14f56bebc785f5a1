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
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "beamsel/common.hpp"

namespace beamsel
{
    struct SelectionConfig
    {
        std::size_t n_rf_tx = 4;
        std::size_t n_rf_rx = 4;
        // 0 means "auto": the whole side when it has <= 16 beams, else 4 * n_rf.
        std::size_t candidate_pool_tx = 0;
        std::size_t candidate_pool_rx = 0;
        std::uint64_t enumeration_budget = 10'000'000;

        std::size_t n_streams() const { return std::min(n_rf_tx, n_rf_rx); }

        // Resolves automatic pools against concrete dims and checks every invariant.
        SelectionConfig resolved(std::size_t n_tx, std::size_t n_rx) const;
    };

    struct BeamSelection
    {
        std::vector<std::size_t> tx_beams;
        std::vector<std::size_t> rx_beams;

        /// Binary N x N_RF matrix with a single one per column.
        static RMatrix selection_matrix(const std::vector<std::size_t> &beams, std::size_t n);

        RMatrix s_t(std::size_t n_tx) const { return selection_matrix(tx_beams, n_tx); }
        RMatrix s_r(std::size_t n_rx) const { return selection_matrix(rx_beams, n_rx); }
    };

    struct DigitalStage
    {
        CMatrix f_bb; // n_rf_tx x n_streams
        CMatrix w_bb; // n_rf_rx x n_streams
    };

    using DigitalBuilder = std::function<DigitalStage(const CMatrix &, std::size_t)>;

    /// Rows rx_beams and columns tx_beams of h_b, i.e. S_r^H H_b S_t.
    CMatrix selected_channel(const CMatrix &h_b, const BeamSelection &sel);

    /// Equal-power SVD precoder/combiner over the top n_streams singular directions.
    DigitalStage build_digital_stage(const CMatrix &h_sel, std::size_t n_streams);

    /// log2 det(I + rho/(sigma^2 Ns) Rn^-1 W^H S_r^H H_b S_t F F^H S_t^H H_b^H S_r W).
    double spectral_efficiency(const CMatrix &h_b, const BeamSelection &sel, const DigitalStage &dig, double snr_db);

    /// SE of equal-power SVD transmission over n_streams streams of h_sel, sum log2(1 + rho/Ns s_i^2).
    /// Streams beyond the rank of h_sel carry nothing, so rank-deficient selections get a finite value.
    double svd_spectral_efficiency(const CMatrix &h_sel, std::size_t n_streams, double snr_db);

    /// Same quantity assuming Rn = I (valid for distinct beams).
    double spectral_efficiency_identity_noise(const CMatrix &h_b, const BeamSelection &sel, const DigitalStage &dig,
                                              double snr_db);

    /// ||H_b - S_r W_BB F_BB^H S_t^H||_F^2, the selection objective in Frobenius form.
    double frobenius_objective(const CMatrix &h_b, const BeamSelection &sel, const DigitalStage &dig);

    /// Squared column norms of h_b (one per transmit beam).
    RVector tx_beam_energy(const CMatrix &h_b);
    /// Squared row norms of h_b (one per receive beam).
    RVector rx_beam_energy(const CMatrix &h_b);

    /// Indices of the `count` largest energies (ties to lower index), returned ascending.
    std::vector<std::size_t> top_energy_beams(const RVector &energy, std::size_t count);

    struct OracleResult
    {
        BeamSelection selection;
        DigitalStage stage;
        double se = 0.0;
        std::uint64_t combinations = 0;
    };

    std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

    /// Exhaustive search over all (tx, rx) beam combinations drawn from the highest-energy pools.
    /// Returns the SE-maximizing selection; exact ties go to the lexicographically smallest
    /// (tx tuple, rx tuple). Passing a custom builder disables the log-det fast path.
    OracleResult oracle_select(const CMatrix &h_b, const SelectionConfig &cfg, double snr_db,
                               const DigitalBuilder &builder = {});

    BeamSelection greedy_energy_select(const CMatrix &h_b, const SelectionConfig &cfg);

    /// Fully digital benchmark: SVD transmission over every beam with equal power per stream.
    double zf_benchmark(const CMatrix &h_b, double snr_db, std::size_t n_streams);

    /// Picks the `count` beams with the largest score; ties fall back to higher energy, then lower index.
    std::vector<std::size_t> select_by_score(const RVector &score, const RVector &energy, std::size_t count);

    struct SelectionRecord
    {
        std::uint64_t realization_id = 0;
        std::string strategy;
        double snr_db = 0.0;
        std::size_t n_streams = 0;
        BeamSelection selection;
        double se_bits = 0.0;
    };

    void write_selection_csv_header(std::ostream &out);
    void write_selection_csv_row(std::ostream &out, const SelectionRecord &rec);

    nlohmann::json to_json(const SelectionConfig &cfg);
    SelectionConfig selection_config_from_json(const nlohmann::json &j);
}

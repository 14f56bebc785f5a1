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
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "beamsel/beam_select.hpp"
#include "beamsel/channel.hpp"
#include "beamsel/gmm.hpp"

namespace beamsel
{
    /// 4 * Ncl * Nray + 2 per-realization features:
    /// [tx_power_db, ||H||_F, AoDs, AoAs, Re(alpha), Im(alpha)].
    RVector raw_features(const ChannelRealization &r);
    std::size_t raw_feature_count(const ChannelConfig &cfg);

    struct NormalizationStats
    {
        RVector mean;
        RVector range; // max - min; zero marks a constant column
        std::vector<std::size_t> constant_columns;

        /// (x - mean) / range per column; constant columns map to 0.
        RMatrix apply(const RMatrix &features) const;
        RVector apply(const RVector &features) const;

        static NormalizationStats fit(const RMatrix &features);
    };

    /// Per-column (a - mean) / (max - min). Needs at least two rows. Constant columns become zero
    /// and are listed in stats->constant_columns.
    RMatrix normalize(const RMatrix &features, NormalizationStats *stats = nullptr);

    /// The (aoa, aod, |gain|) triple of every path.
    std::vector<GmmPoint> gmm_points(const ChannelRealization &r);

    struct LabeledSample
    {
        RVector base;             // realization features (raw until the dataset is normalized)
        double beam_index = 0.0;  // b / (N - 1)
        double energy_fraction = 0.0;
        std::size_t beam = 0;
        std::uint8_t label = 0;   // 0 = unassigned, k = RF chain k
        std::uint64_t realization_id = 0;

        RVector features() const;
    };

    struct RealizationLabels
    {
        std::vector<LabeledSample> tx;
        std::vector<LabeledSample> rx;
        OracleResult oracle;
    };

    /// Runs the oracle and labels every candidate beam on both sides with its 1-based RF chain
    /// (position in the oracle's ascending beam tuple), or 0 when unselected.
    RealizationLabels label_realization(const ChannelRealization &r, const SelectionConfig &cfg, double snr_db,
                                        std::uint64_t realization_id = 0);

    /// Beam descriptor (normalized index, energy fraction) for every beam on one side.
    std::vector<std::pair<double, double>> beam_descriptors(const RVector &energy);

    struct Dataset
    {
        std::size_t class_count = 0;
        RMatrix features; // one row per sample
        std::vector<std::uint8_t> labels;
        std::vector<std::uint64_t> realization_ids;

        std::size_t size() const { return labels.size(); }
        std::size_t feature_count() const { return static_cast<std::size_t>(features.cols()); }

        Dataset subset(const std::vector<std::size_t> &rows) const;
        std::vector<std::size_t> class_histogram() const;
    };

    /// Groups rows by realization, shuffles realizations with the seed and puts the first
    /// floor(R * fraction) (clamped to [1, R - 1]) of them in the training set.
    std::pair<Dataset, Dataset> split_dataset(const Dataset &d, double train_fraction, std::uint64_t seed);

    // "BSDS" binary stream (docs/formats.md); CSV mirrors the same columns.
    void write_dataset(std::ostream &out, const Dataset &d);
    Dataset read_dataset(std::istream &in);
    void write_dataset_csv(std::ostream &out, const Dataset &d);

    void save_dataset(const std::string &path, const Dataset &d);
    Dataset load_dataset(const std::string &path);

    struct DatasetBuildOptions
    {
        ChannelConfig channel;
        SelectionConfig selection;
        std::size_t n_realizations = 1000;
        double label_snr_db = 10.0;
        bool append_gmm = false;
        std::size_t gmm_components = 0; // 0 -> n_clusters
        std::uint64_t seed = 1;
    };

    struct DatasetBundle
    {
        Dataset tx;
        Dataset rx;
        NormalizationStats stats;
        std::vector<std::vector<double>> gmm; // q per realization
    };

    /// Realization i is drawn from derive_seed(seed, i), so the output does not depend on scheduling.
    DatasetBundle build_datasets(const DatasetBuildOptions &opt);

    /// Base feature vector for one realization as the dataset stores it before normalization.
    RVector realization_base_features(const ChannelRealization &r, bool append_gmm, std::size_t gmm_components,
                                      std::uint64_t seed);

    struct BeamRows
    {
        std::vector<std::size_t> beams; // candidate pool, ascending beam index
        RMatrix features;               // one row per candidate beam
    };

    /// Classifier inputs for the candidate beams on one side of a realization, laid out like the
    /// rows build_datasets emits. normalized_base is the realization's base features after the
    /// training normalization.
    BeamRows beam_feature_rows(const ChannelRealization &r, const SelectionConfig &cfg, bool tx_side,
                               const RVector &normalized_base);

    nlohmann::json to_json(const NormalizationStats &s);
    NormalizationStats normalization_from_json(const nlohmann::json &j);
}

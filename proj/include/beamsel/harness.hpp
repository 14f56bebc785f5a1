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
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "beamsel/baselines.hpp"
#include "beamsel/beam_select.hpp"
#include "beamsel/channel.hpp"
#include "beamsel/dataset.hpp"
#include "beamsel/ensemble.hpp"
#include "beamsel/image.hpp"
#include "beamsel/nn/network.hpp"
#include "beamsel/nn/trainer.hpp"

namespace beamsel::harness
{
    inline constexpr int schema_version = 1;

    /// Strategy names accepted in configs and on the command line.
    const std::vector<std::string> &known_strategies();
    bool is_learned(const std::string &strategy);

    struct DatasetSection
    {
        std::size_t n_realizations = 1000;
        double train_fraction = 0.7;
        double label_snr_db = 10.0;
        bool append_gmm = false;
        std::size_t gmm_components = 0;
        std::size_t image_side = 32;
        Embedding embedding = Embedding::outer_product;
    };

    struct EvalSection
    {
        std::size_t n_realizations = 200;
        std::vector<double> snr_grid{0, 5, 10, 15, 20, 25, 30};
        std::vector<std::size_t> ns_grid{4, 5, 6, 7, 8};
        double ns_sweep_snr_db = 10.0;
    };

    /// Every seed is derived from `seed` unless a section override is present.
    struct Seeds
    {
        std::uint64_t dataset = 0;
        std::uint64_t split = 0;
        std::uint64_t init = 0;
        std::uint64_t train = 0;
        std::uint64_t ensemble = 0;
        std::uint64_t baselines = 0;
        std::uint64_t eval = 0;
    };

    struct ExperimentConfig
    {
        std::uint64_t seed = 1;
        ChannelConfig channel;
        SelectionConfig selection;
        DatasetSection dataset;
        nn::NetworkSpec net;
        nn::TrainConfig train;
        EnsembleConfig ensemble;
        SvmConfig svm;
        std::size_t knn_k = 5;
        std::vector<std::size_t> mlp_hidden{64, 32};
        EvalSection eval;
        std::vector<std::string> strategies{"zf", "oracle", "greedy", "cnn", "ensemble", "knn", "svm", "mlp"};
        std::vector<nn::ActivationKind> matrix_activations{nn::ActivationKind::relu(), nn::ActivationKind::swish()};
        std::vector<nn::OptimizerKind> matrix_optimizers{nn::OptimizerKind::sgdm, nn::OptimizerKind::adam,
                                                         nn::OptimizerKind::rmsprop};
        std::optional<std::uint64_t> dataset_seed; // explicit overrides, dropped by with_seed()
        std::optional<std::uint64_t> eval_seed;

        Seeds seeds() const;
        /// Replaces the experiment seed and clears the section overrides.
        ExperimentConfig with_seed(std::uint64_t s) const;
        /// Throws Error(config) naming the offending field.
        void validate() const;
    };

    nlohmann::json to_json(const ExperimentConfig &c);

    /// Parses and validates. Diagnostics read "<source>:<line>: <field>: <reason>".
    ExperimentConfig parse_config(const std::string &text, const std::string &source = "<config>");
    ExperimentConfig load_config(const std::string &path);

    struct ResultRow
    {
        std::string strategy;
        std::string sweep_variable; // "snr_db" or "n_streams"
        double value = 0.0;
        double mean_se = 0.0;
        double std_se = 0.0;
        std::optional<double> accuracy; // mean beam overlap with the oracle; empty for zf
        std::size_t n_realizations = 0;
        std::uint64_t seed = 0;
    };

    void write_result_csv(std::ostream &out, const std::vector<ResultRow> &rows);
    std::vector<ResultRow> read_result_csv(std::istream &in);

    struct AccuracyRow
    {
        std::string strategy;
        std::string side;
        std::string activation; // empty for non-network strategies
        std::string optimizer;
        double accuracy = 0.0;
        double balanced_accuracy = 0.0;
        std::size_t n_samples = 0;
        std::uint64_t seed = 0;
    };

    void write_accuracy_csv(std::ostream &out, const std::vector<AccuracyRow> &rows);
    std::vector<AccuracyRow> read_accuracy_csv(std::istream &in);

    struct RunOptions
    {
        std::string out_dir;
        std::vector<std::string> strategies;            // empty = config list
        std::vector<nn::ActivationKind> activations;    // empty = config net activation
        std::vector<nn::OptimizerKind> optimizers;      // empty = config train optimizer
        std::size_t jobs = 1;
        std::ostream *log = nullptr;                    // progress output, may be null
    };

    /// Output root: explicit value, else $BEAMSEL_OUT, else "beamsel_out".
    std::string resolve_out_dir(const std::string &explicit_dir);

    struct GenDataSummary
    {
        std::size_t tx_samples = 0;
        std::size_t rx_samples = 0;
        std::vector<std::size_t> tx_histogram;
        std::vector<std::size_t> rx_histogram;
    };

    /// Writes data/dataset_{tx,rx}.bsds, data/dataset.json and data/gmm.csv.
    GenDataSummary cmd_gen_data(const ExperimentConfig &cfg, const RunOptions &opt);

    /// Trains the requested learned strategies on both sides. For cnn every activation x optimizer
    /// pair is trained on the tx side; the config's own pair is also trained on the rx side.
    std::vector<AccuracyRow> cmd_train(const ExperimentConfig &cfg, const RunOptions &opt);

    /// SNR and stream sweeps over fresh realizations; writes results/results.csv,
    /// results/accuracy.csv and the SVG plots.
    std::vector<ResultRow> cmd_evaluate(const ExperimentConfig &cfg, const RunOptions &opt);

    /// Aggregates run directories (one per seed) into out_dir/report.md plus mean-curve plots;
    /// returns the markdown.
    std::string cmd_report(const std::vector<std::string> &run_dirs, const std::string &out_dir);

    /// Quick built-in checks; returns the number of failures and prints one line per check.
    int cmd_selftest(std::ostream &out);

    /// File stem used for a network checkpoint, e.g. "cnn_swish_adam".
    std::string model_stem(const std::string &strategy, const nn::ActivationKind &act, nn::OptimizerKind opt);
}

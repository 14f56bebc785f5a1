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
#include <vector>

#include <json.hpp>

#include "beamsel/nn/network.hpp"
#include "beamsel/nn/trainer.hpp"

namespace beamsel
{
    enum class EnsembleMetric
    {
        zero_one, // plain misclassification rate
        balanced  // 1 - mean per-class recall
    };

    struct EnsembleConfig
    {
        std::size_t m1 = 5;
        double subset_fraction = 0.6;
        std::vector<double> weight_grid{0.25, 0.5, 0.75, 1.0};
        double fit_fraction = 0.2;     // held out from every weak-learner subset, used to pick c_m
        double tolerance = 0.005;      // a learner whose best c worsens E by more than this gets c = 0
        EnsembleMetric metric = EnsembleMetric::zero_one;
        std::size_t learner_epochs = 0; // 0 keeps the train config's max_epochs
        std::uint64_t seed = 1;

        void validate() const;
    };

    nlohmann::json to_json(const EnsembleConfig &c);
    EnsembleConfig ensemble_config_from_json(const nlohmann::json &j);

    struct LearnerRecord
    {
        std::size_t index = 0;
        bool skipped = false;         // training diverged
        std::string note;
        double weight = 0.0;
        double fit_error_before = 0.0; // E(Phi_{m-1}) on the fit slice
        double fit_error_after = 0.0;  // E(Phi_m)
        std::size_t train_rows = 0;
        std::size_t misclassified_rows = 0;
        std::uint64_t init_seed = 0;
        std::uint64_t train_seed = 0;
    };

    struct EnsembleModel
    {
        std::vector<nn::ClassifierModel> learners;
        RVector weights;
        std::vector<LearnerRecord> trace;
        EnsembleConfig config;

        std::size_t n_classes() const { return learners.empty() ? 0 : learners.front().spec().n_classes; }
    };

    /// argmax over classes of sum_m weights[m] * [votes[m] == class], lowest class on ties.
    std::size_t weighted_vote(const std::vector<std::size_t> &votes, const RVector &weights, std::size_t n_classes);

    /// Vote mass per class for one sample.
    RVector vote_mass(const std::vector<std::size_t> &votes, const RVector &weights, std::size_t n_classes);

    /// Greedy stagewise boosting: learner m trains on a random subset of the training pool joined
    /// with the pool rows the current ensemble gets wrong; c_m is picked from the weight grid on
    /// the held-out fit slice.
    EnsembleModel train_ensemble(const nn::SampleSource &train_set, const nn::SampleSource *val_set,
                                 const EnsembleConfig &cfg, const nn::NetworkSpec &spec, const nn::TrainConfig &train_cfg);

    /// Per-learner argmax predictions, one vector per learner.
    std::vector<std::vector<std::size_t>> learner_votes(EnsembleModel &ens, const nn::SampleSource &set);
    std::vector<std::size_t> combine_votes(const std::vector<std::vector<std::size_t>> &votes, const RVector &weights,
                                           std::size_t n_classes);

    std::vector<std::size_t> predict(EnsembleModel &ens, const nn::SampleSource &set);
    std::size_t predict_one(EnsembleModel &ens, const nn::SampleSource &set, std::size_t row);

    double ensemble_error(EnsembleModel &ens, const nn::SampleSource &set);
    double ensemble_error(const std::vector<std::size_t> &pred, const std::vector<std::uint8_t> &labels,
                          std::size_t n_classes, EnsembleMetric metric);

    // "BSEN" container: JSON manifest followed by the learners' BSNN checkpoints.
    void write_ensemble(std::ostream &out, const EnsembleModel &ens);
    EnsembleModel read_ensemble(std::istream &in);
    void save_ensemble(const std::string &path, const EnsembleModel &ens);
    EnsembleModel load_ensemble(const std::string &path);
}

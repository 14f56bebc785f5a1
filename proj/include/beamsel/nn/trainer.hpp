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
#include <vector>

#include <json.hpp>

#include "beamsel/dataset.hpp"
#include "beamsel/image.hpp"
#include "beamsel/nn/network.hpp"
#include "beamsel/nn/optimizer.hpp"

namespace beamsel::nn
{
    /// Indexable labelled inputs that can be stacked into a batch tensor.
    class SampleSource
    {
    public:
        virtual ~SampleSource() = default;
        virtual std::size_t size() const = 0;
        virtual std::uint8_t label(std::size_t i) const = 0;
        virtual Tensor batch(const std::vector<std::size_t> &index) const = 0;

        std::vector<std::uint8_t> labels(const std::vector<std::size_t> &index) const;
    };

    /// Flat feature rows, for the mlp kind.
    class FeatureSource final : public SampleSource
    {
    public:
        explicit FeatureSource(const Dataset &d) : d_(&d) {}
        std::size_t size() const override { return d_->size(); }
        std::uint8_t label(std::size_t i) const override { return d_->labels[i]; }
        Tensor batch(const std::vector<std::size_t> &index) const override;

    private:
        const Dataset *d_;
    };

    /// Feature rows expanded to side x side images once, up front.
    class ImageSource final : public SampleSource
    {
    public:
        ImageSource(const Dataset &d, std::size_t side, Embedding embedding = Embedding::outer_product);
        std::size_t size() const override { return labels_.size(); }
        std::uint8_t label(std::size_t i) const override { return labels_[i]; }
        Tensor batch(const std::vector<std::size_t> &index) const override;

        std::size_t side() const { return side_; }

    private:
        std::size_t side_;
        RowMatrix plane0_; // one row per sample, channel 0 only (channels 1, 2 are zero)
        std::vector<std::uint8_t> labels_;
    };

    /// Restricts another source to a list of rows.
    class SubsetSource final : public SampleSource
    {
    public:
        SubsetSource(const SampleSource &base, std::vector<std::size_t> rows) : base_(&base), rows_(std::move(rows)) {}
        std::size_t size() const override { return rows_.size(); }
        std::uint8_t label(std::size_t i) const override { return base_->label(rows_[i]); }
        Tensor batch(const std::vector<std::size_t> &index) const override;

    private:
        const SampleSource *base_;
        std::vector<std::size_t> rows_;
    };

    struct TrainConfig
    {
        std::size_t max_epochs = 6;
        std::size_t minibatch = 128;
        double initial_lr = 1e-3;
        std::size_t validation_frequency = 3; // iterations
        std::size_t validation_subset = 512;  // periodic checks use this many fixed rows; 0 = all
        bool shuffle = true;
        bool balance_classes = false;         // weight each class by n / (K * n_k) in the loss
        OptimizerKind optimizer = OptimizerKind::adam;
        std::uint64_t seed = 1;

        void validate() const;
    };

    nlohmann::json to_json(const TrainConfig &c);
    TrainConfig train_config_from_json(const nlohmann::json &j);

    struct EvalSummary
    {
        double loss = 0.0;
        double accuracy = 0.0;
        double balanced_accuracy = 0.0;
    };

    /// Minibatch training with per-epoch shuffling. Appends to model.training_log; after the last
    /// epoch a full-validation record is logged. A non-finite loss throws training_diverged with
    /// the log kept up to that point.
    void train(ClassifierModel &model, const SampleSource &train_set, const SampleSource *val_set, const TrainConfig &cfg);

    /// Argmax class per sample (ties to the lower index), eval mode.
    std::vector<std::size_t> predict_classes(ClassifierModel &model, const SampleSource &set, std::size_t batch = 256);
    RMatrix predict_probabilities(ClassifierModel &model, const SampleSource &set, std::size_t batch = 256);

    double evaluate_accuracy(ClassifierModel &model, const SampleSource &set);
    EvalSummary evaluate(ClassifierModel &model, const SampleSource &set);

    /// n / (K * n_k) for every class present, 0 for absent classes.
    RVector balanced_class_weights(const SampleSource &set, std::size_t n_classes);

    double accuracy(const std::vector<std::size_t> &pred, const std::vector<std::uint8_t> &labels);
    /// Mean per-class recall over the classes present in labels.
    double balanced_accuracy(const std::vector<std::size_t> &pred, const std::vector<std::uint8_t> &labels,
                             std::size_t n_classes);
    std::vector<std::uint8_t> all_labels(const SampleSource &set);
}

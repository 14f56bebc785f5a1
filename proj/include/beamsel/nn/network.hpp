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
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "beamsel/common.hpp"
#include "beamsel/image.hpp"
#include "beamsel/nn/activation.hpp"
#include "beamsel/nn/layers.hpp"
#include "beamsel/nn/tensor.hpp"

namespace beamsel::nn
{
    enum class NetworkKind
    {
        inception, // image classifier
        mlp        // dense classifier on flat feature vectors
    };

    enum class HeadKind
    {
        global_average,
        flatten
    };

    struct ConvSpec
    {
        std::size_t out_channels = 8;
        std::size_t kernel = 3;
        std::size_t stride = 1;
        bool operator==(const ConvSpec &) const = default;
    };

    /// Inception kind: stem conv -> act -> 2x2 maxpool -> inception blocks (2x2 maxpool between
    /// consecutive blocks) -> head -> dropout -> linear.
    /// Mlp kind: [linear -> act] per hidden width -> dropout -> linear.
    struct NetworkSpec
    {
        NetworkKind kind = NetworkKind::inception;
        std::size_t input_side = 32;
        std::size_t input_channels = 3;
        ConvSpec stem;
        std::vector<InceptionWidths> inception_blocks{{4, 4, 4, 4, 4, 2}, {8, 8, 8, 8, 8, 4}};
        HeadKind head = HeadKind::global_average;
        std::size_t input_features = 0;    // mlp only
        std::vector<std::size_t> hidden{}; // mlp only
        double dropout_rate = 0.4;
        std::size_t n_classes = 5;
        ActivationKind activation = ActivationKind::swish();

        void validate() const;
        Shape input_shape() const;
        bool operator==(const NetworkSpec &) const = default;

        static NetworkSpec mlp(std::size_t features, std::vector<std::size_t> hidden, std::size_t classes,
                               ActivationKind act = ActivationKind::relu(), double dropout = 0.0);
    };

    /// Parameter count derived from the spec alone, without building layers.
    std::size_t analytic_parameter_count(const NetworkSpec &spec);

    nlohmann::json to_json(const NetworkSpec &spec);
    NetworkSpec network_spec_from_json(const nlohmann::json &j);

    /// Row-wise softmax of a B x K logit matrix.
    RMatrix softmax_rows(const RMatrix &logits);

    /// Index of the row maximum, lowest index on ties.
    std::size_t argmax_row(const RMatrix &m, Eigen::Index row);

    struct TrainingRecord
    {
        std::size_t iteration = 0;
        std::size_t epoch = 0;
        std::string phase; // "train" or "validation"
        double loss = 0.0;
        double accuracy = 0.0;
    };

    void write_training_log(std::ostream &out, const std::vector<TrainingRecord> &log);

    class ClassifierModel
    {
    public:
        ClassifierModel(const NetworkSpec &spec, std::uint64_t seed);
        ClassifierModel(const ClassifierModel &other);
        ClassifierModel &operator=(const ClassifierModel &other);
        ClassifierModel(ClassifierModel &&) noexcept = default;
        ClassifierModel &operator=(ClassifierModel &&) noexcept = default;

        const NetworkSpec &spec() const { return spec_; }
        std::size_t parameter_count() const { return static_cast<std::size_t>(params_.size()); }

        RVector &parameters() { return params_; }
        const RVector &parameters() const { return params_; }
        const RVector &gradient() const { return grads_; }

        /// B x n_classes logits.
        RMatrix logits(const Tensor &x, bool train, Rng &rng);
        /// B x n_classes class probabilities. Eval mode (train = false) is deterministic.
        RMatrix forward(const Tensor &x, bool train, Rng &rng);
        RMatrix predict_proba(const Tensor &x);
        /// Eval-mode logits without keeping anything for a backward pass.
        RMatrix infer_logits(const Tensor &x);

        /// Mean cross-entropy of the batch; overwrites gradient() with its gradient. A non-finite
        /// loss raises training_diverged. Optional class_weights scale each sample's term by the
        /// weight of its label.
        double loss_and_gradient(const Tensor &x, const std::vector<std::uint8_t> &labels, bool train, Rng &rng,
                                 const RVector *class_weights = nullptr);
        /// Logits of the batch seen by the last loss_and_gradient call.
        const RMatrix &last_logits() const { return last_logits_; }

        /// Final linear layer to zero, so every output row is uniform.
        void zero_final_layer();

        /// When set, only the final linear layer receives gradient (fine-tuning a loaded model).
        void freeze_all_but_head(bool on) { head_only_ = on; }
        bool head_only() const { return head_only_; }
        std::size_t head_parameter_count() const;

        std::vector<TrainingRecord> training_log;

    private:
        void build();
        RMatrix run(const Tensor &x, bool train, Rng &rng, bool cache);

        NetworkSpec spec_;
        RVector params_;
        RVector grads_;
        std::vector<std::unique_ptr<Layer>> layers_;
        bool head_only_ = false;
        RMatrix last_logits_;
    };

    /// Stacks images into a batch tensor.
    Tensor images_to_tensor(const std::vector<const ImageTensor *> &images);
    /// Stacks feature rows (one per sample) into a batch tensor of width 1.
    Tensor rows_to_tensor(const RMatrix &rows, const std::vector<std::size_t> &index);

    // "BSNN" checkpoint (docs/formats.md).
    void write_model(std::ostream &out, const ClassifierModel &m);
    ClassifierModel read_model(std::istream &in);
    void save_model(const std::string &path, const ClassifierModel &m);
    ClassifierModel load_model(const std::string &path);

    nlohmann::json to_json(const InceptionWidths &w);
    std::string to_string(HeadKind h);
}

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

#include "beamsel/dataset.hpp"
#include "beamsel/nn/network.hpp"
#include "beamsel/nn/trainer.hpp"

// Reference classifiers on the flat LabeledSample features.
namespace beamsel
{
    struct KnnModel
    {
        std::size_t k = 5;
        std::size_t n_classes = 0;
        RMatrix features; // one row per stored training sample
        std::vector<std::uint8_t> labels;
    };

    KnnModel knn_fit(const Dataset &train, std::size_t k = 5);
    /// Majority label among the k nearest rows (Euclidean). Equal distances go to the lower
    /// training index, equal counts to the lower class.
    std::size_t knn_predict(const KnnModel &m, const RVector &sample);
    /// Per-class neighbour fraction, one row per query.
    RMatrix knn_scores(const KnnModel &m, const RMatrix &queries);
    std::vector<std::size_t> knn_predict(const KnnModel &m, const RMatrix &queries);

    struct SvmConfig
    {
        double lambda = 1e-3;
        std::size_t epochs = 30;
        std::size_t minibatch = 64;
        double initial_lr = 0.1; // step lr / sqrt(t)
        bool balance_classes = false;
        std::uint64_t seed = 1;
    };

    struct LinearSvmModel
    {
        RMatrix weights; // n_classes x features
        RVector bias;
        double lambda = 1e-3;
        std::vector<std::uint8_t> present; // classes seen in training; absent ones are never predicted
    };

    /// One-vs-rest, lambda/2 |w|^2 + mean hinge per class, minibatch subgradient descent.
    LinearSvmModel svm_train(const Dataset &train, std::size_t n_classes, const SvmConfig &cfg = {});
    /// Decision values, one row per query; absent classes hold -infinity.
    RMatrix svm_scores(const LinearSvmModel &m, const RMatrix &queries);
    std::size_t svm_predict(const LinearSvmModel &m, const RVector &sample);
    std::vector<std::size_t> svm_predict(const LinearSvmModel &m, const RMatrix &queries);

    struct MlpConfig
    {
        std::vector<std::size_t> hidden{64, 32};
        nn::TrainConfig train;
        std::uint64_t init_seed = 1;
    };

    nn::ClassifierModel mlp_train(const Dataset &train, const Dataset *val, std::size_t n_classes, const MlpConfig &cfg = {});
    std::vector<std::size_t> mlp_predict(nn::ClassifierModel &m, const RMatrix &queries);
    RMatrix mlp_scores(nn::ClassifierModel &m, const RMatrix &queries);

    // "BSBL" container: magic, version, type tag ("knn" | "svm" | "mlp"), then the model.
    void write_baseline(std::ostream &out, const KnnModel &m);
    void write_baseline(std::ostream &out, const LinearSvmModel &m);
    void write_baseline(std::ostream &out, const nn::ClassifierModel &m);
    /// Type tag of the next container in the stream, without consuming it.
    std::string peek_baseline_tag(std::istream &in);
    KnnModel read_knn(std::istream &in);
    LinearSvmModel read_svm(std::istream &in);
    nn::ClassifierModel read_mlp(std::istream &in);

    template <typename Model>
    void save_baseline(const std::string &path, const Model &m);
    std::string baseline_tag(const std::string &path);
    KnnModel load_knn(const std::string &path);
    LinearSvmModel load_svm(const std::string &path);
    nn::ClassifierModel load_mlp(const std::string &path);
}

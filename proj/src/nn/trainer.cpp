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

#include "beamsel/nn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace beamsel::nn
{
    namespace
    {
        using Index = Eigen::Index;

        std::vector<std::size_t> iota(std::size_t n)
        {
            std::vector<std::size_t> v(n);
            std::iota(v.begin(), v.end(), std::size_t{0});
            return v;
        }

        double batch_accuracy(const RMatrix &logits, const std::vector<std::uint8_t> &labels)
        {
            std::size_t hit = 0;
            for (Index b = 0; b < logits.rows(); ++b)
                hit += argmax_row(logits, b) == labels[static_cast<std::size_t>(b)];
            return static_cast<double>(hit) / static_cast<double>(labels.size());
        }

        struct Pass
        {
            RMatrix proba;
            double loss = 0.0;
        };

        Pass eval_pass(ClassifierModel &model, const SampleSource &set, std::size_t batch, bool with_loss)
        {
            Pass out;
            out.proba.resize(static_cast<Index>(set.size()), static_cast<Index>(model.spec().n_classes));
            for (std::size_t start = 0; start < set.size(); start += batch)
            {
                const std::size_t n = std::min(batch, set.size() - start);
                std::vector<std::size_t> idx(n);
                std::iota(idx.begin(), idx.end(), start);
                const RMatrix z = model.infer_logits(set.batch(idx));
                out.proba.middleRows(static_cast<Index>(start), static_cast<Index>(n)) = softmax_rows(z);
                if (!with_loss)
                    continue;
                for (std::size_t b = 0; b < n; ++b)
                {
                    const auto r = static_cast<Index>(b);
                    const double m = z.row(r).maxCoeff();
                    out.loss += m + std::log((z.row(r).array() - m).exp().sum()) - z(r, set.label(start + b));
                }
            }
            out.loss /= static_cast<double>(set.size());
            return out;
        }

        std::vector<std::size_t> argmax_all(const RMatrix &p)
        {
            std::vector<std::size_t> out(static_cast<std::size_t>(p.rows()));
            for (Index r = 0; r < p.rows(); ++r)
                out[static_cast<std::size_t>(r)] = argmax_row(p, r);
            return out;
        }
    }

    std::vector<std::uint8_t> SampleSource::labels(const std::vector<std::size_t> &index) const
    {
        std::vector<std::uint8_t> out(index.size());
        for (std::size_t i = 0; i < index.size(); ++i)
            out[i] = label(index[i]);
        return out;
    }

    Tensor FeatureSource::batch(const std::vector<std::size_t> &index) const
    {
        return rows_to_tensor(d_->features, index);
    }

    ImageSource::ImageSource(const Dataset &d, std::size_t side, Embedding embedding)
        : side_(side), plane0_(static_cast<Index>(d.size()), static_cast<Index>(side * side)), labels_(d.labels)
    {
        for (std::size_t i = 0; i < d.size(); ++i)
        {
            const ImageTensor img = expand_to_image(d.features.row(static_cast<Index>(i)).transpose(), side, i, embedding);
            std::copy_n(img.data.data(), side * side, plane0_.data() + i * side * side);
        }
    }

    Tensor ImageSource::batch(const std::vector<std::size_t> &index) const
    {
        const std::size_t plane = side_ * side_;
        Tensor t(ImageTensor::channels, index.size(), side_, side_);
        for (std::size_t b = 0; b < index.size(); ++b)
            std::copy_n(plane0_.data() + index[b] * plane, plane, t.data.data() + b * plane);
        return t;
    }

    Tensor SubsetSource::batch(const std::vector<std::size_t> &index) const
    {
        std::vector<std::size_t> mapped(index.size());
        for (std::size_t i = 0; i < index.size(); ++i)
            mapped[i] = rows_[index[i]];
        return base_->batch(mapped);
    }

    void TrainConfig::validate() const
    {
        if (max_epochs == 0 || minibatch == 0 || validation_frequency == 0)
            throw Error(ErrorKind::config, "training counts must be >= 1");
        if (!(initial_lr > 0.0) || !std::isfinite(initial_lr))
            throw Error(ErrorKind::config, "initial_lr must be > 0");
    }

    nlohmann::json to_json(const TrainConfig &c)
    {
        return {{"max_epochs", c.max_epochs},
                {"minibatch", c.minibatch},
                {"initial_lr", c.initial_lr},
                {"validation_frequency", c.validation_frequency},
                {"validation_subset", c.validation_subset},
                {"shuffle", c.shuffle},
                {"balance_classes", c.balance_classes},
                {"optimizer", to_string(c.optimizer)},
                {"seed", c.seed}};
    }

    TrainConfig train_config_from_json(const nlohmann::json &j)
    {
        TrainConfig c;
        try
        {
            c.max_epochs = j.value("max_epochs", c.max_epochs);
            c.minibatch = j.value("minibatch", c.minibatch);
            c.initial_lr = j.value("initial_lr", c.initial_lr);
            c.validation_frequency = j.value("validation_frequency", c.validation_frequency);
            c.validation_subset = j.value("validation_subset", c.validation_subset);
            c.shuffle = j.value("shuffle", c.shuffle);
            c.balance_classes = j.value("balance_classes", c.balance_classes);
            if (j.contains("optimizer"))
                c.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
            c.seed = j.value("seed", c.seed);
        }
        catch (const nlohmann::json::exception &e)
        {
            throw Error(ErrorKind::config, std::string("train config: ") + e.what());
        }
        c.validate();
        return c;
    }

    void train(ClassifierModel &model, const SampleSource &train_set, const SampleSource *val_set, const TrainConfig &cfg)
    {
        cfg.validate();
        if (train_set.size() == 0 || (val_set && val_set->size() == 0))
            throw Error(ErrorKind::invalid_argument, "training and validation sets must be nonempty");

        Rng rng(cfg.seed);
        Optimizer opt(cfg.optimizer, model.parameter_count());
        RVector weights;
        if (cfg.balance_classes)
            weights = balanced_class_weights(train_set, model.spec().n_classes);

        std::unique_ptr<SubsetSource> val_probe;
        if (val_set)
        {
            std::vector<std::size_t> rows = iota(val_set->size());
            if (cfg.validation_subset > 0 && cfg.validation_subset < rows.size())
            {
                Rng pick(derive_seed(cfg.seed, 0x76616cULL));
                std::shuffle(rows.begin(), rows.end(), pick);
                rows.resize(cfg.validation_subset);
                std::sort(rows.begin(), rows.end());
            }
            val_probe = std::make_unique<SubsetSource>(*val_set, std::move(rows));
        }

        std::vector<std::size_t> order = iota(train_set.size());
        std::size_t iteration = 0;
        for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch)
        {
            if (cfg.shuffle)
                std::shuffle(order.begin(), order.end(), rng);
            for (std::size_t start = 0; start < order.size(); start += cfg.minibatch)
            {
                const std::size_t n = std::min(cfg.minibatch, order.size() - start);
                const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                                   order.begin() + static_cast<std::ptrdiff_t>(start + n));
                const auto labels = train_set.labels(idx);
                ++iteration;
                double loss = 0.0;
                try
                {
                    loss = model.loss_and_gradient(train_set.batch(idx), labels, true, rng, cfg.balance_classes ? &weights : nullptr);
                }
                catch (const Error &e)
                {
                    if (e.kind() == ErrorKind::training_diverged)
                        model.training_log.push_back({iteration, epoch, "train", std::nan(""), 0.0});
                    throw;
                }
                model.training_log.push_back({iteration, epoch, "train", loss, batch_accuracy(model.last_logits(), labels)});
                opt.step(model.parameters(), model.gradient(), cfg.initial_lr);
                if (!model.parameters().allFinite())
                    throw Error(ErrorKind::training_diverged, "non-finite parameters after step " + std::to_string(iteration));

                if (val_probe && iteration % cfg.validation_frequency == 0)
                {
                    const Pass p = eval_pass(model, *val_probe, 256, true);
                    model.training_log.push_back(
                        {iteration, epoch, "validation", p.loss, accuracy(argmax_all(p.proba), all_labels(*val_probe))});
                }
            }
        }
        if (val_set)
        {
            const EvalSummary s = evaluate(model, *val_set);
            model.training_log.push_back({iteration, cfg.max_epochs, "validation_final", s.loss, s.accuracy});
        }
    }

    RMatrix predict_probabilities(ClassifierModel &model, const SampleSource &set, std::size_t batch)
    {
        if (set.size() == 0)
            throw Error(ErrorKind::invalid_argument, "empty sample set");
        return eval_pass(model, set, batch, false).proba;
    }

    std::vector<std::size_t> predict_classes(ClassifierModel &model, const SampleSource &set, std::size_t batch)
    {
        return argmax_all(predict_probabilities(model, set, batch));
    }

    std::vector<std::uint8_t> all_labels(const SampleSource &set)
    {
        return set.labels(iota(set.size()));
    }

    RVector balanced_class_weights(const SampleSource &set, std::size_t n_classes)
    {
        std::vector<std::size_t> count(n_classes, 0);
        for (std::size_t i = 0; i < set.size(); ++i)
        {
            if (set.label(i) >= n_classes)
                throw Error(ErrorKind::invalid_argument, "label out of range");
            ++count[set.label(i)];
        }
        const auto present = static_cast<double>(std::count_if(count.begin(), count.end(), [](std::size_t c) { return c > 0; }));
        RVector w = RVector::Zero(static_cast<Eigen::Index>(n_classes));
        for (std::size_t k = 0; k < n_classes; ++k)
            if (count[k] > 0)
                w[static_cast<Eigen::Index>(k)] = static_cast<double>(set.size()) / (present * static_cast<double>(count[k]));
        return w;
    }

    double accuracy(const std::vector<std::size_t> &pred, const std::vector<std::uint8_t> &labels)
    {
        if (pred.size() != labels.size() || pred.empty())
            throw Error(ErrorKind::invalid_argument, "prediction and label counts differ or are zero");
        std::size_t hit = 0;
        for (std::size_t i = 0; i < pred.size(); ++i)
            hit += pred[i] == labels[i];
        return static_cast<double>(hit) / static_cast<double>(pred.size());
    }

    double balanced_accuracy(const std::vector<std::size_t> &pred, const std::vector<std::uint8_t> &labels,
                             std::size_t n_classes)
    {
        if (pred.size() != labels.size() || pred.empty())
            throw Error(ErrorKind::invalid_argument, "prediction and label counts differ or are zero");
        std::vector<std::size_t> total(n_classes, 0), hit(n_classes, 0);
        for (std::size_t i = 0; i < pred.size(); ++i)
        {
            if (labels[i] >= n_classes)
                throw Error(ErrorKind::invalid_argument, "label out of range");
            ++total[labels[i]];
            hit[labels[i]] += pred[i] == labels[i];
        }
        double sum = 0.0;
        std::size_t present = 0;
        for (std::size_t k = 0; k < n_classes; ++k)
            if (total[k] > 0)
            {
                sum += static_cast<double>(hit[k]) / static_cast<double>(total[k]);
                ++present;
            }
        return sum / static_cast<double>(present);
    }

    double evaluate_accuracy(ClassifierModel &model, const SampleSource &set)
    {
        return accuracy(predict_classes(model, set), all_labels(set));
    }

    EvalSummary evaluate(ClassifierModel &model, const SampleSource &set)
    {
        if (set.size() == 0)
            throw Error(ErrorKind::invalid_argument, "empty sample set");
        const Pass p = eval_pass(model, set, 256, true);
        const auto pred = argmax_all(p.proba);
        const auto labels = all_labels(set);
        return {p.loss, accuracy(pred, labels), balanced_accuracy(pred, labels, model.spec().n_classes)};
    }
}

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

#include "beamsel/nn/network.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include "beamsel/binary_io.hpp"

namespace beamsel::nn
{
    namespace
    {
        using Index = Eigen::Index;
        constexpr std::uint32_t model_version = 1;

        std::size_t conv_out(std::size_t in, std::size_t k, std::size_t stride)
        {
            const std::size_t pad = k / 2;
            return (in + 2 * pad - k) / stride + 1;
        }

        std::size_t inception_params(std::size_t c, const InceptionWidths &w)
        {
            return w.w1 * (c + 1) + w.r3() * (c + 1) + w.w3 * (9 * w.r3() + 1) + w.r5() * (c + 1) +
                   w.w5 * (25 * w.r5() + 1) + w.wpool * (c + 1);
        }

        // Spatial side after the stem, its pool and the pools between blocks.
        std::size_t final_side(const NetworkSpec &s)
        {
            std::size_t side = conv_out(s.input_side, s.stem.kernel, s.stem.stride) / 2;
            for (std::size_t i = 1; i < s.inception_blocks.size(); ++i)
                side /= 2;
            return side;
        }

        NetworkKind kind_from(const std::string &s)
        {
            if (s == "inception")
                return NetworkKind::inception;
            if (s == "mlp")
                return NetworkKind::mlp;
            throw Error(ErrorKind::config, "unknown network kind '" + s + "'");
        }

        HeadKind head_from(const std::string &s)
        {
            if (s == "global_average")
                return HeadKind::global_average;
            if (s == "flatten")
                return HeadKind::flatten;
            throw Error(ErrorKind::config, "unknown head '" + s + "'");
        }
    }

    std::string to_string(HeadKind h)
    {
        return h == HeadKind::flatten ? "flatten" : "global_average";
    }

    void NetworkSpec::validate() const
    {
        if (n_classes < 2)
            throw Error(ErrorKind::invalid_argument, "n_classes must be >= 2");
        if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
            throw Error(ErrorKind::invalid_argument, "dropout_rate must lie in [0, 1)");
        activation.validate();
        if (kind == NetworkKind::mlp)
        {
            if (input_features == 0)
                throw Error(ErrorKind::invalid_argument, "mlp input_features must be >= 1");
            for (auto h : hidden)
                if (h == 0)
                    throw Error(ErrorKind::invalid_argument, "mlp widths must be >= 1");
            return;
        }
        if (input_channels == 0 || stem.out_channels == 0 || stem.kernel == 0 || stem.stride == 0)
            throw Error(ErrorKind::invalid_argument, "stem sizes must be >= 1");
        if (inception_blocks.empty())
            throw Error(ErrorKind::invalid_argument, "at least one inception block is required");
        for (const auto &b : inception_blocks)
            if (b.w1 == 0 || b.w3 == 0 || b.w5 == 0 || b.wpool == 0 || b.r3() == 0 || b.r5() == 0)
                throw Error(ErrorKind::invalid_argument, "inception widths must be >= 1");
        if (final_side(*this) == 0)
            throw Error(ErrorKind::invalid_argument, "input_side too small for the pooling schedule");
    }

    Shape NetworkSpec::input_shape() const
    {
        if (kind == NetworkKind::mlp)
            return {input_features, 1, 1};
        return {input_channels, input_side, input_side};
    }

    NetworkSpec NetworkSpec::mlp(std::size_t features, std::vector<std::size_t> hidden, std::size_t classes,
                                 ActivationKind act, double dropout)
    {
        NetworkSpec s;
        s.kind = NetworkKind::mlp;
        s.input_features = features;
        s.hidden = std::move(hidden);
        s.n_classes = classes;
        s.activation = act;
        s.dropout_rate = dropout;
        s.inception_blocks.clear();
        return s;
    }

    std::size_t analytic_parameter_count(const NetworkSpec &s)
    {
        s.validate();
        if (s.kind == NetworkKind::mlp)
        {
            std::size_t n = 0, in = s.input_features;
            for (auto h : s.hidden)
            {
                n += (in + 1) * h;
                in = h;
            }
            return n + (in + 1) * s.n_classes;
        }
        std::size_t n = s.stem.out_channels * (s.input_channels * s.stem.kernel * s.stem.kernel + 1);
        std::size_t c = s.stem.out_channels;
        for (const auto &b : s.inception_blocks)
        {
            n += inception_params(c, b);
            c = b.out_channels();
        }
        std::size_t features = c;
        if (s.head == HeadKind::flatten)
            features *= final_side(s) * final_side(s);
        return n + (features + 1) * s.n_classes;
    }

    nlohmann::json to_json(const InceptionWidths &w)
    {
        return {{"w1", w.w1}, {"w3", w.w3}, {"w5", w.w5}, {"wpool", w.wpool}, {"reduce3", w.reduce3}, {"reduce5", w.reduce5}};
    }

    nlohmann::json to_json(const NetworkSpec &s)
    {
        nlohmann::json blocks = nlohmann::json::array();
        for (const auto &b : s.inception_blocks)
            blocks.push_back(to_json(b));
        return {{"kind", s.kind == NetworkKind::mlp ? "mlp" : "inception"},
                {"input_side", s.input_side},
                {"input_channels", s.input_channels},
                {"stem", {{"out_channels", s.stem.out_channels}, {"kernel", s.stem.kernel}, {"stride", s.stem.stride}}},
                {"inception_blocks", blocks},
                {"head", to_string(s.head)},
                {"input_features", s.input_features},
                {"hidden", s.hidden},
                {"dropout_rate", s.dropout_rate},
                {"n_classes", s.n_classes},
                {"activation", to_string(s.activation)}};
    }

    NetworkSpec network_spec_from_json(const nlohmann::json &j)
    {
        NetworkSpec s;
        try
        {
            s.kind = kind_from(j.value("kind", std::string("inception")));
            s.input_side = j.value("input_side", s.input_side);
            s.input_channels = j.value("input_channels", s.input_channels);
            if (j.contains("stem"))
            {
                const auto &st = j.at("stem");
                s.stem.out_channels = st.value("out_channels", s.stem.out_channels);
                s.stem.kernel = st.value("kernel", s.stem.kernel);
                s.stem.stride = st.value("stride", s.stem.stride);
            }
            if (j.contains("inception_blocks"))
            {
                s.inception_blocks.clear();
                for (const auto &b : j.at("inception_blocks"))
                {
                    InceptionWidths w;
                    w.w1 = b.at("w1").get<std::size_t>();
                    w.w3 = b.at("w3").get<std::size_t>();
                    w.w5 = b.at("w5").get<std::size_t>();
                    w.wpool = b.at("wpool").get<std::size_t>();
                    w.reduce3 = b.value("reduce3", std::size_t{0});
                    w.reduce5 = b.value("reduce5", std::size_t{0});
                    s.inception_blocks.push_back(w);
                }
            }
            if (s.kind == NetworkKind::mlp && !j.contains("inception_blocks"))
                s.inception_blocks.clear();
            s.head = head_from(j.value("head", std::string("global_average")));
            s.input_features = j.value("input_features", s.input_features);
            s.hidden = j.value("hidden", s.hidden);
            s.dropout_rate = j.value("dropout_rate", s.dropout_rate);
            s.n_classes = j.value("n_classes", s.n_classes);
            if (j.contains("activation"))
                s.activation = parse_activation(j.at("activation").get<std::string>());
        }
        catch (const nlohmann::json::exception &e)
        {
            throw Error(ErrorKind::config, std::string("network spec: ") + e.what());
        }
        s.validate();
        return s;
    }

    RMatrix softmax_rows(const RMatrix &logits)
    {
        RMatrix p = logits;
        for (Index r = 0; r < p.rows(); ++r)
        {
            const double m = p.row(r).maxCoeff();
            p.row(r) = (p.row(r).array() - m).exp().matrix();
            p.row(r) /= p.row(r).sum();
        }
        return p;
    }

    std::size_t argmax_row(const RMatrix &m, Index row)
    {
        Index best = 0;
        for (Index c = 1; c < m.cols(); ++c)
            if (m(row, c) > m(row, best))
                best = c;
        return static_cast<std::size_t>(best);
    }

    void write_training_log(std::ostream &out, const std::vector<TrainingRecord> &log)
    {
        out << "iteration,epoch,phase,loss,accuracy\n";
        out.precision(17);
        for (const auto &r : log)
            out << r.iteration << ',' << r.epoch << ',' << r.phase << ',' << r.loss << ',' << r.accuracy << '\n';
    }

    // ---------------------------------------------------------------- ClassifierModel

    ClassifierModel::ClassifierModel(const NetworkSpec &spec, std::uint64_t seed) : spec_(spec)
    {
        spec_.validate();
        build();
        Rng rng(seed);
        for (auto &l : layers_)
            l->initialize(rng);
    }

    ClassifierModel::ClassifierModel(const ClassifierModel &other)
        : training_log(other.training_log), spec_(other.spec_), head_only_(other.head_only_)
    {
        build();
        params_ = other.params_;
    }

    ClassifierModel &ClassifierModel::operator=(const ClassifierModel &other)
    {
        if (this != &other)
        {
            ClassifierModel copy(other);
            *this = std::move(copy);
        }
        return *this;
    }

    void ClassifierModel::build()
    {
        layers_.clear();
        const ActivationKind act = spec_.activation;
        if (spec_.kind == NetworkKind::mlp)
        {
            std::size_t in = spec_.input_features;
            for (auto h : spec_.hidden)
            {
                layers_.push_back(std::make_unique<Linear>(in, h));
                layers_.push_back(std::make_unique<Activation>(act));
                in = h;
            }
            if (spec_.dropout_rate > 0.0)
                layers_.push_back(std::make_unique<Dropout>(spec_.dropout_rate));
            layers_.push_back(std::make_unique<Linear>(in, spec_.n_classes));
        }
        else
        {
            const std::size_t k = spec_.stem.kernel;
            layers_.push_back(std::make_unique<Conv2d>(spec_.input_channels, spec_.stem.out_channels, k, spec_.stem.stride, k / 2));
            layers_.push_back(std::make_unique<Activation>(act));
            layers_.push_back(std::make_unique<MaxPool2d>(2, 2, 0));
            std::size_t c = spec_.stem.out_channels;
            for (std::size_t i = 0; i < spec_.inception_blocks.size(); ++i)
            {
                if (i > 0)
                    layers_.push_back(std::make_unique<MaxPool2d>(2, 2, 0));
                layers_.push_back(std::make_unique<Inception>(c, spec_.inception_blocks[i], act));
                c = spec_.inception_blocks[i].out_channels();
            }
            std::size_t features = c;
            if (spec_.head == HeadKind::flatten)
            {
                layers_.push_back(std::make_unique<Flatten>());
                features *= final_side(spec_) * final_side(spec_);
            }
            else
                layers_.push_back(std::make_unique<GlobalAvgPool>());
            if (spec_.dropout_rate > 0.0)
                layers_.push_back(std::make_unique<Dropout>(spec_.dropout_rate));
            layers_.push_back(std::make_unique<Linear>(features, spec_.n_classes));
        }

        std::size_t total = 0;
        for (const auto &l : layers_)
            total += l->parameter_count();
        params_ = RVector::Zero(static_cast<Index>(total));
        grads_ = RVector::Zero(static_cast<Index>(total));
        std::size_t off = 0;
        for (auto &l : layers_)
        {
            const std::size_t n = l->parameter_count();
            l->bind(std::span<double>(params_.data() + off, n), std::span<double>(grads_.data() + off, n));
            off += n;
        }
        layers_.front()->set_input_grad_needed(false);
    }

    std::size_t ClassifierModel::head_parameter_count() const
    {
        return layers_.back()->parameter_count();
    }

    RMatrix ClassifierModel::logits(const Tensor &x, bool train, Rng &rng)
    {
        return run(x, train, rng, true);
    }

    RMatrix ClassifierModel::infer_logits(const Tensor &x)
    {
        Rng unused(0);
        return run(x, false, unused, false);
    }

    RMatrix ClassifierModel::run(const Tensor &x, bool train, Rng &rng, bool cache)
    {
        for (auto &l : layers_)
            l->set_caching(cache);
        const Shape want = spec_.input_shape();
        if (x.channels != want.channels || x.height != want.height || x.width != want.width)
            throw Error(ErrorKind::invalid_argument, "input shape does not match the network spec");
        if (x.batch == 0)
            throw Error(ErrorKind::invalid_argument, "empty batch");
        Tensor t = layers_.front()->forward(x, train, rng);
        for (std::size_t i = 1; i < layers_.size(); ++i)
            t = layers_[i]->forward(t, train, rng);
        return t.data.transpose();
    }

    RMatrix ClassifierModel::forward(const Tensor &x, bool train, Rng &rng)
    {
        return softmax_rows(logits(x, train, rng));
    }

    RMatrix ClassifierModel::predict_proba(const Tensor &x)
    {
        return softmax_rows(infer_logits(x));
    }

    double ClassifierModel::loss_and_gradient(const Tensor &x, const std::vector<std::uint8_t> &labels, bool train, Rng &rng,
                                              const RVector *class_weights)
    {
        if (class_weights && static_cast<std::size_t>(class_weights->size()) != spec_.n_classes)
            throw Error(ErrorKind::invalid_argument, "class weight count does not match n_classes");
        if (labels.size() != x.batch)
            throw Error(ErrorKind::invalid_argument, "label count does not match batch size");
        for (auto l : labels)
            if (l >= spec_.n_classes)
                throw Error(ErrorKind::invalid_argument, "label out of range");

        last_logits_ = logits(x, train, rng);
        const RMatrix &z = last_logits_;
        const RMatrix p = softmax_rows(z);
        const double inv_b = 1.0 / static_cast<double>(x.batch);
        double loss = 0.0;
        for (Index b = 0; b < z.rows(); ++b)
        {
            const double m = z.row(b).maxCoeff();
            const double lse = m + std::log((z.row(b).array() - m).exp().sum());
            const std::uint8_t y = labels[static_cast<std::size_t>(b)];
            loss += (class_weights ? (*class_weights)[y] : 1.0) * (lse - z(b, y));
        }
        loss *= inv_b;
        if (!std::isfinite(loss))
            throw Error(ErrorKind::training_diverged, "non-finite loss");

        Tensor g(spec_.n_classes, x.batch, 1, 1);
        g.data = p.transpose();
        for (std::size_t b = 0; b < labels.size(); ++b)
        {
            g.data(labels[b], static_cast<Index>(b)) -= 1.0;
            if (class_weights)
                g.data.col(static_cast<Index>(b)) *= (*class_weights)[labels[b]];
        }
        g.data *= inv_b;

        grads_.setZero();
        const std::size_t stop = head_only_ ? layers_.size() - 1 : 0;
        for (std::size_t i = layers_.size(); i-- > stop;)
        {
            if (i == 0 || i == stop)
            {
                // The first layer's (or frozen trunk's) input gradient is never used.
                layers_[i]->backward(g);
                break;
            }
            g = layers_[i]->backward(g);
        }
        return loss;
    }

    void ClassifierModel::zero_final_layer()
    {
        const std::size_t n = head_parameter_count();
        params_.tail(static_cast<Index>(n)).setZero();
    }

    Tensor images_to_tensor(const std::vector<const ImageTensor *> &images)
    {
        if (images.empty())
            throw Error(ErrorKind::invalid_argument, "empty image batch");
        const std::size_t side = images.front()->side;
        const std::size_t plane = side * side;
        Tensor t(ImageTensor::channels, images.size(), side, side);
        for (std::size_t b = 0; b < images.size(); ++b)
        {
            if (images[b]->side != side)
                throw Error(ErrorKind::invalid_argument, "mixed image sides in one batch");
            for (std::size_t c = 0; c < ImageTensor::channels; ++c)
                std::copy_n(images[b]->data.data() + c * plane, plane, t.data.data() + c * t.data.cols() + b * plane);
        }
        return t;
    }

    Tensor rows_to_tensor(const RMatrix &rows, const std::vector<std::size_t> &index)
    {
        Tensor t(static_cast<std::size_t>(rows.cols()), index.size(), 1, 1);
        for (std::size_t b = 0; b < index.size(); ++b)
            t.data.col(static_cast<Index>(b)) = rows.row(static_cast<Index>(index[b])).transpose();
        return t;
    }

    // ---------------------------------------------------------------- checkpoint

    void write_model(std::ostream &out, const ClassifierModel &m)
    {
        binio::put_magic(out, "BSNN");
        binio::put<std::uint32_t>(out, model_version);
        binio::put_string(out, to_json(m.spec()).dump());
        binio::put<std::uint64_t>(out, m.parameter_count());
        for (Index i = 0; i < m.parameters().size(); ++i)
            binio::put<double>(out, m.parameters()[i]);
        if (!out)
            throw Error(ErrorKind::io, "failed writing model checkpoint");
    }

    ClassifierModel read_model(std::istream &in)
    {
        binio::expect_magic(in, "BSNN");
        const auto version = binio::get<std::uint32_t>(in);
        if (version != model_version)
            throw Error(ErrorKind::io, "unsupported model checkpoint version " + std::to_string(version));
        nlohmann::json j;
        try
        {
            j = nlohmann::json::parse(binio::get_string(in));
        }
        catch (const nlohmann::json::exception &e)
        {
            throw Error(ErrorKind::io, std::string("corrupt network spec: ") + e.what());
        }
        ClassifierModel m(network_spec_from_json(j), 0);
        const auto n = binio::get<std::uint64_t>(in);
        if (n != m.parameter_count())
            throw Error(ErrorKind::io, "checkpoint parameter count does not match its spec");
        for (std::uint64_t i = 0; i < n; ++i)
            m.parameters()[static_cast<Index>(i)] = binio::get<double>(in);
        return m;
    }

    void save_model(const std::string &path, const ClassifierModel &m)
    {
        std::ofstream f(path, std::ios::binary);
        if (!f)
            throw Error(ErrorKind::io, "cannot open " + path + " for writing");
        write_model(f, m);
    }

    ClassifierModel load_model(const std::string &path)
    {
        std::ifstream f(path, std::ios::binary);
        if (!f)
            throw Error(ErrorKind::io, "cannot open model " + path);
        return read_model(f);
    }
}

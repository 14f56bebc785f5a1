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

#include <memory>
#include <span>
#include <vector>

#include "beamsel/common.hpp"
#include "beamsel/nn/activation.hpp"
#include "beamsel/nn/tensor.hpp"

namespace beamsel::nn
{
    struct Shape
    {
        std::size_t channels = 0;
        std::size_t height = 1;
        std::size_t width = 1;

        bool operator==(const Shape &) const = default;
    };

    /// A differentiable block. forward() caches what backward() needs, so a layer serves one
    /// minibatch at a time; backward() accumulates into the bound gradient span.
    class Layer
    {
    public:
        virtual ~Layer() = default;

        virtual Tensor forward(const Tensor &x, bool train, Rng &rng) = 0;
        virtual Tensor backward(const Tensor &grad) = 0;
        virtual Shape output_shape(const Shape &in) const = 0;

        virtual std::size_t parameter_count() const { return 0; }
        virtual void bind(std::span<double> /*params*/, std::span<double> /*grads*/) {}
        virtual void initialize(Rng & /*rng*/) {}

        /// The first layer of a network has no consumer for its input gradient; layers may then
        /// return an empty tensor from backward().
        void set_input_grad_needed(bool needed) { input_grad_needed_ = needed; }

        /// With caching off, forward() keeps nothing for backward() (inference passes).
        virtual void set_caching(bool on) { caching_ = on; }

    protected:
        bool input_grad_needed_ = true;
        bool caching_ = true;
    };

    class Conv2d final : public Layer
    {
    public:
        Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t stride, std::size_t pad);

        Tensor forward(const Tensor &x, bool train, Rng &rng) override;
        Tensor backward(const Tensor &grad) override;
        Shape output_shape(const Shape &in) const override;
        std::size_t parameter_count() const override { return out_ * in_ * k_ * k_ + out_; }
        void bind(std::span<double> params, std::span<double> grads) override;
        void initialize(Rng &rng) override;

    private:
        bool pointwise() const { return k_ == 1 && stride_ == 1 && pad_ == 0; }

        std::size_t in_, out_, k_, stride_, pad_;
        std::span<double> w_, gw_;
        Tensor input_;
        RowMatrix cols_;
        std::vector<std::size_t> active_; // input channels that are not identically zero
        std::size_t out_h_ = 0, out_w_ = 0;
    };

    class MaxPool2d final : public Layer
    {
    public:
        MaxPool2d(std::size_t kernel, std::size_t stride, std::size_t pad) : k_(kernel), stride_(stride), pad_(pad) {}

        Tensor forward(const Tensor &x, bool train, Rng &rng) override;
        Tensor backward(const Tensor &grad) override;
        Shape output_shape(const Shape &in) const override;

    private:
        std::size_t k_, stride_, pad_;
        Shape in_shape_;
        std::size_t batch_ = 0;
        std::vector<std::size_t> argmax_;
    };

    class Activation final : public Layer
    {
    public:
        explicit Activation(ActivationKind kind) : kind_(kind) {}

        Tensor forward(const Tensor &x, bool train, Rng &rng) override;
        Tensor backward(const Tensor &grad) override;
        Shape output_shape(const Shape &in) const override { return in; }

    private:
        ActivationKind kind_;
        Tensor input_;
        RowMatrix aux_; // sigmoid(x) for swish / sigmoid
    };

    class GlobalAvgPool final : public Layer
    {
    public:
        Tensor forward(const Tensor &x, bool train, Rng &rng) override;
        Tensor backward(const Tensor &grad) override;
        Shape output_shape(const Shape &in) const override { return {in.channels, 1, 1}; }

    private:
        Shape in_shape_;
        std::size_t batch_ = 0;
    };

    class Flatten final : public Layer
    {
    public:
        Tensor forward(const Tensor &x, bool train, Rng &rng) override;
        Tensor backward(const Tensor &grad) override;
        Shape output_shape(const Shape &in) const override { return {in.channels * in.height * in.width, 1, 1}; }

    private:
        Shape in_shape_;
        std::size_t batch_ = 0;
    };

    /// Inverted dropout: kept units are scaled by 1 / (1 - rate) in training, identity otherwise.
    class Dropout final : public Layer
    {
    public:
        explicit Dropout(double rate) : rate_(rate) {}

        Tensor forward(const Tensor &x, bool train, Rng &rng) override;
        Tensor backward(const Tensor &grad) override;
        Shape output_shape(const Shape &in) const override { return in; }

    private:
        double rate_;
        RowMatrix mask_;
        bool active_ = false;
    };

    class Linear final : public Layer
    {
    public:
        Linear(std::size_t in_features, std::size_t out_features) : in_(in_features), out_(out_features) {}

        Tensor forward(const Tensor &x, bool train, Rng &rng) override;
        Tensor backward(const Tensor &grad) override;
        Shape output_shape(const Shape &) const override { return {out_, 1, 1}; }
        std::size_t parameter_count() const override { return out_ * in_ + out_; }
        void bind(std::span<double> params, std::span<double> grads) override;
        void initialize(Rng &rng) override;

    private:
        std::size_t in_, out_;
        std::span<double> w_, gw_;
        Tensor input_;
    };

    struct InceptionWidths
    {
        std::size_t w1 = 4;      // 1x1 branch
        std::size_t w3 = 4;      // 3x3 branch
        std::size_t w5 = 4;      // 5x5 branch
        std::size_t wpool = 4;   // pooled projection
        std::size_t reduce3 = 0; // 1x1 reduction ahead of the 3x3 (0: same as w3)
        std::size_t reduce5 = 0; // 1x1 reduction ahead of the 5x5 (0: same as w5)

        std::size_t r3() const { return reduce3 ? reduce3 : w3; }
        std::size_t r5() const { return reduce5 ? reduce5 : w5; }
        std::size_t out_channels() const { return w1 + w3 + w5 + wpool; }
        bool operator==(const InceptionWidths &) const = default;
    };

    /// Four parallel branches (1x1 | 1x1-3x3 | 1x1-5x5 | 3x3 maxpool-1x1) concatenated along
    /// channels, followed by the configured activation on the concatenation.
    class Inception final : public Layer
    {
    public:
        Inception(std::size_t in_channels, const InceptionWidths &w, ActivationKind act);

        Tensor forward(const Tensor &x, bool train, Rng &rng) override;
        Tensor backward(const Tensor &grad) override;
        Shape output_shape(const Shape &in) const override { return {widths_.out_channels(), in.height, in.width}; }
        std::size_t parameter_count() const override;
        void bind(std::span<double> params, std::span<double> grads) override;
        void initialize(Rng &rng) override;
        void set_caching(bool on) override;

    private:
        InceptionWidths widths_;
        std::vector<std::vector<std::unique_ptr<Layer>>> branches_;
        Activation post_;
    };
}

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

#include "beamsel/nn/layers.hpp"

#include <cmath>
#include <limits>

namespace beamsel::nn
{
    namespace
    {
        using Index = Eigen::Index;
        using RowMap = Eigen::Map<RowMatrix>;
        using ColVecMap = Eigen::Map<Eigen::VectorXd>;

        Index ix(std::size_t v) { return static_cast<Index>(v); }

        void he_uniform(std::span<double> w, std::size_t fan_in, Rng &rng)
        {
            const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
            std::uniform_real_distribution<double> dist(-limit, limit);
            for (auto &v : w)
                v = dist(rng);
        }

        std::size_t pooled_side(std::size_t in, std::size_t k, std::size_t s, std::size_t p)
        {
            if (in + 2 * p < k)
                throw Error(ErrorKind::invalid_argument, "window larger than padded input");
            return (in + 2 * p - k) / s + 1;
        }
    }

    // ---------------------------------------------------------------- Conv2d

    Conv2d::Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t stride, std::size_t pad)
        : in_(in_channels), out_(out_channels), k_(kernel), stride_(stride), pad_(pad)
    {
        if (in_ == 0 || out_ == 0 || k_ == 0 || stride_ == 0)
            throw Error(ErrorKind::invalid_argument, "conv2d sizes must be positive");
    }

    Shape Conv2d::output_shape(const Shape &in) const
    {
        return {out_, pooled_side(in.height, k_, stride_, pad_), pooled_side(in.width, k_, stride_, pad_)};
    }

    void Conv2d::bind(std::span<double> params, std::span<double> grads)
    {
        w_ = params;
        gw_ = grads;
    }

    void Conv2d::initialize(Rng &rng)
    {
        const std::size_t nw = out_ * in_ * k_ * k_;
        he_uniform(w_.first(nw), in_ * k_ * k_, rng);
        for (std::size_t i = nw; i < w_.size(); ++i)
            w_[i] = 0.0;
    }

    Tensor Conv2d::forward(const Tensor &x, bool, Rng &)
    {
        if (x.channels != in_)
            throw Error(ErrorKind::invalid_argument, "conv2d input channel mismatch");
        const Shape os = output_shape({x.channels, x.height, x.width});
        out_h_ = os.height;
        out_w_ = os.width;
        if (caching_ && pointwise())
            input_ = x;
        else if (caching_)
        {
            input_.channels = x.channels;
            input_.batch = x.batch;
            input_.height = x.height;
            input_.width = x.width;
        }

        const std::size_t kk = k_ * k_;
        RowMap w(w_.data(), ix(out_), ix(in_ * kk));
        ColVecMap b(w_.data() + out_ * in_ * kk, ix(out_));

        Tensor y(out_, x.batch, out_h_, out_w_);
        if (pointwise())
        {
            y.data.noalias() = w * x.data;
            y.data.colwise() += b;
            return y;
        }

        // Channels that are zero everywhere (the unused image planes) add nothing to the output
        // or to the weight gradient, so they are left out of the patch matrix.
        active_.clear();
        for (std::size_t c = 0; c < in_; ++c)
            if (!x.data.row(ix(c)).isZero(0.0))
                active_.push_back(c);

        const std::size_t cols = x.batch * out_h_ * out_w_;
        cols_.resize(ix(active_.size() * kk), ix(cols));
        const long H = static_cast<long>(x.height), W = static_cast<long>(x.width);
        for (std::size_t a = 0; a < active_.size(); ++a)
        {
            const double *src = x.data.data() + active_[a] * static_cast<std::size_t>(x.data.cols());
            for (std::size_t ky = 0; ky < k_; ++ky)
                for (std::size_t kx = 0; kx < k_; ++kx)
                {
                    double *dst = cols_.data() + ((a * k_ + ky) * k_ + kx) * cols;
                    for (std::size_t bi = 0; bi < x.batch; ++bi)
                    {
                        const double *plane = src + bi * x.plane();
                        for (std::size_t oy = 0; oy < out_h_; ++oy)
                        {
                            const long iy = static_cast<long>(oy * stride_ + ky) - static_cast<long>(pad_);
                            for (std::size_t ox = 0; ox < out_w_; ++ox, ++dst)
                            {
                                const long xx = static_cast<long>(ox * stride_ + kx) - static_cast<long>(pad_);
                                *dst = (iy >= 0 && iy < H && xx >= 0 && xx < W) ? plane[iy * W + xx] : 0.0;
                            }
                        }
                    }
                }
        }
        if (active_.size() == in_)
            y.data.noalias() = w * cols_;
        else
        {
            RowMatrix wa(ix(out_), ix(active_.size() * kk));
            for (std::size_t a = 0; a < active_.size(); ++a)
                wa.middleCols(ix(a * kk), ix(kk)) = w.middleCols(ix(active_[a] * kk), ix(kk));
            y.data.noalias() = wa * cols_;
        }
        y.data.colwise() += b;
        return y;
    }

    Tensor Conv2d::backward(const Tensor &grad)
    {
        const std::size_t kk = k_ * k_;
        RowMap w(w_.data(), ix(out_), ix(in_ * kk));
        RowMap gw(gw_.data(), ix(out_), ix(in_ * kk));
        ColVecMap gb(gw_.data() + out_ * in_ * kk, ix(out_));

        gb += grad.data.rowwise().sum();
        if (pointwise())
        {
            gw.noalias() += grad.data * input_.data.transpose();
            Tensor dx(in_, input_.batch, input_.height, input_.width);
            if (input_grad_needed_)
                dx.data.noalias() = w.transpose() * grad.data;
            return dx;
        }

        if (active_.size() == in_)
            gw.noalias() += grad.data * cols_.transpose();
        else
        {
            const RowMatrix ga = grad.data * cols_.transpose();
            for (std::size_t a = 0; a < active_.size(); ++a)
                gw.middleCols(ix(active_[a] * kk), ix(kk)) += ga.middleCols(ix(a * kk), ix(kk));
        }
        if (!input_grad_needed_)
            return {};

        Tensor dx(in_, input_.batch, input_.height, input_.width);
        const RowMatrix dcols = w.transpose() * grad.data;
        const std::size_t cols = input_.batch * out_h_ * out_w_;
        const long H = static_cast<long>(input_.height), W = static_cast<long>(input_.width);
        for (std::size_t c = 0; c < in_; ++c)
            for (std::size_t ky = 0; ky < k_; ++ky)
                for (std::size_t kx = 0; kx < k_; ++kx)
                {
                    const double *src = dcols.data() + ((c * k_ + ky) * k_ + kx) * cols;
                    double *dst = dx.data.data() + c * static_cast<std::size_t>(dx.data.cols());
                    for (std::size_t bi = 0; bi < input_.batch; ++bi)
                    {
                        double *plane = dst + bi * input_.plane();
                        for (std::size_t oy = 0; oy < out_h_; ++oy)
                        {
                            const long iy = static_cast<long>(oy * stride_ + ky) - static_cast<long>(pad_);
                            for (std::size_t ox = 0; ox < out_w_; ++ox, ++src)
                            {
                                const long xx = static_cast<long>(ox * stride_ + kx) - static_cast<long>(pad_);
                                if (iy >= 0 && iy < H && xx >= 0 && xx < W)
                                    plane[iy * W + xx] += *src;
                            }
                        }
                    }
                }
        return dx;
    }

    // ---------------------------------------------------------------- MaxPool2d

    Shape MaxPool2d::output_shape(const Shape &in) const
    {
        return {in.channels, pooled_side(in.height, k_, stride_, pad_), pooled_side(in.width, k_, stride_, pad_)};
    }

    Tensor MaxPool2d::forward(const Tensor &x, bool, Rng &)
    {
        in_shape_ = {x.channels, x.height, x.width};
        batch_ = x.batch;
        const Shape os = output_shape(in_shape_);
        Tensor y(os.channels, x.batch, os.height, os.width);
        argmax_.assign(static_cast<std::size_t>(y.data.size()), 0);

        const long H = static_cast<long>(x.height), W = static_cast<long>(x.width);
        std::size_t o = 0;
        for (std::size_t c = 0; c < x.channels; ++c)
        {
            const double *row = x.data.data() + c * x.data.cols();
            for (std::size_t b = 0; b < x.batch; ++b)
                for (std::size_t oy = 0; oy < os.height; ++oy)
                    for (std::size_t ox = 0; ox < os.width; ++ox, ++o)
                    {
                        double best = -std::numeric_limits<double>::infinity();
                        std::size_t arg = 0;
                        for (std::size_t ky = 0; ky < k_; ++ky)
                        {
                            const long iy = static_cast<long>(oy * stride_ + ky) - static_cast<long>(pad_);
                            if (iy < 0 || iy >= H)
                                continue;
                            for (std::size_t kx = 0; kx < k_; ++kx)
                            {
                                const long xx = static_cast<long>(ox * stride_ + kx) - static_cast<long>(pad_);
                                if (xx < 0 || xx >= W)
                                    continue;
                                const std::size_t at = b * x.plane() + static_cast<std::size_t>(iy * W + xx);
                                if (row[at] > best)
                                {
                                    best = row[at];
                                    arg = at;
                                }
                            }
                        }
                        y.data.data()[o] = best;
                        argmax_[o] = c * x.data.cols() + arg;
                    }
        }
        return y;
    }

    Tensor MaxPool2d::backward(const Tensor &grad)
    {
        Tensor dx(in_shape_.channels, batch_, in_shape_.height, in_shape_.width);
        const double *g = grad.data.data();
        double *d = dx.data.data();
        for (std::size_t o = 0; o < argmax_.size(); ++o)
            d[argmax_[o]] += g[o];
        return dx;
    }

    // ---------------------------------------------------------------- Activation

    Tensor Activation::forward(const Tensor &x, bool, Rng &)
    {
        if (caching_)
            input_ = x;
        Tensor y;
        y.channels = x.channels;
        y.batch = x.batch;
        y.height = x.height;
        y.width = x.width;
        auto in = x.data.array();
        switch (kind_.type)
        {
        case ActivationType::relu:
            y.data = in.max(0.0).matrix();
            break;
        case ActivationType::leaky_relu:
            y.data = (in > 0.0).select(in, kind_.slope * in).matrix();
            break;
        case ActivationType::swish:
            aux_ = (1.0 / (1.0 + (-in).exp())).matrix();
            y.data = (in * aux_.array()).matrix();
            break;
        case ActivationType::sigmoid:
            aux_ = (1.0 / (1.0 + (-in).exp())).matrix();
            y.data = aux_;
            break;
        }
        return y;
    }

    Tensor Activation::backward(const Tensor &grad)
    {
        Tensor dx = grad;
        auto in = input_.data.array();
        auto g = grad.data.array();
        switch (kind_.type)
        {
        case ActivationType::relu:
            dx.data = (in > 0.0).select(g, 0.0).matrix();
            break;
        case ActivationType::leaky_relu:
            dx.data = (in > 0.0).select(g, kind_.slope * g).matrix();
            break;
        case ActivationType::swish:
        {
            auto s = aux_.array();
            dx.data = (g * (s + in * s * (1.0 - s))).matrix();
            break;
        }
        case ActivationType::sigmoid:
        {
            auto s = aux_.array();
            dx.data = (g * s * (1.0 - s)).matrix();
            break;
        }
        }
        return dx;
    }

    // ---------------------------------------------------------------- pooling heads

    Tensor GlobalAvgPool::forward(const Tensor &x, bool, Rng &)
    {
        in_shape_ = {x.channels, x.height, x.width};
        batch_ = x.batch;
        Tensor y(x.channels, x.batch, 1, 1);
        const double inv = 1.0 / static_cast<double>(x.plane());
        for (std::size_t b = 0; b < x.batch; ++b)
            y.data.col(ix(b)) = x.data.middleCols(ix(b * x.plane()), ix(x.plane())).rowwise().sum() * inv;
        return y;
    }

    Tensor GlobalAvgPool::backward(const Tensor &grad)
    {
        Tensor dx(in_shape_.channels, batch_, in_shape_.height, in_shape_.width);
        const std::size_t plane = in_shape_.height * in_shape_.width;
        const double inv = 1.0 / static_cast<double>(plane);
        for (std::size_t b = 0; b < batch_; ++b)
            dx.data.middleCols(ix(b * plane), ix(plane)).colwise() = grad.data.col(ix(b)) * inv;
        return dx;
    }

    Tensor Flatten::forward(const Tensor &x, bool, Rng &)
    {
        in_shape_ = {x.channels, x.height, x.width};
        batch_ = x.batch;
        const std::size_t plane = x.plane();
        Tensor y(x.channels * plane, x.batch, 1, 1);
        for (std::size_t c = 0; c < x.channels; ++c)
            for (std::size_t b = 0; b < x.batch; ++b)
                for (std::size_t p = 0; p < plane; ++p)
                    y.data(ix(c * plane + p), ix(b)) = x.data(ix(c), ix(b * plane + p));
        return y;
    }

    Tensor Flatten::backward(const Tensor &grad)
    {
        Tensor dx(in_shape_.channels, batch_, in_shape_.height, in_shape_.width);
        const std::size_t plane = dx.plane();
        for (std::size_t c = 0; c < dx.channels; ++c)
            for (std::size_t b = 0; b < batch_; ++b)
                for (std::size_t p = 0; p < plane; ++p)
                    dx.data(ix(c), ix(b * plane + p)) = grad.data(ix(c * plane + p), ix(b));
        return dx;
    }

    // ---------------------------------------------------------------- Dropout

    Tensor Dropout::forward(const Tensor &x, bool train, Rng &rng)
    {
        active_ = train && rate_ > 0.0;
        if (!active_)
            return x;
        const double keep = 1.0 - rate_;
        std::bernoulli_distribution coin(keep);
        mask_.resize(x.data.rows(), x.data.cols());
        double *m = mask_.data();
        for (Index i = 0; i < mask_.size(); ++i)
            m[i] = coin(rng) ? 1.0 / keep : 0.0;
        Tensor y = x;
        y.data.array() *= mask_.array();
        return y;
    }

    Tensor Dropout::backward(const Tensor &grad)
    {
        if (!active_)
            return grad;
        Tensor dx = grad;
        dx.data.array() *= mask_.array();
        return dx;
    }

    // ---------------------------------------------------------------- Linear

    void Linear::bind(std::span<double> params, std::span<double> grads)
    {
        w_ = params;
        gw_ = grads;
    }

    void Linear::initialize(Rng &rng)
    {
        he_uniform(w_.first(out_ * in_), in_, rng);
        for (std::size_t i = out_ * in_; i < w_.size(); ++i)
            w_[i] = 0.0;
    }

    Tensor Linear::forward(const Tensor &x, bool, Rng &)
    {
        if (x.channels * x.plane() != in_ || x.plane() != 1)
            throw Error(ErrorKind::invalid_argument, "linear input width mismatch");
        if (caching_)
            input_ = x;
        RowMap w(w_.data(), ix(out_), ix(in_));
        ColVecMap b(w_.data() + out_ * in_, ix(out_));
        Tensor y(out_, x.batch, 1, 1);
        y.data.noalias() = w * x.data;
        y.data.colwise() += b;
        return y;
    }

    Tensor Linear::backward(const Tensor &grad)
    {
        RowMap w(w_.data(), ix(out_), ix(in_));
        RowMap gw(gw_.data(), ix(out_), ix(in_));
        ColVecMap gb(gw_.data() + out_ * in_, ix(out_));
        gw.noalias() += grad.data * input_.data.transpose();
        gb += grad.data.rowwise().sum();
        Tensor dx(in_, grad.batch, 1, 1);
        dx.data.noalias() = w.transpose() * grad.data;
        return dx;
    }

    // ---------------------------------------------------------------- Inception

    Inception::Inception(std::size_t in_channels, const InceptionWidths &w, ActivationKind act)
        : widths_(w), post_(act)
    {
        if (in_channels == 0 || w.w1 == 0 || w.w3 == 0 || w.w5 == 0 || w.wpool == 0 || w.r3() == 0 || w.r5() == 0)
            throw Error(ErrorKind::invalid_argument, "inception widths must be >= 1");
        branches_.resize(4);
        branches_[0].push_back(std::make_unique<Conv2d>(in_channels, w.w1, 1, 1, 0));

        branches_[1].push_back(std::make_unique<Conv2d>(in_channels, w.r3(), 1, 1, 0));
        branches_[1].push_back(std::make_unique<Activation>(act));
        branches_[1].push_back(std::make_unique<Conv2d>(w.r3(), w.w3, 3, 1, 1));

        branches_[2].push_back(std::make_unique<Conv2d>(in_channels, w.r5(), 1, 1, 0));
        branches_[2].push_back(std::make_unique<Activation>(act));
        branches_[2].push_back(std::make_unique<Conv2d>(w.r5(), w.w5, 5, 1, 2));

        branches_[3].push_back(std::make_unique<MaxPool2d>(3, 1, 1));
        branches_[3].push_back(std::make_unique<Conv2d>(in_channels, w.wpool, 1, 1, 0));
    }

    std::size_t Inception::parameter_count() const
    {
        std::size_t n = 0;
        for (const auto &br : branches_)
            for (const auto &l : br)
                n += l->parameter_count();
        return n;
    }

    void Inception::bind(std::span<double> params, std::span<double> grads)
    {
        std::size_t off = 0;
        for (auto &br : branches_)
            for (auto &l : br)
            {
                const std::size_t n = l->parameter_count();
                l->bind(params.subspan(off, n), grads.subspan(off, n));
                off += n;
            }
    }

    void Inception::initialize(Rng &rng)
    {
        for (auto &br : branches_)
            for (auto &l : br)
                l->initialize(rng);
    }

    void Inception::set_caching(bool on)
    {
        caching_ = on;
        post_.set_caching(on);
        for (auto &br : branches_)
            for (auto &l : br)
                l->set_caching(on);
    }

    Tensor Inception::forward(const Tensor &x, bool train, Rng &rng)
    {
        Tensor cat(widths_.out_channels(), x.batch, x.height, x.width);
        Index row = 0;
        for (auto &br : branches_)
        {
            Tensor t = br.front()->forward(x, train, rng);
            for (std::size_t i = 1; i < br.size(); ++i)
                t = br[i]->forward(t, train, rng);
            cat.data.middleRows(row, t.data.rows()) = t.data;
            row += t.data.rows();
        }
        return post_.forward(cat, train, rng);
    }

    Tensor Inception::backward(const Tensor &grad)
    {
        const Tensor dcat = post_.backward(grad);
        const std::size_t widths[4] = {widths_.w1, widths_.w3, widths_.w5, widths_.wpool};
        Tensor dx;
        Index row = 0;
        for (std::size_t k = 0; k < 4; ++k)
        {
            Tensor g(widths[k], dcat.batch, dcat.height, dcat.width);
            g.data = dcat.data.middleRows(row, ix(widths[k]));
            row += ix(widths[k]);
            auto &br = branches_[k];
            for (std::size_t i = br.size(); i-- > 0;)
                g = br[i]->backward(g);
            if (k == 0)
                dx = std::move(g);
            else
                dx.data += g.data;
        }
        return dx;
    }
}

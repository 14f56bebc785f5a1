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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <sstream>

#include "beamsel/nn/network.hpp"
#include "beamsel/nn/optimizer.hpp"
#include "beamsel/nn/trainer.hpp"
#include "../support/nn_oracles.hpp"

using namespace beamsel;
using namespace beamsel::nn;
using beamsel::testing::relative_error;
using Catch::Matchers::WithinAbs;

namespace
{
    const ActivationKind all_kinds[] = {ActivationKind::relu(), ActivationKind::leaky_relu(0.1), ActivationKind::swish(),
                                        ActivationKind::sigmoid()};

    // Two Gaussian blobs on either side of the hyperplane x0 + x1 = 0, with a margin.
    Dataset separable_blobs(std::size_t n, std::uint64_t seed)
    {
        Rng rng(seed);
        std::normal_distribution<double> noise(0.0, 0.3);
        Dataset d;
        d.class_count = 2;
        d.features.resize(static_cast<Eigen::Index>(n), 2);
        for (std::size_t i = 0; i < n; ++i)
        {
            const std::uint8_t y = static_cast<std::uint8_t>(i % 2);
            const double c = y ? 1.5 : -1.5;
            d.features(static_cast<Eigen::Index>(i), 0) = c + noise(rng);
            d.features(static_cast<Eigen::Index>(i), 1) = c + noise(rng);
            d.labels.push_back(y);
            d.realization_ids.push_back(i);
        }
        return d;
    }

    double quadratic_run(OptimizerKind kind, std::size_t steps, double lr)
    {
        Optimizer opt(kind, 2);
        RVector p = RVector::Ones(2);
        for (std::size_t i = 0; i < steps; ++i)
            opt.step(p, p, lr); // grad of 0.5 |p|^2 is p
        return p.norm();
    }
}

TEST_CASE("activation values", "[neuralnet][activation]")
{
    CHECK(activation(ActivationKind::swish(), 0.0) == 0.0);
    CHECK(activation(ActivationKind::relu(), -3.0) == 0.0);
    CHECK(activation(ActivationKind::relu(), 3.0) == 3.0);
    CHECK_THAT(activation(ActivationKind::swish(), 1.0), WithinAbs(testing::swish_oracle(1.0), 1e-9));
    CHECK_THAT(activation(ActivationKind::swish(), 1.0), WithinAbs(0.731059, 1e-6));
    CHECK(activation(ActivationKind::leaky_relu(0.2), -2.0) == -0.4);
    for (double x : {-30.0, -3.7, -0.25, 0.6, 4.0, 30.0})
        CHECK_THAT(activation(ActivationKind::swish(), x), WithinAbs(testing::swish_oracle(x), 1e-12));
    CHECK(sigmoid(-800.0) == 0.0);
    CHECK(sigmoid(800.0) == 1.0);
}

TEST_CASE("activation gradients match central differences", "[neuralnet][activation]")
{
    const double h = 1e-5;
    for (const auto &k : all_kinds)
    {
        double worst = 0.0;
        for (int i = -4000; i <= 4000; ++i)
        {
            const double x = i * 0.005 + 0.0012345; // keeps the kinked activations off x = 0
            const double fd = (activation(k, x + h) - activation(k, x - h)) / (2 * h);
            worst = std::max(worst, relative_error(activation_grad(k, x), fd, 1e-3));
        }
        INFO(to_string(k));
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("swish shape properties", "[neuralnet][activation][property]")
{
    const auto sw = ActivationKind::swish();
    double lo = 0.0;
    for (int i = -20000; i <= 20000; ++i)
        lo = std::min(lo, activation(sw, i * 0.001));
    CHECK(lo >= -0.2785 - 1e-4);
    CHECK(lo < -0.278);
    CHECK(activation(sw, 20.0) / 20.0 > 0.999);
    // Decreasing on (-inf, -1.28) and increasing after: f(-5) > f(-1) < f(-0.5) < f(-0.1).
    CHECK(activation(sw, -1.0) < activation(sw, -5.0));
    CHECK(activation(sw, -0.5) < activation(sw, -0.1));
}

TEST_CASE("activation parsing and validation", "[neuralnet][activation]")
{
    CHECK(parse_activation("swish") == ActivationKind::swish());
    CHECK(parse_activation("ReLU") == ActivationKind::relu());
    CHECK(parse_activation("leaky_relu:0.3") == ActivationKind::leaky_relu(0.3));
    CHECK(parse_activation(to_string(ActivationKind::leaky_relu(0.05))) == ActivationKind::leaky_relu(0.05));
    CHECK_THROWS_AS(parse_activation("tanh"), Error);
    CHECK_THROWS_AS(parse_activation("leaky_relu:x"), Error);
    CHECK_THROWS_AS(ActivationKind::leaky_relu(1.0).validate(), Error);
    CHECK_THROWS_AS(ActivationKind::leaky_relu(0.0).validate(), Error);
}

TEST_CASE("parameter count matches the spec", "[neuralnet][property]")
{
    // Hand count for a single block on a 4-channel stem:
    //   stem 4*(3*9+1) = 112; 1x1 2*5 = 10; reduce 1*5 + 3x3 1*(9+1) = 15;
    //   reduce 1*5 + 5x5 1*(25+1) = 31; pool proj 1*5 = 5; head (5+1)*2 = 12.
    NetworkSpec s;
    s.input_side = 8;
    s.stem = {4, 3, 1};
    s.inception_blocks = {{2, 1, 1, 1, 1, 1}};
    s.n_classes = 2;
    CHECK(analytic_parameter_count(s) == 112 + 10 + 15 + 31 + 5 + 12);
    CHECK(ClassifierModel(s, 1).parameter_count() == 185);

    std::vector<NetworkSpec> specs{NetworkSpec{}, testing::downsized_spec(ActivationKind::swish())};
    specs.push_back(NetworkSpec{});
    specs.back().head = HeadKind::flatten;
    specs.back().stem.stride = 2;
    specs.push_back(NetworkSpec::mlp(36, {64, 32}, 5));
    for (const auto &sp : specs)
        CHECK(ClassifierModel(sp, 2).parameter_count() == analytic_parameter_count(sp));
    // mlp: (36+1)*64 + (64+1)*32 + (32+1)*5
    CHECK(analytic_parameter_count(NetworkSpec::mlp(36, {64, 32}, 5)) == 2368 + 2080 + 165);
}

TEST_CASE("spec validation", "[neuralnet]")
{
    NetworkSpec s;
    s.n_classes = 1;
    CHECK_THROWS_AS(ClassifierModel(s, 1), Error);
    s = NetworkSpec{};
    s.dropout_rate = 1.0;
    CHECK_THROWS_AS(s.validate(), Error);
    s = NetworkSpec{};
    s.inception_blocks[0].w5 = 0;
    CHECK_THROWS_AS(s.validate(), Error);
    s = NetworkSpec{};
    s.input_side = 2;
    CHECK_THROWS_AS(s.validate(), Error);
    const NetworkSpec back = network_spec_from_json(to_json(testing::downsized_spec(ActivationKind::leaky_relu(0.2))));
    CHECK(back == testing::downsized_spec(ActivationKind::leaky_relu(0.2)));
}

TEST_CASE("forward produces probability rows", "[neuralnet][property]")
{
    ClassifierModel m(NetworkSpec{}, 5);
    const Tensor x = testing::random_tensor(3, 6, 32, 9);
    Rng rng(1);
    const RMatrix p = m.forward(x, true, rng);
    REQUIRE(p.rows() == 6);
    REQUIRE(p.cols() == 5);
    for (Eigen::Index r = 0; r < p.rows(); ++r)
    {
        CHECK(std::abs(p.row(r).sum() - 1.0) < 1e-9);
        CHECK(p.row(r).minCoeff() >= 0.0);
        CHECK(p.row(r).maxCoeff() <= 1.0);
    }

    m.zero_final_layer();
    const RMatrix u = m.predict_proba(x);
    CHECK((u.array() - 0.2).abs().maxCoeff() < 1e-15);

    CHECK_THROWS_AS(m.predict_proba(testing::random_tensor(3, 2, 16, 1)), Error);
    CHECK_THROWS_AS(m.predict_proba(testing::random_tensor(1, 2, 32, 1)), Error);

    // Huge logits stay finite.
    RMatrix z(1, 3);
    z << 1000.0, -1000.0, 999.0;
    const RMatrix s = softmax_rows(z);
    CHECK(s.allFinite());
    CHECK(std::abs(s.sum() - 1.0) < 1e-12);
}

TEST_CASE("eval mode is deterministic and dropout preserves scale", "[neuralnet][property]")
{
    ClassifierModel m(NetworkSpec{}, 5);
    const Tensor x = testing::random_tensor(3, 4, 32, 3);
    const RMatrix a = m.predict_proba(x);
    const RMatrix b = m.predict_proba(x);
    CHECK(a == b);

    Dropout drop(0.4);
    Tensor ones(1, 1, 10, 10);
    ones.data.setOnes();
    Rng rng(77);
    double total = 0.0;
    for (int t = 0; t < 1000; ++t)
        total += drop.forward(ones, true, rng).data.mean();
    CHECK(std::abs(total / 1000.0 - 1.0) < 0.02);
    CHECK(drop.forward(ones, false, rng).data == ones.data);
}

TEST_CASE("backprop matches central differences", "[neuralnet][gradient]")
{
    for (const auto &act : {ActivationKind::swish(), ActivationKind::sigmoid()})
    {
        ClassifierModel m(testing::downsized_spec(act), 11);
        const Tensor x = testing::random_tensor(3, 4, 8, 12);
        const auto res = testing::gradient_check(m, x, {0, 2, 1, 2}, 200, 1e-5, 13);
        INFO(to_string(act) << " max rel err " << res.max_rel_error);
        CHECK(res.max_rel_error < 1e-4);
    }

    NetworkSpec flat = testing::downsized_spec(ActivationKind::swish());
    flat.head = HeadKind::flatten;
    ClassifierModel f(flat, 4);
    CHECK(testing::gradient_check(f, testing::random_tensor(3, 3, 8, 2), {1, 0, 2}, 100, 1e-5, 5).max_rel_error < 1e-4);

    ClassifierModel mlp(NetworkSpec::mlp(6, {5, 4}, 3, ActivationKind::swish()), 3);
    const Tensor xf = testing::random_tensor(6, 5, 1, 8);
    CHECK(testing::gradient_check(mlp, xf, {0, 1, 2, 1, 0}, 60, 1e-5, 6).max_rel_error < 1e-4);
}

TEST_CASE("closed-form and mean-invariant gradients", "[neuralnet][gradient]")
{
    ClassifierModel m(testing::downsized_spec(ActivationKind::swish()), 21);
    Tensor zero(3, 1, 8, 8);
    Rng rng(0);
    m.loss_and_gradient(zero, {2}, false, rng);
    const RVector bias = m.gradient().tail(3);
    CHECK_THAT(bias[0], WithinAbs(1.0 / 3.0, 1e-15));
    CHECK_THAT(bias[1], WithinAbs(1.0 / 3.0, 1e-15));
    CHECK_THAT(bias[2], WithinAbs(1.0 / 3.0 - 1.0, 1e-15));

    const Tensor one = testing::random_tensor(3, 1, 8, 31);
    Tensor two(3, 2, 8, 8);
    two.data.leftCols(64) = one.data;
    two.data.rightCols(64) = one.data;
    const double l1 = m.loss_and_gradient(one, {1}, false, rng);
    const RVector g1 = m.gradient();
    const double l2 = m.loss_and_gradient(two, {1, 1}, false, rng);
    CHECK_THAT(l2, WithinAbs(l1, 1e-14));
    CHECK((m.gradient() - g1).cwiseAbs().maxCoeff() < 1e-14);

    CHECK_THROWS_AS(m.loss_and_gradient(one, {3}, false, rng), Error);
    m.parameters()[0] = std::nan("");
    try
    {
        m.loss_and_gradient(one, {1}, false, rng);
        FAIL("expected divergence");
    }
    catch (const Error &e)
    {
        CHECK(e.kind() == ErrorKind::training_diverged);
    }
}

TEST_CASE("head-only fine-tuning touches the final layer only", "[neuralnet]")
{
    ClassifierModel m(testing::downsized_spec(ActivationKind::relu()), 8);
    m.freeze_all_but_head(true);
    Rng rng(0);
    m.loss_and_gradient(testing::random_tensor(3, 2, 8, 4), {0, 1}, false, rng);
    const auto head = static_cast<Eigen::Index>(m.head_parameter_count());
    CHECK(m.gradient().head(m.gradient().size() - head).cwiseAbs().maxCoeff() == 0.0);
    CHECK(m.gradient().tail(head).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("optimizers", "[neuralnet][optimizer]")
{
    for (auto k : {OptimizerKind::sgdm, OptimizerKind::adam, OptimizerKind::rmsprop})
    {
        INFO(to_string(k));
        CHECK(quadratic_run(k, 500, 1e-2) < 1e-3);
    }

    OptimizerParams plain;
    plain.momentum = 0.0;
    Optimizer sgd(OptimizerKind::sgdm, 3, plain);
    RVector p(3), g(3);
    p << 1.0, -2.0, 0.5;
    g << 0.3, 0.1, -4.0;
    for (int i = 0; i < 3; ++i)
    {
        const RVector expect = p - 0.05 * g;
        sgd.step(p, g, 0.05);
        CHECK(p == expect);
    }

    for (double scale : {1e-4, 1.0, 1e4})
    {
        Optimizer adam(OptimizerKind::adam, 1);
        RVector q = RVector::Zero(1);
        adam.step(q, RVector::Constant(1, scale), 1e-3);
        CHECK_THAT(std::abs(q[0]), Catch::Matchers::WithinRel(1e-3, 1e-3));
    }

    CHECK(parse_optimizer("ADAM") == OptimizerKind::adam);
    CHECK_THROWS_AS(parse_optimizer("lbfgs"), Error);
}

TEST_CASE("training converges on separable data and is deterministic", "[neuralnet][train]")
{
    const Dataset d = separable_blobs(400, 3);
    FeatureSource src(d);
    TrainConfig cfg;
    cfg.minibatch = 32;
    cfg.initial_lr = 1e-2;
    cfg.seed = 4;
    ClassifierModel m(NetworkSpec::mlp(2, {}, 2), 1);
    train(m, src, &src, cfg);
    CHECK(evaluate_accuracy(m, src) >= 0.99);
    REQUIRE(!m.training_log.empty());
    CHECK(m.training_log.back().phase == "validation_final");

    cfg.shuffle = false;
    NetworkSpec hidden = NetworkSpec::mlp(2, {8}, 2, ActivationKind::swish(), 0.4);
    ClassifierModel a(hidden, 7), b(hidden, 7);
    train(a, src, nullptr, cfg);
    train(b, src, nullptr, cfg);
    REQUIRE(a.training_log.size() == b.training_log.size());
    for (std::size_t i = 0; i < a.training_log.size(); ++i)
        CHECK(a.training_log[i].loss == b.training_log[i].loss);
    CHECK(a.parameters() == b.parameters());

    TrainConfig bad = cfg;
    bad.initial_lr = 0.0;
    CHECK_THROWS_AS(train(a, src, nullptr, bad), Error);
}

TEST_CASE("small inception network learns an image rule", "[neuralnet][train]")
{
    // Class is whether the bright square sits in the top or the bottom half.
    Dataset d;
    d.class_count = 2;
    const std::size_t n = 256;
    Rng rng(5);
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    d.features.resize(static_cast<Eigen::Index>(n), 2);
    for (std::size_t i = 0; i < n; ++i)
    {
        d.labels.push_back(static_cast<std::uint8_t>(i % 2));
        d.realization_ids.push_back(i);
    }
    struct Squares final : SampleSource
    {
        const Dataset *d;
        std::size_t size() const override { return d->size(); }
        std::uint8_t label(std::size_t i) const override { return d->labels[i]; }
        Tensor batch(const std::vector<std::size_t> &idx) const override
        {
            Tensor t(3, idx.size(), 8, 8);
            for (std::size_t b = 0; b < idx.size(); ++b)
            {
                const std::size_t y0 = d->labels[idx[b]] ? 5 : 1;
                const std::size_t x0 = idx[b] % 5;
                for (std::size_t y = y0; y < y0 + 2; ++y)
                    for (std::size_t x = x0; x < x0 + 2; ++x)
                        t.at(0, b, y, x) = 1.0;
            }
            return t;
        }
    } src;
    src.d = &d;

    NetworkSpec s = testing::downsized_spec(ActivationKind::swish());
    s.n_classes = 2;
    s.head = HeadKind::flatten;
    ClassifierModel m(s, 2);
    TrainConfig cfg;
    cfg.minibatch = 16;
    cfg.initial_lr = 1e-2;
    train(m, src, &src, cfg);
    CHECK(evaluate_accuracy(m, src) >= 0.99);
}

TEST_CASE("accuracy metrics", "[neuralnet][metrics]")
{
    const Dataset blobs = separable_blobs(60, 9);
    Dataset d = blobs;
    d.class_count = 5;
    for (std::size_t i = 0; i < d.size(); ++i)
        d.labels[i] = static_cast<std::uint8_t>(i % 5);
    FeatureSource src(d);

    ClassifierModel uniform(NetworkSpec::mlp(2, {4}, 5), 1);
    uniform.zero_final_layer();
    CHECK(evaluate_accuracy(uniform, src) == 0.2); // every tie resolves to class 0

    // Relabel classes by a permutation, permuting the output layer the same way.
    ClassifierModel m(NetworkSpec::mlp(2, {4}, 5), 3);
    const double base = evaluate_accuracy(m, src);
    const std::size_t perm[5] = {3, 0, 4, 1, 2};
    ClassifierModel mp = m;
    const Eigen::Index off = mp.parameters().size() - 25; // 5x4 weights then 5 biases
    for (std::size_t k = 0; k < 5; ++k)
    {
        for (Eigen::Index j = 0; j < 4; ++j)
            mp.parameters()[off + static_cast<Eigen::Index>(perm[k]) * 4 + j] = m.parameters()[off + static_cast<Eigen::Index>(k) * 4 + j];
        mp.parameters()[off + 20 + static_cast<Eigen::Index>(perm[k])] = m.parameters()[off + 20 + static_cast<Eigen::Index>(k)];
    }
    Dataset dp = d;
    for (auto &l : dp.labels)
        l = static_cast<std::uint8_t>(perm[l]);
    FeatureSource srcp(dp);
    CHECK(evaluate_accuracy(mp, srcp) == base);

    // Positive rescaling of every logit.
    ClassifierModel ms = m;
    ms.parameters().tail(25) *= 7.5;
    CHECK(evaluate_accuracy(ms, src) == base);

    CHECK(balanced_accuracy({0, 0, 1, 1}, {0, 1, 1, 1}, 3) == Catch::Approx(0.5 * (1.0 + 2.0 / 3.0)));
    CHECK(accuracy({2, 1}, {2, 2}) == 0.5);
}

TEST_CASE("model checkpoint and log round trip", "[neuralnet][io]")
{
    ClassifierModel m(testing::downsized_spec(ActivationKind::leaky_relu(0.05)), 3);
    std::stringstream buf;
    write_model(buf, m);
    ClassifierModel back = read_model(buf);
    CHECK(back.spec() == m.spec());
    CHECK(back.parameters() == m.parameters());

    std::string bytes = buf.str();
    bytes[0] = 'X';
    std::stringstream bad(bytes);
    CHECK_THROWS_AS(read_model(bad), Error);

    std::ostringstream log;
    write_training_log(log, {{1, 1, "train", 0.5, 0.25}});
    CHECK(log.str().rfind("iteration,epoch,phase,loss,accuracy\n1,1,train,0.5,0.25", 0) == 0);
}

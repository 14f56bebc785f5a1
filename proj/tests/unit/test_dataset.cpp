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

#include <set>
#include <sstream>

#include "beamsel/dataset.hpp"
#include "beamsel/image.hpp"

using namespace beamsel;
using Catch::Matchers::WithinAbs;

namespace
{
    Dataset toy_dataset(std::size_t realizations, std::size_t per_realization)
    {
        Dataset d;
        d.class_count = 3;
        d.features = RMatrix::Zero(static_cast<Eigen::Index>(realizations * per_realization), 2);
        for (std::size_t r = 0; r < realizations; ++r)
            for (std::size_t b = 0; b < per_realization; ++b)
            {
                d.features(static_cast<Eigen::Index>(d.labels.size()), 0) = static_cast<double>(r);
                d.labels.push_back(static_cast<std::uint8_t>(b % 3));
                d.realization_ids.push_back(r);
            }
        return d;
    }
}

TEST_CASE("normalize closed forms", "[dataset]")
{
    RMatrix m(3, 2);
    m << 1, 5, 2, 5, 3, 5;
    NormalizationStats st;
    const RMatrix n = normalize(m, &st);
    CHECK_THAT(n(0, 0), WithinAbs(-0.5, 1e-15));
    CHECK_THAT(n(1, 0), WithinAbs(0.0, 1e-15));
    CHECK_THAT(n(2, 0), WithinAbs(0.5, 1e-15));
    CHECK(n.col(1).isZero());
    CHECK(st.constant_columns == std::vector<std::size_t>{1});

    CHECK_THROWS_AS(normalize(RMatrix::Ones(1, 3)), Error);
}

TEST_CASE("normalized paper-scale features are centred with unit range", "[dataset][property]")
{
    ChannelConfig c;
    c.n_tx = 256;
    c.n_rx = 64;
    Rng rng(3);
    RMatrix raw(200, static_cast<Eigen::Index>(raw_feature_count(c)));
    for (Eigen::Index i = 0; i < raw.rows(); ++i)
        raw.row(i) = raw_features(generate_realization(c, rng)).transpose();
    CHECK(raw.cols() == 34);
    const RMatrix n = normalize(raw);
    for (Eigen::Index j = 0; j < n.cols(); ++j)
    {
        CHECK(std::abs(n.col(j).mean()) < 1e-12);
        CHECK(n.col(j).maxCoeff() - n.col(j).minCoeff() <= 1.0 + 1e-12);
        CHECK(n.col(j).cwiseAbs().maxCoeff() <= 1.0);
    }
    // unit-range, zero-mean data is a fixed point
    CHECK((normalize(n) - n).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("GMM degenerate and closed-form fits", "[dataset][gmm]")
{
    std::vector<GmmPoint> same(10, GmmPoint{0.1, -0.2, 0.7});
    GmmOptions o;
    o.components = 1;
    const auto g = fit_gmm(same, o);
    REQUIRE(g.components.size() == 1);
    CHECK(g.components[0].weight == 1.0);
    for (std::size_t d = 0; d < 3; ++d)
        CHECK_THAT(g.components[0].mean[d], WithinAbs(same[0][d], 1e-15));

    Rng rng(12);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<GmmPoint> cloud;
    for (int i = 0; i < 500; ++i)
        cloud.push_back({0.3 + 0.1 * n(rng), -0.1 + 0.2 * n(rng), 1.0 + 0.05 * n(rng)});
    const auto one = fit_gmm(cloud, o);
    for (std::size_t d = 0; d < 3; ++d)
    {
        double mean = 0.0, var = 0.0;
        for (const auto &p : cloud)
            mean += p[d];
        mean /= static_cast<double>(cloud.size());
        for (const auto &p : cloud)
            var += (p[d] - mean) * (p[d] - mean);
        var /= static_cast<double>(cloud.size());
        CHECK_THAT(one.components[0].mean[d], WithinAbs(mean, 1e-9));
        CHECK_THAT(one.components[0].sigma[d], WithinAbs(std::sqrt(var), 1e-9));
    }
    CHECK(one.flattened().size() == 8);
    CHECK(one.amplitude > 0.0);

    CHECK_THROWS_AS(fit_gmm(std::vector<GmmPoint>(2), GmmOptions{3}), Error);
}

TEST_CASE("GMM recovers a well-separated two-component mixture", "[dataset][gmm]")
{
    Rng rng(5);
    std::normal_distribution<double> n(0.0, 0.05);
    std::bernoulli_distribution pick(0.3);
    std::vector<GmmPoint> pts;
    for (int i = 0; i < 2000; ++i)
    {
        if (pick(rng))
            pts.push_back({-0.3 + n(rng), 0.2 + n(rng), 0.5 + n(rng)});
        else
            pts.push_back({0.3 + n(rng), -0.2 + n(rng), 1.5 + n(rng)});
    }
    GmmOptions o;
    o.components = 2;
    o.seed = 9;
    const auto g = fit_gmm(pts, o);
    const auto &a = g.components[0].mean[0] < g.components[1].mean[0] ? g.components[0] : g.components[1];
    const auto &b = &a == &g.components[0] ? g.components[1] : g.components[0];
    CHECK_THAT(a.weight, WithinAbs(0.3, 0.05));
    CHECK_THAT(b.weight, WithinAbs(0.7, 0.05));
    CHECK_THAT(a.mean[0], WithinAbs(-0.3, 0.05));
    CHECK_THAT(a.mean[1], WithinAbs(0.2, 0.05));
    CHECK_THAT(a.mean[2], WithinAbs(0.5, 0.05));
    CHECK_THAT(b.mean[0], WithinAbs(0.3, 0.05));
    CHECK_THAT(b.mean[1], WithinAbs(-0.2, 0.05));
    CHECK_THAT(b.mean[2], WithinAbs(1.5, 0.05));
    CHECK_THAT(a.weight + b.weight, WithinAbs(1.0, 1e-9));
}

TEST_CASE("EM log-likelihood never decreases", "[dataset][gmm][property]")
{
    ChannelConfig c;
    for (std::uint64_t seed = 0; seed < 20; ++seed)
    {
        Rng rng(seed);
        std::vector<GmmPoint> pts;
        for (int r = 0; r < 8; ++r)
        {
            const auto pr = gmm_points(generate_realization(c, rng));
            pts.insert(pts.end(), pr.begin(), pr.end());
        }
        GmmOptions o;
        o.components = 2 + seed % 3;
        o.seed = seed;
        const auto g = fit_gmm(pts, o);
        for (std::size_t i = 1; i < g.log_likelihood.size(); ++i)
            CHECK(g.log_likelihood[i] >= g.log_likelihood[i - 1] - 1e-9);
        double w = 0.0;
        for (const auto &comp : g.components)
        {
            w += comp.weight;
            for (double s : comp.sigma)
                CHECK(s > 0.0);
        }
        CHECK_THAT(w, WithinAbs(1.0, 1e-9));
    }
}

TEST_CASE("GMM component collapse", "[dataset][gmm]")
{
    std::vector<GmmPoint> pts;
    for (int i = 0; i < 5; ++i)
    {
        pts.push_back({0.0, 0.0, 0.0});
        pts.push_back({1.0, 1.0, 1.0});
    }
    GmmOptions o;
    o.components = 3;
    o.max_iter = 50;
    CHECK_THROWS_AS(fit_gmm(pts, o), Error);

    o.variance_floor = 1e-3;
    const auto g = fit_gmm(pts, o);
    CHECK(g.components.size() == 3);
}

TEST_CASE("labeling follows the oracle's RF chain order", "[dataset]")
{
    ChannelConfig c;
    c.n_tx = 8;
    c.n_rx = 4;
    c.n_clusters = 2;
    c.n_rays = 1;
    auto grid = [](double i, double n) { return (i - (n - 1.0) / 2.0) / n; };
    const auto r = make_realization(c,
                                    {PathComponent{0, 0, {1.0, 0.0}, grid(3, 8), grid(0, 4)},
                                     PathComponent{1, 0, {0.0, 0.8}, grid(7, 8), grid(2, 4)}},
                                    0.0);
    SelectionConfig sel;
    sel.n_rf_tx = 2;
    sel.n_rf_rx = 2;
    const auto out = label_realization(r, sel, 10.0, 4);
    REQUIRE(out.oracle.selection.tx_beams == std::vector<std::size_t>{3, 7});
    REQUIRE(out.tx.size() == 8);
    for (const auto &s : out.tx)
    {
        const std::uint8_t expect = s.beam == 3 ? 1 : s.beam == 7 ? 2 : 0;
        CHECK(s.label == expect);
        CHECK(s.realization_id == 4);
        CHECK(s.features().size() == static_cast<Eigen::Index>(raw_feature_count(c) + 2));
        CHECK(s.energy_fraction >= 0.0);
        CHECK(s.energy_fraction <= 1.0);
    }
    for (const auto &s : out.rx)
        CHECK(s.label == (s.beam == 0 ? 1 : s.beam == 2 ? 2 : 0));

    SelectionConfig forced = sel;
    forced.candidate_pool_tx = 2;
    forced.candidate_pool_rx = 2;
    for (const auto &s : label_realization(r, forced, 10.0).tx)
        CHECK(s.label != 0);
}

TEST_CASE("label histogram: exactly n_rf assigned beams per realization", "[dataset][property]")
{
    DatasetBuildOptions o;
    o.channel.n_tx = 16;
    o.channel.n_rx = 4;
    o.selection.n_rf_tx = 4;
    o.selection.n_rf_rx = 4;
    o.n_realizations = 1000;
    o.seed = 17;
    const auto b = build_datasets(o);
    REQUIRE(b.tx.size() == 16000);
    const auto h = b.tx.class_histogram();
    CHECK(h[0] * 16 == b.tx.size() * 12);
    for (std::size_t k = 1; k <= 4; ++k)
        CHECK(h[k] == 1000);

    std::map<std::uint64_t, std::multiset<int>> per;
    for (std::size_t i = 0; i < b.tx.size(); ++i)
        if (b.tx.labels[i])
            per[b.tx.realization_ids[i]].insert(b.tx.labels[i]);
    for (const auto &[id, labels] : per)
        CHECK(labels == std::multiset<int>{1, 2, 3, 4});

    CHECK(b.tx.feature_count() == 36);
    CHECK(b.rx.size() == 4000);
    CHECK(b.gmm.size() == 1000);
    CHECK(b.gmm[0].size() == 1 + 7 * 4);
}

TEST_CASE("bicubic kernel properties", "[dataset][image]")
{
    CHECK(catmull_rom(0.0) == 1.0);
    CHECK(catmull_rom(1.0) == 0.0);
    CHECK(catmull_rom(2.0) == 0.0);
    CHECK_THAT(catmull_rom(0.5) * 2 + catmull_rom(1.5) * 2, WithinAbs(1.0, 1e-15));

    const RMatrix constant = RMatrix::Constant(9, 13, 0.37);
    CHECK((bicubic_resize(constant, 32, 32).array() - 0.37).abs().maxCoeff() < 1e-9);

    for (auto [in, out] : {std::pair<int, int>{36, 32}, {17, 32}, {34, 224}, {5, 4}})
    {
        RMatrix ramp(in, in);
        for (int i = 0; i < in; ++i)
            for (int j = 0; j < in; ++j)
                ramp(i, j) = 0.2 + 0.03 * i - 0.011 * j;
        const RMatrix r = bicubic_resize(ramp, static_cast<std::size_t>(out), static_cast<std::size_t>(out));
        const double s = static_cast<double>(in - 1) / static_cast<double>(out - 1);
        double err = 0.0;
        for (int y = 0; y < out; ++y)
            for (int x = 0; x < out; ++x)
                err = std::max(err, std::abs(r(y, x) - (0.2 + 0.03 * y * s - 0.011 * x * s)));
        CHECK(err < 1e-6);
    }

    Rng rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    RMatrix src(34, 34);
    for (Eigen::Index i = 0; i < src.size(); ++i)
        src(i) = u(rng);
    const RMatrix big = bicubic_resize(src, 224, 224);
    CHECK_THAT(big(0, 0), WithinAbs(src(0, 0), 1e-9));
    CHECK_THAT(big(223, 223), WithinAbs(src(33, 33), 1e-9));
    CHECK_THAT(big(0, 223), WithinAbs(src(0, 33), 1e-9));
}

TEST_CASE("image expansion", "[dataset][image]")
{
    const ImageTensor c = expand_to_image(RVector::Constant(36, 0.5), 32, 7);
    CHECK(c.side == 32);
    CHECK(c.source_sample_id == 7);
    CHECK(c.data.size() == 3 * 32 * 32);
    for (std::size_t y = 0; y < 32; ++y)
        for (std::size_t x = 0; x < 32; ++x)
        {
            CHECK_THAT(c.at(0, y, x), WithinAbs(0.25, 1e-9));
            CHECK(c.at(1, y, x) == 0.0);
            CHECK(c.at(2, y, x) == 0.0);
        }

    Rng rng(2);
    std::normal_distribution<double> n(0.0, 0.3);
    RVector v(36);
    for (Eigen::Index i = 0; i < 36; ++i)
        v(i) = n(rng);
    const ImageTensor img = expand_to_image(v, 32);
    double e0 = 0.0, e12 = 0.0;
    for (std::size_t i = 0; i < 32 * 32; ++i)
    {
        e0 += img.data[i] * img.data[i];
        e12 += std::abs(img.data[32 * 32 + i]) + std::abs(img.data[2 * 32 * 32 + i]);
    }
    CHECK(e0 > 0.0);
    CHECK(e12 == 0.0);
    CHECK(img.at(0, 0, 0) == Catch::Approx(v(0) * v(0)).margin(1e-12));

    const ImageTensor zero = expand_to_image(RVector::Zero(36), 32);
    CHECK(std::all_of(zero.data.begin(), zero.data.end(), [](double x) { return x == 0.0; }));

    const ImageTensor tiled = expand_to_image(v, 16, 0, Embedding::tiling);
    CHECK_THAT(tiled.at(0, 5, 0), WithinAbs(v(0), 1e-12));

    CHECK_THROWS_AS(expand_to_image(v, 3), Error);
}

TEST_CASE("dataset split by realization", "[dataset]")
{
    const Dataset d = toy_dataset(10, 4);
    const auto [train, val] = split_dataset(d, 0.7, 3);
    const std::set<std::uint64_t> tr(train.realization_ids.begin(), train.realization_ids.end());
    const std::set<std::uint64_t> va(val.realization_ids.begin(), val.realization_ids.end());
    CHECK(tr.size() == 7);
    CHECK(va.size() == 3);
    CHECK(train.size() == 28);
    CHECK(val.size() == 12);
    for (auto id : tr)
        CHECK(va.count(id) == 0);

    const auto again = split_dataset(d, 0.7, 3);
    CHECK(again.first.realization_ids == train.realization_ids);
    CHECK(again.first.features == train.features);

    const auto [a, b] = split_dataset(toy_dataset(2, 3), 0.99, 1);
    CHECK(a.size() == 3);
    CHECK(b.size() == 3);

    CHECK_THROWS_AS(split_dataset(toy_dataset(1, 5), 0.5, 1), Error);
    CHECK_THROWS_AS(split_dataset(d, 1.0, 1), Error);
    CHECK_THROWS_AS(split_dataset(d, 0.0, 1), Error);
}

TEST_CASE("BSDS record and CSV export", "[dataset][io]")
{
    const Dataset d = toy_dataset(3, 2);
    std::stringstream buf;
    write_dataset(buf, d);
    const std::string bytes = buf.str();
    CHECK(bytes.substr(0, 4) == "BSDS");
    CHECK(bytes.size() == 4 + 4 + 4 + 4 + 8 + d.size() * (8 + 1 + 2 * 8));
    const Dataset back = read_dataset(buf);
    CHECK(back.features == d.features);
    CHECK(back.labels == d.labels);
    CHECK(back.realization_ids == d.realization_ids);
    CHECK(back.class_count == 3);

    std::ostringstream csv;
    write_dataset_csv(csv, d);
    CHECK(csv.str().rfind("realization_id,label,f0,f1\n0,0,0,0\n", 0) == 0);

    std::stringstream bad("BSDX");
    CHECK_THROWS_AS(read_dataset(bad), Error);

    NormalizationStats st = NormalizationStats::fit(d.features);
    const auto st2 = normalization_from_json(to_json(st));
    CHECK(st2.mean == st.mean);
    CHECK(st2.range == st.range);
}

TEST_CASE("Evaluation rows reproduce the stored training rows", "[dataset][eval]")
{
    DatasetBuildOptions opt;
    opt.channel.n_tx = 8;
    opt.channel.n_rx = 4;
    opt.selection.n_rf_tx = 2;
    opt.selection.n_rf_rx = 2;
    opt.n_realizations = 4;
    opt.seed = 11;
    const auto bundle = build_datasets(opt);

    const std::uint64_t id = 2;
    Rng rng(derive_seed(opt.seed, id));
    const auto real = generate_realization(opt.channel, rng);
    const RVector base = bundle.stats.apply(
        realization_base_features(real, opt.append_gmm, opt.gmm_components, derive_seed(opt.seed ^ 0x6A4D4DULL, id)));

    for (bool tx : {true, false})
    {
        const Dataset &d = tx ? bundle.tx : bundle.rx;
        const auto rows = beam_feature_rows(real, opt.selection, tx, base);
        std::vector<Eigen::Index> stored;
        for (std::size_t i = 0; i < d.size(); ++i)
            if (d.realization_ids[i] == id)
                stored.push_back(static_cast<Eigen::Index>(i));
        REQUIRE(stored.size() == rows.beams.size());
        for (std::size_t i = 0; i < stored.size(); ++i)
            CHECK((rows.features.row(static_cast<Eigen::Index>(i)) - d.features.row(stored[i])).cwiseAbs().maxCoeff() <
                  1e-12);
    }
}

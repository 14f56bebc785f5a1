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

#include "beamsel/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "beamsel/binary_io.hpp"

namespace beamsel
{
    namespace
    {
        using Index = Eigen::Index;
        constexpr std::uint32_t baseline_version = 1;

        void check_features(const RMatrix &queries, Index expected)
        {
            if (queries.cols() != expected)
                throw Error(ErrorKind::invalid_argument, "query feature count " + std::to_string(queries.cols()) +
                                                             " does not match model (" + std::to_string(expected) + ")");
        }

        std::size_t row_argmax(const RMatrix &s, Index r)
        {
            Index best = 0;
            for (Index c = 1; c < s.cols(); ++c)
                if (s(r, c) > s(r, best))
                    best = c;
            return static_cast<std::size_t>(best);
        }

        std::vector<std::size_t> all_argmax(const RMatrix &s)
        {
            std::vector<std::size_t> out(static_cast<std::size_t>(s.rows()));
            for (Index r = 0; r < s.rows(); ++r)
                out[static_cast<std::size_t>(r)] = row_argmax(s, r);
            return out;
        }

        void put_header(std::ostream &out, const std::string &tag, const nlohmann::json &meta)
        {
            binio::put_magic(out, "BSBL");
            binio::put<std::uint32_t>(out, baseline_version);
            binio::put_string(out, tag);
            binio::put_string(out, meta.dump());
        }

        nlohmann::json get_header(std::istream &in, const std::string &want)
        {
            binio::expect_magic(in, "BSBL");
            const auto version = binio::get<std::uint32_t>(in);
            if (version != baseline_version)
                throw Error(ErrorKind::io, "unsupported baseline container version " + std::to_string(version));
            const std::string tag = binio::get_string(in);
            if (tag != want)
                throw Error(ErrorKind::io, "baseline container holds '" + tag + "', expected '" + want + "'");
            try
            {
                return nlohmann::json::parse(binio::get_string(in));
            }
            catch (const nlohmann::json::exception &e)
            {
                throw Error(ErrorKind::io, std::string("corrupt baseline header: ") + e.what());
            }
        }

        void put_matrix(std::ostream &out, const RMatrix &m)
        {
            for (Index r = 0; r < m.rows(); ++r)
                for (Index c = 0; c < m.cols(); ++c)
                    binio::put<double>(out, m(r, c));
        }

        RMatrix get_matrix(std::istream &in, std::size_t rows, std::size_t cols)
        {
            RMatrix m(static_cast<Index>(rows), static_cast<Index>(cols));
            for (Index r = 0; r < m.rows(); ++r)
                for (Index c = 0; c < m.cols(); ++c)
                    m(r, c) = binio::get<double>(in);
            return m;
        }
    }

    // ---------------------------------------------------------------- k-NN

    KnnModel knn_fit(const Dataset &train, std::size_t k)
    {
        if (k == 0 || k > train.size())
            throw Error(ErrorKind::invalid_argument, "k must lie in [1, training size]");
        KnnModel m;
        m.k = k;
        m.n_classes = train.class_count;
        m.features = train.features;
        m.labels = train.labels;
        for (auto l : m.labels)
            m.n_classes = std::max<std::size_t>(m.n_classes, l + std::size_t{1});
        return m;
    }

    RMatrix knn_scores(const KnnModel &m, const RMatrix &queries)
    {
        check_features(queries, m.features.cols());
        RMatrix scores = RMatrix::Zero(queries.rows(), static_cast<Index>(m.n_classes));
        const std::size_t n = m.labels.size();
        std::vector<std::pair<double, std::size_t>> d(n);
        for (Index q = 0; q < queries.rows(); ++q)
        {
            const RVector dist = (m.features.rowwise() - queries.row(q)).rowwise().squaredNorm();
            for (std::size_t i = 0; i < n; ++i)
                d[i] = {dist[static_cast<Index>(i)], i};
            // Pair ordering puts the lower training index first among equal distances.
            std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(m.k - 1), d.end());
            for (std::size_t j = 0; j < m.k; ++j)
                scores(q, m.labels[d[j].second]) += 1.0;
        }
        return scores / static_cast<double>(m.k);
    }

    std::vector<std::size_t> knn_predict(const KnnModel &m, const RMatrix &queries)
    {
        return all_argmax(knn_scores(m, queries));
    }

    std::size_t knn_predict(const KnnModel &m, const RVector &sample)
    {
        return knn_predict(m, RMatrix(sample.transpose())).front();
    }

    // ---------------------------------------------------------------- linear SVM

    LinearSvmModel svm_train(const Dataset &train, std::size_t n_classes, const SvmConfig &cfg)
    {
        if (train.size() == 0)
            throw Error(ErrorKind::invalid_argument, "empty training set");
        if (!(cfg.lambda > 0.0) || cfg.epochs == 0 || cfg.minibatch == 0 || !(cfg.initial_lr > 0.0))
            throw Error(ErrorKind::config, "svm settings must be positive");
        const Index d = train.features.cols();
        const std::size_t n = train.size();
        const auto k = static_cast<Index>(n_classes);

        LinearSvmModel m;
        m.lambda = cfg.lambda;
        m.weights = RMatrix::Zero(k, d);
        m.bias = RVector::Zero(k);
        m.present.assign(n_classes, 0);
        std::vector<std::size_t> count(n_classes, 0);
        for (auto l : train.labels)
        {
            if (l >= n_classes)
                throw Error(ErrorKind::invalid_argument, "label out of range");
            m.present[l] = 1;
            ++count[l];
        }

        // Per-class weight of a positive / negative sample in that class's binary problem.
        RVector pos_w = RVector::Ones(k), neg_w = RVector::Ones(k);
        if (cfg.balance_classes)
            for (Index c = 0; c < k; ++c)
            {
                const auto nk = static_cast<double>(count[static_cast<std::size_t>(c)]);
                if (nk > 0)
                    pos_w[c] = static_cast<double>(n) / (2.0 * nk);
                if (nk < static_cast<double>(n))
                    neg_w[c] = static_cast<double>(n) / (2.0 * (static_cast<double>(n) - nk));
            }

        Rng rng(cfg.seed);
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::size_t t = 0;
        RMatrix gw(k, d);
        RVector gb(k);
        for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch)
        {
            std::shuffle(order.begin(), order.end(), rng);
            for (std::size_t start = 0; start < n; start += cfg.minibatch)
            {
                const std::size_t b = std::min(cfg.minibatch, n - start);
                ++t;
                gw = cfg.lambda * m.weights;
                gb.setZero();
                for (std::size_t j = start; j < start + b; ++j)
                {
                    const std::size_t i = order[j];
                    const auto x = train.features.row(static_cast<Index>(i));
                    const RVector f = m.weights * x.transpose() + m.bias;
                    for (Index c = 0; c < k; ++c)
                    {
                        const bool positive = train.labels[i] == c;
                        const double y = positive ? 1.0 : -1.0;
                        if (y * f[c] < 1.0)
                        {
                            const double s = (positive ? pos_w[c] : neg_w[c]) * y / static_cast<double>(b);
                            gw.row(c) -= s * x;
                            gb[c] -= s;
                        }
                    }
                }
                const double lr = cfg.initial_lr / std::sqrt(static_cast<double>(t));
                m.weights -= lr * gw;
                m.bias -= lr * gb;
            }
            if (!m.weights.allFinite() || !m.bias.allFinite())
                throw Error(ErrorKind::training_diverged, "svm weights became non-finite");
        }
        return m;
    }

    RMatrix svm_scores(const LinearSvmModel &m, const RMatrix &queries)
    {
        check_features(queries, m.weights.cols());
        RMatrix s = (queries * m.weights.transpose()).rowwise() + m.bias.transpose();
        for (std::size_t c = 0; c < m.present.size(); ++c)
            if (!m.present[c])
                s.col(static_cast<Index>(c)).setConstant(-std::numeric_limits<double>::infinity());
        return s;
    }

    std::vector<std::size_t> svm_predict(const LinearSvmModel &m, const RMatrix &queries)
    {
        return all_argmax(svm_scores(m, queries));
    }

    std::size_t svm_predict(const LinearSvmModel &m, const RVector &sample)
    {
        return svm_predict(m, RMatrix(sample.transpose())).front();
    }

    // ---------------------------------------------------------------- MLP

    nn::ClassifierModel mlp_train(const Dataset &train, const Dataset *val, std::size_t n_classes, const MlpConfig &cfg)
    {
        if (train.size() == 0)
            throw Error(ErrorKind::invalid_argument, "empty training set");
        nn::ClassifierModel m(nn::NetworkSpec::mlp(train.feature_count(), cfg.hidden, n_classes, nn::ActivationKind::relu()),
                              cfg.init_seed);
        const nn::FeatureSource tr(train);
        if (val)
        {
            const nn::FeatureSource va(*val);
            nn::train(m, tr, &va, cfg.train);
        }
        else
            nn::train(m, tr, nullptr, cfg.train);
        return m;
    }

    RMatrix mlp_scores(nn::ClassifierModel &m, const RMatrix &queries)
    {
        check_features(queries, static_cast<Index>(m.spec().input_features));
        std::vector<std::size_t> idx(static_cast<std::size_t>(queries.rows()));
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        RMatrix out(queries.rows(), static_cast<Index>(m.spec().n_classes));
        for (std::size_t start = 0; start < idx.size(); start += 512)
        {
            const std::size_t b = std::min<std::size_t>(512, idx.size() - start);
            const std::vector<std::size_t> part(idx.begin() + static_cast<std::ptrdiff_t>(start),
                                                idx.begin() + static_cast<std::ptrdiff_t>(start + b));
            out.middleRows(static_cast<Index>(start), static_cast<Index>(b)) = m.predict_proba(nn::rows_to_tensor(queries, part));
        }
        return out;
    }

    std::vector<std::size_t> mlp_predict(nn::ClassifierModel &m, const RMatrix &queries)
    {
        return all_argmax(mlp_scores(m, queries));
    }

    // ---------------------------------------------------------------- containers

    void write_baseline(std::ostream &out, const KnnModel &m)
    {
        put_header(out, "knn", {{"k", m.k}, {"n_classes", m.n_classes}, {"rows", m.features.rows()}, {"features", m.features.cols()}});
        put_matrix(out, m.features);
        for (auto l : m.labels)
            binio::put<std::uint8_t>(out, l);
        if (!out)
            throw Error(ErrorKind::io, "failed writing knn model");
    }

    void write_baseline(std::ostream &out, const LinearSvmModel &m)
    {
        put_header(out, "svm", {{"lambda", m.lambda}, {"n_classes", m.weights.rows()}, {"features", m.weights.cols()}, {"present", m.present}});
        put_matrix(out, m.weights);
        for (Index c = 0; c < m.bias.size(); ++c)
            binio::put<double>(out, m.bias[c]);
        if (!out)
            throw Error(ErrorKind::io, "failed writing svm model");
    }

    void write_baseline(std::ostream &out, const nn::ClassifierModel &m)
    {
        put_header(out, "mlp", nlohmann::json::object());
        nn::write_model(out, m);
    }

    std::string peek_baseline_tag(std::istream &in)
    {
        const auto pos = in.tellg();
        binio::expect_magic(in, "BSBL");
        binio::get<std::uint32_t>(in);
        std::string tag = binio::get_string(in);
        in.seekg(pos);
        return tag;
    }

    KnnModel read_knn(std::istream &in)
    {
        const auto h = get_header(in, "knn");
        KnnModel m;
        m.k = h.at("k").get<std::size_t>();
        m.n_classes = h.at("n_classes").get<std::size_t>();
        const auto rows = h.at("rows").get<std::size_t>();
        m.features = get_matrix(in, rows, h.at("features").get<std::size_t>());
        m.labels.resize(rows);
        for (auto &l : m.labels)
            l = binio::get<std::uint8_t>(in);
        return m;
    }

    LinearSvmModel read_svm(std::istream &in)
    {
        const auto h = get_header(in, "svm");
        LinearSvmModel m;
        m.lambda = h.at("lambda").get<double>();
        const auto k = h.at("n_classes").get<std::size_t>();
        m.present = h.at("present").get<std::vector<std::uint8_t>>();
        m.weights = get_matrix(in, k, h.at("features").get<std::size_t>());
        m.bias.resize(static_cast<Index>(k));
        for (Index c = 0; c < m.bias.size(); ++c)
            m.bias[c] = binio::get<double>(in);
        return m;
    }

    nn::ClassifierModel read_mlp(std::istream &in)
    {
        get_header(in, "mlp");
        return nn::read_model(in);
    }

    template <typename Model>
    void save_baseline(const std::string &path, const Model &m)
    {
        std::ofstream f(path, std::ios::binary);
        if (!f)
            throw Error(ErrorKind::io, "cannot open " + path + " for writing");
        write_baseline(f, m);
    }

    template void save_baseline<KnnModel>(const std::string &, const KnnModel &);
    template void save_baseline<LinearSvmModel>(const std::string &, const LinearSvmModel &);
    template void save_baseline<nn::ClassifierModel>(const std::string &, const nn::ClassifierModel &);

    namespace
    {
        std::ifstream open_baseline(const std::string &path)
        {
            std::ifstream f(path, std::ios::binary);
            if (!f)
                throw Error(ErrorKind::io, "cannot open baseline " + path);
            return f;
        }
    }

    std::string baseline_tag(const std::string &path)
    {
        auto f = open_baseline(path);
        return peek_baseline_tag(f);
    }

    KnnModel load_knn(const std::string &path)
    {
        auto f = open_baseline(path);
        return read_knn(f);
    }

    LinearSvmModel load_svm(const std::string &path)
    {
        auto f = open_baseline(path);
        return read_svm(f);
    }

    nn::ClassifierModel load_mlp(const std::string &path)
    {
        auto f = open_baseline(path);
        return read_mlp(f);
    }
}

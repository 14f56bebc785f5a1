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

#include "beamsel/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "beamsel/binary_io.hpp"

namespace beamsel
{
    std::size_t raw_feature_count(const ChannelConfig &cfg) { return 4 * cfg.n_paths() + 2; }

    RVector raw_features(const ChannelRealization &r)
    {
        const std::size_t p = r.paths.size();
        RVector f(static_cast<Eigen::Index>(4 * p + 2));
        f(0) = r.tx_power_db;
        f(1) = r.spatial.norm();
        for (std::size_t i = 0; i < p; ++i)
        {
            const auto k = static_cast<Eigen::Index>(i);
            const auto n = static_cast<Eigen::Index>(p);
            f(2 + k) = r.paths[i].aod_spatial;
            f(2 + n + k) = r.paths[i].aoa_spatial;
            f(2 + 2 * n + k) = r.paths[i].gain.real();
            f(2 + 3 * n + k) = r.paths[i].gain.imag();
        }
        return f;
    }

    NormalizationStats NormalizationStats::fit(const RMatrix &features)
    {
        if (features.rows() < 2)
            throw Error(ErrorKind::invalid_argument, "normalize: need at least two samples");
        NormalizationStats s;
        s.mean = features.colwise().mean().transpose();
        s.range = (features.colwise().maxCoeff() - features.colwise().minCoeff()).transpose();
        for (Eigen::Index c = 0; c < s.range.size(); ++c)
            if (!(s.range(c) > 0.0))
            {
                s.range(c) = 0.0;
                s.constant_columns.push_back(static_cast<std::size_t>(c));
            }
        return s;
    }

    RVector NormalizationStats::apply(const RVector &features) const
    {
        if (features.size() != mean.size())
            throw Error(ErrorKind::invalid_argument, "normalization: feature count mismatch");
        RVector out(features.size());
        for (Eigen::Index c = 0; c < features.size(); ++c)
            out(c) = range(c) > 0.0 ? (features(c) - mean(c)) / range(c) : 0.0;
        return out;
    }

    RMatrix NormalizationStats::apply(const RMatrix &features) const
    {
        if (features.cols() != mean.size())
            throw Error(ErrorKind::invalid_argument, "normalization: feature count mismatch");
        RMatrix out(features.rows(), features.cols());
        for (Eigen::Index c = 0; c < features.cols(); ++c)
        {
            if (range(c) > 0.0)
                out.col(c) = (features.col(c).array() - mean(c)) / range(c);
            else
                out.col(c).setZero();
        }
        return out;
    }

    RMatrix normalize(const RMatrix &features, NormalizationStats *stats)
    {
        NormalizationStats s = NormalizationStats::fit(features);
        RMatrix out = s.apply(features);
        if (stats)
            *stats = std::move(s);
        return out;
    }

    std::vector<GmmPoint> gmm_points(const ChannelRealization &r)
    {
        std::vector<GmmPoint> pts;
        pts.reserve(r.paths.size());
        for (const auto &p : r.paths)
            pts.push_back({p.aoa_spatial, p.aod_spatial, std::abs(p.gain)});
        return pts;
    }

    RVector LabeledSample::features() const
    {
        RVector f(base.size() + 2);
        f.head(base.size()) = base;
        f(base.size()) = beam_index;
        f(base.size() + 1) = energy_fraction;
        return f;
    }

    std::vector<std::pair<double, double>> beam_descriptors(const RVector &energy)
    {
        const auto n = energy.size();
        const double total = energy.sum();
        std::vector<std::pair<double, double>> out(static_cast<std::size_t>(n));
        for (Eigen::Index b = 0; b < n; ++b)
        {
            const double idx = n > 1 ? static_cast<double>(b) / static_cast<double>(n - 1) : 0.0;
            const double frac = total > 0.0 ? std::clamp(energy(b) / total, 0.0, 1.0) : 0.0;
            out[static_cast<std::size_t>(b)] = {idx, frac};
        }
        return out;
    }

    namespace
    {
        std::vector<LabeledSample> label_side(const RVector &base, const RVector &energy, const std::vector<std::size_t> &pool,
                                              const std::vector<std::size_t> &chosen, std::uint64_t realization_id)
        {
            const auto desc = beam_descriptors(energy);
            std::vector<LabeledSample> out;
            out.reserve(pool.size());
            for (std::size_t b : pool)
            {
                LabeledSample s;
                s.base = base;
                s.beam = b;
                s.beam_index = desc[b].first;
                s.energy_fraction = desc[b].second;
                s.realization_id = realization_id;
                const auto it = std::find(chosen.begin(), chosen.end(), b);
                s.label = it == chosen.end() ? 0 : static_cast<std::uint8_t>(1 + (it - chosen.begin()));
                out.push_back(std::move(s));
            }
            return out;
        }
    }

    RealizationLabels label_realization(const ChannelRealization &r, const SelectionConfig &cfg_in, double snr_db,
                                        std::uint64_t realization_id)
    {
        const auto &hb = r.beamspace;
        const SelectionConfig cfg = cfg_in.resolved(static_cast<std::size_t>(hb.cols()), static_cast<std::size_t>(hb.rows()));
        RealizationLabels out;
        out.oracle = oracle_select(hb, cfg, snr_db);
        const RVector base = raw_features(r);
        const RVector et = tx_beam_energy(hb);
        const RVector er = rx_beam_energy(hb);
        out.tx = label_side(base, et, top_energy_beams(et, cfg.candidate_pool_tx), out.oracle.selection.tx_beams, realization_id);
        out.rx = label_side(base, er, top_energy_beams(er, cfg.candidate_pool_rx), out.oracle.selection.rx_beams, realization_id);
        return out;
    }

    Dataset Dataset::subset(const std::vector<std::size_t> &rows) const
    {
        Dataset d;
        d.class_count = class_count;
        d.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
        d.labels.reserve(rows.size());
        d.realization_ids.reserve(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
        {
            d.features.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(rows[i]));
            d.labels.push_back(labels[rows[i]]);
            d.realization_ids.push_back(realization_ids[rows[i]]);
        }
        return d;
    }

    std::vector<std::size_t> Dataset::class_histogram() const
    {
        std::vector<std::size_t> h(class_count, 0);
        for (auto l : labels)
            if (l < class_count)
                ++h[l];
        return h;
    }

    std::pair<Dataset, Dataset> split_dataset(const Dataset &d, double train_fraction, std::uint64_t seed)
    {
        if (!(train_fraction > 0.0 && train_fraction < 1.0))
            throw Error(ErrorKind::invalid_argument, "split_dataset: train_fraction must be in (0, 1)");
        std::vector<std::uint64_t> ids;
        std::map<std::uint64_t, std::vector<std::size_t>> rows_of;
        for (std::size_t i = 0; i < d.size(); ++i)
        {
            auto &rows = rows_of[d.realization_ids[i]];
            if (rows.empty())
                ids.push_back(d.realization_ids[i]);
            rows.push_back(i);
        }
        if (ids.size() < 2)
            throw Error(ErrorKind::invalid_argument, "split_dataset: need at least two realizations");
        std::sort(ids.begin(), ids.end());
        Rng rng(seed);
        std::shuffle(ids.begin(), ids.end(), rng);
        auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(ids.size()) * train_fraction));
        n_train = std::clamp<std::size_t>(n_train, 1, ids.size() - 1);

        std::vector<std::size_t> train_rows, val_rows;
        for (std::size_t i = 0; i < ids.size(); ++i)
        {
            auto &dst = i < n_train ? train_rows : val_rows;
            const auto &rows = rows_of[ids[i]];
            dst.insert(dst.end(), rows.begin(), rows.end());
        }
        std::sort(train_rows.begin(), train_rows.end());
        std::sort(val_rows.begin(), val_rows.end());
        return {d.subset(train_rows), d.subset(val_rows)};
    }

    namespace
    {
        constexpr std::uint32_t dataset_version = 1;
    }

    void write_dataset(std::ostream &out, const Dataset &d)
    {
        binio::put_magic(out, "BSDS");
        binio::put<std::uint32_t>(out, dataset_version);
        binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(d.feature_count()));
        binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(d.class_count));
        binio::put<std::uint64_t>(out, d.size());
        for (std::size_t i = 0; i < d.size(); ++i)
        {
            binio::put<std::uint64_t>(out, d.realization_ids[i]);
            binio::put<std::uint8_t>(out, d.labels[i]);
            for (Eigen::Index c = 0; c < d.features.cols(); ++c)
                binio::put<double>(out, d.features(static_cast<Eigen::Index>(i), c));
        }
        if (!out)
            throw Error(ErrorKind::io, "write_dataset: stream failure");
    }

    Dataset read_dataset(std::istream &in)
    {
        binio::expect_magic(in, "BSDS");
        const auto version = binio::get<std::uint32_t>(in);
        if (version != dataset_version)
            throw Error(ErrorKind::io, "unsupported BSDS version " + std::to_string(version));
        Dataset d;
        const auto fc = binio::get<std::uint32_t>(in);
        d.class_count = binio::get<std::uint32_t>(in);
        const auto n = binio::get<std::uint64_t>(in);
        d.features.resize(static_cast<Eigen::Index>(n), fc);
        d.labels.resize(n);
        d.realization_ids.resize(n);
        for (std::size_t i = 0; i < n; ++i)
        {
            d.realization_ids[i] = binio::get<std::uint64_t>(in);
            d.labels[i] = binio::get<std::uint8_t>(in);
            if (d.labels[i] >= d.class_count)
                throw Error(ErrorKind::io, "BSDS label out of range");
            for (std::uint32_t c = 0; c < fc; ++c)
                d.features(static_cast<Eigen::Index>(i), c) = binio::get<double>(in);
        }
        return d;
    }

    void write_dataset_csv(std::ostream &out, const Dataset &d)
    {
        out << "realization_id,label";
        for (std::size_t c = 0; c < d.feature_count(); ++c)
            out << ",f" << c;
        out << '\n';
        std::ostringstream row;
        row << std::setprecision(17);
        for (std::size_t i = 0; i < d.size(); ++i)
        {
            row.str("");
            row << d.realization_ids[i] << ',' << static_cast<int>(d.labels[i]);
            for (Eigen::Index c = 0; c < d.features.cols(); ++c)
                row << ',' << d.features(static_cast<Eigen::Index>(i), c);
            out << row.str() << '\n';
        }
    }

    void save_dataset(const std::string &path, const Dataset &d)
    {
        std::ofstream f(path, std::ios::binary);
        if (!f)
            throw Error(ErrorKind::io, "cannot open " + path + " for writing");
        write_dataset(f, d);
    }

    Dataset load_dataset(const std::string &path)
    {
        std::ifstream f(path, std::ios::binary);
        if (!f)
            throw Error(ErrorKind::io, "cannot open dataset " + path);
        return read_dataset(f);
    }

    RVector realization_base_features(const ChannelRealization &r, bool append_gmm, std::size_t gmm_components,
                                      std::uint64_t seed)
    {
        RVector base = raw_features(r);
        if (!append_gmm)
            return base;
        GmmOptions opt;
        opt.components = gmm_components ? gmm_components : r.config.n_clusters;
        opt.seed = seed;
        opt.variance_floor = 1e-3;
        const auto q = fit_gmm(gmm_points(r), opt).flattened();
        RVector f(base.size() + static_cast<Eigen::Index>(q.size()));
        f.head(base.size()) = base;
        for (std::size_t i = 0; i < q.size(); ++i)
            f(base.size() + static_cast<Eigen::Index>(i)) = q[i];
        return f;
    }

    DatasetBundle build_datasets(const DatasetBuildOptions &opt)
    {
        opt.channel.validate();
        if (opt.n_realizations < 2)
            throw Error(ErrorKind::config, "n_realizations must be >= 2");
        const SelectionConfig sel = opt.selection.resolved(opt.channel.n_tx, opt.channel.n_rx);

        std::vector<RealizationLabels> labels;
        labels.reserve(opt.n_realizations);
        DatasetBundle bundle;
        std::vector<RVector> bases;
        for (std::size_t i = 0; i < opt.n_realizations; ++i)
        {
            Rng rng(derive_seed(opt.seed, i));
            const auto real = generate_realization(opt.channel, rng);
            labels.push_back(label_realization(real, sel, opt.label_snr_db, i));
            GmmOptions g;
            g.components = opt.gmm_components ? opt.gmm_components : opt.channel.n_clusters;
            g.seed = derive_seed(opt.seed ^ 0x6A4D4DULL, i);
            g.variance_floor = 1e-3;
            bundle.gmm.push_back(fit_gmm(gmm_points(real), g).flattened());
            bases.push_back(realization_base_features(real, opt.append_gmm, opt.gmm_components, g.seed));
        }

        RMatrix base_matrix(static_cast<Eigen::Index>(bases.size()), bases.front().size());
        for (std::size_t i = 0; i < bases.size(); ++i)
            base_matrix.row(static_cast<Eigen::Index>(i)) = bases[i].transpose();
        const RMatrix normalized = normalize(base_matrix, &bundle.stats);

        auto assemble = [&](bool tx_side, std::size_t n_rf) {
            Dataset d;
            d.class_count = n_rf + 1;
            std::size_t rows = 0;
            for (const auto &l : labels)
                rows += (tx_side ? l.tx : l.rx).size();
            d.features.resize(static_cast<Eigen::Index>(rows), normalized.cols() + 2);
            std::size_t row = 0;
            for (std::size_t i = 0; i < labels.size(); ++i)
                for (const auto &s : tx_side ? labels[i].tx : labels[i].rx)
                {
                    const auto r = static_cast<Eigen::Index>(row++);
                    d.features.row(r).head(normalized.cols()) = normalized.row(static_cast<Eigen::Index>(i));
                    d.features(r, normalized.cols()) = s.beam_index;
                    d.features(r, normalized.cols() + 1) = s.energy_fraction;
                    d.labels.push_back(s.label);
                    d.realization_ids.push_back(s.realization_id);
                }
            return d;
        };
        bundle.tx = assemble(true, sel.n_rf_tx);
        bundle.rx = assemble(false, sel.n_rf_rx);
        return bundle;
    }

    BeamRows beam_feature_rows(const ChannelRealization &r, const SelectionConfig &cfg_in, bool tx_side,
                               const RVector &normalized_base)
    {
        const auto &hb = r.beamspace;
        const SelectionConfig cfg = cfg_in.resolved(static_cast<std::size_t>(hb.cols()), static_cast<std::size_t>(hb.rows()));
        const RVector energy = tx_side ? tx_beam_energy(hb) : rx_beam_energy(hb);
        const auto desc = beam_descriptors(energy);
        BeamRows out;
        out.beams = top_energy_beams(energy, tx_side ? cfg.candidate_pool_tx : cfg.candidate_pool_rx);
        const Eigen::Index nb = normalized_base.size();
        out.features.resize(static_cast<Eigen::Index>(out.beams.size()), nb + 2);
        for (std::size_t i = 0; i < out.beams.size(); ++i)
        {
            const auto row = static_cast<Eigen::Index>(i);
            out.features.row(row).head(nb) = normalized_base.transpose();
            out.features(row, nb) = desc[out.beams[i]].first;
            out.features(row, nb + 1) = desc[out.beams[i]].second;
        }
        return out;
    }

    nlohmann::json to_json(const NormalizationStats &s)
    {
        return {{"mean", std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size())},
                {"range", std::vector<double>(s.range.data(), s.range.data() + s.range.size())},
                {"constant_columns", s.constant_columns}};
    }

    NormalizationStats normalization_from_json(const nlohmann::json &j)
    {
        NormalizationStats s;
        const auto m = j.at("mean").get<std::vector<double>>();
        const auto r = j.at("range").get<std::vector<double>>();
        if (m.size() != r.size())
            throw Error(ErrorKind::config, "normalization mean/range length mismatch");
        s.mean = Eigen::Map<const RVector>(m.data(), static_cast<Eigen::Index>(m.size()));
        s.range = Eigen::Map<const RVector>(r.data(), static_cast<Eigen::Index>(r.size()));
        s.constant_columns = j.value("constant_columns", std::vector<std::size_t>{});
        return s;
    }
}

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

#include "beamsel/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "beamsel/binary_io.hpp"

namespace beamsel
{
    namespace
    {
        constexpr std::uint32_t ensemble_version = 1;

        std::string metric_name(EnsembleMetric m)
        {
            return m == EnsembleMetric::balanced ? "balanced" : "zero_one";
        }

        EnsembleMetric metric_from(const std::string &s)
        {
            if (s == "zero_one")
                return EnsembleMetric::zero_one;
            if (s == "balanced")
                return EnsembleMetric::balanced;
            throw Error(ErrorKind::config, "unknown ensemble metric '" + s + "'");
        }

        nlohmann::json to_json(const LearnerRecord &r)
        {
            return {{"index", r.index},
                    {"skipped", r.skipped},
                    {"note", r.note},
                    {"weight", r.weight},
                    {"fit_error_before", r.fit_error_before},
                    {"fit_error_after", r.fit_error_after},
                    {"train_rows", r.train_rows},
                    {"misclassified_rows", r.misclassified_rows},
                    {"init_seed", r.init_seed},
                    {"train_seed", r.train_seed}};
        }

        LearnerRecord record_from_json(const nlohmann::json &j)
        {
            LearnerRecord r;
            r.index = j.at("index").get<std::size_t>();
            r.skipped = j.at("skipped").get<bool>();
            r.note = j.value("note", std::string());
            r.weight = j.at("weight").get<double>();
            r.fit_error_before = j.at("fit_error_before").get<double>();
            r.fit_error_after = j.at("fit_error_after").get<double>();
            r.train_rows = j.at("train_rows").get<std::size_t>();
            r.misclassified_rows = j.at("misclassified_rows").get<std::size_t>();
            r.init_seed = j.at("init_seed").get<std::uint64_t>();
            r.train_seed = j.at("train_seed").get<std::uint64_t>();
            return r;
        }
    }

    void EnsembleConfig::validate() const
    {
        if (m1 == 0)
            throw Error(ErrorKind::config, "ensemble m1 must be >= 1");
        if (!(subset_fraction > 0.0 && subset_fraction <= 1.0))
            throw Error(ErrorKind::config, "subset_fraction must lie in (0, 1]");
        if (!(fit_fraction > 0.0 && fit_fraction < 1.0))
            throw Error(ErrorKind::config, "fit_fraction must lie in (0, 1)");
        if (weight_grid.empty())
            throw Error(ErrorKind::config, "weight_grid must be nonempty");
        for (double c : weight_grid)
            if (!(c > 0.0) || !std::isfinite(c))
                throw Error(ErrorKind::config, "weight_grid entries must be finite and > 0");
        if (!(tolerance >= 0.0))
            throw Error(ErrorKind::config, "tolerance must be >= 0");
    }

    nlohmann::json to_json(const EnsembleConfig &c)
    {
        return {{"m1", c.m1},
                {"subset_fraction", c.subset_fraction},
                {"weight_grid", c.weight_grid},
                {"fit_fraction", c.fit_fraction},
                {"tolerance", c.tolerance},
                {"metric", metric_name(c.metric)},
                {"learner_epochs", c.learner_epochs},
                {"seed", c.seed}};
    }

    EnsembleConfig ensemble_config_from_json(const nlohmann::json &j)
    {
        EnsembleConfig c;
        try
        {
            c.m1 = j.value("m1", c.m1);
            c.subset_fraction = j.value("subset_fraction", c.subset_fraction);
            c.weight_grid = j.value("weight_grid", c.weight_grid);
            c.fit_fraction = j.value("fit_fraction", c.fit_fraction);
            c.tolerance = j.value("tolerance", c.tolerance);
            if (j.contains("metric"))
                c.metric = metric_from(j.at("metric").get<std::string>());
            c.learner_epochs = j.value("learner_epochs", c.learner_epochs);
            c.seed = j.value("seed", c.seed);
        }
        catch (const nlohmann::json::exception &e)
        {
            throw Error(ErrorKind::config, std::string("ensemble config: ") + e.what());
        }
        c.validate();
        return c;
    }

    RVector vote_mass(const std::vector<std::size_t> &votes, const RVector &weights, std::size_t n_classes)
    {
        if (votes.size() != static_cast<std::size_t>(weights.size()))
            throw Error(ErrorKind::invalid_argument, "vote and weight counts differ");
        RVector mass = RVector::Zero(static_cast<Eigen::Index>(n_classes));
        for (std::size_t m = 0; m < votes.size(); ++m)
        {
            if (votes[m] >= n_classes)
                throw Error(ErrorKind::invalid_argument, "vote out of class range");
            mass[static_cast<Eigen::Index>(votes[m])] += weights[static_cast<Eigen::Index>(m)];
        }
        return mass;
    }

    std::size_t weighted_vote(const std::vector<std::size_t> &votes, const RVector &weights, std::size_t n_classes)
    {
        const RVector mass = vote_mass(votes, weights, n_classes);
        Eigen::Index best = 0;
        for (Eigen::Index k = 1; k < mass.size(); ++k)
            if (mass[k] > mass[best])
                best = k;
        return static_cast<std::size_t>(best);
    }

    std::vector<std::size_t> combine_votes(const std::vector<std::vector<std::size_t>> &votes, const RVector &weights,
                                           std::size_t n_classes)
    {
        if (votes.empty())
            throw Error(ErrorKind::invalid_argument, "no learners to combine");
        const std::size_t n = votes.front().size();
        std::vector<std::size_t> out(n), column(votes.size());
        for (std::size_t i = 0; i < n; ++i)
        {
            for (std::size_t m = 0; m < votes.size(); ++m)
                column[m] = votes[m][i];
            out[i] = weighted_vote(column, weights, n_classes);
        }
        return out;
    }

    double ensemble_error(const std::vector<std::size_t> &pred, const std::vector<std::uint8_t> &labels,
                          std::size_t n_classes, EnsembleMetric metric)
    {
        if (metric == EnsembleMetric::balanced)
            return 1.0 - nn::balanced_accuracy(pred, labels, n_classes);
        return 1.0 - nn::accuracy(pred, labels);
    }

    EnsembleModel train_ensemble(const nn::SampleSource &train_set, const nn::SampleSource *val_set,
                                 const EnsembleConfig &cfg, const nn::NetworkSpec &spec, const nn::TrainConfig &train_cfg)
    {
        cfg.validate();
        train_cfg.validate();
        const std::size_t n = train_set.size();
        if (n < 2)
            throw Error(ErrorKind::invalid_argument, "ensemble training needs at least two samples");
        const std::size_t k = spec.n_classes;

        // Fit slice vs. training pool.
        Rng rng(cfg.seed);
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), std::size_t{0});
        std::shuffle(all.begin(), all.end(), rng);
        const std::size_t n_fit = std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(cfg.fit_fraction * static_cast<double>(n))), 1, n - 1);
        std::vector<std::size_t> fit(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_fit));
        std::vector<std::size_t> pool(all.begin() + static_cast<std::ptrdiff_t>(n_fit), all.end());
        std::sort(fit.begin(), fit.end());
        std::sort(pool.begin(), pool.end());
        const nn::SubsetSource fit_src(train_set, fit);
        const nn::SubsetSource pool_src(train_set, pool);
        const auto fit_labels = nn::all_labels(fit_src);
        const auto pool_labels = nn::all_labels(pool_src);
        const std::size_t subset_size = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(cfg.subset_fraction * static_cast<double>(pool.size()))));

        EnsembleModel ens;
        ens.config = cfg;
        std::vector<std::vector<std::size_t>> fit_votes, pool_votes;
        std::vector<double> weights;

        auto current = [&](const std::vector<std::vector<std::size_t>> &votes, std::size_t count) {
            if (votes.empty())
                return std::vector<std::size_t>(count, 0); // empty ensemble: zero mass everywhere
            return combine_votes(votes, Eigen::Map<const RVector>(weights.data(), static_cast<Eigen::Index>(weights.size())), k);
        };

        for (std::size_t m = 0; m < cfg.m1; ++m)
        {
            LearnerRecord rec;
            rec.index = m;
            rec.init_seed = derive_seed(cfg.seed, 2 * m + 1);
            rec.train_seed = derive_seed(cfg.seed, 2 * m + 2);

            // Fresh random subset joined with what the ensemble so far gets wrong.
            std::vector<std::size_t> order(pool.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::shuffle(order.begin(), order.end(), rng);
            std::vector<char> chosen(pool.size(), 0);
            for (std::size_t i = 0; i < subset_size; ++i)
                chosen[order[i]] = 1;
            if (m > 0)
            {
                const auto pred = current(pool_votes, pool.size());
                std::vector<std::size_t> extra;
                for (std::size_t i = 0; i < pool.size(); ++i)
                    if (pred[i] != pool_labels[i] && !chosen[i])
                        extra.push_back(i);
                rec.misclassified_rows = extra.size();
                if (extra.size() > subset_size)
                {
                    std::shuffle(extra.begin(), extra.end(), rng);
                    extra.resize(subset_size);
                }
                for (auto i : extra)
                    chosen[i] = 1;
            }
            std::vector<std::size_t> rows;
            for (std::size_t i = 0; i < pool.size(); ++i)
                if (chosen[i])
                    rows.push_back(pool[i]);
            rec.train_rows = rows.size();

            nn::ClassifierModel learner(spec, rec.init_seed);
            nn::TrainConfig tc = train_cfg;
            tc.seed = rec.train_seed;
            if (cfg.learner_epochs > 0)
                tc.max_epochs = cfg.learner_epochs;
            rec.fit_error_before = ensemble_error(current(fit_votes, fit.size()), fit_labels, k, cfg.metric);
            try
            {
                nn::train(learner, nn::SubsetSource(train_set, rows), val_set, tc);
            }
            catch (const Error &e)
            {
                if (e.kind() != ErrorKind::training_diverged)
                    throw;
                rec.skipped = true;
                rec.note = e.what();
            }

            double chosen_c = 0.0;
            if (!rec.skipped)
            {
                fit_votes.push_back(nn::predict_classes(learner, fit_src));
                pool_votes.push_back(nn::predict_classes(learner, pool_src));
                double best_err = 2.0;
                for (double c : cfg.weight_grid)
                {
                    weights.push_back(c);
                    const double err = ensemble_error(current(fit_votes, fit.size()), fit_labels, k, cfg.metric);
                    weights.pop_back();
                    if (err < best_err)
                    {
                        best_err = err;
                        chosen_c = c;
                    }
                }
                // The first learner always votes: an empty ensemble is not a baseline worth keeping.
                if (m > 0 && best_err > rec.fit_error_before + cfg.tolerance)
                {
                    chosen_c = 0.0;
                    rec.note = "every grid weight worsened the fit-slice error; weight set to 0";
                }
                weights.push_back(chosen_c);
            }
            else
            {
                // Keep the slot so learners and weights stay aligned; a zero weight casts no mass.
                fit_votes.push_back(std::vector<std::size_t>(fit.size(), 0));
                pool_votes.push_back(std::vector<std::size_t>(pool.size(), 0));
                weights.push_back(0.0);
            }
            rec.weight = chosen_c;
            rec.fit_error_after = ensemble_error(current(fit_votes, fit.size()), fit_labels, k, cfg.metric);
            ens.learners.push_back(std::move(learner));
            ens.trace.push_back(rec);
        }

        if (std::all_of(ens.trace.begin(), ens.trace.end(), [](const LearnerRecord &r) { return r.skipped; }))
            throw Error(ErrorKind::ensemble_failed, "every weak learner diverged");
        ens.weights = Eigen::Map<const RVector>(weights.data(), static_cast<Eigen::Index>(weights.size()));
        return ens;
    }

    std::vector<std::vector<std::size_t>> learner_votes(EnsembleModel &ens, const nn::SampleSource &set)
    {
        std::vector<std::vector<std::size_t>> votes;
        for (std::size_t m = 0; m < ens.learners.size(); ++m)
        {
            if (ens.weights[static_cast<Eigen::Index>(m)] == 0.0)
                votes.emplace_back(set.size(), 0); // carries no mass, skip the forward pass
            else
                votes.push_back(nn::predict_classes(ens.learners[m], set));
        }
        return votes;
    }

    std::vector<std::size_t> predict(EnsembleModel &ens, const nn::SampleSource &set)
    {
        if (ens.learners.empty())
            throw Error(ErrorKind::invalid_argument, "empty ensemble");
        return combine_votes(learner_votes(ens, set), ens.weights, ens.n_classes());
    }

    std::size_t predict_one(EnsembleModel &ens, const nn::SampleSource &set, std::size_t row)
    {
        return predict(ens, nn::SubsetSource(set, {row})).front();
    }

    double ensemble_error(EnsembleModel &ens, const nn::SampleSource &set)
    {
        return 1.0 - nn::accuracy(predict(ens, set), nn::all_labels(set));
    }

    void write_ensemble(std::ostream &out, const EnsembleModel &ens)
    {
        nlohmann::json manifest;
        manifest["config"] = to_json(ens.config);
        manifest["weights"] = std::vector<double>(ens.weights.data(), ens.weights.data() + ens.weights.size());
        manifest["learners"] = ens.learners.size();
        manifest["trace"] = nlohmann::json::array();
        for (const auto &r : ens.trace)
            manifest["trace"].push_back(to_json(r));

        binio::put_magic(out, "BSEN");
        binio::put<std::uint32_t>(out, ensemble_version);
        binio::put_string(out, manifest.dump());
        for (const auto &l : ens.learners)
        {
            std::ostringstream blob;
            nn::write_model(blob, l);
            binio::put_string(out, blob.str());
        }
        if (!out)
            throw Error(ErrorKind::io, "failed writing ensemble container");
    }

    EnsembleModel read_ensemble(std::istream &in)
    {
        binio::expect_magic(in, "BSEN");
        const auto version = binio::get<std::uint32_t>(in);
        if (version != ensemble_version)
            throw Error(ErrorKind::io, "unsupported ensemble container version " + std::to_string(version));
        EnsembleModel ens;
        std::size_t count = 0;
        try
        {
            const auto manifest = nlohmann::json::parse(binio::get_string(in));
            ens.config = ensemble_config_from_json(manifest.at("config"));
            const auto w = manifest.at("weights").get<std::vector<double>>();
            ens.weights = Eigen::Map<const RVector>(w.data(), static_cast<Eigen::Index>(w.size()));
            for (const auto &r : manifest.at("trace"))
                ens.trace.push_back(record_from_json(r));
            count = manifest.at("learners").get<std::size_t>();
        }
        catch (const nlohmann::json::exception &e)
        {
            throw Error(ErrorKind::io, std::string("corrupt ensemble manifest: ") + e.what());
        }
        if (count != static_cast<std::size_t>(ens.weights.size()))
            throw Error(ErrorKind::io, "ensemble manifest weight count does not match learner count");
        for (std::size_t m = 0; m < count; ++m)
        {
            std::istringstream blob(binio::get_string(in));
            ens.learners.push_back(nn::read_model(blob));
        }
        return ens;
    }

    void save_ensemble(const std::string &path, const EnsembleModel &ens)
    {
        std::ofstream f(path, std::ios::binary);
        if (!f)
            throw Error(ErrorKind::io, "cannot open " + path + " for writing");
        write_ensemble(f, ens);
    }

    EnsembleModel load_ensemble(const std::string &path)
    {
        std::ifstream f(path, std::ios::binary);
        if (!f)
            throw Error(ErrorKind::io, "cannot open ensemble " + path);
        return read_ensemble(f);
    }
}

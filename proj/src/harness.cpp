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

#include "beamsel/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "beamsel/plot.hpp"

namespace fs = std::filesystem;

namespace beamsel::harness
{
    namespace
    {
        constexpr std::uint64_t gmm_seed_salt = 0x6A4D4DULL; // matches build_datasets

        std::string fmt(double v)
        {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.12g", v);
            return buf;
        }

        void say(const RunOptions &opt, const std::string &msg)
        {
            if (opt.log)
                *opt.log << msg << std::endl;
        }

        void write_text(const fs::path &path, const std::string &text)
        {
            fs::create_directories(path.parent_path());
            std::ofstream out(path, std::ios::binary);
            if (!out)
                throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
            out << text;
            if (!out)
                throw Error(ErrorKind::io, "write failed for '" + path.string() + "'");
        }

        nlohmann::json read_json(const fs::path &path)
        {
            std::ifstream in(path);
            if (!in)
                throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
            try
            {
                return nlohmann::json::parse(in);
            }
            catch (const nlohmann::json::exception &e)
            {
                throw Error(ErrorKind::io, path.string() + ": " + e.what());
            }
        }

        std::vector<std::string> split_csv(const std::string &line)
        {
            std::vector<std::string> out;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ','))
                out.push_back(cell);
            if (!line.empty() && line.back() == ',')
                out.emplace_back();
            return out;
        }

        double mean_of(const std::vector<double> &v)
        {
            double s = 0.0;
            for (double x : v)
                s += x;
            return v.empty() ? 0.0 : s / static_cast<double>(v.size());
        }

        // Sample standard deviation; 0 for fewer than two values.
        double std_of(const std::vector<double> &v)
        {
            if (v.size() < 2)
                return 0.0;
            const double m = mean_of(v);
            double s = 0.0;
            for (double x : v)
                s += (x - m) * (x - m);
            return std::sqrt(s / static_cast<double>(v.size() - 1));
        }

        const char *side_name(bool tx) { return tx ? "tx" : "rx"; }

        std::size_t n_rf(const ExperimentConfig &cfg, bool tx) { return tx ? cfg.selection.n_rf_tx : cfg.selection.n_rf_rx; }

        fs::path data_dir(const RunOptions &o) { return fs::path(o.out_dir) / "data"; }

        // The sections that determine the dataset bytes.
        nlohmann::json data_identity(const ExperimentConfig &cfg)
        {
            const auto j = to_json(cfg);
            return {{"channel", j.at("channel")},
                    {"selection", j.at("selection")},
                    {"dataset", j.at("dataset")},
                    {"dataset_seed", cfg.seeds().dataset}};
        }

        struct LoadedData
        {
            Dataset tx, rx;
            NormalizationStats stats;
        };

        LoadedData load_data(const ExperimentConfig &cfg, const RunOptions &opt)
        {
            const fs::path dir = data_dir(opt);
            const fs::path sidecar = dir / "dataset.json";
            if (!fs::exists(sidecar) || !fs::exists(dir / "dataset_tx.bsds") || !fs::exists(dir / "dataset_rx.bsds"))
                throw Error(ErrorKind::io, "no dataset under '" + dir.string() + "'; run gen-data first");
            const auto meta = read_json(sidecar);
            if (meta.at("identity") != data_identity(cfg))
                throw Error(ErrorKind::config, "'" + sidecar.string() +
                                                   "' was generated from a different channel/selection/dataset "
                                                   "section or seed; rerun gen-data");
            LoadedData d;
            d.tx = load_dataset((dir / "dataset_tx.bsds").string());
            d.rx = load_dataset((dir / "dataset_rx.bsds").string());
            d.stats = normalization_from_json(meta.at("normalization"));
            return d;
        }

        nn::NetworkSpec cnn_spec(const ExperimentConfig &cfg, bool tx, const nn::ActivationKind &act)
        {
            auto spec = cfg.net;
            spec.n_classes = n_rf(cfg, tx) + 1;
            spec.activation = act;
            return spec;
        }

        nn::TrainConfig train_cfg(const ExperimentConfig &cfg, nn::OptimizerKind opt)
        {
            auto t = cfg.train;
            t.optimizer = opt;
            t.seed = cfg.seeds().train;
            return t;
        }

        std::string csv_log(const std::vector<nn::TrainingRecord> &log)
        {
            std::ostringstream out;
            nn::write_training_log(out, log);
            return out.str();
        }

        struct Metrics
        {
            AccuracyRow row;
            std::size_t feature_count = 0;
            std::size_t n_train = 0;
            std::size_t parameter_count = 0;
            double seconds = 0.0;
            nlohmann::json extra = nlohmann::json::object();
        };

        void write_metrics(const fs::path &path, const Metrics &m)
        {
            nlohmann::json j = {{"strategy", m.row.strategy},
                                {"side", m.row.side},
                                {"activation", m.row.activation},
                                {"optimizer", m.row.optimizer},
                                {"accuracy", m.row.accuracy},
                                {"balanced_accuracy", m.row.balanced_accuracy},
                                {"n_val", m.row.n_samples},
                                {"n_train", m.n_train},
                                {"feature_count", m.feature_count},
                                {"parameter_count", m.parameter_count},
                                {"seed", m.row.seed},
                                {"train_seconds", m.seconds}};
            for (const auto &[k, v] : m.extra.items())
                j[k] = v;
            write_text(path, j.dump(2) + "\n");
        }

        AccuracyRow row_from_metrics(const nlohmann::json &j)
        {
            AccuracyRow r;
            r.strategy = j.at("strategy").get<std::string>();
            r.side = j.at("side").get<std::string>();
            r.activation = j.at("activation").get<std::string>();
            r.optimizer = j.at("optimizer").get<std::string>();
            r.accuracy = j.at("accuracy").get<double>();
            r.balanced_accuracy = j.at("balanced_accuracy").get<double>();
            r.n_samples = j.at("n_val").get<std::size_t>();
            r.seed = j.at("seed").get<std::uint64_t>();
            return r;
        }

        std::string safe_name(std::string s)
        {
            std::replace(s.begin(), s.end(), ':', '-');
            return s;
        }

        // Checkpoint path for a learned strategy and side.
        fs::path model_path(const ExperimentConfig &cfg, const RunOptions &opt, const std::string &strategy, bool tx)
        {
            const fs::path dir = fs::path(opt.out_dir) / "models";
            const std::string side = side_name(tx);
            if (strategy == "cnn")
                return dir / (model_stem("cnn", cfg.net.activation, cfg.train.optimizer) + "_" + side + ".bsnn");
            if (strategy == "ensemble")
                return dir / ("ensemble_" + side + ".bsen");
            return dir / (strategy + "_" + side + ".bsbl");
        }

        fs::path metrics_path(const RunOptions &opt, const fs::path &model)
        {
            return fs::path(opt.out_dir) / "metrics" / (model.stem().string() + ".json");
        }
    }

    std::string model_stem(const std::string &strategy, const nn::ActivationKind &act, nn::OptimizerKind opt)
    {
        return strategy + "_" + safe_name(nn::to_string(act)) + "_" + nn::to_string(opt);
    }

    // ------------------------------------------------------------------------ CSV tables

    void write_result_csv(std::ostream &out, const std::vector<ResultRow> &rows)
    {
        out << "strategy,sweep_variable,value,mean_se,std_se,accuracy,n_realizations,seed\n";
        for (const auto &r : rows)
            out << r.strategy << ',' << r.sweep_variable << ',' << fmt(r.value) << ',' << fmt(r.mean_se) << ','
                << fmt(r.std_se) << ',' << (r.accuracy ? fmt(*r.accuracy) : std::string()) << ',' << r.n_realizations
                << ',' << r.seed << '\n';
    }

    std::vector<ResultRow> read_result_csv(std::istream &in)
    {
        std::string line;
        if (!std::getline(in, line) || line != "strategy,sweep_variable,value,mean_se,std_se,accuracy,n_realizations,seed")
            throw Error(ErrorKind::io, "result table has an incompatible schema");
        std::vector<ResultRow> rows;
        while (std::getline(in, line))
        {
            if (line.empty())
                continue;
            const auto c = split_csv(line);
            if (c.size() != 8)
                throw Error(ErrorKind::io, "result table row has " + std::to_string(c.size()) + " columns");
            ResultRow r;
            r.strategy = c[0];
            r.sweep_variable = c[1];
            r.value = std::stod(c[2]);
            r.mean_se = std::stod(c[3]);
            r.std_se = std::stod(c[4]);
            if (!c[5].empty())
                r.accuracy = std::stod(c[5]);
            r.n_realizations = std::stoull(c[6]);
            r.seed = std::stoull(c[7]);
            rows.push_back(r);
        }
        return rows;
    }

    void write_accuracy_csv(std::ostream &out, const std::vector<AccuracyRow> &rows)
    {
        out << "strategy,side,activation,optimizer,accuracy,balanced_accuracy,n_samples,seed\n";
        for (const auto &r : rows)
            out << r.strategy << ',' << r.side << ',' << r.activation << ',' << r.optimizer << ',' << fmt(r.accuracy)
                << ',' << fmt(r.balanced_accuracy) << ',' << r.n_samples << ',' << r.seed << '\n';
    }

    std::vector<AccuracyRow> read_accuracy_csv(std::istream &in)
    {
        std::string line;
        if (!std::getline(in, line) || line != "strategy,side,activation,optimizer,accuracy,balanced_accuracy,n_samples,seed")
            throw Error(ErrorKind::io, "accuracy table has an incompatible schema");
        std::vector<AccuracyRow> rows;
        while (std::getline(in, line))
        {
            if (line.empty())
                continue;
            const auto c = split_csv(line);
            if (c.size() != 8)
                throw Error(ErrorKind::io, "accuracy table row has " + std::to_string(c.size()) + " columns");
            AccuracyRow r;
            r.strategy = c[0];
            r.side = c[1];
            r.activation = c[2];
            r.optimizer = c[3];
            r.accuracy = std::stod(c[4]);
            r.balanced_accuracy = std::stod(c[5]);
            r.n_samples = std::stoull(c[6]);
            r.seed = std::stoull(c[7]);
            rows.push_back(r);
        }
        return rows;
    }

    // ------------------------------------------------------------------------ gen-data

    GenDataSummary cmd_gen_data(const ExperimentConfig &cfg, const RunOptions &opt)
    {
        cfg.validate();
        const auto seeds = cfg.seeds();
        DatasetBuildOptions b;
        b.channel = cfg.channel;
        b.selection = cfg.selection;
        b.n_realizations = cfg.dataset.n_realizations;
        b.label_snr_db = cfg.dataset.label_snr_db;
        b.append_gmm = cfg.dataset.append_gmm;
        b.gmm_components = cfg.dataset.gmm_components;
        b.seed = seeds.dataset;
        say(opt, "gen-data: " + std::to_string(b.n_realizations) + " realizations, seed " + std::to_string(b.seed));
        const auto bundle = build_datasets(b);

        const fs::path dir = data_dir(opt);
        fs::create_directories(dir);
        save_dataset((dir / "dataset_tx.bsds").string(), bundle.tx);
        save_dataset((dir / "dataset_rx.bsds").string(), bundle.rx);

        std::ostringstream gmm;
        const std::size_t q = bundle.gmm.empty() ? 0 : bundle.gmm.front().size();
        gmm << "realization_id";
        for (std::size_t i = 0; i < q; ++i)
            gmm << ",q" << i;
        gmm << '\n';
        for (std::size_t r = 0; r < bundle.gmm.size(); ++r)
        {
            gmm << r;
            for (double v : bundle.gmm[r])
                gmm << ',' << fmt(v);
            gmm << '\n';
        }
        write_text(dir / "gmm.csv", gmm.str());

        GenDataSummary s{bundle.tx.size(), bundle.rx.size(), bundle.tx.class_histogram(), bundle.rx.class_histogram()};
        const nlohmann::json meta = {{"schema_version", schema_version},
                                     {"identity", data_identity(cfg)},
                                     {"normalization", to_json(bundle.stats)},
                                     {"feature_count", bundle.tx.feature_count()},
                                     {"tx", {{"samples", s.tx_samples}, {"classes", bundle.tx.class_count}, {"histogram", s.tx_histogram}}},
                                     {"rx", {{"samples", s.rx_samples}, {"classes", bundle.rx.class_count}, {"histogram", s.rx_histogram}}}};
        write_text(dir / "dataset.json", meta.dump(2) + "\n");
        return s;
    }

    // ------------------------------------------------------------------------ train

    std::vector<AccuracyRow> cmd_train(const ExperimentConfig &cfg, const RunOptions &opt)
    {
        cfg.validate();
        const auto seeds = cfg.seeds();
        const auto data = load_data(cfg, opt);
        const fs::path root(opt.out_dir);
        std::vector<std::string> strategies;
        for (const auto &s : opt.strategies.empty() ? cfg.strategies : opt.strategies)
        {
            if (std::find(known_strategies().begin(), known_strategies().end(), s) == known_strategies().end())
                throw Error(ErrorKind::config, "unknown strategy '" + s + "'");
            if (is_learned(s))
                strategies.push_back(s);
        }
        if (strategies.empty())
            throw Error(ErrorKind::config, "no learned strategy selected for training");

        const auto acts = opt.activations.empty() ? std::vector<nn::ActivationKind>{cfg.net.activation} : opt.activations;
        const auto opts = opt.optimizers.empty() ? std::vector<nn::OptimizerKind>{cfg.train.optimizer} : opt.optimizers;

        std::vector<AccuracyRow> rows;
        auto finish = [&](const fs::path &model_file, Metrics m, const std::vector<nn::TrainingRecord> *log) {
            if (log)
                write_text(root / "logs" / (model_file.stem().string() + ".csv"), csv_log(*log));
            write_metrics(metrics_path(opt, model_file), m);
            say(opt, "  " + model_file.filename().string() + ": accuracy " + fmt(m.row.accuracy) + ", balanced " +
                         fmt(m.row.balanced_accuracy) + " (" + fmt(m.seconds) + " s)");
            rows.push_back(m.row);
        };

        for (bool tx : {true, false})
        {
            const Dataset &all = tx ? data.tx : data.rx;
            const auto [train_set, val_set] = split_dataset(all, cfg.dataset.train_fraction, seeds.split);
            const std::size_t classes = n_rf(cfg, tx) + 1;
            const std::string side = side_name(tx);
            auto base_metrics = [&](const std::string &strategy, std::string act, std::string optimizer) {
                Metrics m;
                m.row = {strategy, side, std::move(act), std::move(optimizer), 0.0, 0.0, val_set.size(), cfg.seed};
                m.feature_count = all.feature_count();
                m.n_train = train_set.size();
                return m;
            };
            std::unique_ptr<nn::ImageSource> img_train, img_val;
            auto images = [&] {
                if (!img_train)
                {
                    img_train = std::make_unique<nn::ImageSource>(train_set, cfg.dataset.image_side, cfg.dataset.embedding);
                    img_val = std::make_unique<nn::ImageSource>(val_set, cfg.dataset.image_side, cfg.dataset.embedding);
                }
            };

            for (const auto &strategy : strategies)
            {
                const auto t0 = std::chrono::steady_clock::now();
                auto elapsed = [&] {
                    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                };
                if (strategy == "cnn")
                {
                    images();
                    for (const auto &act : acts)
                        for (auto o : opts)
                        {
                            const bool primary = act == cfg.net.activation && o == cfg.train.optimizer;
                            if (!tx && !primary)
                                continue; // the accuracy matrix is a tx-side comparison
                            const auto c0 = std::chrono::steady_clock::now();
                            say(opt, "train cnn " + nn::to_string(act) + "/" + nn::to_string(o) + " (" + side + ")");
                            nn::ClassifierModel model(cnn_spec(cfg, tx, act), seeds.init);
                            nn::train(model, *img_train, img_val.get(), train_cfg(cfg, o));
                            const auto ev = nn::evaluate(model, *img_val);
                            const fs::path file =
                                root / "models" / (model_stem("cnn", act, o) + "_" + side + ".bsnn");
                            fs::create_directories(file.parent_path());
                            nn::save_model(file.string(), model);
                            auto m = base_metrics("cnn", nn::to_string(act), nn::to_string(o));
                            m.row.accuracy = ev.accuracy;
                            m.row.balanced_accuracy = ev.balanced_accuracy;
                            m.parameter_count = model.parameter_count();
                            m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - c0).count();
                            finish(file, m, &model.training_log);
                        }
                }
                else if (strategy == "ensemble")
                {
                    images();
                    say(opt, "train ensemble (" + side + ")");
                    auto ecfg = cfg.ensemble;
                    ecfg.seed = seeds.ensemble;
                    auto ens = train_ensemble(*img_train, nullptr, ecfg, cnn_spec(cfg, tx, cfg.net.activation),
                                              train_cfg(cfg, cfg.train.optimizer));
                    const fs::path file = model_path(cfg, opt, "ensemble", tx);
                    fs::create_directories(file.parent_path());
                    save_ensemble(file.string(), ens);
                    const auto labels = nn::all_labels(*img_val);
                    const auto votes = learner_votes(ens, *img_val);
                    const auto pred = combine_votes(votes, ens.weights, classes);
                    auto m = base_metrics("ensemble", nn::to_string(cfg.net.activation), nn::to_string(cfg.train.optimizer));
                    m.row.accuracy = nn::accuracy(pred, labels);
                    m.row.balanced_accuracy = nn::balanced_accuracy(pred, labels, classes);
                    nlohmann::json learners = nlohmann::json::array();
                    double best_acc = 0.0, best_bal = 0.0;
                    for (std::size_t i = 0; i < votes.size(); ++i)
                    {
                        const double a = nn::accuracy(votes[i], labels);
                        const double b = nn::balanced_accuracy(votes[i], labels, classes);
                        learners.push_back({{"weight", ens.weights(static_cast<Eigen::Index>(i))},
                                            {"skipped", ens.trace[i].skipped},
                                            {"accuracy", a},
                                            {"balanced_accuracy", b},
                                            {"fit_error_before", ens.trace[i].fit_error_before},
                                            {"fit_error_after", ens.trace[i].fit_error_after},
                                            {"train_rows", ens.trace[i].train_rows}});
                        if (!ens.trace[i].skipped)
                        {
                            best_acc = std::max(best_acc, a);
                            best_bal = std::max(best_bal, b);
                        }
                    }
                    m.extra = {{"learners", learners},
                               {"best_single_accuracy", best_acc},
                               {"best_single_balanced_accuracy", best_bal}};
                    for (const auto &l : ens.learners)
                        m.parameter_count += l.parameter_count();
                    m.seconds = elapsed();
                    std::ostringstream trace;
                    trace << "learner,weight,skipped,fit_error_before,fit_error_after,train_rows,misclassified_rows\n";
                    for (const auto &r : ens.trace)
                        trace << r.index << ',' << fmt(r.weight) << ',' << (r.skipped ? 1 : 0) << ','
                              << fmt(r.fit_error_before) << ',' << fmt(r.fit_error_after) << ',' << r.train_rows << ','
                              << r.misclassified_rows << '\n';
                    write_text(root / "logs" / (file.stem().string() + ".csv"), trace.str());
                    finish(file, m, nullptr);
                }
                else if (strategy == "knn")
                {
                    say(opt, "train knn (" + side + ")");
                    const auto model = knn_fit(train_set, cfg.knn_k);
                    const auto pred = knn_predict(model, val_set.features);
                    const fs::path file = model_path(cfg, opt, "knn", tx);
                    fs::create_directories(file.parent_path());
                    save_baseline(file.string(), model);
                    auto m = base_metrics("knn", "", "");
                    m.row.accuracy = nn::accuracy(pred, val_set.labels);
                    m.row.balanced_accuracy = nn::balanced_accuracy(pred, val_set.labels, classes);
                    m.seconds = elapsed();
                    finish(file, m, nullptr);
                }
                else if (strategy == "svm")
                {
                    say(opt, "train svm (" + side + ")");
                    auto scfg = cfg.svm;
                    scfg.seed = seeds.baselines;
                    const auto model = svm_train(train_set, classes, scfg);
                    const auto pred = svm_predict(model, val_set.features);
                    const fs::path file = model_path(cfg, opt, "svm", tx);
                    fs::create_directories(file.parent_path());
                    save_baseline(file.string(), model);
                    auto m = base_metrics("svm", "", "");
                    m.row.accuracy = nn::accuracy(pred, val_set.labels);
                    m.row.balanced_accuracy = nn::balanced_accuracy(pred, val_set.labels, classes);
                    m.parameter_count = static_cast<std::size_t>(model.weights.size() + model.bias.size());
                    m.seconds = elapsed();
                    finish(file, m, nullptr);
                }
                else if (strategy == "mlp")
                {
                    say(opt, "train mlp (" + side + ")");
                    MlpConfig mcfg;
                    mcfg.hidden = cfg.mlp_hidden;
                    mcfg.train = train_cfg(cfg, cfg.train.optimizer);
                    mcfg.init_seed = seeds.init;
                    auto model = mlp_train(train_set, &val_set, classes, mcfg);
                    const auto pred = mlp_predict(model, val_set.features);
                    const fs::path file = model_path(cfg, opt, "mlp", tx);
                    fs::create_directories(file.parent_path());
                    save_baseline(file.string(), model);
                    auto m = base_metrics("mlp", "relu", nn::to_string(cfg.train.optimizer));
                    m.row.accuracy = nn::accuracy(pred, val_set.labels);
                    m.row.balanced_accuracy = nn::balanced_accuracy(pred, val_set.labels, classes);
                    m.parameter_count = model.parameter_count();
                    m.seconds = elapsed();
                    finish(file, m, &model.training_log);
                }
            }
        }
        return rows;
    }

    // ------------------------------------------------------------------------ evaluate

    namespace
    {
        // Per-realization outcome: se[strategy][grid point] and beam overlap with the oracle.
        struct PointResults
        {
            std::vector<std::vector<double>> se_snr, acc_snr, se_ns, acc_ns;
        };

        double overlap(const BeamSelection &a, const BeamSelection &b)
        {
            auto count = [](const std::vector<std::size_t> &x, const std::vector<std::size_t> &y) {
                std::size_t n = 0;
                for (auto v : x)
                    n += static_cast<std::size_t>(std::count(y.begin(), y.end(), v));
                return n;
            };
            const double total = static_cast<double>(b.tx_beams.size() + b.rx_beams.size());
            return static_cast<double>(count(a.tx_beams, b.tx_beams) + count(a.rx_beams, b.rx_beams)) / total;
        }

        double se_of(const CMatrix &hb, const BeamSelection &sel, double snr_db)
        {
            const std::size_t ns = std::min(sel.tx_beams.size(), sel.rx_beams.size());
            const CMatrix h_sel = selected_channel(hb, sel);
            try
            {
                return spectral_efficiency(hb, sel, build_digital_stage(h_sel, ns), snr_db);
            }
            catch (const Error &e)
            {
                // A learned selection may hit beams the channel does not excite.
                if (e.kind() != ErrorKind::degenerate_channel)
                    throw;
                return svd_spectral_efficiency(h_sel, ns, snr_db);
            }
        }

        // Scores every candidate-pool row of one side: larger means "more likely served by an RF chain".
        RVector learned_scores(const std::string &strategy, const ExperimentConfig &cfg, const RunOptions &opt, bool tx,
                               const Dataset &rows, std::size_t feature_count)
        {
            const fs::path file = model_path(cfg, opt, strategy, tx);
            const fs::path mfile = metrics_path(opt, file);
            if (!fs::exists(file) || !fs::exists(mfile))
                throw Error(ErrorKind::io, "no checkpoint '" + file.string() + "'; run train --strategy " + strategy);
            const auto meta = read_json(mfile);
            const std::size_t classes = n_rf(cfg, tx) + 1;
            if (meta.at("feature_count").get<std::size_t>() != feature_count)
                throw Error(ErrorKind::invalid_argument,
                            file.string() + ": trained on " + std::to_string(meta.at("feature_count").get<std::size_t>()) +
                                " features, dataset has " + std::to_string(feature_count));
            auto check_classes = [&](std::size_t k) {
                if (k != classes)
                    throw Error(ErrorKind::invalid_argument, file.string() + ": checkpoint has " + std::to_string(k) +
                                                                 " classes, config needs " + std::to_string(classes));
            };
            const auto n = static_cast<Eigen::Index>(rows.size());
            RVector score(n);
            if (strategy == "cnn" || strategy == "ensemble")
            {
                nn::ImageSource src(rows, cfg.dataset.image_side, cfg.dataset.embedding);
                if (strategy == "cnn")
                {
                    auto model = nn::load_model(file.string());
                    check_classes(model.spec().n_classes);
                    if (model.spec().input_side != cfg.dataset.image_side)
                        throw Error(ErrorKind::invalid_argument, file.string() + ": input side does not match dataset.image_side");
                    const RMatrix p = nn::predict_probabilities(model, src);
                    score = RVector::Ones(n) - p.col(0);
                }
                else
                {
                    auto ens = load_ensemble(file.string());
                    check_classes(ens.n_classes());
                    const auto votes = learner_votes(ens, src);
                    for (Eigen::Index i = 0; i < n; ++i)
                    {
                        std::vector<std::size_t> v;
                        for (const auto &l : votes)
                            v.push_back(l[static_cast<std::size_t>(i)]);
                        const RVector mass = vote_mass(v, ens.weights, classes);
                        score(i) = mass.sum() - mass(0);
                    }
                }
            }
            else if (strategy == "knn")
            {
                const auto model = load_knn(file.string());
                check_classes(model.n_classes);
                score = RVector::Ones(n) - knn_scores(model, rows.features).col(0);
            }
            else if (strategy == "svm")
            {
                const auto model = load_svm(file.string());
                check_classes(static_cast<std::size_t>(model.weights.rows()));
                const RMatrix s = svm_scores(model, rows.features);
                for (Eigen::Index i = 0; i < n; ++i)
                {
                    const double best = s.row(i).tail(s.cols() - 1).maxCoeff();
                    score(i) = std::isfinite(s(i, 0)) ? best - s(i, 0) : best;
                }
            }
            else
            {
                auto model = load_mlp(file.string());
                check_classes(model.spec().n_classes);
                const RMatrix p = mlp_scores(model, rows.features);
                score = RVector::Ones(n) - p.col(0);
            }
            return score;
        }

        template <typename Fn>
        void parallel_for(std::size_t n, std::size_t jobs, Fn &&fn)
        {
            jobs = std::max<std::size_t>(1, std::min(jobs, n));
            if (jobs == 1)
            {
                for (std::size_t i = 0; i < n; ++i)
                    fn(i);
                return;
            }
            std::atomic<std::size_t> next{0};
            std::exception_ptr failure;
            std::mutex failure_lock;
            std::vector<std::thread> pool;
            for (std::size_t t = 0; t < jobs; ++t)
                pool.emplace_back([&] {
                    for (std::size_t i; (i = next.fetch_add(1)) < n;)
                    {
                        try
                        {
                            fn(i);
                        }
                        catch (...)
                        {
                            std::lock_guard<std::mutex> g(failure_lock);
                            if (!failure)
                                failure = std::current_exception();
                            next = n;
                        }
                    }
                });
            for (auto &t : pool)
                t.join();
            if (failure)
                std::rethrow_exception(failure);
        }

        std::string display_name(const std::string &s)
        {
            static const std::map<std::string, std::string> names{
                {"zf", "ZF (full digital)"}, {"oracle", "Oracle"}, {"greedy", "Greedy energy"}, {"cnn", "CNN"},
                {"ensemble", "Ensemble"},    {"knn", "k-NN"},      {"svm", "SVM"},             {"mlp", "MLP"}};
            const auto it = names.find(s);
            return it == names.end() ? s : it->second;
        }

        std::vector<plot::Series> curves(const std::vector<ResultRow> &rows, const std::string &variable)
        {
            std::vector<plot::Series> out;
            for (const auto &r : rows)
            {
                if (r.sweep_variable != variable)
                    continue;
                auto it = std::find_if(out.begin(), out.end(), [&](const plot::Series &s) { return s.name == display_name(r.strategy); });
                if (it == out.end())
                {
                    out.push_back({display_name(r.strategy), {}, {}, {}});
                    it = out.end() - 1;
                }
                it->x.push_back(r.value);
                it->y.push_back(r.mean_se);
                it->err.push_back(r.std_se);
            }
            return out;
        }

        std::vector<AccuracyRow> collect_metrics(const RunOptions &opt)
        {
            const fs::path dir = fs::path(opt.out_dir) / "metrics";
            std::vector<fs::path> files;
            if (fs::exists(dir))
                for (const auto &e : fs::directory_iterator(dir))
                    if (e.path().extension() == ".json")
                        files.push_back(e.path());
            std::sort(files.begin(), files.end());
            std::vector<AccuracyRow> rows;
            for (const auto &f : files)
                rows.push_back(row_from_metrics(read_json(f)));
            return rows;
        }

        const std::vector<std::string> &matrix_activation_names()
        {
            static const std::vector<std::string> v{"relu", "swish"};
            return v;
        }

        const std::vector<std::string> &matrix_optimizer_names()
        {
            static const std::vector<std::string> v{"sgdm", "adam", "rmsprop"};
            return v;
        }

        std::string matrix_svg(const std::vector<std::vector<double>> &cells)
        {
            return plot::heatmap("CNN balanced accuracy (tx): activation x optimizer", {"ReLU", "Swish"},
                                 {"SGDM", "ADAM", "RMSPROP"}, cells);
        }
    }

    std::vector<ResultRow> cmd_evaluate(const ExperimentConfig &cfg, const RunOptions &opt)
    {
        cfg.validate();
        const auto seeds = cfg.seeds();
        const std::vector<std::string> strategies = opt.strategies.empty() ? cfg.strategies : opt.strategies;
        for (const auto &s : strategies)
            if (std::find(known_strategies().begin(), known_strategies().end(), s) == known_strategies().end())
                throw Error(ErrorKind::config, "unknown strategy '" + s + "'");
        const bool any_learned = std::any_of(strategies.begin(), strategies.end(), is_learned);

        const SelectionConfig sel = cfg.selection.resolved(cfg.channel.n_tx, cfg.channel.n_rx);
        const std::size_t n_eval = cfg.eval.n_realizations;
        const auto &snrs = cfg.eval.snr_grid;
        const auto &nss = cfg.eval.ns_grid;
        say(opt, "evaluate: " + std::to_string(n_eval) + " fresh realizations, eval seed " + std::to_string(seeds.eval));

        std::vector<ChannelRealization> reals;
        reals.reserve(n_eval);
        for (std::size_t j = 0; j < n_eval; ++j)
        {
            Rng rng(derive_seed(seeds.eval, j));
            reals.push_back(generate_realization(cfg.channel, rng));
        }

        // Learned strategies score each side's candidate pool once; the sweeps reuse the scores.
        std::map<std::string, std::array<RVector, 2>> scores;
        std::array<std::vector<std::size_t>, 2> pool_size{};
        std::array<std::vector<std::vector<std::size_t>>, 2> pool_beams;
        if (any_learned)
        {
            const auto data = load_data(cfg, opt);
            std::array<Dataset, 2> rows;
            for (int s = 0; s < 2; ++s)
            {
                rows[s].class_count = n_rf(cfg, s == 0) + 1;
                pool_beams[s].resize(n_eval);
            }
            std::array<std::vector<RMatrix>, 2> blocks;
            for (std::size_t j = 0; j < n_eval; ++j)
            {
                const RVector base = data.stats.apply(realization_base_features(
                    reals[j], cfg.dataset.append_gmm, cfg.dataset.gmm_components, derive_seed(seeds.eval ^ gmm_seed_salt, j)));
                for (int s = 0; s < 2; ++s)
                {
                    auto br = beam_feature_rows(reals[j], cfg.selection, s == 0, base);
                    pool_beams[s][j] = br.beams;
                    blocks[s].push_back(std::move(br.features));
                }
            }
            for (int s = 0; s < 2; ++s)
            {
                Eigen::Index total = 0;
                for (const auto &b : blocks[s])
                    total += b.rows();
                rows[s].features.resize(total, blocks[s].front().cols());
                Eigen::Index at = 0;
                for (std::size_t j = 0; j < n_eval; ++j)
                {
                    rows[s].features.middleRows(at, blocks[s][j].rows()) = blocks[s][j];
                    at += blocks[s][j].rows();
                    for (Eigen::Index r = 0; r < blocks[s][j].rows(); ++r)
                    {
                        rows[s].labels.push_back(0);
                        rows[s].realization_ids.push_back(j);
                    }
                }
            }
            for (const auto &st : strategies)
                if (is_learned(st))
                {
                    say(opt, "  scoring candidate beams with " + st);
                    for (int s = 0; s < 2; ++s)
                        scores[st][s] = learned_scores(st, cfg, opt, s == 0, rows[s], data.tx.feature_count());
                }
        }

        const std::size_t n_strat = strategies.size();
        std::vector<PointResults> per(n_eval);
        parallel_for(n_eval, opt.jobs, [&](std::size_t j) {
            const CMatrix &hb = reals[j].beamspace;
            PointResults &pr = per[j];
            pr.se_snr.assign(n_strat, std::vector<double>(snrs.size(), 0.0));
            pr.acc_snr = pr.se_snr;
            pr.se_ns.assign(n_strat, std::vector<double>(nss.size(), 0.0));
            pr.acc_ns = pr.se_ns;

            const RVector et = tx_beam_energy(hb), er = rx_beam_energy(hb);
            // Top-count beams of one side ranked by a learned score, energy breaking ties.
            auto learned_pick = [&](const std::string &st, int s, std::size_t count) {
                const auto &beams = pool_beams[s][j];
                const auto n = static_cast<Eigen::Index>(beams.size());
                RVector sc(n), en(n);
                std::size_t offset = 0;
                for (std::size_t k = 0; k < j; ++k)
                    offset += pool_beams[s][k].size();
                for (Eigen::Index i = 0; i < n; ++i)
                {
                    sc(i) = scores.at(st)[s](static_cast<Eigen::Index>(offset) + i);
                    en(i) = (s == 0 ? et : er)(static_cast<Eigen::Index>(beams[static_cast<std::size_t>(i)]));
                }
                std::vector<std::size_t> out;
                for (auto idx : select_by_score(sc, en, count))
                    out.push_back(beams[idx]);
                std::sort(out.begin(), out.end());
                return out;
            };

            std::vector<OracleResult> oracle_snr;
            for (double snr : snrs)
                oracle_snr.push_back(oracle_select(hb, sel, snr));
            for (std::size_t k = 0; k < nss.size(); ++k)
            {
                SelectionConfig c = sel;
                c.n_rf_tx = c.n_rf_rx = nss[k];
                const auto orc = oracle_select(hb, c, cfg.eval.ns_sweep_snr_db);
                for (std::size_t s = 0; s < n_strat; ++s)
                {
                    const auto &st = strategies[s];
                    if (st == "zf")
                    {
                        pr.se_ns[s][k] = zf_benchmark(hb, cfg.eval.ns_sweep_snr_db, nss[k]);
                        continue;
                    }
                    BeamSelection pick;
                    if (st == "oracle")
                        pick = orc.selection;
                    else if (st == "greedy")
                        pick = greedy_energy_select(hb, c);
                    else
                        pick = {learned_pick(st, 0, nss[k]), learned_pick(st, 1, nss[k])};
                    pr.se_ns[s][k] = st == "oracle" ? orc.se : se_of(hb, pick, cfg.eval.ns_sweep_snr_db);
                    pr.acc_ns[s][k] = overlap(pick, orc.selection);
                }
            }
            for (std::size_t s = 0; s < n_strat; ++s)
            {
                const auto &st = strategies[s];
                std::optional<BeamSelection> fixed;
                if (st == "greedy")
                    fixed = greedy_energy_select(hb, sel);
                else if (is_learned(st))
                    fixed = BeamSelection{learned_pick(st, 0, sel.n_rf_tx), learned_pick(st, 1, sel.n_rf_rx)};
                for (std::size_t k = 0; k < snrs.size(); ++k)
                {
                    if (st == "zf")
                        pr.se_snr[s][k] = zf_benchmark(hb, snrs[k], sel.n_streams());
                    else if (st == "oracle")
                    {
                        pr.se_snr[s][k] = oracle_snr[k].se;
                        pr.acc_snr[s][k] = 1.0;
                    }
                    else
                    {
                        pr.se_snr[s][k] = se_of(hb, *fixed, snrs[k]);
                        pr.acc_snr[s][k] = overlap(*fixed, oracle_snr[k].selection);
                    }
                }
            }
        });

        std::vector<ResultRow> rows;
        auto aggregate = [&](const std::string &variable, const std::vector<double> &grid, bool snr_sweep) {
            for (std::size_t s = 0; s < n_strat; ++s)
                for (std::size_t k = 0; k < grid.size(); ++k)
                {
                    std::vector<double> se, acc;
                    for (const auto &pr : per)
                    {
                        se.push_back((snr_sweep ? pr.se_snr : pr.se_ns)[s][k]);
                        acc.push_back((snr_sweep ? pr.acc_snr : pr.acc_ns)[s][k]);
                    }
                    ResultRow r;
                    r.strategy = strategies[s];
                    r.sweep_variable = variable;
                    r.value = grid[k];
                    r.mean_se = mean_of(se);
                    r.std_se = std_of(se);
                    if (strategies[s] != "zf")
                        r.accuracy = mean_of(acc);
                    r.n_realizations = n_eval;
                    r.seed = cfg.seed;
                    if (!std::isfinite(r.mean_se) || r.mean_se < 0.0)
                        throw Error(ErrorKind::degenerate_channel, "non-finite or negative mean SE for " + r.strategy);
                    rows.push_back(r);
                }
        };
        aggregate("snr_db", snrs, true);
        aggregate("n_streams", std::vector<double>(nss.begin(), nss.end()), false);

        const fs::path root(opt.out_dir);
        std::ostringstream table;
        write_result_csv(table, rows);
        write_text(root / "results" / "results.csv", table.str());

        const auto acc_rows = collect_metrics(opt);
        std::ostringstream acc;
        write_accuracy_csv(acc, acc_rows);
        write_text(root / "results" / "accuracy.csv", acc.str());

        write_text(root / "plots" / "se_vs_snr.svg",
                   plot::line_chart("Spectral efficiency vs SNR (N_s = " + std::to_string(sel.n_streams()) + ")",
                                    "SNR (dB)", "SE (bit/s/Hz)", curves(rows, "snr_db")));
        write_text(root / "plots" / "se_vs_ns.svg",
                   plot::line_chart("Spectral efficiency vs N_s (SNR = " + fmt(cfg.eval.ns_sweep_snr_db) + " dB)",
                                    "N_s", "SE (bit/s/Hz)", curves(rows, "n_streams")));
        std::vector<plot::Bar> bars;
        std::vector<std::vector<double>> cells(2, std::vector<double>(3, std::nan("")));
        for (const auto &r : acc_rows)
        {
            if (r.side != "tx")
                continue;
            const bool primary_cnn = r.strategy == "cnn" && r.activation == nn::to_string(cfg.net.activation) &&
                                     r.optimizer == nn::to_string(cfg.train.optimizer);
            if (r.strategy != "cnn" || primary_cnn)
                bars.push_back({display_name(r.strategy), r.balanced_accuracy, 0.0});
            if (r.strategy == "cnn")
            {
                const auto &an = matrix_activation_names(), &on = matrix_optimizer_names();
                const auto a = std::find(an.begin(), an.end(), r.activation);
                const auto o = std::find(on.begin(), on.end(), r.optimizer);
                if (a != an.end() && o != on.end())
                    cells[static_cast<std::size_t>(a - an.begin())][static_cast<std::size_t>(o - on.begin())] =
                        r.balanced_accuracy;
            }
        }
        write_text(root / "plots" / "accuracy.svg",
                   plot::bar_chart("Per-beam balanced accuracy (tx, validation)", "balanced accuracy", bars));
        write_text(root / "plots" / "matrix.svg", matrix_svg(cells));
        return rows;
    }

    // ------------------------------------------------------------------------ report

    std::string cmd_report(const std::vector<std::string> &run_dirs, const std::string &out_dir)
    {
        if (run_dirs.empty())
            throw Error(ErrorKind::invalid_argument, "report needs at least one run directory");
        std::vector<ResultRow> results;
        std::vector<AccuracyRow> accs;
        std::set<std::uint64_t> seeds;
        for (const auto &d : run_dirs)
        {
            const fs::path rp = fs::path(d) / "results" / "results.csv";
            std::ifstream in(rp);
            if (!in)
                throw Error(ErrorKind::io, "no result table at '" + rp.string() + "'; run evaluate first");
            try
            {
                for (auto &r : read_result_csv(in))
                {
                    seeds.insert(r.seed);
                    results.push_back(r);
                }
            }
            catch (const Error &e)
            {
                throw Error(ErrorKind::io, rp.string() + ": " + e.what());
            }
            const fs::path ap = fs::path(d) / "results" / "accuracy.csv";
            if (std::ifstream ain(ap); ain)
            {
                try
                {
                    for (auto &r : read_accuracy_csv(ain))
                        accs.push_back(r);
                }
                catch (const Error &e)
                {
                    throw Error(ErrorKind::io, ap.string() + ": " + e.what());
                }
            }
        }
        if (seeds.size() != run_dirs.size())
            throw Error(ErrorKind::invalid_argument, "run directories must come from distinct seeds");

        auto pm = [](const std::vector<double> &v) {
            if (v.empty())
                return std::string("n/a");
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.2f ± %.2f", mean_of(v), std_of(v));
            return std::string(buf);
        };
        auto pct = [](const std::vector<double> &v) {
            if (v.empty())
                return std::string("n/a");
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.1f%% ± %.1f", 100.0 * mean_of(v), 100.0 * std_of(v));
            return std::string(buf);
        };

        std::ostringstream md;
        md << "# beamsel comparison report\n\n";
        md << "Seeds: ";
        for (auto it = seeds.begin(); it != seeds.end(); ++it)
            md << (it == seeds.begin() ? "" : ", ") << *it;
        md << " (" << seeds.size() << " run" << (seeds.size() == 1 ? "" : "s")
           << "). Values are mean ± standard deviation across seeds.\n\n";

        // Activation x optimizer matrix.
        md << "## CNN accuracy by activation and optimizer (tx side, validation)\n\n";
        md << "Cells: balanced accuracy / plain accuracy.\n\n";
        md << "| activation | SGDM | ADAM | RMSPROP |\n|---|---|---|---|\n";
        std::vector<std::vector<double>> cells(2, std::vector<double>(3, std::nan("")));
        std::map<std::string, std::vector<double>> by_activation;
        for (std::size_t a = 0; a < 2; ++a)
        {
            md << "| " << (a == 0 ? "ReLU" : "Swish") << " |";
            for (std::size_t o = 0; o < 3; ++o)
            {
                std::vector<double> bal, plain;
                for (const auto &r : accs)
                    if (r.strategy == "cnn" && r.side == "tx" && r.activation == matrix_activation_names()[a] &&
                        r.optimizer == matrix_optimizer_names()[o])
                    {
                        bal.push_back(r.balanced_accuracy);
                        plain.push_back(r.accuracy);
                        by_activation[matrix_activation_names()[a]].push_back(r.balanced_accuracy);
                    }
                if (!bal.empty())
                    cells[a][o] = mean_of(bal);
                md << ' ' << pct(bal) << " / " << pct(plain) << " |";
            }
            md << '\n';
        }
        md << '\n';

        // Per-strategy classifier accuracy.
        md << "## Per-beam classification accuracy (validation)\n\n";
        md << "| strategy | side | balanced accuracy | accuracy |\n|---|---|---|---|\n";
        std::map<std::pair<std::string, std::string>, std::pair<std::vector<double>, std::vector<double>>> by_strategy;
        std::vector<std::string> order;
        for (const auto &r : accs)
        {
            if (r.strategy == "cnn")
            {
                // only the configured pair, identified as the one trained on both sides
                bool has_rx = false;
                for (const auto &q : accs)
                    has_rx |= q.strategy == "cnn" && q.side == "rx" && q.activation == r.activation &&
                              q.optimizer == r.optimizer && q.seed == r.seed;
                if (!has_rx)
                    continue;
            }
            auto &slot = by_strategy[{r.strategy, r.side}];
            slot.first.push_back(r.balanced_accuracy);
            slot.second.push_back(r.accuracy);
            if (std::find(order.begin(), order.end(), r.strategy) == order.end())
                order.push_back(r.strategy);
        }
        const std::vector<std::string> preferred{"cnn", "ensemble", "knn", "svm", "mlp"};
        std::vector<plot::Bar> bars;
        for (const auto &st : preferred)
            for (const char *side : {"tx", "rx"})
            {
                const auto it = by_strategy.find({st, side});
                if (it == by_strategy.end())
                    continue;
                md << "| " << display_name(st) << " | " << side << " | " << pct(it->second.first) << " | "
                   << pct(it->second.second) << " |\n";
                if (std::string(side) == "tx")
                    bars.push_back({display_name(st), mean_of(it->second.first), std_of(it->second.first)});
            }
        md << '\n';

        // SE tables.
        auto se_table = [&](const std::string &variable, const std::string &title, const std::string &unit) {
            std::vector<std::string> strategies;
            std::vector<double> grid;
            for (const auto &r : results)
                if (r.sweep_variable == variable)
                {
                    if (std::find(strategies.begin(), strategies.end(), r.strategy) == strategies.end())
                        strategies.push_back(r.strategy);
                    if (std::find(grid.begin(), grid.end(), r.value) == grid.end())
                        grid.push_back(r.value);
                }
            std::sort(grid.begin(), grid.end());
            md << "## " << title << "\n\nMean SE in bit/s/Hz; ± is the spread of per-seed means.\n\n| " << unit << " |";
            for (const auto &s : strategies)
                md << ' ' << display_name(s) << " |";
            md << "\n|---|";
            for (std::size_t i = 0; i < strategies.size(); ++i)
                md << "---|";
            md << '\n';
            std::vector<plot::Series> series;
            for (const auto &s : strategies)
                series.push_back({display_name(s), {}, {}, {}});
            for (double g : grid)
            {
                md << "| " << fmt(g) << " |";
                for (std::size_t i = 0; i < strategies.size(); ++i)
                {
                    std::vector<double> v;
                    for (const auto &r : results)
                        if (r.sweep_variable == variable && r.strategy == strategies[i] && r.value == g)
                            v.push_back(r.mean_se);
                    md << ' ' << pm(v) << " |";
                    if (!v.empty())
                    {
                        series[i].x.push_back(g);
                        series[i].y.push_back(mean_of(v));
                        series[i].err.push_back(std_of(v));
                    }
                }
                md << '\n';
            }
            md << '\n';
            return series;
        };
        const auto snr_series = se_table("snr_db", "Spectral efficiency vs SNR", "SNR (dB)");
        const auto ns_series = se_table("n_streams", "Spectral efficiency vs number of streams", "N_s");

        // Seed-averaged trends.
        md << "## Trends (seed-averaged, informational)\n\n";
        auto trend = [&](const std::string &label, const std::vector<double> &a, const std::vector<double> &b,
                         const std::string &na, const std::string &nb) {
            if (a.empty() || b.empty())
            {
                md << "- " << label << ": not available (missing runs)\n";
                return;
            }
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s %.1f%% vs %s %.1f%% (difference %+.1f points)", na.c_str(),
                          100.0 * mean_of(a), nb.c_str(), 100.0 * mean_of(b), 100.0 * (mean_of(a) - mean_of(b)));
            md << "- " << label << ": " << buf << (mean_of(a) >= mean_of(b) ? "; ordering holds" : "; ordering reversed")
               << '\n';
        };
        trend("Swish vs ReLU (CNN, mean over optimizers, balanced)", by_activation["swish"], by_activation["relu"],
              "Swish", "ReLU");
        auto tx_bal = [&](const std::string &s) {
            const auto it = by_strategy.find({s, "tx"});
            return it == by_strategy.end() ? std::vector<double>{} : it->second.first;
        };
        trend("CNN vs MLP (tx, balanced)", tx_bal("cnn"), tx_bal("mlp"), "CNN", "MLP");
        trend("CNN vs k-NN (tx, balanced)", tx_bal("cnn"), tx_bal("knn"), "CNN", "k-NN");
        trend("CNN vs SVM (tx, balanced)", tx_bal("cnn"), tx_bal("svm"), "CNN", "SVM");
        trend("Ensemble vs CNN (tx, balanced)", tx_bal("ensemble"), tx_bal("cnn"), "Ensemble", "CNN");
        md << "\nBaseline hyperparameters (k-NN k, SVM lambda, MLP widths) are fixed defaults, not tuned values.\n";

        const fs::path out(out_dir);
        write_text(out / "report.md", md.str());
        write_text(out / "plots" / "se_vs_snr_mean.svg",
                   plot::line_chart("Spectral efficiency vs SNR (mean over seeds)", "SNR (dB)", "SE (bit/s/Hz)", snr_series));
        write_text(out / "plots" / "se_vs_ns_mean.svg",
                   plot::line_chart("Spectral efficiency vs N_s (mean over seeds)", "N_s", "SE (bit/s/Hz)", ns_series));
        write_text(out / "plots" / "accuracy_mean.svg",
                   plot::bar_chart("Per-beam balanced accuracy (tx, mean over seeds)", "balanced accuracy", bars));
        write_text(out / "plots" / "matrix_mean.svg", matrix_svg(cells));
        return md.str();
    }
}

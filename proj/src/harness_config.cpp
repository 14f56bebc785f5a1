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
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace beamsel::harness
{
    namespace
    {
        struct FieldError
        {
            std::string field; // dotted path
            std::string reason;
        };

        std::optional<FieldError> first_problem(const ExperimentConfig &c)
        {
            auto guard = [](const std::string &field, auto &&fn) -> std::optional<FieldError> {
                try
                {
                    fn();
                }
                catch (const std::exception &e)
                {
                    return FieldError{field, e.what()};
                }
                return std::nullopt;
            };
            if (auto e = guard("channel", [&] { c.channel.validate(); }))
                return e;
            if (auto e = guard("selection", [&] { (void)c.selection.resolved(c.channel.n_tx, c.channel.n_rx); }))
                return e;
            const auto &d = c.dataset;
            if (d.n_realizations < 2)
                return FieldError{"dataset.n_realizations", "must be >= 2"};
            if (!(d.train_fraction > 0.0 && d.train_fraction < 1.0))
                return FieldError{"dataset.train_fraction", "must lie in (0, 1)"};
            if (d.image_side < 4)
                return FieldError{"dataset.image_side", "must be >= 4"};
            if (c.net.kind != nn::NetworkKind::inception)
                return FieldError{"net.kind", "the cnn strategy needs an inception network"};
            if (c.net.input_side != d.image_side)
                return FieldError{"net.input_side", "must equal dataset.image_side"};
            if (auto e = guard("net", [&] {
                    auto spec = c.net;
                    spec.n_classes = c.selection.n_rf_tx + 1;
                    spec.validate();
                }))
                return e;
            if (auto e = guard("train", [&] { c.train.validate(); }))
                return e;
            if (auto e = guard("ensemble", [&] { c.ensemble.validate(); }))
                return e;
            if (c.knn_k < 1)
                return FieldError{"baselines.knn_k", "must be >= 1"};
            if (!(c.svm.lambda > 0.0) || c.svm.epochs == 0 || c.svm.minibatch == 0 || !(c.svm.initial_lr > 0.0))
                return FieldError{"baselines.svm", "lambda, epochs, minibatch and initial_lr must be positive"};
            if (c.mlp_hidden.empty() || std::count(c.mlp_hidden.begin(), c.mlp_hidden.end(), 0u))
                return FieldError{"baselines.mlp_hidden", "needs at least one nonzero width"};

            const auto &ev = c.eval;
            if (ev.n_realizations < 1)
                return FieldError{"eval.n_realizations", "must be >= 1"};
            if (ev.snr_grid.empty() || !std::is_sorted(ev.snr_grid.begin(), ev.snr_grid.end()) ||
                std::adjacent_find(ev.snr_grid.begin(), ev.snr_grid.end()) != ev.snr_grid.end())
                return FieldError{"eval.snr_grid", "must be nonempty and strictly increasing"};
            if (ev.ns_grid.empty() || !std::is_sorted(ev.ns_grid.begin(), ev.ns_grid.end()) ||
                std::adjacent_find(ev.ns_grid.begin(), ev.ns_grid.end()) != ev.ns_grid.end())
                return FieldError{"eval.ns_grid", "must be nonempty and strictly increasing"};
            const auto resolved = c.selection.resolved(c.channel.n_tx, c.channel.n_rx);
            const std::size_t ns_max = std::min(resolved.candidate_pool_tx, resolved.candidate_pool_rx);
            if (ev.ns_grid.front() < 1 || ev.ns_grid.back() > ns_max)
                return FieldError{"eval.ns_grid",
                                  "values must lie in [1, " + std::to_string(ns_max) + "] (smaller candidate pool)"};

            if (c.strategies.empty())
                return FieldError{"strategies", "must not be empty"};
            std::set<std::string> seen;
            for (const auto &s : c.strategies)
            {
                if (std::find(known_strategies().begin(), known_strategies().end(), s) == known_strategies().end())
                    return FieldError{"strategies", "unknown strategy '" + s + "'"};
                if (!seen.insert(s).second)
                    return FieldError{"strategies", "duplicate strategy '" + s + "'"};
            }
            if (c.matrix_activations.empty())
                return FieldError{"matrix.activations", "must not be empty"};
            if (c.matrix_optimizers.empty())
                return FieldError{"matrix.optimizers", "must not be empty"};
            return std::nullopt;
        }

        // 1-based line of the first `"key"` on the dotted path, or 0 when not found.
        std::size_t line_of(const std::string &text, const std::string &field)
        {
            std::size_t pos = 0;
            std::size_t found = std::string::npos;
            std::stringstream parts(field);
            std::string key;
            while (std::getline(parts, key, '.'))
            {
                const auto p = text.find("\"" + key + "\"", pos);
                if (p == std::string::npos)
                    break;
                found = pos = p;
            }
            if (found == std::string::npos)
                return 0;
            return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(found), '\n'));
        }

        [[noreturn]] void fail(const std::string &source, const std::string &text, const std::string &field,
                               const std::string &reason)
        {
            const std::size_t line = line_of(text, field);
            throw Error(ErrorKind::config, source + ":" + (line ? std::to_string(line) : std::string("?")) + ": " +
                                               field + ": " + reason);
        }

        void check_keys(const nlohmann::json &j, const std::string &section, const std::set<std::string> &allowed,
                        const std::string &source, const std::string &text)
        {
            if (!j.is_object())
                fail(source, text, section, "must be an object");
            for (const auto &[k, v] : j.items())
                if (!allowed.count(k))
                    fail(source, text, section.empty() ? k : section + "." + k, "unknown field");
        }

        std::set<std::string> keys_of(const nlohmann::json &j)
        {
            std::set<std::string> out;
            for (const auto &[k, v] : j.items())
                out.insert(k);
            return out;
        }

        const char *embedding_name(Embedding e) { return e == Embedding::tiling ? "tiling" : "outer_product"; }
    }

    const std::vector<std::string> &known_strategies()
    {
        static const std::vector<std::string> names{"zf", "oracle", "greedy", "cnn", "ensemble", "knn", "svm", "mlp"};
        return names;
    }

    bool is_learned(const std::string &s) { return s == "cnn" || s == "ensemble" || s == "knn" || s == "svm" || s == "mlp"; }

    Seeds ExperimentConfig::seeds() const
    {
        Seeds s;
        s.dataset = dataset_seed ? *dataset_seed : derive_seed(seed, 1);
        s.split = derive_seed(seed, 2);
        s.init = derive_seed(seed, 3);
        s.train = derive_seed(seed, 4);
        s.ensemble = derive_seed(seed, 5);
        s.baselines = derive_seed(seed, 6);
        s.eval = eval_seed ? *eval_seed : derive_seed(seed, 7);
        return s;
    }

    ExperimentConfig ExperimentConfig::with_seed(std::uint64_t s) const
    {
        ExperimentConfig c = *this;
        c.seed = s;
        c.dataset_seed.reset();
        c.eval_seed.reset();
        return c;
    }

    void ExperimentConfig::validate() const
    {
        if (auto e = first_problem(*this))
            throw Error(ErrorKind::config, e->field + ": " + e->reason);
    }

    nlohmann::json to_json(const ExperimentConfig &c)
    {
        nlohmann::json j;
        j["schema_version"] = schema_version;
        j["seed"] = c.seed;
        j["channel"] = to_json(c.channel);
        j["channel"].erase("seed");
        j["selection"] = to_json(c.selection);
        j["dataset"] = {{"n_realizations", c.dataset.n_realizations},
                        {"train_fraction", c.dataset.train_fraction},
                        {"label_snr_db", c.dataset.label_snr_db},
                        {"append_gmm", c.dataset.append_gmm},
                        {"gmm_components", c.dataset.gmm_components},
                        {"image_side", c.dataset.image_side},
                        {"embedding", embedding_name(c.dataset.embedding)}};
        if (c.dataset_seed)
            j["dataset"]["seed"] = *c.dataset_seed;
        j["net"] = nn::to_json(c.net);
        j["train"] = nn::to_json(c.train);
        j["train"].erase("seed");
        j["ensemble"] = to_json(c.ensemble);
        j["ensemble"].erase("seed");
        j["baselines"] = {{"knn_k", c.knn_k},
                          {"mlp_hidden", c.mlp_hidden},
                          {"svm",
                           {{"lambda", c.svm.lambda},
                            {"epochs", c.svm.epochs},
                            {"minibatch", c.svm.minibatch},
                            {"initial_lr", c.svm.initial_lr},
                            {"balance_classes", c.svm.balance_classes}}}};
        j["eval"] = {{"n_realizations", c.eval.n_realizations},
                     {"snr_grid", c.eval.snr_grid},
                     {"ns_grid", c.eval.ns_grid},
                     {"ns_sweep_snr_db", c.eval.ns_sweep_snr_db}};
        if (c.eval_seed)
            j["eval"]["seed"] = *c.eval_seed;
        j["strategies"] = c.strategies;
        std::vector<std::string> acts, opts;
        for (const auto &a : c.matrix_activations)
            acts.push_back(nn::to_string(a));
        for (auto o : c.matrix_optimizers)
            opts.push_back(nn::to_string(o));
        j["matrix"] = {{"activations", acts}, {"optimizers", opts}};
        return j;
    }

    ExperimentConfig parse_config(const std::string &text, const std::string &source)
    {
        nlohmann::json j;
        try
        {
            j = nlohmann::json::parse(text);
        }
        catch (const nlohmann::json::parse_error &e)
        {
            const auto upto = std::min<std::size_t>(e.byte, text.size());
            const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
            throw Error(ErrorKind::config, source + ":" + std::to_string(line) + ": syntax error: " + e.what());
        }
        if (!j.is_object())
            fail(source, text, "<root>", "must be an object");

        const ExperimentConfig defaults;
        const nlohmann::json reference = to_json(defaults);
        check_keys(j, "", keys_of(reference), source, text);
        if (!j.contains("schema_version"))
            fail(source, text, "schema_version", "missing");

        ExperimentConfig c;
        std::string section;
        try
        {
            section = "schema_version";
            if (j.at("schema_version").get<int>() != schema_version)
                fail(source, text, section, "unsupported version (expected " + std::to_string(schema_version) + ")");
            section = "seed";
            c.seed = j.value("seed", c.seed);

            auto sub = [&](const char *name) -> nlohmann::json {
                section = name;
                if (!j.contains(name))
                    return nlohmann::json::object();
                auto allowed = keys_of(reference.at(name));
                if (section == "channel" || section == "train" || section == "ensemble" || section == "dataset" ||
                    section == "eval")
                    allowed.insert("seed");
                check_keys(j.at(name), name, allowed, source, text);
                return j.at(name);
            };

            const auto jc = sub("channel");
            if (jc.contains("seed"))
                fail(source, text, "channel.seed", "channel draws are seeded through dataset.seed and eval.seed");
            c.channel = channel_config_from_json(jc);
            c.selection = selection_config_from_json(sub("selection"));

            const auto jd = sub("dataset");
            section = "dataset";
            c.dataset.n_realizations = jd.value("n_realizations", c.dataset.n_realizations);
            c.dataset.train_fraction = jd.value("train_fraction", c.dataset.train_fraction);
            c.dataset.label_snr_db = jd.value("label_snr_db", c.dataset.label_snr_db);
            c.dataset.append_gmm = jd.value("append_gmm", c.dataset.append_gmm);
            c.dataset.gmm_components = jd.value("gmm_components", c.dataset.gmm_components);
            c.dataset.image_side = jd.value("image_side", c.dataset.image_side);
            const auto emb = jd.value("embedding", std::string(embedding_name(c.dataset.embedding)));
            if (emb == "outer_product")
                c.dataset.embedding = Embedding::outer_product;
            else if (emb == "tiling")
                c.dataset.embedding = Embedding::tiling;
            else
                fail(source, text, "dataset.embedding", "expected outer_product or tiling");
            if (jd.contains("seed"))
                c.dataset_seed = jd.at("seed").get<std::uint64_t>();

            if (j.contains("net"))
            {
                section = "net";
                check_keys(j.at("net"), "net", keys_of(reference.at("net")), source, text);
                c.net = nn::network_spec_from_json(j.at("net"));
            }
            else
                c.net.input_side = c.dataset.image_side;
            const auto jt = sub("train");
            if (jt.contains("seed"))
                fail(source, text, "train.seed", "training seeds derive from the top-level seed");
            c.train = nn::train_config_from_json(jt);
            const auto je = sub("ensemble");
            if (je.contains("seed"))
                fail(source, text, "ensemble.seed", "ensemble seeds derive from the top-level seed");
            c.ensemble = ensemble_config_from_json(je);

            section = "baselines";
            const nlohmann::json jb = j.value("baselines", nlohmann::json::object());
            check_keys(jb, "baselines", keys_of(reference.at("baselines")), source, text);
            c.knn_k = jb.value("knn_k", c.knn_k);
            c.mlp_hidden = jb.value("mlp_hidden", c.mlp_hidden);
            if (jb.contains("svm"))
            {
                section = "baselines.svm";
                const auto &js = jb.at("svm");
                check_keys(js, "baselines.svm", keys_of(reference.at("baselines").at("svm")), source, text);
                c.svm.lambda = js.value("lambda", c.svm.lambda);
                c.svm.epochs = js.value("epochs", c.svm.epochs);
                c.svm.minibatch = js.value("minibatch", c.svm.minibatch);
                c.svm.initial_lr = js.value("initial_lr", c.svm.initial_lr);
                c.svm.balance_classes = js.value("balance_classes", c.svm.balance_classes);
            }

            const auto jv = sub("eval");
            section = "eval";
            c.eval.n_realizations = jv.value("n_realizations", c.eval.n_realizations);
            c.eval.snr_grid = jv.value("snr_grid", c.eval.snr_grid);
            c.eval.ns_grid = jv.value("ns_grid", c.eval.ns_grid);
            c.eval.ns_sweep_snr_db = jv.value("ns_sweep_snr_db", c.eval.ns_sweep_snr_db);
            if (jv.contains("seed"))
                c.eval_seed = jv.at("seed").get<std::uint64_t>();

            section = "strategies";
            c.strategies = j.value("strategies", c.strategies);
            if (j.contains("matrix"))
            {
                section = "matrix";
                const auto &jm = j.at("matrix");
                check_keys(jm, "matrix", keys_of(reference.at("matrix")), source, text);
                if (jm.contains("activations"))
                {
                    c.matrix_activations.clear();
                    for (const auto &a : jm.at("activations"))
                        c.matrix_activations.push_back(nn::parse_activation(a.get<std::string>()));
                }
                if (jm.contains("optimizers"))
                {
                    c.matrix_optimizers.clear();
                    for (const auto &o : jm.at("optimizers"))
                        c.matrix_optimizers.push_back(nn::parse_optimizer(o.get<std::string>()));
                }
            }
        }
        catch (const nlohmann::json::exception &e)
        {
            fail(source, text, section, e.what());
        }
        catch (const Error &e)
        {
            const std::string formatted = std::string(to_string(ErrorKind::config)) + ": " + source + ":";
            if (e.kind() == ErrorKind::config && std::string(e.what()).rfind(formatted, 0) == 0)
                throw;
            fail(source, text, section, e.what());
        }

        if (auto e = first_problem(c))
            fail(source, text, e->field, e->reason);
        return c;
    }

    ExperimentConfig load_config(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw Error(ErrorKind::io, "cannot open config '" + path + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        return parse_config(buf.str(), path);
    }

    std::string resolve_out_dir(const std::string &explicit_dir)
    {
        if (!explicit_dir.empty())
            return explicit_dir;
        if (const char *env = std::getenv("BEAMSEL_OUT"); env && *env)
            return env;
        return "beamsel_out";
    }
}

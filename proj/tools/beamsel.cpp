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

#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "beamsel/harness.hpp"

using namespace beamsel;

namespace
{
    std::vector<std::string> split_list(const std::string &s)
    {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty())
                out.push_back(item);
        return out;
    }

    struct Common
    {
        std::string config;
        std::optional<std::uint64_t> seed;
        std::string out;
        std::string strategy;
        std::string activation;
        std::string optimizer;
        std::size_t jobs = 1;
    };

    harness::ExperimentConfig load(const Common &c)
    {
        auto cfg = c.config.empty() ? harness::ExperimentConfig{} : harness::load_config(c.config);
        if (c.seed)
            cfg = cfg.with_seed(*c.seed);
        cfg.validate();
        return cfg;
    }

    harness::RunOptions options(const Common &c, const harness::ExperimentConfig &cfg)
    {
        harness::RunOptions o;
        o.out_dir = harness::resolve_out_dir(c.out);
        o.jobs = c.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : c.jobs;
        o.log = &std::cerr;
        if (!c.strategy.empty() && c.strategy != "all")
            o.strategies = split_list(c.strategy);
        if (c.activation == "all")
            o.activations = cfg.matrix_activations;
        else
            for (const auto &a : split_list(c.activation))
                o.activations.push_back(nn::parse_activation(a));
        if (c.optimizer == "all")
            o.optimizers = cfg.matrix_optimizers;
        else
            for (const auto &p : split_list(c.optimizer))
                o.optimizers.push_back(nn::parse_optimizer(p));
        return o;
    }

    void add_common(CLI::App *app, Common &c, bool training_flags)
    {
        app->add_option("--config", c.config, "Experiment configuration (JSON)");
        app->add_option("--seed", c.seed, "Replace the experiment seed; every other seed derives from it");
        app->add_option("--out", c.out, "Output directory (default: $BEAMSEL_OUT, else ./beamsel_out)");
        app->add_option("--strategy", c.strategy,
                        "Comma-separated strategies (zf, oracle, greedy, cnn, ensemble, knn, svm, mlp) or 'all'");
        if (training_flags)
        {
            app->add_option("--activation", c.activation, "CNN activation(s): relu, swish, leaky_relu[:s], sigmoid, or 'all'");
            app->add_option("--optimizer", c.optimizer, "CNN optimizer(s): sgdm, adam, rmsprop, or 'all'");
        }
        app->add_option("--jobs", c.jobs, "Worker threads for evaluation (0 = all cores)");
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"beamsel: analog beam selection for THz beamspace MIMO"};
    app.require_subcommand(1);

    Common gen, train, eval, report;
    std::vector<std::string> runs;
    auto *c_gen = app.add_subcommand("gen-data", "Generate and label the beam datasets");
    add_common(c_gen, gen, false);
    auto *c_train = app.add_subcommand("train", "Train learned strategies on the generated dataset");
    add_common(c_train, train, true);
    auto *c_eval = app.add_subcommand("evaluate", "Run SNR and stream sweeps on fresh realizations");
    add_common(c_eval, eval, false);
    auto *c_report = app.add_subcommand("report", "Aggregate run directories into a markdown report");
    c_report->add_option("runs", runs, "Run directories (one per seed)")->required();
    c_report->add_option("--out", report.out, "Where report.md and the mean plots go");
    auto *c_self = app.add_subcommand("selftest", "Quick built-in consistency checks");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*c_gen)
        {
            const auto cfg = load(gen);
            const auto s = harness::cmd_gen_data(cfg, options(gen, cfg));
            std::cout << "tx samples: " << s.tx_samples << "\nrx samples: " << s.rx_samples << '\n';
            for (int side = 0; side < 2; ++side)
            {
                const auto &h = side == 0 ? s.tx_histogram : s.rx_histogram;
                std::cout << (side == 0 ? "tx" : "rx") << " label histogram:";
                for (std::size_t k = 0; k < h.size(); ++k)
                    std::cout << ' ' << k << '=' << h[k];
                std::cout << '\n';
            }
        }
        else if (*c_train)
        {
            const auto cfg = load(train);
            const auto rows = harness::cmd_train(cfg, options(train, cfg));
            harness::write_accuracy_csv(std::cout, rows);
        }
        else if (*c_eval)
        {
            const auto cfg = load(eval);
            const auto rows = harness::cmd_evaluate(cfg, options(eval, cfg));
            harness::write_result_csv(std::cout, rows);
        }
        else if (*c_report)
        {
            std::cout << harness::cmd_report(runs, harness::resolve_out_dir(report.out));
        }
        else if (*c_self)
        {
            const int failures = harness::cmd_selftest(std::cout);
            return failures == 0 ? 0 : 1;
        }
    }
    catch (const std::exception &e)
    {
        std::cerr << "beamsel: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

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

// Acceptance runner: one PASS/FAIL line per criterion.
//   acceptance            run every criterion
//   acceptance 3 8        run a selection
// Long-running criteria write into $BEAMSEL_ACCEPTANCE_DIR (default: <build>/acceptance_work).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "beamsel/dataset.hpp"
#include "beamsel/ensemble.hpp"
#include "beamsel/gmm.hpp"
#include "beamsel/harness.hpp"
#include "beamsel/image.hpp"

#include "../support/nn_oracles.hpp"
#include "../support/se_oracles.hpp"

using namespace beamsel;
namespace fs = std::filesystem;

namespace
{
    struct Outcome
    {
        bool pass = false;
        std::string detail;
    };

    struct Criterion
    {
        int id;
        std::string name;
        double budget_s;
        std::function<Outcome()> run;
    };

    std::string fmt(const char *f, double a)
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, f, a);
        return buf;
    }

    fs::path work_dir()
    {
        if (const char *env = std::getenv("BEAMSEL_ACCEPTANCE_DIR"); env && *env)
            return env;
        return BEAMSEL_ACCEPTANCE_WORK;
    }

    harness::ExperimentConfig desk_config()
    {
        return harness::load_config(std::string(BEAMSEL_SOURCE_DIR) + "/configs/desk.json");
    }

    std::size_t cores()
    {
        return std::max(1u, std::thread::hardware_concurrency());
    }

    // Generates the seed's dataset under dir unless an identical one is already there.
    fs::path desk_dataset(const harness::ExperimentConfig &cfg, const fs::path &dir)
    {
        const fs::path identity = dir / "config.json";
        const std::string want = harness::to_json(cfg).dump();
        if (fs::exists(dir / "data" / "dataset_tx.bsds") && fs::exists(identity))
        {
            std::ifstream in(identity);
            const std::string have((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
            if (have == want)
                return dir;
        }
        harness::RunOptions o;
        o.out_dir = dir.string();
        o.jobs = cores();
        harness::cmd_gen_data(cfg, o);
        std::ofstream(identity) << want;
        return dir;
    }

    // ---------------------------------------------------------------- unit-scale properties

    Outcome swish_suite()
    {
        using nn::ActivationKind;
        const auto sw = ActivationKind::swish();
        bool ok = nn::activation(sw, 0.0) == 0.0;
        const double at_one = std::abs(nn::activation(sw, 1.0) - testing::swish_oracle(1.0));
        ok = ok && at_one < 1e-9;
        const double h = 1e-5;
        double worst = 0.0;
        for (const auto &k : {ActivationKind::swish(), ActivationKind::relu(), ActivationKind::leaky_relu(0.1),
                              ActivationKind::sigmoid()})
            for (int i = -4000; i <= 4000; ++i)
            {
                const double x = i * 0.005 + 0.0012345; // off the kink at 0
                const double fd = (nn::activation(k, x + h) - nn::activation(k, x - h)) / (2 * h);
                worst = std::max(worst, testing::relative_error(nn::activation_grad(k, x), fd, 1e-3));
            }
        ok = ok && worst < 1e-6;
        return {ok, "|swish(1) - oracle| = " + fmt("%.2e", at_one) + ", worst gradient rel err " + fmt("%.2e", worst)};
    }

    Outcome unitarity()
    {
        ChannelConfig c;
        c.n_tx = 64;
        c.n_rx = 16;
        Rng rng(2024);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i)
        {
            const auto r = generate_realization(c, rng);
            const double a = r.spatial.norm();
            worst = std::max(worst, std::abs(a - r.beamspace.norm()) / a);
        }
        return {worst <= 1e-10, "100 realizations at 64x16, worst relative gap " + fmt("%.2e", worst)};
    }

    Outcome oracle_equivalence()
    {
        ChannelConfig c;
        c.n_tx = 8;
        c.n_rx = 4;
        SelectionConfig s;
        s.n_rf_tx = s.n_rf_rx = 2;
        Rng rng(31);
        int mismatches = 0;
        double worst = 0.0;
        for (int i = 0; i < 50; ++i)
        {
            const auto r = generate_realization(c, rng);
            const auto o = oracle_select(r.beamspace, s, 10.0);
            const auto bf = testing::brute_force(r.beamspace, 2, 2, 10.0);
            worst = std::max(worst, std::abs(o.se - bf.se));
            if (o.combinations != 168 || o.selection.tx_beams != bf.sel.tx_beams || o.selection.rx_beams != bf.sel.rx_beams ||
                std::abs(o.se - bf.se) > 1e-12)
                ++mismatches;
        }
        return {mismatches == 0,
                "50 instances, " + std::to_string(mismatches) + " mismatches, worst SE gap " + fmt("%.2e", worst)};
    }

    Outcome dominance()
    {
        const auto cfg = desk_config();
        const std::vector<double> grid = cfg.eval.snr_grid;
        const std::size_t ns = std::min(cfg.selection.n_rf_tx, cfg.selection.n_rf_rx);
        Rng rng(404);
        int greedy_above = 0, non_monotone = 0;
        double zf_sum = 0.0, oracle_sum = 0.0;
        for (int i = 0; i < 100; ++i)
        {
            const auto r = generate_realization(cfg.channel, rng);
            const auto g = greedy_energy_select(r.beamspace, cfg.selection);
            const auto g_dig = build_digital_stage(selected_channel(r.beamspace, g), ns);
            std::vector<std::pair<BeamSelection, DigitalStage>> fixed{{g, g_dig}};
            for (double snr : grid)
            {
                const auto o = oracle_select(r.beamspace, cfg.selection, snr);
                if (spectral_efficiency(r.beamspace, g, g_dig, snr) > o.se)
                    ++greedy_above;
                if (snr == cfg.dataset.label_snr_db)
                {
                    fixed.emplace_back(o.selection, o.stage);
                    oracle_sum += o.se;
                    zf_sum += zf_benchmark(r.beamspace, snr, ns);
                }
            }
            for (const auto &[sel, dig] : fixed)
                for (std::size_t k = 1; k < grid.size(); ++k)
                    if (spectral_efficiency(r.beamspace, sel, dig, grid[k]) < spectral_efficiency(r.beamspace, sel, dig, grid[k - 1]))
                        ++non_monotone;
        }
        const bool ok = greedy_above == 0 && non_monotone == 0 && zf_sum >= oracle_sum;
        return {ok, std::to_string(greedy_above) + " greedy > oracle, " + std::to_string(non_monotone) +
                        " non-monotone curves, mean ZF " + fmt("%.3f", zf_sum / 100) + " vs oracle " +
                        fmt("%.3f", oracle_sum / 100) + " bit/s/Hz"};
    }

    Outcome gradient_check()
    {
        double worst = 0.0;
        std::size_t coords = 0;
        for (const auto &act : {nn::ActivationKind::swish(), nn::ActivationKind::sigmoid()})
        {
            nn::ClassifierModel m(testing::downsized_spec(act), 11);
            const auto res = testing::gradient_check(m, testing::random_tensor(3, 4, 8, 12), {0, 2, 1, 2}, 200, 1e-5, 13);
            worst = std::max(worst, res.max_rel_error);
            coords += res.coordinates;
        }
        return {worst < 1e-4, std::to_string(coords) + " coordinates, worst rel err " + fmt("%.2e", worst)};
    }

    Outcome em_properties()
    {
        int decreases = 0;
        for (std::uint64_t seed = 0; seed < 20; ++seed)
        {
            ChannelConfig c;
            Rng rng(seed + 100);
            std::vector<GmmPoint> pts;
            for (int i = 0; i < 8; ++i)
            {
                const auto pr = gmm_points(generate_realization(c, rng));
                pts.insert(pts.end(), pr.begin(), pr.end());
            }
            GmmOptions o;
            o.components = 2 + seed % 3;
            o.seed = seed;
            const auto g = fit_gmm(pts, o);
            for (std::size_t i = 1; i < g.log_likelihood.size(); ++i)
                if (g.log_likelihood[i] < g.log_likelihood[i - 1] - 1e-9)
                    ++decreases;
        }

        Rng rng(9);
        std::normal_distribution<double> n(0.0, 0.05);
        std::bernoulli_distribution pick(0.3);
        std::vector<GmmPoint> pts;
        for (int i = 0; i < 2000; ++i)
            pts.push_back(pick(rng) ? GmmPoint{-0.3 + n(rng), 0.2 + n(rng), 0.5 + n(rng)}
                                    : GmmPoint{0.3 + n(rng), -0.2 + n(rng), 1.5 + n(rng)});
        GmmOptions o;
        o.components = 2;
        o.seed = 9;
        const auto g = fit_gmm(pts, o);
        const auto &a = g.components[0].mean[0] < g.components[1].mean[0] ? g.components[0] : g.components[1];
        const auto &b = &a == &g.components[0] ? g.components[1] : g.components[0];
        const std::array<double, 8> got{a.weight, a.mean[0], a.mean[1], a.mean[2], b.weight, b.mean[0], b.mean[1], b.mean[2]};
        const std::array<double, 8> want{0.3, -0.3, 0.2, 0.5, 0.7, 0.3, -0.2, 1.5};
        double worst = 0.0;
        for (std::size_t i = 0; i < got.size(); ++i)
            worst = std::max(worst, std::abs(got[i] - want[i]));
        return {decreases == 0 && worst <= 0.05, "20 fits, " + std::to_string(decreases) +
                                                      " likelihood decreases; recovery error " + fmt("%.4f", worst)};
    }

    Outcome bicubic()
    {
        const RMatrix constant = RMatrix::Constant(9, 13, 0.37);
        const double c_err = (bicubic_resize(constant, 32, 32).array() - 0.37).abs().maxCoeff();

        double ramp_err = 0.0;
        for (auto [in, out] : {std::pair<int, int>{36, 32}, {17, 32}, {34, 224}, {5, 4}})
        {
            RMatrix ramp(in, in);
            for (int i = 0; i < in; ++i)
                for (int j = 0; j < in; ++j)
                    ramp(i, j) = 0.2 + 0.03 * i - 0.011 * j;
            const RMatrix r = bicubic_resize(ramp, static_cast<std::size_t>(out), static_cast<std::size_t>(out));
            const double s = static_cast<double>(in - 1) / static_cast<double>(out - 1);
            for (int y = 0; y < out; ++y)
                for (int x = 0; x < out; ++x)
                    ramp_err = std::max(ramp_err, std::abs(r(y, x) - (0.2 + 0.03 * y * s - 0.011 * x * s)));
        }

        Rng rng(1);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        RMatrix src(34, 34);
        for (Eigen::Index i = 0; i < src.size(); ++i)
            src(i) = u(rng);
        const RMatrix big = bicubic_resize(src, 224, 224);
        const double corner_err = std::max({std::abs(big(0, 0) - src(0, 0)), std::abs(big(223, 223) - src(33, 33)),
                                            std::abs(big(0, 223) - src(0, 33)), std::abs(big(223, 0) - src(33, 0))});
        const bool ok = c_err <= 1e-9 && ramp_err <= 1e-6 && corner_err <= 1e-9;
        return {ok, "constant " + fmt("%.1e", c_err) + ", ramp " + fmt("%.1e", ramp_err) + ", corners " + fmt("%.1e", corner_err)};
    }

    // ---------------------------------------------------------------- desk-scale learning

    struct Split
    {
        Dataset train, val;
    };

    Split desk_split(const harness::ExperimentConfig &cfg, const fs::path &data_dir)
    {
        const Dataset all = load_dataset((data_dir / "data" / "dataset_tx.bsds").string());
        auto [tr, va] = split_dataset(all, cfg.dataset.train_fraction, cfg.seeds().split);
        return {std::move(tr), std::move(va)};
    }

    Outcome desk_cnn()
    {
        const auto cfg = desk_config();
        const auto dir = desk_dataset(cfg, work_dir() / "desk_seed1");
        const auto split = desk_split(cfg, dir);
        const nn::ImageSource train(split.train, cfg.dataset.image_side, cfg.dataset.embedding);
        const nn::ImageSource val(split.val, cfg.dataset.image_side, cfg.dataset.embedding);

        auto spec = cfg.net;
        spec.n_classes = split.train.class_count;
        nn::TrainConfig tc = cfg.train;
        tc.seed = cfg.seeds().train;
        nn::ClassifierModel model(spec, cfg.seeds().init);
        nn::train(model, train, &val, tc);
        const auto ev = nn::evaluate(model, val);
        return {ev.balanced_accuracy >= 0.45,
                std::to_string(split.train.size()) + " training samples, validation balanced accuracy " +
                    fmt("%.1f%%", 100 * ev.balanced_accuracy) + " (needs >= 45%), plain accuracy " +
                    fmt("%.1f%%", 100 * ev.accuracy)};
    }

    Outcome ensemble_lift()
    {
        const auto base = desk_config();
        const auto dir = desk_dataset(base, work_dir() / "desk_seed1");
        double ens_sum = 0.0, best_sum = 0.0;
        int wins = 0;
        std::ostringstream per_seed;
        for (std::uint64_t seed = 1; seed <= 5; ++seed)
        {
            const auto cfg = base.with_seed(seed);
            const auto seeds = cfg.seeds();
            const auto split = desk_split(cfg, dir);
            const nn::ImageSource train(split.train, cfg.dataset.image_side, cfg.dataset.embedding);
            const nn::ImageSource val(split.val, cfg.dataset.image_side, cfg.dataset.embedding);
            const auto labels = nn::all_labels(val);
            const std::size_t k = split.train.class_count;

            auto spec = cfg.net;
            spec.n_classes = k;
            nn::TrainConfig tc = cfg.train;
            tc.seed = seeds.train;
            EnsembleConfig ec = cfg.ensemble;
            ec.seed = seeds.ensemble;
            auto ens = train_ensemble(train, nullptr, ec, spec, tc);

            double best = 0.0;
            for (auto &learner : ens.learners)
                best = std::max(best, nn::balanced_accuracy(nn::predict_classes(learner, val), labels, k));
            const double e = nn::balanced_accuracy(predict(ens, val), labels, k);
            ens_sum += e;
            best_sum += best;
            wins += e > best ? 1 : 0;
            per_seed << " s" << seed << ' ' << fmt("%.1f", 100 * e) << '/' << fmt("%.1f", 100 * best);
            std::cerr << "  seed " << seed << ": ensemble " << e << ", best single " << best << '\n';
        }
        const double me = ens_sum / 5, mb = best_sum / 5;
        return {me >= mb - 0.005 && wins >= 3, "mean ensemble " + fmt("%.2f%%", 100 * me) + " vs best single " +
                                                   fmt("%.2f%%", 100 * mb) + ", strictly better on " +
                                                   std::to_string(wins) + "/5 (ens/best:" + per_seed.str() + ")"};
    }

    // ---------------------------------------------------------------- pipeline

    void run_pipeline(const harness::ExperimentConfig &cfg, const fs::path &dir, std::size_t jobs)
    {
        harness::RunOptions o;
        o.out_dir = dir.string();
        o.jobs = jobs;
        o.activations = cfg.matrix_activations;
        o.optimizers = cfg.matrix_optimizers;
        o.log = &std::cerr;
        fs::remove_all(dir);
        harness::cmd_gen_data(cfg, o);
        harness::cmd_train(cfg, o);
        harness::cmd_evaluate(cfg, o);
    }

    Outcome report_shape()
    {
        const auto base = desk_config();
        const fs::path root = work_dir() / "report";
        std::vector<std::string> runs;
        std::vector<std::string> problems;
        const std::vector<std::string> required{"zf", "oracle", "cnn", "ensemble", "knn", "svm", "mlp"};
        for (std::uint64_t seed : {1, 2})
        {
            const auto cfg = base.with_seed(seed);
            const fs::path dir = root / ("seed" + std::to_string(seed));
            run_pipeline(cfg, dir, cores());
            runs.push_back(dir.string());

            std::ifstream in(dir / "results" / "results.csv");
            const auto rows = harness::read_result_csv(in);
            for (const auto &s : required)
            {
                std::size_t snr = 0, ns = 0;
                for (const auto &r : rows)
                    if (r.strategy == s)
                        (r.sweep_variable == "snr_db" ? snr : ns) += 1;
                if (snr != cfg.eval.snr_grid.size() || ns != cfg.eval.ns_grid.size())
                    problems.push_back(s + " curve incomplete in seed " + std::to_string(seed));
            }
        }
        const std::string md = harness::cmd_report(runs, (root / "summary").string());
        for (const char *needle : {"| activation | SGDM | ADAM | RMSPROP |", "| ReLU |", "| Swish |",
                                   "Spectral efficiency vs SNR", "- Swish vs ReLU", "- CNN vs MLP"})
            if (md.find(needle) == std::string::npos)
                problems.push_back(std::string("report lacks '") + needle + "'");
        if (md.find("n/a /") != std::string::npos)
            problems.push_back("accuracy matrix has empty cells");
        for (const char *plot : {"se_vs_snr_mean.svg", "se_vs_ns_mean.svg", "matrix_mean.svg", "accuracy_mean.svg"})
            if (!fs::exists(root / "summary" / "plots" / plot))
                problems.push_back(std::string("missing plot ") + plot);

        std::string trends;
        std::istringstream lines(md);
        for (std::string line; std::getline(lines, line);)
            if (line.rfind("- Swish vs ReLU", 0) == 0 || line.rfind("- CNN vs MLP", 0) == 0)
                trends += "; " + line.substr(2);
        std::string detail = "2 seeds, report at " + (root / "summary" / "report.md").string() + trends;
        for (const auto &p : problems)
            detail += "; " + p;
        return {problems.empty(), detail};
    }

    Outcome determinism()
    {
        const auto cfg = harness::load_config(std::string(BEAMSEL_SOURCE_DIR) + "/configs/smoke.json");
        const fs::path a = work_dir() / "determinism" / "a", b = work_dir() / "determinism" / "b";
        run_pipeline(cfg, a, 1);
        run_pipeline(cfg, b, cores());

        auto slurp = [](const fs::path &p) {
            std::ifstream in(p, std::ios::binary);
            return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        };
        std::size_t compared = 0;
        std::vector<std::string> differing;
        for (const char *sub : {"data", "models", "results"})
            for (const auto &e : fs::directory_iterator(a / sub))
            {
                const fs::path other = b / sub / e.path().filename();
                ++compared;
                if (!fs::exists(other) || slurp(e.path()) != slurp(other))
                    differing.push_back(std::string(sub) + "/" + e.path().filename().string());
            }
        std::string detail = std::to_string(compared) + " dataset, model and result files compared";
        for (const auto &d : differing)
            detail += "; differs: " + d;
        return {differing.empty() && compared > 0, detail};
    }
}

int main(int argc, char **argv)
{
    const std::vector<Criterion> all{
        {1, "Swish unit suite", 1, swish_suite},
        {2, "beamspace unitarity", 5, unitarity},
        {3, "oracle equivalence", 30, oracle_equivalence},
        {4, "dominance and monotonicity", 30, dominance},
        {5, "gradient check", 60, gradient_check},
        {6, "EM properties", 10, em_properties},
        {7, "bicubic properties", 1, bicubic},
        {8, "desk-scale learning", 600, desk_cnn},
        {9, "ensemble lift", 2700, ensemble_lift},
        {10, "comparative report", 3600, report_shape},
        {11, "determinism", 3600, determinism},
    };

    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i)
        wanted.push_back(std::atoi(argv[i]));

    int failures = 0;
    for (const auto &c : all)
    {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end())
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try
        {
            out = c.run();
        }
        catch (const std::exception &e)
        {
            out = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.budget_s)
        {
            out.pass = false;
            out.detail += "; over the " + fmt("%.0f", c.budget_s) + " s budget";
        }
        std::cout << 'C' << c.id << ' ' << (out.pass ? "PASS" : "FAIL") << ' ' << c.name << ": " << out.detail << " ["
                  << fmt("%.1f", secs) << " s]" << std::endl;
        failures += out.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}

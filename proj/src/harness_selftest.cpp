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

#include <cmath>
#include <functional>
#include <ostream>

#include "beamsel/gmm.hpp"
#include "beamsel/harness.hpp"

namespace beamsel::harness
{
    int cmd_selftest(std::ostream &out)
    {
        int failures = 0;
        auto check = [&](const std::string &name, const std::function<bool()> &fn) {
            bool ok = false;
            std::string why;
            try
            {
                ok = fn();
            }
            catch (const std::exception &e)
            {
                why = std::string(" (") + e.what() + ")";
            }
            out << (ok ? "PASS " : "FAIL ") << name << why << '\n';
            failures += ok ? 0 : 1;
        };

        check("swish(0) == 0 and swish(1) == sigmoid(1)", [] {
            const auto sw = nn::ActivationKind::swish();
            return nn::activation(sw, 0.0) == 0.0 && std::abs(nn::activation(sw, 1.0) - 1.0 / (1.0 + std::exp(-1.0))) < 1e-15;
        });

        check("beamspace transform preserves the Frobenius norm", [] {
            ChannelConfig c;
            c.n_tx = 16;
            c.n_rx = 8;
            Rng rng(7);
            for (int i = 0; i < 10; ++i)
            {
                const auto r = generate_realization(c, rng);
                if (std::abs(r.spatial.norm() - r.beamspace.norm()) > 1e-10 * r.spatial.norm())
                    return false;
            }
            return true;
        });

        check("oracle dominates greedy; SE grows with SNR", [] {
            ChannelConfig c;
            c.n_tx = 8;
            c.n_rx = 4;
            SelectionConfig s;
            s.n_rf_tx = s.n_rf_rx = 2;
            Rng rng(3);
            for (int i = 0; i < 10; ++i)
            {
                const auto r = generate_realization(c, rng);
                const auto o = oracle_select(r.beamspace, s, 10.0);
                const auto g = greedy_energy_select(r.beamspace, s);
                const auto dig = build_digital_stage(selected_channel(r.beamspace, g), 2);
                if (spectral_efficiency(r.beamspace, g, dig, 10.0) > o.se)
                    return false;
                if (spectral_efficiency(r.beamspace, g, dig, 0.0) > spectral_efficiency(r.beamspace, g, dig, 10.0))
                    return false;
            }
            return true;
        });

        check("EM log-likelihood never decreases", [] {
            Rng rng(5);
            std::normal_distribution<double> n(0.0, 1.0);
            std::vector<GmmPoint> pts;
            for (int i = 0; i < 200; ++i)
                pts.push_back({n(rng) + (i % 2 ? 4.0 : 0.0), n(rng), n(rng)});
            GmmOptions o;
            o.components = 2;
            const auto fit = fit_gmm(pts, o);
            for (std::size_t i = 1; i < fit.log_likelihood.size(); ++i)
                if (fit.log_likelihood[i] < fit.log_likelihood[i - 1] - 1e-9)
                    return false;
            return true;
        });

        check("bicubic keeps constant images constant", [] {
            const RMatrix src = RMatrix::Constant(5, 5, 0.37);
            return (bicubic_resize(src, 17, 17).array() - 0.37).abs().maxCoeff() < 1e-12;
        });

        check("default configuration round-trips through JSON", [] {
            const ExperimentConfig c;
            return to_json(parse_config(to_json(c).dump())) == to_json(c);
        });

        check("weighted vote resolves ties toward the lower class", [] {
            return weighted_vote({2, 3}, RVector::Constant(2, 0.5), 5) == 2;
        });
        return failures;
    }
}

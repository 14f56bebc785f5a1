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

#include "beamsel/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace beamsel
{
    namespace
    {
        double log_component(const GmmComponent &c, const GmmPoint &x)
        {
            double acc = std::log(c.weight);
            for (std::size_t d = 0; d < 3; ++d)
            {
                const double z = (x[d] - c.mean[d]) / c.sigma[d];
                acc += -0.5 * z * z - std::log(c.sigma[d]) - 0.5 * std::log(2.0 * std::numbers::pi);
            }
            return acc;
        }

        double log_sum_exp(const std::vector<double> &v)
        {
            const double m = *std::max_element(v.begin(), v.end());
            if (!std::isfinite(m))
                return m;
            double s = 0.0;
            for (double x : v)
                s += std::exp(x - m);
            return m + std::log(s);
        }

        struct AxisStats
        {
            std::array<double, 3> mean{};
            std::array<double, 3> sd{};
        };

        AxisStats axis_stats(const std::vector<GmmPoint> &pts)
        {
            AxisStats st;
            const double n = static_cast<double>(pts.size());
            for (const auto &p : pts)
                for (std::size_t d = 0; d < 3; ++d)
                    st.mean[d] += p[d] / n;
            for (const auto &p : pts)
                for (std::size_t d = 0; d < 3; ++d)
                    st.sd[d] += (p[d] - st.mean[d]) * (p[d] - st.mean[d]) / n;
            for (auto &s : st.sd)
                s = std::sqrt(s);
            return st;
        }
    }

    std::vector<double> GmmModel::flattened() const
    {
        std::vector<double> q{amplitude};
        for (const auto &c : components)
        {
            q.push_back(c.weight);
            q.insert(q.end(), c.mean.begin(), c.mean.end());
            q.insert(q.end(), c.sigma.begin(), c.sigma.end());
        }
        return q;
    }

    double GmmModel::density(const GmmPoint &x) const
    {
        double s = 0.0;
        for (const auto &c : components)
            s += std::exp(log_component(c, x));
        return s;
    }

    GmmModel fit_gmm(const std::vector<GmmPoint> &points, const GmmOptions &opt)
    {
        const std::size_t k = opt.components;
        const std::size_t n = points.size();
        if (k < 1)
            throw Error(ErrorKind::invalid_argument, "fit_gmm: need at least one component");
        if (n < k)
            throw Error(ErrorKind::invalid_argument, "fit_gmm: fewer points than components");

        const AxisStats global = axis_stats(points);
        std::array<bool, 3> flat_axis{};
        for (std::size_t d = 0; d < 3; ++d)
            flat_axis[d] = global.sd[d] < opt.collapse_sigma;

        auto fresh_sigma = [&](std::size_t d) {
            return flat_axis[d] ? opt.collapse_sigma : std::max(global.sd[d], opt.variance_floor);
        };

        Rng rng(opt.seed);
        GmmModel model;
        model.components.resize(k);

        // k-means++ seeding of the means
        std::vector<double> dist(n, std::numeric_limits<double>::infinity());
        std::size_t first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
        for (std::size_t c = 0; c < k; ++c)
        {
            std::size_t pick = first;
            if (c > 0)
            {
                double total = 0.0;
                for (double v : dist)
                    total += v;
                if (total > 0.0)
                {
                    double u = std::uniform_real_distribution<double>(0.0, total)(rng);
                    for (pick = 0; pick + 1 < n; ++pick)
                    {
                        u -= dist[pick];
                        if (u <= 0.0)
                            break;
                    }
                }
                else
                    pick = c % n;
            }
            auto &comp = model.components[c];
            comp.weight = 1.0 / static_cast<double>(k);
            comp.mean = points[pick];
            for (std::size_t d = 0; d < 3; ++d)
                comp.sigma[d] = fresh_sigma(d);
            for (std::size_t i = 0; i < n; ++i)
            {
                double d2 = 0.0;
                for (std::size_t d = 0; d < 3; ++d)
                    d2 += (points[i][d] - comp.mean[d]) * (points[i][d] - comp.mean[d]);
                dist[i] = std::min(dist[i], d2);
            }
        }

        std::vector<bool> reinitialised(k, false);
        std::vector<double> resp(n * k);
        std::vector<double> logs(k);
        double prev_ll = -std::numeric_limits<double>::infinity();

        for (std::size_t iter = 0; iter < opt.max_iter; ++iter)
        {
            // E-step
            double ll = 0.0;
            for (std::size_t i = 0; i < n; ++i)
            {
                for (std::size_t c = 0; c < k; ++c)
                    logs[c] = log_component(model.components[c], points[i]);
                const double lse = log_sum_exp(logs);
                ll += lse;
                for (std::size_t c = 0; c < k; ++c)
                    resp[i * k + c] = std::exp(logs[c] - lse);
            }
            ll /= static_cast<double>(n);

            // log-likelihood of the parameters entering this iteration
            model.log_likelihood.push_back(ll);
            if (iter > 0 && ll - prev_ll < opt.tol)
            {
                model.iterations = iter;
                prev_ll = ll;
                break;
            }
            prev_ll = ll;

            // M-step
            for (std::size_t c = 0; c < k; ++c)
            {
                double nk = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    nk += resp[i * k + c];
                auto &comp = model.components[c];
                bool collapsed = nk <= 0.0;
                if (!collapsed)
                {
                    comp.weight = nk / static_cast<double>(n);
                    for (std::size_t d = 0; d < 3; ++d)
                    {
                        double m = 0.0;
                        for (std::size_t i = 0; i < n; ++i)
                            m += resp[i * k + c] * points[i][d];
                        comp.mean[d] = m / nk;
                    }
                    for (std::size_t d = 0; d < 3; ++d)
                    {
                        double v = 0.0;
                        for (std::size_t i = 0; i < n; ++i)
                        {
                            const double dv = points[i][d] - comp.mean[d];
                            v += resp[i * k + c] * dv * dv;
                        }
                        double s = std::sqrt(v / nk);
                        if (flat_axis[d])
                            s = std::max(s, opt.collapse_sigma);
                        else if (opt.variance_floor > 0.0)
                            s = std::max(s, opt.variance_floor);
                        else if (s < opt.collapse_sigma)
                            collapsed = true;
                        comp.sigma[d] = s;
                    }
                }
                if (collapsed)
                {
                    if (reinitialised[c])
                        throw Error(ErrorKind::component_collapse, "GMM component " + std::to_string(c) + " collapsed twice");
                    reinitialised[c] = true;
                    comp.mean = points[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)];
                    for (std::size_t d = 0; d < 3; ++d)
                        comp.sigma[d] = fresh_sigma(d);
                    comp.weight = std::max(comp.weight, 1.0 / static_cast<double>(n));
                    // restart the likelihood bookkeeping: the reinitialised model is a new starting point
                    prev_ll = -std::numeric_limits<double>::infinity();
                    model.log_likelihood.clear();
                }
            }
            double wsum = 0.0;
            for (const auto &c : model.components)
                wsum += c.weight;
            for (auto &c : model.components)
                c.weight /= wsum;
            model.iterations = iter + 1;
        }

        double amp = 0.0;
        for (const auto &p : points)
            amp = std::max(amp, model.density(p));
        model.amplitude = amp;
        return model;
    }
}

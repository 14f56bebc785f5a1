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

#include "beamsel/channel.hpp"

#include <cmath>
#include <numbers>

#include "beamsel/binary_io.hpp"

namespace beamsel
{
    void ChannelConfig::validate() const
    {
        if (n_rx < 1)
            throw Error(ErrorKind::invalid_argument, "n_rx must be >= 1");
        if (n_tx < n_rx)
            throw Error(ErrorKind::invalid_argument, "n_tx must be >= n_rx");
        if (n_clusters < 1)
            throw Error(ErrorKind::invalid_argument, "n_clusters must be >= 1");
        if (n_rays < 1)
            throw Error(ErrorKind::invalid_argument, "n_rays must be >= 1");
        if (!(wavelength > 0.0))
            throw Error(ErrorKind::invalid_argument, "wavelength must be > 0");
        if (!(antenna_spacing > 0.0))
            throw Error(ErrorKind::invalid_argument, "antenna_spacing must be > 0");
        if (!(tx_power_db_max >= tx_power_db_min))
            throw Error(ErrorKind::invalid_argument, "tx_power_db_max must be >= tx_power_db_min");
    }

    CVector array_response(double phi, std::size_t n)
    {
        if (n == 0)
            throw Error(ErrorKind::invalid_argument, "array_response: antenna count must be >= 1");
        CVector a(static_cast<Eigen::Index>(n));
        const double scale = 1.0 / std::sqrt(static_cast<double>(n));
        for (std::size_t k = 0; k < n; ++k)
            a(static_cast<Eigen::Index>(k)) = std::polar(scale, -2.0 * std::numbers::pi * phi * static_cast<double>(k));
        return a;
    }

    CMatrix dft_codebook(std::size_t n)
    {
        const auto m = static_cast<Eigen::Index>(n);
        CMatrix u(m, m);
        const double half = (static_cast<double>(n) - 1.0) / 2.0;
        for (std::size_t i = 0; i < n; ++i)
            u.col(static_cast<Eigen::Index>(i)) = array_response((static_cast<double>(i) - half) / static_cast<double>(n), n);
        return u;
    }

    CMatrix assemble_spatial(const ChannelConfig &cfg, const std::vector<PathComponent> &paths)
    {
        const auto nr = static_cast<Eigen::Index>(cfg.n_rx);
        const auto nt = static_cast<Eigen::Index>(cfg.n_tx);
        const double gamma = std::sqrt(static_cast<double>(cfg.n_rx * cfg.n_tx) / static_cast<double>(cfg.n_paths()));
        CMatrix h = CMatrix::Zero(nr, nt);
        for (const auto &p : paths)
        {
            const CVector ar = array_response(p.aoa_spatial, cfg.n_rx);
            const CVector at = array_response(p.aod_spatial, cfg.n_tx);
            h.noalias() += (gamma * p.gain) * ar * at.adjoint();
        }
        return h;
    }

    CMatrix spatial_to_beamspace(const CMatrix &h)
    {
        if (h.rows() == 0 || h.cols() == 0)
            throw Error(ErrorKind::invalid_argument, "spatial_to_beamspace: empty matrix");
        if (h.rows() > h.cols())
            throw Error(ErrorKind::invalid_argument, "spatial_to_beamspace: expected n_rx <= n_tx");
        const CMatrix ur = dft_codebook(static_cast<std::size_t>(h.rows()));
        const CMatrix ut = dft_codebook(static_cast<std::size_t>(h.cols()));
        return ur.adjoint() * h * ut;
    }

    CMatrix beamspace_to_spatial(const CMatrix &h_b)
    {
        if (h_b.rows() == 0 || h_b.cols() == 0 || h_b.rows() > h_b.cols())
            throw Error(ErrorKind::invalid_argument, "beamspace_to_spatial: bad dimensions");
        const CMatrix ur = dft_codebook(static_cast<std::size_t>(h_b.rows()));
        const CMatrix ut = dft_codebook(static_cast<std::size_t>(h_b.cols()));
        return ur * h_b * ut.adjoint();
    }

    ChannelRealization make_realization(const ChannelConfig &cfg, std::vector<PathComponent> paths, double tx_power_db)
    {
        cfg.validate();
        ChannelRealization r;
        r.config = cfg;
        r.paths = std::move(paths);
        r.spatial = assemble_spatial(cfg, r.paths);
        r.beamspace = spatial_to_beamspace(r.spatial);
        r.tx_power_db = tx_power_db;
        return r;
    }

    ChannelRealization generate_realization(const ChannelConfig &cfg, Rng &rng)
    {
        cfg.validate();
        // Spatial angle phi = (d / lambda) sin(theta); at d = lambda / 2 this is uniform on [-1/2, 1/2].
        const double angle_span = 2.0 * cfg.antenna_spacing / cfg.wavelength;
        std::uniform_real_distribution<double> unit(-0.5, 0.5);
        std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
        std::uniform_real_distribution<double> power(cfg.tx_power_db_min, cfg.tx_power_db_max);

        std::vector<PathComponent> paths;
        paths.reserve(cfg.n_paths());
        for (std::size_t l = 0; l < cfg.n_clusters; ++l)
            for (std::size_t u = 0; u < cfg.n_rays; ++u)
            {
                PathComponent p;
                p.cluster_id = l;
                p.ray_id = u;
                p.aod_spatial = angle_span * unit(rng);
                p.aoa_spatial = angle_span * unit(rng);
                const double re = normal(rng);
                const double im = normal(rng);
                p.gain = {re, im};
                paths.push_back(p);
            }
        const double tx_power = cfg.tx_power_db_max > cfg.tx_power_db_min ? power(rng) : cfg.tx_power_db_min;
        return make_realization(cfg, std::move(paths), tx_power);
    }

    ChannelRealization generate_realization(const ChannelConfig &cfg)
    {
        Rng rng(cfg.seed);
        return generate_realization(cfg, rng);
    }

    std::size_t numerical_rank(const CMatrix &m, double rel_tol)
    {
        if (m.size() == 0)
            return 0;
        Eigen::JacobiSVD<CMatrix> svd(m);
        const auto &s = svd.singularValues();
        if (s.size() == 0 || s(0) == 0.0)
            return 0;
        std::size_t rank = 0;
        for (Eigen::Index i = 0; i < s.size(); ++i)
            if (s(i) > rel_tol * s(0))
                ++rank;
        return rank;
    }

    namespace
    {
        constexpr std::uint32_t realization_version = 1;

        void put_matrix(std::ostream &out, const CMatrix &m)
        {
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                for (Eigen::Index j = 0; j < m.cols(); ++j)
                {
                    binio::put<double>(out, m(i, j).real());
                    binio::put<double>(out, m(i, j).imag());
                }
        }

        CMatrix get_matrix(std::istream &in, std::size_t rows, std::size_t cols)
        {
            CMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                for (Eigen::Index j = 0; j < m.cols(); ++j)
                {
                    const double re = binio::get<double>(in);
                    const double im = binio::get<double>(in);
                    m(i, j) = {re, im};
                }
            return m;
        }
    }

    void write_realization(std::ostream &out, const ChannelRealization &r)
    {
        const auto &c = r.config;
        binio::put_magic(out, "BSMC");
        binio::put<std::uint32_t>(out, realization_version);
        binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(c.n_tx));
        binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(c.n_rx));
        binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(c.n_clusters));
        binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(c.n_rays));
        binio::put<double>(out, c.wavelength);
        binio::put<double>(out, c.antenna_spacing);
        binio::put<double>(out, r.tx_power_db);
        binio::put<std::uint64_t>(out, r.paths.size());
        for (const auto &p : r.paths)
        {
            binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(p.cluster_id));
            binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(p.ray_id));
            binio::put<double>(out, p.gain.real());
            binio::put<double>(out, p.gain.imag());
            binio::put<double>(out, p.aod_spatial);
            binio::put<double>(out, p.aoa_spatial);
        }
        put_matrix(out, r.spatial);
        put_matrix(out, r.beamspace);
        if (!out)
            throw Error(ErrorKind::io, "write_realization: stream failure");
    }

    ChannelRealization read_realization(std::istream &in)
    {
        binio::expect_magic(in, "BSMC");
        const auto version = binio::get<std::uint32_t>(in);
        if (version != realization_version)
            throw Error(ErrorKind::io, "unsupported BSMC version " + std::to_string(version));
        ChannelRealization r;
        r.config.n_tx = binio::get<std::uint32_t>(in);
        r.config.n_rx = binio::get<std::uint32_t>(in);
        r.config.n_clusters = binio::get<std::uint32_t>(in);
        r.config.n_rays = binio::get<std::uint32_t>(in);
        r.config.wavelength = binio::get<double>(in);
        r.config.antenna_spacing = binio::get<double>(in);
        r.tx_power_db = binio::get<double>(in);
        const auto n_paths = binio::get<std::uint64_t>(in);
        if (n_paths != r.config.n_paths())
            throw Error(ErrorKind::io, "BSMC path count does not match cluster/ray dims");
        r.paths.resize(n_paths);
        for (auto &p : r.paths)
        {
            p.cluster_id = binio::get<std::uint32_t>(in);
            p.ray_id = binio::get<std::uint32_t>(in);
            const double re = binio::get<double>(in);
            const double im = binio::get<double>(in);
            p.gain = {re, im};
            p.aod_spatial = binio::get<double>(in);
            p.aoa_spatial = binio::get<double>(in);
        }
        r.spatial = get_matrix(in, r.config.n_rx, r.config.n_tx);
        r.beamspace = get_matrix(in, r.config.n_rx, r.config.n_tx);
        return r;
    }

    nlohmann::json to_json(const ChannelConfig &cfg)
    {
        return {{"n_tx", cfg.n_tx},
                {"n_rx", cfg.n_rx},
                {"n_clusters", cfg.n_clusters},
                {"n_rays", cfg.n_rays},
                {"wavelength", cfg.wavelength},
                {"antenna_spacing", cfg.antenna_spacing},
                {"tx_power_db_min", cfg.tx_power_db_min},
                {"tx_power_db_max", cfg.tx_power_db_max},
                {"seed", cfg.seed}};
    }

    ChannelConfig channel_config_from_json(const nlohmann::json &j)
    {
        ChannelConfig c;
        c.n_tx = j.value("n_tx", c.n_tx);
        c.n_rx = j.value("n_rx", c.n_rx);
        c.n_clusters = j.value("n_clusters", c.n_clusters);
        c.n_rays = j.value("n_rays", c.n_rays);
        c.wavelength = j.value("wavelength", c.wavelength);
        c.antenna_spacing = j.value("antenna_spacing", c.wavelength / 2.0);
        c.tx_power_db_min = j.value("tx_power_db_min", c.tx_power_db_min);
        c.tx_power_db_max = j.value("tx_power_db_max", c.tx_power_db_max);
        c.seed = j.value("seed", c.seed);
        c.validate();
        return c;
    }
}

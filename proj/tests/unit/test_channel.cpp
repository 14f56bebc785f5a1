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

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "beamsel/channel.hpp"

using namespace beamsel;
using Catch::Matchers::WithinAbs;

namespace
{
    using hp = boost::multiprecision::cpp_bin_float_50;

    // |a(phi1)^H a(phi2)| by direct summation in 50-digit arithmetic.
    double inner_product_magnitude_oracle(double phi1, double phi2, int n)
    {
        const hp two_pi = 2 * boost::math::constants::pi<hp>();
        hp re = 0, im = 0;
        for (int k = 0; k < n; ++k)
        {
            const hp arg = two_pi * (hp(phi1) - hp(phi2)) * k;
            re += cos(arg);
            im += sin(arg);
        }
        return static_cast<double>(sqrt(re * re + im * im) / n);
    }

    ChannelConfig small_config(std::uint64_t seed)
    {
        ChannelConfig c;
        c.n_tx = 16;
        c.n_rx = 8;
        c.seed = seed;
        return c;
    }
}

TEST_CASE("array_response closed forms", "[channel]")
{
    const CVector a = array_response(0.0, 4);
    for (Eigen::Index k = 0; k < 4; ++k)
    {
        CHECK_THAT(a(k).real(), WithinAbs(0.5, 1e-15));
        CHECK_THAT(a(k).imag(), WithinAbs(0.0, 1e-15));
    }

    const CVector b = array_response(0.5, 2);
    CHECK_THAT(b(0).real(), WithinAbs(1.0 / std::sqrt(2.0), 1e-15));
    CHECK_THAT(b(1).real(), WithinAbs(-1.0 / std::sqrt(2.0), 1e-15));
    CHECK_THAT(b(1).imag(), WithinAbs(0.0, 1e-15));

    CHECK_THAT(array_response(0.1234, 7).norm(), WithinAbs(1.0, 1e-15));
    CHECK_THROWS_AS(array_response(0.1, 0), Error);
}

TEST_CASE("array_response inner products match high-precision summation", "[channel]")
{
    const double got = std::abs(array_response(0.25, 4).dot(array_response(-0.25, 4)));
    CHECK_THAT(got, WithinAbs(inner_product_magnitude_oracle(0.25, -0.25, 4), 1e-14));

    for (double phi : {0.013, 0.2, 0.31, -0.45})
    {
        const double g = std::abs(array_response(phi, 9).dot(array_response(-0.1, 9)));
        CHECK_THAT(g, WithinAbs(inner_product_magnitude_oracle(phi, -0.1, 9), 1e-14));
    }
}

TEST_CASE("single path channel closed form", "[channel]")
{
    ChannelConfig c;
    c.n_tx = 2;
    c.n_rx = 2;
    c.n_clusters = 1;
    c.n_rays = 1;
    const auto r = make_realization(c, {PathComponent{0, 0, {1.0, 0.0}, 0.0, 0.0}}, 0.0);
    for (Eigen::Index i = 0; i < 2; ++i)
        for (Eigen::Index j = 0; j < 2; ++j)
        {
            CHECK_THAT(r.spatial(i, j).real(), WithinAbs(1.0, 1e-14));
            CHECK_THAT(r.spatial(i, j).imag(), WithinAbs(0.0, 1e-14));
        }
}

TEST_CASE("paper-scale realization has rank at most Ncl*Nray", "[channel]")
{
    ChannelConfig c;
    c.n_tx = 256;
    c.n_rx = 64;
    c.n_clusters = 4;
    c.n_rays = 2;
    c.seed = 11;
    const auto r = generate_realization(c);
    CHECK(numerical_rank(r.spatial) <= 8);
    CHECK(r.paths.size() == 8);
}

TEST_CASE("generation is deterministic per seed", "[channel]")
{
    const auto a = generate_realization(small_config(5));
    const auto b = generate_realization(small_config(5));
    std::ostringstream sa, sb;
    write_realization(sa, a);
    write_realization(sb, b);
    CHECK(sa.str() == sb.str());
    const auto c = generate_realization(small_config(6));
    CHECK((a.spatial - c.spatial).norm() > 0.0);
}

TEST_CASE("spatial_to_beamspace basics", "[channel]")
{
    CHECK(spatial_to_beamspace(CMatrix::Zero(2, 3)).norm() == 0.0);

    const CMatrix id = CMatrix::Identity(2, 2);
    const CMatrix hb = spatial_to_beamspace(id);
    const CMatrix u = dft_codebook(2);
    CHECK((hb - u.adjoint() * u).norm() < 1e-14);
    CHECK_THAT(hb.norm(), WithinAbs(std::sqrt(2.0), 1e-14));

    CHECK_THROWS_AS(spatial_to_beamspace(CMatrix::Zero(4, 2)), Error);
    CHECK_THROWS_AS(spatial_to_beamspace(CMatrix()), Error);
}

TEST_CASE("grid-aligned path concentrates in one beam", "[channel]")
{
    ChannelConfig c;
    c.n_tx = 16;
    c.n_rx = 8;
    c.n_clusters = 1;
    c.n_rays = 1;
    const std::size_t bt = 5, br = 2;
    const double phi_t = (static_cast<double>(bt) - 7.5) / 16.0;
    const double phi_r = (static_cast<double>(br) - 3.5) / 8.0;
    const auto r = make_realization(c, {PathComponent{0, 0, {0.3, -0.8}, phi_t, phi_r}}, 0.0);
    const double total = r.beamspace.squaredNorm();
    const double peak = std::norm(r.beamspace(static_cast<Eigen::Index>(br), static_cast<Eigen::Index>(bt)));
    CHECK(peak / total >= 0.95);

    // an off-grid path spreads: energy fraction of the strongest beam drops
    const auto off = make_realization(c, {PathComponent{0, 0, {1.0, 0.0}, phi_t + 0.5 / 16.0, phi_r}}, 0.0);
    Eigen::Index i, j;
    const double off_peak = off.beamspace.cwiseAbs2().maxCoeff(&i, &j);
    CHECK(off_peak / off.beamspace.squaredNorm() < 0.95);
}

TEST_CASE("realization invariants hold over random seeds", "[channel][property]")
{
    ChannelConfig c;
    c.n_tx = 32;
    c.n_rx = 8;
    c.n_clusters = 3;
    c.n_rays = 2;
    Rng rng(99);
    for (int t = 0; t < 50; ++t)
    {
        const auto r = generate_realization(c, rng);
        CHECK(std::abs(r.spatial.norm() - r.beamspace.norm()) <= 1e-10 * r.spatial.norm());
        CHECK((assemble_spatial(c, r.paths) - r.spatial).norm() <= 1e-12);
        CHECK((beamspace_to_spatial(r.beamspace) - r.spatial).norm() <= 1e-10 * r.spatial.norm());
        CHECK(numerical_rank(r.spatial) <= c.n_paths());
        for (const auto &p : r.paths)
        {
            CHECK(std::abs(p.aod_spatial) <= 0.5);
            CHECK(std::abs(p.aoa_spatial) <= 0.5);
        }
        CHECK(r.tx_power_db >= c.tx_power_db_min);
        CHECK(r.tx_power_db <= c.tx_power_db_max);
    }
}

TEST_CASE("config validation", "[channel]")
{
    ChannelConfig c;
    c.n_rx = 32;
    c.n_tx = 16;
    CHECK_THROWS_AS(c.validate(), Error);
    c = ChannelConfig{};
    c.n_rays = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = ChannelConfig{};
    c.wavelength = 0.0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = ChannelConfig{};
    c.antenna_spacing = -1.0;
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("BSMC record round trip and JSON sidecar", "[channel][io]")
{
    const auto r = generate_realization(small_config(3));
    std::stringstream buf;
    write_realization(buf, r);
    const auto back = read_realization(buf);
    CHECK(back.spatial == r.spatial);
    CHECK(back.beamspace == r.beamspace);
    CHECK(back.tx_power_db == r.tx_power_db);
    CHECK(back.paths.size() == r.paths.size());
    CHECK(back.paths[3].gain == r.paths[3].gain);

    std::stringstream bad("XXXX");
    CHECK_THROWS_AS(read_realization(bad), Error);

    const auto cfg = channel_config_from_json(to_json(small_config(42)));
    CHECK(cfg.seed == 42);
    CHECK(cfg.n_tx == 16);
}

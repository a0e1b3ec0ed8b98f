// SPDX-License-Identifier: Apache-2.0
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

#include "wavecurve/analysis.hpp"
#include "wavecurve/channel.hpp"
#include "wavecurve/config.hpp"
#include "wavecurve/fft.hpp"

#include <doctest.h>

#include <numbers>
#include <random>

using namespace wavecurve;
using std::numbers::pi;

TEST_CASE("steering vector normalisation and zero phase")
{
    const ChannelVector c = awc_steering(Vec2::Zero(), Eigen::Matrix2d::Zero(), 16, 8);
    CHECK(c.size() == 128);
    for (Eigen::Index i = 0; i < c.size(); ++i)
        CHECK(std::abs(c(i) - cplx(1.0 / std::sqrt(128.0), 0.0)) < 1e-15);
}

TEST_CASE("plane wave on a DFT bin has one spectral line")
{
    const int n = 64;
    const Vec2 k(5.0 / n, -9.0 / n);
    const ChannelVector c = awc_steering(k, Eigen::Matrix2d::Zero(), n, n);
    const Eigen::MatrixXcd F = fft::forward(unvec(c, n, n));
    Eigen::Index r, col;
    const double peak = F.cwiseAbs2().maxCoeff(&r, &col);
    CHECK(peak == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(F.cwiseAbs2().sum() - peak < 1e-20);
    // exp(-j 2 pi k n) peaks at f = -k
    CHECK(r == (n - 5) % n);
    CHECK(col == 9);
}

TEST_CASE("quadratic phase at the corner element")
{
    Eigen::Matrix2d Q = Eigen::Matrix2d::Zero();
    Q(0, 0) = 2e-3;
    Q(1, 1) = 1e-3;
    const ChannelVector c = awc_steering(Vec2::Zero(), Q, 64, 64);
    const cplx corner = c(64 * 64 - 1) * 64.0;
    const double expect = -2.0 * pi * 0.5 * (2e-3 + 1e-3) * 31.5 * 31.5;
    CHECK(expect == doctest::Approx(-9.355).epsilon(1e-3));
    CHECK(std::abs(corner - std::polar(1.0, expect)) < 1e-12);
}

TEST_CASE("frequency wrapping")
{
    CHECK(wrap_frequency(0.25) == 0.25);
    CHECK(wrap_frequency(0.75) == doctest::Approx(-0.25));
    CHECK(wrap_frequency(-0.6) == doctest::Approx(0.4));
    CHECK(wrap_frequency(0.5) == doctest::Approx(-0.5));
}

TEST_CASE("spherical steering")
{
    const ArrayFrame a = ArrayFrame::half_wavelength(64, 64, 7.5e9);

    SUBCASE("broadside source is symmetric under n -> -n")
    {
        const ChannelVector c = swc_steering(a.center + 2.0 * a.normal(), a);
        const Eigen::MatrixXcd C = unvec(c, 64, 64);
        CHECK((C - C.reverse()).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("far source is a plane wave")
    {
        const Vec3 dir = Vec3(1.0, 0.3, -0.2).normalized();
        const ChannelVector c = swc_steering(a.center + 1e9 * dir, a);
        const Vec2 k = (a.spacing / a.wavelength) * Vec2(a.axis_y.dot(dir), a.axis_z.dot(dir));
        // phase -2 pi (kbar^T n) with kbar = -(d/lambda) A^T dir
        const ChannelVector p = awc_steering(-k, Eigen::Matrix2d::Zero(), 64, 64);
        double worst = 0.0;
        for (Eigen::Index i = 0; i < c.size(); ++i)
            worst = std::max(worst, std::abs(std::arg(c(i) / p(i))));
        CHECK(worst < 1e-3);
    }
    SUBCASE("second-order sphere at 3.5 m equals the isotropic quadratic channel")
    {
        const ChannelVector s = swc_steering(a.center + 3.5 * a.normal(), a, SphericalModel::second_order);
        const double beta = a.spacing * a.spacing / a.wavelength;
        const ChannelVector q = awc_steering(Vec2::Zero(), (beta / 3.5) * Eigen::Matrix2d::Identity(), 64, 64);
        CHECK(cosine_similarity(s, q) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("second-order projection of a sphere")
    {
        const Vec3 src = a.center + Vec3(4.0, 1.0, -0.5);
        const ArrayProjection p = spherical_projection(src, a);
        const ChannelVector s = swc_steering(src, a, SphericalModel::second_order);
        CHECK(nmse(awc_steering(p.kbar, p.Qbar, 64, 64), s) < 1e-24);
    }
}

TEST_CASE("vec and unvec")
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    ChannelVector h(12);
    for (auto& v : h)
        v = cplx(nd(rng), nd(rng));
    CHECK((vec(unvec(h, 4, 3)) - h).norm() == 0.0);

    for (int k : {0, 5, 11}) {
        ChannelVector e = ChannelVector::Zero(12);
        e(k) = 1.0;
        const Eigen::MatrixXcd E = unvec(e, 4, 3);
        CHECK(E(k % 4, k / 4) == cplx(1.0));
        CHECK(E.cwiseAbs().sum() == 1.0);
    }

    ChannelVector v(4);
    v << 1.0, 2.0, 3.0, 4.0;
    Eigen::MatrixXcd M(2, 2);
    M << 1.0, 3.0, 2.0, 4.0;
    CHECK(unvec(v, 2, 2) == M);
    CHECK_THROWS_AS(unvec(v, 3, 2), std::invalid_argument);
}

TEST_CASE("scenario synthesis")
{
    ExperimentConfig cfg;
    cfg.scenario.array.ny = cfg.scenario.array.nz = 64;

    SUBCASE("flat reflector equals the mirrored source")
    {
        cfg.scenario.scatterer.k1 = 0.0;
        const Scenario s = cfg.scenario.build();
        const ChannelVector h = scenario_channel(s);
        const ChannelVector ref = swc_steering(mirror_image(s.ue, s.scatterer), s.array, SphericalModel::second_order);
        CHECK(nmse(h, ref) < 1e-9);
    }
    SUBCASE("strongly curved scatterer approaches a point source")
    {
        Scenario s = cfg.scenario.build();
        s.scatterer.Qs = 1e6 * Eigen::Matrix2d::Identity();
        const ChannelVector h = scenario_channel(s);
        const ChannelVector ref = swc_steering(s.scatterer.point, s.array, SphericalModel::second_order);
        CHECK(nmse(h, ref) < 1e-6);
    }
    SUBCASE("unit gain carries the configured phase")
    {
        cfg.scenario.phase0 = 0.7;
        const AwcParams p = scenario_to_awc(cfg.scenario.build());
        CHECK(std::abs(p.gain - std::polar(1.0, 0.7)) < 1e-15);
        CHECK(scenario_channel(cfg.scenario.build()).norm() == doctest::Approx(1.0));
    }
    SUBCASE("default scenario raises no warnings")
    {
        CHECK(scenario_warnings(cfg.scenario.build()).empty());
    }
}

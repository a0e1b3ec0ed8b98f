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
#include "wavecurve/config.hpp"
#include "wavecurve/sounding.hpp"

#include <doctest.h>

#include <random>

using namespace wavecurve;

namespace {

ChannelVector random_vector(int n, uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    ChannelVector v(n);
    for (auto& x : v)
        x = cplx(nd(rng), nd(rng));
    return v;
}

// h(theta) with theta = (Re a, Im a, shape...), by finite differences
template <class Synth>
Eigen::MatrixXcd fd_jacobian(Synth synth, const Eigen::VectorXd& th, double h)
{
    const Eigen::Index n = synth(th).size();
    Eigen::MatrixXcd J(n, th.size());
    for (Eigen::Index j = 0; j < th.size(); ++j) {
        Eigen::VectorXd a = th, b = th;
        a(j) += h;
        b(j) -= h;
        J.col(j) = (synth(a) - synth(b)) / (2.0 * h);
    }
    return J;
}

double max_column_error(const Eigen::MatrixXcd& J, const Eigen::MatrixXcd& FD)
{
    double worst = 0.0;
    for (Eigen::Index j = 0; j < J.cols(); ++j)
        worst = std::max(worst, (J.col(j) - FD.col(j)).cwiseAbs().maxCoeff() / J.col(j).cwiseAbs().maxCoeff());
    return worst;
}

} // namespace

TEST_CASE("nmse identities")
{
    const ChannelVector h = random_vector(50, 1);
    CHECK(nmse(h, h) == 0.0);
    CHECK(nmse(ChannelVector::Zero(50), h) == doctest::Approx(1.0));
    CHECK(nmse(2.0 * h, h) == doctest::Approx(1.0));
    for (double a : {-1.5, 0.3, 0.99, 4.0})
        CHECK(nmse(a * h, h) == doctest::Approx((a - 1.0) * (a - 1.0)).epsilon(1e-12));
    CHECK_THROWS(nmse(h, ChannelVector::Zero(50)));
    CHECK_THROWS(nmse(h, ChannelVector::Zero(49)));
}

TEST_CASE("cosine similarity")
{
    const ChannelVector u = random_vector(40, 2);
    CHECK(cosine_similarity(u, u) == doctest::Approx(1.0));
    CHECK(cosine_similarity(u, std::polar(3.0, 1.1) * u) == doctest::Approx(1.0));
    ChannelVector e1 = ChannelVector::Zero(40), e2 = ChannelVector::Zero(40);
    e1(3) = 1.0;
    e2(7) = cplx(0.0, 2.0);
    CHECK(cosine_similarity(e1, e2) == 0.0);
    const double c = cosine_similarity(u, random_vector(40, 3));
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
    CHECK_THROWS(cosine_similarity(u, ChannelVector::Zero(40)));
}

TEST_CASE("best single spherical fit")
{
    ExperimentConfig cfg;
    SwcSearchConfig search = cfg.search;

    SUBCASE("flat reflector fits the mirrored user")
    {
        cfg.scenario.scatterer.k1 = 0.0;
        const Scenario s = cfg.scenario.build();
        search.axis = axis_toward(s.scatterer.point, s.array);
        const SwcFit fit = best_swc_fit(scenario_channel(s), s.array, search);
        CHECK(fit.nmse < 1e-9);
        CHECK((fit.source - mirror_image(s.ue, s.scatterer)).norm() < 1e-3);
    }
    SUBCASE("self fit")
    {
        const ArrayFrame a = ArrayFrame::half_wavelength(64, 64, 15e9);
        const Vec3 src = a.center + Vec3(5.0, -1.0, 0.7);
        const ChannelVector h = cplx(0.2, -0.4) * swc_steering(src, a, SphericalModel::second_order);
        search.axis = axis_toward(src, a);
        const SwcFit fit = best_swc_fit(h, a, search);
        CHECK(fit.nmse < 1e-8);
        CHECK((fit.source - src).norm() / (src - a.center).norm() < 1e-4);
    }
    SUBCASE("default curved pillar")
    {
        const Scenario s = cfg.scenario.build();
        search.axis = axis_toward(s.scatterer.point, s.array);
        const SwcFit fit = best_swc_fit(scenario_channel(s), s.array, search);
        CHECK(fit.nmse == doctest::Approx(0.63).epsilon(0.08 / 0.63));
    }
}

TEST_CASE("similarity volume of a spherical channel")
{
    const ArrayFrame a = ArrayFrame::half_wavelength(64, 64, 7.5e9);
    const ChannelVector h = swc_steering(local_to_global(Vec3(3.5, 0.0, 0.0), a), a, SphericalModel::second_order);
    VolumeGrid g;
    g.x = VolumeGrid::range(3.0, 4.0, 0.1);
    g.y = VolumeGrid::range(-0.1, 0.1, 0.1);
    g.z = VolumeGrid::range(-0.1, 0.1, 0.1);
    const SimilarityVolume v = similarity_volume(h, a, g);
    CHECK(v.values.size() == g.size());
    CHECK(v.peak == doctest::Approx(1.0).epsilon(1e-9));
    CHECK((v.peak_location - Vec3(3.5, 0.0, 0.0)).norm() < 1e-9);
    for (double s : v.values) {
        CHECK(s >= 0.0);
        CHECK(s <= 1.0 + 1e-12);
    }
    const SimilarityVolume r = similarity_volume(std::polar(1.0, 2.3) * h, a, g, false);
    for (size_t i = 0; i < v.values.size(); ++i)
        CHECK(std::abs(r.values[i] - v.values[i]) < 1e-12);
    CHECK(v.level_fraction(0.0) == 1.0);
    CHECK(v.level_fraction(1.0) == doctest::Approx(1.0 / g.size()));
}

TEST_CASE("Cramer-Rao bounds")
{
    const int n = 32;
    const ArrayFrame a = ArrayFrame::half_wavelength(n, n, 15e9);
    const Combiner W = make_srft_combiner(n, n, 8, 8, 12);
    AwcParams p;
    p.kbar = Vec2(0.12, -0.05);
    p.Qbar << 3e-3, 5e-4, 5e-4, 1e-3;
    p.gain = std::polar(1.0 / n, 0.4);

    SUBCASE("scales as 1/SNR")
    {
        const double b0 = crlb_awc(p, W, 20.0).nmse_bound;
        CHECK(crlb_awc(p, W, 20.0 + 10.0 * std::log10(2.0)).nmse_bound == doctest::Approx(0.5 * b0).epsilon(1e-9));
        CHECK(crlb_awc(p, W, 60.0).nmse_bound == doctest::Approx(1e-4 * b0).epsilon(1e-9));
        CHECK_FALSE(crlb_awc(p, W, 60.0).singular);
    }
    SUBCASE("bound matrix is symmetric positive semidefinite")
    {
        const CrlbReport r = crlb_awc(p, W, 10.0);
        CHECK(r.covariance.rows() == 7);
        CHECK((r.covariance - r.covariance.transpose()).norm() < 1e-12 * r.covariance.norm());
        CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(r.covariance).eigenvalues().minCoeff()
              >= -1e-12 * r.covariance.norm());
    }
    SUBCASE("invariant to the phase of the gain")
    {
        AwcParams q = p;
        q.gain = std::polar(std::abs(p.gain), -2.0);
        CHECK(crlb_awc(q, W, 15.0).nmse_bound == doctest::Approx(crlb_awc(p, W, 15.0).nmse_bound).epsilon(1e-9));
    }
    SUBCASE("nested spherical model is tighter on a spherical channel")
    {
        const Vec3 src = a.center + Vec3(3.0, 0.5, -0.4);
        SwcParams s = swc_params_from_source(src, a);
        s.gain = cplx(0.7, 0.2);
        const ArrayProjection proj = spherical_projection(src, a);
        AwcParams as;
        as.kbar = proj.kbar;
        as.Qbar = proj.Qbar;
        as.gain = s.gain;
        // the AWC parameters describe the same channel
        CHECK(nmse(as.gain * awc_steering(as, n, n), s.gain * swc_steering(src, a, SphericalModel::second_order))
              < 1e-20);
        for (double snr : {0.0, 30.0})
            CHECK(crlb_swc(s, a, W, snr).nmse_bound <= crlb_awc(as, W, snr).nmse_bound);
    }
    SUBCASE("channel Jacobians against central differences")
    {
        Eigen::VectorXd th(7);
        th << p.gain.real(), p.gain.imag(), awc_theta(p);
        auto awc_synth = [&](const Eigen::VectorXd& t) {
            const AwcParams q = awc_from_theta(t.tail(5), cplx(t(0), t(1)));
            return ChannelVector(q.gain * awc_steering(q, n, n));
        };
        CHECK(max_column_error(awc_channel_jacobian(p, n, n), fd_jacobian(awc_synth, th, 1e-7)) < 1e-4);

        SwcParams s = swc_params_from_source(a.center + Vec3(4.0, -0.8, 0.3), a);
        s.gain = cplx(-0.3, 0.6);
        Eigen::VectorXd ts(5);
        ts << s.gain.real(), s.gain.imag(), s.u, s.v, s.rho;
        auto swc_synth = [&](const Eigen::VectorXd& t) {
            return ChannelVector(cplx(t(0), t(1)) * swc_steering_jacobian(t(2), t(3), t(4), a, nullptr));
        };
        CHECK(max_column_error(swc_channel_jacobian(s, a), fd_jacobian(swc_synth, ts, 1e-7)) < 1e-4);
    }
    CHECK_THROWS(crlb_from_jacobian(Eigen::MatrixXcd::Zero(n * n, 3), W, 0.0, CrlbModel::awc));
}

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

#include "wavecurve/lm.hpp"
#include "wavecurve/models.hpp"

#include <doctest.h>

#include <limits>
#include <numbers>
#include <random>

using namespace wavecurve;
using std::numbers::pi;

namespace {

Eigen::VectorXcd random_vector(int n, uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Eigen::VectorXcd v(n);
    for (auto& x : v)
        x = cplx(nd(rng), nd(rng));
    return v;
}

// y = a exp(j 2 pi f n), n = 0..L-1, theta = (f)
SeparableModel tone_model(int L)
{
    SeparableModel m;
    m.n_params = 1;
    m.n_terms = 1;
    m.owner = {0};
    m.evaluate = [L](const Eigen::VectorXd& th, Eigen::MatrixXcd& B, Eigen::MatrixXcd* dB) {
        B.resize(L, 1);
        if (dB)
            dB->resize(L, 1);
        for (int n = 0; n < L; ++n) {
            B(n, 0) = std::polar(1.0, 2.0 * pi * th(0) * n);
            if (dB)
                (*dB)(n, 0) = cplx(0.0, 2.0 * pi * n) * B(n, 0);
        }
    };
    return m;
}

double max_column_error(const Eigen::MatrixXcd& J, const Eigen::MatrixXcd& FD)
{
    double worst = 0.0;
    for (Eigen::Index j = 0; j < J.cols(); ++j)
        worst = std::max(worst, (J.col(j) - FD.col(j)).cwiseAbs().maxCoeff() / J.col(j).cwiseAbs().maxCoeff());
    return worst;
}

} // namespace

TEST_CASE("least-squares gains")
{
    const Eigen::VectorXcd b = random_vector(20, 1);
    const Eigen::VectorXcd y = random_vector(20, 2);
    const Eigen::VectorXcd a = solve_gains(b, y);
    CHECK(std::abs(a(0) - b.dot(y) / b.squaredNorm()) < 1e-14);

    Eigen::MatrixXcd B(20, 3);
    B << b, random_vector(20, 3), random_vector(20, 4);
    const Eigen::VectorXcd g = solve_gains(B, y);
    // residual orthogonal to the columns
    CHECK((B.adjoint() * (y - B * g)).norm() < 1e-12);

    CHECK(solve_gains(Eigen::MatrixXcd::Zero(20, 1), y).norm() == 0.0);
}

TEST_CASE("tone frequency from a perturbed start")
{
    const int L = 64;
    const SeparableModel m = tone_model(L);
    Eigen::MatrixXcd B;
    Eigen::VectorXd truth(1);
    truth << 0.1234;
    m.evaluate(truth, B, nullptr);
    const Eigen::VectorXcd y = cplx(0.3, -1.1) * B.col(0);
    Eigen::VectorXd start(1);
    start << 0.1234 + 0.4 / L;
    const LmResult r = levenberg_marquardt(m, y, start);
    CHECK(r.finite);
    CHECK(std::abs(r.theta(0) - truth(0)) < 1e-10);
    CHECK(std::abs(r.gains(0) - cplx(0.3, -1.1)) < 1e-8);
    CHECK(r.cost < 1e-16 * y.squaredNorm());
    CHECK(r.cost <= r.initial_cost);
}

TEST_CASE("truth is a fixed point")
{
    const int L = 32;
    const SeparableModel m = tone_model(L);
    Eigen::MatrixXcd B;
    Eigen::VectorXd truth(1);
    truth << -0.21;
    m.evaluate(truth, B, nullptr);
    const LmResult r = levenberg_marquardt(m, B.col(0), truth);
    CHECK(r.theta(0) == doctest::Approx(truth(0)).epsilon(1e-14));
    CHECK(r.cost < 1e-20);
}

TEST_CASE("projection keeps the iterate feasible")
{
    SeparableModel m = tone_model(16);
    m.project = [](Eigen::VectorXd& th) { th(0) = std::max(th(0), 0.0); };
    Eigen::MatrixXcd B;
    Eigen::VectorXd truth(1);
    truth << -0.05;
    m.evaluate(truth, B, nullptr);
    Eigen::VectorXd start(1);
    start << 0.02;
    const LmResult r = levenberg_marquardt(m, B.col(0), start);
    CHECK(r.theta(0) >= 0.0);
}

TEST_CASE("non-finite model output stops the solver")
{
    SeparableModel m = tone_model(8);
    auto base = m.evaluate;
    m.evaluate = [base](const Eigen::VectorXd& th, Eigen::MatrixXcd& B, Eigen::MatrixXcd* dB) {
        base(th, B, dB);
        if (th(0) != 0.1)
            B(0, 0) = std::numeric_limits<double>::quiet_NaN();
    };
    Eigen::VectorXd start(1);
    start << 0.1;
    const LmResult r = levenberg_marquardt(m, random_vector(8, 5), start);
    CHECK_FALSE(r.finite);
    CHECK_FALSE(r.diagnostic.empty());
    CHECK(r.theta(0) == 0.1);
}

TEST_CASE("AWC steering Jacobian against central differences")
{
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int t = 0; t < 5; ++t) {
        Eigen::VectorXd th(5);
        th << 0.4 * U(rng), 0.4 * U(rng), 2e-3 * U(rng), 1e-3 * U(rng), 2e-3 * U(rng);
        Eigen::MatrixXcd J;
        const ChannelVector c = awc_steering_jacobian(th, 24, 16, J);
        CHECK((c - awc_steering(awc_from_theta(th), 24, 16)).norm() < 1e-14);
        Eigen::MatrixXcd FD(J.rows(), 5);
        const double h = 1e-6;
        for (int j = 0; j < 5; ++j) {
            Eigen::VectorXd a = th, b = th;
            a(j) += h;
            b(j) -= h;
            FD.col(j) = (awc_steering(awc_from_theta(a), 24, 16) - awc_steering(awc_from_theta(b), 24, 16)) / (2 * h);
        }
        CHECK(max_column_error(J, FD) < 1e-4);
    }
}

TEST_CASE("SWC steering Jacobian against central differences")
{
    const ArrayFrame array = ArrayFrame::half_wavelength(24, 24, 15e9);
    for (const Vec3 rho_uv : {Vec3(0.1, -0.2, 0.25), Vec3(-0.5, 0.3, 0.05), Vec3(0.0, 0.0, 0.0)}) {
        const double u = rho_uv(0), v = rho_uv(1), rho = rho_uv(2);
        Eigen::MatrixXcd J;
        const ChannelVector c = swc_steering_jacobian(u, v, rho, array, &J);
        const ArrayProjection p = swc_projection(u, v, rho, array);
        CHECK((c - awc_steering(p.kbar, p.Qbar, 24, 24)).norm() < 1e-14);
        Eigen::MatrixXcd FD(J.rows(), 3);
        const double h = 1e-6;
        const double x[3] = {u, v, rho};
        for (int j = 0; j < 3; ++j) {
            double a[3] = {x[0], x[1], x[2]}, b[3] = {x[0], x[1], x[2]};
            a[j] += h;
            b[j] -= h;
            FD.col(j) = (swc_steering_jacobian(a[0], a[1], a[2], array, nullptr)
                         - swc_steering_jacobian(b[0], b[1], b[2], array, nullptr))
                / (2 * h);
        }
        CHECK(max_column_error(J, FD) < 1e-4);
    }
}

TEST_CASE("SWC parameters round trip through the source position")
{
    const ArrayFrame array = ArrayFrame::half_wavelength(32, 32, 15e9);
    const Vec3 src = array.center + Vec3(6.0, -2.0, 1.5);
    const SwcParams p = swc_params_from_source(src, array);
    CHECK((swc_source(p, array) - src).norm() < 1e-12);
    CHECK(p.rho == doctest::Approx(1.0 / (src - array.center).norm()));
    SwcParams far = p;
    far.rho = 0.0;
    CHECK_THROWS(swc_source(far, array));
}

TEST_CASE("separable models evaluate through the combiner")
{
    const Combiner W = make_srft_combiner(16, 16, 4, 4, 2);
    const SeparableModel m = make_awc_model(&W, 16, 16);
    Eigen::VectorXd th(5);
    th << 0.1, -0.05, 1e-3, 2e-4, -5e-4;
    Eigen::MatrixXcd B, dB;
    m.evaluate(th, B, &dB);
    CHECK((B.col(0) - W.apply(awc_steering(awc_from_theta(th), 16, 16))).norm() < 1e-12);
    Eigen::MatrixXcd J;
    awc_steering_jacobian(th, 16, 16, J);
    CHECK((dB - W.apply_columns(J)).norm() < 1e-10);

    const ArrayFrame array = ArrayFrame::half_wavelength(16, 16, 15e9);
    SeparableModel s = make_swc_model(nullptr, array, 2);
    CHECK(s.n_params == 6);
    CHECK(s.n_terms == 2);
    Eigen::VectorXd t(6);
    t << 0.99, 0.5, -0.1, 0.0, 0.0, 0.1;
    s.project(t);
    CHECK(t(0) * t(0) + t(1) * t(1) <= 0.999 + 1e-12);
    CHECK(t(2) == 0.0);
}

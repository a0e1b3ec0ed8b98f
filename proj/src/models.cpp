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

#include "wavecurve/models.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wavecurve {

using std::numbers::pi;

Eigen::Matrix<double, 5, 1> awc_theta(const AwcParams& p)
{
    Eigen::Matrix<double, 5, 1> t;
    t << p.kbar(0), p.kbar(1), p.Qbar(0, 0), 0.5 * (p.Qbar(0, 1) + p.Qbar(1, 0)), p.Qbar(1, 1);
    return t;
}

AwcParams awc_from_theta(const Eigen::VectorXd& theta, cplx gain)
{
    AwcParams p;
    p.kbar = Vec2(theta(0), theta(1));
    p.Qbar << theta(2), theta(3), theta(3), theta(4);
    p.gain = gain;
    return p;
}

ChannelVector awc_steering_jacobian(const Eigen::VectorXd& theta, int ny, int nz, Eigen::MatrixXcd& dc)
{
    const AwcParams p = awc_from_theta(theta);
    ChannelVector c = awc_steering(p, ny, nz);
    dc.resize(c.size(), 5);
    const cplx mj2pi(0.0, -2.0 * pi);
    for (int iz = 0; iz < nz; ++iz) {
        const double mz = iz - 0.5 * (nz - 1);
        for (int iy = 0; iy < ny; ++iy) {
            const double my = iy - 0.5 * (ny - 1);
            const Eigen::Index k = iy + static_cast<Eigen::Index>(ny) * iz;
            const cplx g = mj2pi * c(k);
            dc(k, 0) = g * my;
            dc(k, 1) = g * mz;
            dc(k, 2) = g * (0.5 * my * my);
            dc(k, 3) = g * (my * mz);
            dc(k, 4) = g * (0.5 * mz * mz);
        }
    }
    return c;
}

SwcParams swc_params_from_source(const Vec3& source, const ArrayFrame& array)
{
    const Vec3 d = source - array.center;
    const double r = d.norm();
    if (!(r > 0.0))
        throw GeometryError("swc_params_from_source: source at the array centre");
    SwcParams p;
    p.u = d.dot(array.axis_y) / r;
    p.v = d.dot(array.axis_z) / r;
    p.rho = 1.0 / r;
    return p;
}

Vec3 swc_source(const SwcParams& p, const ArrayFrame& array)
{
    if (!(p.rho > 0.0))
        throw GeometryError("swc_source: far-field parameters have no finite source");
    const double w = std::sqrt(std::max(0.0, 1.0 - p.u * p.u - p.v * p.v));
    const Vec3 e = w * array.normal() + p.u * array.axis_y + p.v * array.axis_z;
    return array.center + e / p.rho;
}

ArrayProjection swc_projection(double u, double v, double rho, const ArrayFrame& array)
{
    const double alpha = array.spacing / array.wavelength;
    const double beta = array.spacing * array.spacing / array.wavelength;
    const Vec2 g(u, v);
    ArrayProjection p;
    // The wave travels from the source toward the centre, i.e. along -e.
    p.kbar = -alpha * g;
    p.Qbar = beta * rho * (Eigen::Matrix2d::Identity() - g * g.transpose());
    return p;
}

ChannelVector swc_steering_jacobian(double u, double v, double rho, const ArrayFrame& array,
                                    Eigen::MatrixXcd* dc)
{
    const ArrayProjection p = swc_projection(u, v, rho, array);
    ChannelVector c = awc_steering(p.kbar, p.Qbar, array.ny, array.nz);
    if (!dc)
        return c;
    const double alpha = array.spacing / array.wavelength;
    const double beta = array.spacing * array.spacing / array.wavelength;
    dc->resize(c.size(), 3);
    const cplx mj2pi(0.0, -2.0 * pi);
    for (int iz = 0; iz < array.nz; ++iz) {
        const double mz = array.offset_z(iz);
        for (int iy = 0; iy < array.ny; ++iy) {
            const double my = array.offset_y(iy);
            const Eigen::Index k = iy + static_cast<Eigen::Index>(array.ny) * iz;
            const double gn = u * my + v * mz;
            const cplx g = mj2pi * c(k);
            (*dc)(k, 0) = g * (-alpha * my - beta * rho * gn * my);
            (*dc)(k, 1) = g * (-alpha * mz - beta * rho * gn * mz);
            (*dc)(k, 2) = g * (0.5 * beta * (my * my + mz * mz - gn * gn));
        }
    }
    return c;
}

Eigen::VectorXcd sense(Sensing W, const Eigen::VectorXcd& x)
{
    return W ? W->apply(x) : x;
}

SeparableModel make_awc_model(Sensing W, int ny, int nz)
{
    if (W && W->n() != ny * nz)
        throw std::invalid_argument("make_awc_model: combiner size mismatch");
    SeparableModel m;
    m.n_params = 5;
    m.n_terms = 1;
    m.owner.assign(5, 0);
    m.evaluate = [W, ny, nz](const Eigen::VectorXd& theta, Eigen::MatrixXcd& B, Eigen::MatrixXcd* dB) {
        Eigen::MatrixXcd dc;
        const ChannelVector c = dB ? awc_steering_jacobian(theta, ny, nz, dc)
                                   : awc_steering(awc_from_theta(theta), ny, nz);
        B.resize(W ? W->m() : c.size(), 1);
        B.col(0) = sense(W, c);
        if (dB) {
            dB->resize(B.rows(), 5);
            for (int j = 0; j < 5; ++j)
                dB->col(j) = sense(W, dc.col(j));
        }
    };
    return m;
}

SeparableModel make_swc_model(Sensing W, const ArrayFrame& array, int paths)
{
    if (paths < 1)
        throw std::invalid_argument("make_swc_model: need at least one path");
    if (W && W->n() != array.size())
        throw std::invalid_argument("make_swc_model: combiner size mismatch");
    SeparableModel m;
    m.n_params = 3 * paths;
    m.n_terms = paths;
    m.owner.resize(m.n_params);
    for (int j = 0; j < m.n_params; ++j)
        m.owner[j] = j / 3;
    m.evaluate = [W, array, paths](const Eigen::VectorXd& theta, Eigen::MatrixXcd& B, Eigen::MatrixXcd* dB) {
        const Eigen::Index rows = W ? W->m() : array.size();
        B.resize(rows, paths);
        if (dB)
            dB->resize(rows, 3 * paths);
        Eigen::MatrixXcd dc;
        for (int k = 0; k < paths; ++k) {
            const ChannelVector c =
                swc_steering_jacobian(theta(3 * k), theta(3 * k + 1), theta(3 * k + 2), array, dB ? &dc : nullptr);
            B.col(k) = sense(W, c);
            if (dB)
                for (int j = 0; j < 3; ++j)
                    dB->col(3 * k + j) = sense(W, dc.col(j));
        }
    };
    m.project = [paths](Eigen::VectorXd& theta) {
        for (int k = 0; k < paths; ++k) {
            double& u = theta(3 * k);
            double& v = theta(3 * k + 1);
            const double s = std::hypot(u, v);
            const double smax = std::sqrt(0.999);
            if (s > smax) {
                u *= smax / s;
                v *= smax / s;
            }
            theta(3 * k + 2) = std::max(theta(3 * k + 2), 0.0);
        }
    };
    return m;
}

} // namespace wavecurve

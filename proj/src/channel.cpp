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

#include "wavecurve/channel.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace wavecurve {

using std::numbers::pi;

double wrap_frequency(double f)
{
    return f - std::floor(f + 0.5);
}

Vec2 wrap_frequency(const Vec2& f)
{
    return Vec2(wrap_frequency(f(0)), wrap_frequency(f(1)));
}

ChannelVector awc_steering(const Vec2& kbar, const Eigen::Matrix2d& Qbar, int ny, int nz)
{
    if (ny < 1 || nz < 1)
        throw std::invalid_argument("awc_steering: array dimensions must be positive");
    ChannelVector c(static_cast<Eigen::Index>(ny) * nz);
    const double scale = 1.0 / std::sqrt(static_cast<double>(ny) * nz);
    const double q01 = 0.5 * (Qbar(0, 1) + Qbar(1, 0));
    for (int iz = 0; iz < nz; ++iz) {
        const double mz = iz - 0.5 * (nz - 1);
        for (int iy = 0; iy < ny; ++iy) {
            const double my = iy - 0.5 * (ny - 1);
            const double cycles = kbar(0) * my + kbar(1) * mz
                + 0.5 * (Qbar(0, 0) * my * my + 2.0 * q01 * my * mz + Qbar(1, 1) * mz * mz);
            const double ph = -2.0 * pi * cycles;
            c(iy + static_cast<Eigen::Index>(ny) * iz) = cplx(scale * std::cos(ph), scale * std::sin(ph));
        }
    }
    return c;
}

ChannelVector awc_steering(const AwcParams& p, int ny, int nz)
{
    return awc_steering(p.kbar, p.Qbar, ny, nz);
}

ArrayProjection spherical_projection(const Vec3& source, const ArrayFrame& array)
{
    const Vec3 delta = array.center - source;
    const double r = delta.norm();
    if (!(r > 0.0))
        throw GeometryError("spherical_projection: source at the array centre");
    WavefrontFrame f;
    f.direction = delta / r;
    f.u1 = f.direction.unitOrthogonal();
    f.u2 = f.direction.cross(f.u1);
    f.Q = CurvatureMatrix::Identity() / r;
    return project_to_array(f, array);
}

ChannelVector swc_steering(const Vec3& source, const ArrayFrame& array, SphericalModel model)
{
    if (std::abs((source - array.center).dot(array.normal())) < 1e-6)
        throw GeometryError("swc_steering: source lies on the array plane");
    if (model == SphericalModel::second_order) {
        const ArrayProjection p = spherical_projection(source, array);
        return awc_steering(p.kbar, p.Qbar, array.ny, array.nz);
    }
    ChannelVector c(array.size());
    const double scale = 1.0 / std::sqrt(static_cast<double>(array.size()));
    const double r0 = (source - array.center).norm();
    const double k = 2.0 * pi / array.wavelength;
    for (int iz = 0; iz < array.nz; ++iz) {
        for (int iy = 0; iy < array.ny; ++iy) {
            const double dist = (array.element(iy, iz) - source).norm() - r0;
            const double ph = -k * dist;
            c(iy + static_cast<Eigen::Index>(array.ny) * iz) = cplx(scale * std::cos(ph), scale * std::sin(ph));
        }
    }
    return c;
}

Eigen::MatrixXcd unvec(const ChannelVector& h, int ny, int nz)
{
    if (h.size() != static_cast<Eigen::Index>(ny) * nz)
        throw std::invalid_argument("unvec: length does not match ny * nz");
    return Eigen::Map<const Eigen::MatrixXcd>(h.data(), ny, nz);
}

ChannelVector vec(const Eigen::MatrixXcd& H)
{
    return Eigen::Map<const ChannelVector>(H.data(), H.size());
}

AwcParams scenario_to_awc(const Scenario& s)
{
    const Vec3& p = s.scatterer.point;
    if ((s.ue - p).norm() == 0.0 || (s.array.center - p).norm() == 0.0 || (s.ue - s.array.center).norm() == 0.0)
        throw GeometryError("scenario_to_awc: UE, scatterer and array must be distinct");

    const WavefrontFrame incident = make_incident_frame(s.ue, p);
    const WavefrontFrame reflected = reflect(incident, s.scatterer);
    const Vec3 to_bs = s.array.center - p;
    const double sr = to_bs.norm();
    // The reflected ray must actually reach the array centre.
    if ((to_bs / sr - reflected.direction).norm() > 1e-3)
        throw GeometryError("scenario_to_awc: reflected ray misses the array centre");
    const WavefrontFrame at_bs = propagate(reflected, sr);
    const ArrayProjection proj = project_to_array(at_bs, s.array);

    AwcParams out;
    out.kbar = wrap_frequency(proj.kbar);
    out.Qbar = proj.Qbar;
    if (s.gain_mode == GainMode::unit) {
        out.gain = std::polar(1.0, s.phase0);
    } else {
        const double path = (s.ue - p).norm() + sr;
        out.gain = std::polar(1.0, -2.0 * pi * path / s.array.wavelength);
    }
    return out;
}

ChannelVector scenario_channel(const Scenario& s)
{
    const AwcParams p = scenario_to_awc(s);
    return p.gain * awc_steering(p, s.array.ny, s.array.nz);
}

std::vector<std::string> scenario_warnings(const Scenario& s)
{
    std::vector<std::string> out;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(0.5 * (s.scatterer.Qs + s.scatterer.Qs.transpose()));
    const double kmax = es.eigenvalues().cwiseAbs().maxCoeff();
    if (kmax > 0.0 && 1.0 / kmax < 10.0 * s.array.wavelength) {
        std::ostringstream os;
        os << "scatterer radius " << 1.0 / kmax << " m is below 10 wavelengths";
        out.push_back(os.str());
    }
    return out;
}

Vec3 mirror_image(const Vec3& source, const SurfacePatch& surface)
{
    const double h = (source - surface.point).dot(surface.normal);
    return source - 2.0 * h * surface.normal;
}

} // namespace wavecurve

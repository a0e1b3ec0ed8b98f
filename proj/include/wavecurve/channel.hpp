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

#ifndef WAVECURVE_CHANNEL_HPP
#define WAVECURVE_CHANNEL_HPP

#include "wavecurve/geometry.hpp"

#include <complex>
#include <string>
#include <vector>

namespace wavecurve {

using cplx = std::complex<double>;
using ChannelVector = Eigen::VectorXcd;

/// Effective array-domain parameters of a single anisotropic path.
/// The channel is h = gain * awc_steering(kbar, Qbar); kbar is kept in [-0.5, 0.5).
struct AwcParams {
    Vec2 kbar = Vec2::Zero();
    Eigen::Matrix2d Qbar = Eigen::Matrix2d::Zero();
    cplx gain{1.0, 0.0};
};

/// Wraps a spatial frequency (cycles per element) into [-0.5, 0.5).
double wrap_frequency(double f);
Vec2 wrap_frequency(const Vec2& f);

/// Unit-norm steering vector with phase -2pi (kbar^T n + 1/2 n^T Qbar n) over
/// zero-centred indices n, vectorised column-major (iy fastest).
ChannelVector awc_steering(const Vec2& kbar, const Eigen::Matrix2d& Qbar, int ny, int nz);
ChannelVector awc_steering(const AwcParams& p, int ny, int nz);

/// How spherical-wave steering vectors evaluate element distances.
enum class SphericalModel {
    exact,        ///< |p_n - s| - |s - c|
    second_order, ///< Taylor expansion to 2nd order about the array centre
};

/// Point-source steering vector, constant modulus 1/sqrt(N).
ChannelVector swc_steering(const Vec3& source, const ArrayFrame& array,
                           SphericalModel model = SphericalModel::exact);

/// Second-order phase parameters of a point source seen by the array.
ArrayProjection spherical_projection(const Vec3& source, const ArrayFrame& array);

Eigen::MatrixXcd unvec(const ChannelVector& h, int ny, int nz);
ChannelVector vec(const Eigen::MatrixXcd& H);

enum class GainMode { unit, geometric_phase };

struct Scenario {
    Vec3 ue = Vec3(30.0, 0.0, 1.5);
    ArrayFrame array;
    SurfacePatch scatterer;
    GainMode gain_mode = GainMode::unit;
    double phase0 = 0.0; ///< gain phase for GainMode::unit, rad
};

/// Full geometric pipeline UE -> reflection -> propagation -> array projection.
AwcParams scenario_to_awc(const Scenario& s);

/// Convenience: gain * awc_steering(scenario_to_awc(s)).
ChannelVector scenario_channel(const Scenario& s);

/// Non-fatal modelling caveats (e.g. scatterer radii below 10 wavelengths).
std::vector<std::string> scenario_warnings(const Scenario& s);

/// Position of the source mirrored across the scatterer's tangent plane.
Vec3 mirror_image(const Vec3& source, const SurfacePatch& surface);

} // namespace wavecurve

#endif

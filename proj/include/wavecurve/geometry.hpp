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

#ifndef WAVECURVE_GEOMETRY_HPP
#define WAVECURVE_GEOMETRY_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace wavecurve {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

/// Symmetric 2x2 curvature matrix (1/m). Eigenvalues are principal curvatures.
using CurvatureMatrix = Eigen::Matrix2d;

class GeometryError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class SingularityError : public GeometryError {
public:
    using GeometryError::GeometryError;
};

class CausticError : public GeometryError {
public:
    using GeometryError::GeometryError;
};

class OracleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Local frame of a wavefront at its vertex.
///
/// `direction` is the propagation direction; `u1`, `u2` span the transverse
/// plane and {u1, u2, direction} is right-handed. `Q` is expressed in (u1, u2);
/// the wavefront surface near the vertex is h = -1/2 x^T Q x, so a diverging
/// wave has positive curvature.
struct WavefrontFrame {
    Vec3 direction = Vec3::UnitX();
    Vec3 u1 = Vec3::UnitY();
    Vec3 u2 = Vec3::UnitZ();
    CurvatureMatrix Q = CurvatureMatrix::Zero();
};

/// A second-order reflecting surface patch around `point`.
///
/// `normal` points toward the side the incident wave comes from. The surface
/// is h = -1/2 x^T Qs x along `normal`, with x measured in (u1, u2), so a
/// convex surface has positive Qs.
struct SurfacePatch {
    Vec3 point = Vec3::Zero();
    Vec3 normal = Vec3::UnitY();
    Vec3 u1 = Vec3::UnitX();
    Vec3 u2 = Vec3::UnitZ();
    CurvatureMatrix Qs = CurvatureMatrix::Zero();

    Vec3 surface_point(const Vec2& x) const;
};

/// Uniform planar array. Element (iy, iz) sits at
/// center + (iy - (ny-1)/2) * spacing * axis_y + (iz - (nz-1)/2) * spacing * axis_z.
struct ArrayFrame {
    Vec3 center = Vec3(0.0, 0.0, 10.0);
    Vec3 axis_y = Vec3::UnitY();
    Vec3 axis_z = Vec3::UnitZ();
    int ny = 128;
    int nz = 128;
    double spacing = 0.01;
    double wavelength = 0.02;

    int size() const { return ny * nz; }
    double offset_y(int iy) const { return iy - 0.5 * (ny - 1); }
    double offset_z(int iz) const { return iz - 0.5 * (nz - 1); }
    Vec3 element(int iy, int iz) const;
    /// Broadside direction axis_y x axis_z (the side the array faces).
    Vec3 normal() const { return axis_y.cross(axis_z); }
    double aperture() const;

    /// Half-wavelength array for a carrier frequency in Hz.
    static ArrayFrame half_wavelength(int ny, int nz, double carrier_hz,
                                      const Vec3& center = Vec3(0.0, 0.0, 10.0));
};

constexpr double kSpeedOfLight = 299792458.0;

/// Array-index-domain phase parameters: phase(n) = kbar^T n + 1/2 n^T Qbar n cycles.
struct ArrayProjection {
    Vec2 kbar = Vec2::Zero();
    Eigen::Matrix2d Qbar = Eigen::Matrix2d::Zero();
};

/// Spherical wave from a point `source`, evaluated at `reflection_point`.
WavefrontFrame make_incident_frame(const Vec3& source, const Vec3& reflection_point);

/// Reflects an incident frame off a curved surface patch (law of reflection
/// plus the curvature-matrix reflection rule). The reflected basis is the
/// mirror image of the incident basis with u2 negated, which keeps the triad
/// right-handed; Q is expressed in that basis.
WavefrontFrame reflect(const WavefrontFrame& incident, const SurfacePatch& surface);

/// Free-space propagation by distance s: Q' = Q (I + s Q)^{-1}.
WavefrontFrame propagate(const WavefrontFrame& frame, double s);

/// Second-order phase model of the wavefront over the array index grid.
ArrayProjection project_to_array(const WavefrontFrame& frame_at_bs, const ArrayFrame& array);

/// Exact single-bounce path length ue -> surface -> element, minimized over
/// the quadric surface patch by damped Newton iteration.
double fermat_oracle(const Vec3& ue, const SurfacePatch& surface, const Vec3& element);

/// Builds a patch at `point` whose normal is the specular bisector for the
/// path source -> point -> target. The second principal direction is
/// `axis_hint` projected onto the tangent plane, rotated by `rotation` rad
/// about the normal; curvatures k1, k2 go along (u1, u2).
SurfacePatch specular_patch(const Vec3& source, const Vec3& target, const Vec3& point,
                            double k1, double k2, const Vec3& axis_hint = Vec3::UnitZ(),
                            double rotation = 0.0);

/// Reflection point on a vertical cylinder (horizontal normal) that is `d`
/// from the source and `r` from the target, on the +90 degree side of the
/// horizontal target -> source direction.
Vec3 pillar_reflection_point(const Vec3& source, const Vec3& target, double d, double r);

} // namespace wavecurve

#endif

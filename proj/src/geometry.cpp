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

#include "wavecurve/geometry.hpp"

#include <cmath>

namespace wavecurve {

namespace {

Vec3 unit(const Vec3& v, const char* what)
{
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n))
        throw GeometryError(std::string("zero-length vector: ") + what);
    return v / n;
}

Eigen::Matrix<double, 3, 2> basis_of(const Vec3& a, const Vec3& b)
{
    Eigen::Matrix<double, 3, 2> U;
    U.col(0) = a;
    U.col(1) = b;
    return U;
}

} // namespace

Vec3 SurfacePatch::surface_point(const Vec2& x) const
{
    const double h = -0.5 * x.dot(Qs * x);
    return point + x(0) * u1 + x(1) * u2 + h * normal;
}

Vec3 ArrayFrame::element(int iy, int iz) const
{
    return center + spacing * (offset_y(iy) * axis_y + offset_z(iz) * axis_z);
}

double ArrayFrame::aperture() const
{
    const double ly = spacing * (ny - 1);
    const double lz = spacing * (nz - 1);
    return std::sqrt(ly * ly + lz * lz);
}

ArrayFrame ArrayFrame::half_wavelength(int ny, int nz, double carrier_hz, const Vec3& center)
{
    ArrayFrame a;
    a.center = center;
    a.ny = ny;
    a.nz = nz;
    a.wavelength = kSpeedOfLight / carrier_hz;
    a.spacing = 0.5 * a.wavelength;
    return a;
}

WavefrontFrame make_incident_frame(const Vec3& source, const Vec3& reflection_point)
{
    const Vec3 delta = reflection_point - source;
    const double dist = delta.norm();
    if (!(dist > 0.0))
        throw GeometryError("make_incident_frame: source coincides with reflection point");

    WavefrontFrame f;
    f.direction = delta / dist;
    const Vec3 c = f.direction.cross(Vec3::UnitZ());
    if (c.norm() >= 1e-6) {
        f.u1 = c.normalized();
    } else {
        // direction is vertical; x is already transverse
        f.u1 = (Vec3::UnitX() - Vec3::UnitX().dot(f.direction) * f.direction).normalized();
    }
    f.u2 = f.direction.cross(f.u1);
    f.Q = CurvatureMatrix::Identity() / dist;
    return f;
}

WavefrontFrame reflect(const WavefrontFrame& incident, const SurfacePatch& surface)
{
    const Vec3& n = surface.normal;
    const double dn = n.dot(incident.direction);
    if (!(dn < 0.0))
        throw GeometryError("reflect: wave does not hit the front face of the surface");
    const double cos_i = std::abs(dn);

    Eigen::Matrix2d theta;
    theta << incident.u1.dot(surface.u1), incident.u1.dot(surface.u2),
        incident.u2.dot(surface.u1), incident.u2.dot(surface.u2);

    Eigen::JacobiSVD<Eigen::Matrix2d> svd(theta);
    const auto sv = svd.singularValues();
    if (!(sv(1) > 0.0) || sv(0) / sv(1) > 1e12)
        throw SingularityError("reflect: grazing incidence makes the projection matrix singular");

    const Eigen::Matrix2d theta_inv = theta.inverse();
    Eigen::Matrix2d Qr = incident.Q + 2.0 * cos_i * theta_inv.transpose() * surface.Qs * theta_inv;

    WavefrontFrame r;
    r.direction = incident.direction - 2.0 * dn * n;
    r.u1 = incident.u1 - 2.0 * n.dot(incident.u1) * n;
    const Vec3 mirrored_u2 = incident.u2 - 2.0 * n.dot(incident.u2) * n;
    // A mirror flips handedness; negate u2 (and the cross term) to restore it.
    r.u2 = -mirrored_u2;
    Qr(0, 1) = -Qr(0, 1);
    Qr(1, 0) = -Qr(1, 0);
    r.Q = 0.5 * (Qr + Qr.transpose());
    return r;
}

WavefrontFrame propagate(const WavefrontFrame& frame, double s)
{
    if (!(s >= 0.0))
        throw GeometryError("propagate: negative distance");
    const Eigen::Matrix2d M = Eigen::Matrix2d::Identity() + s * frame.Q;
    if (!(M.determinant() > 1e-14))
        throw CausticError("propagate: path crosses a caustic");
    WavefrontFrame out = frame;
    const Eigen::Matrix2d Qp = frame.Q * M.inverse();
    out.Q = 0.5 * (Qp + Qp.transpose());
    return out;
}

ArrayProjection project_to_array(const WavefrontFrame& frame_at_bs, const ArrayFrame& array)
{
    const auto A = basis_of(array.axis_y, array.axis_z);
    const auto U = basis_of(frame_at_bs.u1, frame_at_bs.u2);
    const Eigen::Matrix3d H3 = U * frame_at_bs.Q * U.transpose();

    ArrayProjection p;
    p.kbar = (array.spacing / array.wavelength) * (A.transpose() * frame_at_bs.direction);
    const Eigen::Matrix2d Qbar =
        (array.spacing * array.spacing / array.wavelength) * (A.transpose() * H3 * A);
    p.Qbar = 0.5 * (Qbar + Qbar.transpose());
    return p;
}

double fermat_oracle(const Vec3& ue, const SurfacePatch& surface, const Vec3& element)
{
    if ((element - surface.point).norm() < 1e-12)
        return (ue - surface.point).norm();

    const Vec3& n = surface.normal;
    const Eigen::Matrix2d& C = surface.Qs;

    auto length = [&](const Vec2& x) {
        const Vec3 q = surface.surface_point(x);
        return (q - ue).norm() + (element - q).norm();
    };

    Vec2 x = Vec2::Zero();
    double L = length(x);
    for (int it = 0; it < 100; ++it) {
        const Vec3 q = surface.surface_point(x);
        const Vec3 a = q - ue;
        const Vec3 b = element - q;
        const double la = a.norm();
        const double lb = b.norm();
        if (!(la > 0.0) || !(lb > 0.0))
            throw OracleError("fermat_oracle: path endpoint on the surface");
        const Vec3 ah = a / la;
        const Vec3 bh = b / lb;
        const Vec2 Cx = C * x;

        Eigen::Matrix<double, 3, 2> J;
        J.col(0) = surface.u1 - Cx(0) * n;
        J.col(1) = surface.u2 - Cx(1) * n;

        const Vec3 dir = ah - bh;
        const Vec2 grad = J.transpose() * dir;
        if (grad.norm() < 1e-12)
            return L;

        const Eigen::Matrix3d P = (Eigen::Matrix3d::Identity() - ah * ah.transpose()) / la
            + (Eigen::Matrix3d::Identity() - bh * bh.transpose()) / lb;
        Eigen::Matrix2d H = J.transpose() * P * J - n.dot(dir) * C;

        // Once the predicted decrease is at the rounding level of L, comparing
        // lengths can no longer rank the iterates; take the Newton step as is.
        Eigen::LLT<Eigen::Matrix2d> newton(H);
        if (newton.info() == Eigen::Success) {
            const Vec2 full = -newton.solve(grad);
            if (-0.5 * grad.dot(full) < 1e-13 * L)
                return std::min(L, length(x + full));
        }

        double damping = 0.0;
        Vec2 step;
        for (int tries = 0; tries < 40; ++tries) {
            const Eigen::Matrix2d Hd = H + damping * Eigen::Matrix2d::Identity();
            Eigen::LLT<Eigen::Matrix2d> llt(Hd);
            if (llt.info() == Eigen::Success) {
                step = -llt.solve(grad);
                const double Ln = length(x + step);
                if (Ln <= L) {
                    x += step;
                    L = Ln;
                    break;
                }
            }
            damping = damping == 0.0 ? 1e-6 * (std::abs(H.trace()) + 1.0) : damping * 10.0;
            if (tries == 39) {
                // no descent step: at rounding floor
                return L;
            }
        }
    }
    throw OracleError("fermat_oracle: Newton iteration did not converge");
}

SurfacePatch specular_patch(const Vec3& source, const Vec3& target, const Vec3& point,
                            double k1, double k2, const Vec3& axis_hint, double rotation)
{
    const Vec3 a = unit(source - point, "point-source");
    const Vec3 b = unit(target - point, "point-target");
    const Vec3 bis = a + b;
    if (bis.norm() < 1e-9)
        throw GeometryError("specular_patch: point lies on the source-target segment");

    SurfacePatch s;
    s.point = point;
    s.normal = bis.normalized();
    Vec3 t = axis_hint - axis_hint.dot(s.normal) * s.normal;
    if (t.norm() < 1e-9) {
        // hint parallel to the normal; fall back to any tangent
        t = s.normal.unitOrthogonal();
    }
    t.normalize();
    const Vec3 t_perp = t.cross(s.normal);
    // Rotate the pair (t_perp, t) about the normal.
    const double c = std::cos(rotation);
    const double sn = std::sin(rotation);
    s.u1 = c * t_perp + sn * t;
    s.u2 = -sn * t_perp + c * t;
    s.Qs << k1, 0.0, 0.0, k2;
    return s;
}

Vec3 pillar_reflection_point(const Vec3& source, const Vec3& target, double d, double r)
{
    if (!(d > 0.0) || !(r > 0.0))
        throw GeometryError("pillar_reflection_point: distances must be positive");
    const double sz = source.z() + (target.z() - source.z()) * d / (d + r);
    const double dz_s = sz - source.z();
    const double dz_t = target.z() - sz;
    const double dh2 = d * d - dz_s * dz_s;
    const double rh2 = r * r - dz_t * dz_t;
    const Eigen::Vector2d ts(source.x() - target.x(), source.y() - target.y());
    const double lh = ts.norm();
    if (dh2 < 0.0 || rh2 < 0.0 || !(lh > 0.0))
        throw GeometryError("pillar_reflection_point: infeasible distances");
    const double dh = std::sqrt(dh2);
    const double rh = std::sqrt(rh2);
    if (dh + rh < lh)
        throw GeometryError("pillar_reflection_point: d + r shorter than the source-target span");
    const double along = (rh * rh - dh * dh + lh * lh) / (2.0 * lh);
    const double side = std::sqrt(std::max(rh * rh - along * along, 0.0));
    const Eigen::Vector2d e = ts / lh;
    const Eigen::Vector2d perp(-e.y(), e.x());
    const Eigen::Vector2d h = Eigen::Vector2d(target.x(), target.y()) + along * e + side * perp;
    return Vec3(h.x(), h.y(), sz);
}

} // namespace wavecurve

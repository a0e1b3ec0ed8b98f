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
#include "wavecurve/fft.hpp"
#include "wavecurve/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wavecurve {

using std::numbers::pi;

double nmse(const ChannelVector& h_hat, const ChannelVector& h)
{
    if (h_hat.size() != h.size())
        throw std::invalid_argument("nmse: length mismatch");
    const double e = h.squaredNorm();
    if (!(e > 0.0))
        throw std::invalid_argument("nmse: zero reference channel");
    return (h_hat - h).squaredNorm() / e;
}

double cosine_similarity(const ChannelVector& u, const ChannelVector& v)
{
    if (u.size() != v.size())
        throw std::invalid_argument("cosine_similarity: length mismatch");
    const double nu = u.norm();
    const double nv = v.norm();
    if (!(nu > 0.0) || !(nv > 0.0))
        throw std::invalid_argument("cosine_similarity: zero vector");
    return std::min(1.0, std::abs(u.dot(v)) / (nu * nv));
}

Vec3 axis_toward(const Vec3& point, const ArrayFrame& array)
{
    const Vec3 d = point - array.center;
    if (!(d.norm() > 0.0))
        throw GeometryError("axis_toward: point at the array centre");
    return d.normalized();
}

namespace {

int wrap(int i, int n)
{
    const int r = i % n;
    return r < 0 ? r + n : r;
}

int signed_bin(int i, int L)
{
    return i < (L + 1) / 2 ? i : i - L;
}

struct Candidate {
    double score = 0.0;
    double u = 0.0;
    double v = 0.0;
    double rho = 0.0;
    int ring = 0;
};

/// Direction cosines (u, v) of the strongest plane-wave component of h.
Vec2 spectral_direction(const Eigen::MatrixXcd& H, const ArrayFrame& array)
{
    const int Ly = 2 * array.ny;
    const int Lz = 2 * array.nz;
    const Eigen::MatrixXd P = fft::padded_power(H, Ly, Lz);
    Eigen::Index i = 0, j = 0;
    P.maxCoeff(&i, &j);
    const double alpha = array.spacing / array.wavelength;
    Vec2 g(signed_bin(static_cast<int>(i), Ly) / (alpha * Ly), signed_bin(static_cast<int>(j), Lz) / (alpha * Lz));
    if (g.norm() > 0.999)
        g *= 0.999 / g.norm();
    return g;
}

} // namespace

SwcFit best_swc_fit(const ChannelVector& h, const ArrayFrame& array, const SwcSearchConfig& cfg)
{
    if (h.size() != array.size())
        throw std::invalid_argument("best_swc_fit: channel length mismatch");
    const double eh = h.squaredNorm();
    if (!(eh > 0.0))
        throw std::invalid_argument("best_swc_fit: zero channel");
    if (cfg.rings < 1 || !(cfg.r_min > 0.0) || !(cfg.r_max >= cfg.r_min) || cfg.starts < 1)
        throw std::invalid_argument("best_swc_fit: empty search region");

    const int ny = array.ny;
    const int nz = array.nz;
    const Eigen::MatrixXcd H = unvec(h, ny, nz);
    const double alpha = array.spacing / array.wavelength;
    const double beta = array.spacing * array.spacing / array.wavelength;

    Vec2 g0;
    Vec3 axis_local;
    if (cfg.axis) {
        const Vec3 a = cfg.axis->normalized();
        g0 = Vec2(a.dot(array.axis_y), a.dot(array.axis_z));
        axis_local = Vec3(a.dot(array.normal()), g0(0), g0(1));
    } else {
        g0 = spectral_direction(H, array);
        axis_local = Vec3(std::sqrt(std::max(0.0, 1.0 - g0.squaredNorm())), g0(0), g0(1));
    }
    const double cos_cone = std::cos(cfg.cone_deg * pi / 180.0);

    const int Ly = cfg.fft_zeropad * ny;
    const int Lz = cfg.fft_zeropad * nz;
    std::vector<Candidate> cands;
    for (int ring = 0; ring < cfg.rings; ++ring) {
        const double t = cfg.rings == 1 ? 0.0 : static_cast<double>(ring) / (cfg.rings - 1);
        const double rho = 1.0 / cfg.r_max + t * (1.0 / cfg.r_min - 1.0 / cfg.r_max);
        // Remove the curvature of a source on the axis at this distance.
        const Eigen::Matrix2d Q0 = beta * rho * (Eigen::Matrix2d::Identity() - g0 * g0.transpose());
        Eigen::MatrixXcd G(ny, nz);
        for (int iz = 0; iz < nz; ++iz) {
            const double mz = array.offset_z(iz);
            for (int iy = 0; iy < ny; ++iy) {
                const double my = array.offset_y(iy);
                const double quad = Q0(0, 0) * my * my + 2.0 * Q0(0, 1) * my * mz + Q0(1, 1) * mz * mz;
                G(iy, iz) = H(iy, iz) * std::polar(1.0, pi * quad);
            }
        }
        const Eigen::MatrixXd P = fft::padded_power(G, Ly, Lz);
        for (int j = 0; j < Lz; ++j)
            for (int i = 0; i < Ly; ++i) {
                const double p = P(i, j);
                bool is_max = true;
                for (int a = -1; a <= 1 && is_max; ++a)
                    for (int b = -1; b <= 1; ++b)
                        if ((a || b) && P(wrap(i + a, Ly), wrap(j + b, Lz)) > p) {
                            is_max = false;
                            break;
                        }
                if (!is_max)
                    continue;
                // kbar = -alpha g and the DFT peak sits at -kbar.
                const double u = signed_bin(i, Ly) / (alpha * Ly);
                const double v = signed_bin(j, Lz) / (alpha * Lz);
                const double s2 = u * u + v * v;
                if (s2 >= 1.0)
                    continue;
                const Vec3 e(std::sqrt(1.0 - s2), u, v);
                if (e.dot(axis_local) < cos_cone)
                    continue;
                cands.push_back({p, u, v, rho, ring});
            }
    }
    if (cands.empty())
        throw std::invalid_argument("best_swc_fit: no grid point inside the search cone");

    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
    std::vector<Candidate> picked;
    const double du = 2.0 / ny;
    const double dv = 2.0 / nz;
    for (const auto& c : cands) {
        bool close = false;
        for (const auto& q : picked)
            if (std::abs(c.u - q.u) < 2.0 * du && std::abs(c.v - q.v) < 2.0 * dv && std::abs(c.ring - q.ring) <= 2) {
                close = true;
                break;
            }
        if (!close)
            picked.push_back(c);
        if (static_cast<int>(picked.size()) >= cfg.starts)
            break;
    }

    const SeparableModel model = make_swc_model(nullptr, array, 1);
    SwcFit best;
    best.nmse = std::numeric_limits<double>::infinity();
    for (const auto& c : picked) {
        Eigen::VectorXd theta0(3);
        theta0 << c.u, c.v, c.rho;
        const LmResult r = levenberg_marquardt(model, h, theta0, cfg.lm);
        const double e = r.cost / eh;
        if (e < best.nmse) {
            best.nmse = e;
            best.params = {r.theta(0), r.theta(1), r.theta(2), r.gains(0)};
            best.lm_iterations = r.iterations;
        }
    }
    if (best.params.rho > 0.0)
        best.source = swc_source(best.params, array);
    return best;
}

std::vector<double> VolumeGrid::range(double lo, double hi, double step)
{
    if (!(step > 0.0) || hi < lo)
        throw std::invalid_argument("VolumeGrid::range: invalid range");
    std::vector<double> out;
    const long long n = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
    for (long long i = 0; i <= n; ++i)
        out.push_back(lo + static_cast<double>(i) * step);
    return out;
}

double SimilarityVolume::level_fraction(double frac) const
{
    if (values.empty())
        return 0.0;
    const double thr = frac * peak;
    const auto n = std::count_if(values.begin(), values.end(), [thr](double v) { return v >= thr; });
    return static_cast<double>(n) / static_cast<double>(values.size());
}

Vec3 local_to_global(const Vec3& local, const ArrayFrame& array)
{
    return array.center + local(0) * array.normal() + local(1) * array.axis_y + local(2) * array.axis_z;
}

SimilarityVolume similarity_volume(const ChannelVector& h, const ArrayFrame& array, const VolumeGrid& grid,
                                   bool parallel)
{
    SimilarityVolume vol;
    vol.grid = grid;
    vol.values.assign(grid.size(), 0.0);
    const size_t nx = grid.x.size();
    const size_t nyg = grid.y.size();
    std::vector<ArrayProjection> atoms;
    // One z-slice at a time keeps the atom list small.
    for (size_t iz = 0; iz < grid.z.size(); ++iz) {
        atoms.clear();
        for (size_t iy = 0; iy < nyg; ++iy)
            for (size_t ix = 0; ix < nx; ++ix) {
                const Vec3 src = local_to_global(Vec3(grid.x[ix], grid.y[iy], grid.z[iz]), array);
                const SwcParams p = swc_params_from_source(src, array);
                atoms.push_back(swc_projection(p.u, p.v, p.rho, array));
            }
        const std::vector<double> s = parallel ? kernels::similarity_parallel(h, atoms, array.ny, array.nz)
                                               : kernels::similarity_serial(h, atoms, array.ny, array.nz);
        std::copy(s.begin(), s.end(), vol.values.begin() + static_cast<std::ptrdiff_t>(iz * nyg * nx));
    }
    for (size_t iz = 0; iz < grid.z.size(); ++iz)
        for (size_t iy = 0; iy < nyg; ++iy)
            for (size_t ix = 0; ix < nx; ++ix) {
                const double v = vol.at(ix, iy, iz);
                if (v > vol.peak) {
                    vol.peak = v;
                    vol.peak_location = Vec3(grid.x[ix], grid.y[iy], grid.z[iz]);
                }
            }
    return vol;
}

std::string to_string(CrlbModel m)
{
    return m == CrlbModel::awc ? "AWC" : "SWC";
}

Eigen::MatrixXcd awc_channel_jacobian(const AwcParams& p, int ny, int nz)
{
    Eigen::MatrixXcd dc;
    const ChannelVector c = awc_steering_jacobian(awc_theta(p), ny, nz, dc);
    Eigen::MatrixXcd G(c.size(), 7);
    G.col(0) = c;
    G.col(1) = cplx(0.0, 1.0) * c;
    G.rightCols(5) = p.gain * dc;
    return G;
}

Eigen::MatrixXcd swc_channel_jacobian(const SwcParams& p, const ArrayFrame& array)
{
    Eigen::MatrixXcd dc;
    const ChannelVector c = swc_steering_jacobian(p.u, p.v, p.rho, array, &dc);
    Eigen::MatrixXcd G(c.size(), 5);
    G.col(0) = c;
    G.col(1) = cplx(0.0, 1.0) * c;
    G.rightCols(3) = p.gain * dc;
    return G;
}

CrlbReport crlb_from_jacobian(const Eigen::MatrixXcd& G, const Combiner& W, double h_energy, CrlbModel model)
{
    if (!(h_energy > 0.0))
        throw std::invalid_argument("crlb: zero channel");
    // Equilibrate columns first: gain and shape columns differ by |a|, which
    // would otherwise look like rank loss at high SNR.
    const Eigen::MatrixXcd J0 = W.apply_columns(G);
    Eigen::VectorXd scale(J0.cols());
    for (Eigen::Index j = 0; j < J0.cols(); ++j) {
        const double nj = J0.col(j).norm();
        scale(j) = nj > 0.0 ? 1.0 / nj : 1.0;
    }
    const Eigen::MatrixXcd J = J0 * scale.asDiagonal();
    const Eigen::MatrixXd F = 2.0 * (J.adjoint() * J).real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(F);
    const Eigen::VectorXd ev = es.eigenvalues();
    const double tol = 1e-12 * ev.cwiseAbs().maxCoeff();
    CrlbReport rep;
    rep.model = model;
    Eigen::VectorXd inv(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) > tol) {
            inv(i) = 1.0 / ev(i);
        } else {
            inv(i) = 0.0;
            rep.singular = true;
        }
    }
    rep.covariance = scale.asDiagonal() * (es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose())
        * scale.asDiagonal();
    const Eigen::MatrixXd GhG = (G.adjoint() * G).real();
    rep.nmse_bound = (rep.covariance * GhG).trace() / h_energy;
    return rep;
}

namespace {

cplx snr_gain(cplx gain, double snr_db)
{
    const double mag = std::sqrt(std::pow(10.0, snr_db / 10.0));
    const double a = std::abs(gain);
    return a > 0.0 ? gain * (mag / a) : cplx(mag, 0.0);
}

} // namespace

CrlbReport crlb_awc(const AwcParams& p, const Combiner& W, double snr_db)
{
    AwcParams q = p;
    q.gain = snr_gain(p.gain, snr_db);
    return crlb_from_jacobian(awc_channel_jacobian(q, W.ny, W.nz), W, std::norm(q.gain), CrlbModel::awc);
}

CrlbReport crlb_swc(const SwcParams& p, const ArrayFrame& array, const Combiner& W, double snr_db)
{
    SwcParams q = p;
    q.gain = snr_gain(p.gain, snr_db);
    return crlb_from_jacobian(swc_channel_jacobian(q, array), W, std::norm(q.gain), CrlbModel::swc);
}

} // namespace wavecurve

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

#include "wavecurve/estimator.hpp"
#include "wavecurve/fft.hpp"
#include "wavecurve/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

namespace wavecurve {

using std::numbers::pi;

namespace {

int wrap_index(int i, int n)
{
    const int r = i % n;
    return r < 0 ? r + n : r;
}

/// Bin index in [-L/2, L/2).
int signed_bin(int i, int L)
{
    return i < (L + 1) / 2 ? i : i - L;
}

Eigen::MatrixXd circular_box_mean(const Eigen::MatrixXd& s, int k)
{
    const int rows = static_cast<int>(s.rows());
    const int cols = static_cast<int>(s.cols());
    const int h = k / 2;
    // Separable running sums along each axis.
    Eigen::MatrixXd a(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) {
            double acc = 0.0;
            for (int d = -h; d <= h; ++d)
                acc += s(wrap_index(r + d, rows), c);
            a(r, c) = acc;
        }
    Eigen::MatrixXd b(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) {
            double acc = 0.0;
            for (int d = -h; d <= h; ++d)
                acc += a(r, wrap_index(c + d, cols));
            b(r, c) = acc;
        }
    return b / static_cast<double>(k * k);
}

/// Sub-bin peak offset from a 3x3 neighbourhood of log power.
Vec2 refine_peak(const Eigen::MatrixXd& P, int i, int j)
{
    const int rows = static_cast<int>(P.rows());
    const int cols = static_cast<int>(P.cols());
    const double tiny = std::numeric_limits<double>::min();
    double z[3][3];
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b)
            z[a + 1][b + 1] = std::log(P(wrap_index(i + a, rows), wrap_index(j + b, cols)) + tiny);

    Eigen::Matrix<double, 9, 6> D;
    Eigen::Matrix<double, 9, 1> rhs;
    int row = 0;
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b) {
            D.row(row) << 1.0, a, b, a * a, a * b, b * b;
            rhs(row) = z[a + 1][b + 1];
            ++row;
        }
    const Eigen::Matrix<double, 6, 1> c = D.colPivHouseholderQr().solve(rhs);
    Eigen::Matrix2d H;
    H << 2.0 * c(3), c(4), c(4), 2.0 * c(5);
    if (H(0, 0) < 0.0 && H.determinant() > 0.0) {
        const Vec2 d = -H.inverse() * Vec2(c(1), c(2));
        if (d.allFinite() && d.cwiseAbs().maxCoeff() <= 1.0)
            return d;
    }

    auto parabola = [](double zm, double z0, double zp) {
        const double den = zm - 2.0 * z0 + zp;
        if (!(den < 0.0))
            return 0.0;
        const double d = 0.5 * (zm - zp) / den;
        return std::clamp(d, -1.0, 1.0);
    };
    return Vec2(parabola(z[0][1], z[1][1], z[2][1]), parabola(z[1][0], z[1][1], z[1][2]));
}

void argmax_index(const Eigen::MatrixXd& P, int& i, int& j)
{
    Eigen::Index r = 0, c = 0;
    P.maxCoeff(&r, &c);
    i = static_cast<int>(r);
    j = static_cast<int>(c);
}

} // namespace

std::pair<int, int> EstimatorConfig::shifts(int ny, int nz) const
{
    const int dy = delta_y > 0 ? delta_y : ny / 4;
    const int dz = delta_z > 0 ? delta_z : nz / 4;
    if (dy < 1 || dy >= ny || dz < 1 || dz >= nz)
        throw std::invalid_argument("EstimatorConfig: shifts must satisfy 1 <= delta < N");
    return {dy, dz};
}

Rect max_sum_rectangle(const Eigen::MatrixXd& m)
{
    const int rows = static_cast<int>(m.rows());
    const int cols = static_cast<int>(m.cols());
    if (rows == 0 || cols == 0)
        throw std::invalid_argument("max_sum_rectangle: empty matrix");

    Rect best;
    best.sum = -std::numeric_limits<double>::infinity();
    std::vector<double> acc(cols);
    for (int r1 = 0; r1 < rows; ++r1) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (int r2 = r1; r2 < rows; ++r2) {
            for (int c = 0; c < cols; ++c)
                acc[c] += m(r2, c);
            // 1D Kadane over the collapsed rows.
            double cur = 0.0;
            int start = 0;
            for (int c = 0; c < cols; ++c) {
                if (c == 0 || cur <= 0.0) {
                    cur = acc[c];
                    start = c;
                } else {
                    cur += acc[c];
                }
                if (cur > best.sum) {
                    best = {r1, r2, start, c, cur};
                }
            }
        }
    }
    return best;
}

RecoveredChannel recover_channel(const Eigen::VectorXcd& y, const Combiner& W, const EstimatorConfig& cfg)
{
    if (y.size() != W.m())
        throw std::invalid_argument("recover_channel: observation length mismatch");
    if (cfg.smooth_kernel < 1 || cfg.smooth_kernel % 2 == 0)
        throw std::invalid_argument("recover_channel: smoothing window must be odd");
    const int ny = W.ny;
    const int nz = W.nz;

    const Eigen::MatrixXcd X = unvec(W.adjoint(y), ny, nz);
    Eigen::MatrixXcd F = fft::forward(X);
    const Eigen::MatrixXd S = F.cwiseAbs2();
    const Eigen::MatrixXd Ss = circular_box_mean(S, cfg.smooth_kernel);

    const double mean = Ss.mean();
    const double var = (Ss.array() - mean).square().mean();
    const double thr = mean + cfg.kadane_sigma_mult * std::sqrt(var);

    int py = 0, pz = 0;
    argmax_index(Ss, py, pz);
    RecoveredChannel out;
    out.box.shift_y = wrap_index(ny / 2 - py, ny);
    out.box.shift_z = wrap_index(nz / 2 - pz, nz);

    Eigen::MatrixXd shifted(ny, nz);
    for (int j = 0; j < nz; ++j)
        for (int i = 0; i < ny; ++i)
            shifted(wrap_index(i + out.box.shift_y, ny), wrap_index(j + out.box.shift_z, nz)) = Ss(i, j) - thr;

    Rect r = max_sum_rectangle(shifted);
    Eigen::MatrixXcd masked = Eigen::MatrixXcd::Zero(ny, nz);
    if (!(r.sum > 0.0)) {
        // Nothing survives the threshold: keep the strongest raw bin.
        out.box.fallback = true;
        int i = 0, j = 0;
        argmax_index(S, i, j);
        masked(i, j) = F(i, j);
        r = {wrap_index(i + out.box.shift_y, ny), wrap_index(i + out.box.shift_y, ny),
             wrap_index(j + out.box.shift_z, nz), wrap_index(j + out.box.shift_z, nz), S(i, j)};
        out.box.bins = 1;
    } else {
        for (int b = r.col1; b <= r.col2; ++b)
            for (int a = r.row1; a <= r.row2; ++a) {
                const int i = wrap_index(a - out.box.shift_y, ny);
                const int j = wrap_index(b - out.box.shift_z, nz);
                masked(i, j) = F(i, j);
            }
        out.box.bins = (r.row2 - r.row1 + 1) * (r.col2 - r.col1 + 1);
    }
    out.box.box = r;
    out.H = fft::inverse(masked);
    return out;
}

PhaseDiffPair phase_difference(const Eigen::MatrixXcd& H, int dy, int dz)
{
    const int ny = static_cast<int>(H.rows());
    const int nz = static_cast<int>(H.cols());
    if (dy < 1 || dy >= ny || dz < 1 || dz >= nz)
        throw std::invalid_argument("phase_difference: shifts out of range");
    const int ry = ny - dy;
    const int rz = nz - dz;
    PhaseDiffPair p;
    p.psi1 = H.block(0, 0, ry, rz).conjugate().cwiseProduct(H.block(dy, dz, ry, rz));
    p.psi2 = H.block(0, dz, ry, rz).conjugate().cwiseProduct(H.block(dy, 0, ry, rz));
    return p;
}

PeakSearch joint_peak_search(const PhaseDiffPair& pair, int dy, int dz, const EstimatorConfig& cfg)
{
    const int ry = static_cast<int>(pair.psi1.rows());
    const int rz = static_cast<int>(pair.psi1.cols());
    if (ry == 0 || rz == 0 || pair.psi2.rows() != ry || pair.psi2.cols() != rz)
        throw std::invalid_argument("joint_peak_search: inconsistent phase-difference matrices");
    const int Ly = cfg.fft_zeropad * ry;
    const int Lz = cfg.fft_zeropad * rz;
    const Eigen::MatrixXd P1 = fft::padded_power(pair.psi1, Ly, Lz);
    const Eigen::MatrixXd P2 = fft::padded_power(pair.psi2, Ly, Lz);

    // Intercepts are exact integers: V = key / (Ly Lz).
    struct Best {
        double power = -1.0;
        int i = 0;
        int j = 0;
    };
    std::unordered_map<int64_t, Best> line1, line2;
    line1.reserve(static_cast<size_t>(Ly + Lz) * 4);
    line2.reserve(static_cast<size_t>(Ly + Lz) * 4);
    for (int j = 0; j < Lz; ++j) {
        const int64_t sj = signed_bin(j, Lz);
        for (int i = 0; i < Ly; ++i) {
            const int64_t si = signed_bin(i, Ly);
            const int64_t a = dy * si * Lz;
            const int64_t b = dz * sj * Ly;
            Best& b1 = line1[a - b];
            if (P1(i, j) > b1.power)
                b1 = {P1(i, j), i, j};
            Best& b2 = line2[a + b];
            if (P2(i, j) > b2.power)
                b2 = {P2(i, j), i, j};
        }
    }

    int64_t best_key = 0;
    double best_score = -1.0;
    bool found = false;
    for (const auto& [key, b1] : line1) {
        auto it = line2.find(key);
        if (it == line2.end())
            continue;
        const double score = std::min(b1.power, it->second.power);
        if (!found || score > best_score
            || (score == best_score && (std::llabs(key) < std::llabs(best_key)
                                        || (std::llabs(key) == std::llabs(best_key) && key < best_key)))) {
            best_score = score;
            best_key = key;
            found = true;
        }
    }

    PeakSearch out;
    if (!found)
        return out;
    const Best& b1 = line1[best_key];
    const Best& b2 = line2[best_key];
    const Vec2 d1 = refine_peak(P1, b1.i, b1.j);
    const Vec2 d2 = refine_peak(P2, b2.i, b2.j);
    out.f1 = Vec2((signed_bin(b1.i, Ly) + d1(0)) / Ly, (signed_bin(b1.j, Lz) + d1(1)) / Lz);
    out.f2 = Vec2((signed_bin(b2.i, Ly) + d2(0)) / Ly, (signed_bin(b2.j, Lz) + d2(1)) / Lz);
    out.v_star = static_cast<double>(best_key) / (static_cast<double>(Ly) * Lz);
    return out;
}

std::pair<Vec2, Vec2> curvature_frequencies(const Eigen::Matrix2d& Q, int dy, int dz)
{
    const Vec2 f1 = -Q * Vec2(dy, dz);
    const Vec2 f2 = -Q * Vec2(dy, -dz);
    return {f1, f2};
}

Eigen::Matrix2d solve_curvature(double f1y, double f1z, double f2y, double f2z, int dy, int dz)
{
    if (dy <= 0 || dz <= 0)
        throw std::invalid_argument("solve_curvature: shifts must be positive");
    const double q11 = (-f1y - f2y) / (2.0 * dy);
    const double q22 = (-f1z + f2z) / (2.0 * dz);
    const double q12 = 0.5 * ((-f1y + f2y) / (2.0 * dz) + (-f1z - f2z) / (2.0 * dy));
    Eigen::Matrix2d Q;
    Q << q11, q12, q12, q22;
    return Q;
}

Vec2 estimate_direction(const Eigen::MatrixXcd& H, const Eigen::Matrix2d& Qbar, const EstimatorConfig& cfg)
{
    const int ny = static_cast<int>(H.rows());
    const int nz = static_cast<int>(H.cols());
    const double q12 = 0.5 * (Qbar(0, 1) + Qbar(1, 0));
    Eigen::MatrixXcd G(ny, nz);
    for (int iz = 0; iz < nz; ++iz) {
        const double mz = iz - 0.5 * (nz - 1);
        for (int iy = 0; iy < ny; ++iy) {
            const double my = iy - 0.5 * (ny - 1);
            const double quad = Qbar(0, 0) * my * my + 2.0 * q12 * my * mz + Qbar(1, 1) * mz * mz;
            G(iy, iz) = H(iy, iz) * std::polar(1.0, pi * quad);
        }
    }
    const int Ly = cfg.fft_zeropad * ny;
    const int Lz = cfg.fft_zeropad * nz;
    const Eigen::MatrixXd P = fft::padded_power(G, Ly, Lz);
    int i = 0, j = 0;
    argmax_index(P, i, j);
    const Vec2 d = refine_peak(P, i, j);
    const Vec2 f((signed_bin(i, Ly) + d(0)) / Ly, (signed_bin(j, Lz) + d(1)) / Lz);
    return wrap_frequency(Vec2(-f));
}

LmRefineResult lm_refine(const Eigen::VectorXcd& y, const Combiner& W, const AwcParams& init,
                         const EstimatorConfig& cfg)
{
    if (!init.kbar.allFinite() || !init.Qbar.allFinite())
        throw std::invalid_argument("lm_refine: non-finite initial parameters");
    const SeparableModel model = make_awc_model(&W, W.ny, W.nz);
    LmRefineResult out;
    out.lm = levenberg_marquardt(model, y, awc_theta(init), cfg.lm);
    out.params = awc_from_theta(out.lm.theta, out.lm.gains(0));
    out.params.kbar = wrap_frequency(out.params.kbar);
    return out;
}

EstimateResult estimate(const Eigen::VectorXcd& y, const Combiner& W, const EstimatorConfig& cfg)
{
    const auto [dy, dz] = cfg.shifts(W.ny, W.nz);
    EstimateResult res;
    if (y.size() != W.m())
        throw std::invalid_argument("estimate: observation length mismatch");
    if (!(y.squaredNorm() > 0.0)) {
        res.params.gain = 0.0;
        res.h_hat = ChannelVector::Zero(W.n());
        res.stages.notes.push_back("zero observation");
        return res;
    }

    const RecoveredChannel rc = recover_channel(y, W, cfg);
    res.stages.subspace_box = rc.box;
    if (rc.box.fallback)
        res.stages.notes.push_back("empty spectral box; single-bin fallback");

    const PhaseDiffPair pair = phase_difference(rc.H, dy, dz);
    const PeakSearch ps = joint_peak_search(pair, dy, dz, cfg);
    res.stages.raw_freqs = ps;
    res.stages.v_star = ps.v_star;
    const Eigen::Matrix2d Q = solve_curvature(ps.f1(0), ps.f1(1), ps.f2(0), ps.f2(1), dy, dz);
    const Vec2 k = estimate_direction(rc.H, Q, cfg);
    res.stages.coarse_kbar = k;
    res.stages.coarse_Qbar = Q;

    AwcParams init;
    init.kbar = k;
    init.Qbar = Q;
    const LmRefineResult lr = lm_refine(y, W, init, cfg);
    if (!lr.lm.finite)
        res.stages.notes.push_back(lr.lm.diagnostic);
    res.params = lr.params;
    res.stages.lm_iterations = lr.lm.iterations;
    res.stages.final_residual = lr.lm.cost;
    res.h_hat = res.params.gain * awc_steering(res.params, W.ny, W.nz);
    return res;
}

} // namespace wavecurve

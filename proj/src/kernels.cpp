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

#include "wavecurve/kernels.hpp"

#include <omp.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wavecurve::kernels {

using std::numbers::pi;

namespace {

double inv_norm(const ChannelVector& h)
{
    const double n = h.norm();
    if (!(n > 0.0))
        throw std::invalid_argument("similarity: zero channel");
    return 1.0 / n;
}

/// c^H h via second-order phase recurrences along iy; c has unit norm.
double projection_magnitude(const ChannelVector& h, const ArrayProjection& a, int ny, int nz)
{
    const double q11 = a.Qbar(0, 0);
    const double q12 = 0.5 * (a.Qbar(0, 1) + a.Qbar(1, 0));
    const double q22 = a.Qbar(1, 1);
    const double my0 = -0.5 * (ny - 1);
    // c_n = exp(-j 2pi phi(n)) / sqrt(N); accumulate conj(c_n) h_n = exp(+j 2pi phi) h_n.
    const cplx step2 = std::polar(1.0, 2.0 * pi * q11);
    cplx acc(0.0, 0.0);
    for (int iz = 0; iz < nz; ++iz) {
        const double mz = iz - 0.5 * (nz - 1);
        const double phi0 = a.kbar(0) * my0 + a.kbar(1) * mz
            + 0.5 * (q11 * my0 * my0 + 2.0 * q12 * my0 * mz + q22 * mz * mz);
        // phi(my + 1) - phi(my) = k1 + q12 mz + q11 (my + 1/2)
        const double d0 = a.kbar(0) + q12 * mz + q11 * (my0 + 0.5);
        cplx z = std::polar(1.0, 2.0 * pi * phi0);
        cplx w = std::polar(1.0, 2.0 * pi * d0);
        const cplx* col = h.data() + static_cast<Eigen::Index>(ny) * iz;
        cplx part(0.0, 0.0);
        for (int iy = 0; iy < ny; ++iy) {
            part += z * col[iy];
            z *= w;
            w *= step2;
        }
        acc += part;
    }
    return std::abs(acc) / std::sqrt(static_cast<double>(ny) * nz);
}

} // namespace

int max_threads()
{
    return omp_get_max_threads();
}

std::vector<double> similarity_serial(const ChannelVector& h, const std::vector<ArrayProjection>& atoms,
                                      int ny, int nz)
{
    const double s = inv_norm(h);
    std::vector<double> out(atoms.size());
    for (size_t i = 0; i < atoms.size(); ++i) {
        const ChannelVector c = awc_steering(atoms[i].kbar, atoms[i].Qbar, ny, nz);
        out[i] = std::abs(c.dot(h)) * s;
    }
    return out;
}

std::vector<double> similarity_parallel(const ChannelVector& h, const std::vector<ArrayProjection>& atoms,
                                        int ny, int nz)
{
    if (h.size() != static_cast<Eigen::Index>(ny) * nz)
        throw std::invalid_argument("similarity: length mismatch");
    const double s = inv_norm(h);
    std::vector<double> out(atoms.size());
    const long long n = static_cast<long long>(atoms.size());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i)
        out[i] = projection_magnitude(h, atoms[i], ny, nz) * s;
    return out;
}

MatrixXcf sense_atoms_serial(const Combiner& W, const std::vector<ArrayProjection>& atoms)
{
    MatrixXcf B(W.m(), static_cast<Eigen::Index>(atoms.size()));
    for (size_t i = 0; i < atoms.size(); ++i)
        B.col(i) = W.apply(awc_steering(atoms[i].kbar, atoms[i].Qbar, W.ny, W.nz)).cast<std::complex<float>>();
    return B;
}

MatrixXcf sense_atoms_parallel(const Combiner& W, const std::vector<ArrayProjection>& atoms)
{
    MatrixXcf B(W.m(), static_cast<Eigen::Index>(atoms.size()));
    const long long n = static_cast<long long>(atoms.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (long long i = 0; i < n; ++i)
        B.col(i) = W.apply(awc_steering(atoms[i].kbar, atoms[i].Qbar, W.ny, W.nz)).cast<std::complex<float>>();
    return B;
}

std::vector<double> correlate_serial(const MatrixXcf& B, const Eigen::VectorXcd& r)
{
    if (B.rows() != r.size())
        throw std::invalid_argument("correlate: length mismatch");
    std::vector<double> out(B.cols());
    for (Eigen::Index j = 0; j < B.cols(); ++j) {
        cplx acc(0.0, 0.0);
        for (Eigen::Index i = 0; i < B.rows(); ++i)
            acc += std::conj(cplx(B(i, j))) * r(i);
        out[j] = std::abs(acc);
    }
    return out;
}

std::vector<double> correlate_parallel(const MatrixXcf& B, const Eigen::VectorXcd& r)
{
    if (B.rows() != r.size())
        throw std::invalid_argument("correlate: length mismatch");
    const Eigen::VectorXcf rf = r.cast<std::complex<float>>();
    std::vector<double> out(B.cols());
    const long long n = B.cols();
    const Eigen::Index m = B.rows();
#pragma omp parallel for schedule(static)
    for (long long j = 0; j < n; ++j) {
        // Single-precision products, double accumulation per block of 64.
        cplx acc(0.0, 0.0);
        const std::complex<float>* col = B.data() + j * m;
        for (Eigen::Index i0 = 0; i0 < m; i0 += 64) {
            std::complex<float> part(0.0f, 0.0f);
            const Eigen::Index i1 = std::min<Eigen::Index>(m, i0 + 64);
            for (Eigen::Index i = i0; i < i1; ++i)
                part += std::conj(col[i]) * rf(i);
            acc += cplx(part);
        }
        out[j] = std::abs(acc);
    }
    return out;
}

} // namespace wavecurve::kernels

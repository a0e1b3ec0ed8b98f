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

#include "wavecurve/sounding.hpp"
#include "wavecurve/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

namespace wavecurve {

Eigen::VectorXcd Combiner::apply(const Eigen::VectorXcd& x) const
{
    if (x.size() != n())
        throw std::invalid_argument("Combiner::apply: length mismatch");
    Eigen::VectorXcd dx = diag.cwiseProduct(x);
    Eigen::VectorXcd f(n());
    fft::transform(dx.data(), f.data(), ny, nz, fft::Direction::forward);
    const double s = 1.0 / std::sqrt(static_cast<double>(n()));
    Eigen::VectorXcd y(m());
    for (int i = 0; i < m(); ++i)
        y(i) = s * f(selected_rows[i]);
    return y;
}

Eigen::VectorXcd Combiner::adjoint(const Eigen::VectorXcd& y) const
{
    if (y.size() != m())
        throw std::invalid_argument("Combiner::adjoint: length mismatch");
    Eigen::VectorXcd f = Eigen::VectorXcd::Zero(n());
    for (int i = 0; i < m(); ++i)
        f(selected_rows[i]) = y(i);
    Eigen::VectorXcd x(n());
    fft::transform(f.data(), x.data(), ny, nz, fft::Direction::backward);
    const double s = 1.0 / std::sqrt(static_cast<double>(n()));
    return s * diag.conjugate().cwiseProduct(x);
}

Eigen::MatrixXcd Combiner::apply_columns(const Eigen::MatrixXcd& X) const
{
    Eigen::MatrixXcd Y(m(), X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        Y.col(j) = apply(X.col(j));
    return Y;
}

Eigen::MatrixXcd Combiner::dense() const
{
    // Row i of F2 D: (1/sqrt N) exp(-j 2pi (ky iy / ny + kz iz / nz)) d(iy, iz).
    Eigen::MatrixXcd W(m(), n());
    const double s = 1.0 / std::sqrt(static_cast<double>(n()));
    for (int i = 0; i < m(); ++i) {
        const int ky = selected_rows[i] % ny;
        const int kz = selected_rows[i] / ny;
        for (int iz = 0; iz < nz; ++iz) {
            for (int iy = 0; iy < ny; ++iy) {
                const double ph = -2.0 * std::numbers::pi
                    * (static_cast<double>(ky * iy % ny) / ny + static_cast<double>(kz * iz % nz) / nz);
                const int k = iy + ny * iz;
                W(i, k) = s * std::polar(1.0, ph) * diag(k);
            }
        }
    }
    return W;
}

Eigen::MatrixXcd Combiner::block(int p) const
{
    if (p < 0 || p >= pilots)
        throw std::out_of_range("Combiner::block: pilot index");
    return dense().middleRows(static_cast<Eigen::Index>(p) * n_rf, n_rf);
}

Combiner make_srft_combiner(int ny, int nz, int n_rf, int p, uint64_t seed)
{
    if (ny < 1 || nz < 1 || n_rf < 1 || p < 1)
        throw std::invalid_argument("make_srft_combiner: sizes must be positive");
    const long long N = static_cast<long long>(ny) * nz;
    if (static_cast<long long>(n_rf) * p > N)
        throw std::invalid_argument("make_srft_combiner: n_rf * p exceeds the number of antennas");

    Combiner c;
    c.ny = ny;
    c.nz = nz;
    c.n_rf = n_rf;
    c.pilots = p;
    c.seed = seed;

    std::mt19937_64 rng(derive_seed(seed, 0, 1));
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    c.diag.resize(N);
    for (long long k = 0; k < N; ++k)
        c.diag(k) = std::polar(1.0, phase(rng));

    std::vector<int> perm(N);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    perm.resize(static_cast<size_t>(n_rf) * p);
    c.selected_rows = std::move(perm);
    return c;
}

Observation observe(const ChannelVector& h, const Combiner& c, double snr_db, uint64_t noise_seed)
{
    if (h.size() != c.n())
        throw std::invalid_argument("observe: channel length does not match combiner");
    Observation o;
    o.snr_db = snr_db;
    o.noise_seed = noise_seed;
    if (std::isinf(snr_db) && snr_db > 0.0) {
        o.y = c.apply(h);
        return o;
    }
    const double hn = h.norm();
    o.scale = hn > 0.0 ? std::sqrt(std::pow(10.0, snr_db / 10.0)) / hn : 0.0;
    o.y = c.apply(o.scale * h);

    std::mt19937_64 rng(noise_seed);
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    for (Eigen::Index i = 0; i < o.y.size(); ++i) {
        const double re = g(rng);
        const double im = g(rng);
        o.y(i) += cplx(re, im);
    }
    return o;
}

} // namespace wavecurve

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

#ifndef WAVECURVE_SOUNDING_HPP
#define WAVECURVE_SOUNDING_HPP

#include "wavecurve/channel.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace wavecurve {

/// splitmix64 finaliser; used to derive independent stream seeds.
constexpr uint64_t splitmix64(uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for (master, trial, stream), stable across platforms.
constexpr uint64_t derive_seed(uint64_t master, uint64_t trial, uint64_t stream)
{
    return splitmix64(splitmix64(splitmix64(master) ^ trial) ^ (stream * 0xD1B54A32D192ED03ULL));
}

/// Subsampled randomized Fourier transform W = R F2 D.
///
/// Rows are grouped in pilot blocks of n_rf consecutive rows; block p is W_p.
/// W is never formed unless dense() is called.
class Combiner {
public:
    int ny = 0;
    int nz = 0;
    int n_rf = 0;
    int pilots = 0;
    uint64_t seed = 0;
    std::vector<int> selected_rows; ///< 2D DFT bins, linear index ky + ny * kz
    Eigen::VectorXcd diag;          ///< unit-modulus entries of D

    int n() const { return ny * nz; }
    int m() const { return static_cast<int>(selected_rows.size()); }

    Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
    Eigen::VectorXcd adjoint(const Eigen::VectorXcd& y) const;
    /// Applies W to every column of X.
    Eigen::MatrixXcd apply_columns(const Eigen::MatrixXcd& X) const;

    Eigen::MatrixXcd dense() const;
    /// Dense W_p (n_rf x N) for pilot p.
    Eigen::MatrixXcd block(int p) const;
};

/// Throws std::invalid_argument when n_rf * p > ny * nz or any size is non-positive.
Combiner make_srft_combiner(int ny, int nz, int n_rf, int p, uint64_t seed);

struct Observation {
    Eigen::VectorXcd y;
    double snr_db = std::numeric_limits<double>::infinity();
    uint64_t noise_seed = 0;
    /// Real scale applied to h before combining; the estimation target is scale * h.
    double scale = 1.0;
};

/// y = W (scale h) + n with n ~ CN(0, I_M) and scale = sqrt(SNR) / ||h||.
/// snr_db = +inf disables noise and keeps scale = 1.
Observation observe(const ChannelVector& h, const Combiner& c, double snr_db, uint64_t noise_seed);

} // namespace wavecurve

#endif

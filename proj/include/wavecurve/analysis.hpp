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

#ifndef WAVECURVE_ANALYSIS_HPP
#define WAVECURVE_ANALYSIS_HPP

#include "wavecurve/lm.hpp"
#include "wavecurve/models.hpp"

#include <optional>
#include <string>
#include <vector>

namespace wavecurve {

/// ||h_hat - h||^2 / ||h||^2. Throws std::invalid_argument for a zero reference.
double nmse(const ChannelVector& h_hat, const ChannelVector& h);

/// |u^H v| / (||u|| ||v||). Throws std::invalid_argument for a zero vector.
double cosine_similarity(const ChannelVector& u, const ChannelVector& v);

struct SwcSearchConfig {
    double r_min = 0.5;
    double r_max = 200.0;
    int rings = 80;             ///< uniform in 1/r
    double cone_deg = 60.0;     ///< half-angle around the search axis
    int starts = 5;             ///< LM starts from the best separated grid points
    int fft_zeropad = 2;
    std::optional<Vec3> axis;   ///< unit direction from the array centre; default: spectral peak of h
    LmOptions lm;
};

struct SwcFit {
    double nmse = 1.0;
    SwcParams params;
    Vec3 source = Vec3::Zero(); ///< meaningful when params.rho > 0
    int lm_iterations = 0;
};

/// Best single second-order spherical wave for h (closed-form gain).
SwcFit best_swc_fit(const ChannelVector& h, const ArrayFrame& array, const SwcSearchConfig& cfg = {});

/// Search axis toward the mirrored source: direction of the scatterer seen from the array.
Vec3 axis_toward(const Vec3& point, const ArrayFrame& array);

/// Grid in array-local coordinates: x along the broadside normal, y and z
/// along axis_y and axis_z, all relative to the array centre.
struct VolumeGrid {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> z;

    static std::vector<double> range(double lo, double hi, double step);
    size_t size() const { return x.size() * y.size() * z.size(); }
};

struct SimilarityVolume {
    VolumeGrid grid;
    std::vector<double> values; ///< x fastest, then y, then z
    double peak = 0.0;
    Vec3 peak_location = Vec3::Zero();

    double at(size_t ix, size_t iy, size_t iz) const
    {
        return values[(iz * grid.y.size() + iy) * grid.x.size() + ix];
    }
    /// Fraction of grid points at or above frac * peak.
    double level_fraction(double frac) const;
};

Vec3 local_to_global(const Vec3& local, const ArrayFrame& array);

/// Cosine similarity of h with second-order spherical steering vectors at every grid point.
SimilarityVolume similarity_volume(const ChannelVector& h, const ArrayFrame& array, const VolumeGrid& grid,
                                   bool parallel = true);

enum class CrlbModel { awc, swc };
std::string to_string(CrlbModel m);

struct CrlbReport {
    CrlbModel model = CrlbModel::awc;
    Eigen::MatrixXd covariance; ///< inverse Fisher information, (Re a, Im a, shape...)
    double nmse_bound = 0.0;
    bool singular = false;
};

/// Real-parameter Jacobian of h = a c(theta) in the order (Re a, Im a, theta).
Eigen::MatrixXcd awc_channel_jacobian(const AwcParams& p, int ny, int nz);
Eigen::MatrixXcd swc_channel_jacobian(const SwcParams& p, const ArrayFrame& array);

/// Bound for an unbiased estimator of h from y = W h + CN(0, I), with |a|^2 = SNR.
CrlbReport crlb_awc(const AwcParams& p, const Combiner& W, double snr_db);
CrlbReport crlb_swc(const SwcParams& p, const ArrayFrame& array, const Combiner& W, double snr_db);

/// Generic form: G = dh/dtheta for the scaled channel h.
CrlbReport crlb_from_jacobian(const Eigen::MatrixXcd& G, const Combiner& W, double h_energy, CrlbModel model);

} // namespace wavecurve

#endif

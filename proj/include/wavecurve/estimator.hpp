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

#ifndef WAVECURVE_ESTIMATOR_HPP
#define WAVECURVE_ESTIMATOR_HPP

#include "wavecurve/channel.hpp"
#include "wavecurve/lm.hpp"
#include "wavecurve/sounding.hpp"

#include <string>
#include <vector>

namespace wavecurve {

struct EstimatorConfig {
    int smooth_kernel = 5;
    double kadane_sigma_mult = 3.0;
    int delta_y = 0; ///< 0 selects floor(ny / 4)
    int delta_z = 0; ///< 0 selects floor(nz / 4)
    int fft_zeropad = 4;
    LmOptions lm;

    /// Resolved shifts for an ny x nz array; throws std::invalid_argument when out of range.
    std::pair<int, int> shifts(int ny, int nz) const;
};

/// Inclusive, zero-based rectangle; rows index the first (y) axis.
struct Rect {
    int row1 = 0;
    int row2 = 0;
    int col1 = 0;
    int col2 = 0;
    double sum = 0.0;
};

/// Maximum-sum axis-aligned sub-rectangle, O(rows^2 cols).
Rect max_sum_rectangle(const Eigen::MatrixXd& m);

struct SubspaceBox {
    Rect box;           ///< in the circularly shifted frame
    int shift_y = 0;    ///< circular shift that moved the spectral peak to the centre
    int shift_z = 0;
    int bins = 0;       ///< number of retained DFT bins
    bool fallback = false;
};

struct RecoveredChannel {
    Eigen::MatrixXcd H; ///< ny x nz coarse channel estimate
    SubspaceBox box;
};

/// Spectral-box denoising of W^H y.
RecoveredChannel recover_channel(const Eigen::VectorXcd& y, const Combiner& W, const EstimatorConfig& cfg);

struct PhaseDiffPair {
    Eigen::MatrixXcd psi1;
    Eigen::MatrixXcd psi2;
    cplx phi1{0.0, 0.0}; ///< mean of psi1 after removing its frequency (diagnostic)
    cplx phi2{0.0, 0.0};
};

PhaseDiffPair phase_difference(const Eigen::MatrixXcd& H, int dy, int dz);

struct PeakSearch {
    Vec2 f1 = Vec2::Zero();
    Vec2 f2 = Vec2::Zero();
    double v_star = 0.0;
};

/// Joint line search over the intercept V with quadratic peak refinement.
PeakSearch joint_peak_search(const PhaseDiffPair& pair, int dy, int dz, const EstimatorConfig& cfg);

/// Forward map Qbar -> (f1, f2) for shifts (dy, dz); inverse of solve_curvature.
std::pair<Vec2, Vec2> curvature_frequencies(const Eigen::Matrix2d& Qbar, int dy, int dz);

Eigen::Matrix2d solve_curvature(double f1y, double f1z, double f2y, double f2z, int dy, int dz);

Vec2 estimate_direction(const Eigen::MatrixXcd& H, const Eigen::Matrix2d& Qbar, const EstimatorConfig& cfg);

struct LmRefineResult {
    AwcParams params;
    LmResult lm;
};

LmRefineResult lm_refine(const Eigen::VectorXcd& y, const Combiner& W, const AwcParams& init,
                         const EstimatorConfig& cfg);

struct EstimateStages {
    SubspaceBox subspace_box;
    PeakSearch raw_freqs;
    double v_star = 0.0;
    Vec2 coarse_kbar = Vec2::Zero();
    Eigen::Matrix2d coarse_Qbar = Eigen::Matrix2d::Zero();
    int lm_iterations = 0;
    double final_residual = 0.0;
    std::vector<std::string> notes;
};

struct EstimateResult {
    AwcParams params;
    ChannelVector h_hat;
    EstimateStages stages;
};

EstimateResult estimate(const Eigen::VectorXcd& y, const Combiner& W, const EstimatorConfig& cfg = {});

} // namespace wavecurve

#endif

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

#ifndef WAVECURVE_BASELINE_HPP
#define WAVECURVE_BASELINE_HPP

#include "wavecurve/kernels.hpp"
#include "wavecurve/lm.hpp"
#include "wavecurve/models.hpp"

#include <vector>

namespace wavecurve {

struct PolarGridPoint {
    double u = 0.0;   ///< direction cosine along axis_y
    double v = 0.0;   ///< direction cosine along axis_z
    double rho = 0.0; ///< reciprocal distance, 0 = far field
};

/// Polar-domain codebook of second-order spherical steering vectors.
/// Atoms are generated on demand; only the grid is stored.
struct PolarDictionary {
    ArrayFrame array;
    int count_y = 0;
    int count_z = 0;
    std::vector<double> rhos;
    std::vector<PolarGridPoint> grid;

    size_t size() const { return grid.size(); }
    ChannelVector atom(size_t i) const;
    std::vector<ArrayProjection> projections() const;
    /// Direction-cosine step of the angle lattice.
    double step_u() const { return 2.0 / count_y; }
    double step_v() const { return 2.0 / count_z; }
};

/// Angles on the lattice u = -1 + 2i / count_y (same for v) inside the unit
/// disk; reciprocal distances uniform in [1/r_max, 1/r_min] plus 1/r = 0.
PolarDictionary build_polar_dictionary(const ArrayFrame& array, int count_y, int count_z, int n_distance,
                                       double r_min, double r_max);

/// Defaults: count = ny, nz; 16 rings from 1.2 x aperture to 100 m.
PolarDictionary default_polar_dictionary(const ArrayFrame& array);

struct PathEstimate {
    SwcParams params;
    int atom = -1; ///< grid index the path started from
};

struct OmpConfig {
    double stop_ratio = 0.05;
    int max_paths = 16;
    /// Refine all selected paths jointly after every selection.
    bool interleaved_refine = true;
    LmOptions inner_lm{20, 1e-3, 10.0, 1e-6};
    LmOptions final_lm;
    bool parallel = true;
};

struct OmpResult {
    std::vector<PathEstimate> paths;
    std::vector<double> residual_energy; ///< ||r||^2 after 0, 1, 2, ... paths (including a discarded one)
    bool discarded_last = false;
    ChannelVector h_hat;
};

/// Greedy selection with the relative-reduction stopping rule. At least one
/// path is kept; a path whose reduction falls below stop_ratio times the
/// previous reduction is dropped again.
OmpResult omp(const Eigen::VectorXcd& y, const Combiner& W, const PolarDictionary& dict,
              const kernels::MatrixXcf& sensed, const OmpConfig& cfg = {});

/// Joint LM over (u, v, rho) of all paths with LS gains.
std::vector<PathEstimate> refine_swc(const Eigen::VectorXcd& y, const Combiner& W, const ArrayFrame& array,
                                     const std::vector<PathEstimate>& paths, const LmOptions& opt = {},
                                     LmResult* info = nullptr);

/// Sum of gain-weighted second-order spherical steering vectors.
ChannelVector synthesize_paths(const std::vector<PathEstimate>& paths, const ArrayFrame& array);

/// OMP followed by a final joint refinement.
OmpResult swc_omp_lm(const Eigen::VectorXcd& y, const Combiner& W, const PolarDictionary& dict,
                     const kernels::MatrixXcf& sensed, const OmpConfig& cfg = {});

} // namespace wavecurve

#endif

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

#ifndef WAVECURVE_EXPERIMENTS_HPP
#define WAVECURVE_EXPERIMENTS_HPP

#include "wavecurve/config.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace wavecurve {

struct RunOptions {
    std::string out_dir;          ///< empty: write nothing
    bool paper_scale = false;
    std::optional<int> trials;    ///< overrides the configured trial count
    std::ostream* log = nullptr;  ///< progress messages
};

// ---- Table I --------------------------------------------------------------

struct Table1Row {
    std::string sweep_var;
    std::string value;
    double nmse = 0.0;
    std::string status = "ok"; ///< "ok" or the geometry error text
};

/// Scenario for each sweep. r: scatterer at bs + r b (b fixed), UE moved with
/// it; d: UE at scatterer + d a (a fixed); scale: (N, f) pairs; q: Qs = diag(q, 0).
Scenario table1_scenario(const ExperimentConfig& cfg, const std::string& sweep, double value, int n = 0);

std::vector<Table1Row> run_table1(const ExperimentConfig& cfg, const RunOptions& opt);

// ---- Fig. 2 ---------------------------------------------------------------

struct Fig2Summary {
    double swc_peak = 0.0;
    Vec3 swc_peak_location = Vec3::Zero();
    double awc_peak = 0.0;
    Vec3 awc_peak_location = Vec3::Zero();
    /// 90 %-of-peak region of the AWC volume, in array-local x slabs.
    int region_points = 0;
    int region_near_first = 0;   ///< |x - radius_y| <= 0.1
    int region_near_second = 0;  ///< |x - radius_z| <= 0.1
    int region_at_middle = 0;    ///< on the grid plane nearest (radius_y + radius_z) / 2
    int region_plane_max = 0;    ///< largest count on any single x plane
    double region_x_min = 0.0, region_x_max = 0.0;
    /// Largest normalised similarity per x plane: maximum over each slab
    /// |x - radius| <= 0.5 and the value on the plane nearest the midpoint.
    double profile_max_first = 0.0, profile_max_second = 0.0, profile_at_middle = 0.0;
    double extent_y_first = 0.0, extent_z_first = 0.0;   ///< region extents within |x - radius_y| <= 0.5
    double extent_y_second = 0.0, extent_z_second = 0.0; ///< region extents within |x - radius_z| <= 0.5
    double step = 0.0;
};

struct Fig2Result {
    SimilarityVolume swc;
    SimilarityVolume awc;
    Fig2Summary summary;
};

/// Both Fig. 2 channels at broadside: AWC with radii (radius_y, radius_z) along
/// the array axes and SWC with radius_swc.
std::pair<ChannelVector, ChannelVector> fig2_channels(const Fig2Spec& spec, ArrayFrame& array);

Fig2Result run_fig2(const ExperimentConfig& cfg, const RunOptions& opt);

// ---- Fig. 3 ---------------------------------------------------------------

enum class ScenarioKind { awc, swc };
std::string to_string(ScenarioKind k);

struct TrialDraw {
    Scenario scenario;
    uint64_t scenario_seed = 0;
    int redraws = 0;
};

/// Random scenario of the requested kind; deterministic in (master, trial, kind).
TrialDraw draw_fig3_scenario(const ExperimentConfig& cfg, const ArrayFrame& array, ScenarioKind kind,
                             uint64_t master_seed, int trial);

struct TrialRecord {
    ScenarioKind kind = ScenarioKind::awc;
    int trial = 0;
    uint64_t scenario_seed = 0;
    Vec3 scatterer = Vec3::Zero();
    double rotation = 0.0;
    bool failed = false;
    std::string error;
    std::vector<uint64_t> noise_seeds;     ///< per SNR point
    std::vector<double> nmse_awc_estm;     ///< linear, per SNR point
    std::vector<double> nmse_swc_omp_lm;
    std::vector<int> omp_paths;
    std::vector<double> crlb_awc;
    std::vector<double> crlb_swc;          ///< SWC scenarios only
};

struct Fig3Curve {
    ScenarioKind kind = ScenarioKind::awc;
    std::string algorithm; ///< AWC-Estm, SWC-OMP-LM, CRLB(AWC), CRLB(SWC)
    std::vector<double> snr_db;
    std::vector<double> mean_nmse_db;
    int trials = 0;
};

struct Fig3Result {
    std::vector<TrialRecord> trials;
    std::vector<Fig3Curve> curves;
    int failed = 0;
    int n = 0;
    double carrier_hz = 0.0;

    const Fig3Curve* curve(ScenarioKind kind, const std::string& algorithm) const;
};

/// One full trial (all SNR points) against a shared combiner and dictionary.
TrialRecord run_fig3_trial(const ExperimentConfig& cfg, const Combiner& W, const PolarDictionary& dict,
                           const kernels::MatrixXcf& sensed, ScenarioKind kind, int trial);

Fig3Result run_fig3(const ExperimentConfig& cfg, const RunOptions& opt);

// ---- validate -------------------------------------------------------------

struct ValidationCheck {
    std::string name;
    double measured = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

std::vector<ValidationCheck> run_validate(const ExperimentConfig& cfg, const RunOptions& opt);

} // namespace wavecurve

#endif

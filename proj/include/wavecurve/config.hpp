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

#ifndef WAVECURVE_CONFIG_HPP
#define WAVECURVE_CONFIG_HPP

#include "wavecurve/analysis.hpp"
#include "wavecurve/baseline.hpp"
#include "wavecurve/estimator.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wavecurve {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Array description before the carrier is fixed; spacing 0 means half a wavelength.
struct ArraySpec {
    Vec3 center = Vec3(0.0, 0.0, 10.0);
    Vec3 axis_y = Vec3::UnitY();
    Vec3 axis_z = Vec3::UnitZ();
    int ny = 128;
    int nz = 128;
    double carrier_hz = 15e9;
    double spacing = 0.0;

    ArrayFrame frame() const;
};

/// Scatterer either given explicitly or placed on a vertical pillar at
/// distance d from the UE and r from the array centre.
struct ScattererSpec {
    bool explicit_patch = false;
    SurfacePatch patch;       ///< used when explicit_patch
    double d = 22.8;
    double r = 9.0;
    double k1 = 4.0;          ///< along the horizontal tangent
    double k2 = 0.0;          ///< along the vertical tangent
    Vec3 axis_hint = Vec3::UnitZ();
    double rotation = 0.0;
};

struct ScenarioSpec {
    Vec3 ue = Vec3(30.0, 0.0, 1.5);
    ArraySpec array;
    ScattererSpec scatterer;
    GainMode gain_mode = GainMode::unit;
    double phase0 = 0.0;

    Scenario build() const;
};

struct Table1Spec {
    std::vector<double> r_values{5.0, 8.0, 10.0, 15.0, 20.0};
    std::vector<double> d_values{2.0, 4.0, 6.0, 8.0, 22.8};
    std::vector<int> scale_n{32, 64, 128, 192, 256};
    std::vector<double> scale_hz{3.75e9, 7.5e9, 15e9, 22.5e9, 30e9};
    std::vector<double> q_values{0.0, 0.5, 2.0, 4.0, 10.0};
};

struct Fig2Spec {
    int n = 64;
    double carrier_hz = 7.5e9;
    double radius_y = 2.5;  ///< AWC principal radius along axis_y
    double radius_z = 4.5;
    double radius_swc = 3.5;
    double x_min = 1.0, x_max = 6.0;
    double y_min = -0.6, y_max = 0.6;
    double z_min = -0.6, z_max = 0.6;
    double step = 0.02;
    double desk_step = 0.05;
};

struct Fig3Spec {
    int n = 64;
    double carrier_hz = 7.5e9;
    int trials = 40;
    int paper_n = 128;
    double paper_carrier_hz = 15e9;
    int paper_trials = 100;
    int n_rf = 16;
    int pilots = 16;
    std::vector<double> snr_db{0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0};
    double x_min = 2.0, x_max = 28.0;
    double y_abs_min = 2.0, y_abs_max = 10.0;
    double z_min = 1.5, z_max = 10.0;
    double max_incidence_deg = 85.0;
    double min_bs_distance = 2.0;
    double curvature = 4.0;
    bool run_awc = true;
    bool run_swc = true;
};

struct BaselineSpec {
    int count_y = 0;        ///< 0 = ny
    int count_z = 0;        ///< 0 = nz
    int n_distance = 16;
    double r_min = 0.0;     ///< 0 = 1.2 x aperture
    double r_max = 100.0;
    OmpConfig omp;

    PolarDictionary dictionary(const ArrayFrame& array) const;
};

struct ValidateSpec {
    int fd_points = 10;
    int whiteness_draws = 10000;
    int semigroup_cases = 50;
};

struct ExperimentConfig {
    std::string experiment;
    uint64_t master_seed = 1;
    ScenarioSpec scenario;
    Table1Spec table1;
    Fig2Spec fig2;
    Fig3Spec fig3;
    EstimatorConfig estimator;
    BaselineSpec baseline;
    SwcSearchConfig search;
    ValidateSpec validate;
    std::string source_text; ///< raw config, kept for the JSON sidecar
};

/// Parses the TOML text; unknown keys and type mismatches raise ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

} // namespace wavecurve

#endif

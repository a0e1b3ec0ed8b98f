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

#ifndef WAVECURVE_MODELS_HPP
#define WAVECURVE_MODELS_HPP

#include "wavecurve/channel.hpp"
#include "wavecurve/lm.hpp"
#include "wavecurve/sounding.hpp"

namespace wavecurve {

/// AWC shape parameters theta = (k1, k2, q11, q12, q22).
Eigen::Matrix<double, 5, 1> awc_theta(const AwcParams& p);
AwcParams awc_from_theta(const Eigen::VectorXd& theta, cplx gain = {1.0, 0.0});

/// Steering vector and its derivatives w.r.t. the five AWC shape parameters
/// (N x 5, column j = dc / dtheta_j).
ChannelVector awc_steering_jacobian(const Eigen::VectorXd& theta, int ny, int nz, Eigen::MatrixXcd& dc);

/// Point-source parameters seen from the array centre: u, v are the direction
/// cosines of the source along axis_y, axis_z and rho = 1 / distance.
struct SwcParams {
    double u = 0.0;
    double v = 0.0;
    double rho = 0.0;
    cplx gain{1.0, 0.0};
};

SwcParams swc_params_from_source(const Vec3& source, const ArrayFrame& array);
/// Source position; rho = 0 is rejected because the point is at infinity.
Vec3 swc_source(const SwcParams& p, const ArrayFrame& array);
/// Second-order phase parameters of a (u, v, rho) source.
ArrayProjection swc_projection(double u, double v, double rho, const ArrayFrame& array);

/// Second-order spherical steering vector and derivatives w.r.t. (u, v, rho).
ChannelVector swc_steering_jacobian(double u, double v, double rho, const ArrayFrame& array,
                                    Eigen::MatrixXcd* dc);

/// Operator applied to steering vectors before fitting; nullptr = identity.
using Sensing = const Combiner*;

Eigen::VectorXcd sense(Sensing W, const Eigen::VectorXcd& x);

/// Single-path AWC model for the LM engine.
SeparableModel make_awc_model(Sensing W, int ny, int nz);

/// K-path second-order spherical model, theta = (u_1, v_1, rho_1, ..., u_K, v_K, rho_K).
/// The projection keeps rho >= 0 and u^2 + v^2 <= 0.999.
SeparableModel make_swc_model(Sensing W, const ArrayFrame& array, int paths);

} // namespace wavecurve

#endif

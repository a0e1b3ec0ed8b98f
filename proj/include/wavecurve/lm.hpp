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

#ifndef WAVECURVE_LM_HPP
#define WAVECURVE_LM_HPP

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace wavecurve {

struct LmOptions {
    int max_iters = 100;
    double damping_init = 1e-3;
    double damping_factor = 10.0;
    double rel_tol = 1e-8;
};

/// Model y ~ B(theta) a with complex gains a eliminated by least squares.
///
/// evaluate() fills B (M x K). When dB is non-null it also fills dB (M x P),
/// where column j is dB_{owner[j]} / d theta_j; every parameter drives exactly
/// one column of B.
struct SeparableModel {
    int n_params = 0;
    int n_terms = 0;
    std::vector<int> owner;
    std::function<void(const Eigen::VectorXd& theta, Eigen::MatrixXcd& B, Eigen::MatrixXcd* dB)> evaluate;
    /// Optional projection onto the feasible set, applied to every trial point.
    std::function<void(Eigen::VectorXd& theta)> project;
};

struct LmResult {
    Eigen::VectorXd theta;
    Eigen::VectorXcd gains;
    double cost = 0.0;         ///< ||y - B a||^2 at theta
    double initial_cost = 0.0;
    int iterations = 0;        ///< outer iterations (Jacobian evaluations)
    int accepted = 0;
    bool finite = true;
    std::string diagnostic;
};

/// Least-squares gains for fixed B; zero when B has no usable column space.
Eigen::VectorXcd solve_gains(const Eigen::MatrixXcd& B, const Eigen::VectorXcd& y);

/// Levenberg-Marquardt with diagonal (Marquardt) damping on the real normal
/// equations Re(J^H J). The Jacobian is taken with the gains held fixed.
/// Returns the best point seen; a non-finite trial aborts with a diagnostic.
LmResult levenberg_marquardt(const SeparableModel& model, const Eigen::VectorXcd& y,
                             const Eigen::VectorXd& theta0, const LmOptions& opt = {});

} // namespace wavecurve

#endif

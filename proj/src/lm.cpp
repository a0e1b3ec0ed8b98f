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

#include "wavecurve/lm.hpp"

#include <cmath>
#include <stdexcept>

namespace wavecurve {

Eigen::VectorXcd solve_gains(const Eigen::MatrixXcd& B, const Eigen::VectorXcd& y)
{
    if (B.cols() == 1) {
        const double e = B.col(0).squaredNorm();
        Eigen::VectorXcd a(1);
        a(0) = e > 0.0 ? B.col(0).dot(y) / e : std::complex<double>(0.0, 0.0);
        return a;
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(B);
    return cod.solve(y);
}

namespace {

struct Point {
    Eigen::VectorXd theta;
    Eigen::MatrixXcd B;
    Eigen::VectorXcd a;
    Eigen::VectorXcd r;
    double cost = 0.0;
};

bool evaluate_point(const SeparableModel& m, const Eigen::VectorXcd& y, Point& p, Eigen::MatrixXcd* dB)
{
    m.evaluate(p.theta, p.B, dB);
    p.a = solve_gains(p.B, y);
    p.r = y - p.B * p.a;
    p.cost = p.r.squaredNorm();
    return std::isfinite(p.cost);
}

} // namespace

LmResult levenberg_marquardt(const SeparableModel& model, const Eigen::VectorXcd& y,
                             const Eigen::VectorXd& theta0, const LmOptions& opt)
{
    if (theta0.size() != model.n_params || static_cast<int>(model.owner.size()) != model.n_params)
        throw std::invalid_argument("levenberg_marquardt: parameter count mismatch");

    LmResult res;
    const double floor = 1e-20 * y.squaredNorm();

    Point cur;
    cur.theta = theta0;
    if (model.project)
        model.project(cur.theta);
    Eigen::MatrixXcd dB;
    if (!evaluate_point(model, y, cur, &dB)) {
        res.theta = cur.theta;
        res.gains = Eigen::VectorXcd::Zero(model.n_terms);
        res.cost = res.initial_cost = cur.cost;
        res.finite = false;
        res.diagnostic = "non-finite residual at the initial point";
        return res;
    }
    res.initial_cost = cur.cost;

    double lambda = opt.damping_init;
    bool need_jacobian = false;
    bool converged = false;
    const int P = model.n_params;
    Eigen::MatrixXcd J(y.size(), P);
    Eigen::MatrixXd A(P, P);
    Eigen::VectorXd g(P);

    for (int it = 0; it < opt.max_iters; ++it) {
        if (cur.cost <= floor)
            break;
        if (need_jacobian)
            model.evaluate(cur.theta, cur.B, &dB);
        for (int j = 0; j < P; ++j)
            J.col(j) = -cur.a(model.owner[j]) * dB.col(j);
        A = (J.adjoint() * J).real();
        g = (J.adjoint() * cur.r).real();
        ++res.iterations;

        bool accepted = false;
        while (lambda < 1e16) {
            Eigen::MatrixXd Ad = A;
            for (int j = 0; j < P; ++j)
                Ad(j, j) += lambda * std::max(A(j, j), 1e-300);
            Point trial;
            trial.theta = cur.theta - Ad.ldlt().solve(g);
            if (model.project)
                model.project(trial.theta);
            if (!trial.theta.allFinite()) {
                lambda *= opt.damping_factor;
                continue;
            }
            if (!evaluate_point(model, y, trial, nullptr)) {
                res.finite = false;
                res.diagnostic = "non-finite residual during iteration";
                break;
            }
            if (trial.cost < cur.cost) {
                const double rel = (cur.cost - trial.cost) / cur.cost;
                cur = std::move(trial);
                lambda = std::max(lambda / opt.damping_factor, 1e-12);
                ++res.accepted;
                accepted = true;
                need_jacobian = true;
                converged = rel < opt.rel_tol;
                break;
            }
            lambda *= opt.damping_factor;
        }
        if (!accepted || !res.finite || converged)
            break;
    }

    res.theta = cur.theta;
    res.gains = cur.a;
    res.cost = cur.cost;
    return res;
}

} // namespace wavecurve

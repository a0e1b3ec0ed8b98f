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

#include "wavecurve/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wavecurve {

ChannelVector PolarDictionary::atom(size_t i) const
{
    const PolarGridPoint& g = grid.at(i);
    const ArrayProjection p = swc_projection(g.u, g.v, g.rho, array);
    return awc_steering(p.kbar, p.Qbar, array.ny, array.nz);
}

std::vector<ArrayProjection> PolarDictionary::projections() const
{
    std::vector<ArrayProjection> out;
    out.reserve(grid.size());
    for (const auto& g : grid)
        out.push_back(swc_projection(g.u, g.v, g.rho, array));
    return out;
}

PolarDictionary build_polar_dictionary(const ArrayFrame& array, int count_y, int count_z, int n_distance,
                                       double r_min, double r_max)
{
    if (count_y < 1 || count_z < 1 || n_distance < 0)
        throw std::invalid_argument("build_polar_dictionary: counts must be positive");
    if (n_distance > 0 && !(r_min > 0.0 && r_max >= r_min))
        throw std::invalid_argument("build_polar_dictionary: need 0 < r_min <= r_max");

    PolarDictionary d;
    d.array = array;
    d.count_y = count_y;
    d.count_z = count_z;
    d.rhos.push_back(0.0);
    for (int i = 0; i < n_distance; ++i) {
        const double t = n_distance == 1 ? 0.0 : static_cast<double>(i) / (n_distance - 1);
        d.rhos.push_back(1.0 / r_max + t * (1.0 / r_min - 1.0 / r_max));
    }
    for (double rho : d.rhos)
        for (int iz = 0; iz < count_z; ++iz) {
            const double v = -1.0 + 2.0 * iz / count_z;
            for (int iy = 0; iy < count_y; ++iy) {
                const double u = -1.0 + 2.0 * iy / count_y;
                if (u * u + v * v < 1.0)
                    d.grid.push_back({u, v, rho});
            }
        }
    if (d.grid.empty())
        throw std::invalid_argument("build_polar_dictionary: empty grid");
    return d;
}

PolarDictionary default_polar_dictionary(const ArrayFrame& array)
{
    return build_polar_dictionary(array, array.ny, array.nz, 16, 1.2 * array.aperture(), 100.0);
}

ChannelVector synthesize_paths(const std::vector<PathEstimate>& paths, const ArrayFrame& array)
{
    ChannelVector h = ChannelVector::Zero(array.size());
    for (const auto& p : paths)
        h += p.params.gain * swc_steering_jacobian(p.params.u, p.params.v, p.params.rho, array, nullptr);
    return h;
}

std::vector<PathEstimate> refine_swc(const Eigen::VectorXcd& y, const Combiner& W, const ArrayFrame& array,
                                     const std::vector<PathEstimate>& paths, const LmOptions& opt, LmResult* info)
{
    if (paths.empty())
        return {};
    const int K = static_cast<int>(paths.size());
    const SeparableModel model = make_swc_model(&W, array, K);
    Eigen::VectorXd theta(3 * K);
    for (int k = 0; k < K; ++k)
        theta.segment<3>(3 * k) << paths[k].params.u, paths[k].params.v, paths[k].params.rho;
    LmResult r = levenberg_marquardt(model, y, theta, opt);
    std::vector<PathEstimate> out = paths;
    for (int k = 0; k < K; ++k) {
        out[k].params.u = r.theta(3 * k);
        out[k].params.v = r.theta(3 * k + 1);
        out[k].params.rho = r.theta(3 * k + 2);
        out[k].params.gain = r.gains(k);
    }
    if (info)
        *info = std::move(r);
    return out;
}

namespace {

/// LS gains for fixed path shapes; returns the residual energy.
double fit_gains(const Eigen::VectorXcd& y, const Combiner& W, const ArrayFrame& array,
                 std::vector<PathEstimate>& paths)
{
    Eigen::MatrixXcd B(W.m(), static_cast<Eigen::Index>(paths.size()));
    for (size_t k = 0; k < paths.size(); ++k)
        B.col(k) = W.apply(swc_steering_jacobian(paths[k].params.u, paths[k].params.v, paths[k].params.rho,
                                                 array, nullptr));
    const Eigen::VectorXcd a = solve_gains(B, y);
    for (size_t k = 0; k < paths.size(); ++k)
        paths[k].params.gain = a(k);
    return (y - B * a).squaredNorm();
}

} // namespace

OmpResult omp(const Eigen::VectorXcd& y, const Combiner& W, const PolarDictionary& dict,
              const kernels::MatrixXcf& sensed, const OmpConfig& cfg)
{
    if (dict.size() == 0)
        throw std::invalid_argument("omp: empty dictionary");
    if (sensed.cols() != static_cast<Eigen::Index>(dict.size()) || sensed.rows() != y.size())
        throw std::invalid_argument("omp: sensed dictionary does not match");

    OmpResult res;
    const double e0 = y.squaredNorm();
    res.residual_energy.push_back(e0);
    std::vector<char> used(dict.size(), 0);
    Eigen::VectorXcd r = y;

    for (int k = 1; k <= cfg.max_paths; ++k) {
        if (!(e0 > 0.0))
            break;
        std::vector<double> corr = cfg.parallel ? kernels::correlate_parallel(sensed, r)
                                                : kernels::correlate_serial(sensed, r);
        size_t best = 0;
        double best_val = -1.0;
        for (size_t j = 0; j < corr.size(); ++j)
            if (!used[j] && corr[j] > best_val) {
                best_val = corr[j];
                best = j;
            }
        if (best_val < 0.0)
            break;
        used[best] = 1;

        std::vector<PathEstimate> trial = res.paths;
        PathEstimate p;
        p.params.u = dict.grid[best].u;
        p.params.v = dict.grid[best].v;
        p.params.rho = dict.grid[best].rho;
        p.atom = static_cast<int>(best);
        trial.push_back(p);

        double e = 0.0;
        if (cfg.interleaved_refine) {
            LmResult info;
            trial = refine_swc(y, W, dict.array, trial, cfg.inner_lm, &info);
            e = info.cost;
        } else {
            e = fit_gains(y, W, dict.array, trial);
        }
        res.residual_energy.push_back(e);

        const size_t n = res.residual_energy.size();
        if (k >= 2) {
            const double red = res.residual_energy[n - 2] - res.residual_energy[n - 1];
            const double prev = res.residual_energy[n - 3] - res.residual_energy[n - 2];
            if (red < cfg.stop_ratio * prev) {
                res.discarded_last = true;
                break;
            }
        }
        res.paths = std::move(trial);
        r = y - W.apply(synthesize_paths(res.paths, dict.array));
        if (e <= 1e-20 * e0)
            break;
    }
    res.h_hat = synthesize_paths(res.paths, dict.array);
    return res;
}

OmpResult swc_omp_lm(const Eigen::VectorXcd& y, const Combiner& W, const PolarDictionary& dict,
                     const kernels::MatrixXcf& sensed, const OmpConfig& cfg)
{
    OmpResult res = omp(y, W, dict, sensed, cfg);
    if (!res.paths.empty()) {
        res.paths = refine_swc(y, W, dict.array, res.paths, cfg.final_lm);
        res.h_hat = synthesize_paths(res.paths, dict.array);
    } else {
        res.h_hat = ChannelVector::Zero(dict.array.size());
    }
    return res;
}

} // namespace wavecurve

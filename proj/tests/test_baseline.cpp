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

#include "wavecurve/analysis.hpp"
#include "wavecurve/baseline.hpp"
#include "wavecurve/sounding.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <tuple>

using namespace wavecurve;

namespace {

using Key = std::tuple<long, long, long>;

// lattice coordinates of every atom: (u index, v index, ring index)
std::map<Key, size_t> lattice(const PolarDictionary& d)
{
    std::map<Key, size_t> idx;
    for (size_t i = 0; i < d.size(); ++i) {
        const auto& g = d.grid[i];
        const long ring = std::find(d.rhos.begin(), d.rhos.end(), g.rho) - d.rhos.begin();
        idx[{std::lround((g.u + 1.0) * d.count_y / 2.0), std::lround((g.v + 1.0) * d.count_z / 2.0), ring}] = i;
    }
    return idx;
}

// Largest |<a_i, a_j>| over lattice neighbours. Correlation decays with lattice
// distance, so the neighbours bound the whole Gram matrix.
double neighbour_coherence(const PolarDictionary& d, bool skip_far_ring)
{
    const auto idx = lattice(d);
    const Key steps[] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {1, -1, 0}, {1, 0, 1}, {0, 1, 1}};
    double worst = 0.0;
    for (const auto& [k, i] : idx) {
        const ChannelVector ai = d.atom(i);
        for (const Key& s : steps) {
            if (skip_far_ring && std::get<2>(k) == 0 && std::get<2>(s) == 1)
                continue;
            const auto it = idx.find({std::get<0>(k) + std::get<0>(s), std::get<1>(k) + std::get<1>(s),
                                      std::get<2>(k) + std::get<2>(s)});
            if (it != idx.end())
                worst = std::max(worst, std::abs(ai.dot(d.atom(it->second))));
        }
    }
    return worst;
}

struct Rig {
    ArrayFrame array;
    Combiner W;
    PolarDictionary dict;
    kernels::MatrixXcf sensed;
};

Rig make_rig(int n, double carrier, uint64_t seed)
{
    Rig r;
    r.array = ArrayFrame::half_wavelength(n, n, carrier);
    r.W = make_srft_combiner(n, n, 16, 16, seed);
    r.dict = default_polar_dictionary(r.array);
    r.sensed = kernels::sense_atoms_serial(r.W, r.dict.projections());
    return r;
}

ChannelVector swc_channel(const SwcParams& p, const ArrayFrame& a)
{
    return p.gain * swc_steering_jacobian(p.u, p.v, p.rho, a, nullptr);
}

size_t nearest_atom(const PolarDictionary& d, const SwcParams& p)
{
    size_t best = 0;
    double bd = 1e300;
    for (size_t i = 0; i < d.size(); ++i) {
        const auto& g = d.grid[i];
        const double du = (g.u - p.u) / d.step_u(), dv = (g.v - p.v) / d.step_v();
        const double dr = (g.rho - p.rho) / (d.rhos.back() - d.rhos[1]);
        const double dist = du * du + dv * dv + 100.0 * dr * dr;
        if (dist < bd) {
            bd = dist;
            best = i;
        }
    }
    return best;
}

} // namespace

TEST_CASE("polar dictionary layout")
{
    const ArrayFrame a = ArrayFrame::half_wavelength(16, 16, 15e9);
    const PolarDictionary d = default_polar_dictionary(a);
    CHECK(d.count_y == 16);
    CHECK(d.rhos.size() == 17);
    CHECK(d.rhos.front() == 0.0);
    CHECK(d.rhos[1] == doctest::Approx(1.0 / 100.0));
    // aperture = array diagonal
    CHECK(d.rhos.back() == doctest::Approx(1.0 / (1.2 * std::sqrt(2.0) * 15 * a.spacing)));
    for (size_t i = 0; i < d.size(); i += 37) {
        CHECK(std::abs(d.atom(i).norm() - 1.0) < 1e-10);
        CHECK(d.grid[i].u * d.grid[i].u + d.grid[i].v * d.grid[i].v < 1.0);
    }

    // far-field broadside atom is the flat plane wave
    const ChannelVector flat = ChannelVector::Constant(256, 1.0 / 16.0);
    size_t hits = 0;
    for (size_t i = 0; i < d.size(); ++i)
        if (d.grid[i].u == 0.0 && d.grid[i].v == 0.0 && d.grid[i].rho == 0.0) {
            CHECK((d.atom(i) - flat).norm() < 1e-12);
            ++hits;
        }
    CHECK(hits == 1);

    CHECK_THROWS(build_polar_dictionary(a, 0, 4, 4, 1.0, 10.0));
}

TEST_CASE("dictionary covers in-range sources")
{
    const ArrayFrame a = ArrayFrame::half_wavelength(32, 32, 7.5e9);
    const PolarDictionary d = default_polar_dictionary(a);
    const double ring = (d.rhos.back() - d.rhos[1]) / (d.rhos.size() - 2);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        double u, v;
        do {
            u = U(rng);
            v = U(rng);
        } while (u * u + v * v > 0.8);
        const double rho = d.rhos[1] + 0.5 * (U(rng) + 1.0) * (d.rhos.back() - d.rhos[1]);
        bool covered = false;
        for (const auto& g : d.grid)
            if (std::abs(g.u - u) <= 0.5 * d.step_u() + 1e-12 && std::abs(g.v - v) <= 0.5 * d.step_v() + 1e-12
                && std::abs(g.rho - rho) <= 0.5 * ring + 1e-12) {
                covered = true;
                break;
            }
        CHECK(covered);
    }
}

TEST_CASE("dictionary coherence on a 32x32 array")
{
    const PolarDictionary d = default_polar_dictionary(ArrayFrame::half_wavelength(32, 32, 7.5e9));
    // as stated for the default grid
    CHECK(neighbour_coherence(d, false) < 0.99);
    // everything except the far-field atom against the outermost ring
    CHECK(neighbour_coherence(d, true) < 0.99);
}

TEST_CASE("OMP on exact dictionary atoms")
{
    const Rig r = make_rig(32, 7.5e9, 3);
    OmpConfig cfg;
    cfg.parallel = false;

    SUBCASE("single atom")
    {
        const size_t j = r.dict.size() / 3;
        const Eigen::VectorXcd y = r.W.apply(cplx(2.0, -1.0) * r.dict.atom(j));
        const OmpResult res = omp(y, r.W, r.dict, r.sensed, cfg);
        REQUIRE_FALSE(res.paths.empty());
        CHECK(res.paths[0].atom == static_cast<int>(j));
        CHECK(std::sqrt(res.residual_energy[1] / res.residual_energy[0]) < 1e-10);
        CHECK(res.paths.size() == 1);
    }
    SUBCASE("two orthogonal plane-wave atoms")
    {
        std::vector<size_t> far;
        for (size_t i = 0; i < r.dict.size(); ++i)
            if (r.dict.grid[i].rho == 0.0 && r.dict.grid[i].v == 0.0
                && (r.dict.grid[i].u == 0.0 || std::abs(r.dict.grid[i].u - 0.25) < 1e-12))
                far.push_back(i);
        REQUIRE(far.size() == 2);
        const ChannelVector a0 = r.dict.atom(far[0]), a1 = r.dict.atom(far[1]);
        CHECK(std::abs(a0.dot(a1)) < 1e-12);
        const cplx g0(1.0, 0.5), g1(-0.4, 0.3);
        cfg.interleaved_refine = false;
        const Eigen::VectorXcd y = r.W.apply(g0 * a0 + g1 * a1);
        const OmpResult res = omp(y, r.W, r.dict, r.sensed, cfg);
        REQUIRE(res.paths.size() == 2);
        for (const PathEstimate& p : res.paths) {
            const bool first = p.atom == static_cast<int>(far[0]);
            CHECK((first || p.atom == static_cast<int>(far[1])));
            CHECK(std::abs(p.params.gain - (first ? g0 : g1)) < 1e-8);
        }
    }
}

TEST_CASE("OMP residual never increases")
{
    const Rig r = make_rig(32, 7.5e9, 5);
    OmpConfig cfg;
    cfg.parallel = false;
    cfg.stop_ratio = 0.0;
    cfg.max_paths = 6;
    AwcParams p;
    p.kbar = Vec2(0.1, -0.07);
    p.Qbar << 4e-3, 1e-3, 1e-3, 1e-3;
    const ChannelVector h = awc_steering(p, 32, 32);
    const Observation o = observe(h, r.W, 20.0, 9);
    for (bool interleaved : {true, false}) {
        cfg.interleaved_refine = interleaved;
        const OmpResult res = omp(o.y, r.W, r.dict, r.sensed, cfg);
        for (size_t i = 1; i < res.residual_energy.size(); ++i)
            CHECK(res.residual_energy[i] <= res.residual_energy[i - 1] * (1.0 + 1e-12));
    }
}

TEST_CASE("stopping rule")
{
    const Rig r = make_rig(32, 7.5e9, 6);
    OmpConfig cfg;
    cfg.parallel = false;
    cfg.interleaved_refine = false;
    const ChannelVector h = r.dict.atom(100);
    const Observation o = observe(h, r.W, 30.0, 4);
    const OmpResult res = omp(o.y, r.W, r.dict, r.sensed, cfg);
    const auto& e = res.residual_energy;
    REQUIRE(e.size() >= 3);
    const size_t n = e.size();
    if (res.discarded_last) {
        CHECK(res.paths.size() == n - 2);
        CHECK(e[n - 2] - e[n - 1] < cfg.stop_ratio * (e[n - 3] - e[n - 2]));
    }
    for (size_t k = 2; k + 1 < n; ++k)
        CHECK(e[k - 1] - e[k] >= cfg.stop_ratio * (e[k - 2] - e[k - 1]));
    CHECK(res.paths.size() >= 1);
    CHECK(res.paths.size() <= 16);
}

TEST_CASE("per-path LM refinement")
{
    const Rig r = make_rig(64, 7.5e9, 7);
    SwcParams truth = swc_params_from_source(r.array.center + Vec3(3.0, 1.1, -0.6), r.array);
    truth.gain = cplx(0.3, 0.9);
    const ChannelVector h = swc_channel(truth, r.array);
    const Eigen::VectorXcd y = r.W.apply(h);

    SUBCASE("from the nearest grid point")
    {
        const size_t j = nearest_atom(r.dict, truth);
        PathEstimate p;
        p.atom = static_cast<int>(j);
        p.params.u = r.dict.grid[j].u;
        p.params.v = r.dict.grid[j].v;
        p.params.rho = r.dict.grid[j].rho;
        const auto out = refine_swc(y, r.W, r.array, {p});
        CHECK(nmse(synthesize_paths(out, r.array), h) < 1e-6);
    }
    SUBCASE("truth is a fixed point")
    {
        PathEstimate p;
        p.params = truth;
        LmResult info;
        const auto out = refine_swc(y, r.W, r.array, {p}, {}, &info);
        CHECK(nmse(synthesize_paths(out, r.array), h) < 1e-12);
        CHECK(std::abs(out[0].params.rho - truth.rho) < 1e-9);
    }
    SUBCASE("far-field channel keeps a finite distance")
    {
        SwcParams plane;
        plane.u = 0.2;
        plane.v = -0.1;
        plane.rho = 0.0;
        const ChannelVector hp = swc_channel(plane, r.array);
        PathEstimate p;
        p.params = plane;
        p.params.u += 0.01;
        p.params.rho = 0.05;
        LmResult info;
        const auto out = refine_swc(r.W.apply(hp), r.W, r.array, {p}, {}, &info);
        CHECK(info.finite);
        CHECK(std::isfinite(out[0].params.rho));
        CHECK(out[0].params.rho >= 0.0);
        CHECK(out[0].params.rho < 0.01);
        CHECK(nmse(synthesize_paths(out, r.array), hp) < 1e-6);
    }
}

TEST_CASE("SWC-OMP-LM on a spherical channel")
{
    const Rig r = make_rig(64, 7.5e9, 8);
    SwcParams truth = swc_params_from_source(r.array.center + Vec3(4.0, -1.3, 0.8), r.array);
    const ChannelVector h = swc_channel(truth, r.array);
    OmpConfig cfg;
    cfg.parallel = false;
    const OmpResult res = swc_omp_lm(r.W.apply(h), r.W, r.dict, r.sensed, cfg);
    CHECK(res.paths.size() == 1);
    CHECK(nmse(res.h_hat, h) < 1e-6);
}

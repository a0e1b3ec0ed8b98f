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
#include "wavecurve/kernels.hpp"
#include "wavecurve/sounding.hpp"

#include <doctest.h>

#include <random>

using namespace wavecurve;

namespace {

std::vector<ArrayProjection> sample_atoms(const ArrayFrame& a, size_t count)
{
    const PolarDictionary d = default_polar_dictionary(a);
    std::vector<ArrayProjection> all = d.projections();
    std::vector<ArrayProjection> out;
    for (size_t i = 0; i < count; ++i)
        out.push_back(all[(i * 7919) % all.size()]);
    return out;
}

} // namespace

TEST_CASE("similarity kernels agree")
{
    const ArrayFrame a = ArrayFrame::half_wavelength(24, 20, 15e9);
    const auto atoms = sample_atoms(a, 200);
    const ChannelVector h = swc_steering(a.center + Vec3(3.0, 0.4, -0.2), a);
    const auto s = kernels::similarity_serial(h, atoms, 24, 20);
    const auto p = kernels::similarity_parallel(h, atoms, 24, 20);
    REQUIRE(s.size() == atoms.size());
    REQUIRE(p.size() == atoms.size());
    for (size_t i = 0; i < s.size(); ++i) {
        CHECK(std::abs(s[i] - p[i]) < 1e-10);
        const ChannelVector c = awc_steering(atoms[i].kbar, atoms[i].Qbar, 24, 20);
        CHECK(std::abs(s[i] - cosine_similarity(c, h)) < 1e-12);
    }
}

TEST_CASE("sensing and correlation kernels agree")
{
    const ArrayFrame a = ArrayFrame::half_wavelength(16, 16, 15e9);
    const Combiner W = make_srft_combiner(16, 16, 4, 4, 21);
    const auto atoms = sample_atoms(a, 64);
    const kernels::MatrixXcf S = kernels::sense_atoms_serial(W, atoms);
    const kernels::MatrixXcf P = kernels::sense_atoms_parallel(W, atoms);
    REQUIRE(S.rows() == W.m());
    REQUIRE(S.cols() == 64);
    CHECK((S - P).norm() == 0.0f);
    for (size_t j = 0; j < atoms.size(); j += 9) {
        const Eigen::VectorXcd ref = W.apply(awc_steering(atoms[j].kbar, atoms[j].Qbar, 16, 16));
        CHECK((S.col(static_cast<Eigen::Index>(j)).cast<cplx>() - ref).norm() < 1e-6);
    }

    std::mt19937_64 rng(4);
    std::normal_distribution<double> nd;
    Eigen::VectorXcd r(W.m());
    for (auto& x : r)
        x = cplx(nd(rng), nd(rng));
    const auto cs = kernels::correlate_serial(S, r);
    const auto cp = kernels::correlate_parallel(S, r);
    for (size_t j = 0; j < cs.size(); ++j) {
        // single-precision accumulation
        CHECK(std::abs(cs[j] - cp[j]) <= 1e-6 * (1.0 + cs[j]));
        const double ref = std::abs(S.col(static_cast<Eigen::Index>(j)).cast<cplx>().dot(r));
        CHECK(std::abs(cs[j] - ref) <= 1e-5 * (1.0 + ref));
    }
    CHECK(kernels::max_threads() >= 1);
}

TEST_CASE("similarity volume is the same serial and parallel")
{
    const ArrayFrame a = ArrayFrame::half_wavelength(16, 16, 7.5e9);
    AwcParams p;
    p.Qbar << 2e-3, 0.0, 0.0, 8e-4;
    const ChannelVector h = awc_steering(p, 16, 16);
    VolumeGrid g;
    g.x = VolumeGrid::range(1.0, 3.0, 0.25);
    g.y = VolumeGrid::range(-0.2, 0.2, 0.1);
    g.z = VolumeGrid::range(-0.2, 0.2, 0.2);
    const SimilarityVolume s = similarity_volume(h, a, g, false);
    const SimilarityVolume q = similarity_volume(h, a, g, true);
    REQUIRE(s.values.size() == q.values.size());
    for (size_t i = 0; i < s.values.size(); ++i)
        CHECK(std::abs(s.values[i] - q.values[i]) < 1e-10);
    CHECK(s.peak == doctest::Approx(q.peak));
}

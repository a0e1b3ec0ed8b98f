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
//
// Serial reference versus OpenMP kernels. Run with OMP_NUM_THREADS set.

#include "wavecurve/baseline.hpp"
#include "wavecurve/kernels.hpp"

#include <benchmark/benchmark.h>

using namespace wavecurve;

namespace {

struct Fixture {
    ArrayFrame array;
    PolarDictionary dict;
    std::vector<ArrayProjection> atoms;
    Combiner W;
    kernels::MatrixXcf sensed;
    ChannelVector h;
    Eigen::VectorXcd y;

    explicit Fixture(int n)
        : array(ArrayFrame::half_wavelength(n, n, n * 7.5e9 / 64.0)),
          dict(default_polar_dictionary(array)),
          atoms(dict.projections()),
          W(make_srft_combiner(n, n, 16, 16, 3))
    {
        sensed = kernels::sense_atoms_parallel(W, atoms);
        h = swc_steering(Vec3(5.0, 1.0, 11.0), array);
        y = W.apply(h);
    }
};

const Fixture& fixture(int n)
{
    static Fixture f32(32), f64(64);
    return n == 32 ? f32 : f64;
}

void BM_similarity_serial(benchmark::State& st)
{
    const Fixture& f = fixture(static_cast<int>(st.range(0)));
    const std::vector<ArrayProjection> sub(f.atoms.begin(), f.atoms.begin() + 256);
    for (auto _ : st)
        benchmark::DoNotOptimize(kernels::similarity_serial(f.h, sub, f.array.ny, f.array.nz));
    st.SetItemsProcessed(st.iterations() * 256);
}

void BM_similarity_parallel(benchmark::State& st)
{
    const Fixture& f = fixture(static_cast<int>(st.range(0)));
    const std::vector<ArrayProjection> sub(f.atoms.begin(), f.atoms.begin() + 256);
    for (auto _ : st)
        benchmark::DoNotOptimize(kernels::similarity_parallel(f.h, sub, f.array.ny, f.array.nz));
    st.SetItemsProcessed(st.iterations() * 256);
}

void BM_sense_serial(benchmark::State& st)
{
    const Fixture& f = fixture(static_cast<int>(st.range(0)));
    const std::vector<ArrayProjection> sub(f.atoms.begin(), f.atoms.begin() + 64);
    for (auto _ : st)
        benchmark::DoNotOptimize(kernels::sense_atoms_serial(f.W, sub));
    st.SetItemsProcessed(st.iterations() * 64);
}

void BM_sense_parallel(benchmark::State& st)
{
    const Fixture& f = fixture(static_cast<int>(st.range(0)));
    const std::vector<ArrayProjection> sub(f.atoms.begin(), f.atoms.begin() + 64);
    for (auto _ : st)
        benchmark::DoNotOptimize(kernels::sense_atoms_parallel(f.W, sub));
    st.SetItemsProcessed(st.iterations() * 64);
}

void BM_correlate_serial(benchmark::State& st)
{
    const Fixture& f = fixture(static_cast<int>(st.range(0)));
    for (auto _ : st)
        benchmark::DoNotOptimize(kernels::correlate_serial(f.sensed, f.y));
    st.SetItemsProcessed(st.iterations() * f.sensed.cols());
}

void BM_correlate_parallel(benchmark::State& st)
{
    const Fixture& f = fixture(static_cast<int>(st.range(0)));
    for (auto _ : st)
        benchmark::DoNotOptimize(kernels::correlate_parallel(f.sensed, f.y));
    st.SetItemsProcessed(st.iterations() * f.sensed.cols());
}

} // namespace

BENCHMARK(BM_similarity_serial)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_similarity_parallel)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sense_serial)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sense_parallel)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_correlate_serial)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_correlate_parallel)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

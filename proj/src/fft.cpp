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

#include "wavecurve/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

namespace wavecurve::fft {

namespace {

std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

struct Plan {
    fftw_plan handle = nullptr;
    ~Plan()
    {
        if (handle) {
            std::lock_guard<std::mutex> lock(planner_mutex());
            fftw_destroy_plan(handle);
        }
    }
};

fftw_plan plan_for(int rows, int cols, Direction dir)
{
    using Key = std::tuple<int, int, int>;
    thread_local std::map<Key, std::unique_ptr<Plan>> cache;
    const Key key{rows, cols, dir == Direction::forward ? 0 : 1};
    auto it = cache.find(key);
    if (it != cache.end())
        return it->second->handle;

    std::vector<fftw_complex> a(static_cast<size_t>(rows) * cols);
    std::vector<fftw_complex> b(static_cast<size_t>(rows) * cols);
    auto p = std::make_unique<Plan>();
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        // Column-major rows x cols is row-major cols x rows.
        p->handle = fftw_plan_dft_2d(cols, rows, a.data(), b.data(),
                                     dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    fftw_plan h = p->handle;
    cache.emplace(key, std::move(p));
    return h;
}

} // namespace

void transform(const std::complex<double>* in, std::complex<double>* out, int rows, int cols,
               Direction dir)
{
    fftw_plan p = plan_for(rows, cols, dir);
    // FFTW does not modify the input of an out-of-place complex transform.
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

Eigen::MatrixXcd forward(const Eigen::MatrixXcd& x)
{
    Eigen::MatrixXcd X(x.rows(), x.cols());
    fft::transform(x.data(), X.data(), static_cast<int>(x.rows()), static_cast<int>(x.cols()),
              Direction::forward);
    X /= std::sqrt(static_cast<double>(x.size()));
    return X;
}

Eigen::MatrixXcd inverse(const Eigen::MatrixXcd& X)
{
    Eigen::MatrixXcd x(X.rows(), X.cols());
    fft::transform(X.data(), x.data(), static_cast<int>(X.rows()), static_cast<int>(X.cols()),
              Direction::backward);
    x /= std::sqrt(static_cast<double>(X.size()));
    return x;
}

Eigen::MatrixXd padded_power(const Eigen::MatrixXcd& x, int rows, int cols)
{
    Eigen::MatrixXcd buf = Eigen::MatrixXcd::Zero(rows, cols);
    buf.topLeftCorner(x.rows(), x.cols()) = x;
    Eigen::MatrixXcd X(rows, cols);
    fft::transform(buf.data(), X.data(), rows, cols, Direction::forward);
    return X.cwiseAbs2();
}

} // namespace wavecurve::fft

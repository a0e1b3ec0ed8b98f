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

#ifndef WAVECURVE_FFT_HPP
#define WAVECURVE_FFT_HPP

#include <Eigen/Dense>

#include <complex>

// Thin FFTW wrapper for 2D transforms of column-major Eigen matrices.
// Plans are cached per thread; planning itself is serialised.
namespace wavecurve::fft {

enum class Direction { forward, backward };

/// Unnormalised out-of-place 2D DFT of a rows x cols column-major buffer.
/// Forward uses exp(-j 2 pi k n / L).
void transform(const std::complex<double>* in, std::complex<double>* out, int rows, int cols,
               Direction dir);

/// Unitary 2D DFT.
Eigen::MatrixXcd forward(const Eigen::MatrixXcd& x);
/// Unitary inverse 2D DFT.
Eigen::MatrixXcd inverse(const Eigen::MatrixXcd& X);

/// |DFT|^2 of x zero-padded (at the high-index end) to rows x cols. Unnormalised.
Eigen::MatrixXd padded_power(const Eigen::MatrixXcd& x, int rows, int cols);

} // namespace wavecurve::fft

#endif

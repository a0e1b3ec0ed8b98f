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

#ifndef WAVECURVE_KERNELS_HPP
#define WAVECURVE_KERNELS_HPP

#include "wavecurve/channel.hpp"
#include "wavecurve/sounding.hpp"

#include <complex>
#include <vector>

// Hot loops in two flavours: a plain serial reference and an OpenMP version.
// Both produce the same values up to rounding; tests compare them.
namespace wavecurve::kernels {

using MatrixXcf = Eigen::Matrix<std::complex<float>, Eigen::Dynamic, Eigen::Dynamic>;

/// |c(atom)^H h| / ||h|| for every atom (unit-norm quadratic-phase steering vectors).
/// The serial version builds each steering vector explicitly.
std::vector<double> similarity_serial(const ChannelVector& h, const std::vector<ArrayProjection>& atoms,
                                      int ny, int nz);
/// Phase recurrences along the fast axis, parallel over atoms.
std::vector<double> similarity_parallel(const ChannelVector& h, const std::vector<ArrayProjection>& atoms,
                                        int ny, int nz);

/// Columns W c(atom), stored in single precision.
MatrixXcf sense_atoms_serial(const Combiner& W, const std::vector<ArrayProjection>& atoms);
MatrixXcf sense_atoms_parallel(const Combiner& W, const std::vector<ArrayProjection>& atoms);

/// |B_j^H r| for every column j.
std::vector<double> correlate_serial(const MatrixXcf& B, const Eigen::VectorXcd& r);
std::vector<double> correlate_parallel(const MatrixXcf& B, const Eigen::VectorXcd& r);

int max_threads();

} // namespace wavecurve::kernels

#endif

// SPDX-License-Identifier: Apache-2.0
//
// mac-pa: power allocation games on the fast-fading MIMO multiple access channel
// Copyright (C) 2026 The mac-pa authors
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

#pragma once

#include <Eigen/Dense>
#include <complex>

namespace macpa {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

// log2 |I + X| for Hermitian PSD X. Evaluated through a Cholesky factor of
// I + X; on factorization failure a 1e-12 jitter is added once (with a
// warning on stderr) before giving up.
double log2_det_identity_plus(const CMatrix& X);

// log2 |A| for Hermitian positive definite A, same fallback as above.
double log2_det_hpd(const CMatrix& A);

// Max-entry distance of U^H U from the identity.
double unitarity_error(const CMatrix& U);

// Max-entry distance of A from A^H, relative to max(1, max|A|).
double hermitian_error(const CMatrix& A);

CMatrix diagonal_covariance(const CMatrix& W, const RVector& powers);

} // namespace macpa

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

#include "macpa/linalg.hpp"

#include <atomic>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace macpa {

namespace {

std::atomic<bool> jitter_warned{false};

double log2_det_from_llt(const Eigen::LLT<CMatrix>& llt)
{
    const auto& L = llt.matrixLLT();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < L.rows(); ++i)
        acc += std::log(L(i, i).real());
    return 2.0 * acc / std::log(2.0);
}

} // namespace

double log2_det_hpd(const CMatrix& A)
{
    Eigen::LLT<CMatrix> llt(A);
    if (llt.info() == Eigen::Success)
        return log2_det_from_llt(llt);

    if (!jitter_warned.exchange(true))
        std::cerr << "macpa: Cholesky failed, retrying with 1e-12 jitter\n";
    CMatrix jittered = A;
    jittered.diagonal().array() += 1e-12;
    llt.compute(jittered);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("log-det: matrix is not positive definite");
    const double v = log2_det_from_llt(llt);
    if (!std::isfinite(v))
        throw std::runtime_error("log-det: non-finite determinant");
    return v;
}

double log2_det_identity_plus(const CMatrix& X)
{
    CMatrix A = X;
    A.diagonal().array() += 1.0;
    return log2_det_hpd(A);
}

double unitarity_error(const CMatrix& U)
{
    const CMatrix G = U.adjoint() * U - CMatrix::Identity(U.cols(), U.cols());
    return G.cwiseAbs().maxCoeff();
}

double hermitian_error(const CMatrix& A)
{
    if (A.size() == 0)
        return 0.0;
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    return (A - A.adjoint()).cwiseAbs().maxCoeff() / scale;
}

CMatrix diagonal_covariance(const CMatrix& W, const RVector& powers)
{
    return W * powers.cast<Complex>().asDiagonal() * W.adjoint();
}

} // namespace macpa

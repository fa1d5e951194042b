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

#include "macpa/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace macpa {

namespace {

constexpr double kUnitaryTol = 1e-10;
constexpr double kOffBasisTol = 1e-6;

struct SortedEigen {
    RVector values;
    RMatrix vectors;
};

// Symmetric eigendecomposition, eigenvalues in decreasing order.
SortedEigen sorted_eigen(const RMatrix& M, const char* what)
{
    if (M.rows() != M.cols())
        throw ModelError(std::string(what) + ": matrix is not square");
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw ModelError(std::string(what) + ": matrix is not symmetric");

    Eigen::SelfAdjointEigenSolver<RMatrix> es(M);
    if (es.info() != Eigen::Success)
        throw ModelError(std::string(what) + ": eigendecomposition failed");
    if (es.eigenvalues().minCoeff() < -1e-10 * scale)
        throw ModelError(std::string(what) + ": matrix is not positive semidefinite");

    const Eigen::Index n = M.rows();
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) {
        return es.eigenvalues()(a) > es.eigenvalues()(b);
    });

    SortedEigen out{RVector(n), RMatrix(n, n)};
    for (Eigen::Index c = 0; c < n; ++c) {
        out.values(c) = std::max(0.0, es.eigenvalues()(idx[static_cast<std::size_t>(c)]));
        out.vectors.col(c) = es.eigenvectors().col(idx[static_cast<std::size_t>(c)]);
    }
    return out;
}

bool is_scaled_identity(const RMatrix& M)
{
    const double mean = M.trace() / static_cast<double>(M.rows());
    RMatrix D = M;
    D.diagonal().array() -= mean;
    return D.cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, std::abs(mean));
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

RMatrix exp_correlation(const CorrelationSpec& spec)
{
    if (spec.n < 1)
        throw ModelError("exp_correlation: n must be >= 1");
    if (!(spec.r >= 0.0 && spec.r <= 1.0))
        throw ModelError("exp_correlation: r must lie in [0, 1]");
    RMatrix M(spec.n, spec.n);
    for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < spec.n; ++j)
            M(i, j) = (i == j) ? 1.0 : std::pow(spec.r, std::abs(i - j));
    return M;
}

void UiuProfile::validate() const
{
    if (n_t < 1 || n_r < 1)
        throw ModelError("profile: antenna counts must be positive");
    if (sigma.empty())
        throw ModelError("profile: no users");
    if (W.size() != sigma.size())
        throw ModelError("profile: one transmit basis per user required");
    if (V.rows() != n_r || V.cols() != n_r || unitarity_error(V) > kUnitaryTol)
        throw ModelError("profile: receive basis V is not an n_r x n_r unitary");
    for (std::size_t k = 0; k < sigma.size(); ++k) {
        const std::string who = "profile: user " + std::to_string(k + 1);
        if (sigma[k].rows() != n_r || sigma[k].cols() != n_t)
            throw ModelError(who + " variance profile has wrong shape");
        if (sigma[k].minCoeff() < 0.0 || !sigma[k].allFinite())
            throw ModelError(who + " variance profile has a negative or non-finite entry");
        if (W[k].rows() != n_t || W[k].cols() != n_t || unitarity_error(W[k]) > kUnitaryTol)
            throw ModelError(who + " transmit basis is not unitary");
    }
}

double off_basis_energy(const CMatrix& V, const RMatrix& R)
{
    const CMatrix D = V.adjoint() * R.cast<Complex>() * V;
    CMatrix off = D;
    off.diagonal().setZero();
    const double norm = R.norm();
    return norm > 0.0 ? off.norm() / norm : 0.0;
}

UiuProfile kronecker_to_uiu(const std::vector<RMatrix>& R, const std::vector<RMatrix>& T,
                            BasisPolicy policy)
{
    if (R.empty() || R.size() != T.size())
        throw ModelError("kronecker_to_uiu: need one receive and one transmit correlation per user");

    const auto n_r = R.front().rows();
    const auto n_t = T.front().rows();
    for (std::size_t k = 0; k < R.size(); ++k) {
        if (R[k].rows() != n_r || R[k].cols() != n_r)
            throw ModelError("kronecker_to_uiu: receive correlations differ in size");
        if (T[k].rows() != n_t || T[k].cols() != n_t)
            throw ModelError("kronecker_to_uiu: transmit correlations differ in size");
    }

    auto reference = std::find_if(R.begin(), R.end(), [](const RMatrix& M) { return !is_scaled_identity(M); });
    const RMatrix V_real = reference == R.end()
        ? RMatrix::Identity(n_r, n_r)
        : sorted_eigen(*reference, "receive correlation").vectors;

    UiuProfile p;
    p.n_t = static_cast<int>(n_t);
    p.n_r = static_cast<int>(n_r);
    p.V = V_real.cast<Complex>();

    for (std::size_t k = 0; k < R.size(); ++k) {
        sorted_eigen(R[k], "receive correlation"); // PSD / symmetry checks
        const double energy = off_basis_energy(p.V, R[k]);
        if (policy == BasisPolicy::strict && energy > kOffBasisTol)
            throw ModelError("kronecker_to_uiu: receive correlation of user " + std::to_string(k + 1) +
                             " is not diagonal in the shared basis (off-basis energy " +
                             std::to_string(energy) + ")");
        RVector dR = (V_real.transpose() * R[k] * V_real).diagonal().cwiseMax(0.0);
        if (policy == BasisPolicy::strict) {
            const RMatrix rebuilt = V_real * dR.asDiagonal() * V_real.transpose();
            if ((rebuilt - R[k]).cwiseAbs().maxCoeff() > 1e-8)
                throw ModelError("kronecker_to_uiu: receive reconstruction error above 1e-8");
        }

        const SortedEigen te = sorted_eigen(T[k], "transmit correlation");
        p.sigma.push_back(dR * te.values.transpose());
        p.W.push_back(te.vectors.cast<Complex>());
        p.d_receive.push_back(dR);
        p.d_transmit.push_back(te.values);
    }
    p.validate();
    return p;
}

UiuProfile exponential_profile(int n_t, int n_r, const std::vector<double>& r,
                               const std::vector<double>& t, BasisPolicy policy)
{
    if (r.size() != t.size())
        throw ModelError("exponential_profile: r and t must have one entry per user");
    std::vector<RMatrix> R, T;
    for (std::size_t k = 0; k < r.size(); ++k) {
        R.push_back(exp_correlation({n_r, r[k]}));
        T.push_back(exp_correlation({n_t, t[k]}));
    }
    return kronecker_to_uiu(R, T, policy);
}

UiuProfile iid_profile(int users, int n_t, int n_r)
{
    UiuProfile p;
    p.n_t = n_t;
    p.n_r = n_r;
    p.V = CMatrix::Identity(n_r, n_r);
    for (int k = 0; k < users; ++k) {
        p.sigma.push_back(RMatrix::Ones(n_r, n_t));
        p.W.push_back(CMatrix::Identity(n_t, n_t));
    }
    p.validate();
    return p;
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t draw, std::uint64_t user)
{
    return splitmix64(splitmix64(splitmix64(seed) ^ draw) ^ user);
}

CMatrix sample_inner(const UiuProfile& profile, int k, std::uint64_t seed, std::uint64_t draw)
{
    std::mt19937_64 gen(substream_seed(seed, draw, static_cast<std::uint64_t>(k)));
    std::normal_distribution<double> normal(0.0, 1.0);
    const RMatrix& s = profile.sigma[static_cast<std::size_t>(k)];
    CMatrix Ht(profile.n_r, profile.n_t);
    for (int j = 0; j < profile.n_t; ++j) {
        for (int i = 0; i < profile.n_r; ++i) {
            // real and imaginary parts i.i.d. N(0, v/2) so that E|x|^2 = v
            const double scale = std::sqrt(s(i, j) / (2.0 * profile.n_t));
            const double re = normal(gen);
            const double im = normal(gen);
            Ht(i, j) = Complex(scale * re, scale * im);
        }
    }
    return Ht;
}

ChannelSamples sample_channel(const UiuProfile& profile, int count, std::uint64_t seed)
{
    if (count < 1)
        throw ModelError("sample_channel: count must be >= 1");
    ChannelSamples out;
    out.seed = seed;
    out.draws.resize(static_cast<std::size_t>(count));
    for (int d = 0; d < count; ++d) {
        auto& per_user = out.draws[static_cast<std::size_t>(d)];
        per_user.reserve(static_cast<std::size_t>(profile.users()));
        for (int k = 0; k < profile.users(); ++k) {
            const CMatrix Ht = sample_inner(profile, k, seed, static_cast<std::uint64_t>(d));
            per_user.push_back(profile.V * Ht * profile.W[static_cast<std::size_t>(k)].adjoint());
        }
    }
    return out;
}

} // namespace macpa

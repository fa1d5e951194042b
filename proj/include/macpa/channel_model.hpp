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

#include "macpa/linalg.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace macpa {

class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Exponential antenna correlation M(i,j) = r^|i-j| for an n-element array.
struct CorrelationSpec {
    int n = 1;
    double r = 0.0;
};

RMatrix exp_correlation(const CorrelationSpec& spec);

/// Unitary-independent-unitary channel statistics.
///
/// User k's channel is H_k = V * Ht_k * W_k^H where Ht_k has independent
/// zero-mean circular Gaussian entries with E|Ht_k(i,j)|^2 = sigma[k](i,j)/n_t.
/// Column j of W_k is the transmit eigen-direction that carries mode j, so a
/// precoder Q_k = W_k diag(P) W_k^H loads power P(j) onto column j of Ht_k.
struct UiuProfile {
    int n_t = 0;
    int n_r = 0;
    std::vector<RMatrix> sigma;   // per user, n_r x n_t, nonnegative
    std::vector<CMatrix> W;       // per user, n_t x n_t unitary
    CMatrix V;                    // n_r x n_r unitary, shared by all users

    // Eigenvalues of R_k and T_k when the profile came from a Kronecker model;
    // empty otherwise.
    std::vector<RVector> d_receive;
    std::vector<RVector> d_transmit;

    int users() const { return static_cast<int>(sigma.size()); }

    /// sum_i sigma_k(i, j)
    double column_sum(int k, int j) const { return sigma[k].col(j).sum(); }

    /// Throws ModelError when an invariant is broken (negative variance,
    /// non-unitary bases, inconsistent dimensions).
    void validate() const;
};

/// How kronecker_to_uiu copes with receive correlations that are not all
/// diagonal in one basis.
enum class BasisPolicy {
    strict,   // reject when off-basis energy exceeds 1e-6
    project,  // keep the diagonal of V^H R_k V (pinching); trace-preserving
};

/// Relative off-diagonal energy ||offdiag(V^H R V)||_F / ||R||_F.
double off_basis_energy(const CMatrix& V, const RMatrix& R);

/// Reduce per-user Kronecker correlations (R_k receive, T_k transmit) to a
/// UIU profile with sigma_k(i,j) = d_k^R(i) d_k^T(j). The shared receive basis
/// is the eigenbasis of the first R_k that is not a multiple of the identity.
/// Eigenvalues are sorted in decreasing order.
UiuProfile kronecker_to_uiu(const std::vector<RMatrix>& R, const std::vector<RMatrix>& T,
                            BasisPolicy policy = BasisPolicy::strict);

/// Convenience: exponential receive/transmit profiles per user.
UiuProfile exponential_profile(int n_t, int n_r, const std::vector<double>& r,
                               const std::vector<double>& t,
                               BasisPolicy policy = BasisPolicy::project);

/// sigma == 1 everywhere, identity bases.
UiuProfile iid_profile(int users, int n_t, int n_r);

struct ChannelSamples {
    std::vector<std::vector<CMatrix>> draws;   // draws[d][k] = H_k, n_r x n_t
    std::uint64_t seed = 0;

    int count() const { return static_cast<int>(draws.size()); }
};

/// Seed of the generator used for (draw, user). Each pair owns an independent
/// mt19937_64 stream seeded through splitmix64, so any subset of draws can be
/// produced in any order (or in parallel) with identical results.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t draw, std::uint64_t user);

/// Ht_k only (the independent-entry part), drawn from the (draw, user) stream.
CMatrix sample_inner(const UiuProfile& profile, int k, std::uint64_t seed, std::uint64_t draw);

ChannelSamples sample_channel(const UiuProfile& profile, int count, std::uint64_t seed);

} // namespace macpa

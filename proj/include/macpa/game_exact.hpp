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

#include "macpa/game.hpp"

#include <span>
#include <vector>

namespace macpa {

/// Monte-Carlo mean with its standard error; per-draw values are kept so
/// estimates on common draws can be differenced sample by sample.
struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::vector<double> per_draw;
};

McEstimate summarize(std::vector<double> per_draw);

using CovarianceSlice = std::vector<CMatrix>;   // [user], n_t x n_t

/// Q_k = W_k diag(P_k) W_k^H for every user.
CovarianceSlice covariances(const UiuProfile& profile, const PowerSlice& powers);

/// log2 |I + rho sum_{l in users} H_l Q_l H_l^H| for one draw.
double log2_det_sum(const std::vector<CMatrix>& H, const CovarianceSlice& Q, std::span<const int> users,
                    double rho);

// Raw (unnormalized) ergodic rates in bits/s/Hz.

McEstimate rate_sic_exact(const GameContext& ctx, const DecodingOrder& order, const CovarianceSlice& Q, int k,
                          const ChannelSamples& samples);
McEstimate rate_sic_exact(const GameContext& ctx, const DecodingOrder& order, const PowerSlice& powers, int k,
                          const ChannelSamples& samples);

McEstimate rate_sud_exact(const GameContext& ctx, const CovarianceSlice& Q, int k, const ChannelSamples& samples);
McEstimate rate_sud_exact(const GameContext& ctx, const PowerSlice& powers, int k, const ChannelSamples& samples);

/// sum_c p_c R_k^(c); SIC contexts are decoding orders, SUD has one context.
McEstimate utility_exact(const GameContext& ctx, const SpaceTimePowerProfile& powers, int k,
                         const ChannelSamples& samples);
/// utility_exact restricted to SIC coordination.
McEstimate utility_sic(const GameContext& ctx, const SpaceTimePowerProfile& powers, int k,
                       const ChannelSamples& samples);

/// Sum of all users' utilities, per draw.
McEstimate sum_rate_exact(const GameContext& ctx, const SpaceTimePowerProfile& powers,
                          const ChannelSamples& samples);

/// sum_i Tr{(A_i - B_i)[(sum_{j<=i} B_j)^-1 - (sum_{j<=i} A_j)^-1]}.
/// A_1, B_1 positive definite, the rest PSD; all Hermitian (else ModelError).
double trace_inequality_gap(const std::vector<CMatrix>& A, const std::vector<CMatrix>& B);

/// Monte-Carlo estimate of the diagonally-strict-concavity sum
/// sum_c p_c E F_c(H) between two strategy profiles (natural-log units).
McEstimate dsc_gap(const GameContext& ctx, const SpaceTimePowerProfile& first,
                   const SpaceTimePowerProfile& second, const ChannelSamples& samples);

/// d^2/dl^2 of R_k^(order)(l Q1 + (1 - l) Q2) with the other users' covariances
/// fixed (entry k of `others` is ignored). Per draw the value is
/// -(1/ln 2) Tr[A dQ A dQ] with A = rho H_k^H M^-1 H_k, dQ = Q1 - Q2.
McEstimate concavity_second_derivative(const GameContext& ctx, const DecodingOrder& order, int k,
                                       const CMatrix& Q1, const CMatrix& Q2, double lambda,
                                       const CovarianceSlice& others, const ChannelSamples& samples);

using ProfileGradient = std::vector<std::vector<std::vector<double>>>;   // [user][context][mode]

struct KktUserReport {
    double stationarity = 0.0;          // max |g - p_c lambda| over active modes
    double dual_feasibility = 0.0;      // max (g - p_c lambda)^+ over inactive modes
    double complementary_slackness = 0.0; // |lambda * slack|

    double max() const;
};

struct KktReport {
    std::vector<KktUserReport> users;
    double max_residual = 0.0;
};

/// KKT residuals of the per-user problems max u_k s.t. sum_c p_c sum_j P <= n_t Pbar_k.
/// `gradient` holds du_k/dP_k^(c)(j); modes with power above `active_tol`
/// count as active.
KktReport kkt_residual(const GameContext& ctx, const SpaceTimePowerProfile& powers,
                       const std::vector<double>& lambda, const ProfileGradient& gradient,
                       double active_tol = 1e-10);

} // namespace macpa

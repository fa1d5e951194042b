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
#include "macpa/game_exact.hpp"

#include <stdexcept>
#include <vector>

namespace macpa {

struct SolverConfig {
    double tol = 1e-10;       // max relative change per iteration
    int max_iter = 10000;
    double damping = 1.0;     // in (0, 1]; step length of the Picard fallback

    void validate() const;
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), residual_history(std::move(history)) {}
    std::vector<double> residual_history;
};

/// Solution of one coupled (gamma, delta) system over a block of users that
/// share the receiver. The block "load" s = |block| multiplies rho and divides
/// the variance sums:
///
///   gamma_l(j) = 1/(s n_t) sum_i sigma_l(i,j) / (1 + e_i)
///   e_i        = 1/(s n_t) sum_{r in block} sum_m sigma_r(i,m) delta_r(m)
///   delta_l(j) = s rho P_l(j) / (1 + s rho P_l(j) gamma_l(j))
///
/// For an interference-only block the same fields hold (phi, psi).
struct BlockSolution {
    std::vector<int> users;                  // block members, ascending
    double load = 0.0;
    std::vector<std::vector<double>> gamma;  // [member][mode]
    std::vector<std::vector<double>> delta;  // [member][mode]
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> residual_history;

    bool empty() const { return users.empty(); }
    /// Position of `user` inside the block, -1 when absent.
    int member(int user) const;
};

struct FixedPointSolution {
    BlockSolution signal;        // gamma/delta over the decoded user plus its interferers
    BlockSolution interference;  // phi/psi over the interferers only
};

/// Newton iteration on delta from delta = 0, falling back to a Picard step
/// when the line search fails. `warm`, when given and shaped like the block,
/// seeds delta. Throws ConvergenceError after cfg.max_iter iterations.
BlockSolution solve_block(const UiuProfile& profile, double rho, std::vector<int> users,
                          const PowerSlice& powers, const SolverConfig& cfg,
                          const BlockSolution* warm = nullptr);

/// Max relative mismatch when the stored solution is substituted back into
/// both right-hand sides.
double block_residual(const UiuProfile& profile, double rho, const BlockSolution& block,
                      const PowerSlice& powers);

/// Deterministic equivalent of (1/n_r) E log2|I + rho sum_{block} H_l Q_l H_l^H|.
double block_log_det(const UiuProfile& profile, double rho, const BlockSolution& block,
                     const PowerSlice& powers);

BlockSolution solve_sic_signal_fp(const UiuProfile& profile, double rho, const DecodingOrder& order, int k,
                                  const PowerSlice& powers, const SolverConfig& cfg = {});
/// Empty when k is decoded last.
BlockSolution solve_sic_interference_fp(const UiuProfile& profile, double rho, const DecodingOrder& order,
                                        int k, const PowerSlice& powers, const SolverConfig& cfg = {});

/// Large-system SIC rate of user k under `order`, normalized per receive
/// antenna (multiply by n_r, see denormalize, to compare with rate_sic_exact).
double approx_rate_sic(const UiuProfile& profile, double rho, const DecodingOrder& order, int k,
                       const PowerSlice& powers, const SolverConfig& cfg = {});

FixedPointSolution solve_sud_fps(const UiuProfile& profile, double rho, int k, const PowerSlice& powers,
                                 const SolverConfig& cfg = {});

/// Large-system SUD utility of user k, normalized per receive antenna.
double approx_utility_sud(const UiuProfile& profile, double rho, int k, const PowerSlice& powers,
                          const SolverConfig& cfg = {});

/// Normalized large-system rate of user k in context c of the game.
double approx_rate(const GameContext& ctx, int c, int k, const PowerSlice& powers, const SolverConfig& cfg = {});

/// sum_c p_c approx_rate(c), normalized.
double approx_utility(const GameContext& ctx, const SpaceTimePowerProfile& powers, int k,
                      const SolverConfig& cfg = {});

/// Sum of all users' approximated utilities, normalized.
double approx_sum_rate(const GameContext& ctx, const SpaceTimePowerProfile& powers, const SolverConfig& cfg = {});

/// d approx_utility_k / d P_k^(c)(j) for every user, context and mode:
/// p_c s rho gamma_k(j) / (n_r ln2 (1 + s rho P gamma_k(j))), with gamma from
/// the signal block of size s. Exact because the rate expression is stationary
/// in (gamma, delta) at the fixed point.
ProfileGradient utility_gradient(const GameContext& ctx, const SpaceTimePowerProfile& powers,
                                 const SolverConfig& cfg = {});

/// Bits/s/Hz per receive antenna -> bits/s/Hz.
inline double denormalize(double normalized_rate, const UiuProfile& profile)
{
    return normalized_rate * profile.n_r;
}

} // namespace macpa

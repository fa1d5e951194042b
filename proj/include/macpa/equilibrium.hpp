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
#include "macpa/large_system.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace macpa {

/// One transmit mode (context c, eigen-direction j) entering a water-filling.
/// `weight` is p_c (its cost in the averaged budget); `coefficient` is the
/// effective gain c = s rho gamma_k^(c)(j).
struct WeightedMode {
    int context = 0;
    int mode = 0;
    double weight = 1.0;
    double coefficient = 0.0;
};

struct WaterfillResult {
    std::vector<double> power;   // aligned with the input modes
    double lambda = 0.0;         // Lagrange multiplier of the budget
    double water_level = 0.0;    // 1 / (ln2 n_r lambda)
};

/// P = [1/(ln2 n_r lambda) - 1/c]^+ with lambda found by bisection so that
/// sum weight * P = budget to relative accuracy `rel_tol`. Modes with c = 0
/// get no power; throws ModelError if no mode with positive weight can carry power.
WaterfillResult waterfill(std::span<const WeightedMode> modes, double budget, int n_r, double rel_tol = 1e-12);

/// A group of modes that share one power variable x. Its marginal utility per
/// unit of budget is m(x) = sum_t w_t c_t / (1 + c_t x) (times 1/(n_r ln2)),
/// and x costs `cost` budget units.
struct PowerGroup {
    double cost = 1.0;
    std::vector<std::pair<double, double>> terms;   // (w_t, c_t)

    double marginal(double x) const;
};

struct GroupedWaterfillResult {
    std::vector<double> level;   // x_g per group
    double lambda = 0.0;
};

/// Solves m_g(x_g) = n_r ln2 lambda on active groups, x_g = 0 where m_g(0) is
/// below that, with sum cost_g x_g = budget. Reduces to `waterfill` for
/// single-term groups.
GroupedWaterfillResult grouped_waterfill(std::span<const PowerGroup> groups, double budget, int n_r,
                                         double rel_tol = 1e-12);

enum class PaMode {
    space_time,     // free P_k^(c)(j)
    spatial_only,   // one P_k(j) shared by every context
    temporal_only,  // P_k^(c)(j) = alpha_k^(c) Pbar_k, uniform over antennas
};

struct NeConfig {
    double outer_tol = 1e-8;        // max power change over a full round
    int max_rounds = 500;
    double bisection_tol = 1e-12;   // relative budget error of each water-filling
    PaMode pa_mode = PaMode::space_time;
    SolverConfig fixed_point{1e-12, 10000, 1.0};
    double inner_tol = 1e-11;       // best-response iteration tolerance
    int max_inner = 1000;
    std::optional<SpaceTimePowerProfile> initial;   // default: uniform
    bool reverse_cycle = false;     // visit users K..1 instead of 1..K

    void validate() const;
};

struct EquilibriumResult {
    SpaceTimePowerProfile powers;
    std::vector<double> lambda;
    std::vector<double> rates;        // approximated utilities, per receive antenna
    std::vector<double> slack;        // n_t Pbar_k - averaged trace
    double sum_rate = 0.0;            // per receive antenna
    int outer_iterations = 0;
    double last_round_change = 0.0;
    double kkt_residual = 0.0;
    bool converged = false;
};

/// Round-robin best responses until the largest power change over a round
/// drops below cfg.outer_tol. Each best response re-solves the user's signal
/// fixed points and water-fills jointly over all (context, mode) pairs,
/// iterating until its own powers settle. Never throws on non-convergence:
/// the last iterate comes back with converged = false.
EquilibriumResult best_response_ne(const UiuProfile& profile, double rho, const CoordinationDistribution& coord,
                                   const std::vector<double>& budgets, const NeConfig& cfg = {});

/// best_response_ne for pa_mode spatial_only or temporal_only.
EquilibriumResult constrained_ne(const UiuProfile& profile, double rho, const CoordinationDistribution& coord,
                                 const std::vector<double>& budgets, const NeConfig& cfg);

/// High-SNR equilibrium: P_k^(c)(j) = Pbar_k everywhere.
SpaceTimePowerProfile ne_high_snr(const CoordinationDistribution& coord, int n_t, const std::vector<double>& budgets);

/// Index of the strongest transmit mode, argmax_m sum_i sigma_k(i, m); ties
/// (to 1e-12 relative) go to the lowest index.
int strongest_mode(const UiuProfile& profile, int k);

/// Low-SNR equilibrium: every context puts n_t Pbar_k on the strongest mode.
SpaceTimePowerProfile ne_low_snr(const UiuProfile& profile, const std::vector<double>& budgets,
                                 const CoordinationDistribution& coord);

struct CapacityResult {
    double value = 0.0;             // per receive antenna
    PowerSlice powers;              // [user][mode]
    std::vector<double> lambda;
    int rounds = 0;
    bool converged = false;
};

/// Large-system sum-capacity: maximize the all-user log-det equivalent over
/// diagonal profiles with sum_j P_k(j) <= n_t Pbar_k, by cyclic per-user
/// water-filling.
CapacityResult sum_capacity(const UiuProfile& profile, double rho, const std::vector<double>& budgets,
                            const NeConfig& cfg = {});

/// ne_sum_rate / capacity; values in (1, 1 + 1e-6] are reported as 1, larger
/// ones throw (the two solves are inconsistent).
double sre(double ne_sum_rate, double capacity);

} // namespace macpa

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

#include "macpa/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace macpa {

namespace {

using BlockCache = std::vector<std::vector<BlockSolution>>;   // [user][context]

struct Game {
    GameContext ctx;
    const NeConfig& cfg;
    SpaceTimePowerProfile powers;
    BlockCache cache;

    int users() const { return ctx.profile.users(); }
    int n_t() const { return ctx.profile.n_t; }
    int contexts() const { return ctx.coord.contexts(); }

    // s rho gamma_k^(c)(j) at the current profile, per context.
    std::vector<std::vector<double>> coefficients(int k)
    {
        std::vector<std::vector<double>> out;
        for (int c = 0; c < contexts(); ++c) {
            auto members = ctx.coord.interferers(c, k);
            members.push_back(k);
            auto& slot = cache[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)];
            slot = solve_block(ctx.profile, ctx.rho, std::move(members), powers.context_slice(c), cfg.fixed_point,
                               slot.empty() ? nullptr : &slot);
            const auto& gamma = slot.gamma[static_cast<std::size_t>(slot.member(k))];
            std::vector<double> coef(gamma.size());
            for (std::size_t j = 0; j < gamma.size(); ++j)
                coef[j] = slot.load * ctx.rho * gamma[j];
            out.push_back(std::move(coef));
        }
        return out;
    }

    std::vector<PowerGroup> groups(const std::vector<std::vector<double>>& coef) const
    {
        std::vector<PowerGroup> g;
        const auto& coord = ctx.coord;
        switch (cfg.pa_mode) {
        case PaMode::space_time:
            for (int c = 0; c < contexts(); ++c)
                for (int j = 0; j < n_t(); ++j) {
                    PowerGroup grp;
                    grp.cost = coord.weight(c);
                    grp.terms.emplace_back(1.0, coef[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)]);
                    g.push_back(std::move(grp));
                }
            break;
        case PaMode::spatial_only:
            for (int j = 0; j < n_t(); ++j) {
                PowerGroup grp;
                grp.cost = 1.0;
                for (int c = 0; c < contexts(); ++c)
                    grp.terms.emplace_back(coord.weight(c), coef[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)]);
                g.push_back(std::move(grp));
            }
            break;
        case PaMode::temporal_only:
            for (int c = 0; c < contexts(); ++c) {
                PowerGroup grp;
                grp.cost = coord.weight(c) * n_t();
                for (int j = 0; j < n_t(); ++j)
                    grp.terms.emplace_back(1.0 / n_t(), coef[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)]);
                g.push_back(std::move(grp));
            }
            break;
        }
        return g;
    }

    std::vector<std::vector<double>> scatter(const std::vector<double>& level) const
    {
        std::vector<std::vector<double>> p(static_cast<std::size_t>(contexts()),
                                           std::vector<double>(static_cast<std::size_t>(n_t())));
        for (int c = 0; c < contexts(); ++c)
            for (int j = 0; j < n_t(); ++j) {
                std::size_t g = 0;
                switch (cfg.pa_mode) {
                case PaMode::space_time: g = static_cast<std::size_t>(c * n_t() + j); break;
                case PaMode::spatial_only: g = static_cast<std::size_t>(j); break;
                case PaMode::temporal_only: g = static_cast<std::size_t>(c); break;
                }
                p[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] = level[g];
            }
        return p;
    }

    // Largest per-entry change of user k's powers; iterated water-filling
    // against the user's own fixed points, damped if it starts to oscillate.
    double best_response(int k)
    {
        auto& current = powers.power[static_cast<std::size_t>(k)];
        const auto start = current;
        const double budget = n_t() * powers.budget[static_cast<std::size_t>(k)];
        double theta = 1.0;
        double previous = std::numeric_limits<double>::infinity();
        for (int it = 0; it < cfg.max_inner; ++it) {
            const auto grp = groups(coefficients(k));
            const auto proposal = scatter(grouped_waterfill(grp, budget, ctx.profile.n_r, cfg.bisection_tol).level);
            double change = 0.0;
            for (std::size_t c = 0; c < current.size(); ++c)
                for (std::size_t j = 0; j < current[c].size(); ++j)
                    change = std::max(change, std::abs(proposal[c][j] - current[c][j]));
            if (change > previous && theta > 1.0 / 64.0)
                theta *= 0.5;
            previous = change;
            for (std::size_t c = 0; c < current.size(); ++c)
                for (std::size_t j = 0; j < current[c].size(); ++j)
                    current[c][j] += theta * (proposal[c][j] - current[c][j]);
            if (change < cfg.inner_tol)
                break;
        }
        double moved = 0.0;
        for (std::size_t c = 0; c < current.size(); ++c)
            for (std::size_t j = 0; j < current[c].size(); ++j)
                moved = std::max(moved, std::abs(current[c][j] - start[c][j]));
        return moved;
    }

    // Multiplier implied by the user's water-filling at the current profile
    // and the matching stationarity residual in gradient units.
    std::pair<double, double> multiplier_and_residual(int k)
    {
        const auto grp = groups(coefficients(k));
        const double budget = n_t() * powers.budget[static_cast<std::size_t>(k)];
        const double lambda = grouped_waterfill(grp, budget, ctx.profile.n_r, cfg.bisection_tol).lambda;
        const double scale = 1.0 / (ctx.profile.n_r * std::log(2.0));
        const auto& current = powers.power[static_cast<std::size_t>(k)];
        double residual = 0.0;
        for (std::size_t g = 0; g < grp.size(); ++g) {
            double x = 0.0;
            switch (cfg.pa_mode) {
            case PaMode::space_time: x = current[g / static_cast<std::size_t>(n_t())][g % static_cast<std::size_t>(n_t())]; break;
            case PaMode::spatial_only: x = current.front()[g]; break;
            case PaMode::temporal_only: x = current[g].front(); break;
            }
            const double gap = grp[g].cost * (scale * grp[g].marginal(x) - lambda);
            residual = std::max(residual, x > 1e-10 ? std::abs(gap) : std::max(0.0, gap));
        }
        residual = std::max(residual, std::abs(lambda * powers.slack(k, ctx.coord, n_t())));
        return {lambda, residual};
    }
};

void check_budgets(const std::vector<double>& budgets, int users)
{
    if (static_cast<int>(budgets.size()) != users)
        throw ModelError("equilibrium: one budget per user required");
    for (double b : budgets)
        if (!(b > 0.0))
            throw ModelError("equilibrium: budgets must be positive");
}

EquilibriumResult solve_equilibrium(const UiuProfile& profile, double rho, const CoordinationDistribution& coord,
                                    const std::vector<double>& budgets, const NeConfig& cfg)
{
    cfg.validate();
    Game game{GameContext{profile, rho, coord}, cfg, {}, {}};
    game.ctx.validate();
    check_budgets(budgets, profile.users());

    game.powers = cfg.initial ? *cfg.initial : SpaceTimePowerProfile::uniform(coord, profile.n_t, budgets);
    game.powers.budget = budgets;
    if (game.powers.users() != profile.users())
        throw ModelError("equilibrium: initial profile has the wrong number of users");
    for (const auto& pk : game.powers.power)
        if (static_cast<int>(pk.size()) != coord.contexts())
            throw ModelError("equilibrium: initial profile has the wrong number of contexts");
    game.cache.assign(static_cast<std::size_t>(profile.users()),
                      std::vector<BlockSolution>(static_cast<std::size_t>(coord.contexts())));

    std::vector<int> cycle(static_cast<std::size_t>(profile.users()));
    std::iota(cycle.begin(), cycle.end(), 0);
    if (cfg.reverse_cycle)
        std::reverse(cycle.begin(), cycle.end());

    EquilibriumResult res;
    for (int round = 1; round <= cfg.max_rounds; ++round) {
        double change = 0.0;
        for (int k : cycle)
            change = std::max(change, game.best_response(k));
        res.outer_iterations = round;
        res.last_round_change = change;
        if (change < cfg.outer_tol) {
            res.converged = true;
            break;
        }
    }

    res.powers = game.powers;
    std::vector<double> grouped_residual;
    for (int k = 0; k < profile.users(); ++k) {
        const auto [lambda, residual] = game.multiplier_and_residual(k);
        res.lambda.push_back(lambda);
        grouped_residual.push_back(residual);
        res.rates.push_back(approx_utility(game.ctx, res.powers, k, cfg.fixed_point));
        res.slack.push_back(res.powers.slack(k, coord, profile.n_t));
    }
    res.sum_rate = std::accumulate(res.rates.begin(), res.rates.end(), 0.0);
    if (cfg.pa_mode == PaMode::space_time) {
        const auto grad = utility_gradient(game.ctx, res.powers, cfg.fixed_point);
        res.kkt_residual = kkt_residual(game.ctx, res.powers, res.lambda, grad).max_residual;
    } else {
        res.kkt_residual = *std::max_element(grouped_residual.begin(), grouped_residual.end());
    }
    return res;
}

} // namespace

void NeConfig::validate() const
{
    if (!(outer_tol > 0.0) || !(bisection_tol > 0.0) || !(inner_tol > 0.0) || max_rounds < 1 || max_inner < 1)
        throw ModelError("equilibrium config: tolerances must be positive and iteration caps >= 1");
    fixed_point.validate();
}

EquilibriumResult best_response_ne(const UiuProfile& profile, double rho, const CoordinationDistribution& coord,
                                   const std::vector<double>& budgets, const NeConfig& cfg)
{
    return solve_equilibrium(profile, rho, coord, budgets, cfg);
}

EquilibriumResult constrained_ne(const UiuProfile& profile, double rho, const CoordinationDistribution& coord,
                                 const std::vector<double>& budgets, const NeConfig& cfg)
{
    if (cfg.pa_mode == PaMode::space_time)
        throw ModelError("constrained_ne: pa_mode must be spatial_only or temporal_only");
    return solve_equilibrium(profile, rho, coord, budgets, cfg);
}

SpaceTimePowerProfile ne_high_snr(const CoordinationDistribution& coord, int n_t, const std::vector<double>& budgets)
{
    return SpaceTimePowerProfile::uniform(coord, n_t, budgets);
}

int strongest_mode(const UiuProfile& profile, int k)
{
    int best = 0;
    double best_sum = profile.column_sum(k, 0);
    for (int j = 1; j < profile.n_t; ++j) {
        const double s = profile.column_sum(k, j);
        if (s > best_sum * (1.0 + 1e-12) && s > best_sum) {
            best = j;
            best_sum = s;
        }
    }
    return best;
}

SpaceTimePowerProfile ne_low_snr(const UiuProfile& profile, const std::vector<double>& budgets,
                                 const CoordinationDistribution& coord)
{
    check_budgets(budgets, profile.users());
    auto p = SpaceTimePowerProfile::uniform(coord, profile.n_t, budgets);
    for (int k = 0; k < profile.users(); ++k) {
        const int best = strongest_mode(profile, k);
        for (auto& ctx : p.power[static_cast<std::size_t>(k)]) {
            std::fill(ctx.begin(), ctx.end(), 0.0);
            ctx[static_cast<std::size_t>(best)] = profile.n_t * budgets[static_cast<std::size_t>(k)];
        }
    }
    return p;
}

CapacityResult sum_capacity(const UiuProfile& profile, double rho, const std::vector<double>& budgets,
                            const NeConfig& cfg)
{
    // Each user's best response under single-user decoding water-fills
    // against the all-user block, which is exactly the coordinate-ascent step
    // of the (concave) all-user log-det objective.
    NeConfig team = cfg;
    team.pa_mode = PaMode::space_time;
    if (team.initial && static_cast<int>(team.initial->power.front().size()) != 1)
        team.initial.reset();
    const auto coord = CoordinationDistribution::sud(profile.users());
    const auto ne = solve_equilibrium(profile, rho, coord, budgets, team);

    CapacityResult out;
    out.powers = ne.powers.context_slice(0);
    out.lambda = ne.lambda;
    out.rounds = ne.outer_iterations;
    out.converged = ne.converged;
    std::vector<int> all(static_cast<std::size_t>(profile.users()));
    std::iota(all.begin(), all.end(), 0);
    const auto block = solve_block(profile, rho, all, out.powers, cfg.fixed_point);
    out.value = block_log_det(profile, rho, block, out.powers);
    return out;
}

double sre(double ne_sum_rate, double capacity)
{
    if (!(capacity > 0.0))
        throw ModelError("sre: capacity must be positive");
    const double ratio = ne_sum_rate / capacity;
    if (ratio > 1.0 + 1e-6)
        throw ModelError("sre: NE sum-rate exceeds capacity (ratio " + std::to_string(ratio) + ")");
    return std::min(ratio, 1.0);
}

} // namespace macpa

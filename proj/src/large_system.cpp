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

#include "macpa/large_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace macpa {

namespace {

const double kLog2e = 1.0 / std::log(2.0);

double rel_change(double next, double prev)
{
    return std::abs(next - prev) / std::max(1.0, std::abs(next));
}

struct BlockMaps {
    const UiuProfile& profile;
    double rho;
    const std::vector<int>& users;
    double load;
    const PowerSlice& powers;

    double power(std::size_t m, int j) const
    {
        return powers[static_cast<std::size_t>(users[m])][static_cast<std::size_t>(j)];
    }
    const RMatrix& sigma(std::size_t m) const { return profile.sigma[static_cast<std::size_t>(users[m])]; }

    // e_i for every receive index
    RVector receive_terms(const std::vector<std::vector<double>>& delta) const
    {
        RVector e = RVector::Zero(profile.n_r);
        for (std::size_t m = 0; m < users.size(); ++m) {
            const Eigen::Map<const RVector> d(delta[m].data(), profile.n_t);
            e.noalias() += sigma(m) * d;
        }
        return e / (load * profile.n_t);
    }

    std::vector<std::vector<double>> gamma_of(const std::vector<std::vector<double>>& delta) const
    {
        const RVector one_plus_e_inv = (receive_terms(delta).array() + 1.0).inverse().matrix();
        std::vector<std::vector<double>> gamma(users.size(), std::vector<double>(static_cast<std::size_t>(profile.n_t)));
        for (std::size_t m = 0; m < users.size(); ++m) {
            const RVector g = sigma(m).transpose() * one_plus_e_inv / (load * profile.n_t);
            for (int j = 0; j < profile.n_t; ++j)
                gamma[m][static_cast<std::size_t>(j)] = g(j);
        }
        return gamma;
    }

    std::vector<std::vector<double>> delta_of(const std::vector<std::vector<double>>& gamma) const
    {
        std::vector<std::vector<double>> delta(users.size(), std::vector<double>(static_cast<std::size_t>(profile.n_t)));
        for (std::size_t m = 0; m < users.size(); ++m)
            for (int j = 0; j < profile.n_t; ++j) {
                const double a = load * rho * power(m, j);
                delta[m][static_cast<std::size_t>(j)] = a / (1.0 + a * gamma[m][static_cast<std::size_t>(j)]);
            }
        return delta;
    }
};

void check_powers(const UiuProfile& profile, const PowerSlice& powers, const std::vector<int>& users)
{
    if (static_cast<int>(powers.size()) != profile.users())
        throw ModelError("large system: one power vector per user required");
    for (int u : users) {
        const auto& p = powers[static_cast<std::size_t>(u)];
        if (static_cast<int>(p.size()) != profile.n_t)
            throw ModelError("large system: power vector length must be n_t");
        for (double v : p)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw ModelError("large system: powers must be finite and nonnegative");
    }
}

std::vector<int> others_of(int users, int k)
{
    std::vector<int> out;
    for (int l = 0; l < users; ++l)
        if (l != k)
            out.push_back(l);
    return out;
}

} // namespace

void SolverConfig::validate() const
{
    if (!(tol > 0.0) || max_iter < 1 || !(damping > 0.0 && damping <= 1.0))
        throw ModelError("solver config: need tol > 0, max_iter >= 1, damping in (0, 1]");
}

int BlockSolution::member(int user) const
{
    const auto it = std::find(users.begin(), users.end(), user);
    return it == users.end() ? -1 : static_cast<int>(it - users.begin());
}

BlockSolution solve_block(const UiuProfile& profile, double rho, std::vector<int> users,
                          const PowerSlice& powers, const SolverConfig& cfg, const BlockSolution* warm)
{
    cfg.validate();
    std::sort(users.begin(), users.end());
    check_powers(profile, powers, users);

    BlockSolution sol;
    sol.users = users;
    sol.load = static_cast<double>(users.size());
    if (users.empty())
        return sol;

    const BlockMaps maps{profile, rho, sol.users, sol.load, powers};
    std::vector<std::vector<double>> delta(users.size(), std::vector<double>(static_cast<std::size_t>(profile.n_t), 0.0));
    if (warm && warm->users == sol.users && warm->delta.size() == delta.size())
        delta = warm->delta;

    // Damped Newton on delta - D(G(delta)) with a Picard fallback. Plain
    // Picard is monotone from delta = 0 but crawls when the block is
    // critically loaded at high SNR.
    const std::size_t n_t = static_cast<std::size_t>(profile.n_t);
    const Eigen::Index dim = static_cast<Eigen::Index>(users.size() * n_t);
    const auto flatten = [&](const std::vector<std::vector<double>>& v) {
        RVector x(dim);
        for (std::size_t m = 0; m < v.size(); ++m)
            for (std::size_t j = 0; j < n_t; ++j)
                x(static_cast<Eigen::Index>(m * n_t + j)) = v[m][j];
        return x;
    };
    const auto unflatten = [&](const RVector& x) {
        std::vector<std::vector<double>> v(users.size(), std::vector<double>(n_t));
        for (std::size_t m = 0; m < v.size(); ++m)
            for (std::size_t j = 0; j < n_t; ++j)
                v[m][j] = x(static_cast<Eigen::Index>(m * n_t + j));
        return v;
    };
    const auto image = [&](const RVector& x) { return flatten(maps.delta_of(maps.gamma_of(unflatten(x)))); };
    const auto residual_of = [](const RVector& x, const RVector& g) {
        double r = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i)
            r = std::max(r, rel_change(g(i), x(i)));
        return r;
    };

    RVector x = flatten(delta);
    RVector g = image(x);
    double residual = residual_of(x, g);
    for (int it = 1; it <= cfg.max_iter; ++it) {
        sol.residual_history.push_back(residual);
        if (residual < cfg.tol) {
            sol.gamma = maps.gamma_of(unflatten(x));
            sol.delta = maps.delta_of(sol.gamma);
            sol.iterations = it;
            sol.residual = residual;
            return sol;
        }

        // J = I - diag(delta^2) M, M = dG/ddelta up to sign
        const RVector e = maps.receive_terms(unflatten(g));
        const RVector w = (e.array() + 1.0).square().inverse().matrix() / std::pow(sol.load * profile.n_t, 2);
        RMatrix S(profile.n_r, dim);
        for (std::size_t m = 0; m < users.size(); ++m)
            S.middleCols(static_cast<Eigen::Index>(m * n_t), profile.n_t) = maps.sigma(m);
        RMatrix J = -(g.array().square().matrix().asDiagonal() * (S.transpose() * w.asDiagonal() * S));
        J.diagonal().array() += 1.0;
        const RVector f = g - x;
        const RVector newton = J.partialPivLu().solve(f);

        RVector next = g;
        RVector next_image;
        double next_residual = std::numeric_limits<double>::infinity();
        if (newton.allFinite()) {
            double step = 1.0;
            for (int ls = 0; ls < 30; ++ls, step *= 0.5) {
                const RVector trial = x + step * newton;
                if ((trial.array() < 0.0).any())
                    continue;
                const RVector trial_image = image(trial);
                const double r = residual_of(trial, trial_image);
                if (r < residual) {
                    next = trial;
                    next_image = trial_image;
                    next_residual = r;
                    break;
                }
            }
        }
        if (!std::isfinite(next_residual)) {
            next = x + cfg.damping * f;
            next_image = image(next);
            next_residual = residual_of(next, next_image);
        }
        x = next;
        g = next_image;
        residual = next_residual;
    }
    throw ConvergenceError("fixed point did not converge within " + std::to_string(cfg.max_iter) +
                               " iterations (residual " + std::to_string(sol.residual_history.empty() ? 0.0 : sol.residual_history.back()) + ")",
                           sol.residual_history);
}

double block_residual(const UiuProfile& profile, double rho, const BlockSolution& block, const PowerSlice& powers)
{
    if (block.empty())
        return 0.0;
    const BlockMaps maps{profile, rho, block.users, block.load, powers};
    const auto gamma = maps.gamma_of(block.delta);
    const auto delta = maps.delta_of(block.gamma);
    double r = 0.0;
    for (std::size_t m = 0; m < block.users.size(); ++m)
        for (std::size_t j = 0; j < gamma[m].size(); ++j)
            r = std::max({r, rel_change(gamma[m][j], block.gamma[m][j]), rel_change(delta[m][j], block.delta[m][j])});
    return r;
}

double block_log_det(const UiuProfile& profile, double rho, const BlockSolution& block, const PowerSlice& powers)
{
    if (block.empty())
        return 0.0;
    const BlockMaps maps{profile, rho, block.users, block.load, powers};
    double acc = 0.0;
    for (std::size_t m = 0; m < block.users.size(); ++m)
        for (int j = 0; j < profile.n_t; ++j) {
            const double g = block.gamma[m][static_cast<std::size_t>(j)];
            const double d = block.delta[m][static_cast<std::size_t>(j)];
            acc += std::log2(1.0 + block.load * rho * maps.power(m, j) * g);
            acc -= g * d * kLog2e;
        }
    const RVector e = maps.receive_terms(block.delta);
    for (int i = 0; i < profile.n_r; ++i)
        acc += std::log2(1.0 + e(i));
    return acc / profile.n_r;
}

BlockSolution solve_sic_signal_fp(const UiuProfile& profile, double rho, const DecodingOrder& order, int k,
                                  const PowerSlice& powers, const SolverConfig& cfg)
{
    auto users = order.decoded_after(k);
    users.push_back(k);
    return solve_block(profile, rho, std::move(users), powers, cfg);
}

BlockSolution solve_sic_interference_fp(const UiuProfile& profile, double rho, const DecodingOrder& order,
                                        int k, const PowerSlice& powers, const SolverConfig& cfg)
{
    return solve_block(profile, rho, order.decoded_after(k), powers, cfg);
}

double approx_rate_sic(const UiuProfile& profile, double rho, const DecodingOrder& order, int k,
                       const PowerSlice& powers, const SolverConfig& cfg)
{
    const auto signal = solve_sic_signal_fp(profile, rho, order, k, powers, cfg);
    const auto interference = solve_sic_interference_fp(profile, rho, order, k, powers, cfg);
    return block_log_det(profile, rho, signal, powers) - block_log_det(profile, rho, interference, powers);
}

FixedPointSolution solve_sud_fps(const UiuProfile& profile, double rho, int k, const PowerSlice& powers,
                                 const SolverConfig& cfg)
{
    auto others = others_of(profile.users(), k);
    FixedPointSolution fp;
    fp.interference = solve_block(profile, rho, others, powers, cfg);
    others.push_back(k);
    fp.signal = solve_block(profile, rho, std::move(others), powers, cfg);
    return fp;
}

double approx_utility_sud(const UiuProfile& profile, double rho, int k, const PowerSlice& powers,
                          const SolverConfig& cfg)
{
    const auto fp = solve_sud_fps(profile, rho, k, powers, cfg);
    return block_log_det(profile, rho, fp.signal, powers) - block_log_det(profile, rho, fp.interference, powers);
}

double approx_rate(const GameContext& ctx, int c, int k, const PowerSlice& powers, const SolverConfig& cfg)
{
    auto interferers = ctx.coord.interferers(c, k);
    const auto interference = solve_block(ctx.profile, ctx.rho, interferers, powers, cfg);
    interferers.push_back(k);
    const auto signal = solve_block(ctx.profile, ctx.rho, std::move(interferers), powers, cfg);
    return block_log_det(ctx.profile, ctx.rho, signal, powers) -
           block_log_det(ctx.profile, ctx.rho, interference, powers);
}

double approx_utility(const GameContext& ctx, const SpaceTimePowerProfile& powers, int k, const SolverConfig& cfg)
{
    double acc = 0.0;
    for (int c = 0; c < ctx.coord.contexts(); ++c)
        if (ctx.coord.weight(c) > 0.0)
            acc += ctx.coord.weight(c) * approx_rate(ctx, c, k, powers.context_slice(c), cfg);
    return acc;
}

double approx_sum_rate(const GameContext& ctx, const SpaceTimePowerProfile& powers, const SolverConfig& cfg)
{
    double acc = 0.0;
    for (int k = 0; k < ctx.profile.users(); ++k)
        acc += approx_utility(ctx, powers, k, cfg);
    return acc;
}

ProfileGradient utility_gradient(const GameContext& ctx, const SpaceTimePowerProfile& powers,
                                 const SolverConfig& cfg)
{
    const int K = ctx.profile.users();
    const double n_r = ctx.profile.n_r;
    ProfileGradient grad(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        for (int c = 0; c < ctx.coord.contexts(); ++c) {
            const auto slice = powers.context_slice(c);
            auto users = ctx.coord.interferers(c, k);
            users.push_back(k);
            const auto block = solve_block(ctx.profile, ctx.rho, std::move(users), slice, cfg);
            const auto& gamma = block.gamma[static_cast<std::size_t>(block.member(k))];
            std::vector<double> g(gamma.size());
            for (std::size_t j = 0; j < g.size(); ++j) {
                const double coef = block.load * ctx.rho * gamma[j];
                g[j] = ctx.coord.weight(c) * coef / (n_r * std::log(2.0) * (1.0 + coef * slice[static_cast<std::size_t>(k)][j]));
            }
            grad[static_cast<std::size_t>(k)].push_back(std::move(g));
        }
    }
    return grad;
}

} // namespace macpa

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

#include "macpa/experiments.hpp"

#include "macpa/game_exact.hpp"
#include "macpa/large_system.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>

namespace macpa {

namespace {

CMatrix random_psd(int n, int rank, std::mt19937_64& gen)
{
    std::normal_distribution<double> g;
    CMatrix G(n, rank);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < rank; ++j)
            G(i, j) = Complex(g(gen), g(gen));
    return G * G.adjoint();
}

struct Check {
    const char* name;
    std::function<bool(std::ostream&)> run;
};

bool trace_inequality(std::ostream& detail)
{
    std::mt19937_64 gen(11);
    std::uniform_int_distribution<int> pick_k(1, 4), pick_n(1, 6);
    double worst = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const int K = pick_k(gen);
        const int n = pick_n(gen);
        std::vector<CMatrix> A, B;
        for (int i = 0; i < K; ++i) {
            A.push_back(random_psd(n, i == 0 ? n : 1 + trial % n, gen));
            B.push_back(random_psd(n, i == 0 ? n : 1 + (trial + 1) % n, gen));
        }
        A[0] += CMatrix::Identity(n, n);
        B[0] += CMatrix::Identity(n, n);
        worst = std::min(worst, trace_inequality_gap(A, B));
    }
    detail << "min gap " << worst;
    return worst >= -1e-10;
}

bool waterfill_levels(std::ostream& detail)
{
    std::mt19937_64 gen(12);
    std::uniform_real_distribution<double> u(0.01, 10.0);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<WeightedMode> modes;
        for (int j = 0; j < 6; ++j)
            modes.push_back({0, j, 1.0, u(gen)});
        const double budget = u(gen);
        const auto wf = waterfill(modes, budget, 4);
        double used = 0.0;
        for (std::size_t j = 0; j < modes.size(); ++j) {
            used += wf.power[j];
            const double gap = wf.water_level - 1.0 / modes[j].coefficient;
            worst = std::max(worst, wf.power[j] > 0.0 ? std::abs(wf.power[j] - gap) : std::max(0.0, gap));
        }
        worst = std::max(worst, std::abs(used - budget) / budget);
    }
    detail << "max level error " << worst;
    return worst < 1e-9;
}

bool telescoping(std::ostream& detail)
{
    const auto profile = exponential_profile(3, 4, {0.5, 0.2, 0.7}, {0.4, 0.1, 0.6});
    const auto samples = sample_channel(profile, 50, 13);
    const GameContext ctx{profile, 2.0, CoordinationDistribution::sic_uniform(3)};
    const PowerSlice p{{1.0, 2.0, 0.5}, {0.3, 0.3, 0.3}, {2.0, 0.1, 1.0}};
    const auto Q = covariances(profile, p);
    const auto order = DecodingOrder::from_sequence({2, 0, 1});
    double worst = 0.0;
    for (int d = 0; d < samples.count(); ++d) {
        ChannelSamples one{{samples.draws[static_cast<std::size_t>(d)]}, 0};
        double sum = 0.0;
        for (int k = 0; k < 3; ++k)
            sum += rate_sic_exact(ctx, order, Q, k, one).mean;
        const double joint = log2_det_sum(one.draws[0], Q, std::vector<int>{0, 1, 2}, ctx.rho);
        worst = std::max(worst, std::abs(sum - joint));
    }
    detail << "max mismatch " << worst;
    return worst < 1e-9;
}

bool gradient(std::ostream& detail)
{
    const auto profile = exponential_profile(3, 5, {0.5, 0.2}, {0.6, 0.3});
    const GameContext ctx{profile, 1.5, CoordinationDistribution::two_user(0.3)};
    std::mt19937_64 gen(14);
    auto powers = SpaceTimePowerProfile::random(ctx.coord, 3, {1.0, 2.0}, gen);
    const SolverConfig fp{1e-13, 10000, 1.0};
    const auto grad = utility_gradient(ctx, powers, fp);
    double worst = 0.0;
    const double h = 1e-5;
    for (int k = 0; k < 2; ++k)
        for (int c = 0; c < 2; ++c)
            for (int j = 0; j < 3; ++j) {
                auto up = powers;
                auto dn = powers;
                up.power[k][c][j] += h;
                dn.power[k][c][j] -= h;
                const double fd = (approx_utility(ctx, up, k, fp) - approx_utility(ctx, dn, k, fp)) / (2 * h);
                worst = std::max(worst, std::abs(fd - grad[k][c][j]));
            }
    detail << "max deviation " << worst;
    return worst < 1e-7;
}

bool equilibrium(std::ostream& detail)
{
    const auto profile = exponential_profile(4, 6, {0.5, 0.2}, {0.5, 0.2});
    const auto coord = CoordinationDistribution::two_user(0.5);
    const auto a = best_response_ne(profile, 2.0, coord, {1.0, 2.0});
    std::mt19937_64 gen(15);
    NeConfig cfg;
    cfg.initial = SpaceTimePowerProfile::random(coord, 4, {1.0, 2.0}, gen);
    cfg.reverse_cycle = true;
    const auto b = best_response_ne(profile, 2.0, coord, {1.0, 2.0}, cfg);
    double diff = 0.0;
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t c = 0; c < 2; ++c)
            for (std::size_t j = 0; j < 4; ++j)
                diff = std::max(diff, std::abs(a.powers.power[k][c][j] - b.powers.power[k][c][j]));
    const auto cap = sum_capacity(profile, 2.0, {1.0, 2.0});
    detail << "start spread " << diff << ", kkt " << a.kkt_residual << ", sre " << a.sum_rate / cap.value;
    return a.converged && b.converged && diff < 1e-6 && a.kkt_residual < 1e-6 && a.sum_rate <= cap.value * (1 + 1e-6);
}

} // namespace

int run_selftest(std::ostream& out)
{
    const Check checks[] = {
        {"trace inequality", trace_inequality},
        {"water-filling levels", waterfill_levels},
        {"sic telescoping", telescoping},
        {"utility gradient", gradient},
        {"equilibrium", equilibrium},
    };
    int failures = 0;
    for (const auto& c : checks) {
        std::ostringstream detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail << "threw: " << e.what();
        }
        failures += ok ? 0 : 1;
        out << (ok ? "PASS " : "FAIL ") << c.name << " (" << detail.str() << ")\n";
    }
    return failures;
}

} // namespace macpa

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

#include "macpa/game.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace macpa {

DecodingOrder::DecodingOrder(std::vector<int> rank)
    : rank_(std::move(rank)), inverse_(rank_.size(), -1)
{
    const int K = static_cast<int>(rank_.size());
    for (int k = 0; k < K; ++k) {
        const int r = rank_[static_cast<std::size_t>(k)];
        if (r < 0 || r >= K || inverse_[static_cast<std::size_t>(r)] != -1)
            throw ModelError("decoding order: ranks must form a permutation of 0..K-1");
        inverse_[static_cast<std::size_t>(r)] = k;
    }
}

DecodingOrder DecodingOrder::from_sequence(const std::vector<int>& users_first_to_last)
{
    const int K = static_cast<int>(users_first_to_last.size());
    std::vector<int> rank(static_cast<std::size_t>(K), -1);
    for (int r = 0; r < K; ++r) {
        const int k = users_first_to_last[static_cast<std::size_t>(r)];
        if (k < 0 || k >= K)
            throw ModelError("decoding order: user index out of range");
        rank[static_cast<std::size_t>(k)] = r;
    }
    return DecodingOrder(rank);
}

std::vector<DecodingOrder> DecodingOrder::all(int users)
{
    std::vector<int> seq(static_cast<std::size_t>(users));
    std::iota(seq.begin(), seq.end(), 0);
    std::vector<DecodingOrder> out;
    do {
        out.push_back(from_sequence(seq));
    } while (std::next_permutation(seq.begin(), seq.end()));
    return out;
}

std::vector<int> DecodingOrder::decoded_after(int k) const
{
    std::vector<int> out;
    for (int r = rank(k) + 1; r < users(); ++r)
        out.push_back(user_at(r));
    std::sort(out.begin(), out.end());
    return out;
}

CoordinationDistribution CoordinationDistribution::sud(int users)
{
    if (users < 1)
        throw ModelError("coordination: need at least one user");
    CoordinationDistribution c;
    c.mode_ = Decoding::sud;
    c.users_ = users;
    c.probs_ = {1.0};
    return c;
}

CoordinationDistribution CoordinationDistribution::sic(std::vector<DecodingOrder> orders,
                                                       std::vector<double> probs)
{
    if (orders.empty() || orders.size() != probs.size())
        throw ModelError("coordination: one probability per decoding order required");
    const int K = orders.front().users();
    double total = 0.0;
    for (std::size_t i = 0; i < orders.size(); ++i) {
        if (orders[i].users() != K)
            throw ModelError("coordination: decoding orders disagree on the number of users");
        if (!(probs[i] >= 0.0))
            throw ModelError("coordination: probabilities must be nonnegative");
        total += probs[i];
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw ModelError("coordination: probabilities must sum to 1 (got " + std::to_string(total) + ")");
    CoordinationDistribution c;
    c.mode_ = Decoding::sic;
    c.users_ = K;
    c.orders_ = std::move(orders);
    c.probs_ = std::move(probs);
    return c;
}

CoordinationDistribution CoordinationDistribution::sic_uniform(int users)
{
    auto orders = DecodingOrder::all(users);
    std::vector<double> probs(orders.size(), 1.0 / static_cast<double>(orders.size()));
    return sic(std::move(orders), std::move(probs));
}

CoordinationDistribution CoordinationDistribution::fixed_order(const DecodingOrder& order)
{
    return sic({order}, {1.0});
}

CoordinationDistribution CoordinationDistribution::two_user(double p)
{
    if (!(p >= 0.0 && p <= 1.0))
        throw ModelError("coordination: p must lie in [0, 1]");
    return sic({DecodingOrder::from_sequence({0, 1}), DecodingOrder::from_sequence({1, 0})}, {1.0 - p, p});
}

std::vector<int> CoordinationDistribution::interferers(int c, int k) const
{
    if (mode_ == Decoding::sic)
        return order(c).decoded_after(k);
    std::vector<int> out;
    for (int l = 0; l < users_; ++l)
        if (l != k)
            out.push_back(l);
    return out;
}

SpaceTimePowerProfile SpaceTimePowerProfile::uniform(const CoordinationDistribution& coord, int n_t,
                                                     const std::vector<double>& budgets)
{
    if (static_cast<int>(budgets.size()) != coord.users())
        throw ModelError("power profile: one budget per user required");
    SpaceTimePowerProfile p;
    p.budget = budgets;
    p.power.resize(budgets.size());
    for (std::size_t k = 0; k < budgets.size(); ++k)
        p.power[k].assign(static_cast<std::size_t>(coord.contexts()),
                          std::vector<double>(static_cast<std::size_t>(n_t), budgets[k]));
    return p;
}

SpaceTimePowerProfile SpaceTimePowerProfile::random(const CoordinationDistribution& coord, int n_t,
                                                    const std::vector<double>& budgets, std::mt19937_64& gen)
{
    std::uniform_real_distribution<double> unif(0.05, 1.0);
    auto p = uniform(coord, n_t, budgets);
    for (int k = 0; k < p.users(); ++k) {
        for (auto& ctx : p.power[static_cast<std::size_t>(k)])
            for (double& v : ctx)
                v = unif(gen);
        const double scale = n_t * budgets[static_cast<std::size_t>(k)] / p.averaged_trace(k, coord);
        for (auto& ctx : p.power[static_cast<std::size_t>(k)])
            for (double& v : ctx)
                v *= scale;
    }
    return p;
}

double SpaceTimePowerProfile::averaged_trace(int k, const CoordinationDistribution& coord) const
{
    double acc = 0.0;
    const auto& pk = power[static_cast<std::size_t>(k)];
    for (int c = 0; c < coord.contexts(); ++c) {
        const auto& v = pk[static_cast<std::size_t>(c)];
        acc += coord.weight(c) * std::accumulate(v.begin(), v.end(), 0.0);
    }
    return acc;
}

double SpaceTimePowerProfile::slack(int k, const CoordinationDistribution& coord, int n_t) const
{
    return n_t * budget[static_cast<std::size_t>(k)] - averaged_trace(k, coord);
}

bool SpaceTimePowerProfile::feasible(const CoordinationDistribution& coord, int n_t, double tol) const
{
    for (int k = 0; k < users(); ++k) {
        for (const auto& ctx : power[static_cast<std::size_t>(k)])
            for (double v : ctx)
                if (v < 0.0)
                    return false;
        if (slack(k, coord, n_t) < -tol)
            return false;
    }
    return true;
}

PowerSlice SpaceTimePowerProfile::context_slice(int c) const
{
    PowerSlice out;
    out.reserve(power.size());
    for (const auto& pk : power)
        out.push_back(pk[static_cast<std::size_t>(c)]);
    return out;
}

void GameContext::validate() const
{
    profile.validate();
    if (!(rho > 0.0))
        throw ModelError("game: rho must be positive");
    if (coord.users() != profile.users())
        throw ModelError("game: coordination and profile disagree on the number of users");
}

} // namespace macpa

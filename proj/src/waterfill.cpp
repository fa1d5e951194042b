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

namespace macpa {

namespace {

// Root of m(x) = mu for x >= 0. m is convex and decreasing, so Newton from
// the left never overshoots.
double group_level(const PowerGroup& g, double mu)
{
    if (g.marginal(0.0) <= mu)
        return 0.0;
    if (g.terms.size() == 1) {
        const auto [w, c] = g.terms.front();
        return std::max(0.0, w / mu - 1.0 / c);
    }
    double x = 0.0;
    for (int it = 0; it < 200; ++it) {
        double f = -mu;
        double df = 0.0;
        for (const auto& [w, c] : g.terms) {
            if (w <= 0.0 || c <= 0.0)
                continue;
            const double q = 1.0 + c * x;
            f += w * c / q;
            df -= w * c * c / (q * q);
        }
        if (df >= 0.0)
            break;
        const double step = -f / df;
        x += step;
        if (std::abs(step) <= 1e-15 * std::max(1.0, x))
            break;
    }
    return x;
}

} // namespace

double PowerGroup::marginal(double x) const
{
    double m = 0.0;
    for (const auto& [w, c] : terms)
        if (w > 0.0 && c > 0.0)
            m += w * c / (1.0 + c * x);
    return m;
}

GroupedWaterfillResult grouped_waterfill(std::span<const PowerGroup> groups, double budget, int n_r,
                                         double rel_tol)
{
    if (!(budget > 0.0) || n_r < 1)
        throw ModelError("water-filling: budget must be positive and n_r >= 1");

    double mu_hi = 0.0;
    for (const auto& g : groups)
        if (g.cost > 0.0)
            mu_hi = std::max(mu_hi, g.marginal(0.0));
    if (!(mu_hi > 0.0))
        throw ModelError("water-filling: no transmittable mode (all coefficients zero)");

    auto total = [&](double mu) {
        double t = 0.0;
        for (const auto& g : groups)
            if (g.cost > 0.0)
                t += g.cost * group_level(g, mu);
        return t;
    };

    double mu_lo = mu_hi;
    for (int it = 0; it < 4000 && total(mu_lo) < budget; ++it)
        mu_lo *= 0.5;

    double mu = mu_lo;
    for (int it = 0; it < 500; ++it) {
        mu = std::sqrt(mu_lo * mu_hi);
        const double t = total(mu);
        if (std::abs(t - budget) <= rel_tol * budget)
            break;
        if (t > budget)
            mu_lo = mu;
        else
            mu_hi = mu;
        if (mu_hi / mu_lo - 1.0 < 4.0 * std::numeric_limits<double>::epsilon())
            break;
    }

    GroupedWaterfillResult out;
    out.level.reserve(groups.size());
    for (const auto& g : groups)
        out.level.push_back(group_level(g, mu));
    out.lambda = mu / (n_r * std::log(2.0));
    return out;
}

WaterfillResult waterfill(std::span<const WeightedMode> modes, double budget, int n_r, double rel_tol)
{
    std::vector<PowerGroup> groups;
    groups.reserve(modes.size());
    for (const auto& m : modes) {
        if (m.weight < 0.0 || m.coefficient < 0.0)
            throw ModelError("water-filling: weights and coefficients must be nonnegative");
        PowerGroup g;
        g.cost = m.weight;
        if (m.coefficient > 0.0)
            g.terms.emplace_back(1.0, m.coefficient);
        groups.push_back(std::move(g));
    }
    const auto r = grouped_waterfill(groups, budget, n_r, rel_tol);
    WaterfillResult out;
    out.power = r.level;
    out.lambda = r.lambda;
    out.water_level = 1.0 / (std::log(2.0) * n_r * r.lambda);
    return out;
}

} // namespace macpa

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

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

namespace macpa {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text)
{
    const std::string v = trim(text);
    char* end = nullptr;
    errno = 0;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(x))
        throw ConfigError(key, "expected a number, got '" + v + "'");
    return x;
}

long long parse_integer(const std::string& key, const std::string& text)
{
    const std::string v = trim(text);
    char* end = nullptr;
    errno = 0;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE)
        throw ConfigError(key, "expected an integer, got '" + v + "'");
    return x;
}

int parse_int(const std::string& key, const std::string& text)
{
    const long long x = parse_integer(key, text);
    if (x < -1000000000LL || x > 1000000000LL)
        throw ConfigError(key, "integer out of range");
    return static_cast<int>(x);
}

std::vector<double> parse_list(const std::string& key, const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(parse_double(key, item));
    if (out.empty())
        throw ConfigError(key, "expected a comma separated list");
    return out;
}

void require(bool ok, const std::string& field, const std::string& message)
{
    if (!ok)
        throw ConfigError(field, message);
}

} // namespace

void ScenarioConfig::validate() const
{
    require(!name.empty() && name.find_first_of("/\\") == std::string::npos, "name",
            "must be a non-empty file stem without path separators");
    require(users >= 1 && users <= 8, "users", "must be in [1, 8]");
    require(n_t >= 1, "n_t", "must be >= 1");
    require(n_r >= 1, "n_r", "must be >= 1");
    const auto K = static_cast<std::size_t>(users);
    require(r.size() == K, "r", "needs one value per user");
    require(t.size() == K, "t", "needs one value per user");
    for (double v : r)
        require(v >= 0.0 && v <= 1.0, "r", "correlation coefficients must lie in [0, 1]");
    for (double v : t)
        require(v >= 0.0 && v <= 1.0, "t", "correlation coefficients must lie in [0, 1]");
    require(budgets.size() == K, "budgets", "needs one value per user");
    for (double b : budgets)
        require(b > 0.0, "budgets", "must be > 0");
    require(mc_draws >= 0, "mc_draws", "must be >= 0");
    require(max_rounds >= 1, "max_rounds", "must be >= 1");

    if (p) {
        require(*p >= 0.0 && *p <= 1.0, "p", "must lie in [0, 1]");
        require(users == 2, "p", "only defined for two users");
        require(coord == Decoding::sic, "p", "only meaningful with coord = sic");
        require(order_probs.empty(), "p", "give either p or order_probs, not both");
    }
    if (!order_probs.empty()) {
        require(coord == Decoding::sic, "order_probs", "only meaningful with coord = sic");
        std::size_t n = 1;
        for (int k = 2; k <= users; ++k)
            n *= static_cast<std::size_t>(k);
        require(order_probs.size() == n, "order_probs", "needs one probability per decoding order (K!)");
        double sum = 0.0;
        for (double q : order_probs) {
            require(q >= 0.0, "order_probs", "must be >= 0");
            sum += q;
        }
        require(std::abs(sum - 1.0) < 1e-9, "order_probs", "must sum to 1");
    }
    if (coord == Decoding::sud)
        require(pa_mode == PaMode::space_time, "pa_mode", "single-user decoding has one context; use space_time");

    if (sweep == SweepAxis::none) {
        require(sweep_values.empty(), "sweep_values", "given without a sweep axis");
    } else {
        require(!sweep_values.empty(), "sweep_values", "required when sweep is set");
        for (double v : sweep_values) {
            if (sweep == SweepAxis::power)
                require(v > 0.0, "sweep_values", "powers must be > 0");
            if (sweep == SweepAxis::p)
                require(v >= 0.0 && v <= 1.0, "sweep_values", "probabilities must lie in [0, 1]");
        }
        if (sweep == SweepAxis::p)
            require(users == 2 && coord == Decoding::sic && order_probs.empty(), "sweep",
                    "a p sweep needs two users under sic");
    }
}

UiuProfile ScenarioConfig::profile() const
{
    return exponential_profile(n_t, n_r, r, t, basis);
}

CoordinationDistribution ScenarioConfig::coordination(std::optional<double> p_override) const
{
    if (coord == Decoding::sud)
        return CoordinationDistribution::sud(users);
    if (p_override)
        return CoordinationDistribution::two_user(*p_override);
    if (p)
        return CoordinationDistribution::two_user(*p);
    if (!order_probs.empty())
        return CoordinationDistribution::sic(DecodingOrder::all(users), order_probs);
    return CoordinationDistribution::sic_uniform(users);
}

ScenarioConfig parse_config(std::istream& in)
{
    ScenarioConfig cfg;
    std::map<std::string, int> seen;
    std::string line;
    int lineno = 0;
    bool budgets_given = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("", "line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (seen[key]++)
            throw ConfigError(key, "given twice");

        if (key == "name") {
            cfg.name = value;
        } else if (key == "users") {
            cfg.users = parse_int(key, value);
        } else if (key == "n_t") {
            cfg.n_t = parse_int(key, value);
        } else if (key == "n_r") {
            cfg.n_r = parse_int(key, value);
        } else if (key == "r") {
            cfg.r = parse_list(key, value);
        } else if (key == "t") {
            cfg.t = parse_list(key, value);
        } else if (key == "rho_db") {
            cfg.rho_db = parse_double(key, value);
        } else if (key == "budgets") {
            cfg.budgets = parse_list(key, value);
            budgets_given = true;
        } else if (key == "coord") {
            if (value == "sic")
                cfg.coord = Decoding::sic;
            else if (value == "sud")
                cfg.coord = Decoding::sud;
            else
                throw ConfigError(key, "expected sic or sud, got '" + value + "'");
        } else if (key == "p") {
            cfg.p = parse_double(key, value);
        } else if (key == "order_probs") {
            cfg.order_probs = parse_list(key, value);
        } else if (key == "pa_mode") {
            if (value == "space_time")
                cfg.pa_mode = PaMode::space_time;
            else if (value == "spatial_only")
                cfg.pa_mode = PaMode::spatial_only;
            else if (value == "temporal_only")
                cfg.pa_mode = PaMode::temporal_only;
            else
                throw ConfigError(key, "expected space_time, spatial_only or temporal_only");
        } else if (key == "mc_draws") {
            cfg.mc_draws = parse_int(key, value);
        } else if (key == "max_rounds") {
            cfg.max_rounds = parse_int(key, value);
        } else if (key == "seed") {
            const long long s = parse_integer(key, value);
            if (s < 0)
                throw ConfigError(key, "must be >= 0");
            cfg.seed = static_cast<std::uint64_t>(s);
        } else if (key == "sweep") {
            if (value == "none")
                cfg.sweep = SweepAxis::none;
            else if (value == "power")
                cfg.sweep = SweepAxis::power;
            else if (value == "p")
                cfg.sweep = SweepAxis::p;
            else if (value == "rho_db")
                cfg.sweep = SweepAxis::rho_db;
            else
                throw ConfigError(key, "expected none, power, p or rho_db");
        } else if (key == "sweep_values") {
            cfg.sweep_values = parse_list(key, value);
        } else if (key == "basis") {
            if (value == "strict")
                cfg.basis = BasisPolicy::strict;
            else if (value == "project")
                cfg.basis = BasisPolicy::project;
            else
                throw ConfigError(key, "expected strict or project");
        } else {
            throw ConfigError(key, "unknown key");
        }
    }
    if (!budgets_given && cfg.users >= 1 && cfg.users <= 8)
        cfg.budgets.assign(static_cast<std::size_t>(cfg.users), 1.0);
    cfg.validate();
    return cfg;
}

ScenarioConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("", "cannot open config file '" + path + "'");
    return parse_config(in);
}

} // namespace macpa

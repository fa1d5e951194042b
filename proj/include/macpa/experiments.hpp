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

#include "macpa/equilibrium.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace macpa {

/// Raised for unreadable or invalid scenario files; `field` names the key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field.empty() ? message : field + ": " + message), field(std::move(field)) {}
    std::string field;
};

enum class SweepAxis { none, power, p, rho_db };

/// One scenario file. Format: `key = value` lines, `#` starts a comment,
/// lists are comma separated. For two users under SIC, `p` is the
/// probability that user 1 is decoded second (interference-free).
struct ScenarioConfig {
    std::string name = "scenario";
    int users = 2;
    int n_t = 4;
    int n_r = 4;
    std::vector<double> r;          // receive correlation per user
    std::vector<double> t;          // transmit correlation per user
    double rho_db = 0.0;
    std::vector<double> budgets;    // average per-antenna power per user
    Decoding coord = Decoding::sic;
    std::optional<double> p;                 // two-user SIC shortcut
    std::vector<double> order_probs;         // over DecodingOrder::all(users); empty = uniform
    PaMode pa_mode = PaMode::space_time;
    int mc_draws = 500;
    int max_rounds = 500;           // best-response rounds per equilibrium
    std::uint64_t seed = 1;
    SweepAxis sweep = SweepAxis::none;
    std::vector<double> sweep_values;
    BasisPolicy basis = BasisPolicy::project;

    /// Throws ConfigError naming the first offending field.
    void validate() const;
    UiuProfile profile() const;
    /// Coordination law, with `p` replaced by `p_override` when given.
    CoordinationDistribution coordination(std::optional<double> p_override = std::nullopt) const;
};

ScenarioConfig parse_config(std::istream& in);
ScenarioConfig load_config(const std::string& path);

struct RunOptions {
    int threads = 1;
    std::optional<std::uint64_t> seed;   // overrides the config seed
};

/// A result table ready for CSV emission plus its diagnostics record.
struct RunOutput {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    nlohmann::json diagnostics;
    bool all_converged = true;

    std::string csv() const;
    double at(std::size_t row, const std::string& column) const;
};

/// Writes `<dir>/<name>.csv` and `<dir>/<name>.diag.json`.
void write_outputs(const RunOutput& out, const std::string& dir);

/// One row per sweep point (a single row when sweep = none). Columns:
/// sweep_value, then per user k = 1..K rate_k (per receive antenna),
/// rate_raw_k, mc_rate_k, mc_rate_se_k, then sum_rate, sum_rate_raw,
/// mc_sum_rate, mc_sum_rate_se, capacity, capacity_raw, sre, lambda_1..K,
/// converged. Monte-Carlo columns are raw bits/s/Hz.
RunOutput run_scenario(const ScenarioConfig& cfg, const RunOptions& opt = {});

struct FigureOptions {
    int mc_draws = 500;
    std::uint64_t seed = 1;
    int threads = 1;
};

/// Sum-rates versus P on the two-user exponential profile, P on a 13-point
/// log grid over [1e-2, 1e2]. Columns: P, sic_sum_rate, sud_sum_rate,
/// capacity, their _raw versions, mc_sic_sum_rate(_se), mc_sud_sum_rate(_se),
/// mc_capacity(_se), converged.
RunOutput run_fig1(const FigureOptions& opt = {});
/// SRE versus p (11 points) for the three power allocation modes. Columns:
/// p, sre_space_time, sre_spatial, sre_temporal, sum_rate_space_time,
/// sum_rate_spatial, sum_rate_temporal, capacity, the _raw versions of the
/// four rate columns, converged.
RunOutput run_fig2(const FigureOptions& opt = {});
/// Rate pairs at the spatial-only equilibrium versus p (11 points). Columns:
/// p, R1, R2, sum_rate, capacity, their _raw versions, mc_R1(_se),
/// mc_R2(_se), converged.
RunOutput run_fig3(const FigureOptions& opt = {});

ScenarioConfig fig1_config();
ScenarioConfig fig2_config();
ScenarioConfig fig3_config();

/// Fast property checks; prints one line per check, returns the failure count.
int run_selftest(std::ostream& out);

/// `%.17g`
std::string format_double(double v);

} // namespace macpa

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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

namespace macpa {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs body(i) for i in [0, n) on up to `threads` workers; the first
// exception is rethrown after all workers stop.
template <class Body>
void parallel_for(std::size_t n, int threads, Body body)
{
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                }
            }
        });
    for (auto& th : pool)
        th.join();
    if (error)
        std::rethrow_exception(error);
}

std::vector<int> all_users(int K)
{
    std::vector<int> u(static_cast<std::size_t>(K));
    std::iota(u.begin(), u.end(), 0);
    return u;
}

McEstimate nan_estimate() { return {kNaN, kNaN, {}}; }

McEstimate capacity_mc(const UiuProfile& profile, double rho, const PowerSlice& powers,
                       const ChannelSamples& samples)
{
    if (samples.count() == 0)
        return nan_estimate();
    const auto Q = covariances(profile, powers);
    const auto users = all_users(profile.users());
    std::vector<double> per_draw;
    per_draw.reserve(static_cast<std::size_t>(samples.count()));
    for (const auto& H : samples.draws)
        per_draw.push_back(log2_det_sum(H, Q, users, rho));
    return summarize(std::move(per_draw));
}

nlohmann::json ne_diag(const EquilibriumResult& ne)
{
    return {{"rounds", ne.outer_iterations},
            {"last_round_change", ne.last_round_change},
            {"kkt_residual", ne.kkt_residual},
            {"converged", ne.converged}};
}

nlohmann::json cap_diag(const CapacityResult& cap)
{
    return {{"rounds", cap.rounds}, {"converged", cap.converged}};
}

// NE sum-rate over capacity; an inconsistent pair is flagged with NaN.
double guarded_sre(double ne_sum, double capacity, bool& ok)
{
    try {
        return sre(ne_sum, capacity);
    } catch (const ModelError&) {
        ok = false;
        return kNaN;
    }
}

nlohmann::json config_json(const ScenarioConfig& cfg)
{
    static const char* coord_names[] = {"sic", "sud"};
    static const char* pa_names[] = {"space_time", "spatial_only", "temporal_only"};
    static const char* sweep_names[] = {"none", "power", "p", "rho_db"};
    nlohmann::json j = {{"name", cfg.name},
                        {"users", cfg.users},
                        {"n_t", cfg.n_t},
                        {"n_r", cfg.n_r},
                        {"r", cfg.r},
                        {"t", cfg.t},
                        {"rho_db", cfg.rho_db},
                        {"budgets", cfg.budgets},
                        {"coord", coord_names[static_cast<int>(cfg.coord)]},
                        {"pa_mode", pa_names[static_cast<int>(cfg.pa_mode)]},
                        {"mc_draws", cfg.mc_draws},
                        {"max_rounds", cfg.max_rounds},
                        {"seed", cfg.seed},
                        {"sweep", sweep_names[static_cast<int>(cfg.sweep)]},
                        {"sweep_values", cfg.sweep_values},
                        {"basis", cfg.basis == BasisPolicy::strict ? "strict" : "project"}};
    if (cfg.p)
        j["p"] = *cfg.p;
    if (!cfg.order_probs.empty())
        j["order_probs"] = cfg.order_probs;
    return j;
}

UiuProfile checked_profile(const ScenarioConfig& cfg)
{
    try {
        return cfg.profile();
    } catch (const ModelError& e) {
        throw ConfigError("basis", e.what());
    }
}

std::vector<double> log_grid(double lo, double hi, int points)
{
    std::vector<double> g;
    for (int i = 0; i < points; ++i)
        g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1)));
    return g;
}

std::vector<double> unit_grid(int points)
{
    std::vector<double> g;
    for (int i = 0; i < points; ++i)
        g.push_back(static_cast<double>(i) / (points - 1));
    return g;
}

RunOutput assemble(std::string name, std::vector<std::string> header, std::vector<std::vector<double>> rows,
                   std::vector<nlohmann::json> row_diag, nlohmann::json config)
{
    RunOutput out;
    out.name = std::move(name);
    out.header = std::move(header);
    out.rows = std::move(rows);
    const std::size_t conv = out.header.size() - 1;
    for (const auto& r : out.rows)
        out.all_converged = out.all_converged && r[conv] == 1.0;
    out.diagnostics = {{"name", out.name}, {"config", std::move(config)}, {"rows", std::move(row_diag)},
                       {"all_converged", out.all_converged}};
    return out;
}

} // namespace

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string RunOutput::csv() const
{
    std::string s;
    for (std::size_t i = 0; i < header.size(); ++i)
        s += (i ? "," : "") + header[i];
    s += '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i)
            s += (i ? "," : "") + format_double(r[i]);
        s += '\n';
    }
    return s;
}

double RunOutput::at(std::size_t row, const std::string& column) const
{
    const auto it = std::find(header.begin(), header.end(), column);
    if (it == header.end())
        throw std::out_of_range("no column '" + column + "'");
    return rows.at(row).at(static_cast<std::size_t>(it - header.begin()));
}

void write_outputs(const RunOutput& out, const std::string& dir)
{
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);
    {
        std::ofstream f(base / (out.name + ".csv"), std::ios::binary);
        f << out.csv();
        if (!f)
            throw std::runtime_error("cannot write " + (base / (out.name + ".csv")).string());
    }
    std::ofstream f(base / (out.name + ".diag.json"), std::ios::binary);
    f << out.diagnostics.dump(2) << '\n';
    if (!f)
        throw std::runtime_error("cannot write " + (base / (out.name + ".diag.json")).string());
}

RunOutput run_scenario(const ScenarioConfig& input, const RunOptions& opt)
{
    ScenarioConfig cfg = input;
    if (opt.seed)
        cfg.seed = *opt.seed;
    cfg.validate();
    const UiuProfile profile = checked_profile(cfg);
    const int K = cfg.users;
    const auto samples = cfg.mc_draws > 0 ? sample_channel(profile, cfg.mc_draws, cfg.seed) : ChannelSamples{};

    std::vector<std::string> header{"sweep_value"};
    for (int k = 1; k <= K; ++k)
        for (const char* c : {"rate_", "rate_raw_", "mc_rate_", "mc_rate_se_"})
            header.push_back(c + std::to_string(k));
    for (const char* c : {"sum_rate", "sum_rate_raw", "mc_sum_rate", "mc_sum_rate_se", "capacity", "capacity_raw", "sre"})
        header.emplace_back(c);
    for (int k = 1; k <= K; ++k)
        header.push_back("lambda_" + std::to_string(k));
    header.emplace_back("converged");

    const std::vector<double> points =
        cfg.sweep == SweepAxis::none ? std::vector<double>{kNaN} : cfg.sweep_values;
    std::vector<std::vector<double>> rows(points.size());
    std::vector<nlohmann::json> diag(points.size());

    parallel_for(points.size(), opt.threads, [&](std::size_t i) {
        const double v = points[i];
        double rho_db = cfg.rho_db;
        auto budgets = cfg.budgets;
        std::optional<double> p_override;
        switch (cfg.sweep) {
        case SweepAxis::none: break;
        case SweepAxis::power: std::fill(budgets.begin(), budgets.end(), v); break;
        case SweepAxis::p: p_override = v; break;
        case SweepAxis::rho_db: rho_db = v; break;
        }
        const double rho = db_to_linear(rho_db);
        const GameContext ctx{profile, rho, cfg.coordination(p_override)};

        std::vector<double> row{cfg.sweep == SweepAxis::none ? 0.0 : v};
        nlohmann::json d = {{"sweep_value", row.front()}};
        try {
            NeConfig ne_cfg;
            ne_cfg.pa_mode = cfg.pa_mode;
            ne_cfg.max_rounds = cfg.max_rounds;
            const auto ne = best_response_ne(profile, rho, ctx.coord, budgets, ne_cfg);
            NeConfig cap_cfg;
            cap_cfg.max_rounds = cfg.max_rounds;
            const auto cap = sum_capacity(profile, rho, budgets, cap_cfg);
            bool ok = ne.converged && cap.converged;
            for (int k = 0; k < K; ++k) {
                const auto mc = samples.count() ? utility_exact(ctx, ne.powers, k, samples) : nan_estimate();
                const double rate = ne.rates[static_cast<std::size_t>(k)];
                row.insert(row.end(), {rate, denormalize(rate, profile), mc.mean, mc.std_error});
            }
            const auto mc_sum = samples.count() ? sum_rate_exact(ctx, ne.powers, samples) : nan_estimate();
            const double s = guarded_sre(ne.sum_rate, cap.value, ok);
            row.insert(row.end(), {ne.sum_rate, denormalize(ne.sum_rate, profile), mc_sum.mean, mc_sum.std_error,
                                   cap.value, denormalize(cap.value, profile), s});
            row.insert(row.end(), ne.lambda.begin(), ne.lambda.end());
            row.push_back(ok ? 1.0 : 0.0);
            d["ne"] = ne_diag(ne);
            d["capacity"] = cap_diag(cap);
        } catch (const ConvergenceError& e) {
            row.resize(header.size(), kNaN);
            row.back() = 0.0;
            d["error"] = e.what();
            d["fixed_point_residuals"] = e.residual_history.size() > 20
                ? std::vector<double>(e.residual_history.end() - 20, e.residual_history.end())
                : e.residual_history;
        }
        rows[i] = std::move(row);
        diag[i] = std::move(d);
    });
    return assemble(cfg.name, std::move(header), std::move(rows), std::move(diag), config_json(cfg));
}

ScenarioConfig fig1_config()
{
    ScenarioConfig c;
    c.name = "fig1";
    c.users = 2;
    c.n_t = c.n_r = 10;
    c.r = {0.5, 0.2};
    c.t = {0.5, 0.2};
    c.rho_db = 3.0;
    c.budgets = {1.0, 1.0};
    c.p = 0.5;
    c.sweep = SweepAxis::power;
    c.sweep_values = log_grid(1e-2, 1e2, 13);
    return c;
}

ScenarioConfig fig2_config()
{
    ScenarioConfig c;
    c.name = "fig2";
    c.users = 2;
    c.n_t = c.n_r = 10;
    c.r = {0.3, 0.0};
    c.t = {0.5, 0.2};
    c.rho_db = 4.0;
    c.budgets = {5.0, 50.0};
    c.sweep = SweepAxis::p;
    c.sweep_values = unit_grid(11);
    return c;
}

ScenarioConfig fig3_config()
{
    ScenarioConfig c;
    c.name = "fig3";
    c.users = 2;
    c.n_t = c.n_r = 10;
    c.r = {0.4, 0.2};
    c.t = {0.6, 0.3};
    c.rho_db = 3.0;
    c.budgets = {5.0, 50.0};
    c.pa_mode = PaMode::spatial_only;
    c.sweep = SweepAxis::p;
    c.sweep_values = unit_grid(11);
    return c;
}

RunOutput run_fig1(const FigureOptions& opt)
{
    auto cfg = fig1_config();
    cfg.mc_draws = opt.mc_draws;
    cfg.seed = opt.seed;
    const auto profile = cfg.profile();
    const double rho = db_to_linear(cfg.rho_db);
    const auto samples = cfg.mc_draws > 0 ? sample_channel(profile, cfg.mc_draws, cfg.seed) : ChannelSamples{};
    const GameContext sic_ctx{profile, rho, cfg.coordination()};
    const GameContext sud_ctx{profile, rho, CoordinationDistribution::sud(2)};

    std::vector<std::string> header{"P", "sic_sum_rate", "sud_sum_rate", "capacity", "sic_sum_rate_raw",
                                    "sud_sum_rate_raw", "capacity_raw", "mc_sic_sum_rate", "mc_sic_sum_rate_se",
                                    "mc_sud_sum_rate", "mc_sud_sum_rate_se", "mc_capacity", "mc_capacity_se",
                                    "converged"};
    const auto& grid = cfg.sweep_values;
    std::vector<std::vector<double>> rows(grid.size());
    std::vector<nlohmann::json> diag(grid.size());
    parallel_for(grid.size(), opt.threads, [&](std::size_t i) {
        const std::vector<double> budgets(2, grid[i]);
        const auto sic = best_response_ne(profile, rho, sic_ctx.coord, budgets);
        const auto sud = best_response_ne(profile, rho, sud_ctx.coord, budgets);
        const auto cap = sum_capacity(profile, rho, budgets);
        const auto mc_sic = samples.count() ? sum_rate_exact(sic_ctx, sic.powers, samples) : nan_estimate();
        const auto mc_sud = samples.count() ? sum_rate_exact(sud_ctx, sud.powers, samples) : nan_estimate();
        const auto mc_cap = capacity_mc(profile, rho, cap.powers, samples);
        const bool ok = sic.converged && sud.converged && cap.converged;
        rows[i] = {grid[i],
                   sic.sum_rate,
                   sud.sum_rate,
                   cap.value,
                   denormalize(sic.sum_rate, profile),
                   denormalize(sud.sum_rate, profile),
                   denormalize(cap.value, profile),
                   mc_sic.mean,
                   mc_sic.std_error,
                   mc_sud.mean,
                   mc_sud.std_error,
                   mc_cap.mean,
                   mc_cap.std_error,
                   ok ? 1.0 : 0.0};
        diag[i] = {{"P", grid[i]}, {"sic", ne_diag(sic)}, {"sud", ne_diag(sud)}, {"capacity", cap_diag(cap)}};
    });
    return assemble("fig1", std::move(header), std::move(rows), std::move(diag), config_json(cfg));
}

RunOutput run_fig2(const FigureOptions& opt)
{
    auto cfg = fig2_config();
    cfg.mc_draws = 0;
    cfg.seed = opt.seed;
    const auto profile = cfg.profile();
    const double rho = db_to_linear(cfg.rho_db);
    const auto cap = sum_capacity(profile, rho, cfg.budgets);

    std::vector<std::string> header{"p",
                                    "sre_space_time",
                                    "sre_spatial",
                                    "sre_temporal",
                                    "sum_rate_space_time",
                                    "sum_rate_spatial",
                                    "sum_rate_temporal",
                                    "capacity",
                                    "sum_rate_space_time_raw",
                                    "sum_rate_spatial_raw",
                                    "sum_rate_temporal_raw",
                                    "capacity_raw",
                                    "converged"};
    const auto& grid = cfg.sweep_values;
    std::vector<std::vector<double>> rows(grid.size());
    std::vector<nlohmann::json> diag(grid.size());
    parallel_for(grid.size(), opt.threads, [&](std::size_t i) {
        const auto coord = CoordinationDistribution::two_user(grid[i]);
        bool ok = cap.converged;
        std::vector<double> sres, sums;
        nlohmann::json d = {{"p", grid[i]}, {"capacity", cap_diag(cap)}};
        for (PaMode mode : {PaMode::space_time, PaMode::spatial_only, PaMode::temporal_only}) {
            NeConfig ne_cfg;
            ne_cfg.pa_mode = mode;
            const auto ne = best_response_ne(profile, rho, coord, cfg.budgets, ne_cfg);
            ok = ok && ne.converged;
            sres.push_back(guarded_sre(ne.sum_rate, cap.value, ok));
            sums.push_back(ne.sum_rate);
            static const char* names[] = {"space_time", "spatial", "temporal"};
            d[names[static_cast<int>(mode)]] = ne_diag(ne);
        }
        rows[i] = {grid[i], sres[0], sres[1], sres[2], sums[0], sums[1], sums[2], cap.value,
                   denormalize(sums[0], profile), denormalize(sums[1], profile), denormalize(sums[2], profile),
                   denormalize(cap.value, profile), ok ? 1.0 : 0.0};
        diag[i] = std::move(d);
    });
    return assemble("fig2", std::move(header), std::move(rows), std::move(diag), config_json(cfg));
}

RunOutput run_fig3(const FigureOptions& opt)
{
    auto cfg = fig3_config();
    cfg.mc_draws = opt.mc_draws;
    cfg.seed = opt.seed;
    const auto profile = cfg.profile();
    const double rho = db_to_linear(cfg.rho_db);
    const auto samples = cfg.mc_draws > 0 ? sample_channel(profile, cfg.mc_draws, cfg.seed) : ChannelSamples{};
    const auto cap = sum_capacity(profile, rho, cfg.budgets);

    std::vector<std::string> header{"p",      "R1",       "R2",       "sum_rate",  "capacity",
                                    "R1_raw", "R2_raw",   "sum_rate_raw", "capacity_raw", "mc_R1",
                                    "mc_R1_se", "mc_R2",  "mc_R2_se", "converged"};
    const auto& grid = cfg.sweep_values;
    std::vector<std::vector<double>> rows(grid.size());
    std::vector<nlohmann::json> diag(grid.size());
    parallel_for(grid.size(), opt.threads, [&](std::size_t i) {
        const GameContext ctx{profile, rho, CoordinationDistribution::two_user(grid[i])};
        NeConfig ne_cfg;
        ne_cfg.pa_mode = PaMode::spatial_only;
        const auto ne = constrained_ne(profile, rho, ctx.coord, cfg.budgets, ne_cfg);
        const auto mc1 = samples.count() ? utility_exact(ctx, ne.powers, 0, samples) : nan_estimate();
        const auto mc2 = samples.count() ? utility_exact(ctx, ne.powers, 1, samples) : nan_estimate();
        const double r1 = ne.rates[0];
        const double r2 = ne.rates[1];
        rows[i] = {grid[i],
                   r1,
                   r2,
                   ne.sum_rate,
                   cap.value,
                   denormalize(r1, profile),
                   denormalize(r2, profile),
                   denormalize(ne.sum_rate, profile),
                   denormalize(cap.value, profile),
                   mc1.mean,
                   mc1.std_error,
                   mc2.mean,
                   mc2.std_error,
                   ne.converged && cap.converged ? 1.0 : 0.0};
        diag[i] = {{"p", grid[i]}, {"spatial", ne_diag(ne)}, {"capacity", cap_diag(cap)}};
    });
    return assemble("fig3", std::move(header), std::move(rows), std::move(diag), config_json(cfg));
}

} // namespace macpa

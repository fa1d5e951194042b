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

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNotConverged = 3;

int finish(const macpa::RunOutput& out, const std::string& dir)
{
    macpa::write_outputs(out, dir);
    std::cout << "wrote " << dir << "/" << out.name << ".csv (" << out.rows.size() << " rows)\n";
    if (!out.all_converged) {
        std::cerr << "mac-pa: some rows did not converge; see " << out.name << ".diag.json\n";
        return kNotConverged;
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Power allocation games on the fast-fading MIMO multiple access channel"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    int threads = 1;
    auto* run = app.add_subcommand("run", "Run a scenario file");
    run->add_option("config", config_path, "Scenario file")->required();
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--threads", threads, "Worker threads over sweep points")->check(CLI::PositiveNumber);

    macpa::FigureOptions fig_opt;
    std::string fig_out = ".";
    CLI::App* figs[3];
    const char* fig_names[] = {"fig1", "fig2", "fig3"};
    for (int i = 0; i < 3; ++i) {
        figs[i] = app.add_subcommand(fig_names[i], std::string("Reproduce scenario ") + fig_names[i]);
        figs[i]->add_option("--out", fig_out, "Output directory");
        figs[i]->add_option("--threads", fig_opt.threads, "Worker threads")->check(CLI::PositiveNumber);
    }
    auto* selftest = app.add_subcommand("selftest", "Run the built-in property checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*run) {
            const auto cfg = macpa::load_config(config_path);
            return finish(macpa::run_scenario(cfg, {threads, seed}), out_dir);
        }
        if (*figs[0])
            return finish(macpa::run_fig1(fig_opt), fig_out);
        if (*figs[1])
            return finish(macpa::run_fig2(fig_opt), fig_out);
        if (*figs[2])
            return finish(macpa::run_fig3(fig_opt), fig_out);
        if (*selftest)
            return macpa::run_selftest(std::cout) == 0 ? kOk : 1;
    } catch (const macpa::ConfigError& e) {
        std::cerr << "mac-pa: config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "mac-pa: " << e.what() << '\n';
        return 1;
    }
    return kOk;
}

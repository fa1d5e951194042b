// Acceptance suite: one PASS/FAIL line per criterion. Criteria passed with
// --known-failure N still print their verdict but do not set the exit status.

#include "macpa/experiments.hpp"
#include "macpa/game_exact.hpp"
#include "macpa/large_system.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace macpa;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

CMatrix random_psd(int n, int rank, std::mt19937_64& gen)
{
    std::normal_distribution<double> g;
    CMatrix G(n, rank);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < rank; ++j)
            G(i, j) = Complex(g(gen), g(gen));
    return G * G.adjoint();
}

CMatrix random_covariance(int n, double trace, std::mt19937_64& gen)
{
    CMatrix Q = random_psd(n, n, gen);
    return Q * (trace / Q.trace().real());
}

UiuProfile random_profile(int K, int n_t, int n_r, std::mt19937_64& gen)
{
    std::uniform_real_distribution<double> u(0.0, 0.9);
    std::vector<double> r, t;
    for (int k = 0; k < K; ++k) {
        r.push_back(u(gen));
        t.push_back(u(gen));
    }
    return exponential_profile(n_t, n_r, r, t);
}

double max_diff(const SpaceTimePowerProfile& a, const SpaceTimePowerProfile& b)
{
    double d = 0.0;
    for (std::size_t k = 0; k < a.power.size(); ++k)
        for (std::size_t c = 0; c < a.power[k].size(); ++c)
            for (std::size_t j = 0; j < a.power[k][c].size(); ++j)
                d = std::max(d, std::abs(a.power[k][c][j] - b.power[k][c][j]));
    return d;
}

// A random starting profile inside the strategy set of `mode`.
SpaceTimePowerProfile random_start(const CoordinationDistribution& coord, int n_t, const std::vector<double>& budgets,
                                   PaMode mode, std::mt19937_64& gen)
{
    auto p = SpaceTimePowerProfile::random(coord, n_t, budgets, gen);
    for (int k = 0; k < p.users(); ++k) {
        auto& user = p.power[static_cast<std::size_t>(k)];
        if (mode == PaMode::spatial_only)
            for (auto& ctx : user)
                ctx = user.front();
        if (mode == PaMode::temporal_only)
            for (auto& ctx : user)
                std::fill(ctx.begin(), ctx.end(), ctx.front());
        const double scale = n_t * budgets[static_cast<std::size_t>(k)] / p.averaged_trace(k, coord);
        for (auto& ctx : user)
            for (double& v : ctx)
                v *= scale;
    }
    return p;
}

const auto fig1_profile = [] { return exponential_profile(10, 10, {0.5, 0.2}, {0.5, 0.2}); };

struct Verdict {
    bool pass;
    std::string detail;
};

Verdict deterministic_equivalent_accuracy()
{
    const auto t0 = Clock::now();
    const auto prof = fig1_profile();
    const double rho = db_to_linear(3.0);
    const auto samples = sample_channel(prof, 2000, 2024);
    const PowerSlice uniform(2, std::vector<double>(10, 1.0));
    double worst = 0.0;
    for (int k = 0; k < 2; ++k) {
        for (const auto& order : DecodingOrder::all(2)) {
            const GameContext ctx{prof, rho, CoordinationDistribution::fixed_order(order)};
            const double mc = rate_sic_exact(ctx, order, uniform, k, samples).mean;
            const double de = denormalize(approx_rate_sic(prof, rho, order, k, uniform), prof);
            worst = std::max(worst, std::abs(de - mc) / mc);
        }
        const GameContext sud{prof, rho, CoordinationDistribution::sud(2)};
        const double mc = rate_sud_exact(sud, uniform, k, samples).mean;
        const double de = denormalize(approx_utility_sud(prof, rho, k, uniform), prof);
        worst = std::max(worst, std::abs(de - mc) / mc);
    }
    const double elapsed = seconds_since(t0);
    std::ostringstream os;
    os << "max relative error " << worst << " over 6 rates, " << elapsed << " s";
    return {worst < 0.03 && elapsed < 120.0, os.str()};
}

Verdict high_snr_limit()
{
    const auto prof = fig1_profile();
    const double rho = db_to_linear(30.0);
    const std::vector<double> budgets{1.0, 1.0};
    const auto coord = CoordinationDistribution::two_user(0.5);
    const auto ne = best_response_ne(prof, rho, coord, budgets);
    const auto cap = sum_capacity(prof, rho, budgets);
    const double dev = max_diff(ne.powers, ne_high_snr(coord, 10, budgets));
    const double s = sre(ne.sum_rate, cap.value);
    std::ostringstream os;
    os << "max relative deviation from uniform " << dev << ", SRE " << s;
    return {ne.converged && dev < 0.01 && s >= 0.99, os.str()};
}

Verdict low_snr_limit()
{
    const auto prof = fig1_profile();
    const double rho = db_to_linear(-30.0);
    const std::vector<double> budgets{1.0, 1.0};
    const auto coord = CoordinationDistribution::two_user(0.5);
    const auto ne = best_response_ne(prof, rho, coord, budgets);
    const auto cap = sum_capacity(prof, rho, budgets);
    double worst = 1.0;
    for (int k = 0; k < 2; ++k) {
        const auto j = static_cast<std::size_t>(strongest_mode(prof, k));
        double on = 0.0, total = 0.0;
        for (int c = 0; c < 2; ++c) {
            on += coord.weight(c) * ne.powers.power[k][c][j];
            for (double v : ne.powers.power[k][c])
                total += coord.weight(c) * v;
        }
        worst = std::min(worst, on / total);
    }
    const double s = sre(ne.sum_rate, cap.value);
    std::ostringstream os;
    os << "min power share on the strongest mode " << worst << ", SRE " << s;
    return {ne.converged && worst >= 0.99 && s >= 0.99, os.str()};
}

Verdict trace_inequality_suite()
{
    std::mt19937_64 gen(404);
    std::uniform_int_distribution<int> pick_k(1, 4), pick_n(1, 6);
    double worst = std::numeric_limits<double>::infinity();
    double worst_equal = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
        const int K = pick_k(gen);
        const int n = pick_n(gen);
        std::uniform_int_distribution<int> pick_rank(1, n);
        std::vector<CMatrix> A, B;
        for (int i = 0; i < K; ++i) {
            A.push_back(random_psd(n, pick_rank(gen), gen));
            B.push_back(random_psd(n, pick_rank(gen), gen));
        }
        A[0] += CMatrix::Identity(n, n);
        B[0] += CMatrix::Identity(n, n);
        worst = std::min(worst, trace_inequality_gap(A, B));
        worst_equal = std::max(worst_equal, std::abs(trace_inequality_gap(A, A)));
    }
    std::ostringstream os;
    os << "min gap " << worst << ", max |gap| at A = B " << worst_equal;
    return {worst >= -1e-10 && worst_equal < 1e-12, os.str()};
}

Verdict concavity_suite()
{
    std::mt19937_64 gen(505);
    std::uniform_int_distribution<int> pick_k(2, 3), pick_n(2, 4);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = -std::numeric_limits<double>::infinity();
    double worst_z = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int K = pick_k(gen);
        const int n_t = pick_n(gen);
        const int n_r = pick_n(gen);
        const auto prof = random_profile(K, n_t, n_r, gen);
        const auto orders = DecodingOrder::all(K);
        const auto order = orders[static_cast<std::size_t>(gen() % orders.size())];
        const int k = static_cast<int>(gen() % static_cast<unsigned>(K));
        const GameContext ctx{prof, 0.1 + 10.0 * unit(gen), CoordinationDistribution::fixed_order(order)};
        CovarianceSlice others;
        for (int l = 0; l < K; ++l)
            others.push_back(random_covariance(n_t, n_t, gen));
        const CMatrix Q1 = random_covariance(n_t, n_t, gen);
        const CMatrix Q2 = random_covariance(n_t, n_t, gen);
        const double lambda = 0.05 + 0.9 * unit(gen);
        const bool compare = trial % 50 == 0;
        const auto samples = sample_channel(prof, compare ? 400 : 4, 505 + static_cast<std::uint64_t>(trial));
        const auto d2 = concavity_second_derivative(ctx, order, k, Q1, Q2, lambda, others, samples);
        for (double v : d2.per_draw)
            worst = std::max(worst, v);
        if (compare) {
            const double h = 1e-3;
            auto rate_at = [&](double l) {
                auto Q = others;
                Q[static_cast<std::size_t>(k)] = l * Q1 + (1 - l) * Q2;
                return rate_sic_exact(ctx, order, Q, k, samples);
            };
            const auto up = rate_at(lambda + h), mid = rate_at(lambda), dn = rate_at(lambda - h);
            std::vector<double> fd;
            for (std::size_t d = 0; d < up.per_draw.size(); ++d)
                fd.push_back((up.per_draw[d] - 2 * mid.per_draw[d] + dn.per_draw[d]) / (h * h));
            const auto f = summarize(fd);
            const double bar = std::sqrt(d2.std_error * d2.std_error + f.std_error * f.std_error);
            worst_z = std::max(worst_z, std::abs(d2.mean - f.mean) / bar);
        }
    }
    std::ostringstream os;
    os << "max second derivative over 1000 instances " << worst << ", max |analytic - FD| / error bar " << worst_z;
    return {worst <= 1e-10 && worst_z < 3.0, os.str()};
}

Verdict dsc_suite()
{
    std::mt19937_64 gen(606);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst_z = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 100; ++trial) {
        const auto prof = random_profile(2, 2, 2, gen);
        const GameContext ctx{prof, 0.1 + 10.0 * unit(gen), CoordinationDistribution::two_user(unit(gen))};
        const std::vector<double> budgets{0.2 + 2.0 * unit(gen), 0.2 + 2.0 * unit(gen)};
        const auto a = SpaceTimePowerProfile::random(ctx.coord, 2, budgets, gen);
        const auto b = SpaceTimePowerProfile::random(ctx.coord, 2, budgets, gen);
        const auto g = dsc_gap(ctx, a, b, sample_channel(prof, 200, 606 + static_cast<std::uint64_t>(trial)));
        worst_z = std::min(worst_z, g.mean / g.std_error);
    }
    std::ostringstream os;
    os << "min gap / standard error over 100 pairs " << worst_z;
    return {worst_z > 3.0, os.str()};
}

Verdict uniqueness_suite()
{
    struct Case {
        std::string name;
        UiuProfile profile;
        double rho;
        CoordinationDistribution coord;
        std::vector<double> budgets;
        PaMode mode;
    };
    const auto f1 = fig1_profile();
    const auto f2 = exponential_profile(10, 10, {0.3, 0.0}, {0.5, 0.2});
    const auto f3 = exponential_profile(10, 10, {0.4, 0.2}, {0.6, 0.3});
    const std::vector<Case> cases{
        {"fig1 sic", f1, db_to_linear(3), CoordinationDistribution::two_user(0.5), {1.0, 1.0}, PaMode::space_time},
        {"fig1 sud", f1, db_to_linear(3), CoordinationDistribution::sud(2), {1.0, 1.0}, PaMode::space_time},
        {"fig2 space-time", f2, db_to_linear(4), CoordinationDistribution::two_user(0.5), {5.0, 50.0}, PaMode::space_time},
        {"fig2 spatial", f2, db_to_linear(4), CoordinationDistribution::two_user(0.5), {5.0, 50.0}, PaMode::spatial_only},
        {"fig2 temporal", f2, db_to_linear(4), CoordinationDistribution::two_user(0.5), {5.0, 50.0}, PaMode::temporal_only},
        {"fig3 spatial", f3, db_to_linear(3), CoordinationDistribution::two_user(0.5), {5.0, 50.0}, PaMode::spatial_only},
    };
    std::mt19937_64 gen(707);
    bool ok = true;
    std::ostringstream os;
    for (const auto& c : cases) {
        NeConfig cfg;
        cfg.pa_mode = c.mode;
        const auto base = best_response_ne(c.profile, c.rho, c.coord, c.budgets, cfg);
        double spread = 0.0, kkt = base.kkt_residual;
        bool converged = base.converged;
        for (int s = 0; s < 10; ++s) {
            cfg.initial = random_start(c.coord, 10, c.budgets, c.mode, gen);
            const auto ne = best_response_ne(c.profile, c.rho, c.coord, c.budgets, cfg);
            spread = std::max(spread, max_diff(base.powers, ne.powers));
            kkt = std::max(kkt, ne.kkt_residual);
            converged = converged && ne.converged;
        }
        const bool pass = converged && spread < 1e-6 && kkt < 1e-6;
        ok = ok && pass;
        os << c.name << ": spread " << spread << " kkt " << kkt << (pass ? "; " : " (fail); ");
    }
    return {ok, os.str()};
}

Verdict waterfill_oracle()
{
    std::mt19937_64 gen(808);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst_wf = 0.0, worst_ne = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        // water-filling on random gains
        const double c0 = 0.05 + 20.0 * unit(gen), c1 = 0.05 + 20.0 * unit(gen);
        const double budget = 0.1 + 4.0 * unit(gen);
        const std::vector<WeightedMode> modes{{0, 0, 1.0, c0}, {0, 1, 1.0, c1}};
        const auto wf = waterfill(modes, budget, 2);
        double best = -1.0, best_x = 0.0;
        for (double x = 0.0; x <= budget; x += 1e-4) {
            const double v = std::log(1 + c0 * x) + std::log(1 + c1 * (budget - x));
            if (v > best) {
                best = v;
                best_x = x;
            }
        }
        worst_wf = std::max(worst_wf, std::abs(wf.power[0] - best_x));

        // the equilibrium power of a single-order game is the maximizer of
        // the user's full large-system utility
        if (trial % 10 == 0) {
            const auto prof = random_profile(2, 2, 2 + static_cast<int>(gen() % 3), gen);
            const auto order = DecodingOrder::all(2)[gen() % 2];
            const GameContext ctx{prof, 0.5 + 10.0 * unit(gen), CoordinationDistribution::fixed_order(order)};
            const double pbar = 0.2 + unit(gen);
            const auto ne = best_response_ne(prof, ctx.rho, ctx.coord, {pbar, pbar});
            const int k = static_cast<int>(gen() % 2);
            double best_u = -1.0, arg = 0.0;
            for (double x = 0.0; x <= 2 * pbar; x += 1e-4) {
                auto p = ne.powers;
                p.power[static_cast<std::size_t>(k)][0] = {x, 2 * pbar - x};
                const double u = approx_rate(ctx, 0, k, p.context_slice(0));
                if (u > best_u) {
                    best_u = u;
                    arg = x;
                }
            }
            worst_ne = std::max(worst_ne, std::abs(ne.powers.power[static_cast<std::size_t>(k)][0][0] - arg));
        }
    }
    std::ostringstream os;
    os << "max power error vs grid: water-filling " << worst_wf << ", best response " << worst_ne;
    return {worst_wf < 1e-3 && worst_ne < 1e-3, os.str()};
}

Verdict fig1_reproduction()
{
    const auto out = run_fig1({0, 1, 1});
    double worst_gap = 0.0;
    bool ordered = out.all_converged;
    for (std::size_t i = 0; i < out.rows.size(); ++i) {
        const double cap = out.at(i, "capacity"), sic = out.at(i, "sic_sum_rate"), sud = out.at(i, "sud_sum_rate");
        ordered = ordered && cap >= sic * (1 - 1e-9) && sic >= sud * (1 - 1e-9);
        worst_gap = std::max(worst_gap, (cap - sic) / cap);
    }
    std::ostringstream os;
    os << out.rows.size() << " points, ordering " << (ordered ? "holds" : "violated") << ", max (cap - sic)/cap "
       << worst_gap;
    return {ordered && worst_gap < 0.05, os.str()};
}

Verdict fig2_braess()
{
    const auto out = run_fig2({0, 1, 1});
    double min_sre = 1.0, worst = -1.0;
    for (std::size_t i = 0; i < out.rows.size(); ++i) {
        for (const char* c : {"sre_space_time", "sre_spatial", "sre_temporal"})
            min_sre = std::min(min_sre, out.at(i, c));
        worst = std::max(worst, out.at(i, "sre_space_time") - out.at(i, "sre_spatial"));
    }
    std::ostringstream os;
    os << out.rows.size() << " points, min SRE " << min_sre << ", max (space-time - spatial) " << worst;
    return {out.all_converged && out.rows.size() == 11 && worst <= 1e-3 && min_sre > 0.9, os.str()};
}

Verdict fig3_segment()
{
    const auto out = run_fig3({0, 1, 1});
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0, mean = 0.0;
    const std::size_t n = out.rows.size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double s = out.at(i, "sum_rate");
        lo = std::min(lo, s);
        hi = std::max(hi, s);
        mean += s / static_cast<double>(n - 2);
    }
    const auto cfg = fig3_config();
    const auto prof = cfg.profile();
    NeConfig ne_cfg;
    ne_cfg.pa_mode = PaMode::spatial_only;
    double corner = 0.0;
    const std::pair<std::size_t, std::vector<int>> ends[] = {{0, {0, 1}}, {n - 1, {1, 0}}};
    for (const auto& [row, seq] : ends) {
        const auto coord = CoordinationDistribution::fixed_order(DecodingOrder::from_sequence(seq));
        const auto ne = constrained_ne(prof, db_to_linear(cfg.rho_db), coord, cfg.budgets, ne_cfg);
        corner = std::max({corner, std::abs(ne.rates[0] - out.at(row, "R1")), std::abs(ne.rates[1] - out.at(row, "R2"))});
    }
    std::ostringstream os;
    os << "interior sum-rate spread " << (hi - lo) / mean << ", endpoint mismatch " << corner;
    return {out.all_converged && (hi - lo) / mean < 0.02 && corner < 1e-6, os.str()};
}

Verdict telescoping_identity()
{
    std::mt19937_64 gen(1212);
    double worst = 0.0;
    for (int d = 0; d < 100; ++d) {
        const int K = 2 + static_cast<int>(gen() % 3);
        const int n_t = 1 + static_cast<int>(gen() % 4);
        const int n_r = 1 + static_cast<int>(gen() % 5);
        const auto prof = random_profile(K, n_t, n_r, gen);
        const auto samples = sample_channel(prof, 1, 1212 + static_cast<std::uint64_t>(d));
        const auto orders = DecodingOrder::all(K);
        const auto order = orders[static_cast<std::size_t>(gen() % orders.size())];
        const GameContext ctx{prof, 10.0, CoordinationDistribution::fixed_order(order)};
        CovarianceSlice Q;
        for (int k = 0; k < K; ++k)
            Q.push_back(random_covariance(n_t, n_t, gen));
        double sum = 0.0;
        for (int k = 0; k < K; ++k)
            sum += rate_sic_exact(ctx, order, Q, k, samples).mean;
        std::vector<int> all(static_cast<std::size_t>(K));
        std::iota(all.begin(), all.end(), 0);
        worst = std::max(worst, std::abs(sum - log2_det_sum(samples.draws[0], Q, all, ctx.rho)));
    }
    std::ostringstream os;
    os << "max |sum of sic rates - joint log-det| over 100 draws " << worst;
    return {worst < 1e-9, os.str()};
}

} // namespace

int main(int argc, char** argv)
{
    std::set<int> known;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--known-failure") == 0 && i + 1 < argc)
            known.insert(std::atoi(argv[++i]));
        else {
            std::fprintf(stderr, "usage: acceptance [--known-failure N]...\n");
            return 2;
        }
    }

    const std::pair<const char*, std::function<Verdict()>> criteria[] = {
        {"deterministic-equivalent accuracy", deterministic_equivalent_accuracy},
        {"high-SNR limit", high_snr_limit},
        {"low-SNR limit", low_snr_limit},
        {"trace inequality suite", trace_inequality_suite},
        {"concavity suite", concavity_suite},
        {"diagonal strict concavity evidence", dsc_suite},
        {"uniqueness evidence", uniqueness_suite},
        {"water-filling oracle", waterfill_oracle},
        {"fig1 ordering", fig1_reproduction},
        {"fig2 Braess paradox", fig2_braess},
        {"fig3 segment", fig3_segment},
        {"telescoping identity", telescoping_identity},
    };

    int unexpected = 0;
    int id = 0;
    for (const auto& [name, run] : criteria) {
        ++id;
        const auto t0 = Clock::now();
        Verdict v{false, ""};
        try {
            v = run();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        const bool expected_fail = known.count(id) > 0;
        if (!v.pass && !expected_fail)
            ++unexpected;
        std::printf("criterion %2d %s: %s (%s) [%.1f s]%s\n", id, v.pass ? "PASS" : "FAIL", name, v.detail.c_str(),
                    seconds_since(t0), !v.pass && expected_fail ? " [known failure]" : "");
        std::fflush(stdout);
    }
    return unexpected == 0 ? 0 : 1;
}

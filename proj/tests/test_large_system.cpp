#include "macpa/large_system.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace macpa;

namespace {

// Large-system capacity of an N x K channel with i.i.d. entries of variance
// 1/N, per receive dimension, beta = K/N.
double marchenko_pastur_capacity(double snr, double beta)
{
    const auto F = [](double x, double z) {
        const double a = std::sqrt(x * std::pow(1 + std::sqrt(z), 2) + 1);
        const double b = std::sqrt(x * std::pow(1 - std::sqrt(z), 2) + 1);
        return (a - b) * (a - b);
    };
    const double f = F(snr, beta);
    return beta * std::log2(1 + snr - f / 4) + std::log2(1 + snr * beta - f / 4) - f / (4 * snr) * std::log2(std::exp(1.0));
}

PowerSlice uniform_slice(int K, int n_t, double p)
{
    return PowerSlice(static_cast<std::size_t>(K), std::vector<double>(static_cast<std::size_t>(n_t), p));
}

} // namespace

TEST_SUITE("large_system") {

TEST_CASE("iid single user matches the Marchenko-Pastur capacity")
{
    for (int n_t : {2, 4, 8})
        for (int n_r : {3, 4, 12})
            for (double snr : {0.1, 1.0, 30.0}) {
                const auto prof = iid_profile(1, n_t, n_r);
                const auto p = uniform_slice(1, n_t, 1.0);
                const auto b = solve_block(prof, snr, {0}, p, {});
                // H has entries of variance 1/n_t; rescale to 1/n_r
                const double expected = marchenko_pastur_capacity(snr * n_r / n_t, static_cast<double>(n_t) / n_r);
                CHECK(block_log_det(prof, snr, b, p) == doctest::Approx(expected).epsilon(1e-9));
            }
}

TEST_CASE("iid single user solves the scalar quadratic")
{
    const double rho = 2.5, P = 0.8, c = 5.0 / 3.0;
    const auto prof = iid_profile(1, 3, 5);
    const auto b = solve_block(prof, rho, {0}, uniform_slice(1, 3, P), {});
    const double q = 1 + rho * P * (c - 1);
    const double e = (-q + std::sqrt(q * q + 4 * rho * P)) / 2;
    CHECK(b.gamma[0][1] == doctest::Approx(c / (1 + e)).epsilon(1e-10));
    CHECK(b.delta[0][2] == doctest::Approx(e).epsilon(1e-10));
}

TEST_CASE("solution satisfies both fixed-point equations")
{
    const auto prof = exponential_profile(4, 6, {0.5, 0.2, 0.8}, {0.3, 0.6, 0.1});
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    PowerSlice p(3, std::vector<double>(4));
    for (auto& v : p)
        for (double& x : v)
            x = u(gen);
    const auto b = solve_block(prof, 10.0, {2, 0, 1}, p, {});
    CHECK(b.users == std::vector<int>{0, 1, 2});
    CHECK(b.load == 3.0);
    CHECK(b.member(2) == 2);
    CHECK(b.member(5) == -1);
    CHECK(block_residual(prof, 10.0, b, p) < 1e-10);
}

TEST_CASE("Newton solution agrees with plain Picard iteration")
{
    const auto prof = exponential_profile(5, 5, {0.4, 0.7}, {0.5, 0.2});
    const auto p = uniform_slice(2, 5, 1.5);
    const double rho = 100.0;
    const auto b = solve_block(prof, rho, {0, 1}, p, {1e-13, 100, 1.0});
    // Picard oracle
    std::vector<std::vector<double>> delta(2, std::vector<double>(5, 0.0));
    std::vector<std::vector<double>> gamma = delta;
    for (int it = 0; it < 200000; ++it) {
        RVector e = RVector::Zero(5);
        for (int m = 0; m < 2; ++m)
            for (int i = 0; i < 5; ++i)
                for (int j = 0; j < 5; ++j)
                    e(i) += prof.sigma[m](i, j) * delta[m][j] / 10.0;
        for (int m = 0; m < 2; ++m)
            for (int j = 0; j < 5; ++j) {
                double g = 0.0;
                for (int i = 0; i < 5; ++i)
                    g += prof.sigma[m](i, j) / (1 + e(i)) / 10.0;
                gamma[m][j] = g;
                delta[m][j] = 2 * rho * 1.5 / (1 + 2 * rho * 1.5 * g);
            }
    }
    for (int m = 0; m < 2; ++m)
        for (int j = 0; j < 5; ++j) {
            CHECK(b.gamma[m][j] == doctest::Approx(gamma[m][j]).epsilon(1e-9));
            CHECK(b.delta[m][j] == doctest::Approx(delta[m][j]).epsilon(1e-9));
        }
}

TEST_CASE("critically loaded block at high SNR converges")
{
    const auto prof = exponential_profile(10, 10, {0.5, 0.2}, {0.5, 0.2});
    const auto p = uniform_slice(2, 10, 1.0);
    for (double rho : {1e3, 1e6}) {
        const auto b = solve_block(prof, rho, {0}, p, {1e-12, 200, 1.0});
        CHECK(b.iterations < 100);
        CHECK(block_residual(prof, rho, b, p) < 1e-9);
    }
}

TEST_CASE("warm start and iteration cap")
{
    const auto prof = exponential_profile(3, 4, {0.5, 0.2}, {0.5, 0.2});
    const auto p = uniform_slice(2, 3, 1.0);
    const auto cold = solve_block(prof, 3.0, {0, 1}, p, {});
    const auto warm = solve_block(prof, 3.0, {0, 1}, p, {}, &cold);
    CHECK(warm.iterations <= 2);
    CHECK(warm.gamma[1][2] == doctest::Approx(cold.gamma[1][2]).epsilon(1e-12));
    try {
        solve_block(prof, 3.0, {0, 1}, p, {1e-14, 1, 1.0});
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.residual_history.size() == 1);
    }
    CHECK_THROWS_AS(solve_block(prof, 3.0, {0}, uniform_slice(2, 2, 1.0), {}), ModelError);
    CHECK_THROWS_AS(SolverConfig({1e-10, 10, 0.0}).validate(), ModelError);
    CHECK(solve_block(prof, 3.0, {}, p, {}).empty());
}

TEST_CASE("deterministic equivalents track Monte Carlo")
{
    const auto prof = exponential_profile(8, 8, {0.5, 0.2}, {0.5, 0.2});
    const GameContext ctx{prof, db_to_linear(3.0), CoordinationDistribution::two_user(0.5)};
    const auto powers = SpaceTimePowerProfile::uniform(ctx.coord, 8, {1.0, 1.0});
    const auto s = sample_channel(prof, 300, 17);
    for (int k = 0; k < 2; ++k) {
        const double approx = denormalize(approx_utility(ctx, powers, k), prof);
        const auto mc = utility_exact(ctx, powers, k, s);
        CHECK(std::abs(approx - mc.mean) / mc.mean < 0.03);
    }
}

TEST_CASE("last-decoded user sees a single-user channel")
{
    const auto prof = exponential_profile(3, 5, {0.5, 0.2}, {0.4, 0.7});
    const PowerSlice p{{1.0, 0.5, 2.0}, {0.3, 0.3, 1.0}};
    const auto order = DecodingOrder::from_sequence({0, 1});
    CHECK(solve_sic_interference_fp(prof, 2.0, order, 1, p).empty());
    const double last = approx_rate_sic(prof, 2.0, order, 1, p);
    const auto single = solve_block(prof, 2.0, {1}, p, {});
    CHECK(last == doctest::Approx(block_log_det(prof, 2.0, single, p)).epsilon(1e-12));
}

TEST_CASE("large-system sic rates telescope")
{
    const auto prof = exponential_profile(3, 4, {0.5, 0.2, 0.9}, {0.4, 0.7, 0.1});
    const PowerSlice p{{1.0, 0.5, 2.0}, {0.3, 0.3, 1.0}, {2.0, 0.0, 0.1}};
    const auto all = solve_block(prof, 2.0, {0, 1, 2}, p, {});
    const double joint = block_log_det(prof, 2.0, all, p);
    for (const auto& order : DecodingOrder::all(3)) {
        double sum = 0.0;
        for (int k = 0; k < 3; ++k)
            sum += approx_rate_sic(prof, 2.0, order, k, p);
        CHECK(sum == doctest::Approx(joint).epsilon(1e-10));
    }
}

TEST_CASE("sud utility is the signal minus the interference block")
{
    const auto prof = exponential_profile(2, 3, {0.5, 0.2}, {0.4, 0.7});
    const PowerSlice p{{1.0, 0.5}, {0.3, 2.0}};
    const auto fp = solve_sud_fps(prof, 2.0, 0, p);
    CHECK(fp.signal.users == std::vector<int>{0, 1});
    CHECK(fp.interference.users == std::vector<int>{1});
    const GameContext ctx{prof, 2.0, CoordinationDistribution::sud(2)};
    CHECK(approx_utility_sud(prof, 2.0, 0, p) == doctest::Approx(approx_rate(ctx, 0, 0, p)));
    CHECK(approx_utility_sud(prof, 2.0, 0, p) < approx_rate_sic(prof, 2.0, DecodingOrder::from_sequence({1, 0}), 0, p));
}

TEST_CASE("utility gradient matches finite differences")
{
    const auto prof = exponential_profile(3, 4, {0.5, 0.2}, {0.4, 0.7});
    for (const auto& coord : {CoordinationDistribution::two_user(0.3), CoordinationDistribution::sud(2)}) {
        const GameContext ctx{prof, 3.0, coord};
        std::mt19937_64 gen(9);
        const auto powers = SpaceTimePowerProfile::random(coord, 3, {1.0, 2.0}, gen);
        const SolverConfig fp{1e-13, 1000, 1.0};
        const auto g = utility_gradient(ctx, powers, fp);
        const double h = 1e-5;
        for (int k = 0; k < 2; ++k)
            for (int c = 0; c < coord.contexts(); ++c)
                for (int j = 0; j < 3; ++j) {
                    auto up = powers, dn = powers;
                    up.power[k][c][j] += h;
                    dn.power[k][c][j] -= h;
                    const double fd = (approx_utility(ctx, up, k, fp) - approx_utility(ctx, dn, k, fp)) / (2 * h);
                    CHECK(g[k][c][j] == doctest::Approx(fd).epsilon(1e-6));
                }
    }
}

TEST_CASE("sum rate adds the users")
{
    const auto prof = exponential_profile(2, 3, {0.5, 0.2}, {0.4, 0.7});
    const GameContext ctx{prof, 2.0, CoordinationDistribution::two_user(0.6)};
    const auto powers = SpaceTimePowerProfile::uniform(ctx.coord, 2, {1.0, 2.0});
    CHECK(approx_sum_rate(ctx, powers) ==
          doctest::Approx(approx_utility(ctx, powers, 0) + approx_utility(ctx, powers, 1)));
    CHECK(denormalize(0.5, prof) == doctest::Approx(1.5));
}

}

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

#include "macpa/game_exact.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace macpa {

namespace {

const double kLn2 = std::log(2.0);

void require_samples(const ChannelSamples& samples, int users)
{
    if (samples.count() < 1)
        throw ModelError("Monte-Carlo: no channel draws");
    if (static_cast<int>(samples.draws.front().size()) != users)
        throw ModelError("Monte-Carlo: draws do not match the number of users");
}

// rho * sum_{l in users} H_l Q_l H_l^H
CMatrix received_covariance(const std::vector<CMatrix>& H, const CovarianceSlice& Q, std::span<const int> users,
                            double rho)
{
    const auto n_r = H.front().rows();
    CMatrix S = CMatrix::Zero(n_r, n_r);
    for (int l : users) {
        const auto& Hl = H[static_cast<std::size_t>(l)];
        S.noalias() += Hl * Q[static_cast<std::size_t>(l)] * Hl.adjoint();
    }
    return rho * S;
}

std::vector<int> with_user(std::vector<int> users, int k)
{
    users.push_back(k);
    return users;
}

McEstimate rate_with_interferers(const GameContext& ctx, const std::vector<int>& interferers,
                                 const CovarianceSlice& Q, int k, const ChannelSamples& samples)
{
    require_samples(samples, ctx.profile.users());
    const auto signal = with_user(interferers, k);
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(samples.count()));
    for (const auto& H : samples.draws) {
        const CMatrix interference = received_covariance(H, Q, interferers, ctx.rho);
        const auto& Hk = H[static_cast<std::size_t>(k)];
        const CMatrix total = interference + ctx.rho * Hk * Q[static_cast<std::size_t>(k)] * Hk.adjoint();
        values.push_back(log2_det_identity_plus(total) - log2_det_identity_plus(interference));
    }
    return summarize(std::move(values));
}

CMatrix identity_plus(const CMatrix& X)
{
    CMatrix A = X;
    A.diagonal().array() += 1.0;
    return A;
}

CMatrix hpd_inverse(const CMatrix& A, const char* what)
{
    Eigen::LLT<CMatrix> llt(A);
    if (llt.info() != Eigen::Success)
        throw ModelError(std::string(what) + ": partial sum is not positive definite");
    return llt.solve(CMatrix::Identity(A.rows(), A.cols()));
}

} // namespace

McEstimate summarize(std::vector<double> per_draw)
{
    McEstimate est;
    const auto n = static_cast<double>(per_draw.size());
    if (per_draw.empty())
        return est;
    est.mean = std::accumulate(per_draw.begin(), per_draw.end(), 0.0) / n;
    if (per_draw.size() > 1) {
        double ss = 0.0;
        for (double v : per_draw)
            ss += (v - est.mean) * (v - est.mean);
        est.std_error = std::sqrt(ss / (n - 1.0) / n);
    }
    est.per_draw = std::move(per_draw);
    return est;
}

CovarianceSlice covariances(const UiuProfile& profile, const PowerSlice& powers)
{
    if (static_cast<int>(powers.size()) != profile.users())
        throw ModelError("covariances: one power vector per user required");
    CovarianceSlice Q;
    for (int k = 0; k < profile.users(); ++k) {
        const auto& p = powers[static_cast<std::size_t>(k)];
        if (static_cast<int>(p.size()) != profile.n_t)
            throw ModelError("covariances: power vector length must be n_t");
        const RVector v = Eigen::Map<const RVector>(p.data(), static_cast<Eigen::Index>(p.size()));
        Q.push_back(diagonal_covariance(profile.W[static_cast<std::size_t>(k)], v));
    }
    return Q;
}

double log2_det_sum(const std::vector<CMatrix>& H, const CovarianceSlice& Q, std::span<const int> users,
                    double rho)
{
    return log2_det_identity_plus(received_covariance(H, Q, users, rho));
}

McEstimate rate_sic_exact(const GameContext& ctx, const DecodingOrder& order, const CovarianceSlice& Q, int k,
                          const ChannelSamples& samples)
{
    return rate_with_interferers(ctx, order.decoded_after(k), Q, k, samples);
}

McEstimate rate_sic_exact(const GameContext& ctx, const DecodingOrder& order, const PowerSlice& powers, int k,
                          const ChannelSamples& samples)
{
    return rate_sic_exact(ctx, order, covariances(ctx.profile, powers), k, samples);
}

McEstimate rate_sud_exact(const GameContext& ctx, const CovarianceSlice& Q, int k, const ChannelSamples& samples)
{
    std::vector<int> others;
    for (int l = 0; l < ctx.profile.users(); ++l)
        if (l != k)
            others.push_back(l);
    return rate_with_interferers(ctx, others, Q, k, samples);
}

McEstimate rate_sud_exact(const GameContext& ctx, const PowerSlice& powers, int k, const ChannelSamples& samples)
{
    return rate_sud_exact(ctx, covariances(ctx.profile, powers), k, samples);
}

McEstimate utility_exact(const GameContext& ctx, const SpaceTimePowerProfile& powers, int k,
                         const ChannelSamples& samples)
{
    std::vector<double> acc(static_cast<std::size_t>(samples.count()), 0.0);
    for (int c = 0; c < ctx.coord.contexts(); ++c) {
        const double w = ctx.coord.weight(c);
        if (w == 0.0)
            continue;
        const auto Q = covariances(ctx.profile, powers.context_slice(c));
        const auto r = rate_with_interferers(ctx, ctx.coord.interferers(c, k), Q, k, samples);
        for (std::size_t d = 0; d < acc.size(); ++d)
            acc[d] += w * r.per_draw[d];
    }
    return summarize(std::move(acc));
}

McEstimate utility_sic(const GameContext& ctx, const SpaceTimePowerProfile& powers, int k,
                       const ChannelSamples& samples)
{
    if (ctx.coord.mode() != Decoding::sic)
        throw ModelError("utility_sic: coordination is not SIC");
    return utility_exact(ctx, powers, k, samples);
}

McEstimate sum_rate_exact(const GameContext& ctx, const SpaceTimePowerProfile& powers,
                          const ChannelSamples& samples)
{
    std::vector<double> acc(static_cast<std::size_t>(samples.count()), 0.0);
    for (int k = 0; k < ctx.profile.users(); ++k) {
        const auto u = utility_exact(ctx, powers, k, samples);
        for (std::size_t d = 0; d < acc.size(); ++d)
            acc[d] += u.per_draw[d];
    }
    return summarize(std::move(acc));
}

double trace_inequality_gap(const std::vector<CMatrix>& A, const std::vector<CMatrix>& B)
{
    if (A.empty() || A.size() != B.size())
        throw ModelError("trace_inequality_gap: stacks must be nonempty and of equal length");
    const auto n = A.front().rows();
    for (std::size_t i = 0; i < A.size(); ++i) {
        if (A[i].rows() != n || A[i].cols() != n || B[i].rows() != n || B[i].cols() != n)
            throw ModelError("trace_inequality_gap: all matrices must share one square size");
        if (hermitian_error(A[i]) > 1e-10 || hermitian_error(B[i]) > 1e-10)
            throw ModelError("trace_inequality_gap: input " + std::to_string(i + 1) + " is not Hermitian");
    }

    CMatrix sum_a = CMatrix::Zero(n, n);
    CMatrix sum_b = CMatrix::Zero(n, n);
    double gap = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i) {
        sum_a += A[i];
        sum_b += B[i];
        const CMatrix diff = hpd_inverse(sum_b, "trace_inequality_gap") - hpd_inverse(sum_a, "trace_inequality_gap");
        gap += ((A[i] - B[i]) * diff).trace().real();
    }
    return gap;
}

McEstimate dsc_gap(const GameContext& ctx, const SpaceTimePowerProfile& first,
                   const SpaceTimePowerProfile& second, const ChannelSamples& samples)
{
    require_samples(samples, ctx.profile.users());
    const int K = ctx.profile.users();
    std::vector<CovarianceSlice> Q1, Q2;
    for (int c = 0; c < ctx.coord.contexts(); ++c) {
        Q1.push_back(covariances(ctx.profile, first.context_slice(c)));
        Q2.push_back(covariances(ctx.profile, second.context_slice(c)));
    }

    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(samples.count()));
    for (const auto& H : samples.draws) {
        double acc = 0.0;
        for (int c = 0; c < ctx.coord.contexts(); ++c) {
            const double w = ctx.coord.weight(c);
            if (w == 0.0)
                continue;
            auto block = [&](const CovarianceSlice& Q, int k) {
                const auto& Hk = H[static_cast<std::size_t>(k)];
                return CMatrix(ctx.rho * Hk * Q[static_cast<std::size_t>(k)] * Hk.adjoint());
            };
            std::vector<CMatrix> a, b;
            if (ctx.coord.mode() == Decoding::sic) {
                // Last-decoded user first, identity folded into the first block.
                const auto& order = ctx.coord.order(c);
                for (int r = K - 1; r >= 0; --r) {
                    a.push_back(block(Q1[static_cast<std::size_t>(c)], order.user_at(r)));
                    b.push_back(block(Q2[static_cast<std::size_t>(c)], order.user_at(r)));
                }
            } else {
                CMatrix sa = CMatrix::Zero(ctx.profile.n_r, ctx.profile.n_r);
                CMatrix sb = sa;
                for (int k = 0; k < K; ++k) {
                    sa += block(Q1[static_cast<std::size_t>(c)], k);
                    sb += block(Q2[static_cast<std::size_t>(c)], k);
                }
                a.push_back(sa);
                b.push_back(sb);
            }
            a.front() = identity_plus(a.front());
            b.front() = identity_plus(b.front());
            acc += w * trace_inequality_gap(a, b);
        }
        values.push_back(acc);
    }
    return summarize(std::move(values));
}

McEstimate concavity_second_derivative(const GameContext& ctx, const DecodingOrder& order, int k,
                                       const CMatrix& Q1, const CMatrix& Q2, double lambda,
                                       const CovarianceSlice& others, const ChannelSamples& samples)
{
    require_samples(samples, ctx.profile.users());
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw ModelError("concavity_second_derivative: lambda must lie in [0, 1]");
    const auto interferers = order.decoded_after(k);
    const CMatrix Q = lambda * Q1 + (1.0 - lambda) * Q2;
    const CMatrix dQ = Q1 - Q2;

    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(samples.count()));
    for (const auto& H : samples.draws) {
        const auto& Hk = H[static_cast<std::size_t>(k)];
        CMatrix M = identity_plus(received_covariance(H, others, interferers, ctx.rho));
        M.noalias() += ctx.rho * Hk * Q * Hk.adjoint();
        Eigen::LLT<CMatrix> llt(M);
        const CMatrix A = ctx.rho * Hk.adjoint() * llt.solve(Hk);
        const CMatrix AdQ = A * dQ;
        values.push_back(-(AdQ * AdQ).trace().real() / kLn2);
    }
    return summarize(std::move(values));
}

double KktUserReport::max() const
{
    return std::max({stationarity, dual_feasibility, complementary_slackness});
}

KktReport kkt_residual(const GameContext& ctx, const SpaceTimePowerProfile& powers,
                       const std::vector<double>& lambda, const ProfileGradient& gradient, double active_tol)
{
    const int K = ctx.profile.users();
    if (static_cast<int>(lambda.size()) != K || static_cast<int>(gradient.size()) != K)
        throw ModelError("kkt_residual: one multiplier and one gradient per user required");
    KktReport report;
    for (int k = 0; k < K; ++k) {
        const double lk = lambda[static_cast<std::size_t>(k)];
        if (lk < 0.0)
            throw ModelError("kkt_residual: negative Lagrange multiplier for user " + std::to_string(k + 1));
        KktUserReport u;
        for (int c = 0; c < ctx.coord.contexts(); ++c) {
            const double target = ctx.coord.weight(c) * lk;
            const auto& P = powers.power[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)];
            const auto& g = gradient[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)];
            for (std::size_t j = 0; j < P.size(); ++j) {
                if (P[j] > active_tol)
                    u.stationarity = std::max(u.stationarity, std::abs(g[j] - target));
                else
                    u.dual_feasibility = std::max(u.dual_feasibility, g[j] - target);
            }
        }
        u.complementary_slackness = std::abs(lk * powers.slack(k, ctx.coord, ctx.profile.n_t));
        report.max_residual = std::max(report.max_residual, u.max());
        report.users.push_back(u);
    }
    return report;
}

} // namespace macpa

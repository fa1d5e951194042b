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

#include "macpa/channel_model.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace macpa {

/// A SIC decoding order. Users and ranks are 0-based: rank(k) == 0 means user
/// k is decoded first (and sees every other user as interference), rank K-1
/// means user k is decoded last, after all others have been cancelled.
class DecodingOrder {
public:
    DecodingOrder() = default;
    /// `rank[k]` is the decoding rank of user k; must be a permutation of 0..K-1.
    explicit DecodingOrder(std::vector<int> rank);
    /// Build from the sequence of users in decoding order (first decoded first).
    static DecodingOrder from_sequence(const std::vector<int>& users_first_to_last);
    /// All K! orders, lexicographic in the decoding sequence.
    static std::vector<DecodingOrder> all(int users);

    int users() const { return static_cast<int>(rank_.size()); }
    int rank(int k) const { return rank_[static_cast<std::size_t>(k)]; }
    int user_at(int r) const { return inverse_[static_cast<std::size_t>(r)]; }
    /// Users decoded after k, i.e. still present as interference when k is decoded.
    std::vector<int> decoded_after(int k) const;
    int count_after(int k) const { return users() - 1 - rank(k); }

    bool operator==(const DecodingOrder&) const = default;

private:
    std::vector<int> rank_;
    std::vector<int> inverse_;
};

enum class Decoding { sic, sud };

/// Law of the public coordination signal. In SIC mode every entry is a
/// decoding order with its probability; in SUD mode there is a single
/// deterministic context. Both modes are indexed by "context" c.
class CoordinationDistribution {
public:
    static CoordinationDistribution sud(int users);
    static CoordinationDistribution sic(std::vector<DecodingOrder> orders, std::vector<double> probs);
    static CoordinationDistribution sic_uniform(int users);
    static CoordinationDistribution fixed_order(const DecodingOrder& order);
    /// Two users; `p` is the probability that user 1 (index 0) is decoded
    /// SECOND, i.e. interference-free. Context 0 decodes user 1 first,
    /// context 1 decodes user 1 second.
    static CoordinationDistribution two_user(double p);

    Decoding mode() const { return mode_; }
    int users() const { return users_; }
    int contexts() const { return static_cast<int>(probs_.size()); }
    double weight(int c) const { return probs_[static_cast<std::size_t>(c)]; }
    const std::vector<double>& weights() const { return probs_; }
    /// SIC only.
    const DecodingOrder& order(int c) const { return orders_[static_cast<std::size_t>(c)]; }
    /// Users treated as interference when k is decoded in context c.
    std::vector<int> interferers(int c, int k) const;

private:
    Decoding mode_ = Decoding::sic;
    int users_ = 0;
    std::vector<DecodingOrder> orders_;
    std::vector<double> probs_;
};

/// Per-user, per-context diagonal powers in each user's transmit eigenbasis.
using PowerSlice = std::vector<std::vector<double>>;   // [user][mode]

struct SpaceTimePowerProfile {
    std::vector<std::vector<std::vector<double>>> power; // [user][context][mode]
    std::vector<double> budget;                            // average per-antenna budget

    static SpaceTimePowerProfile uniform(const CoordinationDistribution& coord, int n_t,
                                         const std::vector<double>& budgets);
    /// Random strictly positive profile whose budget constraints are tight.
    static SpaceTimePowerProfile random(const CoordinationDistribution& coord, int n_t,
                                        const std::vector<double>& budgets, std::mt19937_64& gen);

    int users() const { return static_cast<int>(power.size()); }
    /// sum_c p_c sum_j P_k^(c)(j)
    double averaged_trace(int k, const CoordinationDistribution& coord) const;
    /// n_t * budget_k - averaged_trace
    double slack(int k, const CoordinationDistribution& coord, int n_t) const;
    bool feasible(const CoordinationDistribution& coord, int n_t, double tol = 1e-9) const;
    PowerSlice context_slice(int c) const;
};

struct GameContext {
    UiuProfile profile;
    double rho = 1.0;            // 1 / noise variance
    CoordinationDistribution coord;

    void validate() const;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

} // namespace macpa

// SPDX-License-Identifier: Apache-2.0
//
// nfrsma - near-field rate-splitting ISAC simulation library
// Copyright (C) 2026 The nfrsma Authors
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

#ifndef NFRSMA_RATES_HPP
#define NFRSMA_RATES_HPP

#include "nfrsma/precoding.hpp"
#include "nfrsma/scenario.hpp"
#include "nfrsma/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nfrsma
{
    namespace detail
    {
        inline void check_user(const BeamGains &gains, int k)
        {
            if (k < 0 || k >= gains.k_users())
                throw Error(ErrorCode::IndexOutOfRange, "user index " + std::to_string(k));
        }
    } // namespace detail

    // gamma_{k,c} = g_k0 P_0 / (g_k0 probe_0 + g_kk (P_k + probe_k) + sigma_k^2), k in K1.
    inline double common_sinr(const BeamGains &gains, const PowerAllocation &powers, const SelectionVector &selection,
                              int k, double noise_w)
    {
        detail::check_user(gains, k);
        if (!selection[k])
            throw Error(ErrorCode::NotInCommonGroup, "user " + std::to_string(k) + " does not decode the common stream");
        const int i = k + 1;
        const double interference = gains(k, 0) * powers.probe(0) + gains(k, i) * (powers.comm(i) + powers.probe(i));
        return gains(k, 0) * powers.comm(0) / (interference + noise_w);
    }

    // gamma_{k,p} = g_kk P_k / (g_k0 ((1 - s_k) P_0 + probe_0) + g_kk probe_k + sigma_k^2).
    inline double private_sinr(const BeamGains &gains, const PowerAllocation &powers, const SelectionVector &selection,
                               int k, double noise_w)
    {
        detail::check_user(gains, k);
        const int i = k + 1;
        const double common_interference = selection[k] ? 0.0 : powers.comm(0);
        const double interference = gains(k, 0) * (common_interference + powers.probe(0)) + gains(k, i) * powers.probe(i);
        return gains(k, i) * powers.comm(i) / (interference + noise_w);
    }

    struct RateReport
    {
        double common_cap = 0.0;        // R_c, min over K1 of log2(1 + gamma_{k,c}); 0 if K1 empty
        Eigen::VectorXd common_rates;   // log2(1 + gamma_{k,c}), NaN outside K1
        Eigen::VectorXd private_rates;  // log2(1 + gamma_{k,p})
        Eigen::VectorXd rates;          // R_k = s_k R_{k,c} + log2(1 + gamma_{k,p})
        bool qos_ok = false;            // R_k >= R_th for all k
        bool common_ok = false;         // sum_k s_k R_{k,c} <= R_c
        bool nonnegative_ok = false;    // R_{k,c} >= 0, and zero outside K1

        bool feasible() const { return qos_ok && common_ok && nonnegative_ok; }
    };

    inline RateReport achievable_rates(const BeamGains &gains, const PowerAllocation &powers,
                                       const SelectionVector &selection, const RateAllocation &rate_alloc,
                                       double noise_w, double qos_bpshz, double slack = 1e-9)
    {
        const int k_users = gains.k_users();
        if (selection.size() != k_users || rate_alloc.common_share.size() != k_users)
            throw Error(ErrorCode::DimensionMismatch, "selection / rate allocation length differs from K");
        RateReport rep;
        rep.common_rates = Eigen::VectorXd::Constant(k_users, std::numeric_limits<double>::quiet_NaN());
        rep.private_rates.resize(k_users);
        rep.rates.resize(k_users);

        double cap = std::numeric_limits<double>::infinity();
        double shared = 0.0;
        rep.nonnegative_ok = true;
        for (int k = 0; k < k_users; ++k)
        {
            const double share = rate_alloc.common_share(k);
            if (share < 0.0 || (!selection[k] && share != 0.0))
                rep.nonnegative_ok = false;
            if (selection[k])
            {
                rep.common_rates(k) = std::log2(1.0 + common_sinr(gains, powers, selection, k, noise_w));
                cap = std::min(cap, rep.common_rates(k));
                shared += share;
            }
            rep.private_rates(k) = std::log2(1.0 + private_sinr(gains, powers, selection, k, noise_w));
            rep.rates(k) = (selection[k] ? share : 0.0) + rep.private_rates(k);
        }
        rep.common_cap = selection.any() ? cap : 0.0;
        rep.common_ok = shared <= rep.common_cap + slack;
        rep.qos_ok = (rep.rates.array() >= qos_bpshz - slack).all();
        return rep;
    }

    inline RateReport achievable_rates(const BeamGains &gains, const PowerAllocation &powers,
                                       const SelectionVector &selection, const RateAllocation &rate_alloc,
                                       const Scenario &scenario)
    {
        return achievable_rates(gains, powers, selection, rate_alloc, scenario.noise_user_w, scenario.qos_bpshz);
    }
} // namespace nfrsma

#endif

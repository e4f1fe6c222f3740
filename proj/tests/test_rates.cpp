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


#include "oracles.hpp"

#include <catch_amalgamated.hpp>

using namespace nfrsma;
using Catch::Approx;

namespace
{
    BeamGains toy_gains()
    {
        BeamGains g{Eigen::MatrixXd(2, 3)};
        g.g << 2e-7, 1e-7, 0.0, 3e-7, 0.0, 1.5e-7;
        return g;
    }
} // namespace

TEST_CASE("common SINR", "[rates]")
{
    const BeamGains g = toy_gains();
    PowerAllocation p = PowerAllocation::zeros(2);
    p.comm << 0.5, 0.2, 0.1;
    const SelectionVector s = SelectionVector::from_string("11");
    CHECK(common_sinr(g, p, s, 0, 1e-11) == Approx(1e-7 / 2.001e-8).epsilon(1e-12));
    CHECK(common_sinr(g, p, s, 0, 1e-11) == Approx(4.9975).epsilon(1e-4));

    PowerAllocation zero0 = p;
    zero0.comm(0) = 0.0;
    CHECK(common_sinr(g, zero0, s, 0, 1e-11) == 0.0);

    PowerAllocation probed = p;
    probed.probe(0) = 0.01;
    CHECK(common_sinr(g, probed, s, 0, 1e-11) < common_sinr(g, p, s, 0, 1e-11));

    try
    {
        common_sinr(g, p, SelectionVector::from_string("01"), 0, 1e-11);
        FAIL("expected NotInCommonGroup");
    }
    catch (const Error &e)
    {
        CHECK(e.code() == ErrorCode::NotInCommonGroup);
    }
}

TEST_CASE("private SINR", "[rates]")
{
    BeamGains g{Eigen::MatrixXd(1, 2)};
    g.g << 2e-7, 1e-7;
    PowerAllocation p = PowerAllocation::zeros(1);
    p.comm << 0.5, 0.3;
    CHECK(private_sinr(g, p, SelectionVector::from_string("0"), 0, 1e-11) == Approx(3e-8 / 1.0001e-7).epsilon(1e-12));
    CHECK(private_sinr(g, p, SelectionVector::from_string("0"), 0, 1e-11) == Approx(0.29997).epsilon(1e-4));
    CHECK(private_sinr(g, p, SelectionVector::from_string("1"), 0, 1e-11) == Approx(3e-8 / 1e-11).epsilon(1e-12));

    try
    {
        private_sinr(g, p, SelectionVector::from_string("1"), 1, 1e-11);
        FAIL("expected IndexOutOfRange");
    }
    catch (const Error &e)
    {
        CHECK(e.code() == ErrorCode::IndexOutOfRange);
    }

    // Monotone in own power.
    double prev = -1.0;
    for (double pk = 0.0; pk <= 1.0; pk += 0.1)
    {
        p.comm(1) = pk;
        const double v = private_sinr(g, p, SelectionVector::from_string("0"), 0, 1e-11);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("achievable rates", "[rates]")
{
    const BeamGains g = toy_gains();
    PowerAllocation p = PowerAllocation::zeros(2);
    p.comm << 0.5, 0.2, 0.1;

    SECTION("singleton common group")
    {
        const SelectionVector s = SelectionVector::from_string("10");
        RateAllocation ra = RateAllocation::zeros(2);
        const RateReport rep = achievable_rates(g, p, s, ra, 1e-11, 1.0);
        CHECK(rep.common_cap == Approx(std::log2(1.0 + common_sinr(g, p, s, 0, 1e-11))).epsilon(1e-15));
        CHECK(std::isnan(rep.common_rates(1)));
    }
    SECTION("SDMA")
    {
        const SelectionVector s(2, false);
        const RateReport rep = achievable_rates(g, p, s, RateAllocation::zeros(2), 1e-11, 1.0);
        CHECK(rep.common_cap == 0.0);
        for (int k = 0; k < 2; ++k)
            CHECK(rep.rates(k) == Approx(std::log2(1.0 + private_sinr(g, p, s, k, 1e-11))).epsilon(1e-15));
    }
    SECTION("random points against direct inequalities")
    {
        Rng rng(9);
        for (int trial = 0; trial < 200; ++trial)
        {
            SelectionVector s(2);
            s.set(0, rng.bit());
            s.set(1, rng.bit());
            PowerAllocation q = PowerAllocation::zeros(2);
            for (int i = 0; i < 3; ++i)
                q.comm(i) = rng.uniform();
            RateAllocation ra = RateAllocation::zeros(2);
            for (int k = 0; k < 2; ++k)
                if (s[k])
                    ra.common_share(k) = rng.uniform(0.0, 3.0);
            const double qos = rng.uniform(0.0, 6.0);
            const RateReport rep = achievable_rates(g, q, s, ra, 1e-11, qos, 0.0);

            double cap = std::numeric_limits<double>::infinity(), shared = 0.0;
            bool qos_ok = true;
            for (int k = 0; k < 2; ++k)
            {
                const double gk0 = g(k, 0), gkk = g(k, k + 1);
                const double priv = gkk * q.comm(k + 1) / ((s[k] ? 0.0 : gk0 * q.comm(0)) + 1e-11);
                if (s[k])
                {
                    cap = std::min(cap, std::log2(1.0 + gk0 * q.comm(0) / (gkk * q.comm(k + 1) + 1e-11)));
                    shared += ra.common_share(k);
                }
                if ((s[k] ? ra.common_share(k) : 0.0) + std::log2(1.0 + priv) < qos)
                    qos_ok = false;
            }
            if (!s.any())
                cap = 0.0;
            CHECK(rep.common_cap == Approx(cap).epsilon(1e-12));
            CHECK(rep.qos_ok == qos_ok);
            CHECK(rep.common_ok == (shared <= cap));
            CHECK(rep.nonnegative_ok);
        }
    }
    SECTION("non-member share flagged")
    {
        RateAllocation ra = RateAllocation::zeros(2);
        ra.common_share(1) = 0.1;
        CHECK_FALSE(achievable_rates(g, p, SelectionVector::from_string("10"), ra, 1e-11, 0.0).nonnegative_ok);
    }
}

TEST_CASE("probe shift never lowers an SINR", "[rates]")
{
    Rng rng(10);
    const BeamGains g = toy_gains();
    for (int i = 0; i < 100; ++i)
    {
        PowerAllocation p = PowerAllocation::zeros(2);
        for (int j = 0; j < 3; ++j)
        {
            p.comm(j) = rng.uniform();
            p.probe(j) = rng.uniform();
        }
        PowerAllocation shifted = p;
        shifted.comm = p.comm + p.probe;
        shifted.probe.setZero();
        SelectionVector s(2);
        s.set(0, rng.bit());
        s.set(1, rng.bit());
        for (int k = 0; k < 2; ++k)
        {
            if (s[k])
                CHECK(common_sinr(g, shifted, s, k, 1e-11) >= common_sinr(g, p, s, k, 1e-11));
            CHECK(private_sinr(g, shifted, s, k, 1e-11) >= private_sinr(g, p, s, k, 1e-11));
        }
    }
}

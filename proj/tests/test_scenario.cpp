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


#include "nfrsma/scenario.hpp"

#include <catch_amalgamated.hpp>

#include <numbers>

using namespace nfrsma;
using Catch::Approx;

namespace
{
    const char *base_doc = R"({
        "n_tx": 32, "n_rx": 16, "carrier_hz": 30e9, "spacing_wavelengths": 0.5,
        "k_users": 4, "target_distance_m": 15, "target_angle_deg": 45,
        "p_max_dbm": 30, "noise_user_dbm": -80, "noise_radar_dbm": -80, "qos_bpshz": 3
    })";

    ArrayGeometry lambda_cm_geometry(int n_tx, int n_rx)
    {
        return ArrayGeometry::make(n_tx, n_rx, 0.005, speed_of_light / 0.01);
    }
} // namespace

TEST_CASE("dBm conversion", "[scenario]")
{
    CHECK(dbm_to_watts(30.0) == Approx(1.0).epsilon(1e-14));
    CHECK(dbm_to_watts(-80.0) == Approx(1.0e-11).epsilon(1e-12));
    for (double dbm : {-120.0, -80.0, -3.5, 0.0, 17.0, 46.0})
        CHECK(std::abs(watts_to_dbm(dbm_to_watts(dbm)) - dbm) <= 1e-12 * std::max(1.0, std::abs(dbm)));
}

TEST_CASE("Rayleigh distance", "[scenario]")
{
    CHECK(rayleigh_distance(lambda_cm_geometry(128, 64), ArraySide::tx) == Approx(80.645).margin(1e-9));
    CHECK(rayleigh_distance(lambda_cm_geometry(128, 64), ArraySide::rx) == Approx(19.845).margin(1e-9));

    const double lambda = 0.01;
    const auto two = ArrayGeometry::make(2, 1, lambda / 2, speed_of_light / lambda);
    CHECK(rayleigh_distance(two, ArraySide::tx) == Approx(lambda / 2).epsilon(1e-12));

    double prev = 0.0;
    for (int n = 2; n <= 256; n *= 2)
    {
        const double z = rayleigh_distance(lambda_cm_geometry(n, 1), ArraySide::tx);
        CHECK(z > prev);
        prev = z;
    }
    CHECK(rayleigh_distance(ArrayGeometry::make(32, 1, 0.006, 30e9), ArraySide::tx) >
          rayleigh_distance(ArrayGeometry::make(32, 1, 0.005, 30e9), ArraySide::tx));
}

TEST_CASE("geometry invariants", "[scenario]")
{
    const auto g = ArrayGeometry::make(32, 16, 0.005, 30e9);
    CHECK(std::abs(g.wavelength_m - speed_of_light / 30e9) <= 1e-12 * g.wavelength_m);
    CHECK(g.aperture(ArraySide::tx) == Approx(31 * 0.005));
    CHECK_THROWS_AS(ArrayGeometry::make(1, 1, 0.005, 30e9), Error);
    CHECK_THROWS_AS(ArrayGeometry::make(4, 0, 0.005, 30e9), Error);
    CHECK_THROWS_AS(ArrayGeometry::make(4, 1, 0.0, 30e9), Error);
}

TEST_CASE("sample_users", "[scenario]")
{
    UserRegion region;
    const auto a = sample_users(region, 20, 42), b = sample_users(region, 20, 42);
    REQUIRE(a.size() == 20);
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        CHECK(a[i].distance_m == b[i].distance_m);
        CHECK(a[i].angle_rad == b[i].angle_rad);
        CHECK(a[i].distance_m >= 15.0);
        CHECK(a[i].distance_m <= 25.0);
        CHECK(std::abs(a[i].angle_rad) <= std::numbers::pi / 3);
    }
    const auto many = sample_users(region, 10000, 7);
    double mean = 0.0;
    for (const auto &p : many)
        mean += p.distance_m;
    mean /= many.size();
    CHECK(mean >= 19.8);
    CHECK(mean <= 20.2);

    // Prefix property: fewer users from the same seed are the leading draws.
    const auto few = sample_users(region, 4, 42);
    for (std::size_t i = 0; i < few.size(); ++i)
        CHECK(few[i].distance_m == a[i].distance_m);
}

TEST_CASE("pinned generator output", "[scenario]")
{
    // mt19937_64 is specified by the standard: the 10000th output for the default seed.
    std::mt19937_64 ref;
    ref.discard(9999);
    CHECK(ref() == 9981545732273789042ULL);

    // Frozen draws for seed 123; changes here break cross-platform reproducibility.
    const auto users = sample_users(UserRegion{}, 2, 123);
    Rng rng(123);
    const double d0 = 15.0 + 10.0 * (static_cast<double>(rng.next_u64() >> 11) * 0x1.0p-53);
    CHECK(users[0].distance_m == d0);
    CHECK(stream_seed(5, 0) != stream_seed(5, 1));
    CHECK(stream_seed(5, 1) == stream_seed(5, 1));
}

TEST_CASE("load_scenario", "[scenario]")
{
    const Scenario sc = load_scenario(base_doc);
    CHECK(sc.k_users() == 4);
    CHECK(sc.p_max_w == Approx(1.0));
    CHECK(sc.noise_user_w == Approx(1e-11));
    CHECK(sc.noise_radar_w == Approx(1e-11));
    CHECK(sc.target.angle_rad == Approx(std::numbers::pi / 4));
    CHECK(sc.geometry.spacing_m == Approx(0.5 * speed_of_light / 30e9));
    CHECK(sc.coherence_len == 256);
    CHECK(sc.sa_temp == 20.0);
    CHECK(sc.sa_decay == 0.9);
    CHECK(std::abs(sc.target_gain) == Approx(std::abs(default_target_gain(sc.geometry, sc.target))));
    // 32 elements at 30 GHz: Z_t = 4.8 m, so 15-25 m users raise warnings but load.
    CHECK_FALSE(sc.warnings.empty());

    SECTION("missing qos_bpshz")
    {
        std::string doc = base_doc;
        doc.replace(doc.find(", \"qos_bpshz\": 3"), std::string(", \"qos_bpshz\": 3").size(), "");
        try
        {
            load_scenario(doc);
            FAIL("expected MissingKey");
        }
        catch (const Error &e)
        {
            CHECK(e.code() == ErrorCode::MissingKey);
        }
    }
    SECTION("invalid values")
    {
        auto expect_invalid = [](const std::string &from, const std::string &to)
        {
            std::string doc = base_doc;
            doc.replace(doc.find(from), from.size(), to);
            try
            {
                load_scenario(doc);
                FAIL("expected InvalidValue for " + to);
            }
            catch (const Error &e)
            {
                CHECK(e.code() == ErrorCode::InvalidValue);
            }
        };
        expect_invalid("\"k_users\": 4", "\"k_users\": 0");
        expect_invalid("\"qos_bpshz\": 3", "\"qos_bpshz\": 3, \"sa_decay\": 1.0");
        expect_invalid("\"qos_bpshz\": 3", "\"qos_bpshz\": 3, \"sa_decay\": 0.0");
        expect_invalid("\"p_max_dbm\": 30", "\"p_max_w\": 0");
        expect_invalid("\"p_max_dbm\": 30", "\"p_max_w\": -1");
    }
    SECTION("explicit users")
    {
        std::string doc = base_doc;
        doc.replace(doc.find("\"k_users\": 4"), std::string("\"k_users\": 4").size(),
                    "\"users\": [[15, 10], [20, -30]]");
        const Scenario s2 = load_scenario(doc);
        REQUIRE(s2.k_users() == 2);
        CHECK(s2.users[1].angle_rad == Approx(-std::numbers::pi / 6));
        CHECK(s2.users[0].distance_m == 15.0);
    }
}

TEST_CASE("default scenario is valid", "[scenario]")
{
    Scenario sc = default_scenario();
    CHECK_NOTHROW(validate_scenario(sc));
    sc.users.clear();
    CHECK_THROWS_AS(validate_scenario(sc), Error);
}

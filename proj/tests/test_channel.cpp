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
    ArrayGeometry test_geometry(int n_tx = 4, int n_rx = 2)
    {
        return ArrayGeometry::make(n_tx, n_rx, 0.005, speed_of_light / 0.01);
    }
} // namespace

TEST_CASE("array response matches element-wise formula", "[channel]")
{
    const auto g = test_geometry();
    const PolarPosition pos{15.0, std::numbers::pi / 4};
    const auto a = array_response(g, ArraySide::tx, pos);
    const auto ref = oracle::steering(4, 0.005, g.wavelength_m, 15.0, std::numbers::pi / 4);
    REQUIRE(a.size() == 4);
    for (int n = 0; n < 4; ++n)
        CHECK(std::abs(a(n) - ref[static_cast<std::size_t>(n)]) <= 1e-12);
}

TEST_CASE("array response limits", "[channel]")
{
    const auto g = ArrayGeometry::make(16, 4, 0.005, 30e9);
    SECTION("endfire")
    {
        const auto a = array_response(g, ArraySide::tx, {7.0, std::numbers::pi / 2});
        for (int n = 0; n < 16; ++n)
        {
            const double phase = 2.0 * std::numbers::pi * (n + 1) * 0.005 / g.wavelength_m;
            CHECK(std::abs(a(n) - std::polar(1.0, phase)) <= 1e-9);
        }
    }
    SECTION("far broadside")
    {
        const auto a = array_response(g, ArraySide::tx, {1e13, 0.0});
        for (int n = 0; n < 16; ++n)
            CHECK(std::abs(a(n) - 1.0) <= 1e-9);
    }
    SECTION("zero distance")
    {
        try
        {
            array_response(g, ArraySide::tx, {0.0, 0.1});
            FAIL("expected ZeroDistance");
        }
        catch (const Error &e)
        {
            CHECK(e.code() == ErrorCode::ZeroDistance);
        }
        CHECK_THROWS_AS(user_channel(g, {-1.0, 0.0}), Error);
        CHECK_THROWS_AS(array_response_jacobian(g, ArraySide::rx, {0.0, 0.0}), Error);
    }
    SECTION("Taylor model close to exact spherical model near broadside")
    {
        const auto t = array_response(g, ArraySide::tx, {20.0, 0.2});
        const auto e = array_response(g, ArraySide::tx, {20.0, 0.2}, PhaseModel::exact);
        CHECK((t - e).norm() / t.norm() < 1e-2);
        CHECK((t - e).norm() > 0.0);
    }
}

TEST_CASE("Jacobian against central differences", "[channel]")
{
    const auto g = test_geometry(128, 64);
    Rng rng(11);
    for (int i = 0; i < 20; ++i)
    {
        const PolarPosition pos{rng.uniform(5.0, 80.0), rng.uniform(-1.0, 1.0)};
        for (ArraySide side : {ArraySide::tx, ArraySide::rx})
        {
            const auto jac = array_response_jacobian(g, side, pos);
            const Eigen::VectorXcd ft = (array_response(g, side, {pos.distance_m, pos.angle_rad + 1e-6}) -
                                         array_response(g, side, {pos.distance_m, pos.angle_rad - 1e-6})) /
                                        2e-6;
            const Eigen::VectorXcd fd = (array_response(g, side, {pos.distance_m + 1e-4, pos.angle_rad}) -
                                         array_response(g, side, {pos.distance_m - 1e-4, pos.angle_rad})) /
                                        2e-4;
            CHECK((jac.d_theta - ft).norm() / ft.norm() <= 1e-6);
            CHECK((jac.d_dist - fd).norm() / fd.norm() <= 1e-6);
        }
    }
    SECTION("theta = 0 gives n d")
    {
        const auto gg = ArrayGeometry::make(8, 1, 0.005, 30e9);
        const auto jac = array_response_jacobian(gg, ArraySide::tx, {10.0, 0.0});
        const auto a = array_response(gg, ArraySide::tx, {10.0, 0.0});
        const double k = 2.0 * std::numbers::pi / gg.wavelength_m;
        for (int n = 0; n < 8; ++n)
            CHECK(std::abs(jac.d_theta(n) - cdouble(0.0, k * (n + 1) * 0.005) * a(n)) <= 1e-12 * k);
    }
    SECTION("distance derivative vanishes far away")
    {
        const auto jac = array_response_jacobian(g, ArraySide::tx, {1e8, 0.3});
        CHECK(jac.d_dist.norm() < 1e-12);
    }
}

TEST_CASE("user channel", "[channel]")
{
    const auto g = ArrayGeometry::make(32, 16, 0.005, 30e9);
    const auto h = user_channel(g, {15.0, 0.3});
    CHECK(std::abs(h.gain) == Approx(5.3015e-5).epsilon(1e-4));
    CHECK(std::abs(h.gain) == Approx(speed_of_light / (4.0 * std::numbers::pi * 30e9 * 15.0)).epsilon(1e-14));
    const auto h2 = user_channel(g, {30.0, 0.3});
    CHECK(std::abs(h2.gain) == Approx(std::abs(h.gain) / 2).epsilon(1e-14));
    for (int n = 0; n < 32; ++n)
        CHECK(std::abs(std::abs(h.entries(n)) - std::abs(h.gain)) <= 1e-12 * std::abs(h.gain));
    CHECK(h.entries.squaredNorm() == Approx(32 * std::norm(h.gain)).epsilon(1e-12));

    const auto again = user_channel(g, {15.0, 0.3});
    CHECK((again.entries.array() == h.entries.array()).all());
}

TEST_CASE("sensing bundle", "[channel]")
{
    const auto g = ArrayGeometry::make(16, 8, 0.005, 30e9);
    const PolarPosition target{12.0, 0.6};
    const auto b = sensing_bundle(g, target, {1e-6, 2e-7});
    REQUIRE(b.response.rows() == 8);
    REQUIRE(b.response.cols() == 16);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(b.response);
    CHECK(svd.singularValues()(1) <= 1e-9 * svd.singularValues()(0));
    CHECK(((b.response.array().abs() - 1.0).abs() <= 1e-12).all());
    CHECK((b.full() - b.gain * b.response).norm() == 0.0);

    const auto plus = sensing_bundle(g, {target.distance_m, target.angle_rad + 1e-6}, b.gain);
    const auto minus = sensing_bundle(g, {target.distance_m, target.angle_rad - 1e-6}, b.gain);
    const Eigen::MatrixXcd ft = (plus.response - minus.response) / 2e-6;
    CHECK((b.d_theta - ft).norm() / ft.norm() <= 1e-6);
    const auto dplus = sensing_bundle(g, {target.distance_m + 1e-4, target.angle_rad}, b.gain);
    const auto dminus = sensing_bundle(g, {target.distance_m - 1e-4, target.angle_rad}, b.gain);
    const Eigen::MatrixXcd fd = (dplus.response - dminus.response) / 2e-4;
    CHECK((b.d_dist - fd).norm() / fd.norm() <= 1e-6);

    SECTION("single receive element")
    {
        const auto g1 = ArrayGeometry::make(16, 1, 0.005, 30e9);
        const auto b1 = sensing_bundle(g1, target, 1.0);
        const auto at = array_response(g1, ArraySide::tx, target);
        const auto ar = array_response(g1, ArraySide::rx, target);
        CHECK((b1.response.row(0).transpose() - ar(0) * at).norm() <= 1e-12);
    }
}

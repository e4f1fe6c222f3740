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

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace nfrsma;
using Catch::Approx;

namespace
{
    std::string slurp(const std::filesystem::path &p)
    {
        std::ifstream f(p, std::ios::binary);
        std::stringstream ss;
        ss << f.rdbuf();
        return ss.str();
    }

    std::filesystem::path scratch_dir(const std::string &name)
    {
        const auto dir = std::filesystem::temp_directory_path() / ("nfrsma_test_" + name);
        std::filesystem::remove_all(dir);
        std::filesystem::create_directories(dir);
        return dir;
    }
} // namespace

TEST_CASE("single trials", "[experiments]")
{
    const Scenario sc = default_scenario(3, 0);
    const ExperimentRecord a = run_trial(sc, Scheme::frs, 17);
    const ExperimentRecord b = run_trial(sc, Scheme::frs, 17);
    REQUIRE(a.ok());
    CHECK(record_row(a) == record_row(b));
    CHECK(a.sa_steps > 0);
    CHECK(a.selection.size() == 3);
    CHECK(a.rcrb_dist_m * a.rcrb_dist_m == Approx(a.crb_dist).epsilon(1e-10));
    CHECK(a.rcrb_angle_rad * a.rcrb_angle_rad == Approx(a.crb_angle).epsilon(1e-10));
    CHECK(a.objective == Approx(a.crb_dist + a.crb_angle).epsilon(1e-10));

    const ExperimentRecord s = run_trial(sc, Scheme::sdma, 17);
    CHECK(s.sa_steps == 0);
    CHECK(s.selection == "000");
    const ExperimentRecord r = run_trial(sc, Scheme::rs, 17);
    CHECK(r.selection == "111");

    Scenario hard = sc;
    hard.qos_bpshz = 60.0;
    const ExperimentRecord inf = run_trial(hard, Scheme::frs, 17);
    CHECK(inf.status == "infeasible");
    CHECK(std::isnan(inf.objective));
    CHECK(inf.selection.empty());
}

TEST_CASE("seed streams", "[experiments]")
{
    CHECK(trial_seed(1, 0) != trial_seed(1, 1));
    CHECK(trial_seed(1, 0) == trial_seed(1, 0));
    CHECK(trial_seed(1, 0) != trial_seed(2, 0));
    // Users along the K axis are nested.
    const Scenario s2 = scenario_at(default_scenario(4, 0), SweepAxis::users, 2);
    const Scenario s4 = scenario_at(default_scenario(4, 0), SweepAxis::users, 4);
    const auto u2 = sample_users(s2, trial_seed(3, 1));
    const auto u4 = sample_users(s4, trial_seed(3, 1));
    for (int k = 0; k < 2; ++k)
    {
        CHECK(u2[static_cast<std::size_t>(k)].distance_m == u4[static_cast<std::size_t>(k)].distance_m);
        CHECK(u2[static_cast<std::size_t>(k)].angle_rad == u4[static_cast<std::size_t>(k)].angle_rad);
    }
    CHECK_THROWS_AS(scenario_at(default_scenario(4, 0), SweepAxis::users, 2.5), Error);
    CHECK_THROWS_AS(scenario_at(default_scenario(4, 0), SweepAxis::qos, -1.0), Error);
    CHECK(parse_axis("qos") == SweepAxis::qos);
    CHECK_THROWS_AS(parse_axis("power"), Error);
}

TEST_CASE("sweep output", "[experiments]")
{
    const Scenario base = default_scenario(2, 0);
    const std::vector<Scheme> schemes{Scheme::frs, Scheme::rs, Scheme::sdma};
    const std::vector<double> values{1, 2};
    const auto dir = scratch_dir("sweep");
    SweepOptions opt;
    opt.root_seed = 5;
    opt.threads = 2;
    const SweepResult res = sweep(base, SweepAxis::users, values, schemes, 3, dir / "k.csv", opt);

    CHECK(res.records.size() == 3u * 2u * 3u);
    CHECK(res.summary.size() == 3u * 2u);
    CHECK(std::is_sorted(res.records.begin(), res.records.end(), record_less));
    for (const auto &c : res.summary)
    {
        CHECK(c.trials == 3);
        CHECK(c.ok_fraction() == Approx(c.ok / 3.0));
    }
    const CellSummary *cell = res.cell(Scheme::rs, 2);
    REQUIRE(cell != nullptr);
    double sum = 0.0;
    int ok = 0;
    for (const auto &r : res.records)
        if (r.scheme == Scheme::rs && r.axis_value == 2 && r.ok())
        {
            sum += r.rcrb_dist_m;
            ++ok;
        }
    CHECK(cell->ok == ok);
    if (ok > 0)
        CHECK(cell->mean_rcrb_dist_m == Approx(sum / ok).epsilon(1e-12));

    const std::string csv = slurp(dir / "k.csv");
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    CHECK(line == record_header);
    int data = 0;
    while (std::getline(lines, line) && !line.empty())
        ++data;
    CHECK(data == 18);
    std::getline(lines, line);
    CHECK(line.empty());
    std::getline(lines, line);
    CHECK(line == std::string("# summary: ") + summary_header);
    int rows = 0;
    while (std::getline(lines, line))
        ++rows;
    CHECK(rows == 6);

    // Same seed and single thread: byte-identical main CSV.
    opt.threads = 1;
    sweep(base, SweepAxis::users, values, schemes, 3, dir / "k2.csv", opt);
    CHECK(slurp(dir / "k2.csv") == csv);

    const std::string gp = slurp(dir / "k.gp");
    CHECK(gp.find("'k.csv' index 1") != std::string::npos);
    CHECK(gp.find(dir.string()) == std::string::npos);
    CHECK(gp.find("set output 'k.png'") != std::string::npos);
    CHECK(std::filesystem::exists(dir / "k.timing.csv"));

    CHECK_THROWS_AS(sweep(base, SweepAxis::users, values, schemes, 1, dir / "missing" / "x.csv", opt), Error);
    CHECK_THROWS_AS(run_sweep(base, SweepAxis::users, {}, schemes, 1), Error);
    CHECK_THROWS_AS(run_sweep(base, SweepAxis::users, values, schemes, 0), Error);
}

TEST_CASE("number formatting", "[experiments]")
{
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(3.0) == "3");
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(format_number(INFINITY) == "inf");
    const double v = 0.1234567890123456789;
    CHECK(std::stod(format_number(v)) == v);
}

TEST_CASE("invariant suite", "[experiments]")
{
    const Scenario sc = default_scenario(4, 0);
    const ValidationReport rep = validate(sc);
    std::ostringstream os;
    rep.print(os);
    INFO(os.str());
    CHECK(rep.all_passed());
    CHECK(rep.find("jacobian_fd") != nullptr);
    CHECK(os.str().find("PASS jacobian_fd") != std::string::npos);

    ValidationOptions bad;
    bad.jacobian_bias = 1e-3;
    bad.include_selection = false;
    const ValidationReport broken = validate(sc, bad);
    REQUIRE(broken.find("jacobian_fd") != nullptr);
    CHECK_FALSE(broken.find("jacobian_fd")->passed);
    CHECK_FALSE(broken.all_passed());
}

TEST_CASE("configuration rejects an empty user set", "[experiments]")
{
    const std::string doc = R"({"n_tx": 32, "n_rx": 16, "carrier_hz": 30e9, "spacing_wavelengths": 0.5,
        "k_users": 0, "target_distance_m": 20, "target_angle_deg": 0, "p_max_dbm": 30,
        "noise_user_dbm": -80, "noise_radar_dbm": -80, "qos_bpshz": 3})";
    try
    {
        load_scenario(doc);
        FAIL("expected InvalidValue");
    }
    catch (const Error &e)
    {
        CHECK(e.code() == ErrorCode::InvalidValue);
    }
}

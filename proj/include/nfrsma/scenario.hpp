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

#ifndef NFRSMA_SCENARIO_HPP
#define NFRSMA_SCENARIO_HPP

#include "nfrsma/errors.hpp"
#include "nfrsma/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace nfrsma
{
    inline constexpr double speed_of_light = 299792458.0; // m/s

    inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
    inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }
    inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
    inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

    enum class ArraySide
    {
        tx,
        rx
    };

    // Colocated uniform linear arrays; element n (1-based) sits at (0, n*spacing).
    struct ArrayGeometry
    {
        int n_tx = 32;
        int n_rx = 16;
        double spacing_m = 0.005;
        double carrier_hz = 30e9;
        double wavelength_m = speed_of_light / 30e9;

        static ArrayGeometry make(int n_tx, int n_rx, double spacing_m, double carrier_hz)
        {
            ArrayGeometry g;
            g.n_tx = n_tx;
            g.n_rx = n_rx;
            g.spacing_m = spacing_m;
            g.carrier_hz = carrier_hz;
            g.wavelength_m = speed_of_light / carrier_hz;
            g.validate();
            return g;
        }

        int count(ArraySide side) const { return side == ArraySide::tx ? n_tx : n_rx; }
        double aperture(ArraySide side) const { return (count(side) - 1) * spacing_m; }

        void validate() const
        {
            if (n_tx < 2)
                throw Error(ErrorCode::InvalidValue, "n_tx must be at least 2");
            if (n_rx < 1)
                throw Error(ErrorCode::InvalidValue, "n_rx must be at least 1");
            if (!(spacing_m > 0.0))
                throw Error(ErrorCode::InvalidValue, "spacing_m must be positive");
            if (!(carrier_hz > 0.0))
                throw Error(ErrorCode::InvalidValue, "carrier_hz must be positive");
        }
    };

    // Z = 2 D^2 / lambda with aperture D = (N - 1) d.
    inline double rayleigh_distance(const ArrayGeometry &geometry, ArraySide side)
    {
        const double aperture = geometry.aperture(side);
        return 2.0 * aperture * aperture / geometry.wavelength_m;
    }

    struct PolarPosition
    {
        double distance_m = 1.0;
        double angle_rad = 0.0;

        bool valid() const
        {
            return distance_m > 0.0 && angle_rad > -std::numbers::pi / 2 && angle_rad <= std::numbers::pi / 2;
        }
    };

    // Uniform drop region for communication users.
    struct UserRegion
    {
        double distance_min_m = 15.0;
        double distance_max_m = 25.0;
        double angle_min_rad = -std::numbers::pi / 3;
        double angle_max_rad = std::numbers::pi / 3;
    };

    enum class SubproblemBackend
    {
        conic,     // exact exponential / power-cone constraints
        linearized // successive outer linearization, linear + PSD constraints only
    };

    enum class ToleranceMode
    {
        relative,
        absolute
    };

    enum class SelectionMode
    {
        anneal,
        exhaustive
    };

    struct Scenario
    {
        ArrayGeometry geometry;
        std::vector<PolarPosition> users;
        PolarPosition target{15.0, std::numbers::pi / 4};
        std::complex<double> target_gain{0.0, 0.0};
        int coherence_len = 256;
        double noise_user_w = 1e-11;
        double noise_radar_w = 1e-11;
        double p_max_w = 1.0;
        double qos_bpshz = 3.0;
        double sa_temp = 20.0;
        double sa_decay = 0.9;
        double tol_inner = 1e-3;
        double tol_outer = 1e-3;
        std::uint64_t seed = 0;

        UserRegion user_region;
        SubproblemBackend backend = SubproblemBackend::conic;
        ToleranceMode tol_mode = ToleranceMode::relative;
        SelectionMode selection_mode = SelectionMode::anneal;
        int max_outer_iters = 100;
        int sa_steps_per_user = 20;
        int exhaustive_k_limit = 10;

        std::vector<std::string> warnings;

        int k_users() const { return static_cast<int>(users.size()); }
    };

    // |beta_s| of a unit-RCS point target from the monostatic radar equation.
    inline std::complex<double> default_target_gain(const ArrayGeometry &geometry, const PolarPosition &target,
                                                    double phase_rad = 0.0)
    {
        const double four_pi = 4.0 * std::numbers::pi;
        const double lambda = geometry.wavelength_m;
        const double d = target.distance_m;
        const double magnitude = std::sqrt(lambda * lambda / (four_pi * four_pi * four_pi * d * d * d * d));
        return std::polar(magnitude, phase_rad);
    }

    // Checks every invariant; throws InvalidValue on violation. Rayleigh-region
    // violations only append to scenario.warnings.
    inline void validate_scenario(Scenario &s)
    {
        s.geometry.validate();
        if (std::abs(s.geometry.wavelength_m - speed_of_light / s.geometry.carrier_hz) >
            1e-12 * s.geometry.wavelength_m)
            throw Error(ErrorCode::InvalidValue, "wavelength inconsistent with carrier frequency");
        if (s.users.empty())
            throw Error(ErrorCode::InvalidValue, "at least one user is required (K = 0)");
        if (!(s.p_max_w > 0.0))
            throw Error(ErrorCode::InvalidValue, "p_max must be positive");
        if (!(s.noise_user_w > 0.0) || !(s.noise_radar_w > 0.0))
            throw Error(ErrorCode::InvalidValue, "noise powers must be positive");
        if (!(s.qos_bpshz >= 0.0))
            throw Error(ErrorCode::InvalidValue, "qos_bpshz must be non-negative");
        if (s.coherence_len < 1)
            throw Error(ErrorCode::InvalidValue, "coherence_len must be positive");
        if (!(s.sa_temp > 0.0))
            throw Error(ErrorCode::InvalidValue, "sa_temp must be positive");
        if (!(s.sa_decay > 0.0 && s.sa_decay < 1.0))
            throw Error(ErrorCode::InvalidValue, "sa_decay must lie in (0, 1)");
        if (!(s.tol_inner > 0.0) || !(s.tol_outer > 0.0))
            throw Error(ErrorCode::InvalidValue, "tolerances must be positive");
        if (s.max_outer_iters < 1 || s.sa_steps_per_user < 1 || s.exhaustive_k_limit < 1)
            throw Error(ErrorCode::InvalidValue, "iteration limits must be positive");
        const auto &r = s.user_region;
        if (!(r.distance_min_m > 0.0 && r.distance_max_m >= r.distance_min_m))
            throw Error(ErrorCode::InvalidValue, "invalid user distance range");
        if (!(r.angle_min_rad > -std::numbers::pi / 2 && r.angle_max_rad <= std::numbers::pi / 2 &&
              r.angle_max_rad >= r.angle_min_rad))
            throw Error(ErrorCode::InvalidValue, "invalid user angle range");
        if (!s.target.valid())
            throw Error(ErrorCode::InvalidValue, "invalid target position");
        for (const auto &u : s.users)
            if (!u.valid())
                throw Error(ErrorCode::InvalidValue, "invalid user position");

        s.warnings.clear();
        const double z_t = rayleigh_distance(s.geometry, ArraySide::tx);
        for (std::size_t k = 0; k < s.users.size(); ++k)
            if (s.users[k].distance_m > z_t)
                s.warnings.push_back("user " + std::to_string(k + 1) + " lies outside the transmit Rayleigh distance");
        if (s.target.distance_m > z_t)
            s.warnings.push_back("target lies outside the transmit Rayleigh distance");
    }

    // Draws K = scenario.k_users() positions from the scenario's user region.
    inline std::vector<PolarPosition> sample_users(const UserRegion &region, int k_users, std::uint64_t seed)
    {
        Rng rng(seed);
        std::vector<PolarPosition> users;
        users.reserve(static_cast<std::size_t>(k_users));
        for (int k = 0; k < k_users; ++k)
        {
            PolarPosition p;
            p.distance_m = rng.uniform(region.distance_min_m, region.distance_max_m);
            p.angle_rad = rng.uniform(region.angle_min_rad, region.angle_max_rad);
            users.push_back(p);
        }
        return users;
    }

    inline std::vector<PolarPosition> sample_users(const Scenario &scenario, std::uint64_t seed)
    {
        return sample_users(scenario.user_region, scenario.k_users(), seed);
    }

    namespace detail
    {
        using nlohmann::json;

        inline const json &require(const json &doc, const char *key)
        {
            auto it = doc.find(key);
            if (it == doc.end())
                throw Error(ErrorCode::MissingKey, key);
            return *it;
        }

        template <typename T>
        T get_or(const json &doc, const char *key, T fallback)
        {
            auto it = doc.find(key);
            if (it == doc.end())
                return fallback;
            try
            {
                return it->get<T>();
            }
            catch (const json::exception &e)
            {
                throw Error(ErrorCode::InvalidValue, std::string(key) + ": " + e.what());
            }
        }

        template <typename T>
        T get_required(const json &doc, const char *key)
        {
            try
            {
                return require(doc, key).get<T>();
            }
            catch (const json::exception &e)
            {
                throw Error(ErrorCode::InvalidValue, std::string(key) + ": " + e.what());
            }
        }

        // Power keys come as "<base>_dbm" or "<base>_w".
        inline double power_watts(const json &doc, const std::string &base)
        {
            const std::string dbm = base + "_dbm", w = base + "_w";
            if (doc.contains(dbm))
                return dbm_to_watts(get_required<double>(doc, dbm.c_str()));
            if (doc.contains(w))
                return get_required<double>(doc, w.c_str());
            throw Error(ErrorCode::MissingKey, dbm + " (or " + w + ")");
        }
    } // namespace detail

    // Parses a JSON key-value document into a validated Scenario.
    inline Scenario load_scenario(const std::string &document)
    {
        using detail::get_or;
        using detail::get_required;
        nlohmann::json doc;
        try
        {
            doc = nlohmann::json::parse(document);
        }
        catch (const nlohmann::json::exception &e)
        {
            throw Error(ErrorCode::InvalidValue, std::string("malformed document: ") + e.what());
        }
        if (!doc.is_object())
            throw Error(ErrorCode::InvalidValue, "document root must be an object");

        Scenario s;
        const int n_tx = get_required<int>(doc, "n_tx");
        const int n_rx = get_required<int>(doc, "n_rx");
        const double carrier = get_required<double>(doc, "carrier_hz");
        if (!(carrier > 0.0))
            throw Error(ErrorCode::InvalidValue, "carrier_hz must be positive");
        double spacing = 0.0;
        if (doc.contains("spacing_m"))
            spacing = get_required<double>(doc, "spacing_m");
        else if (doc.contains("spacing_wavelengths"))
            spacing = get_required<double>(doc, "spacing_wavelengths") * speed_of_light / carrier;
        else
            throw Error(ErrorCode::MissingKey, "spacing_m (or spacing_wavelengths)");
        s.geometry = ArrayGeometry::make(n_tx, n_rx, spacing, carrier);

        s.target.distance_m = get_required<double>(doc, "target_distance_m");
        s.target.angle_rad = deg_to_rad(get_required<double>(doc, "target_angle_deg"));
        s.p_max_w = detail::power_watts(doc, "p_max");
        s.noise_user_w = detail::power_watts(doc, "noise_user");
        s.noise_radar_w = detail::power_watts(doc, "noise_radar");
        s.qos_bpshz = get_required<double>(doc, "qos_bpshz");

        s.coherence_len = get_or<int>(doc, "coherence_len", 256);
        s.sa_temp = get_or<double>(doc, "sa_temp", 20.0);
        s.sa_decay = get_or<double>(doc, "sa_decay", 0.9);
        s.tol_inner = get_or<double>(doc, "tol_inner", 1e-3);
        s.tol_outer = get_or<double>(doc, "tol_outer", 1e-3);
        s.seed = get_or<std::uint64_t>(doc, "seed", 0);
        s.max_outer_iters = get_or<int>(doc, "max_outer_iters", 100);
        s.sa_steps_per_user = get_or<int>(doc, "sa_steps_per_user", 20);
        s.exhaustive_k_limit = get_or<int>(doc, "exhaustive_k_limit", 10);

        s.user_region.distance_min_m = get_or<double>(doc, "user_distance_min_m", 15.0);
        s.user_region.distance_max_m = get_or<double>(doc, "user_distance_max_m", 25.0);
        s.user_region.angle_min_rad = deg_to_rad(get_or<double>(doc, "user_angle_min_deg", -60.0));
        s.user_region.angle_max_rad = deg_to_rad(get_or<double>(doc, "user_angle_max_deg", 60.0));

        const auto backend = get_or<std::string>(doc, "backend", "conic");
        if (backend == "conic")
            s.backend = SubproblemBackend::conic;
        else if (backend == "linearized")
            s.backend = SubproblemBackend::linearized;
        else
            throw Error(ErrorCode::InvalidValue, "backend must be conic or linearized");

        const auto tol_mode = get_or<std::string>(doc, "tol_mode", "relative");
        if (tol_mode == "relative")
            s.tol_mode = ToleranceMode::relative;
        else if (tol_mode == "absolute")
            s.tol_mode = ToleranceMode::absolute;
        else
            throw Error(ErrorCode::InvalidValue, "tol_mode must be relative or absolute");

        const auto selection = get_or<std::string>(doc, "selection_mode", "anneal");
        if (selection == "anneal")
            s.selection_mode = SelectionMode::anneal;
        else if (selection == "exhaustive")
            s.selection_mode = SelectionMode::exhaustive;
        else
            throw Error(ErrorCode::InvalidValue, "selection_mode must be anneal or exhaustive");

        if (doc.contains("users"))
        {
            const auto &list = doc["users"];
            if (!list.is_array())
                throw Error(ErrorCode::InvalidValue, "users must be an array of [distance_m, angle_deg]");
            for (const auto &entry : list)
            {
                if (!entry.is_array() || entry.size() != 2)
                    throw Error(ErrorCode::InvalidValue, "users entries must be [distance_m, angle_deg]");
                s.users.push_back({entry[0].get<double>(), deg_to_rad(entry[1].get<double>())});
            }
        }
        else
        {
            const int k = get_required<int>(doc, "k_users");
            if (k < 1)
                throw Error(ErrorCode::InvalidValue, "k_users must be at least 1 (K = 0)");
            s.users = sample_users(s.user_region, k, s.seed);
        }

        if (doc.contains("target_gain_magnitude"))
        {
            const double mag = get_required<double>(doc, "target_gain_magnitude");
            if (!(mag > 0.0))
                throw Error(ErrorCode::InvalidValue, "target_gain_magnitude must be positive");
            s.target_gain = std::polar(mag, get_or<double>(doc, "target_gain_phase_rad", 0.0));
        }
        else
        {
            s.target_gain = default_target_gain(s.geometry, s.target, get_or<double>(doc, "target_gain_phase_rad", 0.0));
        }

        validate_scenario(s);
        return s;
    }

    inline Scenario load_scenario_file(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw Error(ErrorCode::IoError, "cannot open " + path);
        std::stringstream buffer;
        buffer << in.rdbuf();
        return load_scenario(buffer.str());
    }

    // Desk-scale defaults: N_t = 32, N_r = 16, K = 4, 30 GHz, half-wavelength spacing.
    inline Scenario default_scenario(int k_users = 4, std::uint64_t seed = 0, int n_tx = 32, int n_rx = 16)
    {
        Scenario s;
        s.geometry = ArrayGeometry::make(n_tx, n_rx, 0.5 * speed_of_light / 30e9, 30e9);
        s.target = {15.0, std::numbers::pi / 4};
        s.target_gain = default_target_gain(s.geometry, s.target);
        s.p_max_w = dbm_to_watts(30.0);
        s.noise_user_w = dbm_to_watts(-80.0);
        s.noise_radar_w = dbm_to_watts(-80.0);
        s.qos_bpshz = 3.0;
        s.seed = seed;
        s.users = sample_users(s.user_region, k_users, seed);
        validate_scenario(s);
        return s;
    }
} // namespace nfrsma

#endif

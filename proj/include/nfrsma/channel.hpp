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

#ifndef NFRSMA_CHANNEL_HPP
#define NFRSMA_CHANNEL_HPP

#include "nfrsma/scenario.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>

namespace nfrsma
{
    using cdouble = std::complex<double>;

    enum class PhaseModel
    {
        taylor, // second-order expansion of the element distance, used by all optimization
        exact   // exact spherical distance, only to quantify the expansion error
    };

    namespace detail
    {
        inline void require_distance(const PolarPosition &pos)
        {
            if (!(pos.distance_m > 0.0))
                throw Error(ErrorCode::ZeroDistance, "position distance must be positive");
        }

        // Path-length advance delta_n of element n relative to the reference point.
        inline double path_advance(double element_coord, const PolarPosition &pos, PhaseModel model)
        {
            const double s = std::sin(pos.angle_rad), c = std::cos(pos.angle_rad);
            if (model == PhaseModel::taylor)
                return element_coord * s - element_coord * element_coord * c * c / (2.0 * pos.distance_m);
            const double d = pos.distance_m;
            const double exact = std::sqrt(d * d + element_coord * element_coord - 2.0 * element_coord * d * s);
            return d - exact;
        }
    } // namespace detail

    // a_n = exp(j 2 pi / lambda * delta_n), n = 1..N, element n at (0, n d).
    inline Eigen::VectorXcd array_response(const ArrayGeometry &geometry, ArraySide side, const PolarPosition &pos,
                                           PhaseModel model = PhaseModel::taylor)
    {
        detail::require_distance(pos);
        const int n_elem = geometry.count(side);
        const double wavenumber = 2.0 * std::numbers::pi / geometry.wavelength_m;
        Eigen::VectorXcd a(n_elem);
        for (int i = 0; i < n_elem; ++i)
        {
            const double coord = (i + 1) * geometry.spacing_m;
            a(i) = std::polar(1.0, wavenumber * detail::path_advance(coord, pos, model));
        }
        return a;
    }

    struct ResponseJacobian
    {
        Eigen::VectorXcd d_theta; // da/dtheta
        Eigen::VectorXcd d_dist;  // da/dd
    };

    // Analytic derivatives of the Taylor-model response.
    inline ResponseJacobian array_response_jacobian(const ArrayGeometry &geometry, ArraySide side,
                                                    const PolarPosition &pos)
    {
        detail::require_distance(pos);
        const int n_elem = geometry.count(side);
        const double wavenumber = 2.0 * std::numbers::pi / geometry.wavelength_m;
        const double s = std::sin(pos.angle_rad), c = std::cos(pos.angle_rad);
        const double d = pos.distance_m;
        const Eigen::VectorXcd a = array_response(geometry, side, pos);
        ResponseJacobian jac{Eigen::VectorXcd(n_elem), Eigen::VectorXcd(n_elem)};
        for (int i = 0; i < n_elem; ++i)
        {
            const double x = (i + 1) * geometry.spacing_m;
            const double ddelta_dtheta = x * c + x * x * c * s / d;
            const double ddelta_ddist = x * x * c * c / (2.0 * d * d);
            jac.d_theta(i) = cdouble(0.0, wavenumber * ddelta_dtheta) * a(i);
            jac.d_dist(i) = cdouble(0.0, wavenumber * ddelta_ddist) * a(i);
        }
        return jac;
    }

    struct ChannelVector
    {
        Eigen::VectorXcd entries; // h_k
        cdouble gain;             // beta_k
        PolarPosition position;
    };

    // h_k = beta_k a(d_k, theta_k), beta_k = c/(4 pi f d_k) exp(-j 2 pi d_k / lambda).
    inline ChannelVector user_channel(const ArrayGeometry &geometry, const PolarPosition &pos)
    {
        detail::require_distance(pos);
        const double loss = speed_of_light / (4.0 * std::numbers::pi * geometry.carrier_hz * pos.distance_m);
        const cdouble gain = std::polar(loss, -2.0 * std::numbers::pi * pos.distance_m / geometry.wavelength_m);
        return {gain * array_response(geometry, ArraySide::tx, pos), gain, pos};
    }

    inline std::vector<ChannelVector> user_channels(const ArrayGeometry &geometry,
                                                    const std::vector<PolarPosition> &users)
    {
        std::vector<ChannelVector> out;
        out.reserve(users.size());
        for (const auto &u : users)
            out.push_back(user_channel(geometry, u));
        return out;
    }

    struct SensingChannelBundle
    {
        Eigen::MatrixXcd response; // a_r a_t^T
        Eigen::MatrixXcd d_theta;  // d(response)/d(theta_s)
        Eigen::MatrixXcd d_dist;   // d(response)/d(d_s)
        cdouble gain;              // beta_s
        PolarPosition target;

        Eigen::MatrixXcd full() const { return gain * response; }
    };

    inline SensingChannelBundle sensing_bundle(const ArrayGeometry &geometry, const PolarPosition &target,
                                               cdouble gain)
    {
        const Eigen::VectorXcd a_t = array_response(geometry, ArraySide::tx, target);
        const Eigen::VectorXcd a_r = array_response(geometry, ArraySide::rx, target);
        const ResponseJacobian j_t = array_response_jacobian(geometry, ArraySide::tx, target);
        const ResponseJacobian j_r = array_response_jacobian(geometry, ArraySide::rx, target);
        SensingChannelBundle b;
        b.response = a_r * a_t.transpose();
        b.d_theta = j_r.d_theta * a_t.transpose() + a_r * j_t.d_theta.transpose();
        b.d_dist = j_r.d_dist * a_t.transpose() + a_r * j_t.d_dist.transpose();
        b.gain = gain;
        b.target = target;
        return b;
    }
} // namespace nfrsma

#endif

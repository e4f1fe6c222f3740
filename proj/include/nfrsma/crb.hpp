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

#ifndef NFRSMA_CRB_HPP
#define NFRSMA_CRB_HPP

#include "nfrsma/channel.hpp"
#include "nfrsma/precoding.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace nfrsma
{
    // Fisher information for (theta_s, d_s) and the nuisance (Re beta_s, Im beta_s).
    // Parameter order is (theta_s, d_s) throughout.
    struct FimBlocks
    {
        Eigen::Matrix2d f11 = Eigen::Matrix2d::Zero();
        Eigen::Matrix2d f12 = Eigen::Matrix2d::Zero();
        Eigen::Matrix2d f22 = Eigen::Matrix2d::Zero(); // c * I
        double f22_reference = 0.0;                    // largest attainable c for this power; scales the singularity test

        FimBlocks &operator*=(double alpha)
        {
            f11 *= alpha;
            f12 *= alpha;
            f22 *= alpha;
            f22_reference *= alpha;
            return *this;
        }
    };

    struct CrbResult
    {
        Eigen::Matrix2d matrix = Eigen::Matrix2d::Zero();
        double trace = 0.0;
        double rcrb_angle = 0.0; // rad
        double rcrb_dist = 0.0;  // m
    };

    namespace detail
    {
        // Tr(A R B^H)
        inline cdouble trace_arbh(const Eigen::MatrixXcd &a, const Eigen::MatrixXcd &r, const Eigen::MatrixXcd &b)
        {
            // sum_ij (A R)_ij conj(B_ij)
            const Eigen::MatrixXcd ar = a * r;
            return (ar.array() * b.conjugate().array()).sum();
        }

        inline Eigen::Matrix2d cross_block(cdouble z_theta, cdouble z_dist)
        {
            // Re([z_theta; z_dist] [1, j])
            Eigen::Matrix2d m;
            m << z_theta.real(), -z_theta.imag(), z_dist.real(), -z_dist.imag();
            return m;
        }
    } // namespace detail

    // F_xy = Tr(G_y R G_x^H); blocks scaled by 2T/sigma^2 (and |beta_s|^2 for F11).
    inline FimBlocks fim_blocks(const SensingChannelBundle &bundle, const Eigen::MatrixXcd &r, int coherence_len,
                                double sigma2)
    {
        if (r.rows() != bundle.response.cols() || r.cols() != bundle.response.cols())
            throw Error(ErrorCode::DimensionMismatch, "covariance must be N_t x N_t");
        if (coherence_len < 1 || !(sigma2 > 0.0))
            throw Error(ErrorCode::InvalidValue, "coherence length and noise power must be positive");
        const Eigen::MatrixXcd rs = r / sigma2;
        const double scale = 2.0 * coherence_len;
        const cdouble f_tt = detail::trace_arbh(bundle.d_theta, rs, bundle.d_theta);
        const cdouble f_td = detail::trace_arbh(bundle.d_dist, rs, bundle.d_theta);
        const cdouble f_dd = detail::trace_arbh(bundle.d_dist, rs, bundle.d_dist);
        const cdouble g_t = detail::trace_arbh(bundle.response, rs, bundle.d_theta);
        const cdouble g_d = detail::trace_arbh(bundle.response, rs, bundle.d_dist);
        const cdouble g_0 = detail::trace_arbh(bundle.response, rs, bundle.response);

        FimBlocks out;
        const double b2 = std::norm(bundle.gain);
        out.f11 << f_tt.real(), f_td.real(), f_td.real(), f_dd.real();
        out.f11 *= scale * b2;
        out.f12 = scale * detail::cross_block(std::conj(bundle.gain) * g_t, std::conj(bundle.gain) * g_d);
        out.f22 = scale * g_0.real() * Eigen::Matrix2d::Identity();
        out.f22_reference = scale * static_cast<double>(bundle.response.size()) * rs.trace().real();
        return out;
    }

    // CRB = (F11 - F12 F22^{-1} F12^T)^{-1}.
    inline CrbResult crb_matrix(const FimBlocks &blocks)
    {
        const double c = blocks.f22(0, 0);
        if (!(c > 1e-12 * blocks.f22_reference) || !(c > 0.0) || !std::isfinite(c))
            throw Error(ErrorCode::SingularFim, "nuisance block F22 is singular");
        Eigen::Matrix2d schur = blocks.f11 - blocks.f12 * blocks.f12.transpose() / c;
        schur = 0.5 * (schur + schur.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(schur, Eigen::EigenvaluesOnly);
        const double tr = schur.trace();
        if (!(tr > 0.0) || !(eig.eigenvalues()(0) > 1e-14 * tr))
            throw Error(ErrorCode::SingularFim, "Schur complement is not positive definite");
        CrbResult out;
        out.matrix = schur.inverse();
        out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
        out.trace = out.matrix.trace();
        out.rcrb_angle = std::sqrt(out.matrix(0, 0));
        out.rcrb_dist = std::sqrt(out.matrix(1, 1));
        return out;
    }

    inline CrbResult crb_for(const SensingChannelBundle &bundle, const Eigen::MatrixXcd &r, int coherence_len,
                             double sigma2)
    {
        return crb_matrix(fim_blocks(bundle, r, coherence_len, sigma2));
    }

    // Per-beam FIM contributions for R = sum_i P_i b_i b_i^H:
    // F11 = sum P_i a_i, F12 = sum P_i m_i, F22 = (sum P_i c_i) I.
    struct FimAtoms
    {
        std::vector<Eigen::Matrix2d> a;
        std::vector<Eigen::Matrix2d> m;
        std::vector<double> c;
        double c_reference = 0.0; // per watt

        int beams() const { return static_cast<int>(c.size()); }
    };

    inline FimAtoms fim_atoms(const SensingChannelBundle &bundle, const PrecoderSet &precoders, int coherence_len,
                              double sigma2)
    {
        const double scale = 2.0 * coherence_len / sigma2;
        const double b2 = std::norm(bundle.gain);
        const cdouble bconj = std::conj(bundle.gain);
        FimAtoms atoms;
        atoms.c_reference = scale * static_cast<double>(bundle.response.size());
        for (int i = 0; i <= precoders.k_users(); ++i)
        {
            const Eigen::VectorXcd p = precoders.beam(i);
            const Eigen::VectorXcd u0 = bundle.response * p;
            const Eigen::VectorXcd ut = bundle.d_theta * p;
            const Eigen::VectorXcd ud = bundle.d_dist * p;
            Eigen::Matrix2d a;
            const double td = ut.dot(ud).real();
            a << ut.squaredNorm(), td, td, ud.squaredNorm();
            atoms.a.push_back(scale * b2 * a);
            atoms.m.push_back(scale * detail::cross_block(bconj * ut.dot(u0), bconj * ud.dot(u0)));
            atoms.c.push_back(scale * u0.squaredNorm());
        }
        return atoms;
    }

    // Assembles FimBlocks from atoms and per-beam total powers (P_i + probe_i).
    inline FimBlocks fim_from_atoms(const FimAtoms &atoms, const Eigen::VectorXd &beam_power)
    {
        FimBlocks out;
        double c = 0.0;
        for (int i = 0; i < atoms.beams(); ++i)
        {
            out.f11 += beam_power(i) * atoms.a[static_cast<std::size_t>(i)];
            out.f12 += beam_power(i) * atoms.m[static_cast<std::size_t>(i)];
            c += beam_power(i) * atoms.c[static_cast<std::size_t>(i)];
        }
        out.f22 = c * Eigen::Matrix2d::Identity();
        out.f22_reference = atoms.c_reference * beam_power.sum();
        return out;
    }
} // namespace nfrsma

#endif

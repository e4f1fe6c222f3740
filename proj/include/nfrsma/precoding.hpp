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

#ifndef NFRSMA_PRECODING_HPP
#define NFRSMA_PRECODING_HPP

#include "nfrsma/channel.hpp"
#include "nfrsma/types.hpp"

#include <Eigen/Dense>

#include <vector>

namespace nfrsma
{
    inline constexpr double zf_condition_limit = 1e12;

    struct PrecoderSet
    {
        Eigen::VectorXcd common;   // p_0, unit norm; all-zero when K1 is empty
        Eigen::MatrixXcd private_; // p_1..p_K as columns, unit norm
        bool has_common = false;

        int k_users() const { return static_cast<int>(private_.cols()); }
        int n_tx() const { return static_cast<int>(private_.rows()); }

        // Beam i = 0 (common) or 1..K (private).
        Eigen::VectorXcd beam(int i) const { return i == 0 ? common : Eigen::VectorXcd(private_.col(i - 1)); }
    };

    inline Eigen::MatrixXcd channel_matrix(const std::vector<ChannelVector> &channels)
    {
        if (channels.empty())
            throw Error(ErrorCode::DimensionMismatch, "no channels");
        const auto n = channels.front().entries.size();
        Eigen::MatrixXcd h(n, static_cast<Eigen::Index>(channels.size()));
        for (std::size_t k = 0; k < channels.size(); ++k)
        {
            if (channels[k].entries.size() != n)
                throw Error(ErrorCode::DimensionMismatch, "channel lengths differ");
            h.col(static_cast<Eigen::Index>(k)) = channels[k].entries;
        }
        return h;
    }

    // P_p = H (H^H H)^{-1} Q with diagonal K x K normalizer Q_kk = [(H^H H)^{-1}]_kk^{-1/2}.
    inline Eigen::MatrixXcd zf_private_precoders(const Eigen::MatrixXcd &h)
    {
        if (h.cols() == 0 || h.cols() > h.rows())
            throw Error(ErrorCode::RankDeficient, "zero-forcing needs 1 <= K <= N_t");
        const Eigen::MatrixXcd gram = h.adjoint() * h;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram, Eigen::EigenvaluesOnly);
        const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
        if (!(lo > 0.0) || hi / lo > zf_condition_limit)
            throw Error(ErrorCode::RankDeficient, "channel Gram matrix is ill-conditioned");
        const Eigen::MatrixXcd gram_inv = gram.ldlt().solve(Eigen::MatrixXcd::Identity(h.cols(), h.cols()));
        Eigen::MatrixXcd p = h * gram_inv;
        for (Eigen::Index k = 0; k < p.cols(); ++k)
            p.col(k) /= std::sqrt(gram_inv(k, k).real());
        return p;
    }

    // Index of the weakest channel in K1; ties go to the lowest index.
    inline int weakest_common_user(const Eigen::MatrixXcd &h, const SelectionVector &selection)
    {
        if (selection.size() != h.cols())
            throw Error(ErrorCode::DimensionMismatch, "selection length differs from K");
        int best = -1;
        double best_norm = 0.0;
        for (int k = 0; k < selection.size(); ++k)
        {
            if (!selection[k])
                continue;
            const double nrm = h.col(k).norm();
            if (best < 0 || nrm < best_norm)
            {
                best = k;
                best_norm = nrm;
            }
        }
        if (best < 0)
            throw Error(ErrorCode::EmptyCommonGroup, "no user decodes the common stream");
        return best;
    }

    // p_0 = h_k' / ||h_k'||, k' the weakest user of K1.
    inline Eigen::VectorXcd common_precoder(const Eigen::MatrixXcd &h, const SelectionVector &selection)
    {
        const int k = weakest_common_user(h, selection);
        return h.col(k) / h.col(k).norm();
    }

    inline PrecoderSet make_precoders(const Eigen::MatrixXcd &h, const Eigen::MatrixXcd &zf,
                                      const SelectionVector &selection)
    {
        PrecoderSet set;
        set.private_ = zf;
        set.has_common = selection.any();
        set.common = set.has_common ? common_precoder(h, selection) : Eigen::VectorXcd::Zero(h.rows());
        return set;
    }

    inline PrecoderSet make_precoders(const std::vector<ChannelVector> &channels, const SelectionVector &selection)
    {
        const Eigen::MatrixXcd h = channel_matrix(channels);
        return make_precoders(h, zf_private_precoders(h), selection);
    }

    // g(k, i) = |h_k^H p_i|^2, i = 0..K.
    struct BeamGains
    {
        Eigen::MatrixXd g;

        int k_users() const { return static_cast<int>(g.rows()); }
        double operator()(int k, int i) const { return g(k, i); }
    };

    inline BeamGains beam_gains(const Eigen::MatrixXcd &h, const PrecoderSet &precoders)
    {
        if (h.rows() != precoders.n_tx() || h.cols() != precoders.k_users())
            throw Error(ErrorCode::DimensionMismatch, "channels and precoders disagree");
        const int k_users = precoders.k_users();
        BeamGains out{Eigen::MatrixXd(k_users, k_users + 1)};
        for (int k = 0; k < k_users; ++k)
        {
            out.g(k, 0) = std::norm(h.col(k).dot(precoders.common)); // Eigen dot conjugates the left side
            for (int i = 1; i <= k_users; ++i)
                out.g(k, i) = std::norm(h.col(k).dot(precoders.private_.col(i - 1)));
        }
        return out;
    }

    inline BeamGains beam_gains(const std::vector<ChannelVector> &channels, const PrecoderSet &precoders)
    {
        return beam_gains(channel_matrix(channels), precoders);
    }

    // R = sum_i p_i p_i^H (P_i + probe_i).
    inline Eigen::MatrixXcd signal_covariance(const PrecoderSet &precoders, const PowerAllocation &powers)
    {
        const int k_users = precoders.k_users();
        if (powers.comm.size() != k_users + 1 || powers.probe.size() != k_users + 1)
            throw Error(ErrorCode::DimensionMismatch, "power allocation length must be K + 1");
        Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(precoders.n_tx(), precoders.n_tx());
        for (int i = 0; i <= k_users; ++i)
        {
            const double p = powers.comm(i) + powers.probe(i);
            if (p == 0.0)
                continue;
            const Eigen::VectorXcd b = precoders.beam(i);
            r.noalias() += p * (b * b.adjoint());
        }
        return r;
    }
} // namespace nfrsma

#endif

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

#ifndef NFRSMA_TYPES_HPP
#define NFRSMA_TYPES_HPP

#include "nfrsma/errors.hpp"

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace nfrsma
{
    // Rate-splitting membership: bit k set means user k decodes the common stream (group K1).
    class SelectionVector
    {
    public:
        SelectionVector() = default;
        explicit SelectionVector(int k_users, bool value = false)
            : bits_(static_cast<std::size_t>(k_users), value ? 1 : 0) {}
        explicit SelectionVector(std::vector<std::uint8_t> bits) : bits_(std::move(bits))
        {
            for (auto b : bits_)
                if (b > 1)
                    throw Error(ErrorCode::InvalidValue, "selection entries must be 0 or 1");
        }

        // Bit k of mask maps to user k (0-based).
        static SelectionVector from_mask(int k_users, std::uint64_t mask)
        {
            SelectionVector s(k_users);
            for (int k = 0; k < k_users; ++k)
                s.bits_[static_cast<std::size_t>(k)] = (mask >> k) & 1u;
            return s;
        }

        static SelectionVector from_string(const std::string &text)
        {
            std::vector<std::uint8_t> bits;
            for (char ch : text)
            {
                if (ch != '0' && ch != '1')
                    throw Error(ErrorCode::InvalidValue, "selection string must contain only 0 and 1");
                bits.push_back(ch == '1');
            }
            return SelectionVector(std::move(bits));
        }

        int size() const { return static_cast<int>(bits_.size()); }
        bool operator[](int k) const { return bits_.at(static_cast<std::size_t>(k)) != 0; }
        void set(int k, bool v) { bits_.at(static_cast<std::size_t>(k)) = v ? 1 : 0; }
        void flip(int k) { set(k, !(*this)[k]); }

        int count() const
        {
            int n = 0;
            for (auto b : bits_)
                n += b;
            return n;
        }
        bool any() const { return count() > 0; }

        std::vector<int> common_group() const
        {
            std::vector<int> out;
            for (int k = 0; k < size(); ++k)
                if ((*this)[k])
                    out.push_back(k);
            return out;
        }

        std::uint64_t mask() const
        {
            std::uint64_t m = 0;
            for (int k = 0; k < size() && k < 64; ++k)
                if ((*this)[k])
                    m |= (std::uint64_t{1} << k);
            return m;
        }

        std::string to_string() const
        {
            std::string out;
            for (auto b : bits_)
                out.push_back(b ? '1' : '0');
            return out;
        }

        const std::vector<std::uint8_t> &bits() const { return bits_; }

        auto operator<=>(const SelectionVector &) const = default;

    private:
        std::vector<std::uint8_t> bits_;
    };

    // Index 0 is the common beam, index k = 1..K the private beam of user k.
    struct PowerAllocation
    {
        Eigen::VectorXd comm;  // P_0..P_K
        Eigen::VectorXd probe; // extra probing power on each beam

        static PowerAllocation zeros(int k_users)
        {
            return {Eigen::VectorXd::Zero(k_users + 1), Eigen::VectorXd::Zero(k_users + 1)};
        }

        int k_users() const { return static_cast<int>(comm.size()) - 1; }
        double total() const { return comm.sum() + probe.sum(); }
        bool within_budget(double p_max) const { return total() <= p_max + 1e-9; }
    };

    // Per-user share of the common rate, bits/s/Hz.
    struct RateAllocation
    {
        Eigen::VectorXd common_share;

        static RateAllocation zeros(int k_users) { return {Eigen::VectorXd::Zero(k_users)}; }
    };
} // namespace nfrsma

#endif

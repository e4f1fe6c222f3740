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

#ifndef NFRSMA_RNG_HPP
#define NFRSMA_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace nfrsma
{
    // SplitMix64 finalizer. Used to derive independent stream seeds from (root, counter).
    constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
    {
        x += 0x9E3779B97F4A7C15ull;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }

    constexpr std::uint64_t stream_seed(std::uint64_t root, std::uint64_t counter) noexcept
    {
        return splitmix64(splitmix64(root) ^ splitmix64(counter + 0x632BE59BD9B4E019ull));
    }

    // Platform-stable generator: std::mt19937_64 is fully specified by the standard, and the
    // conversions below avoid std::*_distribution, whose output is implementation defined.
    class Rng
    {
    public:
        explicit Rng(std::uint64_t seed) : engine_(seed) {}

        std::uint64_t next_u64() { return engine_(); }

        // Uniform on [0, 1) with 53 random bits.
        double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

        double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

        bool bit() { return (engine_() >> 63) != 0; }

        // Standard normal via Box-Muller (one of the pair is discarded).
        double normal()
        {
            double u1 = uniform();
            while (u1 <= 0.0)
                u1 = uniform();
            const double u2 = uniform();
            return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
        }

    private:
        std::mt19937_64 engine_;
    };
} // namespace nfrsma

#endif

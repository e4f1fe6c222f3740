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

#ifndef NFRSMA_SELECTION_HPP
#define NFRSMA_SELECTION_HPP

#include "nfrsma/inner_solver.hpp"
#include "nfrsma/rng.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <vector>

namespace nfrsma
{
    // Channels, zero-forcing beams and sensing bundle for one user drop.
    class TrialSystem
    {
    public:
        TrialSystem(const Scenario &scenario, const std::vector<PolarPosition> &users)
            : scenario_(scenario)
        {
            scenario_.users = users;
            channels_ = user_channels(scenario_.geometry, users);
            h_ = channel_matrix(channels_);
            zf_ = zf_private_precoders(h_);
            bundle_ = sensing_bundle(scenario_.geometry, scenario_.target, scenario_.target_gain);
        }

        explicit TrialSystem(const Scenario &scenario) : TrialSystem(scenario, scenario.users) {}

        const Scenario &scenario() const { return scenario_; }
        const std::vector<ChannelVector> &channels() const { return channels_; }
        const Eigen::MatrixXcd &channel_matrix_h() const { return h_; }
        const SensingChannelBundle &bundle() const { return bundle_; }
        int k_users() const { return static_cast<int>(channels_.size()); }

        // p_0 is rebuilt from the selection on every call.
        PrecoderSet precoders(const SelectionVector &selection) const { return make_precoders(h_, zf_, selection); }

        InnerProblem problem(const SelectionVector &selection) const
        {
            const PrecoderSet p = precoders(selection);
            return make_inner_problem(scenario_, beam_gains(h_, p), bundle_, p, selection);
        }

        SolveOutcome evaluate(const SelectionVector &selection) const { return optimize_powers(problem(selection)); }

    private:
        Scenario scenario_;
        std::vector<ChannelVector> channels_;
        Eigen::MatrixXcd h_;
        Eigen::MatrixXcd zf_;
        SensingChannelBundle bundle_;
    };

    inline double selection_value(const SolveOutcome &o)
    {
        return o.usable() ? o.objective : std::numeric_limits<double>::infinity();
    }

    // P = exp((V(s) - V(s~)) / delta); smaller objective is better.
    inline double acceptance_probability(double current_value, double proposed_value, double temperature)
    {
        return std::exp((current_value - proposed_value) / temperature);
    }

    struct AnnealState
    {
        SelectionVector current;
        double current_value = std::numeric_limits<double>::infinity();
        SelectionVector best;
        double best_value = std::numeric_limits<double>::infinity();
        double temperature = 0.0;
        int step = 0;
    };

    struct AnnealStep
    {
        int t = 0;
        int flipped = 0; // 0-based user index
        double proposed_value = 0.0;
        bool accepted = false;
        double temperature = 0.0;
    };

    struct SelectionResult
    {
        SelectionVector selection;
        SolveOutcome outcome;
        int steps = 0;
        int evaluations = 0; // distinct selections solved
        bool converged = true;
        std::vector<AnnealStep> trace;
    };

    namespace detail
    {
        class MemoEvaluator
        {
        public:
            explicit MemoEvaluator(const TrialSystem &system) : system_(system) {}

            const SolveOutcome &operator()(const SelectionVector &s)
            {
                auto it = cache_.find(s);
                if (it == cache_.end())
                    it = cache_.emplace(s, system_.evaluate(s)).first;
                return it->second;
            }

            int evaluations() const { return static_cast<int>(cache_.size()); }

        private:
            const TrialSystem &system_;
            std::map<SelectionVector, SolveOutcome> cache_;
        };
    } // namespace detail

    struct AnnealOptions
    {
        std::ostream *trace = nullptr; // t \t flipped \t proposed \t accepted \t temperature
    };

    // Simulated annealing over single-bit flips with cyclic user index k = t mod K.
    //
    // Objective values enter the acceptance rule and the stopping window normalized as
    // 100 V / V_ref, V_ref the first finite value seen, so the temperature and stopping
    // tolerance are independent of the absolute CRB scale.
    inline SelectionResult anneal(const TrialSystem &system, std::uint64_t seed, const AnnealOptions &opt = {})
    {
        const Scenario &sc = system.scenario();
        const int k_users = system.k_users();
        Rng rng(seed);
        detail::MemoEvaluator eval(system);

        SelectionVector s0(k_users);
        for (int k = 0; k < k_users; ++k)
            s0.set(k, rng.bit());

        constexpr double inf = std::numeric_limits<double>::infinity();
        double v_ref = 0.0;
        auto normalized = [&](double v)
        {
            if (!std::isfinite(v))
                return inf;
            if (v_ref == 0.0)
                v_ref = v;
            return 100.0 * v / v_ref;
        };

        AnnealState st;
        st.current = s0;
        st.current_value = normalized(selection_value(eval(s0)));
        st.best = s0;
        st.best_value = st.current_value;
        st.temperature = sc.sa_temp;

        SelectionResult res;
        std::vector<double> best_history{st.best_value};
        const int cap = sc.sa_steps_per_user * k_users;
        res.converged = false;
        while (st.step < cap)
        {
            const int k = st.step % k_users;
            SelectionVector proposal = st.current;
            proposal.flip(k);
            const double v = normalized(selection_value(eval(proposal)));

            bool accepted = false;
            if (v < st.current_value)
            {
                accepted = true;
                if (v < st.best_value)
                {
                    st.best_value = v;
                    st.best = proposal;
                }
            }
            else if (std::isfinite(v))
            {
                const double prob = acceptance_probability(st.current_value, v, st.temperature);
                accepted = rng.uniform() < prob;
            }
            if (accepted)
            {
                st.current = proposal;
                st.current_value = v;
            }
            if (opt.trace)
                *opt.trace << st.step << '\t' << k << '\t' << v << '\t' << (accepted ? 1 : 0) << '\t'
                           << st.temperature << '\n';
            res.trace.push_back({st.step, k, v, accepted, st.temperature});

            ++st.step;
            st.temperature *= sc.sa_decay;
            best_history.push_back(st.best_value);
            if (st.step >= k_users)
            {
                const double change = best_history[static_cast<std::size_t>(st.step - k_users)] - st.best_value;
                if (change <= sc.tol_outer)
                {
                    res.converged = true;
                    break;
                }
            }
        }

        if (!std::isfinite(st.best_value))
            throw Error(ErrorCode::AllInfeasible, "no evaluated selection admits a feasible allocation");
        res.selection = st.best;
        res.outcome = eval(st.best);
        res.steps = st.step;
        res.evaluations = eval.evaluations();
        return res;
    }

    // Ties: smaller objective, then fewer common-stream users, then lexicographic bits.
    inline bool selection_better(double va, const SelectionVector &a, double vb, const SelectionVector &b)
    {
        if (va != vb)
            return va < vb;
        if (a.count() != b.count())
            return a.count() < b.count();
        return a.bits() < b.bits();
    }

    inline SelectionResult exhaustive(const TrialSystem &system, std::vector<double> *all_values = nullptr)
    {
        const int k_users = system.k_users();
        const int limit = system.scenario().exhaustive_k_limit;
        if (k_users > limit || k_users > 30)
            throw Error(ErrorCode::TooLarge, "exhaustive search limited to K <= " + std::to_string(limit));
        SelectionResult res;
        double best_value = std::numeric_limits<double>::infinity();
        bool found = false;
        const std::uint64_t total = std::uint64_t{1} << k_users;
        if (all_values)
            all_values->clear();
        for (std::uint64_t mask = 0; mask < total; ++mask)
        {
            const SelectionVector s = SelectionVector::from_mask(k_users, mask);
            SolveOutcome o = system.evaluate(s);
            const double v = selection_value(o);
            if (all_values)
                all_values->push_back(v);
            ++res.evaluations;
            if (std::isfinite(v) && (!found || selection_better(v, s, best_value, res.selection)))
            {
                found = true;
                best_value = v;
                res.selection = s;
                res.outcome = std::move(o);
            }
        }
        if (!found)
            throw Error(ErrorCode::AllInfeasible, "no selection admits a feasible allocation");
        res.steps = res.evaluations;
        return res;
    }

    enum class Scheme
    {
        frs,
        rs,
        sdma
    };

    inline const char *to_string(Scheme s)
    {
        switch (s)
        {
        case Scheme::frs: return "frs";
        case Scheme::rs: return "rs";
        case Scheme::sdma: return "sdma";
        }
        return "unknown";
    }

    inline Scheme parse_scheme(const std::string &text)
    {
        if (text == "frs")
            return Scheme::frs;
        if (text == "rs")
            return Scheme::rs;
        if (text == "sdma")
            return Scheme::sdma;
        throw Error(ErrorCode::InvalidValue, "scheme must be frs, rs or sdma");
    }

    // rs: every user decodes the common stream; sdma: private streams only (P_0 = 0).
    inline SelectionResult baseline(const TrialSystem &system, Scheme scheme)
    {
        if (scheme == Scheme::frs)
            throw Error(ErrorCode::InvalidValue, "baseline expects rs or sdma");
        SelectionResult res;
        res.selection = SelectionVector(system.k_users(), scheme == Scheme::rs);
        res.outcome = system.evaluate(res.selection);
        res.evaluations = 1;
        res.steps = 0;
        return res;
    }
} // namespace nfrsma

#endif

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

#ifndef NFRSMA_INNER_SOLVER_HPP
#define NFRSMA_INNER_SOLVER_HPP

// Power and common-rate allocation for a fixed rate-splitting selection.
//
// The fractional SINRs are replaced by quadratic-transform surrogates
// f(P, y) = 2 y sqrt(s(P)) - y^2 I(P), which are tight at y* = sqrt(s)/I. For fixed y the
// allocation problem is convex:
//
//   min Tr(U^{-1})  s.t.  [[F11(P) - U, F12(P)], [F12(P)^T, F22(P)]] >= 0,
//                         sum_{j in K1} R_jc <= log2(1 + f_c,k(P)),     k in K1
//                         s_k R_kc + log2(1 + f_p,k(P)) >= R_th,        all k
//                         sum P <= P_max,  P >= 0,  R_c >= 0.
//
// Since Tr(U^{-1}) is decreasing in U, the LMI is tight at U = F11 - F12 F12^T / c (F22 = c I),
// and the epigraph [[V, I], [I, U]] >= 0 of Tr(U^{-1}) collapses to Tr(S(P)^{-1}) with S(P)
// matrix-concave. Rate constraints are kept in exponential-cone form
// 2^{rate} <= 1 + f(P), which is defined (and concave) everywhere on P > 0.

#include "nfrsma/convex.hpp"
#include "nfrsma/crb.hpp"
#include "nfrsma/precoding.hpp"
#include "nfrsma/rates.hpp"
#include "nfrsma/scenario.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <vector>

namespace nfrsma
{
    struct SurrogateMultipliers
    {
        Eigen::VectorXd y_common;  // y_{k,c}, zero outside K1
        Eigen::VectorXd y_private; // y_{k,p}
    };

    enum class SolveStatus
    {
        optimal,
        infeasible,
        numerical_failure,
        max_iterations
    };

    inline const char *to_string(SolveStatus s)
    {
        switch (s)
        {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::numerical_failure: return "numerical_failure";
        case SolveStatus::max_iterations: return "max_iterations";
        }
        return "unknown";
    }

    struct SolveOutcome
    {
        PowerAllocation powers;
        RateAllocation rate_alloc;
        Eigen::Matrix2d u_matrix = Eigen::Matrix2d::Zero();
        double objective = std::numeric_limits<double>::infinity();
        SolveStatus status = SolveStatus::infeasible;
        int iterations = 0;
        std::vector<double> history; // Tr(U^{-1}) after each outer iteration

        bool usable() const { return status == SolveStatus::optimal || status == SolveStatus::max_iterations; }
    };

    // Quadratic transform: f(y) = 2 y sqrt(s) - y^2 I is maximized at y* = sqrt(s) / I with f(y*) = s / I.
    inline double surrogate_value(double y, double signal, double interference)
    {
        return 2.0 * y * std::sqrt(signal) - y * y * interference;
    }

    inline double optimal_multiplier(double signal, double interference)
    {
        return std::sqrt(signal) / interference;
    }

    // y_{k,c} = sqrt(g_k0 P_0) / (g_kk P_k + sigma^2),  y_{k,p} = sqrt(g_kk P_k) / ((1 - s_k) g_k0 P_0 + sigma^2).
    inline SurrogateMultipliers update_multipliers(const PowerAllocation &powers, const BeamGains &gains,
                                                   const SelectionVector &selection, double noise_w)
    {
        const int k_users = gains.k_users();
        SurrogateMultipliers y{Eigen::VectorXd::Zero(k_users), Eigen::VectorXd::Zero(k_users)};
        const double p0 = powers.comm(0);
        for (int k = 0; k < k_users; ++k)
        {
            const double gk0 = gains(k, 0), gkk = gains(k, k + 1), pk = powers.comm(k + 1);
            if (selection[k])
                y.y_common(k) = optimal_multiplier(gk0 * p0, gkk * pk + noise_w);
            y.y_private(k) = optimal_multiplier(gkk * pk, (selection[k] ? 0.0 : gk0 * p0) + noise_w);
        }
        return y;
    }

    inline SurrogateMultipliers update_multipliers(const PowerAllocation &powers, const BeamGains &gains,
                                                   const SelectionVector &selection, const Scenario &scenario)
    {
        return update_multipliers(powers, gains, selection, scenario.noise_user_w);
    }

    // Everything the allocation problem needs for one selection.
    struct InnerProblem
    {
        SelectionVector selection;
        BeamGains gains;
        FimAtoms atoms;
        double noise_w = 1.0;
        double p_max = 1.0;
        double qos = 0.0;
        SubproblemBackend backend = SubproblemBackend::conic;
        ToleranceMode tol_mode = ToleranceMode::relative;
        double tol = 1e-3;
        int max_iterations = 100;

        int k_users() const { return gains.k_users(); }
        bool has_common() const { return selection.any(); }
    };

    inline InnerProblem make_inner_problem(const Scenario &scenario, const BeamGains &gains,
                                           const SensingChannelBundle &bundle, const PrecoderSet &precoders,
                                           const SelectionVector &selection)
    {
        if (selection.size() != gains.k_users() || precoders.k_users() != gains.k_users())
            throw Error(ErrorCode::DimensionMismatch, "selection, gains and precoders disagree on K");
        if (selection.any() != precoders.has_common)
            throw Error(ErrorCode::InvalidValue, "common precoder presence must match the selection");
        InnerProblem ip;
        ip.selection = selection;
        ip.gains = gains;
        ip.atoms = fim_atoms(bundle, precoders, scenario.coherence_len, scenario.noise_radar_w);
        ip.noise_w = scenario.noise_user_w;
        ip.p_max = scenario.p_max_w;
        ip.qos = scenario.qos_bpshz;
        ip.backend = scenario.backend;
        ip.tol_mode = scenario.tol_mode;
        ip.tol = scenario.tol_inner;
        ip.max_iterations = scenario.max_outer_iters;
        return ip;
    }

    // Trace of the CRB for zero-probe powers; +inf if the FIM is singular.
    inline double crb_trace(const InnerProblem &ip, const PowerAllocation &powers)
    {
        try
        {
            return crb_matrix(fim_from_atoms(ip.atoms, powers.comm + powers.probe)).trace;
        }
        catch (const Error &)
        {
            return std::numeric_limits<double>::infinity();
        }
    }

    namespace detail
    {
        // Variable layout: [x_0 (if K1 nonempty), x_1..x_K, r_j for j in K1], x = P / P_max.
        struct Layout
        {
            bool common = false;
            int k_users = 0;
            std::vector<int> group; // K1
            std::vector<int> rate_index; // per user, -1 if not in K1

            int n_power() const { return k_users + (common ? 1 : 0); }
            int n() const { return n_power() + static_cast<int>(group.size()); }
            int power_index(int beam) const { return common ? beam : beam - 1; } // beam 0 only when common
        };

        inline Layout make_layout(const InnerProblem &ip)
        {
            Layout l;
            l.common = ip.has_common();
            l.k_users = ip.k_users();
            l.group = ip.selection.common_group();
            l.rate_index.assign(static_cast<std::size_t>(l.k_users), -1);
            for (std::size_t j = 0; j < l.group.size(); ++j)
                l.rate_index[static_cast<std::size_t>(l.group[j])] = l.n_power() + static_cast<int>(j);
            return l;
        }

        inline convex::Vec pack(const Layout &l, const PowerAllocation &powers, const RateAllocation &rates,
                                double p_max)
        {
            convex::Vec x(l.n());
            for (int beam = l.common ? 0 : 1; beam <= l.k_users; ++beam)
                x(l.power_index(beam)) = powers.comm(beam) / p_max;
            for (int k : l.group)
                x(l.rate_index[static_cast<std::size_t>(k)]) = rates.common_share(k);
            return x;
        }

        inline void unpack(const Layout &l, const convex::Vec &x, double p_max, PowerAllocation &powers,
                           RateAllocation &rates)
        {
            powers = PowerAllocation::zeros(l.k_users);
            rates = RateAllocation::zeros(l.k_users);
            for (int beam = l.common ? 0 : 1; beam <= l.k_users; ++beam)
                powers.comm(beam) = std::max(0.0, x(l.power_index(beam))) * p_max;
            for (int k : l.group)
                rates.common_share(k) = std::max(0.0, x(l.rate_index[static_cast<std::size_t>(k)]));
        }

        // Tr(S(P)^{-1}) with analytic gradient and Hessian over the power block.
        struct CrbObjective
        {
            std::vector<Eigen::Matrix2d> a, m;
            std::vector<double> c;
            std::vector<int> index; // variable index for each atom
            int n = 0;

            double operator()(const convex::Vec &x, convex::Vec *grad, convex::Mat *hess) const
            {
                constexpr double inf = std::numeric_limits<double>::infinity();
                Eigen::Matrix2d f = Eigen::Matrix2d::Zero(), mm = Eigen::Matrix2d::Zero();
                double cc = 0.0;
                for (std::size_t i = 0; i < c.size(); ++i)
                {
                    const double xi = x(index[i]);
                    f += xi * a[i];
                    mm += xi * m[i];
                    cc += xi * c[i];
                }
                if (!(cc > 0.0))
                    return inf;
                Eigen::Matrix2d s = f - mm * mm.transpose() / cc;
                s = 0.5 * (s + s.transpose()).eval();
                const double det = s.determinant();
                if (!(det > 0.0) || !(s.trace() > 0.0))
                    return inf;
                const Eigen::Matrix2d w = s.inverse();
                const double value = w.trace();
                if (!grad && !hess)
                    return value;

                const Eigen::Matrix2d w2 = w * w;
                const std::size_t nb = c.size();
                std::vector<Eigen::Matrix2d> d(nb), nn(nb);
                const Eigen::Matrix2d mmt = mm * mm.transpose();
                for (std::size_t i = 0; i < nb; ++i)
                {
                    nn[i] = m[i] - mm * (c[i] / cc);
                    d[i] = a[i] - (nn[i] * mm.transpose() + mm * nn[i].transpose()) / cc - mmt * (c[i] / (cc * cc));
                }
                if (grad)
                {
                    grad->setZero(n);
                    for (std::size_t i = 0; i < nb; ++i)
                        (*grad)(index[i]) = -(w2 * d[i]).trace();
                }
                if (hess)
                {
                    hess->setZero(n, n);
                    for (std::size_t i = 0; i < nb; ++i)
                    {
                        const Eigen::Matrix2d w2d = w2 * d[i];
                        const Eigen::Matrix2d w2n = w2 * nn[i];
                        for (std::size_t j = i; j < nb; ++j)
                        {
                            const double hij = 2.0 * (w2d * w * d[j]).trace() +
                                               2.0 * (w2n * nn[j].transpose()).trace() / cc;
                            (*hess)(index[i], index[j]) = hij;
                            (*hess)(index[j], index[i]) = hij;
                        }
                    }
                }
                return value;
            }
        };

        inline CrbObjective make_objective(const InnerProblem &ip, const Layout &l)
        {
            CrbObjective obj;
            obj.n = l.n();
            for (int beam = l.common ? 0 : 1; beam <= l.k_users; ++beam)
            {
                const auto b = static_cast<std::size_t>(beam);
                obj.a.push_back(ip.p_max * ip.atoms.a[b]);
                obj.m.push_back(ip.p_max * ip.atoms.m[b]);
                obj.c.push_back(ip.p_max * ip.atoms.c[b]);
                obj.index.push_back(l.power_index(beam));
            }
            return obj;
        }

        // Exponential-cone form of the surrogate rate constraints; each function is concave.
        //   common  k in K1: 1 + 2 y sqrt(a_k0 x_0) - y^2 (a_kk x_k + 1) - 2^{sum_j r_j}   >= 0
        //   private k:      (1 + 2 y sqrt(a_kk x_k) - y^2 ((1 - s_k) a_k0 x_0 + 1)) / 2^{R_th} - 2^{-s_k r_k} >= 0
        struct RateConstraint
        {
            int sqrt_index = -1;   // variable under the square root
            double sqrt_coeff = 0; // 2 y sqrt(a)
            std::vector<std::pair<int, double>> linear; // -y^2 a terms
            double constant = 1.0;                      // 1 - y^2
            double scale = 1.0;                         // 1 / 2^{R_th} for private constraints
            std::vector<int> exp_index;                 // rate variables in the exponent
            double exp_sign = 1.0;                      // +1: 2^{sum r}; -1: 2^{-r}
            double exp_const = 0.0;                     // exponent offset

            double operator()(const convex::Vec &x, convex::Vec *grad, convex::Mat *hess) const
            {
                const auto n = x.size();
                if (grad)
                    grad->setZero(n);
                if (hess)
                    hess->setZero(n, n);
                double lin = constant;
                if (sqrt_index >= 0)
                {
                    const double xs = x(sqrt_index);
                    if (!(xs > 0.0))
                        return -std::numeric_limits<double>::infinity();
                    const double rt = std::sqrt(xs);
                    lin += sqrt_coeff * rt;
                    if (grad)
                        (*grad)(sqrt_index) += scale * sqrt_coeff * 0.5 / rt;
                    if (hess)
                        (*hess)(sqrt_index, sqrt_index) += -scale * sqrt_coeff * 0.25 / (xs * rt);
                }
                for (const auto &[idx, coeff] : linear)
                {
                    lin += coeff * x(idx);
                    if (grad)
                        (*grad)(idx) += scale * coeff;
                }
                double expo = exp_const;
                for (int idx : exp_index)
                    expo += exp_sign * x(idx);
                const double e = std::exp2(expo);
                if (grad || hess)
                {
                    const double ln2 = std::numbers::ln2;
                    for (int i : exp_index)
                    {
                        if (grad)
                            (*grad)(i) -= exp_sign * ln2 * e;
                        if (hess)
                            for (int j : exp_index)
                                (*hess)(i, j) -= ln2 * ln2 * e;
                    }
                }
                return scale * lin - e;
            }
        };

        inline std::vector<RateConstraint> make_rate_constraints(const InnerProblem &ip, const Layout &l,
                                                                 const SurrogateMultipliers &y)
        {
            std::vector<RateConstraint> out;
            const double sigma = std::sqrt(ip.noise_w);
            const double gain_scale = ip.p_max / ip.noise_w;
            for (int k : l.group)
            {
                const double yk = y.y_common(k) * sigma;
                const double a0 = ip.gains(k, 0) * gain_scale, ak = ip.gains(k, k + 1) * gain_scale;
                RateConstraint rc;
                rc.sqrt_index = l.power_index(0);
                rc.sqrt_coeff = 2.0 * yk * std::sqrt(a0);
                rc.linear.push_back({l.power_index(k + 1), -yk * yk * ak});
                rc.constant = 1.0 - yk * yk;
                for (int j : l.group)
                    rc.exp_index.push_back(l.rate_index[static_cast<std::size_t>(j)]);
                out.push_back(rc);
            }
            for (int k = 0; k < l.k_users; ++k)
            {
                const double yk = y.y_private(k) * sigma;
                const double a0 = ip.gains(k, 0) * gain_scale, ak = ip.gains(k, k + 1) * gain_scale;
                RateConstraint rc;
                rc.sqrt_index = l.power_index(k + 1);
                rc.sqrt_coeff = 2.0 * yk * std::sqrt(ak);
                if (l.common && !ip.selection[k])
                    rc.linear.push_back({l.power_index(0), -yk * yk * a0});
                rc.constant = 1.0 - yk * yk;
                rc.scale = std::exp2(-ip.qos);
                if (ip.selection[k])
                {
                    rc.exp_index.push_back(l.rate_index[static_cast<std::size_t>(k)]);
                    rc.exp_sign = -1.0;
                }
                out.push_back(rc);
            }
            return out;
        }

        inline convex::Problem make_box(const Layout &l)
        {
            convex::Problem p;
            p.n = l.n();
            p.lin_a = convex::Mat::Zero(0, p.n);
            p.lin_b = convex::Vec(0);
            for (int i = 0; i < p.n; ++i)
            {
                convex::Vec e = convex::Vec::Zero(p.n);
                e(i) = 1.0;
                p.add_linear(e, 0.0); // x_i >= 0, r_j >= 0
            }
            convex::Vec budget = convex::Vec::Zero(p.n);
            budget.head(l.n_power()).setConstant(-1.0);
            p.add_linear(budget, 1.0); // sum x <= 1
            return p;
        }

        // Interior start close to the incumbent.
        inline convex::Vec interior_start(const Layout &l, const convex::Vec &incumbent)
        {
            convex::Vec x = incumbent;
            const int np = l.n_power();
            const double uniform = 1.0 / np;
            for (int i = 0; i < np; ++i)
                x(i) = 0.98 * std::max(0.0, x(i)) + 0.01 * uniform;
            for (int i = np; i < l.n(); ++i)
                x(i) = 0.98 * std::max(0.0, x(i)) + 1e-6;
            return x;
        }

        inline SolveOutcome finish(const InnerProblem &ip, const Layout &l, const convex::Vec &x)
        {
            SolveOutcome out;
            unpack(l, x, ip.p_max, out.powers, out.rate_alloc);
            try
            {
                const FimBlocks blocks = fim_from_atoms(ip.atoms, out.powers.comm);
                const double c = blocks.f22(0, 0);
                out.u_matrix = blocks.f11 - blocks.f12 * blocks.f12.transpose() / c;
                out.u_matrix = 0.5 * (out.u_matrix + out.u_matrix.transpose()).eval();
                out.objective = crb_matrix(blocks).trace;
                out.status = SolveStatus::optimal;
            }
            catch (const Error &)
            {
                out.status = SolveStatus::numerical_failure;
            }
            return out;
        }

        inline SolveOutcome solve_conic(const InnerProblem &ip, const Layout &l, const SurrogateMultipliers &y,
                                        const convex::Vec &incumbent)
        {
            convex::Problem p = make_box(l);
            p.objective = make_objective(ip, l);
            for (auto &rc : make_rate_constraints(ip, l, y))
                p.concave.push_back(rc);

            const auto phase1 = convex::find_interior(p, interior_start(l, incumbent));
            if (phase1.status == convex::Status::infeasible)
                return SolveOutcome{};
            if (phase1.status != convex::Status::optimal)
            {
                SolveOutcome out;
                out.status = SolveStatus::numerical_failure;
                return out;
            }
            const auto res = convex::minimize(p, phase1.x);
            if (res.status != convex::Status::optimal)
            {
                SolveOutcome out = finish(ip, l, res.x);
                out.status = SolveStatus::numerical_failure;
                return out;
            }
            return finish(ip, l, res.x);
        }

        // Outer approximation: every concave rate constraint g is replaced by accumulated
        // tangent cuts g(x_j) + grad g(x_j) (x - x_j) >= 0, which contain the true feasible set.
        // Each relaxation has only linear constraints beside the CRB objective. Iterates are
        // cut until the worst violation falls below viol_tol, then pulled back along the
        // segment to a feasible anchor.
        inline SolveOutcome solve_linearized(const InnerProblem &ip, const Layout &l, const SurrogateMultipliers &y,
                                             const convex::Vec &incumbent, int max_rounds = 400,
                                             double viol_tol = 1e-9)
        {
            const auto rates = make_rate_constraints(ip, l, y);
            const convex::Problem box = make_box(l);
            const auto objective = make_objective(ip, l);
            const int n = l.n();

            std::vector<convex::Vec> cut_a;
            std::vector<double> cut_b;
            auto add_cut = [&](const RateConstraint &rc, const convex::Vec &at)
            {
                convex::Vec g(n);
                const double v = rc(at, &g, nullptr);
                if (!std::isfinite(v) || !g.allFinite())
                    return;
                cut_a.push_back(g);
                cut_b.push_back(v - g.dot(at));
            };

            const convex::Vec start = interior_start(l, incumbent);
            for (const auto &rc : rates)
                add_cut(rc, start);

            auto max_violation = [&](const convex::Vec &x)
            {
                double worst = 0.0;
                for (const auto &rc : rates)
                {
                    const double v = rc(x, nullptr, nullptr);
                    worst = std::max(worst, std::isfinite(v) ? -v : std::numeric_limits<double>::infinity());
                }
                return worst;
            };

            convex::Vec x = start;
            for (int round = 0; round < max_rounds; ++round)
            {
                convex::Problem p = box;
                p.objective = objective;
                for (std::size_t c = 0; c < cut_a.size(); ++c)
                {
                    const convex::Vec a = cut_a[c];
                    const double b = cut_b[c];
                    p.concave.push_back([a, b](const convex::Vec &xx, convex::Vec *g, convex::Mat *h)
                                        {
                                            if (g)
                                                *g = a;
                                            if (h)
                                                h->setZero(xx.size(), xx.size());
                                            return a.dot(xx) + b; });
                }
                const auto phase1 = convex::find_interior(p, start);
                if (phase1.status == convex::Status::infeasible)
                    return SolveOutcome{};
                if (phase1.status != convex::Status::optimal)
                    break;
                const auto res = convex::minimize(p, phase1.x);
                if (res.status != convex::Status::optimal)
                    break;
                x = res.x;
                if (max_violation(x) <= viol_tol)
                {
                    // Pull back onto the feasible set when the incumbent anchor is feasible.
                    if (max_violation(incumbent) <= 0.0)
                    {
                        double lo = 0.0, hi = 1.0;
                        if (max_violation(x) > 0.0)
                        {
                            for (int it = 0; it < 60; ++it)
                            {
                                const double mid = 0.5 * (lo + hi);
                                if (max_violation(incumbent + mid * (x - incumbent)) <= 0.0)
                                    lo = mid;
                                else
                                    hi = mid;
                            }
                            x = incumbent + lo * (x - incumbent);
                        }
                    }
                    return finish(ip, l, x);
                }
                for (const auto &rc : rates)
                    if (rc(x, nullptr, nullptr) < 10.0 * viol_tol)
                        add_cut(rc, x);
            }
            SolveOutcome out = finish(ip, l, x);
            out.status = SolveStatus::numerical_failure;
            return out;
        }
    } // namespace detail

    // Global optimum of the convex allocation problem for fixed multipliers. The incumbent
    // seeds the interior-point start; it does not need to be feasible.
    inline SolveOutcome solve_convex_subproblem(const InnerProblem &ip, const SurrogateMultipliers &y,
                                                const PowerAllocation &incumbent_powers,
                                                const RateAllocation &incumbent_rates)
    {
        const auto layout = detail::make_layout(ip);
        const convex::Vec x0 = detail::pack(layout, incumbent_powers, incumbent_rates, ip.p_max);
        SolveOutcome out = ip.backend == SubproblemBackend::conic ? detail::solve_conic(ip, layout, y, x0)
                                                                  : detail::solve_linearized(ip, layout, y, x0);
        out.iterations = 1;
        return out;
    }

    // Uniform start P_k = P_max / (K + 1) (P_0 = 0 when K1 is empty), R_c = 0.
    inline PowerAllocation uniform_initial_powers(const InnerProblem &ip)
    {
        const int k_users = ip.k_users();
        PowerAllocation p = PowerAllocation::zeros(k_users);
        const int beams = ip.has_common() ? k_users + 1 : k_users;
        for (int i = ip.has_common() ? 0 : 1; i <= k_users; ++i)
            p.comm(i) = ip.p_max / beams;
        return p;
    }

    // Start that meets every QoS target with 1% margin using private streams only, then
    // spreads the remaining budget. ok is false when the budget is short.
    inline PowerAllocation qos_initial_powers(const InnerProblem &ip, bool &ok)
    {
        const int k_users = ip.k_users();
        PowerAllocation p = PowerAllocation::zeros(k_users);
        const double target = (std::exp2(ip.qos) - 1.0) * 1.01;
        const double p0 = ip.has_common() ? 1e-3 * ip.p_max : 0.0;
        p.comm(0) = p0;
        double used = p0;
        for (int k = 0; k < k_users; ++k)
        {
            const double interference = (ip.selection[k] ? 0.0 : ip.gains(k, 0) * p0) + ip.noise_w;
            p.comm(k + 1) = target * interference / ip.gains(k, k + 1);
            used += p.comm(k + 1);
        }
        ok = used < ip.p_max;
        if (!ok)
            return p;
        // Leftover goes to private beams, which never hurts any SINR.
        const double spare = 0.99 * (ip.p_max - used) / k_users;
        for (int k = 1; k <= k_users; ++k)
            p.comm(k) += spare;
        return p;
    }

    struct OuterTrace
    {
        std::ostream *out = nullptr; // iteration \t objective \t status
    };

    // Alternates the closed-form multiplier update and the convex subproblem until the
    // decrease of Tr(U^{-1}) drops below the tolerance.
    inline SolveOutcome optimize_powers(const InnerProblem &ip, const PowerAllocation &initial_powers,
                                        OuterTrace trace = {})
    {
        PowerAllocation powers = initial_powers;
        RateAllocation rates = RateAllocation::zeros(ip.k_users());
        if (!ip.has_common())
            powers.comm(0) = 0.0;
        powers.probe.setZero();

        const bool initial_feasible =
            powers.within_budget(ip.p_max) &&
            achievable_rates(ip.gains, powers, ip.selection, rates, ip.noise_w, ip.qos).feasible();
        double previous = crb_trace(ip, powers);

        SolveOutcome best;
        best.status = SolveStatus::infeasible;
        for (int it = 1; it <= ip.max_iterations; ++it)
        {
            const auto y = update_multipliers(powers, ip.gains, ip.selection, ip.noise_w);
            SolveOutcome step = solve_convex_subproblem(ip, y, powers, rates);
            if (trace.out)
                *trace.out << it << '\t' << step.objective << '\t' << to_string(step.status) << '\n';
            if (!step.usable())
            {
                if (it == 1)
                {
                    step.iterations = it;
                    return step;
                }
                best.iterations = it;
                return best;
            }
            if ((it > 1 || initial_feasible) && step.objective > previous)
            {
                // The incumbent is feasible for the tightened subproblem; keep it.
                SolveOutcome kept = detail::finish(ip, detail::make_layout(ip),
                                                   detail::pack(detail::make_layout(ip), powers, rates, ip.p_max));
                if (kept.status == SolveStatus::optimal)
                    step = kept;
            }
            best.history.push_back(step.objective);
            step.history = best.history;
            step.iterations = it;
            best = step;
            powers = step.powers;
            rates = step.rate_alloc;

            const double decrease = previous - step.objective;
            const double measure = ip.tol_mode == ToleranceMode::relative ? decrease / previous : decrease;
            if ((it > 1 || initial_feasible) && std::isfinite(previous) && measure < ip.tol)
                return best;
            previous = step.objective;
        }
        best.status = SolveStatus::max_iterations;
        return best;
    }

    // Uniform start, falling back to a QoS-targeted start when the first subproblem is infeasible.
    inline SolveOutcome optimize_powers(const InnerProblem &ip, OuterTrace trace = {})
    {
        SolveOutcome out = optimize_powers(ip, uniform_initial_powers(ip), trace);
        if (out.status != SolveStatus::infeasible)
            return out;
        bool ok = false;
        const PowerAllocation qos_start = qos_initial_powers(ip, ok);
        if (!ok)
            return out;
        return optimize_powers(ip, qos_start, trace);
    }

    inline SolveOutcome optimize_powers(const Scenario &scenario, const BeamGains &gains,
                                        const SensingChannelBundle &bundle, const PrecoderSet &precoders,
                                        const SelectionVector &selection, const PowerAllocation &initial_powers)
    {
        return optimize_powers(make_inner_problem(scenario, gains, bundle, precoders, selection), initial_powers);
    }

    struct ProbeShiftReport
    {
        PowerAllocation before;
        PowerAllocation after;
        double covariance_change = 0.0; // ||R_before - R_after||_F
        double crb_before = 0.0;
        double crb_after = 0.0;
        std::vector<double> sinr_common_before, sinr_common_after;   // NaN outside K1
        std::vector<double> sinr_private_before, sinr_private_after;
        bool covariance_identical = false;
        bool sinrs_weakly_increase = false;
        bool holds() const { return covariance_identical && sinrs_weakly_increase; }
    };

    // Moves every probe power onto the communication stream of the same beam and checks that
    // the covariance (hence the CRB) is bit-identical while no SINR decreases.
    inline ProbeShiftReport verify_probe_elimination(const Scenario &scenario, const BeamGains &gains,
                                                     const SensingChannelBundle &bundle,
                                                     const PrecoderSet &precoders, const SelectionVector &selection,
                                                     const PowerAllocation &powers_with_probe)
    {
        ProbeShiftReport rep;
        rep.before = powers_with_probe;
        rep.after = powers_with_probe;
        rep.after.comm = powers_with_probe.comm + powers_with_probe.probe;
        rep.after.probe.setZero();

        const Eigen::MatrixXcd r_before = signal_covariance(precoders, rep.before);
        const Eigen::MatrixXcd r_after = signal_covariance(precoders, rep.after);
        rep.covariance_change = (r_before - r_after).norm();
        rep.covariance_identical = (r_before.array() == r_after.array()).all();
        auto trace_of = [&](const Eigen::MatrixXcd &r)
        {
            try
            {
                return crb_for(bundle, r, scenario.coherence_len, scenario.noise_radar_w).trace;
            }
            catch (const Error &)
            {
                return std::numeric_limits<double>::infinity();
            }
        };
        rep.crb_before = trace_of(r_before);
        rep.crb_after = trace_of(r_after);

        rep.sinrs_weakly_increase = true;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        for (int k = 0; k < gains.k_users(); ++k)
        {
            const double cb = selection[k] ? common_sinr(gains, rep.before, selection, k, scenario.noise_user_w) : nan;
            const double ca = selection[k] ? common_sinr(gains, rep.after, selection, k, scenario.noise_user_w) : nan;
            const double pb = private_sinr(gains, rep.before, selection, k, scenario.noise_user_w);
            const double pa = private_sinr(gains, rep.after, selection, k, scenario.noise_user_w);
            rep.sinr_common_before.push_back(cb);
            rep.sinr_common_after.push_back(ca);
            rep.sinr_private_before.push_back(pb);
            rep.sinr_private_after.push_back(pa);
            if ((selection[k] && !(ca >= cb)) || !(pa >= pb))
                rep.sinrs_weakly_increase = false;
        }
        return rep;
    }
} // namespace nfrsma

#endif

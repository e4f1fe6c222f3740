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

#ifndef NFRSMA_CONVEX_HPP
#define NFRSMA_CONVEX_HPP

// Small dense log-barrier interior-point method:
//
//   minimize f(x)  s.t.  A x + b >= 0,  g_j(x) >= 0
//
// with f convex and twice differentiable on its domain (f = +inf outside) and every g_j
// concave. Intended for a few dozen variables; all linear algebra is dense.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace nfrsma::convex
{
    using Vec = Eigen::VectorXd;
    using Mat = Eigen::MatrixXd;

    // Returns f(x); fills gradient / Hessian when the pointers are non-null.
    using SmoothFn = std::function<double(const Vec &, Vec *, Mat *)>;

    struct Problem
    {
        int n = 0;
        SmoothFn objective;
        Mat lin_a; // rows of A
        Vec lin_b;
        std::vector<SmoothFn> concave;

        int constraint_count() const { return static_cast<int>(lin_b.size() + concave.size()); }

        void add_linear(const Vec &a, double b)
        {
            const auto r = lin_a.rows();
            lin_a.conservativeResize(r + 1, n);
            lin_b.conservativeResize(r + 1);
            lin_a.row(r) = a.transpose();
            lin_b(r) = b;
        }
    };

    struct Options
    {
        double gap_tol = 1e-10;     // target m/t, in units of |f(x0)|
        double accept_gap = 1e-5;   // largest gap still reported as optimal after a failed centering
        double mu = 10.0;
        double newton_tol = 1e-10;  // lambda^2 / 2
        int max_newton_per_center = 100;
        int max_total_newton = 4000;
    };

    enum class Status
    {
        optimal,
        infeasible,
        numerical_failure
    };

    struct Result
    {
        Status status = Status::numerical_failure;
        Vec x;
        double value = std::numeric_limits<double>::infinity();
        double gap = std::numeric_limits<double>::infinity();
        int newton_steps = 0;
    };

    namespace detail
    {
        inline constexpr double inf = std::numeric_limits<double>::infinity();

        // Log barrier of all constraints; +inf outside the strict interior.
        inline double barrier(const Problem &p, const Vec &x, Vec *g, Mat *h)
        {
            double value = 0.0;
            if (g)
                g->setZero(x.size());
            if (h)
                h->setZero(x.size(), x.size());
            if (p.lin_b.size() > 0)
            {
                const Vec slack = p.lin_a * x + p.lin_b;
                if ((slack.array() <= 0.0).any() || !slack.allFinite())
                    return inf;
                value -= slack.array().log().sum();
                if (g)
                    *g -= p.lin_a.transpose() * slack.cwiseInverse();
                if (h)
                    *h += p.lin_a.transpose() * slack.array().square().inverse().matrix().asDiagonal() * p.lin_a;
            }
            Vec gj(x.size());
            Mat hj(x.size(), x.size());
            for (const auto &fn : p.concave)
            {
                const double v = fn(x, g ? &gj : nullptr, h ? &hj : nullptr);
                if (!(v > 0.0) || !std::isfinite(v))
                    return inf;
                value -= std::log(v);
                if (g)
                    *g -= gj / v;
                if (h)
                    *h += (gj * gj.transpose()) / (v * v) - hj / v;
            }
            return value;
        }

        inline bool solve_newton(const Mat &h, const Vec &g, Vec &dx)
        {
            Mat hh = h;
            double shift = 0.0;
            const double base = std::max(1e-300, h.diagonal().cwiseAbs().maxCoeff());
            for (int attempt = 0; attempt < 8; ++attempt)
            {
                Eigen::LDLT<Mat> ldlt(hh);
                if (ldlt.info() == Eigen::Success && ldlt.isPositive())
                {
                    dx = ldlt.solve(-g);
                    if (dx.allFinite() && g.dot(dx) < 0.0)
                        return true;
                }
                shift = shift == 0.0 ? 1e-12 * base : shift * 100.0;
                hh = h;
                hh.diagonal().array() += shift;
            }
            return false;
        }

        enum class CenterStatus
        {
            converged,
            stalled_close,
            failed,
            stopped_early
        };

        // Damped Newton on F with backtracking line search.
        template <typename F, typename Stop>
        CenterStatus center(const F &fun, Vec &x, const Options &opt, int &steps, const Stop &stop_early)
        {
            const auto n = x.size();
            Vec g(n), dx(n);
            Mat h(n, n);
            for (int it = 0; it < opt.max_newton_per_center; ++it)
            {
                const double val = fun(x, &g, &h);
                if (!std::isfinite(val))
                    return CenterStatus::failed;
                if (!solve_newton(h, g, dx))
                    return CenterStatus::failed;
                const double slope = g.dot(dx);
                const double lambda2 = -slope;
                // Decreases below the rounding level of F cannot be verified by the line search.
                const double resolution = 1000.0 * std::numeric_limits<double>::epsilon() * std::abs(val);
                if (lambda2 / 2.0 <= opt.newton_tol + resolution)
                    return CenterStatus::converged;
                double alpha = 1.0;
                bool accepted = false;
                while (alpha > 1e-16)
                {
                    const Vec xn = x + alpha * dx;
                    const double vn = fun(xn, nullptr, nullptr);
                    if (std::isfinite(vn) && vn <= val + 0.25 * alpha * slope)
                    {
                        x = xn;
                        accepted = true;
                        break;
                    }
                    alpha *= 0.5;
                }
                ++steps;
                if (!accepted || (alpha < 1e-3 && lambda2 < 1e-5))
                    return lambda2 < 1e-5 ? CenterStatus::stalled_close : CenterStatus::failed;
                if (stop_early(x))
                    return CenterStatus::stopped_early;
                if (steps > opt.max_total_newton)
                    return CenterStatus::failed;
            }
            return CenterStatus::failed;
        }
    } // namespace detail

    inline bool strictly_feasible(const Problem &p, const Vec &x)
    {
        return std::isfinite(detail::barrier(p, x, nullptr, nullptr));
    }

    // Phase I: from x0 strictly inside the linear constraints and the objective domain,
    // finds a point strictly satisfying every concave constraint, or certifies infeasibility.
    inline Result find_interior(const Problem &p, const Vec &x0, const Options &opt = {})
    {
        Result res;
        res.x = x0;
        const auto n = p.n;
        if (!std::isfinite(p.objective(x0, nullptr, nullptr)))
            return res;
        {
            Problem lin_only = p;
            lin_only.concave.clear();
            if (!strictly_feasible(lin_only, x0))
                return res;
        }
        if (strictly_feasible(p, x0))
        {
            res.status = Status::optimal;
            return res;
        }

        double worst = 0.0;
        for (const auto &fn : p.concave)
            worst = std::max(worst, -fn(x0, nullptr, nullptr));
        const double s_scale = std::max(1.0, worst);

        // z = [x; s], minimize s subject to g_j(x) + s * s_scale >= 0, s >= -1.
        Vec z(n + 1);
        z.head(n) = x0;
        z(n) = worst / s_scale + 1.0;
        const int m = p.constraint_count() + 1;

        auto fun = [&](const Vec &zz, Vec *g, Mat *h, double t) -> double
        {
            const Vec x = zz.head(n);
            const double s = zz(n);
            if (!(s + 1.0 > 0.0))
                return detail::inf;
            if (!std::isfinite(p.objective(x, nullptr, nullptr)))
                return detail::inf;
            double value = t * s - std::log(s + 1.0);
            if (g)
            {
                g->setZero(n + 1);
                (*g)(n) = t - 1.0 / (s + 1.0);
            }
            if (h)
            {
                h->setZero(n + 1, n + 1);
                (*h)(n, n) = 1.0 / ((s + 1.0) * (s + 1.0));
            }
            if (p.lin_b.size() > 0)
            {
                const Vec slack = p.lin_a * x + p.lin_b;
                if ((slack.array() <= 0.0).any())
                    return detail::inf;
                value -= slack.array().log().sum();
                if (g)
                    g->head(n) -= p.lin_a.transpose() * slack.cwiseInverse();
                if (h)
                    h->topLeftCorner(n, n) +=
                        p.lin_a.transpose() * slack.array().square().inverse().matrix().asDiagonal() * p.lin_a;
            }
            Vec gj(n);
            Mat hj(n, n);
            for (const auto &fn : p.concave)
            {
                const double v = fn(x, g ? &gj : nullptr, h ? &hj : nullptr) + s * s_scale;
                if (!(v > 0.0) || !std::isfinite(v))
                    return detail::inf;
                value -= std::log(v);
                if (g)
                {
                    g->head(n) -= gj / v;
                    (*g)(n) -= s_scale / v;
                }
                if (h)
                {
                    Vec full(n + 1);
                    full.head(n) = gj;
                    full(n) = s_scale;
                    *h += full * full.transpose() / (v * v);
                    h->topLeftCorner(n, n) -= hj / v;
                }
            }
            return value;
        };

        auto stop = [&](const Vec &zz) { return zz(n) < 0.0 && strictly_feasible(p, zz.head(n)); };
        double t = 1.0;
        while (true)
        {
            auto ft = [&](const Vec &zz, Vec *g, Mat *h) { return fun(zz, g, h, t); };
            const auto st = detail::center(ft, z, opt, res.newton_steps, stop);
            if (st == detail::CenterStatus::stopped_early)
            {
                res.x = z.head(n);
                res.status = Status::optimal;
                return res;
            }
            if (st == detail::CenterStatus::failed)
            {
                res.status = Status::numerical_failure;
                return res;
            }
            const double gap = m / t;
            if (z(n) - gap > 0.0 || gap < 1e-12)
            {
                res.status = Status::infeasible;
                res.x = z.head(n);
                res.gap = gap;
                return res;
            }
            t *= opt.mu;
        }
    }

    // Phase II barrier method from a strictly feasible x0.
    inline Result minimize(const Problem &p, const Vec &x0, const Options &opt = {})
    {
        Result res;
        res.x = x0;
        const double f0 = p.objective(x0, nullptr, nullptr);
        if (!std::isfinite(f0) || !strictly_feasible(p, x0))
            return res;
        const double scale = std::max(std::abs(f0), 1e-300);
        const int m = std::max(1, p.constraint_count());

        double t = 1.0;
        auto none = [](const Vec &) { return false; };
        Vec x = x0;
        while (true)
        {
            auto ft = [&](const Vec &xx, Vec *g, Mat *h) -> double
            {
                Vec go;
                Mat ho;
                const double fo = p.objective(xx, g ? &go : nullptr, h ? &ho : nullptr);
                if (!std::isfinite(fo))
                    return detail::inf;
                const double b = detail::barrier(p, xx, g, h);
                if (!std::isfinite(b))
                    return detail::inf;
                if (g)
                    *g += (t / scale) * go;
                if (h)
                    *h += (t / scale) * ho;
                return (t / scale) * fo + b;
            };
            Vec x_prev = x;
            const auto st = detail::center(ft, x, opt, res.newton_steps, none);
            const double gap = m / t;
            if (st == detail::CenterStatus::failed)
            {
                // Fall back to the last completed center.
                if (!std::isfinite(p.objective(x, nullptr, nullptr)) || !strictly_feasible(p, x))
                    x = x_prev;
                const double last_gap = gap * opt.mu;
                res.x = x;
                res.value = p.objective(x, nullptr, nullptr);
                res.gap = last_gap;
                res.status = last_gap <= opt.accept_gap ? Status::optimal : Status::numerical_failure;
                return res;
            }
            // A stall with a small Newton decrement is as close to the center as rounding allows.
            if (gap <= opt.gap_tol)
            {
                res.x = x;
                res.value = p.objective(x, nullptr, nullptr);
                res.gap = gap;
                res.status = Status::optimal;
                return res;
            }
            t *= opt.mu;
        }
    }
} // namespace nfrsma::convex

#endif

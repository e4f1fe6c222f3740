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

#ifndef NFRSMA_EXPERIMENTS_HPP
#define NFRSMA_EXPERIMENTS_HPP

#include "nfrsma/selection.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace nfrsma
{
    struct ExperimentRecord
    {
        Scheme scheme = Scheme::frs;
        std::uint64_t seed = 0;
        int k_users = 0;
        double qos_bpshz = 0.0;
        double axis_value = 0.0; // swept parameter; K or R_th
        double objective = std::numeric_limits<double>::quiet_NaN(); // Tr(CRB)
        double rcrb_dist_m = std::numeric_limits<double>::quiet_NaN();
        double rcrb_angle_rad = std::numeric_limits<double>::quiet_NaN();
        double crb_dist = std::numeric_limits<double>::quiet_NaN();  // CRB diagonal entries
        double crb_angle = std::numeric_limits<double>::quiet_NaN();
        int outer_iters = 0;
        int sa_steps = 0;
        long long wall_ms = 0;
        std::string status = "infeasible"; // ok | infeasible | nonconverged
        std::string selection;              // s_1..s_K, empty when infeasible

        bool ok() const { return status == "ok"; }
    };

    inline std::uint64_t annealer_seed(std::uint64_t trial_seed) { return stream_seed(trial_seed, 0x5eedULL); }

    // Builds the trial system for a seed, redrawing the users while the channel matrix
    // is rank deficient.
    inline TrialSystem make_trial_system(const Scenario &scenario, std::uint64_t seed, int max_redraws = 16)
    {
        for (int attempt = 0;; ++attempt)
        {
            const std::uint64_t s = attempt == 0 ? seed : stream_seed(seed, static_cast<std::uint64_t>(attempt));
            try
            {
                return TrialSystem(scenario, sample_users(scenario.user_region, scenario.k_users(), s));
            }
            catch (const Error &e)
            {
                if (e.code() != ErrorCode::RankDeficient || attempt + 1 >= max_redraws)
                    throw;
            }
        }
    }

    // CRB from the transmit covariance of the final powers.
    inline CrbResult reconstruct_crb(const TrialSystem &system, const SelectionVector &selection,
                                     const PowerAllocation &powers)
    {
        const Eigen::MatrixXcd r = signal_covariance(system.precoders(selection), powers);
        return crb_for(system.bundle(), r, system.scenario().coherence_len, system.scenario().noise_radar_w);
    }

    inline ExperimentRecord run_trial(const Scenario &scenario, Scheme scheme, std::uint64_t seed)
    {
        const auto t0 = std::chrono::steady_clock::now();
        ExperimentRecord rec;
        rec.scheme = scheme;
        rec.seed = seed;
        rec.k_users = scenario.k_users();
        rec.qos_bpshz = scenario.qos_bpshz;
        try
        {
            const TrialSystem system = make_trial_system(scenario, seed);
            SelectionResult sel;
            bool search_converged = true;
            if (scheme == Scheme::frs)
            {
                sel = scenario.selection_mode == SelectionMode::exhaustive ? exhaustive(system)
                                                                           : anneal(system, annealer_seed(seed));
                search_converged = sel.converged;
                rec.sa_steps = sel.steps;
            }
            else
                sel = baseline(system, scheme);

            rec.outer_iters = sel.outcome.iterations;
            if (sel.outcome.status == SolveStatus::infeasible)
                rec.status = "infeasible";
            else if (sel.outcome.status == SolveStatus::numerical_failure)
                rec.status = "nonconverged";
            else
            {
                const CrbResult crb = reconstruct_crb(system, sel.selection, sel.outcome.powers);
                rec.objective = crb.trace;
                rec.crb_angle = crb.matrix(0, 0);
                rec.crb_dist = crb.matrix(1, 1);
                rec.rcrb_angle_rad = crb.rcrb_angle;
                rec.rcrb_dist_m = crb.rcrb_dist;
                rec.selection = sel.selection.to_string();
                rec.status = (sel.outcome.status == SolveStatus::optimal && search_converged) ? "ok" : "nonconverged";
            }
        }
        catch (const Error &e)
        {
            rec.status = e.code() == ErrorCode::AllInfeasible ? "infeasible" : "nonconverged";
        }
        rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0)
                          .count();
        return rec;
    }

    enum class SweepAxis
    {
        users,
        qos
    };

    inline SweepAxis parse_axis(const std::string &text)
    {
        if (text == "users")
            return SweepAxis::users;
        if (text == "qos")
            return SweepAxis::qos;
        throw Error(ErrorCode::InvalidValue, "axis must be users or qos");
    }

    inline const char *to_string(SweepAxis a) { return a == SweepAxis::users ? "users" : "qos"; }

    // Scenario for one axis value; user positions are redrawn per trial.
    inline Scenario scenario_at(const Scenario &base, SweepAxis axis, double value)
    {
        Scenario s = base;
        if (axis == SweepAxis::users)
        {
            const int k = static_cast<int>(std::lround(value));
            if (k < 1 || std::abs(value - k) > 1e-9)
                throw Error(ErrorCode::InvalidValue, "user counts must be positive integers");
            s.users.assign(static_cast<std::size_t>(k), PolarPosition{s.user_region.distance_min_m, 0.0});
        }
        else
        {
            if (!(value >= 0.0))
                throw Error(ErrorCode::InvalidValue, "qos values must be non-negative");
            s.qos_bpshz = value;
        }
        return s;
    }

    // Trial i uses seed stream_seed(root, i) for every scheme and axis value, so cells share
    // user drops (nested drops along the users axis).
    inline std::uint64_t trial_seed(std::uint64_t root, int trial)
    {
        return stream_seed(root, static_cast<std::uint64_t>(trial));
    }

    struct CellSummary
    {
        Scheme scheme = Scheme::frs;
        double axis_value = 0.0;
        int trials = 0;
        int ok = 0;
        double mean_objective = std::numeric_limits<double>::quiet_NaN();
        double mean_rcrb_dist_m = std::numeric_limits<double>::quiet_NaN();
        double mean_rcrb_angle_rad = std::numeric_limits<double>::quiet_NaN();

        double ok_fraction() const { return trials > 0 ? static_cast<double>(ok) / trials : 0.0; }
    };

    struct SweepResult
    {
        SweepAxis axis = SweepAxis::users;
        std::vector<ExperimentRecord> records; // sorted by (scheme, axis value, seed)
        std::vector<CellSummary> summary;      // sorted by (scheme, axis value)

        const CellSummary *cell(Scheme scheme, double value) const
        {
            for (const auto &c : summary)
                if (c.scheme == scheme && c.axis_value == value)
                    return &c;
            return nullptr;
        }
    };

    inline bool record_less(const ExperimentRecord &a, const ExperimentRecord &b)
    {
        return std::tuple(static_cast<int>(a.scheme), a.axis_value, a.seed) <
               std::tuple(static_cast<int>(b.scheme), b.axis_value, b.seed);
    }

    // Means over ok rows only.
    inline std::vector<CellSummary> summarize(const std::vector<ExperimentRecord> &sorted_records)
    {
        std::vector<CellSummary> out;
        for (const auto &r : sorted_records)
        {
            if (out.empty() || out.back().scheme != r.scheme || out.back().axis_value != r.axis_value)
            {
                CellSummary c;
                c.scheme = r.scheme;
                c.axis_value = r.axis_value;
                c.mean_objective = c.mean_rcrb_dist_m = c.mean_rcrb_angle_rad = 0.0;
                out.push_back(c);
            }
            auto &c = out.back();
            ++c.trials;
            if (!r.ok())
                continue;
            ++c.ok;
            c.mean_objective += r.objective;
            c.mean_rcrb_dist_m += r.rcrb_dist_m;
            c.mean_rcrb_angle_rad += r.rcrb_angle_rad;
        }
        for (auto &c : out)
        {
            if (c.ok == 0)
            {
                c.mean_objective = c.mean_rcrb_dist_m = c.mean_rcrb_angle_rad =
                    std::numeric_limits<double>::quiet_NaN();
                continue;
            }
            c.mean_objective /= c.ok;
            c.mean_rcrb_dist_m /= c.ok;
            c.mean_rcrb_angle_rad /= c.ok;
        }
        return out;
    }

    struct SweepOptions
    {
        std::uint64_t root_seed = 0;
        unsigned threads = 0; // 0: hardware concurrency
        std::ostream *progress = nullptr;
    };

    inline SweepResult run_sweep(const Scenario &base, SweepAxis axis, const std::vector<double> &values,
                                 const std::vector<Scheme> &schemes, int trials, const SweepOptions &opt = {})
    {
        if (values.empty() || schemes.empty())
            throw Error(ErrorCode::InvalidValue, "sweep needs at least one axis value and one scheme");
        if (trials < 1)
            throw Error(ErrorCode::InvalidValue, "trials must be positive");

        struct Item
        {
            Scheme scheme;
            double value;
            std::size_t scenario;
            std::uint64_t seed;
        };
        std::vector<Scenario> scenarios;
        for (double v : values)
            scenarios.push_back(scenario_at(base, axis, v));
        std::vector<Item> items;
        for (Scheme sc : schemes)
            for (std::size_t vi = 0; vi < values.size(); ++vi)
                for (int t = 0; t < trials; ++t)
                    items.push_back({sc, values[vi], vi, trial_seed(opt.root_seed, t)});

        std::vector<ExperimentRecord> records(items.size());
        std::atomic<std::size_t> next{0};
        std::mutex progress_mutex;
        std::size_t done = 0;
        auto worker = [&]
        {
            while (true)
            {
                const std::size_t i = next.fetch_add(1);
                if (i >= items.size())
                    return;
                const Item &it = items[i];
                records[i] = run_trial(scenarios[it.scenario], it.scheme, it.seed);
                records[i].axis_value = it.value;
                if (opt.progress)
                {
                    std::lock_guard<std::mutex> lock(progress_mutex);
                    ++done;
                    *opt.progress << "[" << done << "/" << items.size() << "] " << to_string(it.scheme) << " "
                                  << to_string(axis) << "=" << it.value << " " << records[i].status << " "
                                  << records[i].wall_ms << " ms\n";
                }
            }
        };
        unsigned n_threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
        n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, items.size()));
        std::vector<std::thread> pool;
        for (unsigned t = 1; t < n_threads; ++t)
            pool.emplace_back(worker);
        worker();
        for (auto &th : pool)
            th.join();

        SweepResult res;
        res.axis = axis;
        res.records = std::move(records);
        std::sort(res.records.begin(), res.records.end(), record_less);
        res.summary = summarize(res.records);
        return res;
    }

    // Locale-independent shortest round-trip formatting.
    inline std::string format_number(double v)
    {
        if (std::isnan(v))
            return "nan";
        if (std::isinf(v))
            return v > 0 ? "inf" : "-inf";
        char buf[64];
        const auto r = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, r.ptr);
    }

    inline constexpr const char *record_header =
        "scheme,axis_value,seed,k_users,qos_bpshz,objective,rcrb_dist_m,rcrb_angle_rad,outer_iters,sa_steps,status,"
        "selection";

    inline std::string record_row(const ExperimentRecord &r)
    {
        std::ostringstream os;
        os << to_string(r.scheme) << ',' << format_number(r.axis_value) << ',' << r.seed << ',' << r.k_users << ','
           << format_number(r.qos_bpshz) << ',' << format_number(r.objective) << ','
           << format_number(r.rcrb_dist_m) << ',' << format_number(r.rcrb_angle_rad) << ',' << r.outer_iters << ','
           << r.sa_steps << ',' << r.status << ',' << r.selection;
        return os.str();
    }

    inline constexpr const char *summary_header =
        "scheme,axis_value,trials,ok,ok_fraction,mean_objective,mean_rcrb_dist_m,mean_rcrb_angle_rad";

    inline std::string summary_row(const CellSummary &c)
    {
        std::ostringstream os;
        os << to_string(c.scheme) << ',' << format_number(c.axis_value) << ',' << c.trials << ',' << c.ok << ','
           << format_number(c.ok_fraction()) << ',' << format_number(c.mean_objective) << ','
           << format_number(c.mean_rcrb_dist_m) << ',' << format_number(c.mean_rcrb_angle_rad);
        return os.str();
    }

    // Data block, two blank lines, then the summary block (gnuplot index 1).
    inline void write_sweep_csv(std::ostream &out, const SweepResult &res)
    {
        out << record_header << '\n';
        for (const auto &r : res.records)
            out << record_row(r) << '\n';
        out << "\n\n# summary: " << summary_header << '\n';
        for (const auto &c : res.summary)
            out << summary_row(c) << '\n';
    }

    inline std::string plot_script(const std::string &csv_name, SweepAxis axis, const std::vector<Scheme> &schemes)
    {
        const std::string stem = std::filesystem::path(csv_name).stem().string();
        std::ostringstream os;
        os << "# gnuplot script; run from the directory holding " << csv_name << "\n"
           << "set datafile separator ','\n"
           << "set terminal pngcairo size 1200,480\n"
           << "set output '" << stem << ".png'\n"
           << "set multiplot layout 1,2\n"
           << "set grid\n"
           << "set key top right\n"
           << "set xlabel '" << (axis == SweepAxis::users ? "Number of users K" : "QoS threshold R_th (bit/s/Hz)")
           << "'\n";
        auto plots = [&](const std::string &ylabel, const std::string &column)
        {
            os << "set ylabel '" << ylabel << "'\n"
               << "set logscale y\n"
               << "plot ";
            for (std::size_t i = 0; i < schemes.size(); ++i)
            {
                const std::string name = to_string(schemes[i]);
                os << (i ? ", \\\n     " : "") << "'" << csv_name << "' index 1 using 2:(strcol(1) eq '" << name
                   << "' ? " << column << " : NaN) with linespoints title '" << name << "'";
            }
            os << "\n";
        };
        plots("RCRB distance (m)", "$7");
        plots("RCRB angle (deg)", "($8*180/pi)");
        os << "unset multiplot\n";
        return os.str();
    }

    inline void write_text_file(const std::filesystem::path &path, const std::string &text)
    {
        std::ofstream f(path, std::ios::binary);
        if (!f)
            throw Error(ErrorCode::IoError, "cannot write " + path.string());
        f << text;
        if (!f)
            throw Error(ErrorCode::IoError, "write failed for " + path.string());
    }

    struct SweepFiles
    {
        std::filesystem::path csv, plot, timing;
    };

    // Writes <out>, <out stem>.gp and <out stem>.timing.csv. Timing lives in the sidecar so
    // the main CSV is reproducible byte for byte.
    inline SweepFiles write_sweep(const std::filesystem::path &out, const SweepResult &res,
                                  const std::vector<Scheme> &schemes)
    {
        SweepFiles files;
        files.csv = out;
        files.plot = std::filesystem::path(out).replace_extension(".gp");
        files.timing = std::filesystem::path(out).replace_extension(".timing.csv");
        std::ostringstream csv;
        write_sweep_csv(csv, res);
        write_text_file(files.csv, csv.str());
        write_text_file(files.plot, plot_script(out.filename().string(), res.axis, schemes));
        std::ostringstream timing;
        timing << "scheme,axis_value,seed,wall_ms\n";
        for (const auto &r : res.records)
            timing << to_string(r.scheme) << ',' << format_number(r.axis_value) << ',' << r.seed << ',' << r.wall_ms
                   << '\n';
        write_text_file(files.timing, timing.str());
        return files;
    }

    inline SweepResult sweep(const Scenario &base, SweepAxis axis, const std::vector<double> &values,
                             const std::vector<Scheme> &schemes, int trials, const std::filesystem::path &out,
                             const SweepOptions &opt = {})
    {
        SweepResult res = run_sweep(base, axis, values, schemes, trials, opt);
        write_sweep(out, res, schemes);
        return res;
    }

    // ---------------------------------------------------------------------------------
    // Invariant suite
    // ---------------------------------------------------------------------------------

    struct CheckResult
    {
        std::string name;
        bool passed = false;
        std::string detail;
    };

    struct ValidationReport
    {
        std::vector<CheckResult> checks;

        bool all_passed() const
        {
            return std::all_of(checks.begin(), checks.end(), [](const CheckResult &c) { return c.passed; });
        }

        const CheckResult *find(const std::string &name) const
        {
            for (const auto &c : checks)
                if (c.name == name)
                    return &c;
            return nullptr;
        }

        void print(std::ostream &os) const
        {
            for (const auto &c : checks)
                os << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
        }
    };

    struct ValidationOptions
    {
        std::uint64_t seed = 1;
        double jacobian_bias = 0.0; // added to every analytic derivative entry; negative-control hook
        int jacobian_points = 20;
        int transform_draws = 1000;
        int shift_draws = 100;
        int selection_users = 5; // K for the annealing-vs-exhaustive comparison
        bool include_selection = true;
    };

    namespace detail
    {
        inline std::string sci(double v)
        {
            std::ostringstream os;
            os.precision(3);
            os << std::scientific << v;
            return os.str();
        }

        inline CheckResult check_jacobian(const Scenario &sc, const ValidationOptions &opt)
        {
            Rng rng(stream_seed(opt.seed, 1));
            double worst = 0.0;
            for (int i = 0; i < opt.jacobian_points; ++i)
            {
                const PolarPosition pos{rng.uniform(sc.user_region.distance_min_m, sc.user_region.distance_max_m),
                                        rng.uniform(sc.user_region.angle_min_rad, sc.user_region.angle_max_rad)};
                for (ArraySide side : {ArraySide::tx, ArraySide::rx})
                {
                    ResponseJacobian jac = array_response_jacobian(sc.geometry, side, pos);
                    jac.d_theta.array() += opt.jacobian_bias;
                    jac.d_dist.array() += opt.jacobian_bias;
                    const double ht = 1e-6, hd = 1e-4;
                    const Eigen::VectorXcd ft =
                        (array_response(sc.geometry, side, {pos.distance_m, pos.angle_rad + ht}) -
                         array_response(sc.geometry, side, {pos.distance_m, pos.angle_rad - ht})) /
                        (2.0 * ht);
                    const Eigen::VectorXcd fd =
                        (array_response(sc.geometry, side, {pos.distance_m + hd, pos.angle_rad}) -
                         array_response(sc.geometry, side, {pos.distance_m - hd, pos.angle_rad})) /
                        (2.0 * hd);
                    worst = std::max(worst, (jac.d_theta - ft).norm() / ft.norm());
                    worst = std::max(worst, (jac.d_dist - fd).norm() / fd.norm());
                }
            }
            return {"jacobian_fd", worst <= 1e-6, "max relative error " + sci(worst) + " (limit 1e-6)"};
        }

        inline CheckResult check_fim(const Scenario &sc, const ValidationOptions &opt)
        {
            Rng rng(stream_seed(opt.seed, 2));
            const SensingChannelBundle b = sensing_bundle(sc.geometry, sc.target, sc.target_gain);
            const int n = sc.geometry.n_tx;
            Eigen::MatrixXcd x(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    x(i, j) = cdouble(rng.normal(), rng.normal());
            const Eigen::MatrixXcd r = x * x.adjoint() / static_cast<double>(n);
            // Tr(G_y R G_x^H) = sum_ij (G_y R)_ij conj(G_x)_ij, summed element by element.
            auto naive = [&](const Eigen::MatrixXcd &gx, const Eigen::MatrixXcd &gy)
            {
                cdouble acc = 0.0;
                for (Eigen::Index i = 0; i < gy.rows(); ++i)
                    for (Eigen::Index j = 0; j < gy.cols(); ++j)
                    {
                        cdouble gr = 0.0;
                        for (Eigen::Index m = 0; m < gy.cols(); ++m)
                            gr += gy(i, m) * r(m, j);
                        acc += gr * std::conj(gx(i, j));
                    }
                return acc;
            };
            const FimBlocks blocks = fim_blocks(b, r, sc.coherence_len, sc.noise_radar_w);
            const double scale = 2.0 * sc.coherence_len / sc.noise_radar_w;
            const double b2 = std::norm(b.gain);
            const cdouble bc = std::conj(b.gain);
            const cdouble tt = naive(b.d_theta, b.d_theta), td = naive(b.d_theta, b.d_dist),
                          dd = naive(b.d_dist, b.d_dist), gt = naive(b.d_theta, b.response),
                          gd = naive(b.d_dist, b.response), g0 = naive(b.response, b.response);
            double worst = 0.0;
            auto cmp = [&](double got, double want, double ref)
            { worst = std::max(worst, std::abs(got - want) / std::max(std::abs(ref), 1e-300)); };
            const double f11_ref = scale * b2 * std::max(std::abs(tt.real()), std::abs(dd.real()));
            cmp(blocks.f11(0, 0), scale * b2 * tt.real(), f11_ref);
            cmp(blocks.f11(0, 1), scale * b2 * td.real(), f11_ref);
            cmp(blocks.f11(1, 1), scale * b2 * dd.real(), f11_ref);
            const double f12_ref = scale * std::abs(b.gain) * std::max(std::abs(gt), std::abs(gd));
            cmp(blocks.f12(0, 0), scale * (bc * gt).real(), f12_ref);
            cmp(blocks.f12(0, 1), -scale * (bc * gt).imag(), f12_ref);
            cmp(blocks.f12(1, 0), scale * (bc * gd).real(), f12_ref);
            cmp(blocks.f12(1, 1), -scale * (bc * gd).imag(), f12_ref);
            cmp(blocks.f22(0, 0), scale * g0.real(), scale * g0.real());
            return {"fim_oracle", worst <= 1e-12, "max relative deviation " + sci(worst) + " (limit 1e-12)"};
        }

        inline CheckResult check_transform(const ValidationOptions &opt)
        {
            Rng rng(stream_seed(opt.seed, 3));
            double worst = 0.0;
            bool dominated = true;
            for (int i = 0; i < opt.transform_draws; ++i)
            {
                const double s = std::exp(rng.uniform(-10.0, 10.0)), in = std::exp(rng.uniform(-10.0, 10.0));
                const double ys = optimal_multiplier(s, in);
                const double peak = surrogate_value(ys, s, in);
                worst = std::max(worst, std::abs(peak - s / in) / (s / in));
                for (int j = 0; j < 100; ++j)
                {
                    const double y = ys * std::exp(rng.uniform(-5.0, 5.0));
                    if (surrogate_value(y, s, in) > peak * (1.0 + 1e-15))
                        dominated = false;
                }
            }
            return {"transform_exactness", worst <= 1e-12 && dominated,
                    "max |f(y*) - s/I| / (s/I) = " + sci(worst) + (dominated ? "" : "; f(y) > f(y*) observed")};
        }

        inline PowerAllocation random_probe_allocation(Rng &rng, int k_users, double p_max, bool has_common)
        {
            PowerAllocation p = PowerAllocation::zeros(k_users);
            for (int i = 0; i <= k_users; ++i)
            {
                if (i == 0 && !has_common)
                    continue;
                p.comm(i) = rng.uniform();
                p.probe(i) = rng.uniform();
            }
            const double total = p.total();
            p.comm *= 0.999 * p_max / total;
            p.probe *= 0.999 * p_max / total;
            return p;
        }

        inline CheckResult check_probe_shift(const TrialSystem &sys, const ValidationOptions &opt)
        {
            Rng rng(stream_seed(opt.seed, 4));
            const int k_users = sys.k_users();
            int failures = 0;
            double worst_change = 0.0;
            for (int i = 0; i < opt.shift_draws; ++i)
            {
                SelectionVector s(k_users);
                for (int k = 0; k < k_users; ++k)
                    s.set(k, rng.bit());
                const PrecoderSet pre = sys.precoders(s);
                const BeamGains g = beam_gains(sys.channel_matrix_h(), pre);
                const PowerAllocation p = random_probe_allocation(rng, k_users, sys.scenario().p_max_w, s.any());
                const auto rep = verify_probe_elimination(sys.scenario(), g, sys.bundle(), pre, s, p);
                worst_change = std::max(worst_change, rep.covariance_change);
                if (!rep.holds() || rep.crb_before != rep.crb_after)
                    ++failures;
            }
            return {"probe_elimination", failures == 0,
                    std::to_string(opt.shift_draws - failures) + "/" + std::to_string(opt.shift_draws) +
                        " draws hold; max ||dR||_F = " + sci(worst_change)};
        }

        inline CheckResult check_outer_loop(const TrialSystem &sys, const ValidationOptions &opt)
        {
            Rng rng(stream_seed(opt.seed, 5));
            const int k_users = sys.k_users();
            std::vector<SelectionVector> selections{SelectionVector(k_users, false), SelectionVector(k_users, true)};
            for (int i = 0; i < 3; ++i)
            {
                SelectionVector s(k_users);
                for (int k = 0; k < k_users; ++k)
                    s.set(k, rng.bit());
                selections.push_back(s);
            }
            int feasible = 0;
            std::string problem;
            for (const auto &s : selections)
            {
                const InnerProblem ip = sys.problem(s);
                const SolveOutcome o = optimize_powers(ip);
                if (!o.usable())
                    continue;
                ++feasible;
                for (std::size_t i = 1; i < o.history.size(); ++i)
                    if (o.history[i] > o.history[i - 1] * (1.0 + 1e-6))
                        problem = "objective increased for " + s.to_string();
                if (!o.powers.within_budget(ip.p_max * (1.0 + 1e-9)))
                    problem = "power budget exceeded for " + s.to_string();
                const RateReport rr = achievable_rates(ip.gains, o.powers, s, o.rate_alloc, ip.noise_w, ip.qos, 1e-6);
                if (!rr.feasible())
                    problem = "rate constraints violated for " + s.to_string();
                for (int k = 0; k < k_users; ++k)
                    if (!s[k] && o.rate_alloc.common_share(k) != 0.0)
                        problem = "non-member common share for " + s.to_string();
            }
            return {"outer_monotonicity", problem.empty(),
                    problem.empty() ? std::to_string(feasible) + "/" + std::to_string(selections.size()) +
                                          " selections feasible; histories non-increasing"
                                    : problem};
        }

        inline CheckResult check_selection(const TrialSystem &full, const ValidationOptions &opt)
        {
            const int k = std::min(full.k_users(), opt.selection_users);
            std::vector<PolarPosition> users(full.scenario().users.begin(), full.scenario().users.begin() + k);
            try
            {
                const TrialSystem sys(full.scenario(), users);
                const SelectionResult ex = exhaustive(sys);
                const SelectionResult sa = anneal(sys, stream_seed(opt.seed, 6));
                const double ve = ex.outcome.objective, va = sa.outcome.objective;
                const bool ok = va >= ve;
                return {"anneal_vs_exhaustive", ok,
                        "K=" + std::to_string(k) + " exhaustive " + sci(ve) + ", anneal " + sci(va) + " (gap " +
                            sci((va - ve) / ve) + ")"};
            }
            catch (const Error &e)
            {
                if (e.code() == ErrorCode::AllInfeasible)
                    return {"anneal_vs_exhaustive", true, "every selection infeasible; nothing to compare"};
                return {"anneal_vs_exhaustive", false, e.what()};
            }
        }

        inline CheckResult check_scale_laws(const TrialSystem &sys, const ValidationOptions &opt)
        {
            Rng rng(stream_seed(opt.seed, 7));
            const Scenario &sc = sys.scenario();
            const PrecoderSet pre = sys.precoders(SelectionVector(sys.k_users(), true));
            PowerAllocation p = PowerAllocation::zeros(sys.k_users());
            for (int i = 0; i <= sys.k_users(); ++i)
                p.comm(i) = rng.uniform(0.1, 1.0);
            const Eigen::MatrixXcd r = signal_covariance(pre, p);
            const double base = crb_for(sys.bundle(), r, sc.coherence_len, sc.noise_radar_w).trace;
            const double alpha = rng.uniform(0.5, 4.0);
            const double scaled = crb_for(sys.bundle(), alpha * r, sc.coherence_len, sc.noise_radar_w).trace;
            const double doubled = crb_for(sys.bundle(), r, 2 * sc.coherence_len, sc.noise_radar_w).trace;
            const double e1 = std::abs(scaled * alpha - base) / base, e2 = std::abs(doubled * 2.0 - base) / base;
            return {"crb_scale_laws", e1 <= 1e-10 && e2 <= 1e-10,
                    "power scaling error " + sci(e1) + ", coherence doubling error " + sci(e2)};
        }
    } // namespace detail

    inline ValidationReport validate(const Scenario &scenario, const ValidationOptions &opt = {})
    {
        Scenario sc = scenario;
        validate_scenario(sc);
        ValidationReport rep;
        rep.checks.push_back(detail::check_jacobian(sc, opt));
        rep.checks.push_back(detail::check_fim(sc, opt));
        rep.checks.push_back(detail::check_transform(opt));
        try
        {
            const TrialSystem sys(sc);
            rep.checks.push_back(detail::check_probe_shift(sys, opt));
            rep.checks.push_back(detail::check_outer_loop(sys, opt));
            rep.checks.push_back(detail::check_scale_laws(sys, opt));
            if (opt.include_selection)
                rep.checks.push_back(detail::check_selection(sys, opt));
        }
        catch (const Error &e)
        {
            rep.checks.push_back({"trial_system", false, e.what()});
        }
        return rep;
    }
} // namespace nfrsma

#endif

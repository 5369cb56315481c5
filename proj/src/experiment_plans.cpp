// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0

#include "experiment_plans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "memlab/csv.hpp"
#include "memlab/diagnostics.hpp"
#include "memlab/diffusion.hpp"
#include "memlab/error.hpp"
#include "memlab/estimators.hpp"
#include "memlab/genchain.hpp"
#include "memlab/measure.hpp"

namespace memlab::detail {

namespace {

using Summary = std::vector<std::pair<std::string, std::string>>;

std::string fmt(double v) { return format_double(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

bool non_increasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[i - 1]) return false;
    return true;
}

std::string list_text(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s + "]";
}

// Catches library validation errors raised while resolving parameters.
template <typename Fn>
void check(ParamReader& r, const std::string& key, Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        r.error(key, e.what());
    }
}

GenChainConfig genchain_from(ParamReader& r, bool with_steps) {
    GenChainConfig g;
    const auto w = r.numbers("mu0", std::vector<double>{0.7, 0.3});
    g.a = r.number("a", 0.0);
    g.samples_per_generation = static_cast<std::size_t>(r.count("N", 10));
    if (with_steps) {
        g.max_steps = static_cast<std::size_t>(r.count("max_steps", 100000));
        g.dirac_tol = r.number("dirac_tol", 1e-9);
    }
    g.record_entropy = false;
    check(r, "mu0", [&] {
        if (!w.empty()) g.mu0 = new_measure(w);
    });
    check(r, "a", [&] { g.validate(); });
    return g;
}

}  // namespace

Plan plan_collapse(ParamReader& r, ValidationReport&) {
    GenChainConfig g = genchain_from(r, true);
    const auto runs = static_cast<std::size_t>(r.count("runs", 1000));
    const double floor = r.number("entropy_floor", 0.1);
    if (runs == 0) r.error("runs", "must be >= 1");
    if (!r.ok()) return {};
    return {[=](std::uint64_t seed, std::size_t workers) {
        std::vector<AbsorptionReport> reports(runs);
        parallel_for(runs, workers, [&](std::size_t i) {
            Stream rng(derive_seed(seed, i));
            reports[i] = run_until_absorbed(g, rng);
        });
        const std::size_t k = g.mu0.support_size();
        CsvTable runs_csv({"run_id", "absorbed", "absorbing_index", "steps", "final_entropy"});
        std::size_t absorbed = 0, above_floor = 0;
        std::vector<std::size_t> hits(k, 0);
        double steps_sum = 0.0, tail_sum = 0.0;
        for (std::size_t i = 0; i < runs; ++i) {
            const auto& rep = reports[i];
            if (rep.absorbed) {
                ++absorbed;
                ++hits[*rep.absorbing_index];
                steps_sum += static_cast<double>(*rep.steps_to_absorb);
            }
            tail_sum += rep.mean_entropy_tail;
            if (rep.mean_entropy_tail > floor) ++above_floor;
            runs_csv.add_row({std::to_string(i), fmt(rep.absorbed),
                              rep.absorbing_index ? std::to_string(*rep.absorbing_index) : "",
                              std::to_string(rep.steps), fmt(entropy(rep.final_measure))});
        }
        Outputs out;
        out.files.emplace_back("runs.csv", runs_csv.str());
        const auto n = static_cast<double>(runs);
        out.summary.emplace_back("runs", std::to_string(runs));
        out.summary.emplace_back("absorbed_fraction", fmt(static_cast<double>(absorbed) / n));
        for (std::size_t i = 0; i < k; ++i) {
            out.summary.emplace_back("absorbing_index_" + std::to_string(i) + "_frequency",
                                     fmt(static_cast<double>(hits[i]) / n));
        }
        out.summary.emplace_back("mean_steps_to_absorb",
                                 absorbed ? fmt(steps_sum / static_cast<double>(absorbed)) : "n/a");
        out.summary.emplace_back("mean_tail_entropy", fmt(tail_sum / n));
        out.summary.emplace_back("fraction_tail_entropy_above_floor", fmt(static_cast<double>(above_floor) / n));
        if (g.a == 0.0) {
            try {
                const DiscreteMeasure oracle = absorption_oracle(g);
                CsvTable oc({"index", "probability"});
                for (std::size_t i = 0; i < k; ++i) {
                    oc.add_row({std::to_string(i), fmt(oracle[i])});
                    out.summary.emplace_back("oracle_index_" + std::to_string(i) + "_probability", fmt(oracle[i]));
                }
                out.files.emplace_back("oracle.csv", oc.str());
            } catch (const Error& e) {
                out.summary.emplace_back("oracle", std::string("unavailable (") + e.what() + ")");
            }
        }
        return out;
    }};
}

Plan plan_barycenter(ParamReader& r, ValidationReport&) {
    GenChainConfig g = genchain_from(r, false);
    const auto states = static_cast<std::size_t>(r.count("states", 5));
    const auto reps = static_cast<std::size_t>(r.count("replications", 100000));
    if (reps < 1000) r.error("replications", "must be >= 1000");
    if (!r.ok()) return {};
    return {[=](std::uint64_t seed, std::size_t workers) {
        const std::size_t k = g.mu0.support_size();
        std::vector<std::vector<double>> weights(states);
        std::vector<double> dev(states);
        parallel_for(states, workers, [&](std::size_t i) {
            Stream rng(derive_seed(seed, i));
            std::vector<double> w(k);
            for (double& v : w) v = rng.uniform();
            const DiscreteMeasure mu = new_measure(w);
            weights[i].assign(mu.weights().begin(), mu.weights().end());
            dev[i] = check_barycenter(mu, g, reps, rng);
        });
        const double bound = 4.0 * std::sqrt(0.25 / (static_cast<double>(g.samples_per_generation) *
                                                     static_cast<double>(reps)));
        std::vector<std::string> header{"state_id", "deviation", "bound"};
        for (std::size_t j = 0; j < k; ++j) header.push_back("w" + std::to_string(j));
        CsvTable t(header);
        for (std::size_t i = 0; i < states; ++i) {
            std::vector<std::string> row{std::to_string(i), fmt(dev[i]), fmt(bound)};
            for (double v : weights[i]) row.push_back(fmt(v));
            t.add_row(row);
        }
        Outputs out;
        out.files.emplace_back("states.csv", t.str());
        const double worst = dev.empty() ? 0.0 : *std::max_element(dev.begin(), dev.end());
        out.summary.emplace_back("states", std::to_string(states));
        out.summary.emplace_back("max_deviation", fmt(worst));
        out.summary.emplace_back("bound", fmt(bound));
        out.summary.emplace_back("within_bound", fmt(worst < bound));
        return out;
    }};
}

Plan plan_two_scale(ParamReader& r, ValidationReport& report) {
    LandscapePtr L = landscape_from(r.child("landscape"));
    ChainPtr C = chain_from(r.child("chain"));
    const StepSchedule sched = schedule_from(r.child("schedule"));
    const SgdMode mode = mode_from(r.text("mode", std::string("instantaneous")), r, "mode");
    const auto x0 = r.numbers("x0");
    const auto y0 = r.numbers("y0", std::vector<double>{});
    const std::uint64_t n_steps = r.count("n_steps");
    RunOptions opts;
    opts.thin = static_cast<std::size_t>(r.count("thin", 1000));
    opts.record_loss = r.flag("record_loss", true);
    opts.initial_noise_state = static_cast<std::size_t>(r.count("initial_noise_state", 0));
    const auto runs = static_cast<std::size_t>(r.count("runs", 1));
    const bool with_ode = r.has("ode");
    ParamReader ode = r.child("ode", true);
    const double default_ratio = sched.kind == StepSchedule::Kind::Constant ? sched.epsilon : sched.c_b / sched.c_a;
    const double ode_T = with_ode ? ode.number("T") : 0.0;
    const double ode_dt = with_ode ? ode.number("dt") : 0.0;
    const double ode_eps = with_ode ? ode.number("epsilon", default_ratio) : 0.0;
    if (with_ode) ode.finish();

    for (const auto& reason : validate_schedule(sched).reasons) report.warnings.push_back("params.schedule: " + reason);
    if (n_steps == 0) r.error("n_steps", "must be >= 1");
    if (opts.thin == 0) r.error("thin", "must be >= 1");
    if (L && x0.size() != L->dim_x()) r.error("x0", "expected " + std::to_string(L->dim_x()) + " values");
    if (L && y0.size() != L->dim_y()) r.error("y0", "expected " + std::to_string(L->dim_y()) + " values");
    if (L && C && L->noise_arity() != 1 && L->noise_arity() != C->n_states()) {
        r.error("chain", "chain has " + std::to_string(C->n_states()) + " states, landscape expects " +
                             std::to_string(L->noise_arity()));
    }
    if (L && with_ode && !(ode_dt > 0.0 && ode_dt <= 0.01 / L->curvature_bound())) {
        ode.error("dt", "must lie in (0, " + fmt(0.01 / L->curvature_bound()) + "]");
    }
    if (!r.ok()) return {};
    return {[=](std::uint64_t seed, std::size_t workers) {
        std::vector<TrajectoryRecord> recs(runs);
        parallel_for(runs, workers, [&](std::size_t i) {
            recs[i] = run(L, C, sched, mode, x0, y0, n_steps, derive_seed(seed, i), opts);
        });
        Outputs out;
        const double a_final = sched.fast(n_steps - 1);
        std::vector<std::string> header{"run_id", "final_n", "final_step", "median_last_decade_error", "error_over_step"};
        for (std::size_t i = 0; i < L->dim_x(); ++i) header.push_back("x" + std::to_string(i));
        for (std::size_t j = 0; j < L->dim_y(); ++j) header.push_back("y" + std::to_string(j));
        CsvTable tracking(header);
        std::vector<double> medians;
        for (std::size_t i = 0; i < runs; ++i) {
            const auto& rec = recs[i];
            out.files.emplace_back("run_" + std::to_string(i) + ".csv", rec.to_csv());
            double med = std::numeric_limits<double>::quiet_NaN();
            if (L->branch_count() > 0) {
                const TrackingResult tr = tracking_error(rec, *L);
                std::vector<double> tail;
                for (std::size_t k = 0; k < rec.size(); ++k)
                    if (rec.n[k] * 10 >= n_steps) tail.push_back(tr.error[k]);
                med = median(tail);
            }
            medians.push_back(med);
            const std::size_t last = rec.size() - 1;
            std::vector<std::string> row{std::to_string(i), std::to_string(rec.n[last]), fmt(a_final), fmt(med),
                                         fmt(med / a_final)};
            for (std::size_t d = 0; d < rec.dim_x; ++d) row.push_back(fmt(rec.x_at(last, d)));
            for (std::size_t d = 0; d < rec.dim_y; ++d) row.push_back(fmt(rec.y_at(last, d)));
            tracking.add_row(row);
        }
        out.files.emplace_back("tracking.csv", tracking.str());
        out.summary.emplace_back("runs", std::to_string(runs));
        out.summary.emplace_back("mode", std::string(mode_name(mode)));
        out.summary.emplace_back("schedule", sched.describe());
        out.summary.emplace_back("final_step", fmt(a_final));
        out.summary.emplace_back("median_last_decade_tracking_error", fmt(median(medians)));
        if (with_ode) {
            const auto steps = static_cast<std::size_t>(std::llround(ode_T / ode_dt));
            const OdeTrajectory traj =
                ode_flow(L, C, x0, y0, ode_eps, ode_T, ode_dt, GradMode::Full, std::max<std::size_t>(1, steps / 1000));
            std::vector<std::string> oh{"t"};
            for (std::size_t i = 0; i < traj.dim_x; ++i) oh.push_back("x" + std::to_string(i));
            for (std::size_t j = 0; j < traj.dim_y; ++j) oh.push_back("y" + std::to_string(j));
            CsvTable ot(oh);
            for (std::size_t k = 0; k < traj.size(); ++k) {
                std::vector<std::string> row{fmt(traj.t[k])};
                for (std::size_t i = 0; i < traj.dim_x; ++i) row.push_back(fmt(traj.x_at(k, i)));
                for (std::size_t j = 0; j < traj.dim_y; ++j) row.push_back(fmt(traj.y_at(k, j)));
                ot.add_row(row);
            }
            out.files.emplace_back("ode.csv", ot.str());
            const std::size_t e = traj.size() - 1;
            double gap = 0.0;
            const auto& rec = recs[0];
            const std::size_t last = rec.size() - 1;
            for (std::size_t i = 0; i < traj.dim_x; ++i)
                gap = std::max(gap, std::abs(traj.x_at(e, i) - rec.x_at(last, i)));
            for (std::size_t j = 0; j < traj.dim_y; ++j)
                gap = std::max(gap, std::abs(traj.y_at(e, j) - rec.y_at(last, j)));
            out.summary.emplace_back("ode_epsilon", fmt(ode_eps));
            out.summary.emplace_back("ode_endpoint_gap_run0", fmt(gap));
        }
        return out;
    }};
}

Plan plan_hwang(ParamReader& r, ValidationReport&) {
    LandscapePtr L = landscape_from(r.child("landscape"));
    const double a = r.number("a", 0.005);
    const double sigma = r.number("sigma", 1.0);
    const std::uint64_t n_steps = r.count("n_steps", 10000000);
    const auto thin = static_cast<std::size_t>(r.count("thin", 10));
    const auto runs = static_cast<std::size_t>(r.count("runs", 10));
    const std::string region_kind = r.text("regions", std::string("basins"));
    const double temperature = r.number("quadrature_temperature", a * sigma * sigma / 2.0);
    const auto qpoints = static_cast<std::size_t>(r.count("quadrature_points", 400000));
    std::vector<double> x0 = r.numbers("x0", std::vector<double>{});
    std::vector<Region> regions;
    if (L) {
        if (L->dim_y() != 0 || L->dim_x() != 1) r.error("landscape", "needs a 1-D x-only landscape");
        if (L->minima().empty()) r.error("landscape", "needs minima metadata");
        if (x0.empty() && !L->minima().empty()) x0 = L->minima().front().location;
        if (region_kind == "basins") {
            regions = basin_regions_1d(L->saddles());
        } else if (region_kind == "balls") {
            std::vector<std::vector<double>> centers;
            for (const auto& m : L->minima()) centers.push_back(m.location);
            regions = default_regions(centers);
        } else {
            r.error("regions", "expected 'basins' or 'balls'");
        }
    }
    if (!(a > 0.0)) r.error("a", "must be positive");
    if (thin == 0) r.error("thin", "must be >= 1");
    if (!r.ok()) return {};
    return {[=](std::uint64_t seed, std::size_t workers) {
        const std::size_t R = regions.size();
        std::vector<std::vector<double>> fractions(runs);
        std::vector<std::uint64_t> switches(runs);
        parallel_for(runs, workers, [&](std::size_t i) {
            const TrajectoryRecord rec = single_scale_run(L, a, sigma, x0, n_steps, derive_seed(seed, i), thin);
            fractions[i] = occupation_measure(rec, regions).visit_fraction;
            switches[i] = transition_stats(rec, regions).switch_count;
        });
        std::vector<std::string> header{"run_id"};
        for (std::size_t j = 0; j < R; ++j) header.push_back("fraction_" + std::to_string(j));
        header.push_back("switches");
        CsvTable runs_csv(header);
        for (std::size_t i = 0; i < runs; ++i) {
            std::vector<std::string> row{std::to_string(i)};
            for (double f : fractions[i]) row.push_back(fmt(f));
            row.push_back(std::to_string(switches[i]));
            runs_csv.add_row(row);
        }
        std::vector<std::vector<double>> eig;
        for (const auto& m : L->minima()) eig.push_back(m.hessian_eigenvalues);
        const std::vector<double> weights = hwang_weights(eig);
        const Box box = L->sample_box();
        const std::vector<double> mass = gibbs_quadrature_1d(*L, temperature, box.lo_x[0], box.hi_x[0], qpoints, regions);
        CsvTable pred({"region", "location", "hwang_weight", "quadrature_mass", "median_fraction"});
        Outputs out;
        for (std::size_t j = 0; j < R; ++j) {
            std::vector<double> col;
            for (const auto& f : fractions) col.push_back(f[j]);
            const double med = median(col);
            const double loc = j < L->minima().size() ? L->minima()[j].location[0] : 0.0;
            const double w = j < weights.size() ? weights[j] : 0.0;
            pred.add_row({std::to_string(j), fmt(loc), fmt(w), fmt(mass[j]), fmt(med)});
            out.summary.emplace_back("median_fraction_" + std::to_string(j), fmt(med));
            out.summary.emplace_back("hwang_weight_" + std::to_string(j), fmt(w));
            out.summary.emplace_back("quadrature_mass_" + std::to_string(j), fmt(mass[j]));
        }
        std::vector<double> sw(switches.begin(), switches.end());
        out.summary.emplace_back("median_switches", fmt(median(sw)));
        out.summary.emplace_back("quadrature_temperature", fmt(temperature));
        out.files.emplace_back("runs.csv", runs_csv.str());
        out.files.emplace_back("prediction.csv", pred.str());
        return out;
    }};
}

namespace {

struct MemoUnit {
    std::string sweep;
    double a = 0.0, epsilon = 0.0;
    std::size_t seed_index = 0;
};

struct MemoResult {
    std::vector<MemorizationEvent> events;
    std::size_t distinct = 0;
    double mean_length = 0.0;  // steps
    double fraction = 0.0;
    double switches_per_million = 0.0;
};

}  // namespace

Plan plan_memorize(ParamReader& r, ValidationReport&) {
    LandscapePtr L = landscape_from(r.child("landscape"));
    ChainPtr C = chain_from(r.child("chain"));
    const double a = r.number("a", 0.01);
    const std::uint64_t n_steps = r.count("n_steps", 1000000);
    const auto thin = static_cast<std::size_t>(r.count("thin", 10));
    const double tol = r.number("tol", 0.2);
    const auto min_len = static_cast<std::size_t>(r.count("min_len", 100));
    const auto seeds = static_cast<std::size_t>(r.count("seeds", 20));
    const auto x0 = r.numbers("x0", std::vector<double>{1.0});
    const auto y0 = r.numbers("y0", std::vector<double>{0.0});
    const auto eps_sweep = r.numbers("epsilon_sweep", std::vector<double>{0.01, 0.03, 0.1});
    const auto step_sweep = r.numbers("step_sweep", std::vector<double>{0.005, 0.02, 0.08});
    const double ratio = r.number("step_ratio", 2.0);
    const auto centers = r.numbers("switch_centers", std::vector<double>{-1.0, 1.0});
    const double radius = r.number("switch_radius", 0.5);
    if (L && L->branch_count() == 0) r.error("landscape", "needs branch metadata");
    if (L && (x0.size() != L->dim_x() || y0.size() != L->dim_y())) r.error("x0", "dimension mismatch");
    if (L && C && L->noise_arity() != 1 && L->noise_arity() != C->n_states()) r.error("chain", "noise arity mismatch");
    if (!(tol > 0.0)) r.error("tol", "must be positive");
    if (min_len < 2) r.error("min_len", "must be >= 2");
    if (thin == 0) r.error("thin", "must be >= 1");
    for (double e : eps_sweep)
        if (!(e > 0.0 && e < 0.5)) r.error("epsilon_sweep", "values must lie in (0, 0.5)");
    for (double s : step_sweep)
        if (!(s > 0.0 && ratio * s > 0.0 && ratio * s < 0.5)) r.error("step_sweep", "step_ratio * a must lie in (0, 0.5)");
    if (!r.ok()) return {};
    return {[=](std::uint64_t seed, std::size_t workers) {
        std::vector<MemoUnit> units;
        for (std::size_t s = 0; s < seeds; ++s) units.push_back({"reference", a, L->epsilon(), s});
        for (double e : eps_sweep)
            for (std::size_t s = 0; s < seeds; ++s) units.push_back({"epsilon", a, e, s});
        for (double st : step_sweep)
            for (std::size_t s = 0; s < seeds; ++s) units.push_back({"step", st, ratio * st, s});
        std::vector<Region> regions;
        for (double c : centers) regions.push_back(Region{{c}, radius, std::nullopt});
        std::vector<MemoResult> res(units.size());
        RunOptions opts;
        opts.thin = thin;
        opts.record_loss = false;
        parallel_for(units.size(), workers, [&](std::size_t u) {
            const MemoUnit& unit = units[u];
            const LandscapePtr Lu = L->with_epsilon(unit.epsilon);
            const TrajectoryRecord rec = run(Lu, C, StepSchedule::constant(unit.a, unit.epsilon),
                                             SgdMode::Instantaneous, x0, y0, n_steps, derive_seed(seed, u), opts);
            MemoResult& m = res[u];
            m.events = detect_memorization(rec, *Lu, tol, min_len);
            std::set<std::size_t> br;
            double len = 0.0;
            for (const auto& e : m.events) {
                br.insert(e.branch_index);
                len += static_cast<double>(e.records * thin);
            }
            m.distinct = br.size();
            m.mean_length = m.events.empty() ? 0.0 : len / static_cast<double>(m.events.size());
            m.fraction = memorized_fraction(m.events, rec.size());
            m.switches_per_million = transition_stats(rec, regions).switches_per_million;
        });

        CsvTable events_csv({"run_id", "branch", "start_n", "end_n", "records", "mean_tracking_error", "y_drift"});
        CsvTable sweep_csv({"sweep", "a", "epsilon", "seed_index", "events", "distinct_branches", "mean_event_length",
                            "memorized_fraction", "switches_per_million"});
        std::vector<double> ref_counts, ref_switches;
        std::set<std::size_t> ref_branches;
        for (std::size_t u = 0; u < units.size(); ++u) {
            const auto& unit = units[u];
            const auto& m = res[u];
            sweep_csv.add_row({unit.sweep, fmt(unit.a), fmt(unit.epsilon), std::to_string(unit.seed_index),
                               std::to_string(m.events.size()), std::to_string(m.distinct), fmt(m.mean_length),
                               fmt(m.fraction), fmt(m.switches_per_million)});
            if (unit.sweep != "reference") continue;
            ref_counts.push_back(static_cast<double>(m.events.size()));
            ref_switches.push_back(m.switches_per_million);
            for (const auto& e : m.events) {
                ref_branches.insert(e.branch_index);
                events_csv.add_row({std::to_string(u), std::to_string(e.branch_index), std::to_string(e.start_n),
                                    std::to_string(e.end_n), std::to_string(e.records), fmt(e.mean_tracking_error),
                                    fmt(e.y_drift)});
            }
        }
        auto medians_for = [&](const std::string& sweep, const std::vector<double>& values, auto field) {
            std::vector<double> out;
            for (double v : values) {
                std::vector<double> col;
                for (std::size_t u = 0; u < units.size(); ++u) {
                    const double key = sweep == "epsilon" ? units[u].epsilon : units[u].a;
                    if (units[u].sweep == sweep && key == v) col.push_back(field(res[u]));
                }
                out.push_back(median(col));
            }
            return out;
        };
        const auto eps_len = medians_for("epsilon", eps_sweep, [](const MemoResult& m) { return m.mean_length; });
        const auto step_frac = medians_for("step", step_sweep, [](const MemoResult& m) { return m.fraction; });
        Outputs out;
        out.files.emplace_back("events.csv", events_csv.str());
        out.files.emplace_back("sweep.csv", sweep_csv.str());
        out.summary.emplace_back("reference_median_events", fmt(median(ref_counts)));
        out.summary.emplace_back("reference_distinct_branches", std::to_string(ref_branches.size()));
        out.summary.emplace_back("reference_median_switches_per_million", fmt(median(ref_switches)));
        out.summary.emplace_back("epsilon_values", list_text(eps_sweep));
        out.summary.emplace_back("median_event_length_by_epsilon", list_text(eps_len));
        out.summary.emplace_back("epsilon_monotone", fmt(non_increasing(eps_len)));
        out.summary.emplace_back("step_values", list_text(step_sweep));
        out.summary.emplace_back("median_memorized_fraction_by_step", list_text(step_frac));
        out.summary.emplace_back("step_monotone", fmt(non_increasing(step_frac)));
        return out;
    }};
}

Plan plan_estimator_bias(ParamReader& r, ValidationReport&) {
    const std::string kind_name = r.text("kind", std::string("gaussian"));
    LandscapePtr L = landscape_from(r.child("landscape"));
    ChainPtr C = chain_from(r.child("chain"));
    const auto x = r.numbers("x");
    const auto y = r.numbers("y", std::vector<double>{});
    const auto deltas = r.numbers("deltas", std::vector<double>{0.2, 0.1, 0.05});
    const auto samples = static_cast<std::size_t>(r.count("samples", 100000));
    const double clip = r.number("clip_norm", std::numeric_limits<double>::infinity());
    const auto batches = r.numbers("batch_sizes", std::vector<double>{1, 10, 100});
    const auto reps = static_cast<std::size_t>(r.count("replications", 2000));
    const double vdelta = r.number("variance_delta", 0.1);
    EstimatorKind kind = EstimatorKind::SmoothedGaussian;
    if (kind_name == "spsa") {
        kind = EstimatorKind::SpsaRademacher;
    } else if (kind_name != "gaussian") {
        r.error("kind", "expected 'gaussian' or 'spsa'");
    }
    if (L && (x.size() != L->dim_x() || y.size() != L->dim_y())) r.error("x", "dimension mismatch");
    if (L && C && L->noise_arity() != 1 && L->noise_arity() != C->n_states()) r.error("chain", "noise arity mismatch");
    for (double d : deltas)
        if (!(d > 0.0 && d < 1.0)) r.error("deltas", "values must lie in (0, 1)");
    for (double m : batches)
        if (!(m >= 1.0) || m != std::floor(m)) r.error("batch_sizes", "values must be positive integers");
    if (samples < 2) r.error("samples", "must be >= 2");
    if (reps < 2) r.error("replications", "must be >= 2");
    if (!(vdelta > 0.0 && vdelta < 1.0)) r.error("variance_delta", "must lie in (0, 1)");
    if (!r.ok()) return {};
    return {[=](std::uint64_t seed, std::size_t workers) {
        Stream rng(derive_seed(seed, 0));
        const BiasCurve curve = bias_curve(kind, *L, *C, x, y, deltas, samples, rng, clip);
        std::vector<double> var_m(batches.size());
        parallel_for(batches.size(), workers, [&](std::size_t mi) {
            Stream sub(derive_seed(seed, 1 + mi));
            EstimatorConfig cfg{kind, vdelta, clip, static_cast<std::size_t>(batches[mi])};
            const std::size_t s = L->dim_x();
            std::vector<double> mean(s, 0.0), m2(s, 0.0);
            std::size_t state = 0;
            for (std::size_t k = 0; k < reps; ++k) {
                const Estimate e = averaged_estimate(*L, *C, x, y, cfg, state, sub);
                state = e.noise_state;
                for (std::size_t i = 0; i < s; ++i) {
                    const double d = e.gradient[i] - mean[i];
                    mean[i] += d / static_cast<double>(k + 1);
                    m2[i] += d * (e.gradient[i] - mean[i]);
                }
            }
            double v = 0.0;
            for (double q : m2) v += q / static_cast<double>(reps - 1);
            var_m[mi] = v;
        });
        const double m_slope = batches.size() >= 2 ? loglog_slope(batches, var_m) : 0.0;
        std::vector<double> ds, vs;
        for (const auto& p : curve.points) {
            ds.push_back(p.delta);
            vs.push_back(p.variance);
        }
        const double delta_var_slope = ds.size() >= 2 ? loglog_slope(ds, vs) : 0.0;
        CsvTable bias({"delta", "bias_norm", "variance", "slope"});
        Outputs out;
        for (const auto& p : curve.points) {
            bias.add_row({fmt(p.delta), fmt(p.bias_norm), fmt(p.variance), fmt(curve.slope)});
            out.summary.emplace_back("bias_se_delta_" + fmt(p.delta), fmt(p.bias_se));
        }
        CsvTable batch({"m", "variance", "slope"});
        for (std::size_t i = 0; i < batches.size(); ++i) batch.add_row({fmt(batches[i]), fmt(var_m[i]), fmt(m_slope)});
        out.files.emplace_back("bias.csv", bias.str());
        out.files.emplace_back("batch.csv", batch.str());
        out.summary.emplace_back("bias_slope", fmt(curve.slope));
        out.summary.emplace_back("variance_delta_slope", fmt(delta_var_slope));
        out.summary.emplace_back("variance_batch_slope", fmt(m_slope));
        return out;
    }};
}

Plan plan_diffusion(ParamReader& r, ValidationReport&) {
    OUParams p;
    p.upsilon = r.number("upsilon", 1.0);
    p.horizon = r.number("horizon", 1.0);
    p.dt = r.number("dt", 1e-3);
    p.data_mean = r.number("data_mean", 0.0);
    p.data_var = r.number("data_var", 0.25);
    const auto knots = r.numbers("knots", std::vector<double>{0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0});
    const double a = r.number("a", 0.01);
    const auto batch = static_cast<std::size_t>(r.count("batch", 64));
    const std::uint64_t iters = r.count("iterations", 10000);
    const auto samples = static_cast<std::size_t>(r.count("samples", 100000));
    const auto chunks = static_cast<std::size_t>(r.count("chunks", 16));
    check(r, "dt", [&] { p.validate(); });
    check(r, "knots", [&] { (void)ScoreModel::zeros(knots); });
    if (!(a > 0.0)) r.error("a", "must be positive");
    if (batch == 0) r.error("batch", "must be >= 1");
    if (chunks == 0 || samples < chunks) r.error("chunks", "need 1 <= chunks <= samples");
    if (!r.ok()) return {};
    return {[=](std::uint64_t seed, std::size_t workers) {
        Stream train_rng(derive_seed(seed, 0));
        const TrainingResult tr =
            score_training_run(p, ScoreModel::zeros(knots), StepSchedule::constant(a, 0.5), iters, batch, train_rng);
        CsvTable loss({"iteration", "loss"});
        for (std::size_t i = 0; i < tr.loss_trace.size(); ++i) loss.add_row({std::to_string(i), fmt(tr.loss_trace[i])});
        CsvTable coef({"knot", "slope", "intercept", "true_slope", "true_intercept", "relative_slope_error"});
        double worst = 0.0;
        for (std::size_t k = 0; k < knots.size(); ++k) {
            const Gaussian1D m = ou_marginal(p, knots[k]);
            const double ts = -1.0 / m.var, ti = m.mean / m.var;
            const double rel = std::abs(tr.model.slope()[k] - ts) / std::abs(ts);
            worst = std::max(worst, rel);
            coef.add_row({fmt(knots[k]), fmt(tr.model.slope()[k]), fmt(tr.model.intercept()[k]), fmt(ts), fmt(ti),
                          fmt(rel)});
        }
        const Gaussian1D end = ou_marginal(p, p.horizon);
        const ScoreModel model = tr.model;
        const ScoreFn score = [model](double x, double t) { return model(x, t); };
        std::vector<double> sums(chunks), sqs(chunks);
        parallel_for(chunks, workers, [&](std::size_t c) {
            Stream rng(derive_seed(seed, 1000 + c));
            const std::size_t count = samples / chunks + (c < samples % chunks ? 1 : 0);
            double s = 0.0, q = 0.0;
            for (std::size_t i = 0; i < count; ++i) {
                const double xT = end.mean + std::sqrt(end.var) * rng.normal();
                const double v = reverse_sample(p, score, xT, rng);
                s += v;
                q += v * v;
            }
            sums[c] = s;
            sqs[c] = q;
        });
        double s = 0.0, q = 0.0;
        for (std::size_t c = 0; c < chunks; ++c) {
            s += sums[c];
            q += sqs[c];
        }
        const auto n = static_cast<double>(samples);
        const double mean = s / n;
        const double var = (q - n * mean * mean) / (n - 1.0);
        CsvTable gen({"mean", "var", "target_mean", "target_var", "n"});
        gen.add_row({fmt(mean), fmt(var), fmt(p.data_mean), fmt(p.data_var), std::to_string(samples)});
        Outputs out;
        out.files.emplace_back("loss.csv", loss.str());
        out.files.emplace_back("coefficients.csv", coef.str());
        out.files.emplace_back("samples.csv", gen.str());
        out.summary.emplace_back("max_relative_slope_error", fmt(worst));
        out.summary.emplace_back("generated_mean", fmt(mean));
        out.summary.emplace_back("generated_var", fmt(var));
        out.summary.emplace_back("data_mean", fmt(p.data_mean));
        out.summary.emplace_back("data_var", fmt(p.data_var));
        return out;
    }};
}

}  // namespace memlab::detail

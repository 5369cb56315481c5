// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run: one PASS/FAIL line per criterion. Tolerances and runtime
// budgets are fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "memlab/config.hpp"
#include "memlab/diagnostics.hpp"
#include "memlab/diffusion.hpp"
#include "memlab/error.hpp"
#include "memlab/estimators.hpp"
#include "memlab/experiments.hpp"
#include "memlab/genchain.hpp"
#include "memlab/landscape.hpp"
#include "memlab/noise.hpp"
#include "memlab/sgd.hpp"

using namespace memlab;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kRoot = 20260415;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---- 1. collapse --------------------------------------------------------

Outcome collapse() {
    GenChainConfig cfg;
    const std::vector<double> w{0.7, 0.3};
    cfg.mu0 = new_measure(w);
    cfg.samples_per_generation = 10;
    cfg.max_steps = 100000;
    cfg.record_entropy = false;
    const int runs = 1000;
    int absorbed = 0, ones = 0;
    for (int i = 0; i < runs; ++i) {
        Stream rng(derive_seed(kRoot + 1, i));
        const auto rep = run_until_absorbed(cfg, rng);
        absorbed += rep.absorbed;
        ones += rep.absorbed && *rep.absorbing_index == 1;
    }
    const double freq = ones / static_cast<double>(runs);
    const double oracle = absorption_oracle(cfg)[1];
    const bool ok = absorbed == runs && std::abs(freq - 0.3) <= 0.043 && std::abs(oracle - 0.3) <= 1e-10;
    return {ok, "absorbed " + std::to_string(absorbed) + "/1000, index-1 freq " + num(freq) + " (0.3 +- 0.043), oracle " +
                    num(oracle) + " |err| " + num(std::abs(oracle - 0.3))};
}

// ---- 2. barycenter ------------------------------------------------------

Outcome barycenter() {
    GenChainConfig cfg;
    cfg.samples_per_generation = 10;
    const std::size_t reps = 100000;
    const double bound = 4.0 * std::sqrt(0.25 / (10.0 * reps));
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 5; ++s) {
        Stream rng(derive_seed(kRoot + 2, s));
        std::vector<double> w(3);
        for (double& v : w) v = rng.uniform();
        cfg.mu0 = new_measure(w);
        worst = std::max(worst, check_barycenter(cfg.mu0, cfg, reps, rng));
    }
    return {worst < bound, "max deviation " + num(worst) + " < bound " + num(bound)};
}

// ---- 3. degeneration ----------------------------------------------------

Outcome degeneration() {
    GenChainConfig cfg;
    const std::vector<double> w{0.7, 0.3};
    cfg.mu0 = new_measure(w);
    cfg.a = 0.2;
    cfg.max_steps = 10000;
    cfg.record_entropy = false;
    int absorbed = 0, high = 0;
    for (int i = 0; i < 1000; ++i) {
        Stream rng(derive_seed(kRoot + 3, i));
        const auto rep = run_until_absorbed(cfg, rng);
        absorbed += rep.absorbed;
        high += rep.mean_entropy_tail > 0.1;
    }
    const bool ok = absorbed < 10 && high >= 950;
    return {ok, "absorbed " + std::to_string(absorbed) + "/1000 (< 10), tail entropy > 0.1 in " + std::to_string(high) +
                    "/1000 (>= 950)"};
}

// ---- 4. two-time-scale tracking -----------------------------------------

Outcome tracking() {
    const auto L = make_quadratic_tracking({1.0, 0.05, 0.0, 0.0});
    const auto C = make_flip_chain(0.3, 0.3);
    const auto s = StepSchedule::decreasing(0.5, 0.025, 1.0, 1.5);
    const std::uint64_t n = 1000000;
    RunOptions o;
    o.thin = 1000;
    o.record_loss = false;
    auto last_decade_median = [&](const TrajectoryRecord& rec) {
        const auto te = tracking_error(rec, *L);
        std::vector<double> tail;
        for (std::size_t k = 0; k < rec.size(); ++k)
            if (rec.n[k] * 10 >= n) tail.push_back(te.error[k]);
        return median(tail);
    };
    const auto rec = run(L, C, s, SgdMode::AveragedFull, {1.0}, {1.0}, n, kRoot + 4, o);
    const double a_final = s.fast(n - 1);
    const double err = last_decade_median(rec);
    const auto ode = ode_flow(L, C, {1.0}, {1.0}, s.c_b / s.c_a, 20.0, 0.001, GradMode::Full, 1000);
    const std::size_t e = ode.size() - 1, r = rec.size() - 1;
    const double gap = std::max(std::abs(ode.x_at(e) - rec.x_at(r)), std::abs(ode.y_at(e) - rec.y_at(r)));
    const auto inst = run(L, C, s, SgdMode::Instantaneous, {1.0}, {1.0}, n, kRoot + 4, o);
    const bool ok = err < 10.0 * a_final && gap < 1e-2;
    return {ok, "averaged_full median error " + num(err) + " < " + num(10 * a_final) + ", ode endpoint gap " + num(gap) +
                    " < 0.01; instantaneous median error " + num(last_decade_median(inst)) + " (information only)"};
}

// ---- 5/6. Hwang weights -------------------------------------------------

std::vector<double> median_fractions(const LandscapePtr& L, std::uint64_t seed) {
    const auto regions = basin_regions_1d(L->saddles());
    std::vector<std::vector<double>> f(regions.size());
    for (std::uint64_t r = 0; r < 10; ++r) {
        const auto rec = single_scale_run(L, 0.005, 1.0, L->minima().front().location, 10000000,
                                          derive_seed(seed, r), 10);
        const auto occ = occupation_measure(rec, regions);
        for (std::size_t j = 0; j < regions.size(); ++j) f[j].push_back(occ.visit_fraction[j]);
    }
    std::vector<double> out;
    for (auto& col : f) out.push_back(median(col));
    return out;
}

Outcome hwang() {
    const auto L = make_curvature_asymmetric_well();
    const auto m = median_fractions(L, kRoot + 5);
    const auto w = hwang_weights({{2.0}, {8.0}});
    const auto box = L->sample_box();
    const auto q = gibbs_quadrature_1d(*L, 0.005 / 2.0, box.lo_x[0], box.hi_x[0], 400000, basin_regions_1d(L->saddles()));
    const double qerr = std::max(std::abs(q[0] / w[0] - 1.0), std::abs(q[1] / w[1] - 1.0));
    const bool ok = std::abs(m[0] - 2.0 / 3.0) <= 0.05 && std::abs(m[1] - 1.0 / 3.0) <= 0.05 && qerr <= 0.03;
    return {ok, "median fractions (" + num(m[0]) + ", " + num(m[1]) + ") vs (2/3, 1/3) +- 0.05; quadrature (" +
                    num(q[0]) + ", " + num(q[1]) + ") relative error " + num(qerr) + " <= 0.03"};
}

Outcome symmetry() {
    const auto L = make_symmetric_double_well({0.005, std::sqrt(0.02)});
    const auto m = median_fractions(L, kRoot + 6);
    const bool ok = std::abs(m[0] - 0.5) <= 0.02 && std::abs(m[1] - 0.5) <= 0.02;
    return {ok, "median fractions (" + num(m[0]) + ", " + num(m[1]) + ") vs 0.5 +- 0.02"};
}

// ---- 7. memorization ----------------------------------------------------

Outcome memorization() {
    auto cfg = load_config(fs::path(MEMLAB_SOURCE_DIR) / "configs" / "memorize.yaml");
    const fs::path dir = fs::temp_directory_path() / "memlab_acceptance_memorize";
    fs::remove_all(dir);
    cfg.output_dir = dir.string();
    const auto res = run_experiment(cfg);
    fs::remove_all(dir);
    if (res.exit_code != kExitOk) return {false, "memorize experiment failed"};
    std::map<std::string, std::string> s(res.summary.begin(), res.summary.end());
    const double events = std::stod(s["reference_median_events"]);
    const int branches = std::stoi(s["reference_distinct_branches"]);
    const bool ok = events >= 2 && branches >= 2 && s["epsilon_monotone"] == "true" && s["step_monotone"] == "true";
    return {ok, "median events " + num(events) + " (>= 2), distinct branches " + std::to_string(branches) +
                    " (>= 2), event length over eps " + s["median_event_length_by_epsilon"] +
                    " non-increasing, memorized fraction over a " + s["median_memorized_fraction_by_step"] +
                    " non-increasing"};
}

// ---- 8. estimators ------------------------------------------------------

Outcome estimators() {
    const auto iid = make_iid_chain({1.0});
    const double inf = std::numeric_limits<double>::infinity();
    bool ok = true;
    std::string d;

    const auto quad = make_separable_quadratic({1.0, 0.5});
    Stream r1(derive_seed(kRoot + 8, 0));
    double worst_z = 0.0;
    for (auto kind : {EstimatorKind::SmoothedGaussian, EstimatorKind::SpsaRademacher}) {
        const auto c = bias_curve(kind, *quad, *iid, std::vector<double>{1.0, -2.0}, {}, {0.2, 0.05}, 400000, r1);
        for (const auto& p : c.points) worst_z = std::max(worst_z, p.bias_norm / p.bias_se);
    }
    ok &= worst_z <= 3.0;
    d += "quadratic bias/se max " + num(worst_z) + " <= 3";

    const auto quartic = make_power(4, 0.0, 1);
    Stream r2(derive_seed(kRoot + 8, 1));
    const auto qc = bias_curve(EstimatorKind::SmoothedGaussian, *quartic, *iid, std::vector<double>{1.0}, {},
                               {0.2, 0.1, 0.05}, 40000000, r2, inf);
    ok &= qc.slope >= 1.0;
    d += "; quartic bias slope " + num(qc.slope) + " >= 1";

    const auto square = make_power(2, 0.0, 1);
    Stream r3(derive_seed(kRoot + 8, 2));
    const auto vc = bias_curve(EstimatorKind::SmoothedGaussian, *square, *iid, std::vector<double>{3.0}, {},
                               {0.2, 0.1, 0.05}, 200000, r3, inf);
    std::vector<double> ds, vs;
    for (const auto& p : vc.points) {
        ds.push_back(p.delta);
        vs.push_back(p.variance);
    }
    const double dslope = loglog_slope(ds, vs);
    ok &= std::abs(dslope + 2.0) <= 0.3;
    d += "; variance delta-slope " + num(dslope) + " in -2 +- 0.3";

    const auto coin = make_iid_chain({0.5, 0.5});
    const std::vector<double> ms{1, 10, 100};
    std::vector<double> mv;
    for (std::size_t i = 0; i < ms.size(); ++i) {
        Stream r(derive_seed(kRoot + 8, 3 + i));
        EstimatorConfig cfg{EstimatorKind::SmoothedGaussian, 0.1, inf, static_cast<std::size_t>(ms[i])};
        const int reps = 4000;
        double s = 0, q = 0;
        std::size_t z = 0;
        for (int k = 0; k < reps; ++k) {
            const auto e = averaged_estimate(*quartic, *coin, std::vector<double>{1.0}, {}, cfg, z, r);
            z = e.noise_state;
            s += e.gradient[0];
            q += e.gradient[0] * e.gradient[0];
        }
        mv.push_back((q - s * s / reps) / (reps - 1));
    }
    const double mslope = loglog_slope(ms, mv);
    ok &= std::abs(mslope + 1.0) <= 0.1;
    d += "; variance m-slope " + num(mslope) + " in -1 +- 0.1";
    return {ok, d};
}

// ---- 9. diffusion -------------------------------------------------------

Outcome diffusion() {
    OUParams p;
    const std::vector<double> knots{0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    Stream train(derive_seed(kRoot + 9, 0));
    const auto tr = score_training_run(p, ScoreModel::zeros(knots), StepSchedule::constant(0.01, 0.5), 10000, 64, train);
    double worst = 0.0;
    for (std::size_t k = 0; k < knots.size(); ++k) {
        const auto m = ou_marginal(p, knots[k]);
        worst = std::max(worst, std::abs(tr.model.slope()[k] * m.var + 1.0));
    }
    const auto model = tr.model;
    const ScoreFn score = [model](double x, double t) { return model(x, t); };
    const auto end = ou_marginal(p, p.horizon);
    Stream gen(derive_seed(kRoot + 9, 1));
    const int n = 100000;
    double s = 0, q = 0;
    for (int i = 0; i < n; ++i) {
        const double v = reverse_sample(p, score, end.mean + std::sqrt(end.var) * gen.normal(), gen);
        s += v;
        q += v * v;
    }
    const double mean = s / n, var = (q - n * mean * mean) / (n - 1);
    const bool ok = worst <= 0.05 && std::abs(mean - p.data_mean) <= 0.05 && std::abs(var / p.data_var - 1) <= 0.1;
    return {ok, "max slope relative error " + num(worst) + " <= 0.05, sample mean " + num(mean) + " (+- 0.05), variance " +
                    num(var) + " vs " + num(p.data_var) + " (10%)"};
}

// ---- 10. numerics hygiene -----------------------------------------------

Outcome hygiene() {
    bool ok = true;
    Stream rng(kRoot + 10);
    const std::vector<LandscapePtr> ls{make_quadratic_tracking(), make_quadratic_tracking({1.0, 0.1, 0.5, 0.2}),
                                       make_symmetric_double_well(), make_curvature_asymmetric_well(),
                                       make_memorization_drift(), make_power(4, 0.0, 2),
                                       make_separable_quadratic({1.0, 3.0})};
    double fd = 0.0;
    for (const auto& L : ls) fd = std::max(fd, fd_check(*L, 100, 1e-5, rng));
    ok &= fd < 1e-6;

    const std::vector<ChainPtr> cs{make_flip_chain(0.3, 0.1), make_iid_chain({0.2, 0.8}),
                                   make_logistic_chain({0.5, 5.0, 1.0, 0.2}), make_memorization_chain()};
    double res = 0.0;
    for (const auto& C : cs)
        for (double x = -2.0; x <= 2.0; x += 0.25) {
            const std::vector<double> xs{x}, ys{0.3};
            res = std::max(res, stationary_residual(*C, xs, ys, stationary_distribution(*C, xs, ys)));
        }
    ok &= res < 1e-10;

    const auto L = make_memorization_drift();
    const auto C = make_memorization_chain();
    const double dt = 0.01 / L->curvature_bound();
    const auto a = ode_flow(L, C, {0.5}, {3.0}, 0.02, 2.0, dt, GradMode::Full, 1000);
    const auto b = ode_flow(L, C, {0.5}, {3.0}, 0.02, 2.0, dt / 2, GradMode::Full, 1000);
    const double rk = std::max(std::abs(a.x_at(a.size() - 1) - b.x_at(b.size() - 1)),
                               std::abs(a.y_at(a.size() - 1) - b.y_at(b.size() - 1)));
    ok &= rk < 1e-6;

    const auto s = StepSchedule::constant(0.01, 0.02);
    const bool same_run = run(L, C, s, SgdMode::Instantaneous, {1.0}, {0.0}, 20000, 3).to_csv() ==
                          run(L, C, s, SgdMode::Instantaneous, {1.0}, {0.0}, 20000, 3).to_csv();
    auto cfg = parse_config("experiment: collapse\nseed: 11\nparams: {runs: 50}\n");
    std::vector<std::string> outs;
    for (std::size_t workers : {1u, 4u}) {
        const fs::path dir = fs::temp_directory_path() / ("memlab_acceptance_rerun_" + std::to_string(workers));
        fs::remove_all(dir);
        cfg.output_dir = dir.string();
        cfg.workers = workers;
        run_experiment(cfg);
        outs.push_back(slurp(dir / "runs.csv") + slurp(dir / "manifest.json"));
        fs::remove_all(dir);
    }
    const bool identical = same_run && outs[0] == outs[1] && !outs[0].empty();
    ok &= identical;
    return {ok, "fd max " + num(fd) + " < 1e-6, stationary residual max " + num(res) + " < 1e-10, rk4 dt-halving " +
                    num(rk) + " < 1e-6, reruns identical " + (identical ? "yes" : "no")};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome()> fn;
    };
    const std::vector<Criterion> all{
        {1, "collapse", 60, collapse},          {2, "barycenter", 60, barycenter},
        {3, "degeneration", 120, degeneration}, {4, "two-time-scale tracking", 60, tracking},
        {5, "hwang weights", 180, hwang},       {6, "symmetry control", 180, symmetry},
        {7, "memorization", 300, memorization}, {8, "estimators", 120, estimators},
        {9, "diffusion", 180, diffusion},       {10, "numerics hygiene", 600, hygiene},
    };
    int failed = 0;
    for (const auto& c : all) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool pass = o.pass && secs < c.budget_s;
        failed += !pass;
        std::printf("%s criterion %d %s: %s; runtime %.1fs (< %.0fs)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    o.detail.c_str(), secs, c.budget_s);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}

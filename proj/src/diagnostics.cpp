// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0

#include "memlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "memlab/error.hpp"

namespace memlab {

namespace {

constexpr std::size_t kNoBranch = std::numeric_limits<std::size_t>::max();

double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

}  // namespace

TrackingResult tracking_error(const TrajectoryRecord& tr, const Landscape& L) {
    if (L.branch_count() == 0) throw Error(Errc::NoBranchMetadata, L.name() + " has no branch metadata");
    if (tr.dim_x != L.dim_x() || tr.dim_y != L.dim_y()) throw Error(Errc::DimensionMismatch, "record vs landscape");
    TrackingResult out;
    out.error.resize(tr.size());
    out.branch.resize(tr.size());
    std::vector<double> lam(tr.dim_x);
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const std::span<const double> x(tr.x.data() + k * tr.dim_x, tr.dim_x);
        const std::span<const double> y(tr.y.data() + k * tr.dim_y, tr.dim_y);
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = kNoBranch;
        for (std::size_t i = 0; i < L.branch_count(); ++i) {
            if (!L.branch(i, y, lam)) continue;
            const double d = distance(x, lam);
            if (d < best) {
                best = d;
                arg = i;
            }
        }
        out.error[k] = best;
        out.branch[k] = arg;
    }
    return out;
}

std::vector<MemorizationEvent> detect_memorization(const TrajectoryRecord& tr, const TrackingResult& tracking,
                                                   double tol, std::size_t min_len) {
    if (!(tol > 0.0)) throw Error(Errc::ParamOutOfRange, "tol must be positive");
    if (min_len < 2) throw Error(Errc::ParamOutOfRange, "min_len must be >= 2");
    std::vector<MemorizationEvent> events;
    const std::size_t m = tracking.error.size();
    std::size_t start = 0;
    bool open = false;
    auto close = [&](std::size_t end) {  // records [start, end)
        if (end - start < min_len) return;
        MemorizationEvent e;
        e.branch_index = tracking.branch[start];
        e.start_n = tr.n[start];
        e.end_n = tr.n[end - 1];
        e.records = end - start;
        double s = 0.0;
        for (std::size_t k = start; k < end; ++k) s += tracking.error[k];
        e.mean_tracking_error = s / static_cast<double>(e.records);
        double d2 = 0.0;
        for (std::size_t j = 0; j < tr.dim_y; ++j) {
            const double d = tr.y_at(end - 1, j) - tr.y_at(start, j);
            d2 += d * d;
        }
        e.y_drift = std::sqrt(d2);
        events.push_back(e);
    };
    for (std::size_t k = 0; k < m; ++k) {
        const bool on = tracking.error[k] < tol && tracking.branch[k] != kNoBranch;
        if (open && (!on || tracking.branch[k] != tracking.branch[start])) {
            close(k);
            open = false;
        }
        if (on && !open) {
            start = k;
            open = true;
        }
    }
    if (open) close(m);
    return events;
}

std::vector<MemorizationEvent> detect_memorization(const TrajectoryRecord& tr, const Landscape& L, double tol,
                                                   std::size_t min_len) {
    return detect_memorization(tr, tracking_error(tr, L), tol, min_len);
}

double memorized_fraction(const std::vector<MemorizationEvent>& events, std::size_t total_records) {
    if (total_records == 0) return 0.0;
    std::size_t s = 0;
    for (const auto& e : events) s += e.records;
    return static_cast<double>(s) / static_cast<double>(total_records);
}

bool Region::contains(std::span<const double> x) const {
    if (interval) return x[0] >= interval->first && x[0] < interval->second;
    return distance(x, center) < radius;
}

std::vector<Region> default_regions(const std::vector<std::vector<double>>& centers) {
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < centers.size(); ++i)
        for (std::size_t j = i + 1; j < centers.size(); ++j) dmin = std::min(dmin, distance(centers[i], centers[j]));
    if (!std::isfinite(dmin)) dmin = 1.0;
    std::vector<Region> out;
    for (const auto& c : centers) out.push_back(Region{c, 0.25 * dmin, std::nullopt});
    return out;
}

std::vector<Region> basin_regions_1d(const std::vector<double>& saddles) {
    std::vector<double> cuts = saddles;
    std::sort(cuts.begin(), cuts.end());
    std::vector<Region> out;
    double lo = -std::numeric_limits<double>::infinity();
    for (double c : cuts) {
        out.push_back(Region{{}, 0.0, std::pair{lo, c}});
        lo = c;
    }
    out.push_back(Region{{}, 0.0, std::pair{lo, std::numeric_limits<double>::infinity()}});
    return out;
}

namespace {

std::pair<double, double> as_interval(const Region& r) {
    if (r.interval) return *r.interval;
    return {r.center[0] - r.radius, r.center[0] + r.radius};
}

void check_disjoint(const std::vector<Region>& regions) {
    for (std::size_t i = 0; i < regions.size(); ++i) {
        for (std::size_t j = i + 1; j < regions.size(); ++j) {
            const Region &a = regions[i], &b = regions[j];
            bool overlap;
            if (!a.interval && !b.interval) {
                overlap = distance(a.center, b.center) < a.radius + b.radius;
            } else {
                const auto [alo, ahi] = as_interval(a);
                const auto [blo, bhi] = as_interval(b);
                overlap = std::max(alo, blo) < std::min(ahi, bhi);
            }
            if (overlap) throw Error(Errc::OverlappingRegions, "regions overlap");
        }
    }
}

}  // namespace

std::vector<int> assign_regions(const TrajectoryRecord& tr, const std::vector<Region>& regions) {
    std::vector<int> out(tr.size(), -1);
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const std::span<const double> x(tr.x.data() + k * tr.dim_x, tr.dim_x);
        for (std::size_t r = 0; r < regions.size(); ++r) {
            if (regions[r].contains(x)) {
                out[k] = static_cast<int>(r);
                break;
            }
        }
    }
    return out;
}

OccupationStats occupation_measure(const TrajectoryRecord& tr, const std::vector<Region>& regions) {
    check_disjoint(regions);
    const std::vector<int> lab = assign_regions(tr, regions);
    const std::size_t R = regions.size();
    OccupationStats st;
    st.regions = regions;
    st.samples = tr.size();
    st.visit_fraction.assign(R, 0.0);
    st.dwell_times.assign(R, {});
    st.transitions.assign(R, std::vector<std::uint64_t>(R, 0));
    int last_assigned = -1;
    std::size_t k = 0;
    while (k < lab.size()) {
        std::size_t e = k;
        while (e < lab.size() && lab[e] == lab[k]) ++e;
        if (lab[k] >= 0) {
            const auto r = static_cast<std::size_t>(lab[k]);
            st.visit_fraction[r] += static_cast<double>(e - k);
            st.dwell_times[r].push_back(static_cast<std::uint64_t>(e - k) * tr.thin);
            if (last_assigned >= 0 && last_assigned != lab[k]) {
                ++st.transitions[static_cast<std::size_t>(last_assigned)][r];
            }
            last_assigned = lab[k];
        }
        k = e;
    }
    if (st.samples > 0)
        for (double& f : st.visit_fraction) f /= static_cast<double>(st.samples);
    return st;
}

TransitionStats transition_stats(const TrajectoryRecord& tr, const std::vector<Region>& regions) {
    const OccupationStats occ = occupation_measure(tr, regions);
    const std::vector<int> lab = assign_regions(tr, regions);
    TransitionStats out;
    for (const auto& d : occ.dwell_times) {
        if (d.empty()) {
            out.mean_dwell.push_back(0.0);
            out.median_dwell.push_back(0.0);
            continue;
        }
        double s = 0.0;
        for (auto v : d) s += static_cast<double>(v);
        out.mean_dwell.push_back(s / static_cast<double>(d.size()));
        std::vector<std::uint64_t> sorted = d;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t h = sorted.size() / 2;
        out.median_dwell.push_back(sorted.size() % 2 == 1
                                       ? static_cast<double>(sorted[h])
                                       : 0.5 * static_cast<double>(sorted[h - 1] + sorted[h]));
    }
    int last = -1;
    std::optional<std::uint64_t> last_switch;
    for (std::size_t k = 0; k < lab.size(); ++k) {
        if (lab[k] < 0) continue;
        if (last >= 0 && lab[k] != last) {
            ++out.switch_count;
            if (last_switch) out.gaps.push_back(tr.n[k] - *last_switch);
            last_switch = tr.n[k];
        }
        last = lab[k];
    }
    const double span_steps = tr.size() > 1 ? static_cast<double>(tr.n.back() - tr.n.front()) : 0.0;
    out.switches_per_million = span_steps > 0.0 ? static_cast<double>(out.switch_count) * 1e6 / span_steps : 0.0;
    return out;
}

std::vector<double> hwang_weights(const std::vector<std::vector<double>>& eigenvalues) {
    if (eigenvalues.empty()) return {};
    std::vector<double> logw;
    for (const auto& eig : eigenvalues) {
        double s = 0.0;
        for (double l : eig) {
            if (!(l > 0.0)) throw Error(Errc::NonPositiveEigenvalue, "curvature eigenvalues must be positive");
            s += std::log(l);
        }
        logw.push_back(-0.5 * s);
    }
    const double mx = *std::max_element(logw.begin(), logw.end());
    double total = 0.0;
    for (double& v : logw) {
        v = std::exp(v - mx);
        total += v;
    }
    for (double& v : logw) v /= total;
    return logw;
}

std::vector<double> gibbs_quadrature_1d(const Landscape& V, double temperature, double lo, double hi, std::size_t n,
                                        const std::vector<Region>& regions) {
    if (V.dim_x() != 1 || V.dim_y() != 0) throw Error(Errc::DimensionMismatch, "quadrature needs a 1-D x-only V");
    if (!(temperature > 0.0) || !(hi > lo) || n < 2) throw Error(Errc::ParamOutOfRange, "bad quadrature setup");
    if (n % 2 == 1) ++n;
    const double h = (hi - lo) / static_cast<double>(n);
    std::vector<double> vals(n + 1);
    double vmin = std::numeric_limits<double>::infinity();
    const std::span<const double> no_y;
    for (std::size_t i = 0; i <= n; ++i) {
        const double x = lo + h * static_cast<double>(i);
        vals[i] = V.eval_unchecked(std::span<const double>(&x, 1), no_y, 0);
        vmin = std::min(vmin, vals[i]);
    }
    std::vector<double> mass(regions.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        const double d = w * std::exp(-(vals[i] - vmin) / temperature);
        total += d;
        const double x = lo + h * static_cast<double>(i);
        for (std::size_t r = 0; r < regions.size(); ++r) {
            if (regions[r].contains(std::span<const double>(&x, 1))) {
                mass[r] += d;
                break;
            }
        }
    }
    for (double& m : mass) m /= total;
    return mass;
}

PotentialEstimate potential_estimate(const TrajectoryRecord& tr, double lo, double hi, std::size_t bins, double a) {
    if (!(hi > lo) || bins < 1 || !(a > 0.0)) throw Error(Errc::ParamOutOfRange, "bad histogram setup");
    PotentialEstimate out;
    out.counts.assign(bins, 0);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t b = 0; b < bins; ++b) out.centers.push_back(lo + width * (static_cast<double>(b) + 0.5));
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const double x = tr.x_at(k);
        if (x < lo || x > hi) continue;
        auto b = static_cast<std::size_t>((x - lo) / width);
        if (b >= bins) b = bins - 1;
        ++out.counts[b];
    }
    const auto total = static_cast<double>(tr.size());
    double vmin = std::numeric_limits<double>::infinity();
    out.values.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        if (out.counts[b] == 0) {
            out.empty_bins.push_back(b);
            continue;
        }
        const double v = -a * std::log(static_cast<double>(out.counts[b]) / total);
        out.values[b] = v;
        vmin = std::min(vmin, v);
    }
    for (auto& v : out.values)
        if (v) *v -= vmin;
    return out;
}

}  // namespace memlab

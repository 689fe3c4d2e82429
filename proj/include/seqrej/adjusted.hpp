#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "index_set.hpp"
#include "schedule.hpp"
#include "stepup.hpp"

namespace seqrej {

// Smallest level at which each hypothesis enters the rejection set, together
// with the distinct levels where the set grows and the set attained at each.
struct AdjustedReport {
    std::vector<double> adjusted;      // per hypothesis; 1.0 = not rejected below 1
    std::vector<double> breakpoints;   // strictly increasing levels where the set grows
    std::vector<IndexSet> final_sets;  // rejection set attained at each breakpoint
};

// Rejection set implied by a report at a given level (valid for level < 1;
// hypotheses never rejected carry the sentinel value 1.0).
inline IndexSet rejections_at(const AdjustedReport& report, double level) {
    IndexSet out(report.adjusted.size());
    for (std::size_t h = 0; h < report.adjusted.size(); ++h)
        if (report.adjusted[h] <= level) out.set(h);
    return out;
}

// Smallest level at which `h` would be rejected from the fixed set `rejected`,
// located by bisection on the monotone reject-at-level predicate.  Returns the
// smallest level actually observed to reject (so running at the returned value
// reproduces the rejection); 1.0 if the hypothesis is not rejected even at 1.
inline double bisection_inverse(const Schedule& sched, std::size_t h, const IndexSet& rejected,
                                double evidence, double tol = 1e-10) {
    auto rejected_at = [&](double level) {
        return rejects(sched.comparison, evidence, sched.alpha_of(h, rejected, level));
    };
    if (!rejected_at(1.0)) return 1.0;
    double lo = 0.0;  // exclusive: never evaluated
    double hi = 1.0;
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (rejected_at(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

namespace detail {

// Shared driver: walk the level upward, at each stage asking for the smallest
// level at which the current set can grow, then re-running to the fixed point
// at that level.  A stage that claims a level but produces no growth means the
// procedure is not monotone in the level, which is reported as a logic error.
template <class NextLevel, class RunAt>
AdjustedReport adjusted_drive(std::size_t n, NextLevel&& next_level, RunAt&& run_at) {
    AdjustedReport report;
    report.adjusted.assign(n, 1.0);
    IndexSet rejected(n);
    double prev = 0.0;
    bool zero_recorded = false;
    while (rejected.count() < n) {
        double target = next_level(rejected);
        if (target >= 1.0) break;  // the rest keep the sentinel value 1.0
        if (target <= 0.0) {
            // free rejections: critical value positive (or vacuous) at every level
            IndexSet next = run_at(1e-300, rejected);
            if (next == rejected)
                throw std::logic_error(
                    "adjusted p-values: claimed zero-level rejection never happens");
            (next - rejected).for_each_member([&](std::size_t h) { report.adjusted[h] = 0.0; });
            rejected = next;
            if (zero_recorded) {
                report.final_sets.back() = rejected;
            } else {
                report.breakpoints.push_back(0.0);
                report.final_sets.push_back(rejected);
                zero_recorded = true;
            }
            continue;
        }
        if (target <= prev)
            throw std::logic_error(
                "adjusted p-values: rejection level failed to increase between stages");
        IndexSet next = run_at(target, rejected);
        if (next == rejected) {
            // A closed-form inverse can under-claim by a hair: double rounding
            // of p * k, or cancellation in a forward map that works near 1.
            // Look for the smallest achieving level inside a tight window
            // around the claim before declaring the schedule inconsistent.
            double cap = std::min(1.0, target + std::max(1e-13, target * 1e-12));
            IndexSet at_hi = run_at(cap, rejected);
            if (at_hi == rejected)
                throw std::logic_error(
                    "adjusted p-values: no new rejection at its own claimed level");
            double lo = target;
            double hi = cap;
            while (std::nextafter(lo, hi) < hi) {
                double mid = 0.5 * (lo + hi);
                IndexSet at_mid = run_at(mid, rejected);
                if (at_mid == rejected) {
                    lo = mid;
                } else {
                    hi = mid;
                    at_hi = at_mid;
                }
            }
            target = hi;
            next = at_hi;
        }
        (next - rejected).for_each_member([&](std::size_t h) { report.adjusted[h] = target; });
        rejected = next;
        report.breakpoints.push_back(target);
        report.final_sets.push_back(rejected);
        prev = target;
    }
    return report;
}

}  // namespace detail

// Adjusted p-values via the schedule's own exact level inverse.
inline AdjustedReport adjusted_pvalues(const Schedule& sched, std::span<const double> pvalues) {
    const std::size_t n = pvalues.size();
    auto next_level = [&](const IndexSet& rejected) {
        double target = 1.0;
        for (std::size_t h = 0; h < n; ++h)
            if (!rejected.test(h))
                target = std::min(target, sched.inverse_alpha(h, rejected, pvalues[h]));
        return target;
    };
    auto run_at = [&](double level, const IndexSet& start) {
        return run_final(sched, pvalues, level, start);
    };
    return detail::adjusted_drive(n, next_level, run_at);
}

// Same walk, but the per-stage level is located by bisection on the rejection
// predicate instead of the schedule's closed-form inverse.  Useful as an
// independent cross-check and for schedules without a usable inverse.
inline AdjustedReport adjusted_pvalues_bisection(const Schedule& sched,
                                                 std::span<const double> pvalues,
                                                 double tol = 1e-10) {
    const std::size_t n = pvalues.size();
    auto next_level = [&](const IndexSet& rejected) {
        double target = 1.0;
        for (std::size_t h = 0; h < n; ++h)
            if (!rejected.test(h))
                target = std::min(target,
                                  bisection_inverse(sched, h, rejected, pvalues[h], tol));
        return target;
    };
    auto run_at = [&](double level, const IndexSet& start) {
        return run_final(sched, pvalues, level, start);
    };
    return detail::adjusted_drive(n, next_level, run_at);
}

// Adjusted p-values for an ordered (step-up) rule.  The per-stage level is the
// smallest level at which the one-pass rule rejects anything beyond the
// current set.
inline AdjustedReport adjusted_pvalues(const OrderedCriticalValues& values,
                                       std::span<const double> pvalues) {
    auto next_level = [&](const IndexSet& rejected) {
        return stepup_inverse_level(values, pvalues, rejected);
    };
    auto run_at = [&](double level, const IndexSet& start) {
        return run_stepup_final(values, pvalues, level, start);
    };
    return detail::adjusted_drive(pvalues.size(), next_level, run_at);
}

}  // namespace seqrej

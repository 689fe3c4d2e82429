#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "logic.hpp"
#include "schedule.hpp"

namespace seqrej {

struct MonotonicityWitness {
    IndexSet r;
    IndexSet s;
    std::size_t hypothesis = 0;
    double value_at_r = 0.0;
    double value_at_s = 0.0;
};

struct MonotonicityVerdict {
    bool ok = true;
    std::uint64_t chains_checked = 0;
    std::optional<MonotonicityWitness> witness;
};

namespace detail {

// Rejection must never get harder as the rejection set grows: larger
// critical values on the p scale, smaller cutoffs on the statistic scale.
inline bool monotone_pair(Comparison cmp, double at_r, double at_s, double tol) {
    if (cmp == Comparison::non_strict) return at_r <= at_s + tol;
    return at_r >= at_s - tol;
}

}  // namespace detail

// Exhaustive scan of every chain R dominated by S strictly below the full
// universe, checking each hypothesis outside S.  Enumeration is ascending in
// (S, R, H), so the reported witness is deterministic.
inline MonotonicityVerdict check_monotonicity(const Schedule& sched, std::size_t universe_size,
                                              double level, double tol = 1e-12) {
    if (universe_size > 20)
        throw std::invalid_argument(
            "check_monotonicity: exhaustive mode limited to 20 hypotheses; use sampled mode");
    MonotonicityVerdict verdict;
    const std::size_t n = universe_size;
    const std::uint64_t full = (std::uint64_t{1} << n) - 1;

    // cache alpha values per (R, H) for small universes
    std::vector<std::vector<double>> table;
    const bool cached = n <= 16;
    if (cached) {
        table.assign(std::size_t{1} << n, {});
        for (std::uint64_t r = 0; r <= full; ++r) {
            table[r].assign(n, 0.0);
            IndexSet rs = IndexSet::from_mask(n, r);
            for (std::size_t h = 0; h < n; ++h)
                if (!(r >> h & 1)) table[r][h] = sched.alpha_of(h, rs, level);
        }
    }
    auto value = [&](std::uint64_t r, std::size_t h) {
        if (cached) return table[r][h];
        return sched.alpha_of(h, IndexSet::from_mask(n, r), level);
    };

    for (std::uint64_t s = 0; s < full; ++s) {
        // submasks of s in ascending order
        std::uint64_t r = 0;
        for (;;) {
            ++verdict.chains_checked;
            for (std::size_t h = 0; h < n; ++h) {
                if (s >> h & 1) continue;
                double at_r = value(r, h);
                double at_s = value(s, h);
                if (!detail::monotone_pair(sched.comparison, at_r, at_s, tol)) {
                    verdict.ok = false;
                    verdict.witness = MonotonicityWitness{IndexSet::from_mask(n, r),
                                                         IndexSet::from_mask(n, s), h, at_r, at_s};
                    return verdict;
                }
            }
            if (r == s) break;
            r = (r - s) & s;
        }
    }
    return verdict;
}

// Randomized variant for universes too large to enumerate.
inline MonotonicityVerdict check_monotonicity_sampled(const Schedule& sched,
                                                      std::size_t universe_size, double level,
                                                      std::uint64_t pair_budget,
                                                      std::uint64_t seed, double tol = 1e-12) {
    MonotonicityVerdict verdict;
    std::mt19937_64 rng(seed);
    const std::size_t n = universe_size;
    for (std::uint64_t it = 0; it < pair_budget; ++it) {
        IndexSet s(n), r(n);
        for (std::size_t h = 0; h < n; ++h) {
            std::uint64_t bits = rng();
            if (bits & 1) {
                s.set(h);
                if (bits & 2) r.set(h);
            }
        }
        if (s.count() == n) {
            auto drop = static_cast<std::size_t>(rng() % n);
            s.reset(drop);
            r.reset(drop);  // keep r inside s
        }
        ++verdict.chains_checked;
        for (std::size_t h = 0; h < n; ++h) {
            if (s.test(h)) continue;
            double at_r = sched.alpha_of(h, r, level);
            double at_s = sched.alpha_of(h, s, level);
            if (!detail::monotone_pair(sched.comparison, at_r, at_s, tol)) {
                verdict.ok = false;
                verdict.witness = MonotonicityWitness{r, s, h, at_r, at_s};
                return verdict;
            }
        }
    }
    return verdict;
}

struct SingleStepWitness {
    IndexSet r;
    IndexSet atom_true;
    double sum = 0.0;
};

enum class SingleStepStatus { ok, violation, not_applicable };

struct SingleStepVerdict {
    SingleStepStatus status = SingleStepStatus::ok;
    std::uint64_t cases_checked = 0;
    std::optional<SingleStepWitness> witness;
};

// Bonferroni-style sum bound: once the rejected set is a candidate false set,
// the critical values of any co-tenable collection of true hypotheses must
// not sum beyond the level.  Only meaningful for schedules whose validity is
// declared to rest on that sum; others get a not-applicable verdict.
inline SingleStepVerdict check_single_step_bound(const Schedule& sched,
                                                 const LogicalStructure& structure, double level,
                                                 double tol = 1e-12) {
    SingleStepVerdict verdict;
    if (sched.justification != Justification::bonferroni_shaffer) {
        verdict.status = SingleStepStatus::not_applicable;
        return verdict;
    }
    const std::size_t n = structure.size();

    auto sum_over = [&](const IndexSet& r, const IndexSet& atom_true) {
        double sum = 0.0;
        atom_true.for_each_member(
            [&](std::size_t h) { sum += sched.alpha_of(h, r, level); });
        return sum;
    };

    if (structure.is_free()) {
        if (n > 20)
            throw std::invalid_argument(
                "check_single_step_bound: free structures limited to 20 hypotheses");
        const std::uint64_t top = std::uint64_t{1} << n;
        for (std::uint64_t m = 0; m < top; ++m) {
            IndexSet r = IndexSet::from_mask(n, m);
            // with no logical constraints the worst atom has every remaining
            // hypothesis true; smaller atoms are dominated since values are >= 0
            IndexSet atom_true = r.complement();
            ++verdict.cases_checked;
            double sum = sum_over(r, atom_true);
            if (sum > level + tol) {
                verdict.status = SingleStepStatus::violation;
                verdict.witness = SingleStepWitness{r, atom_true, sum};
                return verdict;
            }
        }
        return verdict;
    }

    for (const IndexSet& false_set_atom : structure.atoms()) {
        IndexSet r = false_set_atom.complement();
        for (const IndexSet& atom_true : structure.atoms()) {
            if (atom_true.intersects(r)) continue;
            ++verdict.cases_checked;
            double sum = sum_over(r, atom_true);
            if (sum > level + tol) {
                verdict.status = SingleStepStatus::violation;
                verdict.witness = SingleStepWitness{r, atom_true, sum};
                return verdict;
            }
        }
    }
    return verdict;
}

}  // namespace seqrej

#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "index_set.hpp"

namespace seqrej {

// How evidence is compared against a critical value.  Rejection is
//   non_strict:     p_H <= c_H(R)   (p-value scale, small is extreme)
//   strict_exceed:  S_H >  c_H(R)   (statistic scale, large is extreme)
// Exact comparisons in both cases; nothing is nudged by an epsilon.
enum class Comparison { non_strict, strict_exceed };

// Declared source of validity for the per-step critical values.  The
// single-step sum check only applies to Bonferroni-style schedules.
enum class Justification { bonferroni_shaffer, simes, sidak, resampling, none };

inline const char* to_string(Justification j) {
    switch (j) {
        case Justification::bonferroni_shaffer: return "bonferroni-shaffer";
        case Justification::simes: return "simes";
        case Justification::sidak: return "sidak";
        case Justification::resampling: return "resampling";
        default: return "none";
    }
}

// A rejection-set-indexed family of critical values c_H(R), parametrized by
// the overall level.  alpha_of is mandatory; inverse_alpha, when present,
// returns the smallest level at which H becomes rejectable given R and must
// agree exactly with alpha_of.
struct Schedule {
    std::string id;
    Comparison comparison = Comparison::non_strict;
    Justification justification = Justification::none;
    bool negative_control = false;
    std::map<std::string, std::string> assumptions;

    std::function<double(std::size_t h, const IndexSet& rejected, double level)> alpha_of;
    std::function<double(std::size_t h, const IndexSet& rejected, double p)> inverse_alpha;
};

inline bool rejects(Comparison cmp, double evidence, double critical) {
    if (cmp == Comparison::non_strict) return evidence <= critical;
    return evidence > critical;
}

struct TraceStep {
    IndexSet rejected_before;
    IndexSet newly_rejected;
    // critical value evaluated for each hypothesis still in play this step
    std::vector<std::pair<std::size_t, double>> critical_values;
};

struct ProcedureTrace {
    std::vector<TraceStep> steps;
    IndexSet final;
    std::map<std::string, std::string> metadata;

    std::size_t productive_steps() const {
        std::size_t c = 0;
        for (const TraceStep& s : steps)
            if (!s.newly_rejected.empty()) ++c;
        return c;
    }
};

namespace detail {

inline void check_level(double level) {
    if (!(level >= 0.0) || !(level <= 1.0))
        throw std::invalid_argument("level must lie in [0, 1]");
}

inline void check_evidence(std::span<const double> evidence, std::size_t n, Comparison cmp) {
    if (evidence.size() != n)
        throw std::invalid_argument("evidence length does not match universe size");
    if (cmp == Comparison::non_strict) {
        for (double p : evidence)
            if (!(p >= 0.0) || !(p <= 1.0))
                throw std::invalid_argument("p-values must lie in [0, 1]");
    }
}

}  // namespace detail

// One batched pass: everything currently eligible under the schedule at
// `level`, given `rejected`.
inline IndexSet schedule_successor(const Schedule& sched, std::span<const double> evidence,
                                   const IndexSet& rejected, double level,
                                   std::vector<std::pair<std::size_t, double>>* record = nullptr) {
    std::size_t n = rejected.universe_size();
    IndexSet out(n);
    for (std::size_t h = 0; h < n; ++h) {
        if (rejected.test(h)) continue;
        double c = sched.alpha_of(h, rejected, level);
        if (record) record->emplace_back(h, c);
        if (rejects(sched.comparison, evidence[h], c)) out.set(h);
    }
    return out;
}

// Iterates an arbitrary successor map to its fixed point, recording each
// step.  The trailing recorded step (when present) is the one that found
// nothing new; full rejection ends on a productive step.
template <class NextFn>
ProcedureTrace run_successor(NextFn&& next, std::size_t universe_size) {
    ProcedureTrace trace;
    IndexSet rejected(universe_size);
    const IndexSet everything = IndexSet::full(universe_size);
    for (std::size_t iter = 0; iter <= universe_size; ++iter) {
        TraceStep step;
        step.rejected_before = rejected;
        step.newly_rejected = next(rejected, &step.critical_values) - rejected;
        IndexSet gained = step.newly_rejected;
        trace.steps.push_back(std::move(step));
        if (gained.empty()) break;
        rejected |= gained;
        if (rejected == everything) break;
    }
    trace.final = rejected;
    return trace;
}

// Full sequential run of a critical-value schedule against an evidence
// vector: p-values for non_strict schedules, statistics for strict ones.
inline ProcedureTrace run(const Schedule& sched, std::span<const double> evidence, double level) {
    detail::check_level(level);
    std::size_t n = evidence.size();
    detail::check_evidence(evidence, n, sched.comparison);
    return run_successor(
        [&](const IndexSet& rejected, std::vector<std::pair<std::size_t, double>>* rec) {
            return schedule_successor(sched, evidence, rejected, level, rec);
        },
        n);
}

// Same fixed point without trace bookkeeping; used in tight simulation loops.
// Each batch is evaluated against the rejection set as it stood before the
// batch, exactly as in run().
inline IndexSet run_final(const Schedule& sched, std::span<const double> evidence, double level,
                          IndexSet start) {
    std::size_t n = start.universe_size();
    if (evidence.size() != n)
        throw std::invalid_argument("evidence length does not match universe size");
    IndexSet rejected = std::move(start);
    for (;;) {
        IndexSet gained(n);
        bool any = false;
        for (std::size_t h = 0; h < n; ++h) {
            if (rejected.test(h)) continue;
            if (rejects(sched.comparison, evidence[h], sched.alpha_of(h, rejected, level))) {
                gained.set(h);
                any = true;
            }
        }
        if (!any) return rejected;
        rejected |= gained;
        if (rejected.count() == n) return rejected;
    }
}

inline IndexSet run_final(const Schedule& sched, std::span<const double> evidence, double level) {
    return run_final(sched, evidence, level, IndexSet(evidence.size()));
}

}  // namespace seqrej

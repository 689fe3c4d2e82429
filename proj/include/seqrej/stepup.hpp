#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "index_set.hpp"
#include "logic.hpp"
#include "schedule.hpp"

namespace seqrej {

// Rank-ordered critical values for step-up testing: given the rejections so
// far, a non-increasing list alpha_1(R) >= ... >= alpha_m(R) for the m
// remaining hypotheses, with alpha_1 paired against the largest remaining
// p-value.
struct OrderedCriticalValues {
    std::string id;
    std::map<std::string, std::string> assumptions;

    // values for ranks 1..m where m = universe size - |rejected|
    std::function<std::vector<double>(const IndexSet& rejected, double level)> alphas_of;
    // smallest level at which p <= alpha_k(rejected); k is the 1-based rank
    std::function<double(std::size_t k, const IndexSet& rejected, double p)> inverse_alpha;
};

namespace detail {

struct RankedP {
    double p;
    std::size_t h;
};

// remaining hypotheses ordered by descending p-value, ties by ascending index
inline std::vector<RankedP> rank_descending(std::span<const double> pvalues,
                                            const IndexSet& rejected) {
    std::vector<RankedP> order;
    order.reserve(pvalues.size() - rejected.count());
    for (std::size_t h = 0; h < pvalues.size(); ++h)
        if (!rejected.test(h)) order.push_back({pvalues[h], h});
    std::sort(order.begin(), order.end(), [](const RankedP& a, const RankedP& b) {
        if (a.p != b.p) return a.p > b.p;
        return a.h < b.h;
    });
    return order;
}

inline void check_ordered(const std::vector<double>& alphas, std::size_t expected) {
    if (alphas.size() != expected)
        throw std::logic_error("ordered critical values: wrong list length");
    for (std::size_t i = 1; i < alphas.size(); ++i)
        if (alphas[i] > alphas[i - 1] + 1e-12)
            throw std::logic_error("ordered critical values must be non-increasing in rank");
}

}  // namespace detail

// One step-up pass: scan the remaining p-values from the largest down, stop at
// the first rank k whose p-value is at or below alpha_k(R), and reject every
// remaining hypothesis whose p-value is at or below that one (ties included).
inline IndexSet stepup_successor(const OrderedCriticalValues& values,
                                 std::span<const double> pvalues, const IndexSet& rejected,
                                 double level,
                                 std::vector<std::pair<std::size_t, double>>* record = nullptr) {
    std::size_t n = rejected.universe_size();
    if (pvalues.size() != n)
        throw std::invalid_argument("evidence length does not match universe size");
    IndexSet out(n);
    std::vector<detail::RankedP> order = detail::rank_descending(pvalues, rejected);
    if (order.empty()) return out;

    std::vector<double> alphas = values.alphas_of(rejected, level);
    detail::check_ordered(alphas, order.size());
    if (record)
        for (std::size_t i = 0; i < order.size(); ++i)
            record->emplace_back(order[i].h, alphas[i]);

    std::size_t hit = order.size();
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (order[i].p <= alphas[i]) {
            hit = i;
            break;
        }
    }
    if (hit == order.size()) return out;
    double threshold = order[hit].p;
    for (const detail::RankedP& e : order)
        if (e.p <= threshold) out.set(e.h);
    return out;
}

// Full run: iterate the step-up pass to its fixed point, re-deriving the
// critical value list from the grown rejection set after each pass.
inline ProcedureTrace run_stepup(const OrderedCriticalValues& values,
                                 std::span<const double> pvalues, double level) {
    detail::check_level(level);
    detail::check_evidence(pvalues, pvalues.size(), Comparison::non_strict);
    ProcedureTrace trace = run_successor(
        [&](const IndexSet& rejected, std::vector<std::pair<std::size_t, double>>* rec) {
            return stepup_successor(values, pvalues, rejected, level, rec);
        },
        pvalues.size());
    trace.metadata["procedure"] = values.id;
    for (const auto& [key, note] : values.assumptions) trace.metadata["assumes " + key] = note;
    return trace;
}

// Fixed point only, optionally warm-started; used by the adjustment loop.
inline IndexSet run_stepup_final(const OrderedCriticalValues& values,
                                 std::span<const double> pvalues, double level, IndexSet start) {
    for (;;) {
        IndexSet gained = stepup_successor(values, pvalues, start, level);
        if (gained.empty()) return start;
        start |= gained;
        if (start.count() == start.universe_size()) return start;
    }
}

inline IndexSet run_stepup_final(const OrderedCriticalValues& values,
                                 std::span<const double> pvalues, double level) {
    return run_stepup_final(values, pvalues, level, IndexSet(pvalues.size()));
}

// Smallest level at which the next step-up pass rejects anything new given the
// current rejection set; 1 when nothing remains or no rank can ever succeed.
inline double stepup_inverse_level(const OrderedCriticalValues& values,
                                   std::span<const double> pvalues, const IndexSet& rejected) {
    std::vector<detail::RankedP> order = detail::rank_descending(pvalues, rejected);
    double best = 1.0;
    for (std::size_t i = 0; i < order.size(); ++i)
        best = std::min(best, values.inverse_alpha(i + 1, rejected, order[i].p));
    return best;
}

// alpha_k = level / min(k, bound); without a bound, plain level / k.
inline OrderedCriticalValues hochberg(std::optional<std::size_t> k_bound = std::nullopt) {
    if (k_bound && *k_bound < 1)
        throw std::invalid_argument("hochberg: rank bound must be at least 1");
    OrderedCriticalValues v;
    v.id = "hochberg";
    v.assumptions["simes-inequality"] = "asserted by caller";
    if (k_bound) v.assumptions["rank-bound"] = std::to_string(*k_bound);
    auto denom = [k_bound](std::size_t rank) -> std::size_t {
        return k_bound ? std::min(rank, *k_bound) : rank;
    };
    v.alphas_of = [denom](const IndexSet& rejected, double level) {
        std::size_t m = rejected.universe_size() - rejected.count();
        std::vector<double> out(m);
        for (std::size_t k = 1; k <= m; ++k)
            out[k - 1] = level / static_cast<double>(denom(k));
        return out;
    };
    v.inverse_alpha = [denom](std::size_t k, const IndexSet&, double p) {
        return std::min(1.0, std::max(0.0, p * static_cast<double>(denom(k))));
    };
    return v;
}

// alpha_k = level / min(k, D(R)) where D(R) is the largest number of
// hypotheses that can still be simultaneously true; D(R) = 0 makes every
// critical value 1 outright.
inline OrderedCriticalValues shaffer_stepup(const LogicalStructure& structure) {
    auto st = std::make_shared<const LogicalStructure>(structure);
    OrderedCriticalValues v;
    v.id = "shaffer-stepup";
    v.assumptions["simes-inequality"] = "asserted by caller";
    v.alphas_of = [st](const IndexSet& rejected, double level) {
        std::size_t m = rejected.universe_size() - rejected.count();
        std::size_t d = st->max_true_count(rejected);
        std::vector<double> out(m);
        for (std::size_t k = 1; k <= m; ++k)
            out[k - 1] = d == 0 ? 1.0 : level / static_cast<double>(std::min(k, d));
        return out;
    };
    v.inverse_alpha = [st](std::size_t k, const IndexSet& rejected, double p) {
        std::size_t d = st->max_true_count(rejected);
        if (d == 0) return 0.0;
        return std::min(1.0, std::max(0.0, p * static_cast<double>(std::min(k, d))));
    };
    return v;
}

// Rank-wise analogue of the subset monotonicity check: growing the rejection
// set must never shrink any rank's critical value that is still in range.
struct StepUpWitness {
    IndexSet r;
    IndexSet s;
    std::size_t rank = 0;  // 1-based
    double value_at_r = 0.0;
    double value_at_s = 0.0;
};

struct StepUpVerdict {
    bool ok = true;
    std::size_t chains_checked = 0;
    std::optional<StepUpWitness> witness;
};

inline StepUpVerdict check_stepup_monotonicity(const OrderedCriticalValues& values,
                                               std::size_t universe_size, double level,
                                               double tol = 1e-12) {
    if (universe_size > 16)
        throw std::invalid_argument(
            "check_stepup_monotonicity: exhaustive mode limited to 16 hypotheses");
    detail::check_level(level);
    std::size_t n = universe_size;
    std::uint64_t top = std::uint64_t{1} << n;
    std::vector<std::vector<double>> table(top);
    for (std::uint64_t m = 0; m < top; ++m) {
        IndexSet r = IndexSet::from_mask(n, m);
        table[m] = values.alphas_of(r, level);
        detail::check_ordered(table[m], n - r.count());
    }
    StepUpVerdict verdict;
    for (std::uint64_t s = 0; s < top; ++s) {
        std::size_t ranks = table[s].size();
        for (std::uint64_t r = s;; r = (r - 1) & s) {
            if (r != s) {
                ++verdict.chains_checked;
                for (std::size_t i = 0; i < ranks; ++i) {
                    if (table[s][i] + tol < table[r][i]) {
                        verdict.ok = false;
                        verdict.witness = StepUpWitness{IndexSet::from_mask(n, r),
                                                        IndexSet::from_mask(n, s), i + 1,
                                                        table[r][i], table[s][i]};
                        return verdict;
                    }
                }
            }
            if (r == 0) break;
        }
    }
    return verdict;
}

}  // namespace seqrej

#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <vector>

#include "logic.hpp"
#include "schedule.hpp"

namespace seqrej {

namespace detail {

inline double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

// level at which `p <= level * share` first holds; share may be 0
inline double invert_linear(double p, double share) {
    if (p <= 0.0) return 0.0;
    if (share <= 0.0) return 1.0;
    return clamp01(p / share);
}

}  // namespace detail

// Step-down Bonferroni: the level is split evenly (or by weight) over the
// hypotheses not yet rejected.
inline Schedule holm(std::size_t universe_size) {
    Schedule s;
    s.id = "holm";
    s.justification = Justification::bonferroni_shaffer;
    s.alpha_of = [universe_size](std::size_t, const IndexSet& rejected, double level) {
        return level / static_cast<double>(universe_size - rejected.count());
    };
    s.inverse_alpha = [universe_size](std::size_t, const IndexSet& rejected, double p) {
        return detail::invert_linear(
            p, 1.0 / static_cast<double>(universe_size - rejected.count()));
    };
    return s;
}

inline Schedule holm_weighted(std::vector<double> weights) {
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("holm_weighted: weights must be >= 0");
        total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("holm_weighted: weights must not all be 0");
    auto wp = std::make_shared<const std::vector<double>>(std::move(weights));

    auto remaining_weight = [wp](const IndexSet& rejected) {
        double sum = 0.0;
        for (std::size_t j = 0; j < wp->size(); ++j)
            if (!rejected.test(j)) sum += (*wp)[j];
        return sum;
    };

    Schedule s;
    s.id = "holm-weighted";
    s.justification = Justification::bonferroni_shaffer;
    s.alpha_of = [wp, remaining_weight](std::size_t h, const IndexSet& rejected, double level) {
        double denom = remaining_weight(rejected);
        if (denom <= 0.0) return 0.0;
        return level * (*wp)[h] / denom;
    };
    s.inverse_alpha = [wp, remaining_weight](std::size_t h, const IndexSet& rejected, double p) {
        double denom = remaining_weight(rejected);
        if (denom <= 0.0) return p <= 0.0 ? 0.0 : 1.0;
        return detail::invert_linear(p, (*wp)[h] / denom);
    };
    return s;
}

// Step-down variant with the product-form share of the level.  Valid when
// the Sidak inequality holds for the joint p-value distribution; that is a
// caller assertion, recorded but never verified from data.
inline Schedule sidak_stepdown(std::size_t universe_size) {
    Schedule s;
    s.id = "sidak";
    s.justification = Justification::sidak;
    s.assumptions["sidak-inequality"] = "asserted by caller";
    s.alpha_of = [universe_size](std::size_t, const IndexSet& rejected, double level) {
        double m = static_cast<double>(universe_size - rejected.count());
        return 1.0 - std::pow(1.0 - level, 1.0 / m);
    };
    s.inverse_alpha = [universe_size](std::size_t, const IndexSet& rejected, double p) {
        double m = static_cast<double>(universe_size - rejected.count());
        return detail::clamp01(1.0 - std::pow(1.0 - p, m));
    };
    return s;
}

// Level divided by the largest number of hypotheses that could still be
// simultaneously true.
inline Schedule shaffer_s2(const LogicalStructure& structure) {
    auto st = std::make_shared<const LogicalStructure>(structure);
    Schedule s;
    s.id = "shaffer-s2";
    s.justification = Justification::bonferroni_shaffer;
    s.alpha_of = [st](std::size_t, const IndexSet& rejected, double level) {
        std::size_t d = st->max_true_count(rejected);
        if (d == 0) return 1.0;
        return level / static_cast<double>(d);
    };
    s.inverse_alpha = [st](std::size_t, const IndexSet& rejected, double p) {
        std::size_t d = st->max_true_count(rejected);
        if (d == 0) return 0.0;
        return detail::invert_linear(p, 1.0 / static_cast<double>(d));
    };
    return s;
}

// Per-hypothesis sharpening of the same idea: only truth assignments that
// keep H itself true matter for H's share.
inline Schedule hommel_p3(const LogicalStructure& structure) {
    auto st = std::make_shared<const LogicalStructure>(structure);

    auto denom = [st](std::size_t h, const IndexSet& rejected) -> std::size_t {
        if (st->is_free()) {
            if (rejected.test(h)) return 0;
            return st->size() - rejected.count();
        }
        std::size_t best = 0;
        for (const IndexSet& t : st->atoms()) {
            if (!t.test(h)) continue;
            if (t.intersects(rejected)) continue;
            best = std::max(best, t.count());
        }
        return best;
    };

    Schedule s;
    s.id = "hommel-p3";
    s.justification = Justification::bonferroni_shaffer;
    s.alpha_of = [denom](std::size_t h, const IndexSet& rejected, double level) {
        std::size_t d = denom(h, rejected);
        if (d == 0) return 1.0;
        return level / static_cast<double>(d);
    };
    s.inverse_alpha = [denom](std::size_t h, const IndexSet& rejected, double p) {
        std::size_t d = denom(h, rejected);
        if (d == 0) return 0.0;
        return detail::invert_linear(p, 1.0 / static_cast<double>(d));
    };
    return s;
}

// Ordered disjoint families; family j+1 opens only when families 1..j are
// completely rejected, and each open family runs its own Holm.
inline Schedule gatekeeping_serial(std::vector<IndexSet> families) {
    if (families.empty()) throw std::invalid_argument("gatekeeping_serial: no families");
    std::size_t n = families.front().universe_size();
    IndexSet seen(n);
    for (const IndexSet& g : families) {
        if (g.universe_size() != n)
            throw std::invalid_argument("gatekeeping_serial: family universe mismatch");
        if (g.empty()) throw std::invalid_argument("gatekeeping_serial: empty family");
        if (seen.intersects(g))
            throw std::invalid_argument("gatekeeping_serial: families overlap");
        seen |= g;
    }
    if (seen.count() != n)
        throw std::invalid_argument("gatekeeping_serial: families must cover the universe");

    auto fams = std::make_shared<const std::vector<IndexSet>>(std::move(families));

    // family index of h, and whether every earlier family is inside R
    auto locate = [fams](std::size_t h, const IndexSet& rejected, bool& open,
                         std::size_t& remaining_in_family) {
        open = true;
        remaining_in_family = 0;
        for (const IndexSet& g : *fams) {
            if (g.test(h)) {
                remaining_in_family = (g - rejected).count();
                return;
            }
            if (!g.is_subset_of(rejected)) open = false;
        }
        open = false;
    };

    Schedule s;
    s.id = "gatekeeping-serial";
    s.justification = Justification::bonferroni_shaffer;
    s.alpha_of = [locate](std::size_t h, const IndexSet& rejected, double level) {
        bool open;
        std::size_t m;
        locate(h, rejected, open, m);
        if (!open || m == 0) return 0.0;
        return level / static_cast<double>(m);
    };
    s.inverse_alpha = [locate](std::size_t h, const IndexSet& rejected, double p) {
        bool open;
        std::size_t m;
        locate(h, rejected, open, m);
        if (!open || m == 0) return p <= 0.0 ? 0.0 : 1.0;
        return detail::invert_linear(p, 1.0 / static_cast<double>(m));
    };
    return s;
}

// Two families; the second earns level in proportion to the fraction of the
// first already rejected.  The guilbaud flag upgrades the first family to
// Holm once the second is completely rejected.
inline Schedule gatekeeping_parallel(const IndexSet& g1, const IndexSet& g2,
                                     bool guilbaud = false) {
    std::size_t n = g1.universe_size();
    if (g2.universe_size() != n)
        throw std::invalid_argument("gatekeeping_parallel: family universe mismatch");
    if (g1.empty() || g2.empty())
        throw std::invalid_argument("gatekeeping_parallel: empty family");
    if (g1.intersects(g2)) throw std::invalid_argument("gatekeeping_parallel: families overlap");
    if ((g1 | g2).count() != n)
        throw std::invalid_argument("gatekeeping_parallel: families must cover the universe");

    auto a = std::make_shared<const IndexSet>(g1);
    auto b = std::make_shared<const IndexSet>(g2);

    Schedule s;
    s.id = guilbaud ? "gatekeeping-parallel-guilbaud" : "gatekeeping-parallel";
    s.justification = Justification::bonferroni_shaffer;
    s.alpha_of = [a, b, guilbaud](std::size_t h, const IndexSet& rejected, double level) {
        double size1 = static_cast<double>(a->count());
        if (a->test(h)) {
            if (guilbaud && b->is_subset_of(rejected)) {
                double rem = static_cast<double>((*a - rejected).count());
                if (rem == 0.0) return 0.0;
                return level / rem;
            }
            return level / size1;
        }
        double inflow = static_cast<double>((rejected & *a).count());
        double rem2 = static_cast<double>((*b - rejected).count());
        if (rem2 == 0.0 || inflow == 0.0) return 0.0;
        return level * inflow / (rem2 * size1);
    };
    s.inverse_alpha = [a, b, guilbaud](std::size_t h, const IndexSet& rejected, double p) {
        double size1 = static_cast<double>(a->count());
        if (a->test(h)) {
            if (guilbaud && b->is_subset_of(rejected)) {
                double rem = static_cast<double>((*a - rejected).count());
                if (rem == 0.0) return p <= 0.0 ? 0.0 : 1.0;
                return detail::invert_linear(p, 1.0 / rem);
            }
            return detail::invert_linear(p, 1.0 / size1);
        }
        double inflow = static_cast<double>((rejected & *a).count());
        double rem2 = static_cast<double>((*b - rejected).count());
        if (rem2 == 0.0 || inflow == 0.0) return p <= 0.0 ? 0.0 : 1.0;
        return detail::invert_linear(p, inflow / (rem2 * size1));
    };
    return s;
}

}  // namespace seqrej

#pragma once

#include <algorithm>
#include <memory>

#include "logic.hpp"
#include "schedule.hpp"

namespace seqrej {

// Tightens a schedule on rejection sets that cannot be the complete set of
// false hypotheses.  For such an R, H is rejectable as soon as it would be
// rejectable from every candidate false set strictly above R that excludes H;
// with no such candidate, H is rejected outright (critical value 1).  The
// result equals the input on candidate false sets and dominates it elsewhere.
inline Schedule improve_admissibility(const Schedule& base, const LogicalStructure& structure) {
    if (structure.is_free())
        throw std::invalid_argument(
            "improve_admissibility: free structures leave nothing to improve");
    if (base.comparison != Comparison::non_strict)
        throw std::invalid_argument("improve_admissibility: p-value schedules only");

    auto st = std::make_shared<const LogicalStructure>(structure);
    auto inner = std::make_shared<const Schedule>(base);

    Schedule out = base;
    out.id = base.id + "+restricted";

    out.alpha_of = [st, inner](std::size_t h, const IndexSet& rejected, double level) {
        if (st->is_false_set(rejected)) return inner->alpha_of(h, rejected, level);
        // candidate false sets S = complement of an atom's true set; S
        // excludes h iff h is true in the atom, and R sits strictly inside S
        // iff the atom's true set misses R (R itself is not in the family here)
        bool any = false;
        double best = 1.0;
        for (const IndexSet& atom_true : st->atoms()) {
            if (!atom_true.test(h)) continue;
            if (atom_true.intersects(rejected)) continue;
            any = true;
            best = std::min(best, inner->alpha_of(h, atom_true.complement(), level));
        }
        if (!any) return 1.0;
        return best;
    };

    if (base.inverse_alpha) {
        out.inverse_alpha = [st, inner](std::size_t h, const IndexSet& rejected, double p) {
            if (st->is_false_set(rejected)) return inner->inverse_alpha(h, rejected, p);
            bool any = false;
            double worst = 0.0;
            for (const IndexSet& atom_true : st->atoms()) {
                if (!atom_true.test(h)) continue;
                if (atom_true.intersects(rejected)) continue;
                any = true;
                worst = std::max(worst, inner->inverse_alpha(h, atom_true.complement(), p));
            }
            if (!any) return 0.0;   // critical value is 1 at every level
            return worst;
        };
    }
    return out;
}

}  // namespace seqrej

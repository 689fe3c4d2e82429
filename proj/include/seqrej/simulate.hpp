#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "index_set.hpp"
#include "logic.hpp"
#include "rng.hpp"
#include "schedule.hpp"

namespace seqrej {

// Monte Carlo estimate of an event probability with a Wilson 95% interval.
struct FwerEstimate {
    std::size_t replications = 0;
    std::size_t events = 0;
    double estimate = 0.0;
    double wilson_low = 0.0;
    double wilson_high = 1.0;
};

namespace detail {

inline void wilson_interval(FwerEstimate& e) {
    const double z = 1.959963984540054;
    double n = static_cast<double>(e.replications);
    double p = e.estimate;
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = (p + z2 / (2.0 * n)) / denom;
    double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    e.wilson_low = std::max(0.0, center - half);
    e.wilson_high = std::min(1.0, center + half);
}

}  // namespace detail

// Counts replications on which `one_rep` reports an event.  Each replicate
// draws from its own substream, so the count does not depend on evaluation
// order.
inline FwerEstimate estimate_events(std::size_t reps, std::uint64_t seed,
                                    const std::function<bool(Rng&)>& one_rep) {
    if (reps < 1) throw std::invalid_argument("estimate_events: need at least one replication");
    FwerEstimate e;
    e.replications = reps;
    for (std::size_t i = 0; i < reps; ++i) {
        Rng rng = Rng::substream(seed, i);
        if (one_rep(rng)) ++e.events;
    }
    e.estimate = static_cast<double>(e.events) / static_cast<double>(reps);
    detail::wilson_interval(e);
    return e;
}

// Familywise error: the final rejection set touches the true hypotheses.
inline FwerEstimate estimate_fwer(const std::function<IndexSet(std::span<const double>)>& decide,
                                  const std::function<std::vector<double>(Rng&)>& draw,
                                  const IndexSet& true_set, std::size_t reps,
                                  std::uint64_t seed) {
    return estimate_events(reps, seed, [&](Rng& rng) {
        std::vector<double> evidence = draw(rng);
        if (evidence.size() != true_set.universe_size())
            throw std::invalid_argument("estimate_fwer: evidence/universe size mismatch");
        return decide(evidence).intersects(true_set);
    });
}

// p-values: exact uniform for true hypotheses, uniform shrunk by a factor
// below one for false ones.
struct IndependentUniformModel {
    IndexSet true_set;
    double false_scale = 0.1;

    IndependentUniformModel(IndexSet true_hypotheses, double scale_for_false = 0.1)
        : true_set(std::move(true_hypotheses)), false_scale(scale_for_false) {
        if (!(false_scale > 0.0) || !(false_scale < 1.0))
            throw std::invalid_argument(
                "IndependentUniformModel: false-hypothesis scale must lie in (0,1)");
    }

    std::vector<double> draw(Rng& rng) const {
        std::size_t n = true_set.universe_size();
        std::vector<double> p(n);
        for (std::size_t h = 0; h < n; ++h) {
            double u = rng.uniform();
            p[h] = true_set.test(h) ? u : u * false_scale;
        }
        return p;
    }
};

// One-sided upper-tail p-values from jointly normal scores sharing one
// common factor; nonpositive shifts mark the true hypotheses.
struct EquicorrelatedNormalModel {
    double rho = 0.0;
    std::vector<double> shift;

    EquicorrelatedNormalModel(double correlation, std::vector<double> shifts)
        : rho(correlation), shift(std::move(shifts)) {
        if (!(rho >= 0.0) || !(rho < 1.0))
            throw std::invalid_argument(
                "EquicorrelatedNormalModel: correlation must lie in [0,1)");
        if (shift.empty())
            throw std::invalid_argument("EquicorrelatedNormalModel: empty shift vector");
    }

    IndexSet true_set() const {
        IndexSet t(shift.size());
        for (std::size_t h = 0; h < shift.size(); ++h)
            if (shift[h] <= 0.0) t.set(h);
        return t;
    }

    std::vector<double> draw(Rng& rng) const {
        double common = rng.normal();
        double wc = std::sqrt(rho), wi = std::sqrt(1.0 - rho);
        std::vector<double> p(shift.size());
        for (std::size_t h = 0; h < shift.size(); ++h) {
            double z = wc * common + wi * rng.normal() + shift[h];
            p[h] = 0.5 * std::erfc(z / 1.4142135623730951);  // upper tail
        }
        return p;
    }
};

// Four statistics driven by a single uniform draw: two scaled copies for the
// gate hypotheses, the raw draw and its mirror for the protected pair.  The
// protected pair is true; both gates are false.
struct AdversarialGatewayModel {
    double level;  // the level the paired procedure will be run at
    double eps;
    double t;

    AdversarialGatewayModel(double level_, double eps_, double t_)
        : level(level_), eps(eps_), t(t_) {
        if (!(level > 0.0) || !(level <= 0.5))
            throw std::invalid_argument("AdversarialGatewayModel: level must lie in (0, 1/2]");
        if (!(eps > 0.0) || !(eps < level / 2.0))
            throw std::invalid_argument(
                "AdversarialGatewayModel: eps must lie strictly between 0 and level/2");
        if (!(2.0 * eps <= t) || !(t <= eps / level))
            throw std::invalid_argument(
                "AdversarialGatewayModel: scale must lie in [2*eps, eps/level]");
    }

    std::vector<double> draw(Rng& rng) const {
        double u = rng.uniform();
        return {t * u, t * (1.0 - u), u, 1.0 - u};
    }

    IndexSet true_set() const { return IndexSet::of(4, {2, 3}); }
};

inline Universe adversarial_gateway_universe() {
    return Universe(std::vector<std::string>{"J", "K", "J'", "K'"});
}

inline LogicalStructure adversarial_gateway_structure() {
    Universe u = adversarial_gateway_universe();
    std::vector<IndexSet> atoms;
    atoms.push_back(IndexSet::of(4, {0, 1, 2, 3}));
    atoms.push_back(IndexSet::of(4, {1, 2, 3}));
    atoms.push_back(IndexSet::of(4, {0, 2, 3}));
    atoms.push_back(IndexSet::of(4, {2, 3}));
    return LogicalStructure::with_atoms(std::move(u), std::move(atoms));
}

// Deliberately broken four-hypothesis gatekeeper, shipped only as a negative
// control: each column of its critical-value table sums to at most the level,
// yet the value for J' DROPS from level - eps to level/2 when K joins J in
// the rejection set.  That non-monotonicity is exactly what inflates the
// familywise error to 2*(level - eps).
inline Schedule adversarial_gateway_schedule(double eps) {
    if (!(eps > 0.0) || !(eps < 0.25))
        throw std::invalid_argument("adversarial_gateway_schedule: eps must lie in (0, 1/4)");
    Schedule s;
    s.id = "counterexample-a";
    s.justification = Justification::bonferroni_shaffer;
    s.negative_control = true;
    s.alpha_of = [eps](std::size_t h, const IndexSet& rejected, double level) {
        bool j = rejected.test(0), k = rejected.test(1);
        switch (h) {
            case 0:
            case 1:
                return eps;
            case 2:  // J'
                if (j && k) return level / 2.0;
                if (j) return std::max(0.0, level - eps);
                return 0.0;
            default:  // K'
                if (j && k) return level / 2.0;
                if (k) return std::max(0.0, level - eps);
                return 0.0;
        }
    };
    s.inverse_alpha = [eps](std::size_t h, const IndexSet& rejected, double p) {
        bool j = rejected.test(0), k = rejected.test(1);
        if (h <= 1) return p <= eps ? 0.0 : 1.0;  // constant critical value
        bool gate_own = h == 2 ? j : k;
        if (j && k) return std::min(1.0, std::max(0.0, 2.0 * p));
        if (gate_own) return std::min(1.0, std::max(0.0, p + eps));
        return p <= 0.0 ? 0.0 : 1.0;
    };
    return s;
}

// Runs the negative control on its paired data model and estimates how often
// it rejects a true hypothesis.  The analytic value is 2*(level - eps).
inline FwerEstimate adversarial_gateway_fwer(double level, double eps, double t,
                                             std::size_t reps, std::uint64_t seed) {
    AdversarialGatewayModel model(level, eps, t);
    Schedule sched = adversarial_gateway_schedule(eps);
    return estimate_fwer(
        [&](std::span<const double> p) { return run_final(sched, p, level); },
        [&](Rng& rng) { return model.draw(rng); }, model.true_set(), reps, seed);
}

}  // namespace seqrej

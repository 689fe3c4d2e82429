#pragma once

// Shared fixtures and independent oracle implementations for the test suite.
// The oracles are deliberately written straight from the textbook descriptions
// (sort-based Holm, ascending-scan Hochberg, subset-enumeration closed
// testing) so that agreement with the engine is meaningful evidence.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include <seqrej/seqrej.hpp>

namespace fixtures {

using namespace seqrej;

// ---------------------------------------------------------------------------
// structures

// Equality of three means, tested pairwise: H12: mu1=mu2, H23: mu2=mu3,
// H13: mu1=mu3.  Possible truth patterns: all equal, exactly one pair equal,
// none equal.  Largest simultaneous truth counts: 3, 1, 0.
inline LogicalStructure pairwise_means_structure() {
    Universe u(std::vector<std::string>{"H12", "H23", "H13"});
    std::vector<IndexSet> atoms;
    atoms.push_back(IndexSet::of(3, {0, 1, 2}));
    atoms.push_back(IndexSet::of(3, {0}));
    atoms.push_back(IndexSet::of(3, {1}));
    atoms.push_back(IndexSet::of(3, {2}));
    atoms.push_back(IndexSet(3));
    return LogicalStructure::with_atoms(std::move(u), std::move(atoms));
}

// H1: mu1 <= 0, H2: mu2 <= 0, H3: mu1 + mu2 <= 0.  Both components
// nonpositive forces the sum nonpositive, so {H1, H2} alone is impossible.
inline LogicalStructure mu_sum_structure() {
    Universe u(std::vector<std::string>{"H1", "H2", "H3"});
    std::vector<IndexSet> atoms;
    atoms.push_back(IndexSet::of(3, {0, 1, 2}));
    atoms.push_back(IndexSet::of(3, {0, 2}));
    atoms.push_back(IndexSet::of(3, {0}));
    atoms.push_back(IndexSet::of(3, {1, 2}));
    atoms.push_back(IndexSet::of(3, {1}));
    atoms.push_back(IndexSet(3));
    return LogicalStructure::with_atoms(std::move(u), std::move(atoms));
}

// One-dimensional two-sided setup: H1: theta <= d, H2: theta >= -d,
// H12 = H1 and H2.  Regions theta < -d, |theta| <= d, theta > d.
inline LogicalStructure delta_structure() {
    Universe u(std::vector<std::string>{"H1", "H2", "H12"});
    std::vector<IndexSet> atoms;
    atoms.push_back(IndexSet::of(3, {0}));
    atoms.push_back(IndexSet::of(3, {0, 1, 2}));
    atoms.push_back(IndexSet::of(3, {1}));
    return LogicalStructure::with_atoms(std::move(u), std::move(atoms));
}

// Full structure over all 2^n truth assignments, as an explicit atom list.
inline LogicalStructure explicit_free_structure(std::size_t n) {
    Universe u = Universe::numbered(n);
    std::vector<IndexSet> atoms;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask)
        atoms.push_back(IndexSet::from_mask(n, mask));
    return LogicalStructure::with_atoms(std::move(u), std::move(atoms));
}

// ---------------------------------------------------------------------------
// trees

// Symmetric binary tree of four levels: 15 nodes, 8 leaves.
// Index layout: 0 root; 1-2 depth 1; 3-6 depth 2; 7-14 leaves.
inline HypothesisTree fig_tree15() {
    std::vector<std::string> labels = {"R",   "A",   "B",   "AA",  "AB",
                                       "BA",  "BB",  "AAA", "AAB", "ABA",
                                       "ABB", "BAA", "BAB", "BBA", "BBB"};
    std::vector<std::optional<std::size_t>> parent(15);
    for (std::size_t i = 1; i < 15; ++i) parent[i] = (i - 1) / 2;
    return HypothesisTree(Universe(std::move(labels)), std::move(parent));
}

// Symmetric binary tree of three levels: 7 nodes, 4 leaves.
// 0 root A; 1 B, 2 C; leaves 3 D, 4 E (under B), 5 F, 6 G (under C).
inline HypothesisTree tree7() {
    std::vector<std::string> labels = {"A", "B", "C", "D", "E", "F", "G"};
    std::vector<std::optional<std::size_t>> parent(7);
    for (std::size_t i = 1; i < 7; ++i) parent[i] = (i - 1) / 2;
    return HypothesisTree(Universe(std::move(labels)), std::move(parent));
}

// ---------------------------------------------------------------------------
// oracles

// Classic Holm by sorting: walk p ascending, stop at the first p exceeding
// level/(remaining count).
inline IndexSet holm_oracle(std::span<const double> p, double level) {
    const std::size_t n = p.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    IndexSet out(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (p[order[i]] <= level / static_cast<double>(n - i))
            out.set(order[i]);
        else
            break;
    }
    return out;
}

// Classical Holm adjustment: running maximum of (n-j+1) * p_(j), capped at 1.
inline std::vector<double> holm_adjusted_oracle(std::span<const double> p) {
    const std::size_t n = p.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    std::vector<double> adjusted(n, 0.0);
    double running = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        running = std::max(running, static_cast<double>(n - i) * p[order[i]]);
        adjusted[order[i]] = std::min(1.0, running);
    }
    return adjusted;
}

// Classic Hochberg by the ascending scan: largest i with p_(i) <= level/(n-i+1)
// rejects every hypothesis whose p-value is at most p_(i).
inline IndexSet hochberg_oracle(std::span<const double> p, double level) {
    const std::size_t n = p.size();
    std::vector<double> sorted(p.begin(), p.end());
    std::sort(sorted.begin(), sorted.end());
    double threshold = -1.0;
    for (std::size_t i = n; i >= 1; --i) {
        if (sorted[i - 1] <= level / static_cast<double>(n - i + 1)) {
            threshold = sorted[i - 1];
            break;
        }
    }
    IndexSet out(n);
    if (threshold >= 0.0)
        for (std::size_t h = 0; h < n; ++h)
            if (p[h] <= threshold) out.set(h);
    return out;
}

// Brute-force closed testing over an explicit structure: enumerate every
// subset of elementary hypotheses, intersect their truth regions, evaluate
// the local test once per distinct nonempty region (on the region's maximal
// elementary set), and reject an elementary hypothesis only if every region
// inside its own has a local p-value at or below the level.
inline IndexSet closed_testing_oracle(const LogicalStructure& st, const LocalTestProvider& local,
                                      double level) {
    const std::size_t n = st.size();
    const auto& atoms = st.atoms();
    const std::size_t m = atoms.size();

    auto region_of = [&](std::size_t h) {
        IndexSet r(m);
        for (std::size_t a = 0; a < m; ++a)
            if (atoms[a].test(h)) r.set(a);
        return r;
    };
    std::vector<IndexSet> elem_region;
    for (std::size_t h = 0; h < n; ++h) elem_region.push_back(region_of(h));

    std::map<IndexSet, double> region_p;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
        IndexSet region = IndexSet::full(m);
        for (std::size_t h = 0; h < n; ++h)
            if (mask >> h & 1) region = region & elem_region[h];
        if (region.empty()) continue;
        if (region_p.count(region)) continue;
        IndexSet maximal(n);
        for (std::size_t h = 0; h < n; ++h)
            if (region.is_subset_of(elem_region[h])) maximal.set(h);
        region_p.emplace(region, local.pvalue_of(maximal));
    }

    IndexSet out(n);
    for (std::size_t h = 0; h < n; ++h) {
        bool all_below = true;
        for (const auto& [region, pv] : region_p) {
            if (!region.is_subset_of(elem_region[h])) continue;
            if (pv > level) {
                all_below = false;
                break;
            }
        }
        if (all_below) out.set(h);
    }
    return out;
}

// ---------------------------------------------------------------------------
// randomness helpers

inline std::vector<double> random_pvector(Rng& rng, std::size_t n) {
    std::vector<double> p(n);
    for (double& v : p) v = rng.uniform();
    return p;
}

// Mixed signal: a few small p-values so rejection cascades actually happen.
inline std::vector<double> random_signal_pvector(Rng& rng, std::size_t n) {
    std::vector<double> p(n);
    for (double& v : p) {
        double u = rng.uniform();
        v = rng.uniform() < 0.5 ? u * 0.05 : u;
    }
    return p;
}

}  // namespace fixtures

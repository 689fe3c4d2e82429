#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "logic.hpp"
#include "procedures.hpp"
#include "schedule.hpp"

namespace seqrej {

// Rooted tree (or forest) of hypotheses in which each parent stands for the
// intersection of its children: a parent can only be true when every
// descendant leaf is true.
class HypothesisTree {
public:
    HypothesisTree(Universe u, std::vector<std::optional<std::size_t>> parent)
        : universe_(std::move(u)), parent_(std::move(parent)) {
        std::size_t n = universe_.size();
        if (parent_.size() != n)
            throw std::invalid_argument("HypothesisTree: parent list length mismatch");
        children_.assign(n, {});
        for (std::size_t v = 0; v < n; ++v) {
            if (!parent_[v]) {
                roots_.push_back(v);
                continue;
            }
            std::size_t p = *parent_[v];
            if (p >= n)
                throw std::invalid_argument("HypothesisTree: parent index outside universe");
            if (p == v) throw std::invalid_argument("HypothesisTree: node is its own parent");
            children_[p].push_back(v);
        }
        if (roots_.empty()) throw std::invalid_argument("HypothesisTree: no root (cycle)");

        depth_.assign(n, 0);
        for (std::size_t v = 0; v < n; ++v) {
            std::size_t hops = 0, cur = v;
            while (parent_[cur]) {
                cur = *parent_[cur];
                if (++hops > n)
                    throw std::invalid_argument("HypothesisTree: parent pointers form a cycle");
            }
            depth_[v] = hops;
        }

        by_depth_desc_.resize(n);
        for (std::size_t v = 0; v < n; ++v) by_depth_desc_[v] = v;
        std::sort(by_depth_desc_.begin(), by_depth_desc_.end(),
                  [&](std::size_t a, std::size_t b) { return depth_[a] > depth_[b]; });

        leaves_ = IndexSet(n);
        leaf_weight_.assign(n, 0);
        offspring_.assign(n, IndexSet(n));
        for (std::size_t v : by_depth_desc_) {
            if (children_[v].empty()) {
                leaves_.set(v);
                leaf_weight_[v] = 1;
            } else {
                for (std::size_t c : children_[v]) {
                    leaf_weight_[v] += leaf_weight_[c];
                    offspring_[v].set(c);
                    offspring_[v] |= offspring_[c];
                }
            }
        }

        ancestors_.assign(n, IndexSet(n));
        for (std::size_t v = 0; v < n; ++v) {
            std::size_t cur = v;
            while (parent_[cur]) {
                cur = *parent_[cur];
                ancestors_[v].set(cur);
            }
        }

        detect_symmetry();
    }

    const Universe& universe() const { return universe_; }
    std::size_t size() const { return universe_.size(); }
    const std::vector<std::optional<std::size_t>>& parent() const { return parent_; }
    const std::vector<std::vector<std::size_t>>& children() const { return children_; }
    const std::vector<std::size_t>& roots() const { return roots_; }
    bool is_leaf(std::size_t v) const { return children_.at(v).empty(); }
    const IndexSet& leaves() const { return leaves_; }
    std::size_t leaf_count() const { return leaves_.count(); }
    // leaves at or below v (a leaf counts itself)
    std::size_t descendant_leaves(std::size_t v) const { return leaf_weight_.at(v); }
    const IndexSet& ancestors(std::size_t v) const { return ancestors_.at(v); }
    const IndexSet& offspring(std::size_t v) const { return offspring_.at(v); }
    bool symmetric_binary() const { return symmetric_binary_; }

    // sibling leaf pairs; defined exactly when every leaf's sibling is a leaf
    const std::vector<std::pair<std::size_t, std::size_t>>& leaf_pairs() const {
        if (!paired_)
            throw std::domain_error("HypothesisTree: leaves do not come in sibling pairs");
        return leaf_pairs_;
    }

    // Atoms = every truth assignment of the leaves; an inner node is true
    // exactly when all of its children are.
    LogicalStructure induced_structure() const {
        std::size_t n = universe_.size();
        std::vector<std::size_t> leaf_ids = leaves_.members();
        if (leaf_ids.size() > 20)
            throw std::domain_error(
                "HypothesisTree: refusing to enumerate assignments beyond 20 leaves");
        std::vector<IndexSet> atoms;
        atoms.reserve(std::size_t{1} << leaf_ids.size());
        std::vector<char> truth(n, 0);
        for (std::uint64_t m = 0; m < (std::uint64_t{1} << leaf_ids.size()); ++m) {
            for (std::size_t i = 0; i < leaf_ids.size(); ++i)
                truth[leaf_ids[i]] = (m >> i) & 1 ? 1 : 0;
            for (std::size_t v : by_depth_desc_) {
                if (children_[v].empty()) continue;
                char all = 1;
                for (std::size_t c : children_[v]) all &= truth[c];
                truth[v] = all;
            }
            IndexSet t(n);
            for (std::size_t v = 0; v < n; ++v)
                if (truth[v]) t.set(v);
            atoms.push_back(std::move(t));
        }
        return LogicalStructure::with_atoms(universe_, std::move(atoms));
    }

private:
    void detect_symmetry() {
        std::size_t n = universe_.size();
        std::vector<std::string> shape(n);
        bool zero_or_two = true;
        for (std::size_t v : by_depth_desc_) {
            const auto& ch = children_[v];
            if (ch.empty()) {
                shape[v] = "L";
            } else if (ch.size() == 2) {
                const std::string& a = shape[ch[0]];
                const std::string& b = shape[ch[1]];
                shape[v] = "(" + (a <= b ? a + b : b + a) + ")";
            } else {
                zero_or_two = false;
                shape[v] = "?";
            }
        }
        symmetric_binary_ = zero_or_two && roots_.size() == 1;
        if (symmetric_binary_)
            for (std::size_t v = 0; v < n && symmetric_binary_; ++v)
                if (children_[v].size() == 2 &&
                    shape[children_[v][0]] != shape[children_[v][1]])
                    symmetric_binary_ = false;

        paired_ = true;
        leaf_pairs_.clear();
        leaves_.for_each_member([&](std::size_t v) {
            if (!paired_) return;
            if (!parent_[v]) {
                paired_ = false;
                return;
            }
            const auto& sib = children_[*parent_[v]];
            if (sib.size() != 2 || !is_leaf(sib[0]) || !is_leaf(sib[1])) {
                paired_ = false;
                return;
            }
            if (v == sib[0]) leaf_pairs_.emplace_back(sib[0], sib[1]);
        });
        if (!paired_) leaf_pairs_.clear();
    }

    Universe universe_;
    std::vector<std::optional<std::size_t>> parent_;
    std::vector<std::vector<std::size_t>> children_;
    std::vector<std::size_t> roots_;
    std::vector<std::size_t> depth_;
    std::vector<std::size_t> by_depth_desc_;
    IndexSet leaves_;
    std::vector<std::size_t> leaf_weight_;
    std::vector<IndexSet> ancestors_;
    std::vector<IndexSet> offspring_;
    bool symmetric_binary_ = false;
    bool paired_ = false;
    std::vector<std::pair<std::size_t, std::size_t>> leaf_pairs_;
};

namespace detail {

inline double tree_value(double level, double weight, double denom) {
    if (denom <= 0.0) return 1.0;
    return clamp01(level * weight / denom);
}

inline double tree_inverse(double p, double weight, double denom) {
    if (denom <= 0.0) return 0.0;  // critical value pinned at 1: any p qualifies
    return invert_linear(p, weight / denom);
}

}  // namespace detail

// Top-down testing: a node opens once all its ancestors are rejected, at a
// share of the level proportional to its descendant-leaf count.
inline Schedule tree_basic(const HypothesisTree& tree) {
    auto t = std::make_shared<const HypothesisTree>(tree);
    double total = static_cast<double>(t->leaf_count());
    Schedule s;
    s.id = "tree-basic";
    s.justification = Justification::bonferroni_shaffer;
    s.alpha_of = [t, total](std::size_t h, const IndexSet& rejected, double level) {
        if (!t->ancestors(h).is_subset_of(rejected)) return 0.0;
        return detail::tree_value(level, static_cast<double>(t->descendant_leaves(h)), total);
    };
    s.inverse_alpha = [t, total](std::size_t h, const IndexSet& rejected, double p) {
        if (!t->ancestors(h).is_subset_of(rejected)) return p <= 0.0 ? 0.0 : 1.0;
        return detail::tree_inverse(p, static_cast<double>(t->descendant_leaves(h)), total);
    };
    return s;
}

// Same gate, but the denominator shrinks to the number of unrejected leaves.
inline Schedule tree_improved(const HypothesisTree& tree) {
    auto t = std::make_shared<const HypothesisTree>(tree);
    Schedule s;
    s.id = "tree-improved";
    s.justification = Justification::bonferroni_shaffer;
    auto open_leaves = [t](const IndexSet& rejected) {
        return static_cast<double>((t->leaves() - rejected).count());
    };
    s.alpha_of = [t, open_leaves](std::size_t h, const IndexSet& rejected, double level) {
        if (!t->ancestors(h).is_subset_of(rejected)) return 0.0;
        return detail::tree_value(level, static_cast<double>(t->descendant_leaves(h)),
                                  open_leaves(rejected));
    };
    s.inverse_alpha = [t, open_leaves](std::size_t h, const IndexSet& rejected, double p) {
        if (!t->ancestors(h).is_subset_of(rejected)) return p <= 0.0 ? 0.0 : 1.0;
        return detail::tree_inverse(p, static_cast<double>(t->descendant_leaves(h)),
                                    open_leaves(rejected));
    };
    return s;
}

namespace detail {

inline std::shared_ptr<const HypothesisTree> require_paired(const HypothesisTree& tree,
                                                            const char* who) {
    if (!tree.symmetric_binary() || tree.leaf_count() < 2)
        throw std::invalid_argument(std::string(who) +
                                    ": requires a symmetric binary tree with paired leaves");
    (void)tree.leaf_pairs();  // pairing is guaranteed by symmetry; fail loudly otherwise
    return std::make_shared<const HypothesisTree>(tree);
}

// weight on the pair scale: an inner node owns half its leaves as pairs, a
// leaf counts as one (its sibling must already be false for it to be tested)
inline double pair_weight(const HypothesisTree& t, std::size_t h) {
    if (t.is_leaf(h)) return 1.0;
    return static_cast<double>(t.descendant_leaves(h)) / 2.0;
}

inline double open_pairs(const HypothesisTree& t, const IndexSet& rejected) {
    double c = 0.0;
    for (const auto& [a, b] : t.leaf_pairs())
        if (!rejected.test(a) || !rejected.test(b)) c += 1.0;
    return c;
}

}  // namespace detail

// Doubled leaf values on symmetric binary trees: counting sibling leaf pairs
// instead of leaves lets each leaf spend its pair's whole share.
inline Schedule tree_shaffer(const HypothesisTree& tree) {
    auto t = detail::require_paired(tree, "tree_shaffer");
    double total_pairs = static_cast<double>(t->leaf_count()) / 2.0;
    Schedule s;
    s.id = "tree-shaffer";
    s.justification = Justification::bonferroni_shaffer;
    s.alpha_of = [t, total_pairs](std::size_t h, const IndexSet& rejected, double level) {
        if (!t->ancestors(h).is_subset_of(rejected)) return 0.0;
        return detail::tree_value(level, detail::pair_weight(*t, h), total_pairs);
    };
    s.inverse_alpha = [t, total_pairs](std::size_t h, const IndexSet& rejected, double p) {
        if (!t->ancestors(h).is_subset_of(rejected)) return p <= 0.0 ? 0.0 : 1.0;
        return detail::tree_inverse(p, detail::pair_weight(*t, h), total_pairs);
    };
    return s;
}

// Pair-counting variant with a shrinking denominator: only pairs that are not
// yet completely rejected still claim a share.
inline Schedule tree_shaffer_improved(const HypothesisTree& tree) {
    auto t = detail::require_paired(tree, "tree_shaffer_improved");
    Schedule s;
    s.id = "tree-shaffer-improved";
    s.justification = Justification::bonferroni_shaffer;
    s.alpha_of = [t](std::size_t h, const IndexSet& rejected, double level) {
        if (!t->ancestors(h).is_subset_of(rejected)) return 0.0;
        return detail::tree_value(level, detail::pair_weight(*t, h),
                                  detail::open_pairs(*t, rejected));
    };
    s.inverse_alpha = [t](std::size_t h, const IndexSet& rejected, double p) {
        if (!t->ancestors(h).is_subset_of(rejected)) return p <= 0.0 ? 0.0 : 1.0;
        return detail::tree_inverse(p, detail::pair_weight(*t, h),
                                    detail::open_pairs(*t, rejected));
    };
    return s;
}

// Sharpest leaf-count denominator: discount every rejected node that has no
// rejected offspring (the fringe of the rejected subgraph), so a rejected
// inner node frees budget even before any of its leaves falls.
inline Schedule tree_improved_II(const HypothesisTree& tree) {
    auto t = std::make_shared<const HypothesisTree>(tree);
    double total = static_cast<double>(t->leaf_count());
    Schedule s;
    s.id = "tree-improved-ii";
    s.justification = Justification::bonferroni_shaffer;
    auto denom = [t, total](const IndexSet& rejected) {
        double fringe = 0.0;
        rejected.for_each_member([&](std::size_t v) {
            if (!t->offspring(v).intersects(rejected)) fringe += 1.0;
        });
        return total - fringe;
    };
    s.alpha_of = [t, denom](std::size_t h, const IndexSet& rejected, double level) {
        if (!t->ancestors(h).is_subset_of(rejected)) return 0.0;
        return detail::tree_value(level, static_cast<double>(t->descendant_leaves(h)),
                                  denom(rejected));
    };
    s.inverse_alpha = [t, denom](std::size_t h, const IndexSet& rejected, double p) {
        if (!t->ancestors(h).is_subset_of(rejected)) return p <= 0.0 ? 0.0 : 1.0;
        return detail::tree_inverse(p, static_cast<double>(t->descendant_leaves(h)),
                                    denom(rejected));
    };
    return s;
}

}  // namespace seqrej

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "index_set.hpp"
#include "universe.hpp"

namespace seqrej {

// Family of subsets of one universe.  Either an explicit list or, for
// structures without logical constraints, the full power set kept implicit.
class SetFamily {
public:
    static SetFamily explicit_family(std::size_t universe_size, std::vector<IndexSet> sets) {
        SetFamily f;
        f.n_ = universe_size;
        f.free_ = false;
        std::sort(sets.begin(), sets.end(), [](const IndexSet& a, const IndexSet& b) {
            if (a.count() != b.count()) return a.count() < b.count();
            return a < b;
        });
        sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
        f.sets_ = std::move(sets);
        f.lookup_.insert(f.sets_.begin(), f.sets_.end());
        return f;
    }

    static SetFamily power_set(std::size_t universe_size) {
        SetFamily f;
        f.n_ = universe_size;
        f.free_ = true;
        return f;
    }

    bool contains(const IndexSet& s) const {
        if (s.universe_size() != n_)
            throw std::invalid_argument("SetFamily: universe size mismatch");
        if (free_) return true;
        return lookup_.count(s) > 0;
    }

    std::uint64_t size() const {
        if (free_) {
            if (n_ >= 64) throw std::domain_error("SetFamily: power set size overflows");
            return std::uint64_t{1} << n_;
        }
        return sets_.size();
    }

    // Enumerates every member.  The implicit power set is only walked for
    // universes of at most 20 hypotheses; beyond that it is never materialized.
    template <class F>
    void for_each(F&& f) const {
        if (free_) {
            if (n_ > 20)
                throw std::domain_error(
                    "SetFamily: refusing to enumerate power set beyond 20 hypotheses");
            std::uint64_t top = std::uint64_t{1} << n_;
            for (std::uint64_t m = 0; m < top; ++m) f(IndexSet::from_mask(n_, m));
            return;
        }
        for (const IndexSet& s : sets_) f(s);
    }

    bool is_power_set() const { return free_; }
    const std::vector<IndexSet>& listed() const { return sets_; }

private:
    std::size_t n_ = 0;
    bool free_ = true;
    std::vector<IndexSet> sets_;
    std::unordered_set<IndexSet, IndexSetHash> lookup_;
};

// Logical relationships between hypotheses, encoded as the collection of
// possible truth assignments.  Each atom lists the hypotheses that are true
// in one reachable state of nature; every hypothesis outside it is false.
class LogicalStructure {
public:
    static LogicalStructure free_form(Universe u) {
        LogicalStructure s;
        s.universe_ = std::move(u);
        s.free_ = true;
        return s;
    }

    static LogicalStructure with_atoms(Universe u, std::vector<IndexSet> atom_true_sets) {
        LogicalStructure s;
        s.universe_ = std::move(u);
        s.free_ = false;
        if (atom_true_sets.empty())
            throw std::invalid_argument("LogicalStructure: at least one atom required");
        std::unordered_set<IndexSet, IndexSetHash> seen;
        for (const IndexSet& t : atom_true_sets) {
            if (t.universe_size() != s.universe_.size())
                throw std::invalid_argument("LogicalStructure: atom universe size mismatch");
            if (!seen.insert(t).second)
                throw std::invalid_argument("LogicalStructure: duplicate atom truth assignment");
        }
        s.atoms_ = std::move(atom_true_sets);
        return s;
    }

    const Universe& universe() const { return universe_; }
    std::size_t size() const { return universe_.size(); }
    bool is_free() const { return free_; }

    const std::vector<IndexSet>& atoms() const {
        if (free_)
            throw std::domain_error("LogicalStructure: free structure has implicit atoms");
        return atoms_;
    }

    // Largest number of hypotheses that can still be simultaneously true once
    // everything in `rejected` is treated as false.
    std::size_t max_true_count(const IndexSet& rejected) const {
        check_set(rejected);
        if (free_) return universe_.size() - rejected.count();
        std::size_t best = 0;
        bool any = false;
        for (const IndexSet& t : atoms_) {
            if (t.intersects(rejected)) continue;
            any = true;
            best = std::max(best, t.count());
        }
        if (!any) return 0;
        return best;
    }

    // True when some atom is wholly consistent with `rejected` being exactly
    // the false hypotheses.
    bool is_false_set(const IndexSet& rejected) const {
        check_set(rejected);
        if (free_) return true;
        for (const IndexSet& t : atoms_)
            if (t == rejected.complement()) return true;
        return false;
    }

    // The family of candidate false sets, one per atom.
    SetFamily false_sets() const {
        if (free_) return SetFamily::power_set(universe_.size());
        std::vector<IndexSet> out;
        out.reserve(atoms_.size());
        for (const IndexSet& t : atoms_) out.push_back(t.complement());
        return SetFamily::explicit_family(universe_.size(), std::move(out));
    }

    // Explicit-atom rendering of a free structure; used for small-universe
    // equivalence checks.
    static LogicalStructure all_assignments(Universe u) {
        std::size_t n = u.size();
        if (n > 20)
            throw std::domain_error("LogicalStructure: refusing to expand beyond 20 hypotheses");
        std::vector<IndexSet> atoms;
        atoms.reserve(std::size_t{1} << n);
        for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m)
            atoms.push_back(IndexSet::from_mask(n, m));
        return with_atoms(std::move(u), std::move(atoms));
    }

private:
    void check_set(const IndexSet& s) const {
        if (s.universe_size() != universe_.size())
            throw std::invalid_argument("LogicalStructure: set universe size mismatch");
    }

    Universe universe_;
    bool free_ = true;
    std::vector<IndexSet> atoms_;
};

}  // namespace seqrej

#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "local_tests.hpp"
#include "logic.hpp"
#include "schedule.hpp"

namespace seqrej {

// A procedure that runs on an enlarged universe: the original (elementary)
// hypotheses plus derived ones (intersections, partition pieces).  The
// elementary_node map projects results back to the input universe.
struct ExtendedProcedure {
    Universe extended;
    std::vector<IndexSet> node_atoms;       // per node, over the atom universe
    std::vector<IndexSet> node_elementary;  // per node, elementary hypotheses true wherever it is
    std::vector<std::size_t> elementary_node;
    LogicalStructure extended_structure;
    Schedule schedule;
    std::vector<double> pvalues;

    IndexSet project(const IndexSet& extended_rejected) const {
        IndexSet out(elementary_node.size());
        for (std::size_t i = 0; i < elementary_node.size(); ++i)
            if (extended_rejected.test(elementary_node[i])) out.set(i);
        return out;
    }
};

namespace detail {

struct NodeTable {
    std::vector<IndexSet> atom_sets;                               // per node
    std::unordered_map<IndexSet, std::size_t, IndexSetHash> index;  // atom set -> node

    std::size_t intern(const IndexSet& atoms) {
        auto it = index.find(atoms);
        if (it != index.end()) return it->second;
        std::size_t id = atom_sets.size();
        atom_sets.push_back(atoms);
        index.emplace(atoms, id);
        return id;
    }
};

// atom sets of the elementary hypotheses; atom universe = structure's atoms
inline std::vector<IndexSet> elementary_atom_sets(const LogicalStructure& st) {
    const auto& atoms = st.atoms();
    std::size_t m = atoms.size(), n = st.size();
    std::vector<IndexSet> out(n, IndexSet(m));
    for (std::size_t a = 0; a < m; ++a)
        atoms[a].for_each_member([&](std::size_t h) { out[h].set(a); });
    for (std::size_t h = 0; h < n; ++h)
        if (out[h].empty())
            throw std::invalid_argument("hypothesis '" + st.universe().label(h) +
                                        "' is true in no atom (empty as a region)");
    return out;
}

inline LogicalStructure explicit_form(const LogicalStructure& st, std::size_t cap) {
    if (!st.is_free()) return st;
    if (st.size() > 20 || (std::size_t{1} << st.size()) > cap * 2)
        throw std::invalid_argument("free structure too large to expand into atoms");
    return LogicalStructure::all_assignments(st.universe());
}

inline std::string composite_label(const Universe& u, const IndexSet& elems) {
    std::vector<std::string> parts;
    elems.for_each_member([&](std::size_t j) { parts.push_back(u.label(j)); });
    std::sort(parts.begin(), parts.end());
    std::string out = "{";
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ",";
        out += parts[i];
    }
    out += "}";
    return out;
}

// Builds the shared parts of an extended procedure: universe labels, atom
// lifting, elementary projection.  label_overrides, when given, names
// specific nodes directly (partition pieces, whose derived label could
// collide with an elementary node covering the same hypotheses).
inline void finish_extended(ExtendedProcedure& out, const LogicalStructure& elem_structure,
                            const std::vector<IndexSet>& elem_sets, const NodeTable& nodes,
                            const std::map<std::size_t, std::string>* label_overrides = nullptr) {
    const auto& atoms = elem_structure.atoms();
    std::size_t node_count = nodes.atom_sets.size();
    std::size_t elem_count = elem_sets.size();

    out.node_atoms = nodes.atom_sets;
    out.node_elementary.assign(node_count, IndexSet(elem_count));
    for (std::size_t v = 0; v < node_count; ++v)
        for (std::size_t j = 0; j < elem_count; ++j)
            if (nodes.atom_sets[v].is_subset_of(elem_sets[j])) out.node_elementary[v].set(j);

    out.elementary_node.assign(elem_count, 0);
    for (std::size_t j = 0; j < elem_count; ++j)
        out.elementary_node[j] = nodes.index.at(elem_sets[j]);

    // A node whose region coincides with an elementary hypothesis keeps that
    // hypothesis's name (several, if logically equivalent hypotheses share it).
    std::vector<IndexSet> home(node_count, IndexSet(elem_count));
    for (std::size_t j = 0; j < elem_count; ++j) home[out.elementary_node[j]].set(j);

    std::vector<std::string> labels(node_count);
    for (std::size_t v = 0; v < node_count; ++v) {
        if (home[v].count() == 1) {
            labels[v] = elem_structure.universe().label(home[v].members().front());
            continue;
        }
        if (home[v].count() > 1) {
            labels[v] = composite_label(elem_structure.universe(), home[v]);
            continue;
        }
        if (label_overrides) {
            auto it = label_overrides->find(v);
            if (it != label_overrides->end()) {
                labels[v] = it->second;
                continue;
            }
        }
        const IndexSet& elems = out.node_elementary[v];
        if (elems.count() == 1)
            labels[v] = elem_structure.universe().label(elems.members().front());
        else
            labels[v] = composite_label(elem_structure.universe(), elems);
    }
    out.extended = Universe(std::move(labels));

    // lift each elementary atom: node true iff the atom lies in its region
    std::vector<IndexSet> lifted;
    lifted.reserve(atoms.size());
    for (std::size_t a = 0; a < atoms.size(); ++a) {
        IndexSet t(node_count);
        for (std::size_t v = 0; v < node_count; ++v)
            if (nodes.atom_sets[v].test(a)) t.set(v);
        lifted.push_back(t);
    }
    out.extended_structure =
        LogicalStructure::with_atoms(out.extended, std::move(lifted));
}

}  // namespace detail

// Closure of the elementary hypotheses under nonempty intersection, with the
// classical schedule: a node is testable at the full level once every node
// strictly inside it is rejected, and untestable before that.
inline ExtendedProcedure closed_testing(const LogicalStructure& elementary,
                                        const LocalTestProvider& local,
                                        std::size_t closure_cap = std::size_t{1} << 16) {
    LogicalStructure st = detail::explicit_form(elementary, closure_cap);
    std::vector<IndexSet> elem_sets = detail::elementary_atom_sets(st);

    detail::NodeTable nodes;
    for (const IndexSet& s : elem_sets) nodes.intern(s);
    for (std::size_t v = 0; v < nodes.atom_sets.size(); ++v) {
        for (const IndexSet& e : elem_sets) {
            IndexSet meet = nodes.atom_sets[v] & e;
            if (meet.empty()) continue;
            nodes.intern(meet);
            if (nodes.atom_sets.size() > closure_cap)
                throw std::length_error("closed_testing: closure exceeds the size cap");
        }
    }

    ExtendedProcedure out;
    detail::finish_extended(out, st, elem_sets, nodes);

    std::size_t node_count = nodes.atom_sets.size();
    out.pvalues.resize(node_count);
    for (std::size_t v = 0; v < node_count; ++v)
        out.pvalues[v] = local.pvalue_of(out.node_elementary[v]);

    // strict-subset implication sets, precomputed for modest closures
    auto atom_sets = std::make_shared<const std::vector<IndexSet>>(nodes.atom_sets);
    std::shared_ptr<const std::vector<IndexSet>> implied;
    if (node_count <= 4096) {
        std::vector<IndexSet> imp(node_count, IndexSet(node_count));
        for (std::size_t v = 0; v < node_count; ++v)
            for (std::size_t w = 0; w < node_count; ++w)
                if (w != v && (*atom_sets)[w].is_strict_subset_of((*atom_sets)[v]))
                    imp[v].set(w);
        implied = std::make_shared<const std::vector<IndexSet>>(std::move(imp));
    }

    Schedule sched;
    sched.id = "closed-testing";
    sched.justification = Justification::bonferroni_shaffer;
    sched.alpha_of = [atom_sets, implied](std::size_t v, const IndexSet& rejected, double level) {
        if (implied) {
            return (*implied)[v].is_subset_of(rejected) ? level : 0.0;
        }
        for (std::size_t w = 0; w < atom_sets->size(); ++w) {
            if (w == v || rejected.test(w)) continue;
            if ((*atom_sets)[w].is_strict_subset_of((*atom_sets)[v])) return 0.0;
        }
        return level;
    };
    sched.inverse_alpha = [sched_alpha = sched.alpha_of](std::size_t v, const IndexSet& rejected,
                                                         double p) {
        bool open = sched_alpha(v, rejected, 1.0) > 0.0;
        if (!open) return p <= 0.0 ? 0.0 : 1.0;
        return std::min(1.0, std::max(0.0, p));
    };
    out.schedule = std::move(sched);
    return out;
}

// Disjoint decomposition: one hypothesis per reachable truth assignment with
// at least one true hypothesis, each tested at the full level; an original
// hypothesis falls once the pieces covering its region are all rejected.
inline ExtendedProcedure partitioning(const LogicalStructure& elementary,
                                      const LocalTestProvider& local) {
    LogicalStructure st = detail::explicit_form(elementary, std::size_t{1} << 16);
    std::vector<IndexSet> elem_sets = detail::elementary_atom_sets(st);
    const auto& atoms = st.atoms();

    detail::NodeTable nodes;
    for (const IndexSet& s : elem_sets) nodes.intern(s);
    const std::size_t elementary_nodes = nodes.atom_sets.size();
    std::map<std::size_t, std::string> piece_labels;
    for (std::size_t a = 0; a < atoms.size(); ++a) {
        if (atoms[a].empty()) continue;  // no true hypothesis there: not a null piece
        IndexSet single(atoms.size());
        single.set(a);
        std::size_t id = nodes.intern(single);
        // a piece coinciding with an elementary region keeps that label
        if (id >= elementary_nodes) piece_labels[id] = "piece-a" + std::to_string(a + 1);
    }

    ExtendedProcedure out;
    detail::finish_extended(out, st, elem_sets, nodes, &piece_labels);

    std::size_t node_count = nodes.atom_sets.size();
    out.pvalues.resize(node_count);
    for (std::size_t v = 0; v < node_count; ++v)
        out.pvalues[v] = local.pvalue_of(out.node_elementary[v]);

    auto atom_sets = std::make_shared<const std::vector<IndexSet>>(nodes.atom_sets);
    auto in_partition = std::make_shared<const std::vector<bool>>([&] {
        std::vector<bool> f(node_count, false);
        for (std::size_t v = 0; v < node_count; ++v)
            f[v] = (*atom_sets)[v].count() == 1 && !atoms[(*atom_sets)[v].members().front()].empty();
        return f;
    }());

    Schedule sched;
    sched.id = "partitioning";
    sched.justification = Justification::bonferroni_shaffer;
    sched.alpha_of = [atom_sets, in_partition](std::size_t v, const IndexSet& rejected,
                                               double level) {
        if ((*in_partition)[v]) return level;
        IndexSet covered(atom_sets->front().universe_size());
        rejected.for_each_member([&](std::size_t w) { covered |= (*atom_sets)[w]; });
        return (*atom_sets)[v].is_subset_of(covered) ? 1.0 : 0.0;
    };
    sched.inverse_alpha = [atom_sets, in_partition](std::size_t v, const IndexSet& rejected,
                                                    double p) {
        if ((*in_partition)[v]) return std::min(1.0, std::max(0.0, p));
        IndexSet covered(atom_sets->front().universe_size());
        rejected.for_each_member([&](std::size_t w) { covered |= (*atom_sets)[w]; });
        if ((*atom_sets)[v].is_subset_of(covered)) return 0.0;  // critical value 1 at any level
        return p <= 0.0 ? 0.0 : 1.0;
    };
    out.schedule = std::move(sched);
    return out;
}

}  // namespace seqrej

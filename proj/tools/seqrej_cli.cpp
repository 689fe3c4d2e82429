// Command-line front end: run, adjust, simulate, and check sequentially
// rejective multiple-testing procedures from CSV/JSON inputs, with
// reproducible seeded reports.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <seqrej/io.hpp>
#include <seqrej/seqrej.hpp>

namespace {

using nlohmann::json;
using namespace seqrej;

// configuration / input problems -> exit 2 (distinct from library logic errors)
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const std::vector<std::string> kPublicProcedures = {
    "holm",          "holm-weighted",      "sidak",
    "shaffer-s2",    "hommel-p3",          "hochberg",
    "shaffer-stepup", "gatekeeping-serial", "gatekeeping-parallel",
    "tree-basic",    "tree-improved",      "tree-shaffer",
    "tree-shaffer-improved", "tree-improved-ii", "closed-testing",
    "partitioning",  "maxt"};

struct Options {
    std::string procedure;
    double alpha = 0.05;
    std::string pvalues_path;
    std::string structure_path;
    std::string tree_path;
    std::string families_path;
    std::string data_path;
    std::string group_col;
    std::string transforms;
    std::string transforms_file;
    std::string statistic;  // mean | t | two-sample-diff; default depends on --transforms
    std::string positive_group;
    std::size_t n_perms = 0;  // 0 = full enumeration
    std::uint64_t seed = 1;
    std::size_t reps = 10000;
    std::string model;
    std::string out_path;
    std::string format = "json";
    std::size_t n_hyp = 0;
    std::vector<double> weights;
    std::size_t k_bound = 0;  // 0 = unbounded
    bool guilbaud = false;
    bool sampled_check = false;
    std::string local = "bonferroni";
    std::string local_file;
    double false_scale = 0.1;
    double rho = 0.0;
    std::vector<double> shift;
    std::vector<std::string> true_labels;
    double eps = 0.1;
    double t_scale = 0.22;
};

[[noreturn]] void fail(const std::string& msg) { throw UsageError(msg); }

void check_alpha(double a) {
    if (!(a > 0.0) || !(a < 1.0)) fail("--alpha must lie strictly between 0 and 1");
}

json config_json(const std::string& subcommand, const Options& o) {
    json inputs = json::object();
    auto put = [&](const char* key, const std::string& v) {
        if (!v.empty()) inputs[key] = v;
    };
    put("pvalues", o.pvalues_path);
    put("structure", o.structure_path);
    put("tree", o.tree_path);
    put("families", o.families_path);
    put("data", o.data_path);
    put("transforms_file", o.transforms_file);
    put("local_file", o.local_file);
    json params = json::object();
    if (!o.weights.empty()) params["weights"] = o.weights;
    if (o.k_bound > 0) params["k_bound"] = o.k_bound;
    if (o.guilbaud) params["guilbaud"] = true;
    if (!o.group_col.empty()) params["group_col"] = o.group_col;
    if (!o.transforms.empty()) {
        params["transforms"] = o.transforms;
        params["n_perms"] = o.n_perms;
        if (!o.statistic.empty()) params["statistic"] = o.statistic;
        if (!o.positive_group.empty()) params["positive_group"] = o.positive_group;
    }
    if (o.procedure == "closed-testing" || o.procedure == "partitioning")
        params["local"] = o.local;
    if (o.procedure == "counterexample-a") params["eps"] = o.eps;
    if (!o.model.empty()) {
        json m = json::object();
        m["kind"] = o.model;
        if (o.model == "independent-uniform") {
            m["false_scale"] = o.false_scale;
            if (!o.true_labels.empty()) m["true_set"] = o.true_labels;
        } else if (o.model == "equicorrelated-normal") {
            m["rho"] = o.rho;
            if (!o.shift.empty()) m["shift"] = o.shift;
        } else if (o.model == "counterexample-a") {
            m["eps"] = o.eps;
            m["t"] = o.t_scale;
        }
        params["model"] = m;
        params["reps"] = o.reps;
    }
    return json{{"subcommand", subcommand}, {"procedure", o.procedure},
                {"alpha", o.alpha},         {"seed", o.seed},
                {"format", o.format},       {"inputs", inputs},
                {"parameters", params}};
}

void emit(const Options& o, const std::string& text) {
    if (o.out_path.empty()) {
        std::cout << text << "\n";
        return;
    }
    std::ofstream f(o.out_path);
    if (!f) fail("cannot write --out file: " + o.out_path);
    f << text << "\n";
}

// ---------------------------------------------------------------------------
// universe + procedure assembly

Universe resolve_universe(const Options& o, const io::PvalueTable* table) {
    if (table) return table->universe;
    if (!o.structure_path.empty()) {
        std::ifstream in(o.structure_path);
        if (!in) fail("cannot open --structure file: " + o.structure_path);
        return io::parse_labels(json::parse(in));
    }
    if (!o.tree_path.empty()) {
        std::ifstream in(o.tree_path);
        if (!in) fail("cannot open --tree file: " + o.tree_path);
        return io::parse_labels(json::parse(in));
    }
    if (!o.families_path.empty()) {
        std::ifstream in(o.families_path);
        if (!in) fail("cannot open --families file: " + o.families_path);
        auto fams = io::parse_family_labels(json::parse(in));
        std::vector<std::string> labels;
        for (const auto& fam : fams)
            for (const auto& l : fam)
                if (std::find(labels.begin(), labels.end(), l) == labels.end())
                    labels.push_back(l);
        return Universe(labels);
    }
    if (o.procedure == "counterexample-a") return adversarial_gateway_universe();
    if (o.n_hyp > 0) return Universe::numbered(o.n_hyp);
    fail("cannot infer the hypothesis list: pass --pvalues, --structure, --tree, "
         "--families, or --n");
}

void require_same_labels(const Universe& a, const Universe& b, const std::string& what) {
    if (a.labels() != b.labels())
        fail(what + " labels must match the hypothesis labels (same names, same order)");
}

// Procedures whose evidence is a p-value vector over the given universe.
struct Built {
    std::optional<Schedule> sched;
    std::optional<OrderedCriticalValues> ordered;
    std::optional<LogicalStructure> structure;  // for the sum-bound check, when known
};

Built build_simple(const Options& o, const Universe& u) {
    const std::string& id = o.procedure;
    Built b;
    auto need_structure = [&]() {
        if (o.structure_path.empty()) fail("--structure required for " + id);
        LogicalStructure s = io::read_structure(o.structure_path);
        require_same_labels(s.universe(), u, "--structure");
        return s;
    };
    auto need_tree = [&]() {
        if (o.tree_path.empty()) fail("--tree required for " + id);
        HypothesisTree t = io::read_tree(o.tree_path);
        require_same_labels(t.universe(), u, "--tree");
        return t;
    };
    auto tree_structure = [&](const HypothesisTree& t) -> std::optional<LogicalStructure> {
        if (t.leaf_count() > 16) return std::nullopt;
        return t.induced_structure();
    };

    if (id == "holm") {
        b.sched = holm(u.size());
        b.structure = LogicalStructure::free_form(u);
    } else if (id == "holm-weighted") {
        if (o.weights.size() != u.size())
            fail("--weights needs exactly one weight per hypothesis");
        b.sched = holm_weighted(o.weights);
        b.structure = LogicalStructure::free_form(u);
    } else if (id == "sidak") {
        b.sched = sidak_stepdown(u.size());
    } else if (id == "shaffer-s2") {
        LogicalStructure s = need_structure();
        b.sched = shaffer_s2(s);
        b.structure = std::move(s);
    } else if (id == "hommel-p3") {
        LogicalStructure s =
            o.structure_path.empty() ? LogicalStructure::free_form(u) : need_structure();
        b.sched = hommel_p3(s);
        b.structure = std::move(s);
    } else if (id == "hochberg") {
        b.ordered = hochberg(o.k_bound > 0 ? std::optional<std::size_t>(o.k_bound)
                                           : std::nullopt);
    } else if (id == "shaffer-stepup") {
        LogicalStructure s = need_structure();
        b.ordered = shaffer_stepup(s);
        b.structure = std::move(s);
    } else if (id == "gatekeeping-serial" || id == "gatekeeping-parallel") {
        if (o.families_path.empty()) fail("--families required for " + id);
        std::vector<IndexSet> fams = io::read_families(o.families_path, u);
        if (id == "gatekeeping-serial") {
            b.sched = gatekeeping_serial(std::move(fams));
        } else {
            if (fams.size() != 2) fail("gatekeeping-parallel expects exactly two families");
            b.sched = gatekeeping_parallel(fams[0], fams[1], o.guilbaud);
        }
        b.structure = LogicalStructure::free_form(u);
    } else if (id == "tree-basic" || id == "tree-improved" || id == "tree-shaffer" ||
               id == "tree-shaffer-improved" || id == "tree-improved-ii") {
        HypothesisTree t = need_tree();
        if (id == "tree-basic") b.sched = tree_basic(t);
        if (id == "tree-improved") b.sched = tree_improved(t);
        if (id == "tree-shaffer") b.sched = tree_shaffer(t);
        if (id == "tree-shaffer-improved") b.sched = tree_shaffer_improved(t);
        if (id == "tree-improved-ii") b.sched = tree_improved_II(t);
        b.structure = tree_structure(t);
    } else if (id == "counterexample-a") {
        if (u.size() != 4) fail("counterexample-a is defined on exactly 4 hypotheses");
        b.sched = adversarial_gateway_schedule(o.eps);
        b.structure = adversarial_gateway_structure();
    } else {
        std::string known;
        for (const auto& p : kPublicProcedures) known += (known.empty() ? "" : ", ") + p;
        fail("unknown procedure '" + id + "'; known: " + known);
    }
    return b;
}

bool is_simple(const std::string& id) {
    return id != "closed-testing" && id != "partitioning" && id != "maxt";
}

LocalTestProvider make_local(const Options& o, const Universe& u,
                             const std::vector<double>& pvalues) {
    if (o.local == "bonferroni") return bonferroni_combine(pvalues);
    if (o.local == "fisher") return fisher_combine(pvalues);
    if (o.local == "simes") return simes_combine(pvalues);
    if (o.local == "table") {
        if (o.local_file.empty()) fail("--local table needs --local-file");
        std::ifstream in(o.local_file);
        if (!in) fail("cannot open --local-file: " + o.local_file);
        auto tab = io::parse_local_pvalues(json::parse(in), u);
        return user_table(std::move(tab), bonferroni_combine(pvalues));
    }
    fail("--local must be bonferroni, fisher, simes, or table");
}

ExtendedProcedure build_extended(const Options& o, const Universe& u,
                                 const std::vector<double>& pvalues) {
    if (o.structure_path.empty()) fail("--structure required for " + o.procedure);
    LogicalStructure s = io::read_structure(o.structure_path);
    require_same_labels(s.universe(), u, "--structure");
    LocalTestProvider local = make_local(o, u, pvalues);
    if (o.procedure == "closed-testing") return closed_testing(s, local);
    return partitioning(s, local);
}

// ---------------------------------------------------------------------------
// resampling assembly

StatisticFamily make_stats(const Options& o, const DataMatrix& m) {
    std::string stat = o.statistic;
    if (stat.empty()) stat = (o.transforms == "permute") ? "two-sample-diff" : "mean";
    if (stat == "mean") return column_means(m.cols);
    if (stat == "t") return column_t_statistics(m.cols);
    if (stat == "two-sample-diff") {
        if (m.row_groups.empty())
            fail("--group-col required for the two-sample statistic");
        std::string pos = o.positive_group.empty() ? m.row_groups.front() : o.positive_group;
        return two_sample_mean_difference(m.row_groups, pos, m.cols);
    }
    fail("--statistic must be mean, t, or two-sample-diff");
}

TransformGroup make_group(const Options& o, const DataMatrix& m) {
    if (o.transforms == "signflip") {
        if (o.n_perms > 0) return sign_flip_group_sampled(m.rows, o.n_perms, o.seed);
        return sign_flip_group(m.rows);
    }
    if (o.transforms == "permute") {
        if (o.n_perms > 0) return permutation_group_sampled(m.rows, o.n_perms, o.seed);
        return permutation_group(m.rows);
    }
    if (o.transforms == "file") {
        if (o.transforms_file.empty()) fail("--transforms file needs --transforms-file");
        std::ifstream in(o.transforms_file);
        if (!in) fail("cannot open --transforms-file: " + o.transforms_file);
        json j = json::parse(in);
        if (!j.is_array()) fail("--transforms-file: expected an array of transforms");
        std::vector<Transform> elems;
        for (const auto& e : j) {
            Transform t = Transform::identity(m.rows);
            if (e.contains("perm")) {
                auto perm = e["perm"].get<std::vector<std::size_t>>();
                if (perm.size() != m.rows)
                    fail("--transforms-file: 'perm' length must equal the row count");
                t.perm = std::move(perm);
            }
            if (e.contains("sign")) {
                auto sign = e["sign"].get<std::vector<int>>();
                if (sign.size() != m.rows)
                    fail("--transforms-file: 'sign' length must equal the row count");
                for (std::size_t i = 0; i < sign.size(); ++i)
                    t.sign[i] = static_cast<std::int8_t>(sign[i]);
            }
            elems.push_back(std::move(t));
        }
        return user_transform_group(m.rows, std::move(elems));
    }
    fail("--transforms must be signflip, permute, or file (got '" + o.transforms + "')");
}

struct MaxtParts {
    DataMatrix data;
    Universe universe;
    StatisticFamily stats;
    TransformGroup group;
};

MaxtParts build_maxt(const Options& o) {
    if (o.data_path.empty()) fail("--data required for maxt");
    if (o.transforms.empty()) fail("--transforms required for maxt");
    DataMatrix m = io::read_data_csv(o.data_path, o.group_col);
    Universe u(m.column_names);
    StatisticFamily stats = make_stats(o, m);
    TransformGroup group = make_group(o, m);
    return MaxtParts{std::move(m), std::move(u), std::move(stats), std::move(group)};
}

// ---------------------------------------------------------------------------
// subcommands

int cmd_reject(const Options& o) {
    json report;
    report["config"] = config_json("reject", o);

    if (o.procedure == "maxt") {
        MaxtParts parts = build_maxt(o);
        ProcedureTrace trace = stepdown_maxT(parts.stats, parts.data, parts.group, o.alpha);
        report["trace"] = io::trace_to_json(trace, parts.universe);
        report["rejected"] = io::index_set_to_json(trace.final, parts.universe);
        if (o.format == "csv") {
            std::ostringstream csv;
            csv << "label,stat,rejected\n";
            csv.precision(17);
            auto evidence = std::make_shared<const ResamplingEvidence>(parts.stats, parts.data,
                                                                       parts.group);
            for (std::size_t h = 0; h < parts.universe.size(); ++h)
                csv << parts.universe.label(h) << ',' << evidence->observed()[h] << ','
                    << (trace.final.test(h) ? "true" : "false") << '\n';
            emit(o, csv.str());
        } else {
            emit(o, report.dump(2));
        }
        return 0;
    }

    if (o.pvalues_path.empty()) fail("--pvalues required for " + o.procedure);
    io::PvalueTable table = io::read_pvalue_csv(o.pvalues_path);
    const Universe& u = table.universe;

    ProcedureTrace trace;
    IndexSet rejected;
    const Universe* trace_universe = &u;
    std::optional<ExtendedProcedure> ext;
    if (is_simple(o.procedure)) {
        Built b = build_simple(o, u);
        trace = b.sched ? run(*b.sched, table.pvalues, o.alpha)
                        : run_stepup(*b.ordered, table.pvalues, o.alpha);
        rejected = trace.final;
    } else {
        ext = build_extended(o, u, table.pvalues);
        trace = run(ext->schedule, ext->pvalues, o.alpha);
        rejected = ext->project(trace.final);
        trace_universe = &ext->extended;
    }
    report["trace"] = io::trace_to_json(trace, *trace_universe);
    report["rejected"] = io::index_set_to_json(rejected, u);

    if (o.format == "csv") {
        std::ostringstream csv;
        csv << "label,p,rejected\n";
        csv.precision(17);
        for (std::size_t h = 0; h < u.size(); ++h)
            csv << u.label(h) << ',' << table.pvalues[h] << ','
                << (rejected.test(h) ? "true" : "false") << '\n';
        emit(o, csv.str());
    } else {
        emit(o, report.dump(2));
    }
    return 0;
}

int cmd_adjust(const Options& o) {
    json report;
    report["config"] = config_json("adjust", o);

    Universe universe;
    std::vector<double> raw;
    AdjustedReport adj;

    if (o.procedure == "maxt") {
        MaxtParts parts = build_maxt(o);
        auto evidence =
            std::make_shared<const ResamplingEvidence>(parts.stats, parts.data, parts.group);
        Schedule sched = maxT_schedule(evidence);
        std::vector<double> observed(evidence->observed().begin(), evidence->observed().end());
        adj = adjusted_pvalues(sched, observed);
        universe = parts.universe;
        // raw column: marginal resampling p-value of each statistic on its own
        raw.assign(universe.size(), 0.0);
        for (std::size_t h = 0; h < universe.size(); ++h) {
            std::size_t at_least = 0;
            for (std::size_t t = 0; t < evidence->group_size(); ++t)
                if (evidence->transformed_stat(t, h) >= observed[h]) ++at_least;
            raw[h] = static_cast<double>(at_least) / static_cast<double>(evidence->group_size());
        }
    } else {
        if (o.pvalues_path.empty()) fail("--pvalues required for " + o.procedure);
        io::PvalueTable table = io::read_pvalue_csv(o.pvalues_path);
        universe = table.universe;
        raw = table.pvalues;
        if (is_simple(o.procedure)) {
            Built b = build_simple(o, universe);
            adj = b.sched ? adjusted_pvalues(*b.sched, table.pvalues)
                          : adjusted_pvalues(*b.ordered, table.pvalues);
        } else {
            ExtendedProcedure ext = build_extended(o, universe, table.pvalues);
            AdjustedReport wide = adjusted_pvalues(ext.schedule, ext.pvalues);
            adj.adjusted.resize(universe.size());
            for (std::size_t h = 0; h < universe.size(); ++h) {
                adj.adjusted[h] = wide.adjusted[ext.elementary_node[h]];
                raw[h] = ext.pvalues[ext.elementary_node[h]];
            }
            adj.breakpoints = wide.breakpoints;
            for (const IndexSet& s : wide.final_sets)
                adj.final_sets.push_back(ext.project(s));
        }
    }

    if (o.format == "json") {
        report["report"] = io::adjusted_to_json(adj, universe, raw);
        emit(o, report.dump(2));
    } else {
        emit(o, io::adjusted_to_csv(adj, universe, raw, o.alpha));
    }
    return 0;
}

int cmd_simulate(const Options& o) {
    if (o.model.empty()) fail("--model required for simulate");
    if (o.reps < 1) fail("--reps must be at least 1");
    if (o.procedure == "maxt")
        fail("simulate draws p-value evidence; maxt consumes data matrices instead");

    Universe u = resolve_universe(o, nullptr);

    // decide(p, alpha): the full procedure's final rejection set
    std::function<IndexSet(std::span<const double>)> decide;
    if (is_simple(o.procedure)) {
        Built b = build_simple(o, u);
        if (b.sched) {
            Schedule sched = *b.sched;
            decide = [sched, a = o.alpha](std::span<const double> p) {
                return run_final(sched, p, a);
            };
        } else {
            OrderedCriticalValues values = *b.ordered;
            decide = [values, a = o.alpha](std::span<const double> p) {
                return run_stepup_final(values, p, a);
            };
        }
    } else {
        if (o.structure_path.empty()) fail("--structure required for " + o.procedure);
        LogicalStructure s = io::read_structure(o.structure_path);
        require_same_labels(s.universe(), u, "--structure");
        bool closed = (o.procedure == "closed-testing");
        std::string local = o.local;
        if (local == "table") fail("--local table is not available under simulate");
        decide = [s, closed, local, a = o.alpha](std::span<const double> p) {
            std::vector<double> pv(p.begin(), p.end());
            LocalTestProvider provider = local == "fisher"  ? fisher_combine(pv)
                                         : local == "simes" ? simes_combine(pv)
                                                            : bonferroni_combine(pv);
            ExtendedProcedure ext =
                closed ? closed_testing(s, provider) : partitioning(s, provider);
            return ext.project(run_final(ext.schedule, ext.pvalues, a));
        };
    }

    std::function<std::vector<double>(Rng&)> draw;
    IndexSet true_set;
    if (o.model == "independent-uniform") {
        IndexSet ts = o.true_labels.empty() ? IndexSet::full(u.size()) : IndexSet(u.size());
        for (const auto& l : o.true_labels) ts.set(u.index_of(l));
        IndependentUniformModel m(ts, o.false_scale);
        true_set = m.true_set;
        draw = [m](Rng& rng) { return m.draw(rng); };
    } else if (o.model == "equicorrelated-normal") {
        std::vector<double> shift = o.shift;
        if (shift.empty()) shift.assign(u.size(), 0.0);
        if (shift.size() != u.size())
            fail("--shift needs exactly one entry per hypothesis");
        EquicorrelatedNormalModel m(o.rho, shift);
        true_set = m.true_set();
        draw = [m](Rng& rng) { return m.draw(rng); };
    } else if (o.model == "counterexample-a") {
        if (u.size() != 4) fail("counterexample-a draws evidence for exactly 4 hypotheses");
        AdversarialGatewayModel m(o.alpha, o.eps, o.t_scale);
        true_set = m.true_set();
        draw = [m](Rng& rng) { return m.draw(rng); };
    } else {
        fail("unknown model '" + o.model +
             "'; known: independent-uniform, equicorrelated-normal, counterexample-a");
    }

    FwerEstimate est = estimate_fwer(decide, draw, true_set, o.reps, o.seed);

    if (o.format == "csv") {
        std::ostringstream csv;
        csv << "replications,events,estimate,wilson_low,wilson_high\n";
        csv.precision(17);
        csv << est.replications << ',' << est.events << ',' << est.estimate << ','
            << est.wilson_low << ',' << est.wilson_high << '\n';
        emit(o, csv.str());
    } else {
        json report;
        report["config"] = config_json("simulate", o);
        report["estimate"] = io::fwer_to_json(est);
        emit(o, report.dump(2));
    }
    return 0;
}

int cmd_check(const Options& o) {
    json checks = json::array();
    bool failed = false;
    auto record = [&](const std::string& name, bool ok, json details) {
        details["name"] = name;
        details["status"] = ok ? "ok" : "violation";
        checks.push_back(details);
        if (!ok) failed = true;
    };
    auto witness_json = [](const Universe& u, const MonotonicityWitness& w) {
        return json{{"rejected", io::index_set_to_json(w.r, u)},
                    {"superset", io::index_set_to_json(w.s, u)},
                    {"hypothesis", u.label(w.hypothesis)},
                    {"value_at_rejected", w.value_at_r},
                    {"value_at_superset", w.value_at_s}};
    };

    auto check_schedule = [&](const Schedule& sched, const Universe& u,
                              const std::optional<LogicalStructure>& structure) {
        MonotonicityVerdict mono;
        if (u.size() <= 12) {
            mono = check_monotonicity(sched, u.size(), o.alpha);
        } else if (o.sampled_check) {
            mono = check_monotonicity_sampled(sched, u.size(), o.alpha, 200000, o.seed);
        } else {
            fail("universe too large for the exhaustive monotonicity check; pass --sampled");
        }
        json details{{"chains_checked", mono.chains_checked}};
        if (mono.witness) details["witness"] = witness_json(u, *mono.witness);
        record("monotonicity", mono.ok, details);

        if (structure) {
            SingleStepVerdict ss = check_single_step_bound(sched, *structure, o.alpha);
            if (ss.status == SingleStepStatus::not_applicable) {
                checks.push_back(json{{"name", "single-step-bound"},
                                      {"status", "not-applicable"}});
            } else {
                json d{{"cases_checked", ss.cases_checked}};
                if (ss.witness)
                    d["witness"] = json{
                        {"rejected", io::index_set_to_json(ss.witness->r, u)},
                        {"true_hypotheses", io::index_set_to_json(ss.witness->atom_true, u)},
                        {"critical_value_sum", ss.witness->sum}};
                record("single-step-bound", ss.status == SingleStepStatus::ok, d);
            }
        }
    };

    Universe u = resolve_universe(o, nullptr);
    if (o.procedure == "maxt") {
        MaxtParts parts = build_maxt(o);
        if (parts.group.sampled || parts.group.size() > 10000) {
            checks.push_back(json{{"name", "group-structure"}, {"status", "skipped"},
                                  {"reason", "sampled or oversized group"}});
        } else {
            GroupVerdict g = verify_group(parts.group);
            record("group-structure", g.ok, json{{"failures", g.failures}});
        }
    } else if (is_simple(o.procedure)) {
        Built b = build_simple(o, u);
        if (b.sched) {
            check_schedule(*b.sched, u, b.structure);
        } else {
            StepUpVerdict v = check_stepup_monotonicity(*b.ordered, u.size(), o.alpha);
            json details{{"chains_checked", v.chains_checked}};
            if (v.witness)
                details["witness"] = json{
                    {"rejected", io::index_set_to_json(v.witness->r, u)},
                    {"superset", io::index_set_to_json(v.witness->s, u)},
                    {"rank", v.witness->rank},
                    {"value_at_rejected", v.witness->value_at_r},
                    {"value_at_superset", v.witness->value_at_s}};
            record("ordered-monotonicity", v.ok, details);
        }
    } else {
        std::vector<double> placeholder(u.size(), 0.5);
        ExtendedProcedure ext = build_extended(o, u, placeholder);
        check_schedule(ext.schedule, ext.extended, ext.extended_structure);
    }

    json report;
    report["config"] = config_json("check", o);
    report["checks"] = checks;
    report["ok"] = !failed;
    if (o.format == "csv") {
        std::ostringstream csv;
        csv << "check,status\n";
        for (const auto& c : checks)
            csv << c["name"].get<std::string>() << ',' << c["status"].get<std::string>()
                << '\n';
        emit(o, csv.str());
    } else {
        emit(o, report.dump(2));
    }
    return failed ? 1 : 0;
}

// ---------------------------------------------------------------------------

void add_common(CLI::App* cmd, Options& o, bool needs_procedure) {
    auto* proc = cmd->add_option("--procedure", o.procedure, "procedure id");
    if (needs_procedure) proc->required();
    cmd->add_option("--alpha", o.alpha, "familywise level in (0,1)");
    cmd->add_option("--pvalues", o.pvalues_path, "CSV with columns label,p");
    cmd->add_option("--structure", o.structure_path, "logical-structure JSON");
    cmd->add_option("--tree", o.tree_path, "hypothesis-tree JSON");
    cmd->add_option("--families", o.families_path, "family-sequence JSON");
    cmd->add_option("--data", o.data_path, "data-matrix CSV (resampling)");
    cmd->add_option("--group-col", o.group_col, "group-label column in --data");
    cmd->add_option("--transforms", o.transforms, "signflip|permute|file");
    cmd->add_option("--transforms-file", o.transforms_file, "transform list JSON");
    cmd->add_option("--statistic", o.statistic, "mean|t|two-sample-diff");
    cmd->add_option("--positive-group", o.positive_group,
                    "group treated as positive by the two-sample statistic");
    cmd->add_option("--n-perms", o.n_perms, "sample this many transforms (0 = enumerate)");
    cmd->add_option("--seed", o.seed, "master RNG seed");
    cmd->add_option("--out", o.out_path, "write the report here instead of stdout");
    cmd->add_option("--format", o.format, "json|csv")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--n", o.n_hyp, "universe size when no labelled input is given");
    cmd->add_option("--weights", o.weights, "per-hypothesis weights")->delimiter(',');
    cmd->add_option("--k-bound", o.k_bound, "cap on simultaneously true hypotheses");
    cmd->add_flag("--guilbaud", o.guilbaud, "sharpened parallel-gatekeeping variant");
    cmd->add_option("--local", o.local, "bonferroni|fisher|simes|table");
    cmd->add_option("--local-file", o.local_file, "set-keyed local p-value JSON");
    cmd->add_option("--eps", o.eps, "negative-control epsilon");
}

}  // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"sequentially rejective multiple-testing procedures"};
    app.require_subcommand(1);

    CLI::App* rej = app.add_subcommand("reject", "run a procedure on evidence");
    CLI::App* adj = app.add_subcommand("adjust", "multiplicity-adjusted p-values");
    CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo familywise error rate");
    CLI::App* chk = app.add_subcommand("check", "validity conditions of a procedure");
    for (CLI::App* c : {rej, adj, sim, chk}) add_common(c, o, true);
    sim->add_option("--model", o.model,
                    "independent-uniform|equicorrelated-normal|counterexample-a");
    sim->add_option("--reps", o.reps, "Monte Carlo replications");
    sim->add_option("--true-set", o.true_labels, "labels of the true hypotheses")
        ->delimiter(',');
    sim->add_option("--false-scale", o.false_scale,
                    "p-value shrink factor for false hypotheses");
    sim->add_option("--rho", o.rho, "equicorrelation");
    sim->add_option("--shift", o.shift, "per-hypothesis mean shifts")->delimiter(',');
    sim->add_option("--t-scale", o.t_scale, "gateway scale t of the counterexample model");
    chk->add_flag("--sampled", o.sampled_check,
                  "randomized monotonicity check for large universes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        check_alpha(o.alpha);
        if (app.got_subcommand(rej)) return cmd_reject(o);
        if (app.got_subcommand(adj)) return cmd_adjust(o);
        if (app.got_subcommand(sim)) return cmd_simulate(o);
        return cmd_check(o);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::length_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::logic_error& e) {
        // library-side consistency detection (e.g. a non-monotone schedule)
        std::cerr << "check failed: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

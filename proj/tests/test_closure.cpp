#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "fixtures.hpp"

using namespace seqrej;
using namespace fixtures;

TEST_CASE("combined local tests", "[local]") {
    std::vector<double> p = {0.02, 0.30, 0.10};

    SECTION("singletons pass the raw value through") {
        for (auto make : {bonferroni_combine, fisher_combine, simes_combine})
            for (std::size_t h = 0; h < 3; ++h)
                REQUIRE(make(p).pvalue_of(IndexSet::of(3, {h})) == Catch::Approx(p[h]));
    }

    SECTION("count-scaled minimum") {
        auto t = bonferroni_combine(p);
        REQUIRE(t.pvalue_of(IndexSet::of(3, {0, 1})) == Catch::Approx(0.04));
        REQUIRE(t.pvalue_of(IndexSet::full(3)) == Catch::Approx(0.06));
        auto capped = bonferroni_combine({0.9, 0.8});
        REQUIRE(capped.pvalue_of(IndexSet::full(2)) == Catch::Approx(1.0));
    }

    SECTION("product test has its two-sample closed form") {
        // for two uniforms, the combined p is q(1 - log q) at q = p1*p2
        auto t = fisher_combine({0.1, 0.1});
        double q = 0.01;
        REQUIRE(t.pvalue_of(IndexSet::full(2)) ==
                Catch::Approx(q * (1.0 - std::log(q))).epsilon(1e-10));
        REQUIRE(fisher_combine({0.0, 0.5}).pvalue_of(IndexSet::full(2)) == 0.0);
    }

    SECTION("rank-scaled minimum") {
        auto t = simes_combine(p);
        // sorted (0.02, 0.10, 0.30): min of 3*0.02, 1.5*0.10, 1*0.30
        REQUIRE(t.pvalue_of(IndexSet::full(3)) == Catch::Approx(0.06));
        REQUIRE(t.pvalue_of(IndexSet::of(3, {1, 2})) == Catch::Approx(0.20));
    }

    SECTION("explicit table with fallback") {
        std::map<IndexSet, double> table;
        table[IndexSet::of(2, {0, 1})] = 0.03;
        auto strict = user_table(table);
        REQUIRE(strict.pvalue_of(IndexSet::of(2, {0, 1})) == Catch::Approx(0.03));
        REQUIRE_THROWS_AS(strict.pvalue_of(IndexSet::of(2, {0})), std::invalid_argument);

        auto relaxed = user_table(table, bonferroni_combine({0.01, 0.2}));
        REQUIRE(relaxed.pvalue_of(IndexSet::of(2, {0, 1})) == Catch::Approx(0.03));
        REQUIRE(relaxed.pvalue_of(IndexSet::of(2, {0})) == Catch::Approx(0.01));

        std::map<IndexSet, double> bad;
        bad[IndexSet::of(2, {0})] = 1.5;
        REQUIRE_THROWS_AS(user_table(bad), std::invalid_argument);
    }
}

TEST_CASE("intersection closure over unconstrained hypotheses", "[closure]") {
    std::vector<double> p = {0.01, 0.02, 0.20};
    auto ext = closed_testing(LogicalStructure::free_form(Universe::numbered(3)),
                              bonferroni_combine(p));

    SECTION("one node per nonempty subset") {
        REQUIRE(ext.extended.size() == 7);
        REQUIRE(ext.extended.has("H1"));
        REQUIRE(ext.extended.has("{H1,H2}"));
        REQUIRE(ext.extended.has("{H1,H2,H3}"));
    }

    SECTION("only the deepest intersection is testable at the start") {
        std::size_t top = ext.extended.index_of("{H1,H2,H3}");
        IndexSet none(ext.extended.size());
        for (std::size_t v = 0; v < ext.extended.size(); ++v) {
            double c = ext.schedule.alpha_of(v, none, 0.05);
            REQUIRE(c == Catch::Approx(v == top ? 0.05 : 0.0));
        }
    }

    SECTION("rejecting a node's implications opens it") {
        std::size_t top = ext.extended.index_of("{H1,H2,H3}");
        std::size_t pair01 = ext.extended.index_of("{H1,H2}");
        IndexSet r(ext.extended.size());
        r.set(top);
        REQUIRE(ext.schedule.alpha_of(pair01, r, 0.05) == Catch::Approx(0.05));
        std::size_t h1 = ext.extended.index_of("H1");
        // H1 needs all three of its supersets' nodes gone first
        REQUIRE(ext.schedule.alpha_of(h1, r, 0.05) == Catch::Approx(0.0));
    }

    SECTION("projection of a full run") {
        auto trace = run(ext.schedule, ext.pvalues, 0.05);
        auto rejected = ext.project(trace.final);
        // top node p = 0.03; {H1,H2} = {H1,H3} = 0.02; {H2,H3} = 0.04;
        // H1 = 0.01 and H2 = 0.02 pass, H3 = 0.2 fails
        REQUIRE(rejected == IndexSet::of(3, {0, 1}));
    }
}

TEST_CASE("closure matches the subset-enumeration oracle", "[closure]") {
    Rng rng(53);
    auto structures = std::vector<LogicalStructure>{
        explicit_free_structure(3), explicit_free_structure(4), pairwise_means_structure(),
        mu_sum_structure(), delta_structure()};
    for (const auto& st : structures) {
        for (int rep = 0; rep < 60; ++rep) {
            auto p = random_signal_pvector(rng, st.size());
            for (auto make : {bonferroni_combine, simes_combine}) {
                auto local = make(p);
                auto ext = closed_testing(st, local);
                auto got = ext.project(run_final(ext.schedule, ext.pvalues, 0.05));
                auto want = closed_testing_oracle(st, local, 0.05);
                INFO("structure " << st.size() << " rep " << rep << " local " << local.id);
                REQUIRE(got == want);
            }
        }
    }
}

TEST_CASE("closure with the count-scaled local test contains the step-down split",
          "[closure]") {
    Rng rng(59);
    for (int rep = 0; rep < 200; ++rep) {
        auto p = random_signal_pvector(rng, 4);
        auto ext = closed_testing(LogicalStructure::free_form(Universe::numbered(4)),
                                  bonferroni_combine(p));
        auto closed = ext.project(run_final(ext.schedule, ext.pvalues, 0.05));
        auto plain = run_final(holm(4), p, 0.05);
        REQUIRE(plain.is_subset_of(closed));
    }
}

TEST_CASE("closure respects the logical structure", "[closure]") {
    // pairwise equalities: all two-way intersections share the all-equal region,
    // so the closure has one joint node rather than three
    auto st = pairwise_means_structure();
    std::vector<double> p = {0.001, 0.04, 0.30};
    auto ext = closed_testing(st, bonferroni_combine(p));
    REQUIRE(ext.extended.size() == 4);
    REQUIRE(ext.extended.has("{H12,H13,H23}"));

    // the joint node clears, then each elementary stands alone
    auto rejected = ext.project(run_final(ext.schedule, ext.pvalues, 0.05));
    REQUIRE(rejected == IndexSet::of(3, {0, 1}));
}

TEST_CASE("disjoint-piece decomposition", "[partitioning]") {
    auto st = delta_structure();

    SECTION("pieces and labels") {
        auto ext = partitioning(st, bonferroni_combine({0.01, 0.5, 0.02}));
        REQUIRE(ext.extended.size() == 5);
        REQUIRE(ext.extended.has("H1"));
        REQUIRE(ext.extended.has("H2"));
        REQUIRE(ext.extended.has("H12"));
        REQUIRE(ext.extended.has("piece-a1"));
        REQUIRE(ext.extended.has("piece-a3"));

        // every piece is testable immediately at the full level
        IndexSet none(5);
        REQUIRE(ext.schedule.alpha_of(ext.extended.index_of("piece-a1"), none, 0.05) ==
                Catch::Approx(0.05));
        REQUIRE(ext.schedule.alpha_of(ext.extended.index_of("H12"), none, 0.05) ==
                Catch::Approx(0.05));
        // non-piece nodes are locked until their cover falls
        REQUIRE(ext.schedule.alpha_of(ext.extended.index_of("H1"), none, 0.05) ==
                Catch::Approx(0.0));
    }

    SECTION("covered hypotheses fall for free") {
        auto ext = partitioning(st, bonferroni_combine({0.01, 0.5, 0.02}));
        IndexSet r(5);
        r.set(ext.extended.index_of("piece-a1"));
        r.set(ext.extended.index_of("H12"));
        // H1 is true exactly on pieces a1 and a2(=H12's region)
        REQUIRE(ext.schedule.alpha_of(ext.extended.index_of("H1"), r, 0.05) ==
                Catch::Approx(1.0));
        REQUIRE(ext.schedule.alpha_of(ext.extended.index_of("H2"), r, 0.05) ==
                Catch::Approx(0.0));
    }

    SECTION("a signal dataset rejects across the partition") {
        // local p for each queried set comes from a table over elementary sets
        std::map<IndexSet, double> table;
        table[IndexSet::of(3, {0})] = 0.01;              // piece a1: only H1 true
        table[IndexSet::of(3, {0, 1, 2})] = 0.02;        // middle region
        table[IndexSet::of(3, {1})] = 0.60;              // piece a3: only H2 true
        auto ext = partitioning(st, user_table(table));
        auto trace = run(ext.schedule, ext.pvalues, 0.05);
        auto rejected = ext.project(trace.final);
        // both pieces under H1 fall, so H1 falls; H2's piece a3 survives
        REQUIRE(rejected == IndexSet::of(3, {0, 2}));
        REQUIRE(trace.productive_steps() <= 2);
    }

    SECTION("at most two productive passes, ever") {
        Rng rng(61);
        for (int rep = 0; rep < 200; ++rep) {
            auto p = random_signal_pvector(rng, 3);
            for (const auto& structure : {delta_structure(), pairwise_means_structure()}) {
                auto ext = partitioning(structure, bonferroni_combine(p));
                auto trace = run(ext.schedule, ext.pvalues, 0.3);
                REQUIRE(trace.productive_steps() <= 2);
            }
        }
    }
}

TEST_CASE("partition pieces decide everything on unconstrained hypotheses",
          "[partitioning]") {
    // free structure: pieces are the 2^n - 1 assignments with a true hypothesis
    auto ext = partitioning(LogicalStructure::free_form(Universe::numbered(2)),
                            bonferroni_combine({0.01, 0.04}));
    REQUIRE(ext.extended.size() == 2 + 3);
    auto rejected = ext.project(run_final(ext.schedule, ext.pvalues, 0.05));
    // piece {H1 only} p = 0.01, piece {H2 only} p = 0.04, piece {both} p = 0.02:
    // all pieces fall at 0.05, so both hypotheses fall
    REQUIRE(rejected == IndexSet::full(2));
}

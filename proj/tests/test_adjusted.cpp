#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include <seqrej/seqrej.hpp>

#include "fixtures.hpp"

using namespace seqrej;

namespace {

const std::vector<double> kLevelGrid = {0.001, 0.005, 0.01, 0.025, 0.05, 0.1,
                                        0.2,   0.3,   0.5,  0.7,   0.9,  0.99};

void require_report_shape(const AdjustedReport& report) {
    REQUIRE(report.breakpoints.size() == report.final_sets.size());
    for (std::size_t i = 1; i < report.breakpoints.size(); ++i) {
        REQUIRE(report.breakpoints[i] > report.breakpoints[i - 1]);
        REQUIRE(report.final_sets[i - 1].is_strict_subset_of(report.final_sets[i]));
    }
    // every adjusted value below 1 appears as a breakpoint
    for (double a : report.adjusted) {
        if (a < 1.0) {
            REQUIRE(std::find(report.breakpoints.begin(), report.breakpoints.end(), a) !=
                    report.breakpoints.end());
        }
    }
}

void require_grid_consistency(const Schedule& sched, const std::vector<double>& pvalues,
                              const AdjustedReport& report) {
    for (double level : kLevelGrid) {
        IndexSet from_report = rejections_at(report, level);
        IndexSet from_run = run_final(sched, pvalues, level, IndexSet(pvalues.size()));
        REQUIRE(from_report == from_run);
    }
}

}  // namespace

TEST_CASE("stepwise min-share adjustment matches the closed form", "[adjusted]") {
    std::vector<double> p = {0.01, 0.04, 0.30};
    AdjustedReport report = adjusted_pvalues(holm(3), p);

    REQUIRE(report.adjusted[0] == Catch::Approx(0.03).epsilon(1e-12));
    REQUIRE(report.adjusted[1] == Catch::Approx(0.08).epsilon(1e-12));
    REQUIRE(report.adjusted[2] == Catch::Approx(0.30).epsilon(1e-12));

    REQUIRE(report.breakpoints.size() == 3);
    REQUIRE(report.final_sets[0].members() == std::vector<std::size_t>{0});
    REQUIRE(report.final_sets[1].members() == std::vector<std::size_t>{0, 1});
    REQUIRE(report.final_sets[2].members() == std::vector<std::size_t>{0, 1, 2});
    require_report_shape(report);

    SECTION("running at an adjusted value reproduces the rejection") {
        for (std::size_t h = 0; h < 3; ++h) {
            IndexSet at = run_final(holm(3), p, report.adjusted[h], IndexSet(3));
            REQUIRE(at.test(h));
        }
    }
}

TEST_CASE("adjustment agrees with the sorted-maximum oracle", "[adjusted]") {
    Rng rng(66101);
    for (int rep = 0; rep < 300; ++rep) {
        std::vector<double> p = fixtures::random_signal_pvector(rng, 6);
        AdjustedReport report = adjusted_pvalues(holm(6), p);
        std::vector<double> oracle = fixtures::holm_adjusted_oracle(p);
        for (std::size_t h = 0; h < 6; ++h)
            REQUIRE(report.adjusted[h] == Catch::Approx(oracle[h]).margin(1e-12));
        require_report_shape(report);
    }
}

TEST_CASE("a lone hypothesis keeps its raw p-value", "[adjusted]") {
    std::vector<double> p = {0.37};
    AdjustedReport report = adjusted_pvalues(holm(1), p);
    REQUIRE(report.adjusted[0] == Catch::Approx(0.37).epsilon(1e-12));
    REQUIRE(report.breakpoints == std::vector<double>{0.37});
}

TEST_CASE("hierarchy adjustment folds in the ancestor gates", "[adjusted]") {
    HypothesisTree t = fixtures::fig_tree15();
    std::vector<double> p(15, 0.9);
    p[0] = 0.02;
    p[1] = 0.04;
    p[2] = 0.45;

    AdjustedReport report = adjusted_pvalues(tree_basic(t), p);
    REQUIRE(report.adjusted[0] == Catch::Approx(0.02).epsilon(1e-12));
    // the child pays twice its raw value but can never precede its parent
    REQUIRE(report.adjusted[1] == Catch::Approx(0.08).epsilon(1e-12));
    REQUIRE(report.adjusted[2] == Catch::Approx(0.90).epsilon(1e-12));
    for (std::size_t h = 3; h < 15; ++h) REQUIRE(report.adjusted[h] == 1.0);
    REQUIRE(report.breakpoints.size() == 3);
    require_report_shape(report);
    require_grid_consistency(tree_basic(t), p, report);

    SECTION("a cheap child still waits for an expensive parent") {
        std::vector<double> q(15, 0.9);
        q[0] = 0.10;
        q[1] = 0.001;
        AdjustedReport gated = adjusted_pvalues(tree_basic(t), q);
        REQUIRE(gated.adjusted[0] == Catch::Approx(0.10).epsilon(1e-12));
        // own requirement 0.002 is dominated by the gate at 0.10
        REQUIRE(gated.adjusted[1] == Catch::Approx(0.10).epsilon(1e-12));
        REQUIRE(gated.breakpoints.size() == 1);
        REQUIRE(gated.final_sets[0].members() == std::vector<std::size_t>{0, 1});
    }
}

TEST_CASE("bisection locates the smallest rejecting level", "[adjusted]") {
    SECTION("scaled-exponent schedule inverts its own critical curve") {
        Schedule sched = sidak_stepdown(2);
        double p = 0.025320565519104;  // 1 - sqrt(0.95)
        double level = bisection_inverse(sched, 0, IndexSet(2), p);
        REQUIRE(level == Catch::Approx(0.05).margin(1e-9));
        REQUIRE(rejects(sched.comparison, p, sched.alpha_of(0, IndexSet(2), level)));
    }

    SECTION("a schedule that never rejects yields the sentinel") {
        Schedule dead;
        dead.id = "dead";
        dead.alpha_of = [](std::size_t, const IndexSet&, double) { return 0.0; };
        REQUIRE(bisection_inverse(dead, 0, IndexSet(1), 0.2) == 1.0);
    }

    SECTION("identity schedule returns the p-value itself") {
        Schedule ident;
        ident.id = "identity";
        ident.alpha_of = [](std::size_t, const IndexSet&, double level) { return level; };
        double level = bisection_inverse(ident, 0, IndexSet(1), 0.3);
        REQUIRE(level == Catch::Approx(0.3).margin(1e-9));
        REQUIRE(level >= 0.3);  // the returned endpoint itself rejects
    }
}

TEST_CASE("bisection walk agrees with the closed-form inverse walk", "[adjusted]") {
    Rng rng(66102);

    SECTION("plain min-share schedule") {
        for (int rep = 0; rep < 40; ++rep) {
            std::vector<double> p = fixtures::random_signal_pvector(rng, 5);
            AdjustedReport exact = adjusted_pvalues(holm(5), p);
            AdjustedReport searched = adjusted_pvalues_bisection(holm(5), p);
            REQUIRE(exact.breakpoints.size() == searched.breakpoints.size());
            for (std::size_t h = 0; h < 5; ++h)
                REQUIRE(searched.adjusted[h] == Catch::Approx(exact.adjusted[h]).margin(1e-8));
        }
    }

    SECTION("structure-aware divisor schedule") {
        LogicalStructure st = fixtures::pairwise_means_structure();
        for (int rep = 0; rep < 40; ++rep) {
            std::vector<double> p = fixtures::random_signal_pvector(rng, 3);
            AdjustedReport exact = adjusted_pvalues(shaffer_s2(st), p);
            AdjustedReport searched = adjusted_pvalues_bisection(shaffer_s2(st), p);
            for (std::size_t h = 0; h < 3; ++h)
                REQUIRE(searched.adjusted[h] == Catch::Approx(exact.adjusted[h]).margin(1e-8));
        }
    }
}

TEST_CASE("divisor-aware adjustment uses the post-rejection budget", "[adjusted]") {
    LogicalStructure st = fixtures::pairwise_means_structure();
    std::vector<double> p = {0.001, 0.04, 0.30};
    AdjustedReport report = adjusted_pvalues(shaffer_s2(st), p);
    REQUIRE(report.adjusted[0] == Catch::Approx(0.003).epsilon(1e-12));
    // after one rejection the divisor collapses to 1, so the raw value stands
    REQUIRE(report.adjusted[1] == Catch::Approx(0.04).epsilon(1e-12));
    REQUIRE(report.adjusted[2] == Catch::Approx(0.30).epsilon(1e-12));
    require_grid_consistency(shaffer_s2(st), p, report);
}

TEST_CASE("report grids reproduce full runs across levels", "[adjusted]") {
    Rng rng(66103);

    SECTION("min-share and scaled-exponent schedules") {
        for (int rep = 0; rep < 60; ++rep) {
            std::vector<double> p = fixtures::random_signal_pvector(rng, 6);
            require_grid_consistency(holm(6), p, adjusted_pvalues(holm(6), p));
            require_grid_consistency(sidak_stepdown(6), p,
                                     adjusted_pvalues(sidak_stepdown(6), p));
        }
    }

    SECTION("structure-aware schedules") {
        LogicalStructure pw = fixtures::pairwise_means_structure();
        LogicalStructure ms = fixtures::mu_sum_structure();
        for (int rep = 0; rep < 60; ++rep) {
            std::vector<double> p3 = fixtures::random_signal_pvector(rng, 3);
            require_grid_consistency(shaffer_s2(pw), p3, adjusted_pvalues(shaffer_s2(pw), p3));
            require_grid_consistency(hommel_p3(ms), p3, adjusted_pvalues(hommel_p3(ms), p3));
        }
    }

    SECTION("gatekeeping schedules") {
        std::vector<IndexSet> families;
        IndexSet f1(3), f2(3);
        f1.set(0);
        f1.set(1);
        f2.set(2);
        families.push_back(f1);
        families.push_back(f2);
        IndexSet g1(4), g2(4);
        g1.set(0);
        g1.set(1);
        g2.set(2);
        g2.set(3);
        for (int rep = 0; rep < 60; ++rep) {
            std::vector<double> p3 = fixtures::random_signal_pvector(rng, 3);
            std::vector<double> p4 = fixtures::random_signal_pvector(rng, 4);
            Schedule serial = gatekeeping_serial(families);
            require_grid_consistency(serial, p3, adjusted_pvalues(serial, p3));
            Schedule parallel = gatekeeping_parallel(g1, g2, false);
            require_grid_consistency(parallel, p4, adjusted_pvalues(parallel, p4));
            Schedule upgraded = gatekeeping_parallel(g1, g2, true);
            require_grid_consistency(upgraded, p4, adjusted_pvalues(upgraded, p4));
        }
    }

    SECTION("hierarchy schedules") {
        HypothesisTree t = fixtures::tree7();
        for (int rep = 0; rep < 60; ++rep) {
            std::vector<double> p = fixtures::random_signal_pvector(rng, 7);
            require_grid_consistency(tree_basic(t), p, adjusted_pvalues(tree_basic(t), p));
            require_grid_consistency(tree_improved_II(t), p,
                                     adjusted_pvalues(tree_improved_II(t), p));
        }
    }

    SECTION("serial unlock can land inside an earlier stage") {
        std::vector<IndexSet> families;
        IndexSet f1(3), f2(3);
        f1.set(0);
        f1.set(1);
        f2.set(2);
        families.push_back(f1);
        families.push_back(f2);
        // the last gate opens at the very level that finishes the first family
        std::vector<double> p = {0.01, 0.03, 0.03};
        AdjustedReport report = adjusted_pvalues(gatekeeping_serial(families), p);
        REQUIRE(report.adjusted[0] == Catch::Approx(0.02).epsilon(1e-12));
        REQUIRE(report.adjusted[1] == Catch::Approx(0.03).epsilon(1e-12));
        REQUIRE(report.adjusted[2] == Catch::Approx(0.03).epsilon(1e-12));
        REQUIRE(report.breakpoints.size() == 2);
        REQUIRE(report.final_sets[1].count() == 3);
    }
}

TEST_CASE("step-up adjustment matches its own reruns", "[adjusted]") {
    SECTION("descending-scan fixture") {
        std::vector<double> p = {0.04, 0.03, 0.01};
        AdjustedReport report = adjusted_pvalues(hochberg(), p);
        REQUIRE(report.adjusted[0] == Catch::Approx(0.04).epsilon(1e-12));
        REQUIRE(report.adjusted[1] == Catch::Approx(0.04).epsilon(1e-12));
        REQUIRE(report.adjusted[2] == Catch::Approx(0.03).epsilon(1e-12));
        require_report_shape(report);
    }

    SECTION("grid consistency for plain and structure-capped rules") {
        Rng rng(66104);
        OrderedCriticalValues plain = hochberg();
        OrderedCriticalValues capped = shaffer_stepup(fixtures::pairwise_means_structure());
        for (int rep = 0; rep < 80; ++rep) {
            std::vector<double> p = fixtures::random_signal_pvector(rng, 3);
            AdjustedReport rp = adjusted_pvalues(plain, p);
            AdjustedReport rc = adjusted_pvalues(capped, p);
            require_report_shape(rp);
            require_report_shape(rc);
            for (double level : kLevelGrid) {
                REQUIRE(rejections_at(rp, level) == run_stepup_final(plain, p, level));
                REQUIRE(rejections_at(rc, level) == run_stepup_final(capped, p, level));
            }
            // the capped rule never does worse at any stage
            for (std::size_t h = 0; h < 3; ++h) REQUIRE(rc.adjusted[h] <= rp.adjusted[h]);
        }
    }
}

TEST_CASE("an inconsistent level inverse is reported, not absorbed", "[adjusted]") {
    SECTION("claiming a level that rejects nothing") {
        Schedule liar;
        liar.id = "liar";
        liar.alpha_of = [](std::size_t, const IndexSet&, double level) { return level / 3.0; };
        liar.inverse_alpha = [](std::size_t, const IndexSet&, double p) { return p; };
        std::vector<double> p = {0.2, 0.5, 0.9};
        REQUIRE_THROWS_AS(adjusted_pvalues(liar, p), std::logic_error);
    }

    SECTION("claiming the same level twice") {
        Schedule stuck;
        stuck.id = "stuck";
        stuck.alpha_of = [](std::size_t, const IndexSet&, double level) { return level; };
        stuck.inverse_alpha = [](std::size_t, const IndexSet&, double) { return 0.4; };
        std::vector<double> p = {0.1, 0.5, 0.9};
        REQUIRE_THROWS_AS(adjusted_pvalues(stuck, p), std::logic_error);
    }
}

TEST_CASE("certain rejections are reported at level zero", "[adjusted]") {
    std::vector<double> p = {0.0, 0.6, 0.7};
    AdjustedReport report = adjusted_pvalues(holm(3), p);
    REQUIRE(report.adjusted[0] == 0.0);
    REQUIRE(report.adjusted[1] == 1.0);
    REQUIRE(report.adjusted[2] == 1.0);
    REQUIRE(report.breakpoints == std::vector<double>{0.0});
    REQUIRE(report.final_sets[0].members() == std::vector<std::size_t>{0});

    SECTION("several certain rejections share one breakpoint") {
        std::vector<double> q = {0.0, 0.0, 0.5};
        AdjustedReport r2 = adjusted_pvalues(holm(3), q);
        REQUIRE(r2.adjusted[0] == 0.0);
        REQUIRE(r2.adjusted[1] == 0.0);
        REQUIRE(r2.breakpoints.front() == 0.0);
        REQUIRE(r2.final_sets.front().members() == std::vector<std::size_t>{0, 1});
    }
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fixtures.hpp"

using namespace seqrej;
using namespace fixtures;

TEST_CASE("equal-split step-down critical values", "[bonferroni]") {
    auto sched = holm(3);
    const double a = 0.05;
    REQUIRE(sched.alpha_of(0, IndexSet(3), a) == Catch::Approx(a / 3));
    REQUIRE(sched.alpha_of(2, IndexSet::of(3, {0}), a) == Catch::Approx(a / 2));
    REQUIRE(sched.alpha_of(2, IndexSet::of(3, {0, 1}), a) == Catch::Approx(a));
    REQUIRE(sched.justification == Justification::bonferroni_shaffer);

    SECTION("rejection set matches the sorting oracle") {
        Rng rng(23);
        for (int rep = 0; rep < 500; ++rep) {
            auto p = random_signal_pvector(rng, 5);
            REQUIRE(run_final(holm(5), p, 0.05) == holm_oracle(p, 0.05));
        }
    }
}

TEST_CASE("weighted split follows the remaining weight", "[bonferroni]") {
    auto sched = holm_weighted({2.0, 1.0, 1.0});
    const double a = 0.05;
    // H1 carries half the total weight
    REQUIRE(sched.alpha_of(0, IndexSet(3), a) == Catch::Approx(a / 2));
    REQUIRE(sched.alpha_of(1, IndexSet(3), a) == Catch::Approx(a / 4));
    // once H1 is gone the remaining weights split evenly
    REQUIRE(sched.alpha_of(1, IndexSet::of(3, {0}), a) == Catch::Approx(a / 2));

    SECTION("uniform weights reduce to the unweighted schedule") {
        auto w = holm_weighted({1.0, 1.0, 1.0, 1.0});
        auto u = holm(4);
        for (std::uint64_t mask = 0; mask < 15; ++mask) {
            auto r = IndexSet::from_mask(4, mask);
            for (std::size_t h = 0; h < 4; ++h)
                if (!r.test(h))
                    REQUIRE(w.alpha_of(h, r, a) == Catch::Approx(u.alpha_of(h, r, a)));
        }
    }

    SECTION("weight validation") {
        REQUIRE_THROWS_AS(holm_weighted({1.0, -2.0}), std::invalid_argument);
        REQUIRE_THROWS_AS(holm_weighted({0.0, 0.0}), std::invalid_argument);
        REQUIRE_THROWS_AS(holm_weighted(std::vector<double>{}), std::invalid_argument);
        // a zero weight is allowed; that hypothesis just never gets a share
        auto z = holm_weighted({1.0, 0.0});
        REQUIRE(z.alpha_of(1, IndexSet(2), 0.05) == Catch::Approx(0.0));
        REQUIRE(z.alpha_of(0, IndexSet(2), 0.05) == Catch::Approx(0.05));
    }
}

TEST_CASE("exponential-split step-down", "[bonferroni]") {
    auto sched = sidak_stepdown(2);
    const double a = 0.05;
    // 1 - (1-a)^(1/2)
    REQUIRE(sched.alpha_of(0, IndexSet(2), a) == Catch::Approx(0.025320565519104).epsilon(1e-9));
    REQUIRE(sched.alpha_of(1, IndexSet::of(2, {0}), a) == Catch::Approx(a));

    SECTION("dominates the equal split everywhere") {
        auto h4 = holm(4);
        auto s4 = sidak_stepdown(4);
        for (std::uint64_t mask = 0; mask < 15; ++mask) {
            auto r = IndexSet::from_mask(4, mask);
            for (std::size_t h = 0; h < 4; ++h)
                if (!r.test(h))
                    REQUIRE(s4.alpha_of(h, r, a) >= h4.alpha_of(h, r, a) - 1e-15);
        }
    }

    SECTION("declared distributional assumption") {
        REQUIRE(sched.justification == Justification::sidak);
        REQUIRE(sched.assumptions.count("sidak-inequality") == 1);
    }
}

TEST_CASE("truth-count split over the pairwise structure", "[bonferroni]") {
    auto st = pairwise_means_structure();
    auto sched = shaffer_s2(st);
    const double a = 0.05;

    // nothing rejected: three equalities can all hold
    REQUIRE(sched.alpha_of(0, IndexSet(3), a) == Catch::Approx(a / 3));
    // one rejected: at most one equality can survive
    REQUIRE(sched.alpha_of(1, IndexSet::of(3, {0}), a) == Catch::Approx(a));
    REQUIRE(sched.alpha_of(2, IndexSet::of(3, {0, 1}), a) == Catch::Approx(a));

    SECTION("no remaining truth pattern means a free pass") {
        auto one_atom = LogicalStructure::with_atoms(
            Universe::numbered(2), {IndexSet::of(2, {0})});
        auto s = shaffer_s2(one_atom);
        // rejecting H1 leaves no consistent pattern at all
        REQUIRE(s.alpha_of(1, IndexSet::of(2, {0}), a) == Catch::Approx(1.0));
    }

    SECTION("free structures reduce to the equal split") {
        auto s = shaffer_s2(LogicalStructure::free_form(Universe::numbered(4)));
        auto h = holm(4);
        for (std::uint64_t mask = 0; mask < 15; ++mask) {
            auto r = IndexSet::from_mask(4, mask);
            for (std::size_t hh = 0; hh < 4; ++hh)
                if (!r.test(hh))
                    REQUIRE(s.alpha_of(hh, r, a) == Catch::Approx(h.alpha_of(hh, r, a)));
        }
    }
}

TEST_CASE("per-hypothesis truth-count split", "[bonferroni]") {
    auto st = pairwise_means_structure();
    auto sched = hommel_p3(st);
    const double a = 0.05;

    REQUIRE(sched.alpha_of(0, IndexSet(3), a) == Catch::Approx(a / 3));
    // after rejecting H12, any truth pattern containing H23 has one true member
    REQUIRE(sched.alpha_of(1, IndexSet::of(3, {0}), a) == Catch::Approx(a));

    SECTION("never tighter than the shared split") {
        for (auto* make : {&pairwise_means_structure, &mu_sum_structure}) {
            auto structure = (*make)();
            auto shared = shaffer_s2(structure);
            auto perh = hommel_p3(structure);
            for (std::uint64_t mask = 0; mask < 8; ++mask) {
                auto r = IndexSet::from_mask(3, mask);
                for (std::size_t h = 0; h < 3; ++h)
                    if (!r.test(h))
                        REQUIRE(perh.alpha_of(h, r, a) >= shared.alpha_of(h, r, a) - 1e-15);
            }
        }
    }

    SECTION("strictly better for a hypothesis that never co-holds with the rest") {
        // A and B can hold together; C only ever holds alone.
        auto lopsided = LogicalStructure::with_atoms(
            Universe(std::vector<std::string>{"A", "B", "C"}),
            {IndexSet::of(3, {0, 1}), IndexSet::of(3, {0}), IndexSet::of(3, {1}),
             IndexSet::of(3, {2}), IndexSet(3)});
        auto shared = shaffer_s2(lopsided);
        auto perh = hommel_p3(lopsided);
        // the shared split sees two co-tenable hypotheses and halves the level
        REQUIRE(shared.alpha_of(2, IndexSet(3), a) == Catch::Approx(a / 2));
        // C's own truth patterns are all singletons, so it keeps the full level
        REQUIRE(perh.alpha_of(2, IndexSet(3), a) == Catch::Approx(a));
        // and the single-step budget still balances
        REQUIRE(check_single_step_bound(perh, lopsided, a).status == SingleStepStatus::ok);
    }

    SECTION("free structures reduce to the equal split") {
        auto s = hommel_p3(LogicalStructure::free_form(Universe::numbered(4)));
        auto h = holm(4);
        for (std::uint64_t mask = 0; mask < 15; ++mask) {
            auto r = IndexSet::from_mask(4, mask);
            for (std::size_t hh = 0; hh < 4; ++hh)
                if (!r.test(hh))
                    REQUIRE(s.alpha_of(hh, r, a) == Catch::Approx(h.alpha_of(hh, r, a)));
        }
    }
}

TEST_CASE("structured splits reject more in practice", "[bonferroni]") {
    Rng rng(31);
    auto st = pairwise_means_structure();
    auto base = holm(3);
    auto shared = shaffer_s2(st);
    auto perh = hommel_p3(st);
    std::size_t extra_shared = 0;
    for (int rep = 0; rep < 300; ++rep) {
        auto p = random_signal_pvector(rng, 3);
        auto rb = run_final(base, p, 0.05);
        auto rs = run_final(shared, p, 0.05);
        auto rp = run_final(perh, p, 0.05);
        REQUIRE(rb.is_subset_of(rs));
        REQUIRE(rs.is_subset_of(rp));
        if (rs.count() > rb.count()) ++extra_shared;
    }
    REQUIRE(extra_shared > 0);
}

#include <doctest.h>

#include <bit>
#include <cmath>

#include "colat/error.hpp"
#include "colat/io.hpp"
#include "colat/lattice.hpp"
#include "support.hpp"

using namespace colat;

namespace {

const Universe& paper_universe() {
    static Universe u({"P", "T", "M", "SR", "R"});
    return u;
}

CoalitionTable fixture_8b() { return load_coalition_csv(testsup::data_path("hotpotqa_8b.csv")); }

}  // namespace

TEST_CASE("parse_component_set handles names, aliases, and errors") {
    const Universe& u = paper_universe();

    CHECK(parse_component_set("T", u).mask() == 0b00010);
    CHECK(parse_component_set("Bare", u).mask() == 0);
    CHECK(parse_component_set("", u).mask() == 0);
    CHECK(parse_component_set("All-In", u).mask() == u.full_mask());
    CHECK(parse_component_set("T+SR+R", u).mask() == 0b11010);
    // Order in the expression does not matter; the mask is canonical.
    CHECK(parse_component_set("R+T+SR", u).mask() == 0b11010);

    CHECK_THROWS_WITH_AS(parse_component_set("T+X", u), doctest::Contains("X"), Error);
    try {
        parse_component_set("T+X", u);
    } catch (const Error& e) {
        CHECK(e.kind() == "UnknownComponent");
    }
    try {
        parse_component_set("T+T", u);
    } catch (const Error& e) {
        CHECK(e.kind() == "DuplicateComponent");
    }
    // Case-sensitive.
    CHECK_THROWS_AS(parse_component_set("t", u), Error);
}

TEST_CASE("format_component_set round-trips labels") {
    const Universe& u = paper_universe();
    CHECK(format_component_set(u, 0) == "Bare");
    CHECK(format_component_set(u, u.full_mask()) == "All-In");
    CHECK(format_component_set(u, 0b11010) == "T+SR+R");
    for (Mask m = 0; m < 32; ++m) {
        CHECK(parse_component_set(format_component_set(u, m), u).mask() == m);
    }
}

TEST_CASE("universe rejects bad names and oversize") {
    CHECK_THROWS_AS(Universe({"a", "a"}), Error);
    CHECK_THROWS_AS(Universe({"value"}), Error);
    CHECK_THROWS_AS(Universe({"Bare"}), Error);
    CHECK_THROWS_AS(Universe({"a b"}), Error);
    std::vector<std::string> many;
    for (int i = 0; i < 21; ++i) many.push_back("c" + std::to_string(i));
    CHECK_THROWS_AS(Universe(many), Error);
    CHECK(Universe(testsup::letters(20)).size() == 20);
}

TEST_CASE("coalition table completeness and errors") {
    CoalitionTable t(Universe({"a", "b"}));
    CHECK_FALSE(t.complete());
    CHECK_THROWS_AS(t.require_complete(), Error);
    t.set(0, 0.0);
    t.set(1, 0.5);
    CHECK_THROWS_AS((void)t.value(2), Error);
    CHECK_THROWS_AS(t.set(1, std::nan("")), Error);
    t.set(2, 0.25);
    t.set(3, 1.0);
    CHECK(t.complete());
    CHECK(t.value(3) == 1.0);

    // k = 0 is legal: one coalition, empty phi.
    CoalitionTable empty_u{Universe({})};
    empty_u.set(0, 0.3);
    CHECK(empty_u.complete());
    ShapleyReport rep = shapley(empty_u);
    CHECK(rep.phi.empty());
    CHECK(rep.efficiency_gap == 0.0);
}

TEST_CASE("marginals on the bundled table match published deltas") {
    CoalitionTable table = fixture_8b();
    const Universe& u = table.universe();

    CHECK(marginal(table, parse_component_set("T", u), "SR") == doctest::Approx(-0.067).epsilon(1e-9));
    CHECK(marginal(table, parse_component_set("P+R+T", u), "SR") ==
          doctest::Approx(0.094).epsilon(1e-9));

    // Additive table: every marginal equals the component weight.
    CoalitionTable add = testsup::additive_table({0.5, -0.25, 0.125}, 0.1);
    SplitMix64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        Mask s = static_cast<Mask>(rng.next_below(8));
        std::size_t i = rng.next_below(3);
        if ((s >> i) & 1u) continue;
        double w = (i == 0 ? 0.5 : i == 1 ? -0.25 : 0.125);
        CHECK(marginal(add, ComponentSet(add.universe(), s), i) ==
              doctest::Approx(w).epsilon(1e-12));
    }

    CHECK_THROWS_AS(marginal(table, parse_component_set("T", u), "T"), Error);
    try {
        marginal(table, parse_component_set("T", u), "T");
    } catch (const Error& e) {
        CHECK(e.kind() == "MemberAlreadyPresent");
    }

    CoalitionTable partial(u);
    partial.set(0, 0.0);
    try {
        marginal(partial, ComponentSet(u, 0), std::size_t{1});
    } catch (const Error& e) {
        CHECK(e.kind() == "MissingCoalition");
    }
}

TEST_CASE("mobius transform reproduces published dividends") {
    CoalitionTable table = fixture_8b();
    HarsanyiSpectrum spectrum = mobius_transform(table);
    const Universe& u = table.universe();

    Mask t_mask = parse_component_set("T", u).mask();
    Mask tsrr = parse_component_set("T+SR+R", u).mask();
    CHECK(spectrum.dividend(t_mask) == doctest::Approx(0.237).epsilon(1e-9));
    CHECK(spectrum.dividend(tsrr) == doctest::Approx(0.174).epsilon(1e-9));

    // Matches direct inclusion-exclusion everywhere.
    for (Mask m = 0; m < 32; ++m) {
        CHECK(spectrum.dividend(m) ==
              doctest::Approx(testsup::dividend_oracle(table, m)).epsilon(1e-12));
        CHECK(harsanyi_dividend(table, m) ==
              doctest::Approx(spectrum.dividend(m)).epsilon(1e-12));
    }

    CoalitionTable incomplete(u);
    incomplete.set(0, 1.0);
    CHECK_THROWS_AS(mobius_transform(incomplete), Error);
}

TEST_CASE("mobius inversion round-trip on random tables") {
    SplitMix64 rng(20260810);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t k = 1 + rng.next_below(8);
        CoalitionTable table = testsup::random_table(k, rng);
        CoalitionTable back = mobius_transform(table).reconstruct();
        for (Mask m = 0; m < table.num_coalitions(); ++m) {
            REQUIRE(std::fabs(back.value(m) - table.value(m)) <= 1e-12);
        }
    }
}

TEST_CASE("additive tables have no interactions of order >= 2") {
    CoalitionTable add = testsup::additive_table({0.3, -0.2, 0.7, 0.05}, 0.2);
    HarsanyiSpectrum spectrum = mobius_transform(add);
    for (Mask m = 0; m < add.num_coalitions(); ++m) {
        if (std::popcount(m) >= 2) {
            CHECK(std::fabs(spectrum.dividend(m)) <= 1e-12);
        }
    }
}

TEST_CASE("shapley matches the published attribution on the bundled table") {
    CoalitionTable table = fixture_8b();
    ShapleyReport report = shapley(table);
    const Universe& u = table.universe();

    CHECK(report.phi[u.require_index("T")] == doctest::Approx(0.177).epsilon(0.03));
    CHECK(report.phi[u.require_index("T")] == doctest::Approx(0.1771166667).epsilon(1e-9));
    CHECK(report.phi[u.require_index("SR")] == doctest::Approx(0.0272).epsilon(1e-9));
    CHECK(report.phi[u.require_index("R")] == doctest::Approx(0.0041166667).epsilon(1e-7));
    CHECK(report.phi[u.require_index("M")] == doctest::Approx(-0.0159666667).epsilon(1e-9));
    CHECK(report.phi[u.require_index("P")] == doctest::Approx(-0.0294666667).epsilon(1e-9));

    double total = 0.0;
    for (double p : report.phi) total += p;
    CHECK(total == doctest::Approx(0.163).epsilon(1e-9));  // f(All-In) - f(Bare)
    CHECK(std::fabs(report.efficiency_gap) <= 1e-12);
}

TEST_CASE("shapley axioms on random tables") {
    SplitMix64 rng(99);

    SUBCASE("efficiency and cross-oracle against permutation enumeration") {
        for (int trial = 0; trial < 25; ++trial) {
            std::size_t k = 1 + rng.next_below(5);
            CoalitionTable table = testsup::random_table(k, rng);
            ShapleyReport report = shapley(table);
            CHECK(std::fabs(report.efficiency_gap) <= 1e-12);
            std::vector<double> oracle = testsup::shapley_permutation_oracle(table);
            for (std::size_t i = 0; i < k; ++i) {
                REQUIRE(std::fabs(report.phi[i] - oracle[i]) <= 1e-12);
            }
            // Dual internal routes agree too.
            std::vector<double> weighted = shapley_weighted_marginals(table);
            for (std::size_t i = 0; i < k; ++i) {
                REQUIRE(std::fabs(report.phi[i] - weighted[i]) <= 1e-12);
            }
        }
    }

    SUBCASE("symmetry: swapping two symmetric components fixes phi") {
        // f depends only on |S| -> all components symmetric.
        CoalitionTable table = testsup::concave_cardinality_table(5, 0.8);
        ShapleyReport report = shapley(table);
        for (std::size_t i = 1; i < 5; ++i) {
            CHECK(report.phi[i] == doctest::Approx(report.phi[0]).epsilon(1e-12));
        }
    }

    SUBCASE("dummy: constant-marginal component gets exactly that marginal") {
        for (int trial = 0; trial < 10; ++trial) {
            CoalitionTable base = testsup::random_table(4, rng);
            double m = rng.next_double();
            // Extend with component 'e' adding constant m.
            CoalitionTable ext{Universe(testsup::letters(5))};
            for (Mask s = 0; s < 16; ++s) {
                ext.set(s, base.value(s));
                ext.set(s | 16u, base.value(s) + m);
            }
            ShapleyReport report = shapley(ext);
            CHECK(report.phi[4] == doctest::Approx(m).epsilon(1e-12));
        }
    }

    SUBCASE("linearity: shapley(a*f + b*g) = a*shapley(f) + b*shapley(g)") {
        for (int trial = 0; trial < 10; ++trial) {
            std::size_t k = 1 + rng.next_below(6);
            CoalitionTable f = testsup::random_table(k, rng);
            CoalitionTable g = testsup::random_table(k, rng);
            double alpha = rng.next_double() * 4 - 2;
            double beta = rng.next_double() * 4 - 2;
            CoalitionTable mix{f.universe()};
            for (Mask m = 0; m < f.num_coalitions(); ++m) {
                mix.set(m, alpha * f.value(m) + beta * g.value(m));
            }
            ShapleyReport rf = shapley(f);
            ShapleyReport rg = shapley(g);
            ShapleyReport rmix = shapley(mix);
            for (std::size_t i = 0; i < k; ++i) {
                REQUIRE(std::fabs(rmix.phi[i] - (alpha * rf.phi[i] + beta * rg.phi[i])) <=
                        1e-10);
            }
        }
    }
}

TEST_CASE("abs_mass_share") {
    CoalitionTable table = fixture_8b();
    ShapleyReport report = shapley(table);
    std::vector<double> shares = abs_mass_share(report);
    const Universe& u = table.universe();

    CHECK(shares[u.require_index("T")] == doctest::Approx(0.697676).epsilon(1e-4));
    double sum = 0.0;
    for (double s : shares) sum += s;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

    ShapleyReport single{Universe({"a", "b"}), {0.0, 0.4}, 0.0};
    std::vector<double> s1 = abs_mass_share(single);
    CHECK(s1[1] == 1.0);

    ShapleyReport balanced{Universe({"a", "b"}), {0.1, -0.1}, 0.0};
    std::vector<double> s2 = abs_mass_share(balanced);
    CHECK(s2[0] == doctest::Approx(0.5));
    CHECK(s2[1] == doctest::Approx(0.5));

    ShapleyReport zero{Universe({"a", "b"}), {0.0, 0.0}, 0.0};
    try {
        abs_mass_share(zero);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == "AllZero");
    }
}

TEST_CASE("task matrix basics") {
    Universe u(testsup::letters(2));
    TaskMatrix matrix(u, {0, 1, 2, 3});
    matrix.add_task("t0", {0.0, 1.0, 0.5, 1.5});
    matrix.add_task("t1", {0.2, 0.8, 0.7, 1.3});
    CHECK(matrix.covers_full_lattice());
    CHECK(matrix.covers_sublattice(3));

    CoalitionTable mean = matrix.mean_table();
    CHECK(mean.value(0) == doctest::Approx(0.1));
    CHECK(mean.value(3) == doctest::Approx(1.4));

    CoalitionTable one = matrix.mean_table(std::vector<std::size_t>{1, 1});
    CHECK(one.value(2) == doctest::Approx(0.7));

    TaskMatrix partial(u, {0, 1});
    partial.add_task("t0", {0.0, 1.0});
    CHECK_FALSE(partial.covers_full_lattice());
    CHECK(partial.covers_sublattice(1));
    CHECK_FALSE(partial.covers_sublattice(2));

    CHECK_THROWS_AS(matrix.add_task("bad", {1.0}), Error);
    CHECK_THROWS_AS(TaskMatrix(u, {0, 0}), Error);
}

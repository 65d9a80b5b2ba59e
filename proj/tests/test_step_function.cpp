#include "mtype_lab/step_function.hpp"

#include "mtype_lab/errors.hpp"
#include "mtype_lab/haar.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <stdexcept>

using namespace mtype;

namespace {

StepFunction scalar_step(std::vector<Rational> bps, std::vector<Rational> vals) {
    std::vector<std::vector<QuadRational>> v;
    for (auto& x : vals) v.push_back({QuadRational(x)});
    return StepFunction(IntervalPartition(std::move(bps)), std::move(v), 1);
}

} // namespace

TEST_CASE("interval partition invariants") {
    CHECK_THROWS_AS(IntervalPartition({Rational(0)}), std::invalid_argument);
    CHECK_THROWS_AS(IntervalPartition({make_rational(1, 2), Rational(1)}), std::invalid_argument);
    CHECK_THROWS_AS(IntervalPartition({Rational(0), make_rational(1, 2)}), std::invalid_argument);
    CHECK_THROWS_AS(
        IntervalPartition({Rational(0), make_rational(1, 2), make_rational(1, 2), Rational(1)}),
        std::invalid_argument);

    IntervalPartition p = IntervalPartition::dyadic(2);
    CHECK(p.cell_count() == 4);
    CHECK(p.cell_of(make_rational(1, 4)) == 1);
    CHECK(p.cell_of(Rational(0)) == 0);
    CHECK(p.cell_of(make_rational(99, 100)) == 3);
    CHECK(p.refines(IntervalPartition::trivial()));
    CHECK(!IntervalPartition::trivial().refines(p));
    CHECK_THROWS_AS(IntervalPartition::dyadic(13), LevelCapError);
}

TEST_CASE("common refinement takes the union of breakpoints") {
    // {0,1/2,1} with {0,1/3,1} -> {0,1/3,1/2,1}
    StepFunction f = scalar_step({Rational(0), make_rational(1, 2), Rational(1)},
                                 {Rational(1), Rational(2)});
    StepFunction g = scalar_step({Rational(0), make_rational(1, 3), Rational(1)},
                                 {Rational(5), Rational(7)});
    auto [rf, rg] = common_refinement(f, g);
    std::vector<Rational> want{Rational(0), make_rational(1, 3), make_rational(1, 2), Rational(1)};
    CHECK(rf.partition().breakpoints() == want);
    CHECK(rg.partition().breakpoints() == want);
    CHECK(rf == f);
    CHECK(rg == g);

    // identical partitions stay as they are
    auto [af, ag] = common_refinement(f, f);
    CHECK(af.partition() == f.partition());
    CHECK(ag == f);

    // constant function split against {0,1/4,1}: values agree pointwise
    StepFunction c = StepFunction::constant({QuadRational(3)});
    StepFunction h = scalar_step({Rational(0), make_rational(1, 4), Rational(1)},
                                 {Rational(0), Rational(1)});
    auto [rc, rh] = common_refinement(c, h);
    CHECK(rc.cell_count() == 2);
    for (std::size_t i = 0; i < rc.cell_count(); ++i) {
        Rational mid = (rc.partition().cell_left(i) + rc.partition().cell_right(i)) / 2;
        CHECK(rc.evaluate(mid) == c.evaluate(mid));
        CHECK(rh.evaluate(mid) == h.evaluate(mid));
    }
}

TEST_CASE("canonical form merges equal adjacent cells") {
    StepFunction f = scalar_step({Rational(0), make_rational(1, 4), make_rational(1, 2), Rational(1)},
                                 {Rational(2), Rational(2), Rational(2)});
    CHECK(f.canonical().cell_count() == 1);
    CHECK(f == StepFunction::constant({QuadRational(2)}));
}

TEST_CASE("l2 norm squares") {
    StepFunction f = StepFunction::constant({QuadRational(1), QuadRational(1)});
    CHECK(l2_norm_sq(f, NormKind::l1()) == QuadRational(4));
    CHECK(l2_norm_sq(f, NormKind::l2()) == QuadRational(2));
    CHECK(l2_norm_sq(f, NormKind::linf()) == QuadRational(1));

    CHECK(l2_norm_sq(haar_fn({1, 1}), NormKind::l2()) == QuadRational(1));
    CHECK(l2_norm_sq(haar_fn({3, 2}), NormKind::l2()) == QuadRational(1));
}

TEST_CASE("weighted l2 sum norm") {
    // Two blocks of dimension 2 with weights 1/2 and 1/3, inner l1.
    NormKind wl2 = NormKind::weighted_l2({make_rational(1, 2), make_rational(1, 3)},
                                         NormKind::l1());
    std::vector<QuadRational> v{QuadRational(1), QuadRational(-1), QuadRational(3), QuadRational(0)};
    // 1/2 * (|1|+|-1|)^2 + 1/3 * 3^2 = 2 + 3 = 5
    CHECK(wl2.norm_sq(v) == QuadRational(5));
    CHECK_THROWS_AS(NormKind::weighted_l2({Rational(0)}, NormKind::l1()), std::invalid_argument);
    CHECK_THROWS_AS(wl2.dual(), std::domain_error);
}

TEST_CASE("pairing is the exact integral of the coordinate product") {
    StepFunction z = StepFunction::zero(1);
    CHECK(pairing(haar_fn({1, 1}), z) == QuadRational(0));
    CHECK(pairing(haar_fn({1, 1}), haar_fn({1, 1})) == QuadRational(1));
    CHECK(pairing(haar_fn({1, 1}), haar_fn({2, 1})) == QuadRational(0));
    StepFunction two = StepFunction::constant({QuadRational(2), QuadRational(3)});
    CHECK_THROWS_AS(pairing(two, z), std::invalid_argument);
}

TEST_CASE("conditional expectation basics") {
    testing::Gen gen(101);
    StepFunction f = gen.step_function(2);

    // Trivial sigma-algebra: the average.
    StepFunction e0 = conditional_expectation(f, IntervalPartition::trivial());
    CHECK(e0.canonical().cell_count() == 1);

    // Own partition: identity.
    CHECK(conditional_expectation(f, f.partition()) == f);

    // chi_2^(1) averages to zero on {0,1/2,1}.
    StepFunction e = conditional_expectation(
        haar_fn({2, 1}), IntervalPartition({Rational(0), make_rational(1, 2), Rational(1)}));
    CHECK(e.is_zero());
}

TEST_CASE("conditional expectation properties on random inputs") {
    testing::Gen gen(202);
    for (int i = 0; i < 40; ++i) {
        StepFunction f = gen.step_function(2);
        StepFunction g = gen.step_function(2);
        IntervalPartition p = gen.step_function(1).partition();

        StepFunction ef = conditional_expectation(f, p);
        // contraction: ||E f|| <= ||f|| for every norm kind
        CHECK(l2_norm_sq(ef, NormKind::l2()) <= l2_norm_sq(f, NormKind::l2()));
        CHECK(l2_norm_sq(ef, NormKind::l1()) <= l2_norm_sq(f, NormKind::l1()));
        // idempotence
        CHECK(conditional_expectation(ef, p) == ef);
        // linearity
        CHECK(conditional_expectation(f + g, p) == ef + conditional_expectation(g, p));
        // self-adjointness
        CHECK(pairing(ef, g) == pairing(f, conditional_expectation(g, p)));
    }
}

TEST_CASE("transport squeezes into the j-th block") {
    StepFunction c = StepFunction::constant({QuadRational(5)});
    CHECK(transport(c, 1, 1) == c);

    StepFunction t = transport(c, 2, 3);
    CHECK(t.evaluate(make_rational(1, 2))[0] == QuadRational(5));
    CHECK(t.evaluate(make_rational(1, 6))[0] == QuadRational(0));
    CHECK(t.evaluate(make_rational(5, 6))[0] == QuadRational(0));
    CHECK_THROWS_AS(transport(c, 4, 3), std::invalid_argument);
    CHECK_THROWS_AS(transport(c, 0, 3), std::invalid_argument);

    testing::Gen gen(303);
    for (int i = 0; i < 24; ++i) {
        StepFunction f = gen.step_function(2);
        long m = 2 + gen.below(4);
        long j = 1 + gen.below(m);
        StepFunction tf = transport(f, j, m);
        // norm scaling by 1/m, exactly
        CHECK(l2_norm_sq(tf, NormKind::l2()) * QuadRational(Rational(m)) ==
              l2_norm_sq(f, NormKind::l2()));
        // disjoint supports across different blocks
        long j2 = 1 + gen.below(m);
        if (j2 != j) {
            StepFunction other = transport(f, j2, m);
            auto [a, b] = common_refinement(tf, other);
            for (std::size_t cell = 0; cell < a.cell_count(); ++cell) {
                bool a_zero = true, b_zero = true;
                for (const auto& x : a.value_on_cell(cell)) a_zero = a_zero && x.is_zero();
                for (const auto& x : b.value_on_cell(cell)) b_zero = b_zero && x.is_zero();
                CHECK((a_zero || b_zero));
            }
        }
    }
}

TEST_CASE("degenerate inputs are rejected") {
    CHECK_THROWS_AS(StepFunction::zero(0), std::invalid_argument);
    CHECK_THROWS_AS(StepFunction(IntervalPartition::trivial(), {}, 1), std::invalid_argument);
    CHECK_THROWS_AS(StepFunction(IntervalPartition::trivial(),
                                 {{QuadRational(1), QuadRational(2)}}, 1),
                    std::invalid_argument);
}

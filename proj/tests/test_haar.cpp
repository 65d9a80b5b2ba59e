#include "mtype_lab/haar.hpp"

#include "mtype_lab/errors.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <stdexcept>

using namespace mtype;

TEST_CASE("haar function values") {
    CHECK(haar_fn({0, 0}) == StepFunction::constant({QuadRational(1)}));

    StepFunction h11 = haar_fn({1, 1});
    CHECK(h11.evaluate(Rational(0))[0] == QuadRational(1));
    CHECK(h11.evaluate(make_rational(3, 4))[0] == QuadRational(-1));

    StepFunction h21 = haar_fn({2, 1});
    CHECK(h21.evaluate(Rational(0))[0] == QuadRational::sqrt2());
    CHECK(h21.evaluate(make_rational(1, 4))[0] == -QuadRational::sqrt2());
    CHECK(h21.evaluate(make_rational(3, 4))[0] == QuadRational(0));

    CHECK_THROWS_AS(haar_fn({1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(haar_fn({0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(haar_fn({13, 1}), LevelCapError);
}

TEST_CASE("dyadic trees") {
    CHECK(tree(1, 1) == std::vector<TreeIndex>{{1, 1}});
    auto d02 = tree(0, 2);
    CHECK(d02.size() == 4);
    CHECK(d02[0] == TreeIndex{0, 0});
    CHECK(d02[3] == TreeIndex{2, 2});
    CHECK(tree(2, 3).size() == 6);
    CHECK(tree(1, 4).size() == 15);
    CHECK_THROWS_AS(tree(3, 2), std::invalid_argument);
    CHECK_THROWS_AS(tree(0, 13), LevelCapError);
}

TEST_CASE("orthonormality up to level 6") {
    auto nodes = tree(0, 6);
    std::vector<StepFunction> fns;
    for (const auto& idx : nodes) fns.push_back(haar_fn(idx));
    for (std::size_t a = 0; a < fns.size(); ++a)
        for (std::size_t b = a; b < fns.size(); ++b) {
            QuadRational want = (a == b) ? QuadRational(1) : QuadRational(0);
            CHECK(pairing(fns[a], fns[b]) == want);
        }
}

TEST_CASE("disjoint supports within a level") {
    for (int k = 1; k <= 5; ++k) {
        IntervalPartition grid = IntervalPartition::dyadic(k);
        for (std::size_t cell = 0; cell < grid.cell_count(); ++cell) {
            int active = 0;
            for (long j = 1; j <= (1L << (k - 1)); ++j) {
                StepFunction h = haar_fn({k, static_cast<int>(j)});
                if (!h.evaluate(grid.cell_left(cell))[0].is_zero()) ++active;
            }
            CHECK(active == 1);
        }
    }
}

TEST_CASE("analyze basics") {
    // Constant function: only the root coefficient survives.
    StepFunction c = StepFunction::constant({QuadRational(3), QuadRational(-1)});
    HaarCoefficients a = analyze(c, 0, 3);
    CHECK(a.at({0, 0}) == std::vector<QuadRational>{QuadRational(3), QuadRational(-1)});
    for (const auto& idx : a.indices()) {
        if (idx.k == 0) continue;
        for (const auto& x : a.at(idx)) CHECK(x.is_zero());
    }

    // The coordinate indicator at n = 1.
    std::vector<std::vector<QuadRational>> vals{{QuadRational(1), QuadRational(0)},
                                                {QuadRational(0), QuadRational(1)}};
    StepFunction f(IntervalPartition::dyadic(1), std::move(vals), 2);
    HaarCoefficients cf = analyze(f, 0, 1);
    CHECK(cf.at({0, 0}) ==
          std::vector<QuadRational>{QuadRational(make_rational(1, 2)),
                                    QuadRational(make_rational(1, 2))});
    CHECK(cf.at({1, 1}) ==
          std::vector<QuadRational>{QuadRational(make_rational(1, 2)),
                                    QuadRational(make_rational(-1, 2))});
}

TEST_CASE("synthesize basics") {
    CHECK(synthesize(HaarCoefficients::zero(0, 3, 2)) == StepFunction::zero(2));

    HaarCoefficients c = HaarCoefficients::zero(1, 2, 1);
    c.set({1, 1}, {QuadRational(make_rational(2, 3))});
    CHECK(synthesize(c) == haar_fn({1, 1}).scaled(QuadRational(make_rational(2, 3))));
}

TEST_CASE("round trips and the projection identity") {
    testing::Gen gen(555);
    for (int i = 0; i < 10; ++i) {
        // analyze(synthesize(c)) = c at every tree start
        for (int m : {0, 1}) {
            HaarCoefficients c = gen.haar_coeffs(m, 3, 2);
            HaarCoefficients back = analyze(synthesize(c), m, 3);
            CHECK(back == c);
        }
        // synthesize(analyze(f)) = E_n f for unaligned partitions
        StepFunction f = gen.step_function(2);
        for (int n : {2, 4}) {
            StepFunction projected = synthesize(analyze(f, 0, n));
            CHECK(projected == conditional_expectation(f, IntervalPartition::dyadic(n)));
        }
    }
}

TEST_CASE("parseval for euclidean value norms") {
    testing::Gen gen(556);
    for (int i = 0; i < 10; ++i) {
        HaarCoefficients c = gen.haar_coeffs(0, 4, 2);
        QuadRational sum;
        for (const auto& x : c.values()) sum += NormKind::l2().norm_sq(x);
        CHECK(l2_norm_sq(synthesize(c), NormKind::l2()) == sum);
    }
}

TEST_CASE("coefficient container validates indices") {
    HaarCoefficients c = HaarCoefficients::zero(1, 2, 2);
    CHECK(c.size() == 3);
    CHECK_THROWS_AS(c.at({0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(c.at({3, 1}), std::invalid_argument);
    CHECK_THROWS_AS(c.set({1, 1}, {QuadRational(1)}), std::invalid_argument);
    CHECK_THROWS_AS(HaarCoefficients::zero(0, 2, 0), std::invalid_argument);
}

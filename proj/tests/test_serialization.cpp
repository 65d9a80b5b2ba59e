#include "mtype_lab/serialization.hpp"

#include "mtype_lab/errors.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace mtype;

TEST_CASE("scalar encoding is the [a, b] pair of rational strings") {
    QuadRational x(make_rational(3, 4), make_rational(-1, 2));
    ojson j = to_json(x);
    CHECK(j.dump() == R"(["3/4","-1/2"])");
    CHECK(quad_rational_from_json(j) == x);
    CHECK_THROWS_AS(quad_rational_from_json(ojson::array({"1/2"})), ParseError);
}

TEST_CASE("step functions round-trip exactly") {
    testing::Gen gen(1000);
    for (int i = 0; i < 25; ++i) {
        StepFunction f = gen.step_function(1 + gen.below(3));
        ojson j = to_json(f);
        StepFunction back = step_function_from_json(j);
        CHECK(back == f);
        CHECK(to_json(back).dump() == j.dump());
    }
    ojson j = to_json(StepFunction::constant({QuadRational(1)}));
    CHECK(j["breakpoints"].dump() == R"(["0","1"])");
}

TEST_CASE("operators round-trip with their spaces") {
    auto ops = {summation_operator(3),
                diagonal_operator({Rational(1), make_rational(1, 2)}),
                OperatorSpec::identity({NormKind::l2(), 2})};
    for (const auto& T : ops) {
        ojson j = to_json(T);
        OperatorSpec back = operator_from_json(j);
        CHECK(back == T);
        CHECK(to_json(back).dump() == j.dump());
    }
    CHECK(to_json(summation_operator(2))["source"] == "l1:2");
}

TEST_CASE("haar coefficients serialize level-major") {
    testing::Gen gen(1001);
    HaarCoefficients c = gen.haar_coeffs(0, 2, 2);
    ojson j = to_json(c);
    std::vector<std::string> keys;
    for (auto it = j["coeffs"].begin(); it != j["coeffs"].end(); ++it) keys.push_back(it.key());
    CHECK(keys == std::vector<std::string>{"0,0", "1,1", "2,1", "2,2"});
    CHECK(haar_coefficients_from_json(j) == c);

    // missing and extra keys are parse errors
    ojson missing = j;
    missing["coeffs"].erase("1,1");
    CHECK_THROWS_AS(haar_coefficients_from_json(missing), ParseError);
    ojson extra = j;
    extra["coeffs"]["9,1"] = extra["coeffs"]["0,0"];
    CHECK_THROWS_AS(haar_coefficients_from_json(extra), ParseError);
}

TEST_CASE("mds bundles round-trip") {
    testing::Gen gen(1002);
    MDS m = glue(gen.dyadic_mds(2, 2), 3);
    ojson j = to_json(m);
    MDS back = mds_from_json(j);
    CHECK(back.length() == m.length());
    CHECK(back.dimension() == m.dimension());
    for (std::size_t k = 0; k < m.length(); ++k) CHECK(back.difference(k) == m.difference(k));
    CHECK(to_json(back).dump() == j.dump());

    StepFunction g = StepFunction::zero(2);
    auto [m2, g2] = witness_bundle_from_json(witness_bundle_to_json(m, &g));
    CHECK(m2.length() == m.length());
    CHECK(bool(g2));
    auto [m3, g3] = witness_bundle_from_json(witness_bundle_to_json(m, nullptr));
    CHECK(!g3);
}

TEST_CASE("malformed documents raise parse errors") {
    CHECK_THROWS_AS(parse_json_text("{ not json"), ParseError);
    CHECK_THROWS_AS(step_function_from_json(parse_json_text(R"({"dimension": 1})")), ParseError);
    CHECK_THROWS_AS(step_function_from_json(parse_json_text(
                        R"({"dimension": 1, "breakpoints": ["0","2"], "values": [[["1","0"]]]})")),
                    ParseError);
    CHECK_THROWS_AS(operator_from_json(parse_json_text(R"({"rows": 2})")), ParseError);
    CHECK_THROWS_AS(operator_from_json(parse_json_text(
                        R"({"rows":1,"cols":1,"source":"l9:1","target":"l1:1","matrix":[[["1","0"]]]})")),
                    ParseError);
}

TEST_CASE("estimates and reports serialize deterministically") {
    SearchConfig cfg;
    cfg.seed = 31;
    auto S = summation_operator(2);
    IdealNormEstimate est = estimate(S, EstimateKind::haar_cotype(0), 1, cfg);
    ojson a = to_json(est);
    ojson b = to_json(estimate(S, EstimateKind::haar_cotype(0), 1, cfg));
    CHECK(a.dump() == b.dump());
    CHECK(a["seed"] == 31);
    CHECK(a.contains("witness"));

    std::string row = estimate_csv_row("summation", est);
    CHECK(row.find("summation,haar-cotype,0,,1,") == 0);

    RelationReport rep = verify_relations(S, 1, cfg);
    ojson rj = to_json(rep);
    CHECK(rj["ok"] == true);
}

TEST_CASE("format_double renders 12 significant digits") {
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(1.0 / 3.0) == "0.333333333333");
}

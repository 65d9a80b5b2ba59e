#include "mtype_lab/factorization.hpp"

#include "mtype_lab/errors.hpp"
#include "mtype_lab/ideal_norms.hpp"

#include <cmath>
#include <stdexcept>

namespace mtype {

namespace {

QuadRational common_norm_sq(const OperatorSpec& T, const MDS& witness) {
    if (witness.length() == 0) throw std::invalid_argument("empty witness");
    QuadRational v = l2_norm_sq(witness.difference(0), T.source().norm);
    for (std::size_t k = 1; k < witness.length(); ++k)
        if (l2_norm_sq(witness.difference(k), T.source().norm) != v)
            throw std::invalid_argument("factorization witness must have equal squared norms");
    if (v.is_zero()) throw std::invalid_argument("factorization witness must be nonzero");
    return v;
}

std::vector<QuadRational> witness_pairings(const OperatorSpec& T, const MDS& witness,
                                           const StepFunction& g) {
    std::vector<QuadRational> out;
    out.reserve(witness.length());
    for (const auto& d : witness.differences())
        out.push_back(pairing(apply_l2(T, d), g));
    return out;
}

} // namespace

StepFunction default_norming_functional(const OperatorSpec& T, const MDS& witness) {
    StepFunction image = apply_l2(T, witness.sum());
    const NormKind& tgt = T.target().norm;
    int d = T.target().dim;

    std::vector<std::vector<QuadRational>> vals;
    vals.reserve(image.cell_count());
    switch (tgt.tag()) {
    case NormKind::Tag::L1:
        // Dual vector in linf: the coordinatewise sign pattern.
        for (std::size_t i = 0; i < image.cell_count(); ++i) {
            std::vector<QuadRational> v(d);
            for (int c = 0; c < d; ++c) v[c] = QuadRational(Rational(image.value_on_cell(i)[c].sign()));
            vals.push_back(std::move(v));
        }
        return StepFunction(image.partition(), std::move(vals), d).canonical();
    case NormKind::Tag::Linf: {
        // Dual vector in l1: equal mass on the maximal coordinates.
        for (std::size_t i = 0; i < image.cell_count(); ++i) {
            const auto& x = image.value_on_cell(i);
            QuadRational m;
            for (int c = 0; c < d; ++c) m = max(m, x[c].abs());
            std::vector<QuadRational> v(d);
            if (!m.is_zero()) {
                std::vector<int> arg;
                for (int c = 0; c < d; ++c)
                    if (x[c].abs() == m) arg.push_back(c);
                QuadRational share = QuadRational(make_rational(1, static_cast<long>(arg.size())));
                for (int c : arg) v[c] = x[c].sign() > 0 ? share : -share;
            }
            vals.push_back(std::move(v));
        }
        return StepFunction(image.partition(), std::move(vals), d).canonical();
    }
    case NormKind::Tag::L2Sq: {
        // g = rho * image with rational rho chosen so that ||g|| <= 1 exactly.
        QuadRational w = l2_norm_sq(image, tgt);
        if (w.is_zero()) return StepFunction::zero(d);
        double rd = 1.0 / std::sqrt(w.to_double());
        Rational rho = make_rational(std::lround(rd * (1L << 20)), 1L << 20);
        while (sgn(rho) > 0 && !(QuadRational(rho * rho) * w <= QuadRational(1)))
            rho -= make_rational(1, 1L << 20);
        if (sgn(rho) <= 0) rho = make_rational(1, 1L << 20);
        while (!(QuadRational(rho * rho) * w <= QuadRational(1))) rho /= 2;
        return image.scaled(QuadRational(rho));
    }
    default:
        throw std::domain_error("no norming functional for weighted l2 sum targets");
    }
}

std::vector<std::size_t> factorization_index_set(const OperatorSpec& T, const MDS& witness,
                                                 const StepFunction& g, const Rational& delta) {
    QuadRational v = common_norm_sq(T, witness);
    std::size_t len = witness.length();
    QuadRational sum_sq = l2_norm_sq(apply_l2(T, witness.sum()), T.target().norm);
    // threshold = delta * r * sqrt(v) / (4 sqrt(2n)) with r^2 = ||sum||^2/(2n v):
    // threshold^2 = delta^2 ||sum||^2 / (16 (2n)^2).
    QuadRational thr_sq = QuadRational(delta * delta) * sum_sq /
                          QuadRational(Rational(16) * Rational(static_cast<long>(len)) *
                                       Rational(static_cast<long>(len)));
    std::vector<std::size_t> out;
    auto pairings = witness_pairings(T, witness, g);
    for (std::size_t k = 0; k < len; ++k)
        if (pairings[k].sign() > 0 && thr_sq < pairings[k] * pairings[k]) out.push_back(k);
    return out;
}

FactorizationResult build_factorization(const OperatorSpec& T, const MDS& witness,
                                        const std::optional<StepFunction>& g_opt,
                                        const Rational& delta) {
    if (sgn(delta) <= 0 || cmp(delta, Rational(1)) >= 0)
        throw std::invalid_argument("delta must lie in (0,1)");
    if (witness.dimension() != T.source().dim) throw std::invalid_argument("dimension mismatch");
    if (witness.length() % 2 != 0)
        throw std::invalid_argument("factorization witness must have even length 2n");
    ValidationReport rep = validate(witness);
    if (!rep.ok()) throw std::invalid_argument("invalid witness MDS: " + rep.violations.front());

    int n = static_cast<int>(witness.length()) / 2;
    QuadRational v = common_norm_sq(T, witness);

    StepFunction g = g_opt ? *g_opt : default_norming_functional(T, witness);
    NormKind dual = T.target().norm.dual();
    if (!(l2_norm_sq(g, dual) <= QuadRational(1)))
        throw std::invalid_argument("the functional must satisfy ||g|| <= 1");

    StepFunction image_sum = apply_l2(T, witness.sum());
    QuadRational total_pairing = pairing(image_sum, g);
    if (!(total_pairing.sign() > 0))
        throw std::invalid_argument("the witness pair must have positive total pairing");

    QuadRational sum_sq = l2_norm_sq(image_sum, T.target().norm);
    QuadRational ratio_sq = sum_sq / (Rational(2L * n) * v); // r^2, equal-norm ratio

    std::vector<std::size_t> selected = factorization_index_set(T, witness, g, delta);
    if (static_cast<int>(selected.size()) < n)
        throw ConstructionError("witness too weak: |F| = " + std::to_string(selected.size()) +
                                " < n = " + std::to_string(n) +
                                " (lower delta or improve the witness)");
    selected.resize(n);

    auto pairings = witness_pairings(T, witness, g);

    FactorizationResult res;
    res.n = n;
    res.indices = selected;
    res.delta = delta;
    res.witness_ratio_sq = ratio_sq;

    QuadRational norm_a_sq;
    for (std::size_t k = 0; k < selected.size(); ++k) {
        const QuadRational& p = pairings[selected[k]];
        if (p.is_zero()) throw ConstructionError("zero pairing at a selected index");
        res.a_columns.push_back(witness.difference(selected[k]).scaled(p.inverse()));
        norm_a_sq = max(norm_a_sq, v / (p * p));
        res.b_functionals.push_back(
            conditional_expectation(g, witness.filtration().at(selected[k] + 1)));
    }
    res.norm_a_sq = norm_a_sq;
    QuadRational norm_b_sq;
    for (const auto& f : res.b_functionals) norm_b_sq = max(norm_b_sq, l2_norm_sq(f, dual));
    res.norm_b_sq = norm_b_sq;
    res.product_bound = std::sqrt((res.norm_a_sq * res.norm_b_sq).to_double());

    res.composed.assign(n, std::vector<QuadRational>(n));
    for (int h = 0; h < n; ++h)
        for (int k = 0; k < n; ++k)
            res.composed[h][k] = pairing(apply_l2(T, res.a_columns[k]), res.b_functionals[h]);
    return res;
}

FactorizationResult build_factorization_schedule(const OperatorSpec& T, const MDS& witness,
                                                 const std::optional<StepFunction>& g,
                                                 const std::vector<Rational>& schedule) {
    if (schedule.empty()) throw std::invalid_argument("empty delta schedule");
    std::string last;
    for (const auto& delta : schedule) {
        try {
            return build_factorization(T, witness, g, delta);
        } catch (const ConstructionError& e) {
            last = e.what();
        }
    }
    throw ConstructionError("no delta in the schedule succeeded; last failure: " + last);
}

std::vector<Rational> default_delta_schedule() {
    return {make_rational(9, 10), make_rational(3, 4), make_rational(1, 2), make_rational(1, 4)};
}

FactorizationReport verify_factorization(const FactorizationResult& res, const OperatorSpec& T) {
    FactorizationReport report;
    int n = res.n;
    NormKind dual = T.target().norm.dual();

    for (int h = 0; h < n; ++h)
        for (int k = 0; k < n; ++k) {
            QuadRational entry = pairing(apply_l2(T, res.a_columns[k]), res.b_functionals[h]);
            QuadRational expected = h >= k ? QuadRational(1) : QuadRational(0);
            if (entry != expected) report.bad_entries.push_back({h, k});
        }

    for (const auto& a : res.a_columns)
        report.norm_a_sq = max(report.norm_a_sq, l2_norm_sq(a, T.source().norm));
    for (const auto& b : res.b_functionals)
        report.norm_b_sq = max(report.norm_b_sq, l2_norm_sq(b, dual));
    report.product = std::sqrt((report.norm_a_sq * report.norm_b_sq).to_double());
    report.pass = report.bad_entries.empty();
    return report;
}

} // namespace mtype

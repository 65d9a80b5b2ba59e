#include "mtype_lab/operator_spec.hpp"

#include <stdexcept>

namespace mtype {

OperatorSpec::OperatorSpec(std::vector<std::vector<QuadRational>> matrix, Space source,
                           Space target)
    : matrix_(std::move(matrix)), source_(std::move(source)), target_(std::move(target)) {
    if (source_.dim <= 0 || target_.dim <= 0)
        throw std::invalid_argument("operator spaces must have positive dimension");
    if (static_cast<int>(matrix_.size()) != target_.dim)
        throw std::invalid_argument("matrix row count must equal the target dimension");
    for (const auto& row : matrix_)
        if (static_cast<int>(row.size()) != source_.dim)
            throw std::invalid_argument("matrix column count must equal the source dimension");
}

OperatorSpec OperatorSpec::identity(Space space) {
    std::vector<std::vector<QuadRational>> m(space.dim, std::vector<QuadRational>(space.dim));
    for (int i = 0; i < space.dim; ++i) m[i][i] = QuadRational(1);
    return OperatorSpec(std::move(m), space, space);
}

OperatorSpec OperatorSpec::zero(Space source, Space target) {
    std::vector<std::vector<QuadRational>> m(target.dim, std::vector<QuadRational>(source.dim));
    return OperatorSpec(std::move(m), std::move(source), std::move(target));
}

std::vector<QuadRational> OperatorSpec::apply(std::span<const QuadRational> v) const {
    if (static_cast<int>(v.size()) != source_.dim)
        throw std::invalid_argument("vector length must equal the source dimension");
    std::vector<QuadRational> out(target_.dim);
    for (int r = 0; r < target_.dim; ++r) {
        QuadRational s;
        for (int c = 0; c < source_.dim; ++c) {
            if (!matrix_[r][c].is_zero()) s += matrix_[r][c] * v[c];
        }
        out[r] = s;
    }
    return out;
}

OperatorSpec OperatorSpec::scaled(const QuadRational& c) const {
    auto m = matrix_;
    for (auto& row : m)
        for (auto& x : row) x = c * x;
    return OperatorSpec(std::move(m), source_, target_);
}

OperatorSpec summation_operator(int n) {
    if (n < 1) throw std::invalid_argument("summation operator needs n >= 1");
    std::vector<std::vector<QuadRational>> m(n, std::vector<QuadRational>(n));
    for (int r = 0; r < n; ++r)
        for (int c = 0; c <= r; ++c) m[r][c] = QuadRational(1);
    return OperatorSpec(std::move(m), Space{NormKind::l1(), n}, Space{NormKind::linf(), n});
}

OperatorSpec diagonal_operator(const std::vector<Rational>& t) {
    if (t.empty()) throw std::invalid_argument("diagonal operator needs entries");
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (sgn(t[i]) <= 0) throw std::invalid_argument("diagonal entries must be positive");
        if (i > 0 && cmp(t[i], t[i - 1]) > 0)
            throw std::invalid_argument("diagonal entries must be non-increasing");
    }
    int d = static_cast<int>(t.size());
    std::vector<std::vector<QuadRational>> m(d, std::vector<QuadRational>(d));
    for (int i = 0; i < d; ++i) m[i][i] = QuadRational(t[i]);
    return OperatorSpec(std::move(m), Space{NormKind::l1(), d}, Space{NormKind::l1(), d});
}

StepFunction apply_l2(const OperatorSpec& T, const StepFunction& f) {
    if (f.dimension() != T.source().dim) throw std::invalid_argument("dimension mismatch");
    std::vector<std::vector<QuadRational>> vals;
    vals.reserve(f.cell_count());
    for (std::size_t i = 0; i < f.cell_count(); ++i) vals.push_back(T.apply(f.value_on_cell(i)));
    return StepFunction(f.partition(), std::move(vals), T.target().dim).canonical();
}

namespace {

QuadRational column_norm_sq(const OperatorSpec& T, int c, const NormKind& norm) {
    std::vector<QuadRational> col(T.rows());
    for (int r = 0; r < T.rows(); ++r) col[r] = T.entry(r, c);
    return norm.norm_sq(col);
}

QuadRational row_norm_sq(const OperatorSpec& T, int r, const NormKind& norm) {
    return norm.norm_sq(T.matrix()[r]);
}

// Largest Rayleigh quotient found by a few exact power-iteration steps on
// T^t T; always a certified lower bound for the squared l2->l2 norm.
QuadRational rayleigh_lower_sq(const OperatorSpec& T) {
    int n = T.cols();
    std::vector<QuadRational> v(n, QuadRational(1));
    QuadRational best;
    for (int iter = 0; iter < 12; ++iter) {
        // w = T^t (T v)
        std::vector<QuadRational> tv = T.apply(v);
        std::vector<QuadRational> w(n);
        for (int c = 0; c < n; ++c) {
            QuadRational s;
            for (int r = 0; r < T.rows(); ++r) s += T.entry(r, c) * tv[r];
            w[c] = s;
        }
        QuadRational vv, vw;
        for (int c = 0; c < n; ++c) {
            vv += v[c] * v[c];
            vw += v[c] * w[c];
        }
        if (vv.is_zero()) break;
        best = max(best, vw / vv);
        // Renormalize by the largest entry to keep numerators small.
        QuadRational m;
        for (const auto& x : w) m = max(m, x.abs());
        if (m.is_zero()) break;
        for (auto& x : w) x = x / m;
        v = std::move(w);
    }
    // Also try the best basis vector.
    for (int c = 0; c < n; ++c) {
        QuadRational s;
        for (int r = 0; r < T.rows(); ++r) s += T.entry(r, c) * T.entry(r, c);
        best = max(best, s);
    }
    return best;
}

} // namespace

NormBound operator_norm(const OperatorSpec& T) {
    const NormKind& src = T.source().norm;
    const NormKind& tgt = T.target().norm;

    if (src.tag() == NormKind::Tag::L1) {
        // ||T|| = max_j ||T e_j||_target.
        QuadRational m;
        for (int c = 0; c < T.cols(); ++c) m = max(m, column_norm_sq(T, c, tgt));
        return NormBound{m, m, true};
    }
    if (tgt.tag() == NormKind::Tag::Linf &&
        (src.tag() == NormKind::Tag::L2Sq || src.tag() == NormKind::Tag::Linf)) {
        // ||T|| = max_i ||row_i||_{source dual}.
        NormKind dual = src.dual();
        QuadRational m;
        for (int r = 0; r < T.rows(); ++r) m = max(m, row_norm_sq(T, r, dual));
        return NormBound{m, m, true};
    }
    if (src.tag() == NormKind::Tag::L2Sq && tgt.tag() == NormKind::Tag::L2Sq) {
        QuadRational lower = rayleigh_lower_sq(T);
        // Upper caps, all rigorous for the spectral norm:
        //   Schur:       ||T||^2 <= ||T||_{1->1} ||T||_{inf->inf}
        //   Frobenius:   ||T||^2 <= sum of squares
        QuadRational schur = [&] {
            QuadRational a, b;
            for (int c = 0; c < T.cols(); ++c) {
                QuadRational s;
                for (int r = 0; r < T.rows(); ++r) s += T.entry(r, c).abs();
                a = max(a, s);
            }
            for (int r = 0; r < T.rows(); ++r) {
                QuadRational s;
                for (int c = 0; c < T.cols(); ++c) s += T.entry(r, c).abs();
                b = max(b, s);
            }
            return a * b;
        }();
        QuadRational frob;
        for (int r = 0; r < T.rows(); ++r)
            for (int c = 0; c < T.cols(); ++c) frob += T.entry(r, c) * T.entry(r, c);
        QuadRational upper = schur < frob ? schur : frob;
        if (upper < lower) upper = lower; // caps are theorems; equality means both are the norm
        return NormBound{lower, upper, lower == upper};
    }

    // Generic fallback: route through l1 on the source and the exact
    // column rule, paying the embedding constant ||x||_1 <= c ||x||_src.
    QuadRational col;
    for (int c = 0; c < T.cols(); ++c) col = max(col, column_norm_sq(T, c, tgt));
    QuadRational embed_sq;
    switch (src.tag()) {
    case NormKind::Tag::L2Sq: embed_sq = QuadRational(Rational(T.cols())); break;
    case NormKind::Tag::Linf: embed_sq = QuadRational(Rational(T.cols()) * Rational(T.cols())); break;
    default: embed_sq = QuadRational(1); break;
    }
    QuadRational upper = col * embed_sq;
    // Lower bound: basis vectors have norm one in every supported source norm.
    QuadRational lower = col; // ||T e_j||, attained by e_j with ||e_j||_src = 1
    return NormBound{lower, upper, lower == upper};
}

OperatorSpec adjoint(const OperatorSpec& T) {
    const auto stag = T.source().norm.tag();
    const auto ttag = T.target().norm.tag();
    if (stag == NormKind::Tag::WeightedL2Sum || ttag == NormKind::Tag::WeightedL2Sum)
        throw std::domain_error("adjoints of weighted l2 sum operators are unsupported");
    std::vector<std::vector<QuadRational>> m(T.cols(), std::vector<QuadRational>(T.rows()));
    for (int r = 0; r < T.rows(); ++r)
        for (int c = 0; c < T.cols(); ++c) m[c][r] = T.entry(r, c);
    Space source{T.target().norm.dual(), T.target().dim};
    Space target{T.source().norm.dual(), T.source().dim};
    return OperatorSpec(std::move(m), std::move(source), std::move(target));
}

OperatorSpec l2_lift(const OperatorSpec& T, const IntervalPartition& grid) {
    std::size_t cells = grid.cell_count();
    std::vector<Rational> weights;
    weights.reserve(cells);
    for (std::size_t i = 0; i < cells; ++i) weights.push_back(grid.cell_length(i));
    int sd = T.source().dim, td = T.target().dim;
    std::vector<std::vector<QuadRational>> m(cells * td,
                                             std::vector<QuadRational>(cells * sd));
    for (std::size_t cell = 0; cell < cells; ++cell)
        for (int r = 0; r < td; ++r)
            for (int c = 0; c < sd; ++c) m[cell * td + r][cell * sd + c] = T.entry(r, c);
    Space source{NormKind::weighted_l2(weights, T.source().norm), static_cast<int>(cells * sd)};
    Space target{NormKind::weighted_l2(weights, T.target().norm), static_cast<int>(cells * td)};
    return OperatorSpec(std::move(m), std::move(source), std::move(target));
}

std::vector<QuadRational> flatten_on_grid(const StepFunction& f, const IntervalPartition& grid) {
    std::vector<QuadRational> out;
    out.reserve(grid.cell_count() * f.dimension());
    for (std::size_t i = 0; i < grid.cell_count(); ++i) {
        const auto& v = f.evaluate(grid.cell_left(i));
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

} // namespace mtype

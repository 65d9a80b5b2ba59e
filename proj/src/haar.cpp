#include "mtype_lab/haar.hpp"

#include "mtype_lab/errors.hpp"

#include <stdexcept>

namespace mtype {

bool valid_tree_index(const TreeIndex& idx) {
    if (idx.k == 0) return idx.j == 0;
    if (idx.k < 0) return false;
    return idx.j >= 1 && idx.j <= (1L << (idx.k - 1));
}

std::vector<TreeIndex> tree(int m, int n, int level_cap) {
    if (m < 0 || m > n) throw std::invalid_argument("tree needs 0 <= m <= n");
    if (n > level_cap)
        throw LevelCapError("tree level " + std::to_string(n) + " exceeds cap " +
                            std::to_string(level_cap));
    std::vector<TreeIndex> out;
    if (m == 0) {
        out.push_back({0, 0});
        m = 1;
    }
    for (int k = m; k <= n; ++k)
        for (long j = 1; j <= (1L << (k - 1)); ++j) out.push_back({k, static_cast<int>(j)});
    return out;
}

StepFunction haar_fn(const TreeIndex& idx, int level_cap) {
    if (!valid_tree_index(idx)) throw std::invalid_argument("invalid tree index");
    if (idx.k > level_cap)
        throw LevelCapError("haar level " + std::to_string(idx.k) + " exceeds cap " +
                            std::to_string(level_cap));
    if (idx.k == 0) return StepFunction::constant({QuadRational(1)});

    // Support Delta_{k-1}^{(j)} = [(j-1)/2^{k-1}, j/2^{k-1}), value
    // +2^{(k-1)/2} on its left half, -2^{(k-1)/2} on its right half.
    long denom = 1L << idx.k;
    Rational left = make_rational(2L * (idx.j - 1), denom);
    Rational mid = make_rational(2L * idx.j - 1, denom);
    Rational right = make_rational(2L * idx.j, denom);
    QuadRational amp = QuadRational::pow2_half(idx.k - 1);

    std::vector<Rational> bps;
    std::vector<std::vector<QuadRational>> vals;
    bps.push_back(Rational(0));
    if (sgn(left) > 0) {
        vals.push_back({QuadRational()});
        bps.push_back(left);
    }
    vals.push_back({amp});
    bps.push_back(mid);
    vals.push_back({-amp});
    bps.push_back(right);
    if (cmp(right, Rational(1)) < 0) {
        vals.push_back({QuadRational()});
        bps.push_back(Rational(1));
    }
    return StepFunction(IntervalPartition(std::move(bps)), std::move(vals), 1);
}

HaarCoefficients::HaarCoefficients(int tree_m, int tree_n, int dimension,
                                   std::vector<std::vector<QuadRational>> values)
    : tree_m_(tree_m), tree_n_(tree_n), dimension_(dimension),
      indices_(tree(tree_m, tree_n)), values_(std::move(values)) {
    if (dimension_ <= 0) throw std::invalid_argument("coefficient dimension must be positive");
    if (values_.size() != indices_.size())
        throw std::invalid_argument("one coefficient vector per tree index required");
    for (const auto& v : values_)
        if (static_cast<int>(v.size()) != dimension_)
            throw std::invalid_argument("coefficient length must equal the dimension");
}

HaarCoefficients HaarCoefficients::zero(int tree_m, int tree_n, int dimension, int level_cap) {
    auto idx = tree(tree_m, tree_n, level_cap);
    return HaarCoefficients(tree_m, tree_n, dimension,
                            std::vector<std::vector<QuadRational>>(
                                idx.size(), std::vector<QuadRational>(dimension)));
}

std::size_t HaarCoefficients::offset_of(const TreeIndex& idx) const {
    if (!valid_tree_index(idx) || idx.k < tree_m_ || idx.k > tree_n_)
        throw std::invalid_argument("tree index outside this tree");
    std::size_t off = 0;
    if (tree_m_ == 0) {
        if (idx.k == 0) return 0;
        off = 1;
        for (int k = 1; k < idx.k; ++k) off += 1UL << (k - 1);
    } else {
        for (int k = tree_m_; k < idx.k; ++k) off += 1UL << (k - 1);
    }
    return off + (idx.j - 1);
}

const std::vector<QuadRational>& HaarCoefficients::at(const TreeIndex& idx) const {
    return values_[offset_of(idx)];
}

void HaarCoefficients::set(const TreeIndex& idx, std::vector<QuadRational> value) {
    if (static_cast<int>(value.size()) != dimension_)
        throw std::invalid_argument("coefficient length must equal the dimension");
    values_[offset_of(idx)] = std::move(value);
}

HaarCoefficients analyze(const StepFunction& f, int m, int n, int level_cap) {
    auto idx = tree(m, n, level_cap);
    std::vector<std::vector<QuadRational>> values;
    values.reserve(idx.size());
    for (const auto& t : idx) {
        StepFunction chi = haar_fn(t, level_cap);
        // One pass over the common refinement gives all coordinates at once.
        IntervalPartition fine =
            IntervalPartition::common_refinement(f.partition(), chi.partition());
        std::vector<QuadRational> coeff(f.dimension());
        for (std::size_t i = 0; i < fine.cell_count(); ++i) {
            const QuadRational& w = chi.evaluate(fine.cell_left(i))[0];
            if (w.is_zero()) continue;
            const auto& v = f.evaluate(fine.cell_left(i));
            QuadRational len(fine.cell_length(i));
            QuadRational lw = len * w;
            for (int c = 0; c < f.dimension(); ++c) coeff[c] += lw * v[c];
        }
        values.push_back(std::move(coeff));
    }
    return HaarCoefficients(m, n, f.dimension(), std::move(values));
}

StepFunction synthesize(const HaarCoefficients& c, int level_cap) {
    IntervalPartition grid = IntervalPartition::dyadic(c.tree_n(), level_cap);
    std::vector<std::vector<QuadRational>> vals(grid.cell_count(),
                                                std::vector<QuadRational>(c.dimension()));
    for (const auto& idx : c.indices()) {
        StepFunction chi = haar_fn(idx, level_cap);
        const auto& x = c.at(idx);
        for (std::size_t i = 0; i < grid.cell_count(); ++i) {
            const QuadRational& w = chi.evaluate(grid.cell_left(i))[0];
            if (w.is_zero()) continue;
            for (int d = 0; d < c.dimension(); ++d) vals[i][d] += w * x[d];
        }
    }
    return StepFunction(grid, std::move(vals), c.dimension()).canonical();
}

} // namespace mtype

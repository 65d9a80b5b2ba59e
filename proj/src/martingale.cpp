#include "mtype_lab/martingale.hpp"

#include "mtype_lab/errors.hpp"

#include <algorithm>
#include <stdexcept>

namespace mtype {

Filtration::Filtration(std::vector<IntervalPartition> partitions)
    : partitions_(std::move(partitions)) {
    if (partitions_.empty()) throw std::invalid_argument("filtration needs at least F_0");
    for (std::size_t i = 1; i < partitions_.size(); ++i)
        if (!partitions_[i].refines(partitions_[i - 1]))
            throw std::invalid_argument("filtration partitions must refine their predecessors");
}

Filtration Filtration::dyadic(int n, int level_cap) {
    std::vector<IntervalPartition> ps;
    ps.reserve(n + 1);
    for (int k = 0; k <= n; ++k) ps.push_back(IntervalPartition::dyadic(k, level_cap));
    return Filtration(std::move(ps));
}

MDS::MDS(Filtration filtration, std::vector<StepFunction> differences, int dimension)
    : filtration_(std::move(filtration)), differences_(std::move(differences)),
      dimension_(dimension) {
    if (dimension_ <= 0) throw std::invalid_argument("MDS dimension must be positive");
    if (filtration_.size() != differences_.size() + 1)
        throw std::invalid_argument("filtration must have one more partition than differences");
    for (const auto& d : differences_)
        if (d.dimension() != dimension_)
            throw std::invalid_argument("difference dimension mismatch");
}

StepFunction MDS::sum() const {
    return mtype::sum(differences_, dimension_);
}

ValidationReport validate(const MDS& m) {
    ValidationReport report;
    for (std::size_t k = 0; k < m.length(); ++k) {
        const auto& d = m.difference(k);
        const auto& fk = m.filtration().at(k + 1);
        if (!fk.refines(d.canonical().partition()))
            report.violations.push_back("d_" + std::to_string(k + 1) +
                                        " is not measurable w.r.t. F_" + std::to_string(k + 1));
        if (!conditional_expectation(d, m.filtration().at(k)).is_zero())
            report.violations.push_back("E_" + std::to_string(k) + " d_" + std::to_string(k + 1) +
                                        " is nonzero");
    }
    return report;
}

MDS from_haar_coeffs(const HaarCoefficients& c, int level_cap) {
    if (c.tree_m() > 1)
        throw std::invalid_argument("martingale differences need a tree starting at level 0 or 1");
    int n = c.tree_n();
    std::vector<StepFunction> diffs;
    diffs.reserve(n);
    for (int k = 1; k <= n; ++k) {
        IntervalPartition grid = IntervalPartition::dyadic(k, level_cap);
        QuadRational amp = QuadRational::pow2_half(k - 1);
        std::vector<std::vector<QuadRational>> vals;
        vals.reserve(grid.cell_count());
        for (std::size_t cell = 0; cell < grid.cell_count(); ++cell) {
            int j = static_cast<int>(cell / 2) + 1;
            const auto& x = c.at({k, j});
            QuadRational w = (cell % 2 == 0) ? amp : -amp;
            std::vector<QuadRational> v(c.dimension());
            for (int i = 0; i < c.dimension(); ++i) v[i] = w * x[i];
            vals.push_back(std::move(v));
        }
        diffs.push_back(StepFunction(grid, std::move(vals), c.dimension()).canonical());
    }
    return MDS(Filtration::dyadic(n, level_cap), std::move(diffs), c.dimension());
}

namespace {

// Breakpoints of the partition that carries F restricted to block i of m.
void append_block(std::vector<Rational>& bps, const IntervalPartition& p, long i, long mod) {
    for (const auto& s : p.breakpoints()) {
        Rational t = (Rational(i - 1) + s) / mod;
        if (bps.empty() || cmp(bps.back(), t) < 0) bps.push_back(t);
    }
}

IntervalPartition glued_partition(const Filtration& f, long mod, long step) {
    // After `step` glued differences: blocks 1..j carry F_k, the rest F_{k-1}
    // (with k, j from step = (k-1) mod + j; step 0 means all blocks at F_0).
    long k = (step == 0) ? 0 : (step - 1) / mod + 1;
    long j = (step == 0) ? 0 : (step - 1) % mod + 1;
    std::vector<Rational> bps;
    for (long i = 1; i <= mod; ++i) {
        const IntervalPartition& p = (i <= j) ? f.at(k) : f.at(k > 0 ? k - 1 : 0);
        append_block(bps, p, i, mod);
    }
    return IntervalPartition(std::move(bps));
}

} // namespace

MDS glue(const MDS& m, long mod) {
    if (mod < 1) throw std::invalid_argument("glue needs mod >= 1");
    if (mod == 1) return m;
    std::vector<StepFunction> diffs;
    diffs.reserve(m.length() * mod);
    std::vector<IntervalPartition> parts;
    parts.reserve(m.length() * mod + 1);
    parts.push_back(glued_partition(m.filtration(), mod, 0));
    for (std::size_t k = 1; k <= m.length(); ++k)
        for (long j = 1; j <= mod; ++j) {
            diffs.push_back(transport(m.difference(k - 1), j, mod));
            parts.push_back(glued_partition(m.filtration(), mod, (k - 1) * mod + j));
        }
    return MDS(Filtration(std::move(parts)), std::move(diffs), m.dimension());
}

MDS equalize(const MDS& m, const NormKind& norm) {
    std::size_t n = m.length();
    if (n == 0) throw std::invalid_argument("equalize needs a nonempty MDS");
    QuadRational v = l2_norm_sq(m.difference(0), norm);
    for (std::size_t k = 1; k < n; ++k)
        if (l2_norm_sq(m.difference(k), norm) != v)
            throw std::invalid_argument("equalize requires exactly equal squared norms");

    MDS g = glue(m, static_cast<long>(n) + 1);
    std::vector<StepFunction> diffs;
    diffs.reserve(n + 1);
    std::vector<IntervalPartition> parts;
    parts.reserve(n + 2);
    parts.push_back(g.filtration().at(0));
    for (std::size_t h = 1; h <= n + 1; ++h) {
        StepFunction block = StepFunction::zero(m.dimension());
        for (std::size_t t = (h - 1) * n; t < h * n; ++t) block = block + g.difference(t);
        diffs.push_back(std::move(block));
        parts.push_back(g.filtration().at(h * n));
    }
    return MDS(Filtration(std::move(parts)), std::move(diffs), m.dimension());
}

NormalizeResult normalize_mds(const MDS& m, const OperatorSpec& T) {
    if (m.dimension() != T.source().dim) throw std::invalid_argument("dimension mismatch");
    const NormKind& norm = T.source().norm;
    std::size_t n = m.length();
    if (n == 0) throw std::invalid_argument("normalize_mds needs a nonempty MDS");

    std::vector<QuadRational> norms_sq;
    QuadRational total;
    for (std::size_t k = 0; k < n; ++k) {
        norms_sq.push_back(l2_norm_sq(m.difference(k), norm));
        total += norms_sq.back();
    }
    if (total != QuadRational(1))
        throw std::invalid_argument("normalize_mds requires the squared norms to sum to 1");

    int l = 0;
    while ((1L << (2 * (l + 1))) <= 16 * static_cast<long>(n)) ++l; // 4^l <= 16n < 4^{l+1}
    long modulus = 1L << (2 * l);

    // Bucket h holds 4^{-h} < ||d||^2 <= 4^{1-h}; h > l is discarded.
    std::vector<std::size_t> kept;
    std::vector<int> bucket;
    std::vector<std::size_t> discarded;
    for (std::size_t k = 0; k < n; ++k) {
        int h = 1;
        while (h <= l && !(QuadRational(pow2(-2 * h)) < norms_sq[k])) ++h;
        if (h > l) {
            discarded.push_back(k);
        } else {
            kept.push_back(k);
            bucket.push_back(h);
        }
    }

    QuadRational discarded_sq;
    StepFunction discarded_sum = StepFunction::zero(m.dimension());
    for (std::size_t k : discarded) {
        discarded_sq += norms_sq[k];
        discarded_sum = discarded_sum + m.difference(k);
    }
    QuadRational discarded_image_sq =
        l2_norm_sq(apply_l2(T, discarded_sum), T.target().norm);

    // Sub-MDS of the kept indices; a subsequence of an MDS is again an MDS.
    std::vector<IntervalPartition> sub_parts;
    sub_parts.push_back(m.filtration().at(0));
    std::vector<StepFunction> sub_diffs;
    for (std::size_t k : kept) {
        sub_parts.push_back(m.filtration().at(k + 1));
        sub_diffs.push_back(m.difference(k));
    }
    if (kept.empty()) {
        MDS empty(Filtration({m.filtration().at(0)}), {}, m.dimension());
        return NormalizeResult{std::move(empty), std::move(discarded), discarded_sq,
                               discarded_image_sq, modulus, l};
    }
    MDS sub(Filtration(std::move(sub_parts)), std::move(sub_diffs), m.dimension());
    MDS g = glue(sub, modulus);

    std::vector<StepFunction> diffs;
    std::vector<IntervalPartition> parts;
    parts.push_back(g.filtration().at(0));
    for (std::size_t pos = 0; pos < kept.size(); ++pos) {
        long block = 1L << (2 * bucket[pos]);          // 4^h
        long blocks = modulus / block;                 // 4^{l-h}
        for (long j = 0; j < blocks; ++j) {
            StepFunction piece = StepFunction::zero(m.dimension());
            for (long i = 0; i < block; ++i)
                piece = piece + g.difference(pos * modulus + j * block + i);
            diffs.push_back(std::move(piece));
            parts.push_back(g.filtration().at(pos * modulus + (j + 1) * block));
        }
    }
    MDS bucketed(Filtration(std::move(parts)), std::move(diffs), m.dimension());
    return NormalizeResult{std::move(bucketed), std::move(discarded), discarded_sq,
                           discarded_image_sq, modulus, l};
}

CotypeInstance mds_to_cotype_instance(const MDS& m) {
    std::size_t len = m.length();
    if (len == 0 || (len & (len - 1)) != 0)
        throw std::invalid_argument("cotype instance needs an MDS of length 2^n");
    int n = 0;
    while ((1UL << n) < len) ++n;

    IntervalPartition grid = IntervalPartition::trivial();
    for (const auto& d : m.differences())
        grid = IntervalPartition::common_refinement(grid, d.canonical().partition());

    int dim = m.dimension() * static_cast<int>(grid.cell_count());
    HaarCoefficients coeffs = HaarCoefficients::zero(0, n, dim);

    // Root: 2^{-n} * sum of all differences.
    StepFunction total = m.sum();
    coeffs.set({0, 0}, [&] {
        auto v = flatten_on_grid(total, grid);
        QuadRational scale(pow2(-n));
        for (auto& x : v) x = scale * x;
        return v;
    }());

    // x_k^(j) = 2^{(k-1)/2 - n} (sum over the left index block - sum over the right).
    for (int k = 1; k <= n; ++k) {
        long width = 1L << (n - k); // |N_k^(j)|
        for (long j = 1; j <= (1L << (k - 1)); ++j) {
            StepFunction diff = StepFunction::zero(m.dimension());
            for (long i = (2 * j - 2) * width; i < (2 * j - 1) * width; ++i)
                diff = diff + m.difference(i);
            for (long i = (2 * j - 1) * width; i < 2 * j * width; ++i)
                diff = diff - m.difference(i);
            auto v = flatten_on_grid(diff, grid);
            QuadRational scale = QuadRational::pow2_half(k - 1 - 2 * n);
            for (auto& x : v) x = scale * x;
            coeffs.set({k, static_cast<int>(j)}, std::move(v));
        }
    }
    return CotypeInstance{std::move(coeffs), std::move(grid), m.dimension()};
}

} // namespace mtype

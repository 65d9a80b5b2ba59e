#include "mtype_lab/step_function.hpp"

#include "mtype_lab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mtype {

IntervalPartition::IntervalPartition(std::vector<Rational> breakpoints)
    : breakpoints_(std::move(breakpoints)) {
    if (breakpoints_.size() < 2) throw std::invalid_argument("partition needs at least two breakpoints");
    if (breakpoints_.front() != 0) throw std::invalid_argument("partition must start at 0");
    if (breakpoints_.back() != 1) throw std::invalid_argument("partition must end at 1");
    for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i)
        if (cmp(breakpoints_[i], breakpoints_[i + 1]) >= 0)
            throw std::invalid_argument("partition breakpoints must increase strictly");
}

IntervalPartition IntervalPartition::trivial() {
    return IntervalPartition({Rational(0), Rational(1)});
}

IntervalPartition IntervalPartition::dyadic(int level, int level_cap) {
    if (level < 0) throw std::invalid_argument("negative dyadic level");
    if (level > level_cap)
        throw LevelCapError("dyadic level " + std::to_string(level) + " exceeds cap " +
                            std::to_string(level_cap));
    std::vector<Rational> bps;
    long cells = 1L << level;
    bps.reserve(cells + 1);
    for (long i = 0; i <= cells; ++i) bps.push_back(make_rational(i, cells));
    return IntervalPartition(std::move(bps));
}

IntervalPartition IntervalPartition::uniform(long m) {
    if (m < 1) throw std::invalid_argument("uniform partition needs m >= 1");
    std::vector<Rational> bps;
    bps.reserve(m + 1);
    for (long i = 0; i <= m; ++i) bps.push_back(make_rational(i, m));
    return IntervalPartition(std::move(bps));
}

std::size_t IntervalPartition::cell_of(const Rational& t) const {
    if (sgn(t) < 0 || cmp(t, Rational(1)) >= 0) throw std::invalid_argument("point outside [0,1)");
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
    return static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
}

bool IntervalPartition::refines(const IntervalPartition& coarser) const {
    return std::includes(breakpoints_.begin(), breakpoints_.end(),
                         coarser.breakpoints_.begin(), coarser.breakpoints_.end());
}

IntervalPartition IntervalPartition::common_refinement(const IntervalPartition& p,
                                                       const IntervalPartition& q) {
    std::vector<Rational> merged;
    merged.reserve(p.breakpoints_.size() + q.breakpoints_.size());
    std::set_union(p.breakpoints_.begin(), p.breakpoints_.end(),
                   q.breakpoints_.begin(), q.breakpoints_.end(),
                   std::back_inserter(merged));
    return IntervalPartition(std::move(merged));
}

NormKind NormKind::weighted_l2(std::vector<Rational> weights, NormKind inner) {
    if (weights.empty()) throw std::invalid_argument("weighted l2 sum needs weights");
    for (const auto& w : weights)
        if (sgn(w) <= 0) throw std::invalid_argument("weighted l2 sum weights must be positive");
    NormKind n(Tag::WeightedL2Sum);
    n.weights_ = std::move(weights);
    n.inner_ = std::make_shared<const NormKind>(std::move(inner));
    return n;
}

QuadRational NormKind::norm_sq(std::span<const QuadRational> v) const {
    switch (tag_) {
    case Tag::L1: {
        QuadRational s;
        for (const auto& x : v) s += x.abs();
        return s * s;
    }
    case Tag::L2Sq: {
        QuadRational s;
        for (const auto& x : v) s += x * x;
        return s;
    }
    case Tag::Linf: {
        QuadRational m;
        for (const auto& x : v) m = max(m, x.abs());
        return m * m;
    }
    case Tag::WeightedL2Sum: {
        if (v.size() % weights_.size() != 0)
            throw std::invalid_argument("vector length not a multiple of the weight count");
        std::size_t block = v.size() / weights_.size();
        QuadRational s;
        for (std::size_t i = 0; i < weights_.size(); ++i)
            s += weights_[i] * inner_->norm_sq(v.subspan(i * block, block));
        return s;
    }
    }
    throw std::logic_error("unreachable");
}

double NormKind::norm_double(std::span<const QuadRational> v) const {
    switch (tag_) {
    case Tag::L1: {
        QuadRational s;
        for (const auto& x : v) s += x.abs();
        return s.to_double();
    }
    case Tag::Linf: {
        QuadRational m;
        for (const auto& x : v) m = max(m, x.abs());
        return m.to_double();
    }
    default:
        return std::sqrt(norm_sq(v).to_double());
    }
}

NormKind NormKind::dual() const {
    switch (tag_) {
    case Tag::L1: return linf();
    case Tag::Linf: return l1();
    case Tag::L2Sq: return l2();
    case Tag::WeightedL2Sum:
        throw std::domain_error("duals of weighted l2 sums are unsupported");
    }
    throw std::logic_error("unreachable");
}

bool NormKind::operator==(const NormKind& o) const {
    if (tag_ != o.tag_) return false;
    if (tag_ != Tag::WeightedL2Sum) return true;
    return weights_ == o.weights_ && *inner_ == *o.inner_;
}

std::string NormKind::to_string() const {
    switch (tag_) {
    case Tag::L1: return "l1";
    case Tag::L2Sq: return "l2";
    case Tag::Linf: return "linf";
    case Tag::WeightedL2Sum: return "weighted_l2";
    }
    throw std::logic_error("unreachable");
}

NormKind NormKind::parse(const std::string& text) {
    if (text == "l1") return l1();
    if (text == "l2") return l2();
    if (text == "linf") return linf();
    throw ParseError("unknown norm kind: " + text);
}

StepFunction::StepFunction(IntervalPartition partition,
                           std::vector<std::vector<QuadRational>> values,
                           int dimension)
    : partition_(std::move(partition)), values_(std::move(values)), dimension_(dimension) {
    if (dimension_ <= 0) throw std::invalid_argument("step function dimension must be positive");
    if (values_.size() != partition_.cell_count())
        throw std::invalid_argument("one value vector per cell required");
    for (const auto& v : values_)
        if (static_cast<int>(v.size()) != dimension_)
            throw std::invalid_argument("value vector length must equal the dimension");
}

StepFunction StepFunction::canonical() const {
    std::vector<Rational> bps;
    std::vector<std::vector<QuadRational>> vals;
    bps.push_back(partition_.breakpoints().front());
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!vals.empty() && vals.back() == values_[i]) {
            bps.back() = partition_.breakpoints()[i + 1];
        } else {
            vals.push_back(values_[i]);
            bps.push_back(partition_.breakpoints()[i + 1]);
        }
    }
    return StepFunction(IntervalPartition(std::move(bps)), std::move(vals), dimension_);
}

bool StepFunction::operator==(const StepFunction& o) const {
    if (dimension_ != o.dimension_) return false;
    StepFunction a = canonical();
    StepFunction b = o.canonical();
    return a.partition_ == b.partition_ && a.values_ == b.values_;
}

StepFunction StepFunction::constant(std::vector<QuadRational> value) {
    int dim = static_cast<int>(value.size());
    return StepFunction(IntervalPartition::trivial(), {std::move(value)}, dim);
}

StepFunction StepFunction::zero(int dimension) {
    if (dimension <= 0) throw std::invalid_argument("step function dimension must be positive");
    return StepFunction::constant(std::vector<QuadRational>(dimension));
}

bool StepFunction::is_zero() const {
    for (const auto& cell : values_)
        for (const auto& x : cell)
            if (!x.is_zero()) return false;
    return true;
}

StepFunction StepFunction::refined_to(const IntervalPartition& target) const {
    IntervalPartition fine = IntervalPartition::common_refinement(partition_, target);
    std::vector<std::vector<QuadRational>> vals;
    vals.reserve(fine.cell_count());
    for (std::size_t i = 0; i < fine.cell_count(); ++i)
        vals.push_back(values_[partition_.cell_of(fine.cell_left(i))]);
    return StepFunction(std::move(fine), std::move(vals), dimension_);
}

namespace {

template <typename Op>
StepFunction pointwise(const StepFunction& f, const StepFunction& g, Op op) {
    if (f.dimension() != g.dimension())
        throw std::invalid_argument("dimension mismatch");
    auto [a, b] = common_refinement(f, g);
    std::vector<std::vector<QuadRational>> vals(a.cell_count());
    for (std::size_t i = 0; i < a.cell_count(); ++i) {
        vals[i].reserve(f.dimension());
        for (int c = 0; c < f.dimension(); ++c)
            vals[i].push_back(op(a.value_on_cell(i)[c], b.value_on_cell(i)[c]));
    }
    return StepFunction(a.partition(), std::move(vals), f.dimension()).canonical();
}

} // namespace

StepFunction StepFunction::operator+(const StepFunction& o) const {
    return pointwise(*this, o, [](const QuadRational& x, const QuadRational& y) { return x + y; });
}

StepFunction StepFunction::operator-(const StepFunction& o) const {
    return pointwise(*this, o, [](const QuadRational& x, const QuadRational& y) { return x - y; });
}

StepFunction StepFunction::operator-() const {
    return scaled(QuadRational(-1));
}

StepFunction StepFunction::scaled(const QuadRational& c) const {
    std::vector<std::vector<QuadRational>> vals(values_);
    for (auto& cell : vals)
        for (auto& x : cell) x = c * x;
    return StepFunction(partition_, std::move(vals), dimension_).canonical();
}

std::pair<StepFunction, StepFunction> common_refinement(const StepFunction& f,
                                                        const StepFunction& g) {
    IntervalPartition fine = IntervalPartition::common_refinement(f.partition(), g.partition());
    return {f.refined_to(fine), g.refined_to(fine)};
}

QuadRational l2_norm_sq(const StepFunction& f, const NormKind& norm) {
    QuadRational s;
    for (std::size_t i = 0; i < f.cell_count(); ++i)
        s += f.partition().cell_length(i) * norm.norm_sq(f.value_on_cell(i));
    return s;
}

double lp_norm_double(const StepFunction& f, const NormKind& norm, double p) {
    double s = 0;
    for (std::size_t i = 0; i < f.cell_count(); ++i)
        s += to_double(f.partition().cell_length(i)) *
             std::pow(norm.norm_double(f.value_on_cell(i)), p);
    return std::pow(s, 1.0 / p);
}

QuadRational pairing(const StepFunction& f, const StepFunction& g) {
    if (f.dimension() != g.dimension()) throw std::invalid_argument("dimension mismatch");
    IntervalPartition fine = IntervalPartition::common_refinement(f.partition(), g.partition());
    QuadRational s;
    for (std::size_t i = 0; i < fine.cell_count(); ++i) {
        const auto& vf = f.value_on_cell(f.partition().cell_of(fine.cell_left(i)));
        const auto& vg = g.value_on_cell(g.partition().cell_of(fine.cell_left(i)));
        QuadRational dot;
        for (int c = 0; c < f.dimension(); ++c) dot += vf[c] * vg[c];
        s += fine.cell_length(i) * dot;
    }
    return s;
}

StepFunction conditional_expectation(const StepFunction& f, const IntervalPartition& coarser) {
    std::vector<std::vector<QuadRational>> vals;
    vals.reserve(coarser.cell_count());
    for (std::size_t i = 0; i < coarser.cell_count(); ++i) {
        const Rational& lo = coarser.cell_left(i);
        const Rational& hi = coarser.cell_right(i);
        std::vector<QuadRational> acc(f.dimension());
        // Integrate f over [lo, hi) cell by cell of f's partition.
        std::size_t j = f.partition().cell_of(lo);
        Rational pos = lo;
        while (cmp(pos, hi) < 0) {
            Rational cell_end = f.partition().cell_right(j);
            Rational seg_end = cmp(cell_end, hi) < 0 ? cell_end : hi;
            Rational len = seg_end - pos;
            if (sgn(len) > 0) {
                const auto& v = f.value_on_cell(j);
                for (int c = 0; c < f.dimension(); ++c) acc[c] += len * v[c];
            }
            pos = seg_end;
            ++j;
        }
        Rational total = hi - lo;
        for (auto& x : acc) x = QuadRational(Rational(1) / total) * x;
        vals.push_back(std::move(acc));
    }
    return StepFunction(coarser, std::move(vals), f.dimension()).canonical();
}

StepFunction transport(const StepFunction& f, long j, long m) {
    if (m < 1 || j < 1 || j > m) throw std::invalid_argument("transport needs 1 <= j <= m");
    if (m == 1) return f;
    std::vector<Rational> bps;
    std::vector<std::vector<QuadRational>> vals;
    Rational left = make_rational(j - 1, m);
    Rational right = make_rational(j, m);
    bps.push_back(Rational(0));
    if (sgn(left) > 0) {
        vals.push_back(std::vector<QuadRational>(f.dimension()));
        bps.push_back(left);
    }
    for (std::size_t i = 0; i < f.cell_count(); ++i) {
        vals.push_back(f.value_on_cell(i));
        bps.push_back((Rational(j - 1) + f.partition().cell_right(i)) / m);
    }
    if (cmp(right, Rational(1)) < 0) {
        vals.push_back(std::vector<QuadRational>(f.dimension()));
        bps.push_back(Rational(1));
    }
    return StepFunction(IntervalPartition(std::move(bps)), std::move(vals), f.dimension()).canonical();
}

StepFunction sum(const std::vector<StepFunction>& fs, int dimension) {
    StepFunction acc = StepFunction::zero(dimension);
    for (const auto& f : fs) acc = acc + f;
    return acc;
}

} // namespace mtype

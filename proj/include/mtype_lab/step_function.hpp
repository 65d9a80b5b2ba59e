#pragma once

#include "mtype_lab/quad_rational.hpp"
#include "mtype_lab/rational.hpp"

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mtype {

inline constexpr int kDefaultLevelCap = 12;

/// Finite partition of [0,1) into half-open cells with rational endpoints.
/// Breakpoints are strictly increasing, start at 0 and end at 1.
class IntervalPartition {
public:
    explicit IntervalPartition(std::vector<Rational> breakpoints);

    static IntervalPartition trivial();
    /// 2^level equal dyadic cells.
    static IntervalPartition dyadic(int level, int level_cap = kDefaultLevelCap);
    /// m equal cells.
    static IntervalPartition uniform(long m);

    std::size_t cell_count() const { return breakpoints_.size() - 1; }
    const std::vector<Rational>& breakpoints() const { return breakpoints_; }
    const Rational& cell_left(std::size_t i) const { return breakpoints_[i]; }
    const Rational& cell_right(std::size_t i) const { return breakpoints_[i + 1]; }
    Rational cell_length(std::size_t i) const { return breakpoints_[i + 1] - breakpoints_[i]; }

    /// Index of the cell containing t in [0,1).
    std::size_t cell_of(const Rational& t) const;

    /// True when every cell of `coarser` is a union of cells of *this.
    bool refines(const IntervalPartition& coarser) const;

    static IntervalPartition common_refinement(const IntervalPartition& p,
                                               const IntervalPartition& q);

    bool operator==(const IntervalPartition& o) const { return breakpoints_ == o.breakpoints_; }
    bool operator!=(const IntervalPartition& o) const { return !(*this == o); }

private:
    std::vector<Rational> breakpoints_;
};

/// Which norm a coordinate space carries. Norm *squares* of vectors with
/// QuadRational entries stay in the ring for every kind, which is what all
/// exact comparisons run on. WeightedL2Sum splits the vector into equally
/// sized blocks, one per weight, and sums w_i * inner_norm_sq(block_i); it
/// encodes [L2,X]-valued coefficients over a fixed grid.
class NormKind {
public:
    enum class Tag { L1, L2Sq, Linf, WeightedL2Sum };

    static NormKind l1() { return NormKind(Tag::L1); }
    static NormKind l2() { return NormKind(Tag::L2Sq); }
    static NormKind linf() { return NormKind(Tag::Linf); }
    static NormKind weighted_l2(std::vector<Rational> weights, NormKind inner);

    Tag tag() const { return tag_; }
    const std::vector<Rational>& weights() const { return weights_; }
    const NormKind& inner() const { return *inner_; }

    QuadRational norm_sq(std::span<const QuadRational> v) const;
    double norm_double(std::span<const QuadRational> v) const;

    /// l1 <-> linf, l2 <-> l2. WeightedL2Sum duals are unsupported.
    NormKind dual() const;

    bool operator==(const NormKind& o) const;
    bool operator!=(const NormKind& o) const { return !(*this == o); }

    /// "l1", "l2", "linf" (the weighted sum kind has no flat text form).
    std::string to_string() const;
    static NormKind parse(const std::string& text);

private:
    explicit NormKind(Tag tag) : tag_(tag) {}

    Tag tag_;
    std::vector<Rational> weights_;
    std::shared_ptr<const NormKind> inner_;
};

/// Piecewise-constant map [0,1) -> Q(sqrt2)^dimension. The stored partition
/// is whatever the caller provided; canonical() merges adjacent equal-valued
/// cells, and equality always compares canonical forms, so two step functions
/// are equal exactly when they agree as functions.
class StepFunction {
public:
    StepFunction(IntervalPartition partition,
                 std::vector<std::vector<QuadRational>> values,
                 int dimension);

    static StepFunction constant(std::vector<QuadRational> value);
    static StepFunction zero(int dimension);

    int dimension() const { return dimension_; }
    const IntervalPartition& partition() const { return partition_; }
    const std::vector<QuadRational>& value_on_cell(std::size_t i) const { return values_[i]; }
    std::size_t cell_count() const { return partition_.cell_count(); }

    const std::vector<QuadRational>& evaluate(const Rational& t) const {
        return values_[partition_.cell_of(t)];
    }

    bool is_zero() const;

    /// Minimal representation: adjacent cells with equal values merged.
    StepFunction canonical() const;

    /// Same function, re-expressed on a partition refining `target` (no merging).
    StepFunction refined_to(const IntervalPartition& target) const;

    StepFunction operator+(const StepFunction& o) const;
    StepFunction operator-(const StepFunction& o) const;
    StepFunction operator-() const;
    StepFunction scaled(const QuadRational& c) const;

    bool operator==(const StepFunction& o) const;
    bool operator!=(const StepFunction& o) const { return !(*this == o); }

private:
    IntervalPartition partition_;
    std::vector<std::vector<QuadRational>> values_;
    int dimension_;
};

/// Re-expresses both functions on the common refinement of their partitions.
std::pair<StepFunction, StepFunction> common_refinement(const StepFunction& f,
                                                        const StepFunction& g);

/// Integral of the squared pointwise norm: sum of cell_length * norm_sq(value).
QuadRational l2_norm_sq(const StepFunction& f, const NormKind& norm);

/// L_p norm (integral of the p-th power of the pointwise norm, then the p-th
/// root); double precision, for the L_p ratio evaluators.
double lp_norm_double(const StepFunction& f, const NormKind& norm, double p);

/// Exact integral of the coordinate pairing <f(t), g(t)>.
QuadRational pairing(const StepFunction& f, const StepFunction& g);

/// Averages f over each cell of `coarser`.
StepFunction conditional_expectation(const StepFunction& f, const IntervalPartition& coarser);

/// Phi_j^m f: squeezes f into [(j-1)/m, j/m) by t -> m t - j + 1, zero elsewhere.
StepFunction transport(const StepFunction& f, long j, long m);

StepFunction sum(const std::vector<StepFunction>& fs, int dimension);

} // namespace mtype

#pragma once

#include "mtype_lab/haar.hpp"
#include "mtype_lab/operator_spec.hpp"
#include "mtype_lab/step_function.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace mtype {

/// Increasing chain of interval partitions F_0 <= F_1 <= ... <= F_n.
class Filtration {
public:
    explicit Filtration(std::vector<IntervalPartition> partitions);

    /// F_k = dyadic partition of level k, k = 0..n.
    static Filtration dyadic(int n, int level_cap = kDefaultLevelCap);

    std::size_t size() const { return partitions_.size(); }
    const IntervalPartition& at(std::size_t i) const { return partitions_[i]; }
    const std::vector<IntervalPartition>& partitions() const { return partitions_; }

private:
    std::vector<IntervalPartition> partitions_;
};

/// Martingale difference sequence d_1..d_n adapted to a filtration F_0..F_n:
/// d_k is constant on the cells of F_k and E_{F_{k-1}} d_k = 0. The
/// structural part is enforced on construction; the martingale property is
/// checked by validate().
class MDS {
public:
    MDS(Filtration filtration, std::vector<StepFunction> differences, int dimension);

    std::size_t length() const { return differences_.size(); }
    int dimension() const { return dimension_; }
    const StepFunction& difference(std::size_t k) const { return differences_[k]; }
    const std::vector<StepFunction>& differences() const { return differences_; }
    const Filtration& filtration() const { return filtration_; }

    StepFunction sum() const;

private:
    Filtration filtration_;
    std::vector<StepFunction> differences_;
    int dimension_;
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

/// Checks measurability and the zero-conditional-expectation property exactly.
ValidationReport validate(const MDS& m);

/// d_k := sum_j x_k^(j) chi_k^(j) over the dyadic filtration. A level-0
/// coefficient is an initial constant and is excluded from the differences.
MDS from_haar_coeffs(const HaarCoefficients& c, int level_cap = kDefaultLevelCap);

/// Glues `mod` squeezed copies: Phi_1 d_1, ..., Phi_mod d_1, Phi_1 d_2, ...
/// Each difference keeps 1/mod of its squared norm; partial and total sums
/// keep their L2 norms.
MDS glue(const MDS& m, long mod);

/// Blocks the (n+1)-fold glueing of an equal-norm MDS of length n into n+1
/// differences of squared norm n/(n+1) times the input's; the sum of the
/// outputs equals the glued sum of the inputs. Norm equality is checked
/// under `norm`.
MDS equalize(const MDS& m, const NormKind& norm);

struct NormalizeResult {
    MDS bucketed;
    std::vector<std::size_t> discarded; // 0-based indices into the input
    QuadRational discarded_norm_sq;     // sum of their squared norms
    QuadRational discarded_image_norm_sq;
    long modulus = 0;                   // m = 4^l
    int levels = 0;                     // l
};

/// The bucketing construction: keeps the indices with squared norm above
/// 4^{-l} (16 n < 4^{l+1} <= 64 n), glues with modulus m = 4^l and blocks each
/// kept difference into pieces with squared norm in (1/m, 4/m]. Requires the
/// squared norms to add up to exactly 1 under T's source norm.
NormalizeResult normalize_mds(const MDS& m, const OperatorSpec& T);

/// The two-variable construction: reads an MDS of length 2^n as a function of
/// (s, t) and expands in s over D_0^n. Coefficient values are step functions
/// of t, flattened on a common grid; their norms live in the weighted-l2-sum
/// space with the grid cell lengths as weights.
struct CotypeInstance {
    HaarCoefficients coeffs; // dimension = base_dimension * grid cells
    IntervalPartition grid;
    int base_dimension;
};

CotypeInstance mds_to_cotype_instance(const MDS& m);

} // namespace mtype

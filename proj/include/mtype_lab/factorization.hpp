#pragma once

#include "mtype_lab/martingale.hpp"
#include "mtype_lab/operator_spec.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace mtype {

/// A factorization Sigma_n = B [L2,T] A built from an equal-norm martingale
/// witness and a norming functional. A maps e_k to a rescaled witness
/// difference; B pairs against conditional expectations of the functional.
/// Composing the three reproduces the summation matrix exactly: entry (h, k)
/// is 1 for i_h >= i_k by measurability and 0 for i_h < i_k by the martingale
/// property.
struct FactorizationResult {
    int n = 0;
    std::vector<std::size_t> indices;        // i_1 < ... < i_n (0-based into the witness)
    std::vector<StepFunction> a_columns;     // A e_k = d_{i_k} / <[L2,T] d_{i_k}, g>
    std::vector<StepFunction> b_functionals; // E_{i_k} g
    QuadRational norm_a_sq;                  // exact (l1 source)
    QuadRational norm_b_sq;                  // rigorous upper bound, <= ||g||^2
    QuadRational witness_ratio_sq;           // r^2, the witness's equal-norm ratio
    Rational delta;                          // the threshold parameter that succeeded
    double product_bound = 0.0;              // sqrt(norm_a_sq * norm_b_sq)
    std::vector<std::vector<QuadRational>> composed; // audit copy of B [L2,T] A
};

/// The index set F(delta) = {k : <[L2,T] d_k, g> > delta r ||d|| / (4 sqrt(2n))};
/// shrinks as delta grows.
std::vector<std::size_t> factorization_index_set(const OperatorSpec& T, const MDS& witness,
                                                 const StepFunction& g, const Rational& delta);

/// The norming functional of sum [L2,T] d_k in the dual of the target,
/// computed per cell: sign vector for l1 targets, mass on the maximal
/// coordinates for linf targets, a rational multiple of the image for l2.
StepFunction default_norming_functional(const OperatorSpec& T, const MDS& witness);

/// Builds the factorization for one delta. Throws ConstructionError when the
/// witness is too weak (|F| < n) and std::invalid_argument on violated
/// preconditions (invalid MDS, unequal norms, ||g|| > 1, nonpositive pairing).
FactorizationResult build_factorization(const OperatorSpec& T, const MDS& witness,
                                        const std::optional<StepFunction>& g,
                                        const Rational& delta);

/// Tries a descending delta schedule and returns the first success.
FactorizationResult build_factorization_schedule(const OperatorSpec& T, const MDS& witness,
                                                 const std::optional<StepFunction>& g,
                                                 const std::vector<Rational>& schedule);

std::vector<Rational> default_delta_schedule();

struct FactorizationReport {
    bool pass = false;
    std::vector<std::pair<int, int>> bad_entries; // (row, col) of mismatches
    QuadRational norm_a_sq;
    QuadRational norm_b_sq;
    double product = 0.0;
};

/// Recomputes all n^2 entries and both norms from the stored columns and
/// functionals.
FactorizationReport verify_factorization(const FactorizationResult& res, const OperatorSpec& T);

} // namespace mtype

#pragma once

#include "mtype_lab/haar.hpp"
#include "mtype_lab/martingale.hpp"
#include "mtype_lab/operator_spec.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mtype {

/// Exact squared ratio: the certificate behind every lower bound. Stored as
/// numerator and denominator squares so degenerate witnesses stay visible.
struct RatioSq {
    QuadRational num_sq;
    QuadRational den_sq;

    bool degenerate() const { return den_sq.is_zero(); }
    /// Throws std::domain_error when the denominator is zero.
    QuadRational value_sq() const;
    double value() const { return std::sqrt(value_sq().to_double()); }

    /// Exact comparison by cross-multiplication (degenerate compares lowest).
    bool less_than(const RatioSq& o) const;
};

enum class Direction { Type, Cotype };
enum class MartingaleVariant { Type, Cotype, EqualNorm, EqualNormSup };

/// Type:   ||sum T x_kj chi_kj | L2||^2  vs  sum ||x_kj||^2.
/// Cotype: sum ||T x_kj||^2              vs  ||sum x_kj chi_kj | L2||^2.
RatioSq haar_ratio(const OperatorSpec& T, const HaarCoefficients& c, Direction dir);

/// The martingale counterparts; EqualNorm insists on exactly equal squared
/// norms, EqualNormSup divides by n * sup_k ||d_k||^2 instead of the sum.
RatioSq martingale_ratio(const OperatorSpec& T, const MDS& m, MartingaleVariant variant);

/// L_p version over D_1^n, 1 < p <= 2; floating point (>= 12 digits here).
double type_p_ratio(const OperatorSpec& T, const HaarCoefficients& c, const Rational& p);

/// The martingale-type-p ratio of one difference sequence:
/// ||sum [L2,T] d_k | L_p||  vs  (sum_k ||d_k | L_p||^p)^{1/p}.
/// Ratio evaluator only; at p = 2 it coincides with the Type variant above.
double martingale_type_p_ratio(const OperatorSpec& T, const MDS& m, const Rational& p);

/// The coordinate-indicator function f(t) = e_i on the i-th dyadic cell,
/// expanded over D_0^n; dimension 2^n. Its summation-operator images have
/// linf norm exactly 2^{-(k+1)/2} at every level k >= 1.
HaarCoefficients summation_cotype_witness(int n, int level_cap = kDefaultLevelCap);

/// Level-indexed witness x_k^(j) = c_k e_k (every index of level k shares the
/// scaled k-th basis vector); with the Hoelder-optimal scales it attains
/// (sum_{k<=n} tau_k^{p'})^{1/p'} for the diagonal operator exactly whenever
/// 1/(p-1) is an integer, in particular at p = 2, 3/2, 4/3.
HaarCoefficients diagonal_type_witness(const std::vector<Rational>& t, int n, const Rational& p,
                                       int level_cap = kDefaultLevelCap);

/// Closed forms for the diagonal operator: sum of tau_k^2 (exact), and
/// (sum tau_k^{p'})^{1/p'} in doubles.
QuadRational diagonal_type_exact_sq(const std::vector<Rational>& t, int n);
double diagonal_type_exact(const std::vector<Rational>& t, int n, const Rational& p);

struct EstimateKind {
    enum class Family {
        HaarType,
        HaarCotype,
        MartingaleType,
        MartingaleCotype,
        EqualNormType,
        TypeP,
    };

    Family family = Family::HaarType;
    int tree_m = 0;            // Haar kinds only; TypeP always uses D_1^n
    Rational p = Rational(2);  // TypeP only

    static EstimateKind haar_type(int m = 0) { return {Family::HaarType, m, Rational(2)}; }
    static EstimateKind haar_cotype(int m = 0) { return {Family::HaarCotype, m, Rational(2)}; }
    static EstimateKind mtype() { return {Family::MartingaleType, 0, Rational(2)}; }
    static EstimateKind mcotype() { return {Family::MartingaleCotype, 0, Rational(2)}; }
    static EstimateKind eq_mtype() { return {Family::EqualNormType, 0, Rational(2)}; }
    static EstimateKind type_p(Rational p) { return {Family::TypeP, 1, std::move(p)}; }

    bool is_haar() const { return family == Family::HaarType || family == Family::HaarCotype; }
    bool is_martingale() const {
        return family == Family::MartingaleType || family == Family::MartingaleCotype ||
               family == Family::EqualNormType;
    }
    std::string name() const;
    static EstimateKind parse(const std::string& name, int tree_m, const Rational& p);
};

struct SearchConfig {
    int level_cap = kDefaultLevelCap;
    long enum_budget = 1000000;
    std::uint64_t seed = 0;
    int random_candidates = 48;
};

/// Certified (lower, upper) pair for one ideal norm at one index. The lower
/// bound is the exact squared ratio of the stored witness; the upper bound is
/// the minimum of the closed-form caps recorded in upper_provenance. For
/// TypeP with p != 2 the certificate is the floating-point `lower` and
/// lower_sq/upper_sq carry the p-independent ring bounds.
struct IdealNormEstimate {
    EstimateKind kind;
    int n = 0;
    QuadRational lower_sq;
    QuadRational upper_sq;
    double lower = 0.0;
    double upper = 0.0;
    std::string lower_provenance;
    std::string upper_provenance;
    std::string note;
    std::uint64_t seed = 0;
    long budget = 0;
    std::optional<HaarCoefficients> haar_witness;
    std::optional<MDS> mds_witness;
};

IdealNormEstimate estimate(const OperatorSpec& T, const EstimateKind& kind, int n,
                           const SearchConfig& cfg);

/// Re-runs the stored witness through the matching ratio evaluator; must
/// reproduce lower_sq exactly (or `lower` bit-for-bit for TypeP, p != 2).
RatioSq reevaluate(const OperatorSpec& T, const IdealNormEstimate& est);
double reevaluate_float(const OperatorSpec& T, const IdealNormEstimate& est);

struct RelationCheck {
    std::string relation;
    QuadRational lhs_sq; // certified lower bound of the left side, squared
    QuadRational rhs_sq; // constant^2 times the rigorous upper bound of the right side
    bool pass = false;
};

struct RelationReport {
    int n = 0;
    std::vector<RelationCheck> checks;
    bool ok() const;
};

/// Checks every finite-n relation in the soundly checkable direction:
/// certified-lower(left) <= constant * rigorous-upper(right), exactly on
/// squares. A failure contradicts a theorem and means a bug.
RelationReport verify_relations(const OperatorSpec& T, int n, const SearchConfig& cfg);

struct Lemma32Result {
    RatioSq best_equal_norm;
    RatioSq best_sup;
    bool agree = false;
    std::size_t instances = 0;
};

/// Full sign/coordinate enumeration over D_1^n instances: the best equal-norm
/// ratio must equal the best sup-normalized ratio (the extreme point argument
/// made concrete). Feasible only for small n and dimension.
Lemma32Result lemma32_brute_force(const OperatorSpec& T, int n,
                                  long budget = 200000, int level_cap = kDefaultLevelCap);

} // namespace mtype

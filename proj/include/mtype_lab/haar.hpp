#pragma once

#include "mtype_lab/step_function.hpp"

#include <vector>

namespace mtype {

/// Node (k, j) of a dyadic tree: level k >= 1 with 1 <= j <= 2^{k-1},
/// plus the root (0, 0).
struct TreeIndex {
    int k = 0;
    int j = 0;

    bool operator==(const TreeIndex& o) const { return k == o.k && j == o.j; }
    bool operator!=(const TreeIndex& o) const { return !(*this == o); }
};

bool valid_tree_index(const TreeIndex& idx);

/// D_m^n = {(k, j) : k = m..n, j = 1..2^{k-1}}, with D_0^n = D_1^n u {(0,0)}.
/// Level-major, j ascending. |D_1^n| = 2^n - 1, |D_0^n| = 2^n.
std::vector<TreeIndex> tree(int m, int n, int level_cap = kDefaultLevelCap);

/// chi_k^(j): +2^{(k-1)/2} on the left half of its dyadic support interval,
/// -2^{(k-1)/2} on the right half; chi_0^(0) == 1.
StepFunction haar_fn(const TreeIndex& idx, int level_cap = kDefaultLevelCap);

/// Coefficient family over a dyadic tree D_m^n, one vector in
/// Q(sqrt2)^dimension per index, stored level-major.
class HaarCoefficients {
public:
    HaarCoefficients(int tree_m, int tree_n, int dimension,
                     std::vector<std::vector<QuadRational>> values);

    static HaarCoefficients zero(int tree_m, int tree_n, int dimension,
                                 int level_cap = kDefaultLevelCap);

    int tree_m() const { return tree_m_; }
    int tree_n() const { return tree_n_; }
    int dimension() const { return dimension_; }
    std::size_t size() const { return values_.size(); }

    const std::vector<TreeIndex>& indices() const { return indices_; }
    const std::vector<QuadRational>& at(const TreeIndex& idx) const;
    void set(const TreeIndex& idx, std::vector<QuadRational> value);
    const std::vector<std::vector<QuadRational>>& values() const { return values_; }

    bool operator==(const HaarCoefficients& o) const {
        return tree_m_ == o.tree_m_ && tree_n_ == o.tree_n_ && dimension_ == o.dimension_ &&
               values_ == o.values_;
    }

private:
    std::size_t offset_of(const TreeIndex& idx) const;

    int tree_m_, tree_n_, dimension_;
    std::vector<TreeIndex> indices_;
    std::vector<std::vector<QuadRational>> values_;
};

/// Exact Haar coefficients of f over D_m^n: coeff(k,j)_c = <f_c, chi_k^(j)>.
HaarCoefficients analyze(const StepFunction& f, int m, int n, int level_cap = kDefaultLevelCap);

/// The Haar polynomial with the given coefficients (canonical form).
StepFunction synthesize(const HaarCoefficients& c, int level_cap = kDefaultLevelCap);

} // namespace mtype

#include "mtype_lab/ideal_norms.hpp"

#include "mtype_lab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>

namespace mtype {

QuadRational RatioSq::value_sq() const {
    if (den_sq.is_zero()) throw std::domain_error("degenerate witness: zero denominator");
    return num_sq / den_sq;
}

bool RatioSq::less_than(const RatioSq& o) const {
    if (den_sq.is_zero()) return !o.den_sq.is_zero();
    if (o.den_sq.is_zero()) return false;
    return num_sq * o.den_sq < o.num_sq * den_sq;
}

namespace {

int synth_cap(const HaarCoefficients& c) {
    return std::max(kDefaultLevelCap, c.tree_n());
}

} // namespace

RatioSq haar_ratio(const OperatorSpec& T, const HaarCoefficients& c, Direction dir) {
    if (c.dimension() != T.source().dim) throw std::invalid_argument("dimension mismatch");
    if (dir == Direction::Type) {
        StepFunction image = apply_l2(T, synthesize(c, synth_cap(c)));
        QuadRational num = l2_norm_sq(image, T.target().norm);
        QuadRational den;
        for (const auto& x : c.values()) den += T.source().norm.norm_sq(x);
        return RatioSq{num, den};
    }
    QuadRational num;
    for (const auto& x : c.values()) num += T.target().norm.norm_sq(T.apply(x));
    QuadRational den = l2_norm_sq(synthesize(c, synth_cap(c)), T.source().norm);
    return RatioSq{num, den};
}

namespace {

RatioSq martingale_ratio_impl(const OperatorSpec& T, const MDS& m, MartingaleVariant variant) {
    const NormKind& src = T.source().norm;
    const NormKind& tgt = T.target().norm;
    switch (variant) {
    case MartingaleVariant::Type:
    case MartingaleVariant::EqualNorm: {
        QuadRational num = l2_norm_sq(apply_l2(T, m.sum()), tgt);
        QuadRational den;
        for (const auto& d : m.differences()) den += l2_norm_sq(d, src);
        return RatioSq{num, den};
    }
    case MartingaleVariant::Cotype: {
        QuadRational num;
        for (const auto& d : m.differences()) num += l2_norm_sq(apply_l2(T, d), tgt);
        QuadRational den = l2_norm_sq(m.sum(), src);
        return RatioSq{num, den};
    }
    case MartingaleVariant::EqualNormSup: {
        QuadRational num = l2_norm_sq(apply_l2(T, m.sum()), tgt);
        QuadRational sup;
        for (const auto& d : m.differences()) sup = max(sup, l2_norm_sq(d, src));
        return RatioSq{num, Rational(static_cast<long>(m.length())) * sup};
    }
    }
    throw std::logic_error("unreachable");
}

void require_equal_norms(const OperatorSpec& T, const MDS& m) {
    if (m.length() == 0) return;
    QuadRational v = l2_norm_sq(m.difference(0), T.source().norm);
    for (std::size_t k = 1; k < m.length(); ++k)
        if (l2_norm_sq(m.difference(k), T.source().norm) != v)
            throw std::invalid_argument("equal-norm ratio requires exactly equal squared norms");
}

} // namespace

RatioSq martingale_ratio(const OperatorSpec& T, const MDS& m, MartingaleVariant variant) {
    if (m.dimension() != T.source().dim) throw std::invalid_argument("dimension mismatch");
    ValidationReport rep = validate(m);
    if (!rep.ok()) throw std::invalid_argument("invalid MDS: " + rep.violations.front());
    if (variant == MartingaleVariant::EqualNorm) require_equal_norms(T, m);
    return martingale_ratio_impl(T, m, variant);
}

double type_p_ratio(const OperatorSpec& T, const HaarCoefficients& c, const Rational& p) {
    if (c.dimension() != T.source().dim) throw std::invalid_argument("dimension mismatch");
    if (c.tree_m() != 1) throw std::invalid_argument("type-p ratios are defined over D_1^n");
    if (cmp(p, Rational(1)) <= 0 || cmp(p, Rational(2)) > 0)
        throw std::invalid_argument("p must lie in (1, 2]");
    double pd = to_double(p);

    StepFunction image = apply_l2(T, synthesize(c, synth_cap(c)));
    double num = lp_norm_double(image, T.target().norm, pd);

    double den_p = 0;
    for (int k = 1; k <= c.tree_n(); ++k) {
        HaarCoefficients level = HaarCoefficients::zero(k, k, c.dimension(), synth_cap(c));
        for (long j = 1; j <= (1L << (k - 1)); ++j)
            level.set({k, static_cast<int>(j)}, c.at({k, static_cast<int>(j)}));
        double lvl = lp_norm_double(synthesize(level, synth_cap(c)), T.source().norm, pd);
        den_p += std::pow(lvl, pd);
    }
    double den = std::pow(den_p, 1.0 / pd);
    if (den == 0.0) {
        if (num == 0.0) return 0.0;
        throw std::domain_error("degenerate witness: zero denominator");
    }
    return num / den;
}

double martingale_type_p_ratio(const OperatorSpec& T, const MDS& m, const Rational& p) {
    if (m.dimension() != T.source().dim) throw std::invalid_argument("dimension mismatch");
    if (cmp(p, Rational(1)) <= 0 || cmp(p, Rational(2)) > 0)
        throw std::invalid_argument("p must lie in (1, 2]");
    ValidationReport rep = validate(m);
    if (!rep.ok()) throw std::invalid_argument("invalid MDS: " + rep.violations.front());
    double pd = to_double(p);
    double num = lp_norm_double(apply_l2(T, m.sum()), T.target().norm, pd);
    double den_p = 0;
    for (const auto& d : m.differences())
        den_p += std::pow(lp_norm_double(d, T.source().norm, pd), pd);
    double den = std::pow(den_p, 1.0 / pd);
    if (den == 0.0) {
        if (num == 0.0) return 0.0;
        throw std::domain_error("degenerate witness: zero denominator");
    }
    return num / den;
}

HaarCoefficients summation_cotype_witness(int n, int level_cap) {
    if (n < 1) throw std::invalid_argument("summation witness needs n >= 1");
    IntervalPartition grid = IntervalPartition::dyadic(n, level_cap);
    long dim = 1L << n;
    std::vector<std::vector<QuadRational>> vals;
    vals.reserve(dim);
    for (long i = 0; i < dim; ++i) {
        std::vector<QuadRational> e(dim);
        e[i] = QuadRational(1);
        vals.push_back(std::move(e));
    }
    StepFunction f(grid, std::move(vals), static_cast<int>(dim));
    return analyze(f, 0, n, level_cap);
}

namespace {

// Hoelder-optimal level weights u_k with u_k^p = tau_k^{p'}; rational exactly
// when 1/(p-1) is an integer (p = 2, 3/2, 4/3, ...).
Rational level_weight(const Rational& tau, const Rational& p) {
    Rational q = Rational(1) / (p - 1);
    if (q.get_den() == 1 && q.get_num().fits_ulong_p())
        return pow_int(tau, q.get_num().get_ui());
    double u = std::pow(to_double(tau), to_double(q));
    long den = 1000000;
    return make_rational(std::lround(u * static_cast<double>(den)), den);
}

} // namespace

HaarCoefficients diagonal_type_witness(const std::vector<Rational>& t, int n, const Rational& p,
                                       int level_cap) {
    if (n < 1) throw std::invalid_argument("diagonal witness needs n >= 1");
    if (static_cast<int>(t.size()) < n)
        throw std::invalid_argument("diagonal witness needs at least n weights");
    if (n > level_cap)
        throw LevelCapError("witness level " + std::to_string(n) + " exceeds cap " +
                            std::to_string(level_cap));
    int dim = static_cast<int>(t.size());
    HaarCoefficients c = HaarCoefficients::zero(1, n, dim, level_cap);
    for (int k = 1; k <= n; ++k) {
        QuadRational ck = QuadRational(level_weight(t[k - 1], p)) * QuadRational::pow2_half(1 - k);
        std::vector<QuadRational> x(dim);
        x[k - 1] = ck;
        for (long j = 1; j <= (1L << (k - 1)); ++j) c.set({k, static_cast<int>(j)}, x);
    }
    return c;
}

QuadRational diagonal_type_exact_sq(const std::vector<Rational>& t, int n) {
    if (static_cast<int>(t.size()) < n) throw std::invalid_argument("need at least n weights");
    Rational s;
    for (int k = 0; k < n; ++k) s += t[k] * t[k];
    return QuadRational(s);
}

double diagonal_type_exact(const std::vector<Rational>& t, int n, const Rational& p) {
    if (static_cast<int>(t.size()) < n) throw std::invalid_argument("need at least n weights");
    double pd = to_double(p);
    double pprime = pd / (pd - 1.0);
    double s = 0;
    for (int k = 0; k < n; ++k) s += std::pow(to_double(t[k]), pprime);
    return std::pow(s, 1.0 / pprime);
}

std::string EstimateKind::name() const {
    switch (family) {
    case Family::HaarType: return "haar-type";
    case Family::HaarCotype: return "haar-cotype";
    case Family::MartingaleType: return "mtype";
    case Family::MartingaleCotype: return "mcotype";
    case Family::EqualNormType: return "eq-mtype";
    case Family::TypeP: return "type-p";
    }
    throw std::logic_error("unreachable");
}

EstimateKind EstimateKind::parse(const std::string& name, int tree_m, const Rational& p) {
    if (tree_m != 0 && tree_m != 1) throw ParseError("tree must start at level 0 or 1");
    if (name == "haar-type") return haar_type(tree_m);
    if (name == "haar-cotype") return haar_cotype(tree_m);
    if (name == "mtype") return mtype();
    if (name == "mcotype") return mcotype();
    if (name == "eq-mtype") return eq_mtype();
    if (name == "type-p") return type_p(p);
    throw ParseError("unknown estimate kind: " + name);
}

// ---------------------------------------------------------------------------
// Estimator internals
// ---------------------------------------------------------------------------

namespace {

// Deterministic candidate stream; mt19937_64 has a standard-pinned sequence,
// and reductions below avoid std::uniform_int_distribution (not portable).
struct Rng {
    std::mt19937_64 eng;
    explicit Rng(std::uint64_t seed) : eng(seed) {}
    std::uint64_t next() { return eng(); }
    long below(long n) { return static_cast<long>(next() % static_cast<std::uint64_t>(n)); }
};

struct Candidate {
    RatioSq ratio;
    std::optional<HaarCoefficients> haar;
    std::optional<MDS> mds;
    std::string provenance;
    double float_ratio = 0.0; // TypeP score
};

struct Best {
    Candidate cand;
    bool have = false;
    bool by_float = false;

    void offer(Candidate c) {
        if (!by_float) {
            if (c.ratio.den_sq.is_zero()) return;
            if (!have || cand.ratio.less_than(c.ratio)) {
                cand = std::move(c);
                have = true;
            }
        } else {
            if (!have || cand.float_ratio < c.float_ratio) {
                cand = std::move(c);
                have = true;
            }
        }
    }
};

using Assignment = std::vector<std::pair<int, int>>; // (coordinate, sign) per node

HaarCoefficients assignment_coeffs(int tree_m, int n, int dim,
                                   const std::vector<TreeIndex>& nodes, const Assignment& asg,
                                   const std::vector<QuadRational>& level_scale, int level_cap) {
    HaarCoefficients c = HaarCoefficients::zero(tree_m, n, dim, level_cap);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        std::vector<QuadRational> x(dim);
        const QuadRational& s = level_scale[nodes[i].k];
        x[asg[i].first] = asg[i].second > 0 ? s : -s;
        c.set(nodes[i], x);
    }
    return c;
}

std::vector<QuadRational> flat_scales(int n) {
    std::vector<QuadRational> s(n + 1);
    s[0] = QuadRational(1);
    for (int k = 1; k <= n; ++k) s[k] = QuadRational::pow2_half(1 - k);
    return s;
}

// Number of (coordinate, sign) assignments, saturating at limit+1.
long assignment_count(std::size_t nodes, int dim, long limit) {
    long total = 1;
    for (std::size_t i = 0; i < nodes; ++i) {
        if (total > limit / (2 * dim) + 1) return limit + 1;
        total *= 2 * dim;
    }
    return total;
}

Assignment decode_assignment(long code, std::size_t nodes, int dim) {
    Assignment asg(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        int digit = static_cast<int>(code % (2 * dim));
        code /= 2 * dim;
        asg[i] = {digit / 2, digit % 2 == 0 ? 1 : -1};
    }
    return asg;
}

Assignment random_assignment(Rng& rng, std::size_t nodes, int dim) {
    Assignment asg(nodes);
    for (auto& a : asg) a = {static_cast<int>(rng.below(dim)), rng.below(2) == 0 ? 1 : -1};
    return asg;
}

// --------------------------- Haar-kind search ------------------------------

struct HaarScorer {
    const OperatorSpec& T;
    const EstimateKind& kind;

    bool by_float() const {
        return kind.family == EstimateKind::Family::TypeP && kind.p != Rational(2);
    }

    Candidate score(HaarCoefficients c, const char* prov) const {
        Candidate cand;
        cand.provenance = prov;
        switch (kind.family) {
        case EstimateKind::Family::HaarType:
            cand.ratio = haar_ratio(T, c, Direction::Type);
            break;
        case EstimateKind::Family::HaarCotype:
            cand.ratio = haar_ratio(T, c, Direction::Cotype);
            break;
        case EstimateKind::Family::TypeP:
            cand.float_ratio = type_p_ratio(T, c, kind.p);
            if (kind.p == Rational(2)) cand.ratio = haar_ratio(T, c, Direction::Type);
            break;
        default:
            throw std::logic_error("haar scorer used for a martingale kind");
        }
        cand.haar = std::move(c);
        return cand;
    }
};

void search_haar_kind(const OperatorSpec& T, const EstimateKind& kind, int n,
                      const SearchConfig& cfg, Best& best) {
    const int dim = T.source().dim;
    const int tree_m = kind.family == EstimateKind::Family::TypeP ? 1 : kind.tree_m;
    HaarScorer scorer{T, kind};
    best.by_float = scorer.by_float();
    std::vector<TreeIndex> nodes = tree(tree_m, n, cfg.level_cap);
    std::vector<QuadRational> flat = flat_scales(n);

    // Named family: level-indexed diagonal witness (needs dim >= n).
    if (dim >= n) {
        std::vector<Rational> ones(dim, Rational(1));
        best.offer(scorer.score(diagonal_type_witness(ones, n, kind.p, cfg.level_cap),
                                "diagonal-witness(flat)"));
        // If T is square and has a nonzero diagonal, weight by it (optimal for
        // diagonal operators at p = 2). Padding keeps the witness dimension
        // equal to T's; only the first n weights enter the scales.
        if (T.rows() == T.cols()) {
            bool ok = true;
            std::vector<Rational> diag;
            for (int i = 0; i < n && ok; ++i) {
                const QuadRational& e = T.entry(i, i);
                if (!e.is_rational() || sgn(e.rational_part()) <= 0) ok = false;
                else diag.push_back(e.rational_part());
            }
            if (ok) {
                for (std::size_t i = 1; i < diag.size(); ++i)
                    if (cmp(diag[i], diag[i - 1]) > 0) ok = false;
            }
            if (ok) {
                while (static_cast<int>(diag.size()) < dim) diag.push_back(diag.back());
                best.offer(scorer.score(diagonal_type_witness(diag, n, kind.p, cfg.level_cap),
                                        "diagonal-witness(weighted)"));
            }
        }
    }

    // Named family: the coordinate-indicator cotype witness (needs dim = 2^n).
    // Its tree is D_0^n; for a D_1^n kind the root coefficient must go, since
    // a D_0 instance is not admissible there.
    if (kind.family == EstimateKind::Family::HaarCotype && n <= 20 && dim == (1L << n)) {
        HaarCoefficients w = summation_cotype_witness(n, cfg.level_cap);
        if (tree_m == 0) {
            best.offer(scorer.score(std::move(w), "summation-witness"));
        } else {
            HaarCoefficients stripped = HaarCoefficients::zero(1, n, dim, cfg.level_cap);
            for (const auto& idx : stripped.indices()) stripped.set(idx, w.at(idx));
            best.offer(scorer.score(std::move(stripped), "summation-witness(no-root)"));
        }
    }

    // Extreme-point enumeration when the source is l1 and the budget allows;
    // the effective cap also accounts for the per-candidate evaluation cost.
    bool enumerated = false;
    if (T.source().norm.tag() == NormKind::Tag::L1) {
        long per_candidate = static_cast<long>(nodes.size()) * dim + 1;
        long effective = std::min(cfg.enum_budget, 300000 / per_candidate);
        long count = assignment_count(nodes.size(), dim, effective);
        if (count <= effective) {
            enumerated = true;
            for (long code = 0; code < count; ++code) {
                Assignment asg = decode_assignment(code, nodes.size(), dim);
                best.offer(scorer.score(
                    assignment_coeffs(tree_m, n, dim, nodes, asg, flat, cfg.level_cap),
                    "enumeration"));
            }
        }
    }

    // Seeded random restarts. The count shrinks with the instance size so
    // large trees stay fast; it depends only on the inputs, so runs stay
    // deterministic.
    long work = static_cast<long>(nodes.size()) * dim;
    Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    int restarts = enumerated
                       ? 0
                       : static_cast<int>(std::max<long>(
                             4, std::min<long>(cfg.random_candidates, 4096 / (work + 1))));
    std::vector<Assignment> pool;
    for (int r = 0; r < restarts; ++r) {
        Assignment asg = random_assignment(rng, nodes.size(), dim);
        best.offer(scorer.score(
            assignment_coeffs(tree_m, n, dim, nodes, asg, flat, cfg.level_cap),
            "random-restart"));
        if (r < 2) pool.push_back(std::move(asg));
    }

    // Greedy sign/coordinate ascent from a couple of seeds: try every
    // (coordinate, sign) change per node, keep exact improvements.
    bool small = !enumerated && nodes.size() <= 20 && dim <= 8;
    if (small) {
        for (Assignment& asg : pool) {
            Candidate cur = scorer.score(
                assignment_coeffs(tree_m, n, dim, nodes, asg, flat, cfg.level_cap), "ascent");
            bool improved = true;
            int rounds = 0;
            while (improved && rounds < 2) {
                improved = false;
                ++rounds;
                for (std::size_t i = 0; i < nodes.size(); ++i) {
                    auto keep = asg[i];
                    for (int digit = 0; digit < 2 * dim; ++digit) {
                        std::pair<int, int> trial{digit / 2, digit % 2 == 0 ? 1 : -1};
                        if (trial == keep) continue;
                        asg[i] = trial;
                        Candidate c = scorer.score(
                            assignment_coeffs(tree_m, n, dim, nodes, asg, flat, cfg.level_cap),
                            "ascent");
                        bool better = best.by_float ? (cur.float_ratio < c.float_ratio)
                                                    : (!c.ratio.den_sq.is_zero() &&
                                                       cur.ratio.less_than(c.ratio));
                        if (better) {
                            cur = c;
                            keep = trial;
                            improved = true;
                        } else {
                            asg[i] = keep;
                        }
                    }
                }
            }
            best.offer(cur);
        }
    }

    // Level-scale grid ascent on the incumbent (exact, sqrt2-power grid).
    if (best.have && best.cand.haar && small) {
        const HaarCoefficients& base = *best.cand.haar;
        std::vector<int> expo(n + 1, 0);
        auto scaled_coeffs = [&]() {
            HaarCoefficients c = base;
            for (const auto& idx : base.indices()) {
                auto x = base.at(idx);
                QuadRational s = QuadRational::pow2_half(expo[idx.k]);
                for (auto& v : x) v = s * v;
                c.set(idx, std::move(x));
            }
            return c;
        };
        bool improved = true;
        int rounds = 0;
        while (improved && rounds < 3) {
            improved = false;
            ++rounds;
            for (int k = tree_m == 0 ? 0 : 1; k <= n; ++k) {
                int keep = expo[k];
                for (int e = -4; e <= 4; ++e) {
                    if (e == keep) continue;
                    expo[k] = e;
                    Candidate c = scorer.score(scaled_coeffs(), "scale-ascent");
                    bool better = best.by_float
                                      ? (best.cand.float_ratio < c.float_ratio)
                                      : (!c.ratio.den_sq.is_zero() &&
                                         best.cand.ratio.less_than(c.ratio));
                    if (better) {
                        best.offer(c);
                        keep = e;
                        improved = true;
                    }
                }
                expo[k] = keep;
            }
        }
    }

    // A handful of dense random rational witnesses (helps non-l1 sources).
    Rng dense_rng(cfg.seed ^ 0xda942042e4dd58b5ULL);
    int dense = static_cast<int>(
        std::max<long>(2, std::min<long>(std::min(cfg.random_candidates / 2, 16),
                                         2048 / (work + 1))));
    for (int r = 0; r < dense; ++r) {
        HaarCoefficients c = HaarCoefficients::zero(tree_m, n, dim, cfg.level_cap);
        for (const auto& idx : c.indices()) {
            std::vector<QuadRational> x(dim);
            for (int i = 0; i < dim; ++i) {
                long num = dense_rng.below(7) - 3;
                long den = 1L << dense_rng.below(3);
                x[i] = QuadRational(make_rational(num, den));
            }
            c.set(idx, std::move(x));
        }
        best.offer(scorer.score(std::move(c), "random-dense"));
    }
}

// ------------------------- Martingale-kind search --------------------------

MartingaleVariant variant_of(const EstimateKind& kind) {
    switch (kind.family) {
    case EstimateKind::Family::MartingaleType: return MartingaleVariant::Type;
    case EstimateKind::Family::MartingaleCotype: return MartingaleVariant::Cotype;
    case EstimateKind::Family::EqualNormType: return MartingaleVariant::EqualNorm;
    default: throw std::logic_error("not a martingale kind");
    }
}

Candidate score_mds(const OperatorSpec& T, MartingaleVariant variant, MDS m, const char* prov) {
    Candidate cand;
    cand.provenance = prov;
    cand.ratio = martingale_ratio_impl(T, m, variant);
    cand.mds = std::move(m);
    return cand;
}

// Best direct dyadic witness of length `len` (Haar instances via eq. 1).
void search_direct_mds(const OperatorSpec& T, MartingaleVariant variant, int len,
                       const SearchConfig& cfg, Best& best, const char* prov) {
    const int dim = T.source().dim;
    std::vector<TreeIndex> nodes = tree(1, len, cfg.level_cap);
    std::vector<QuadRational> flat = flat_scales(len);
    auto offer_assignment = [&](const Assignment& asg) {
        HaarCoefficients c = assignment_coeffs(1, len, dim, nodes, asg, flat, cfg.level_cap);
        best.offer(score_mds(T, variant, from_haar_coeffs(c, cfg.level_cap), prov));
    };
    long enum_cap = std::min<long>(cfg.enum_budget, 65536);
    long count = assignment_count(nodes.size(), dim, enum_cap);
    if (T.source().norm.tag() == NormKind::Tag::L1 && count <= enum_cap) {
        for (long code = 0; code < count; ++code)
            offer_assignment(decode_assignment(code, nodes.size(), dim));
    } else {
        long work = static_cast<long>(nodes.size()) * dim;
        Rng rng(cfg.seed ^ (0xa5a5a5a5a5a5a5a5ULL + static_cast<std::uint64_t>(len)));
        int restarts = static_cast<int>(std::max<long>(
            4, std::min<long>(cfg.random_candidates, 4096 / (work + 1))));
        for (int r = 0; r < restarts; ++r)
            offer_assignment(random_assignment(rng, nodes.size(), dim));
    }
    // The level-indexed diagonal family is equal-norm too.
    if (dim >= len) {
        std::vector<Rational> ones(dim, Rational(1));
        HaarCoefficients c = diagonal_type_witness(ones, len, Rational(2), cfg.level_cap);
        best.offer(score_mds(T, variant, from_haar_coeffs(c, cfg.level_cap), prov));
    }
}

void search_martingale_kind(const OperatorSpec& T, const EstimateKind& kind, int n,
                            const SearchConfig& cfg, Best& best) {
    MartingaleVariant variant = variant_of(kind);
    const int direct_limit = std::min(8, cfg.level_cap);

    if (n <= direct_limit) search_direct_mds(T, variant, n, cfg, best, "direct-dyadic");

    // Glueing transports a length-len witness to length n with the same ratio.
    for (int len = 1; len <= direct_limit && len < n; ++len) {
        if (n % len != 0) continue;
        Best base;
        base.by_float = false;
        search_direct_mds(T, variant, len, cfg, base, "glued-dyadic");
        if (base.have && base.cand.mds)
            best.offer(score_mds(T, variant, glue(*base.cand.mds, n / len), "glued-dyadic"));
    }

    // Blocking reaches lengths one above a glue-reachable one. Only worth the
    // cost when glueing alone degenerates to the length-1 base, i.e. when n
    // has no divisor in [2, direct_limit].
    bool glue_poor = true;
    for (int len = 2; len <= direct_limit; ++len)
        if (n % len == 0) glue_poor = false;
    if (n > direct_limit + 1 && glue_poor) {
        bool reachable = false;
        for (int len = 1; len <= direct_limit; ++len)
            if ((n - 1) % len == 0) reachable = true;
        if (reachable) {
            Best base;
            base.by_float = false;
            // Equal-norm witnesses survive equalize with an unchanged ratio.
            for (int len = 1; len <= direct_limit && len <= n - 1; ++len) {
                if ((n - 1) % len != 0) continue;
                Best sub;
                sub.by_float = false;
                search_direct_mds(T, MartingaleVariant::EqualNorm, len, cfg, sub, "equalized");
                if (sub.have && sub.cand.mds) {
                    MDS w = (n - 1) / len == 1 ? *sub.cand.mds
                                               : glue(*sub.cand.mds, (n - 1) / len);
                    base.offer(score_mds(T, MartingaleVariant::EqualNorm, std::move(w),
                                         "equalized"));
                }
            }
            if (base.have && base.cand.mds)
                best.offer(score_mds(T, variant,
                                     equalize(*base.cand.mds, T.source().norm), "equalized"));
        }
    }
}

// ------------------------------ Upper caps ---------------------------------

struct Cap {
    QuadRational value_sq;
    std::string provenance;
};

void push_cap(std::vector<Cap>& caps, QuadRational v, std::string prov) {
    caps.push_back(Cap{std::move(v), std::move(prov)});
}

QuadRational rat(long v) { return QuadRational(Rational(v)); }

std::vector<Cap> upper_caps(const OperatorSpec& T, const EstimateKind& kind, int n) {
    std::vector<Cap> caps;
    QuadRational opn = operator_norm(T).upper_sq;
    std::optional<QuadRational> opn_adj;
    try {
        opn_adj = operator_norm(adjoint(T)).upper_sq;
    } catch (const std::domain_error&) {
    }

    auto levels = [&](int m) { return m == 0 ? n + 1 : n - m + 1; };

    switch (kind.family) {
    case EstimateKind::Family::HaarType: {
        int L = levels(kind.tree_m);
        push_cap(caps, rat(L) * opn, "sqrt(levels)*opnorm");
        if (opn_adj) {
            // tau(T|H) <= 2 gamma(T'|H) (factor 1 at m = 0), gamma(T'|H) <= sqrt(L)||T'||.
            QuadRational f = kind.tree_m == 0 ? rat(1) : rat(4);
            push_cap(caps, f * rat(L) * *opn_adj, "duality+sqrt(levels)*adjoint-opnorm");
        }
        if (kind.tree_m == 0)
            push_cap(caps, rat(4) * rat(n) * opn, "2*sandwich+sqrt(n)*opnorm");
        break;
    }
    case EstimateKind::Family::HaarCotype: {
        int L = levels(kind.tree_m);
        if (opn_adj)
            push_cap(caps, rat(L) * *opn_adj, "duality+sqrt(levels)*adjoint-opnorm");
        // gamma(H(D_1^n)) <= gamma(M_n) <= 2 sqrt(n) ||T||; x3 sandwich at m = 0.
        QuadRational f = kind.tree_m == 0 ? rat(9) : rat(1);
        push_cap(caps, f * rat(4) * rat(n) * opn, "sandwich+2*sqrt(n)*opnorm");
        break;
    }
    case EstimateKind::Family::MartingaleType:
        push_cap(caps, rat(n) * opn, "sqrt(n)*opnorm");
        push_cap(caps, rat(256) * rat(n) * opn, "16*equal-norm-cap");
        if (opn_adj) push_cap(caps, rat(4) * rat(n) * *opn_adj, "2*duality*adjoint");
        break;
    case EstimateKind::Family::MartingaleCotype:
        push_cap(caps, rat(4) * rat(n) * opn, "2*sqrt(n)*opnorm");
        if (opn_adj) push_cap(caps, rat(4) * rat(n) * *opn_adj, "2*duality*adjoint");
        break;
    case EstimateKind::Family::EqualNormType:
        push_cap(caps, rat(n) * opn, "sqrt(n)*opnorm");
        break;
    case EstimateKind::Family::TypeP:
        // n^{1/p'} <= sqrt(n) for p <= 2, so the ring cap n ||T||^2 is valid.
        push_cap(caps, rat(n) * opn, "n^(1/p')*opnorm<=sqrt(n)*opnorm");
        break;
    }
    return caps;
}

} // namespace

IdealNormEstimate estimate(const OperatorSpec& T, const EstimateKind& kind, int n,
                           const SearchConfig& cfg) {
    if (n < 1) throw std::invalid_argument("estimate needs n >= 1");
    if (n > cfg.level_cap && kind.is_haar())
        throw LevelCapError("tree level " + std::to_string(n) + " exceeds cap " +
                            std::to_string(cfg.level_cap));

    IdealNormEstimate est;
    est.kind = kind;
    est.n = n;
    est.seed = cfg.seed;
    est.budget = cfg.enum_budget;

    std::vector<Cap> caps = upper_caps(T, kind, n);
    if (caps.empty()) throw std::logic_error("no upper caps");
    std::size_t best_cap = 0;
    for (std::size_t i = 1; i < caps.size(); ++i)
        if (caps[i].value_sq < caps[best_cap].value_sq) best_cap = i;
    est.upper_sq = caps[best_cap].value_sq;
    est.upper_provenance = caps[best_cap].provenance;
    est.upper = std::sqrt(est.upper_sq.to_double());

    Best best;
    if (kind.is_haar() || kind.family == EstimateKind::Family::TypeP)
        search_haar_kind(T, kind, n, cfg, best);
    else
        search_martingale_kind(T, kind, n, cfg, best);

    if (best.have) {
        est.lower_provenance = best.cand.provenance;
        est.haar_witness = std::move(best.cand.haar);
        est.mds_witness = std::move(best.cand.mds);
        if (best.by_float) {
            est.lower = best.cand.float_ratio;
        } else {
            est.lower_sq = best.cand.ratio.value_sq();
            est.lower = std::sqrt(est.lower_sq.to_double());
            if (kind.family == EstimateKind::Family::TypeP)
                est.lower = best.cand.float_ratio;
        }
    }

    if (!(kind.family == EstimateKind::Family::TypeP && kind.p != Rational(2)) &&
        est.upper_sq < est.lower_sq)
        throw std::logic_error("estimator soundness violated: lower exceeds upper");
    if (kind.is_martingale())
        est.note = "lower bound searched over glued/blocked dyadic filtrations; "
                   "the defining supremum ranges over all filtrations";
    return est;
}

RatioSq reevaluate(const OperatorSpec& T, const IdealNormEstimate& est) {
    switch (est.kind.family) {
    case EstimateKind::Family::HaarType:
        return haar_ratio(T, *est.haar_witness, Direction::Type);
    case EstimateKind::Family::HaarCotype:
        return haar_ratio(T, *est.haar_witness, Direction::Cotype);
    case EstimateKind::Family::TypeP:
        if (est.kind.p == Rational(2)) return haar_ratio(T, *est.haar_witness, Direction::Type);
        throw std::domain_error("type-p witnesses at p != 2 re-evaluate in floating point");
    case EstimateKind::Family::MartingaleType:
        return martingale_ratio(T, *est.mds_witness, MartingaleVariant::Type);
    case EstimateKind::Family::MartingaleCotype:
        return martingale_ratio(T, *est.mds_witness, MartingaleVariant::Cotype);
    case EstimateKind::Family::EqualNormType:
        return martingale_ratio(T, *est.mds_witness, MartingaleVariant::EqualNorm);
    }
    throw std::logic_error("unreachable");
}

double reevaluate_float(const OperatorSpec& T, const IdealNormEstimate& est) {
    if (est.kind.family != EstimateKind::Family::TypeP)
        return std::sqrt(reevaluate(T, est).value_sq().to_double());
    return type_p_ratio(T, *est.haar_witness, est.kind.p);
}

bool RelationReport::ok() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

RelationReport verify_relations(const OperatorSpec& T, int n, const SearchConfig& cfg) {
    if (n < 1) throw std::invalid_argument("verify needs n >= 1");
    RelationReport report;
    report.n = n;

    std::optional<OperatorSpec> adj;
    try {
        adj = adjoint(T);
    } catch (const std::domain_error&) {
    }

    std::map<std::string, IdealNormEstimate> cache;
    auto get = [&](const OperatorSpec& op, const char* tag, const EstimateKind& kind,
                   int idx) -> const IdealNormEstimate& {
        std::string key = std::string(tag) + "/" + kind.name() + "/" +
                          std::to_string(kind.tree_m) + "/" + std::to_string(idx);
        auto it = cache.find(key);
        if (it == cache.end())
            it = cache.emplace(key, estimate(op, kind, idx, cfg)).first;
        return it->second;
    };

    auto check = [&](std::string name, const QuadRational& lhs_sq, QuadRational rhs_sq) {
        bool pass = lhs_sq <= rhs_sq;
        report.checks.push_back(RelationCheck{std::move(name), lhs_sq, std::move(rhs_sq), pass});
    };

    const auto& tH1 = get(T, "T", EstimateKind::haar_type(1), n);
    const auto& tH0 = get(T, "T", EstimateKind::haar_type(0), n);
    const auto& gH1 = get(T, "T", EstimateKind::haar_cotype(1), n);
    const auto& gH0 = get(T, "T", EstimateKind::haar_cotype(0), n);
    const auto& tM = get(T, "T", EstimateKind::mtype(), n);
    const auto& gM = get(T, "T", EstimateKind::mcotype(), n);
    const auto& eq_n = get(T, "T", EstimateKind::eq_mtype(), n);
    const auto& eq_n1 = get(T, "T", EstimateKind::eq_mtype(), n + 1);

    // eq. 1: Haar instances are martingale instances.
    check("eq1: tau_H(D1) <= tau_M", tH1.lower_sq, tM.upper_sq);
    check("eq1: gamma_H(D1) <= gamma_M", gH1.lower_sq, gM.upper_sq);

    // Sandwich between D_1^n and D_0^n.
    check("sandwich: tau_H(D1) <= tau_H(D0)", tH1.lower_sq, tH0.upper_sq);
    check("sandwich: tau_H(D0) <= 2 tau_H(D1)", tH0.lower_sq, rat(4) * tH1.upper_sq);
    check("sandwich: gamma_H(D1) <= gamma_H(D0)", gH1.lower_sq, gH0.upper_sq);
    check("sandwich: gamma_H(D0) <= 3 gamma_H(D1)", gH0.lower_sq, rat(9) * gH1.upper_sq);

    // Two-variable bound: tau_M(2^n)/2^{n/2} <= 3 gamma_H(D0^n)/sqrt(n).
    // The martingale index 2^n keeps this affordable only at small n.
    if (n <= 6) {
        const auto& tM2n = get(T, "T", EstimateKind::mtype(), 1 << n);
        check("two-variable: sqrt(n) tau_M(2^n) <= 3 2^{n/2} gamma_H(D0)",
              rat(n) * tM2n.lower_sq, rat(9) * rat(1L << n) * gH0.upper_sq);
    }

    // Duality transfers.
    if (adj) {
        const auto& tH1a = get(*adj, "T'", EstimateKind::haar_type(1), n);
        const auto& tH0a = get(*adj, "T'", EstimateKind::haar_type(0), n);
        const auto& gH1a = get(*adj, "T'", EstimateKind::haar_cotype(1), n);
        const auto& gH0a = get(*adj, "T'", EstimateKind::haar_cotype(0), n);
        const auto& tMa = get(*adj, "T'", EstimateKind::mtype(), n);
        const auto& gMa = get(*adj, "T'", EstimateKind::mcotype(), n);

        check("duality m=0: gamma(T) <= tau(T')", gH0.lower_sq, tH0a.upper_sq);
        check("duality m=0: tau(T') <= gamma(T)", tH0a.lower_sq, gH0.upper_sq);
        check("duality m=0: gamma(T') <= tau(T)", gH0a.lower_sq, tH0.upper_sq);
        check("duality m=0: tau(T) <= gamma(T')", tH0.lower_sq, gH0a.upper_sq);

        check("duality m=1: gamma(T) <= tau(T')", gH1.lower_sq, tH1a.upper_sq);
        check("duality m=1: tau(T') <= 2 gamma(T)", tH1a.lower_sq, rat(4) * gH1.upper_sq);
        check("duality m=1: gamma(T') <= tau(T)", gH1a.lower_sq, tH1.upper_sq);
        check("duality m=1: tau(T) <= 2 gamma(T')", tH1.lower_sq, rat(4) * gH1a.upper_sq);

        check("duality M: gamma(T) <= 2 tau(T')", gM.lower_sq, rat(4) * tMa.upper_sq);
        check("duality M: tau(T') <= 2 gamma(T)", tMa.lower_sq, rat(4) * gM.upper_sq);
        check("duality M: gamma(T') <= 2 tau(T)", gMa.lower_sq, rat(4) * tM.upper_sq);
        check("duality M: tau(T) <= 2 gamma(T')", tM.lower_sq, rat(4) * gMa.upper_sq);
    }

    // Equal-norm: monotone in n, and within a factor 16 of the full norm.
    check("equal-norm monotone: tau0(n) <= tau0(n+1)", eq_n.lower_sq, eq_n1.upper_sq);
    check("equal-norm: tau_M <= 16 tau0", tM.lower_sq, rat(256) * eq_n.upper_sq);

    return report;
}

Lemma32Result lemma32_brute_force(const OperatorSpec& T, int n, long budget, int level_cap) {
    const int dim = T.source().dim;
    std::vector<TreeIndex> nodes = tree(1, n, level_cap);
    long count = assignment_count(nodes.size(), dim, budget);
    if (count > budget)
        throw std::invalid_argument("instance set exceeds the enumeration budget");

    std::vector<QuadRational> flat = flat_scales(n);
    std::vector<QuadRational> unit(n + 1, QuadRational(1));

    Lemma32Result result;
    result.best_equal_norm = RatioSq{QuadRational(0), QuadRational(0)};
    result.best_sup = RatioSq{QuadRational(0), QuadRational(0)};

    for (long code = 0; code < count; ++code) {
        Assignment asg = decode_assignment(code, nodes.size(), dim);
        MDS eq = from_haar_coeffs(assignment_coeffs(1, n, dim, nodes, asg, flat, level_cap),
                                  level_cap);
        RatioSq r_eq = martingale_ratio_impl(T, eq, MartingaleVariant::EqualNorm);
        RatioSq r_sup_eq = martingale_ratio_impl(T, eq, MartingaleVariant::EqualNormSup);
        if (result.best_equal_norm.less_than(r_eq)) result.best_equal_norm = r_eq;
        if (result.best_sup.less_than(r_sup_eq)) result.best_sup = r_sup_eq;

        MDS raw = from_haar_coeffs(assignment_coeffs(1, n, dim, nodes, asg, unit, level_cap),
                                   level_cap);
        RatioSq r_sup = martingale_ratio_impl(T, raw, MartingaleVariant::EqualNormSup);
        if (result.best_sup.less_than(r_sup)) result.best_sup = r_sup;
        result.instances += 2;
    }

    result.agree = !result.best_equal_norm.less_than(result.best_sup) &&
                   !result.best_sup.less_than(result.best_equal_norm);
    return result;
}

} // namespace mtype

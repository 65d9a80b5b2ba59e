#include "mtype_lab/quad_rational.hpp"

#include <cmath>
#include <stdexcept>

namespace mtype {

QuadRational QuadRational::pow2_half(long e) {
    // e = 2q   -> 2^q
    // e = 2q+1 -> 2^q * sqrt2
    long q = (e >= 0) ? e / 2 : -((-e + 1) / 2);
    bool odd = (e % 2) != 0;
    Rational p = pow2(q);
    return odd ? QuadRational(Rational(0), p) : QuadRational(p);
}

int QuadRational::sign() const {
    int sa = sgn(a_.get_num());
    int sb = sgn(b_.get_num());
    if (sb == 0) return sa;
    if (sa == 0) return sb;
    if (sa == sb) return sa;
    // Opposite signs: compare |a| with |b|*sqrt2, i.e. a^2 with 2 b^2.
    Rational a2 = a_ * a_;
    Rational b2 = 2 * b_ * b_;
    int c = cmp(a2, b2);
    if (c == 0) return 0; // cannot happen for nonzero b: sqrt2 is irrational
    return c > 0 ? sa : sb;
}

QuadRational QuadRational::inverse() const {
    // 1/(a + b sqrt2) = (a - b sqrt2) / (a^2 - 2 b^2)
    Rational norm = a_ * a_ - 2 * b_ * b_;
    if (sgn(norm.get_num()) == 0) throw std::domain_error("QuadRational: division by zero");
    return QuadRational(a_ / norm, -b_ / norm);
}

double QuadRational::to_double() const {
    return a_.get_d() + b_.get_d() * std::sqrt(2.0);
}

std::string QuadRational::to_string() const {
    if (is_rational()) return mtype::to_string(a_);
    std::string s;
    bool have_a = sgn(a_.get_num()) != 0;
    if (have_a) s += mtype::to_string(a_);
    if (sgn(b_.get_num()) > 0 && have_a) s += "+";
    s += mtype::to_string(b_);
    s += "*sqrt2";
    return s;
}

} // namespace mtype

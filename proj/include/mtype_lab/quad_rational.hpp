#pragma once

#include "mtype_lab/rational.hpp"

#include <string>

namespace mtype {

/// Element a + b*sqrt(2) of the field Q(sqrt 2).
///
/// Every scalar produced by the Haar/martingale constructions lives here:
/// the Haar normalizations 2^{(k-1)/2} alternate between rationals and
/// rational multiples of sqrt 2, and the field is closed under all four
/// arithmetic operations. Comparisons are exact (sign analysis of a, b and
/// a^2 vs 2 b^2); square roots never happen inside the ring, only on the
/// way out to doubles for display.
class QuadRational {
public:
    QuadRational() : a_(0), b_(0) {}
    QuadRational(long n) : a_(n), b_(0) {}
    QuadRational(const Rational& a) : a_(a), b_(0) {}
    QuadRational(Rational a, Rational b) : a_(std::move(a)), b_(std::move(b)) {}

    static QuadRational sqrt2() { return QuadRational(Rational(0), Rational(1)); }

    /// 2^{e/2} for any integer e: even e gives a rational, odd e a multiple of sqrt 2.
    static QuadRational pow2_half(long e);

    const Rational& rational_part() const { return a_; }
    const Rational& sqrt2_part() const { return b_; }

    bool is_rational() const { return sgn(b_.get_num()) == 0; }
    bool is_zero() const { return sgn(a_.get_num()) == 0 && sgn(b_.get_num()) == 0; }

    /// Exact sign of a + b*sqrt(2).
    int sign() const;

    QuadRational abs() const { return sign() < 0 ? -*this : *this; }
    QuadRational conjugate() const { return QuadRational(a_, -b_); }

    QuadRational operator-() const { return QuadRational(-a_, -b_); }
    QuadRational operator+(const QuadRational& o) const { return QuadRational(a_ + o.a_, b_ + o.b_); }
    QuadRational operator-(const QuadRational& o) const { return QuadRational(a_ - o.a_, b_ - o.b_); }
    QuadRational operator*(const QuadRational& o) const {
        return QuadRational(a_ * o.a_ + 2 * b_ * o.b_, a_ * o.b_ + b_ * o.a_);
    }
    QuadRational operator/(const QuadRational& o) const { return *this * o.inverse(); }

    QuadRational& operator+=(const QuadRational& o) { a_ += o.a_; b_ += o.b_; return *this; }
    QuadRational& operator-=(const QuadRational& o) { a_ -= o.a_; b_ -= o.b_; return *this; }
    QuadRational& operator*=(const QuadRational& o) { *this = *this * o; return *this; }
    QuadRational& operator/=(const QuadRational& o) { *this = *this / o; return *this; }

    /// Throws std::domain_error on zero.
    QuadRational inverse() const;

    bool operator==(const QuadRational& o) const { return a_ == o.a_ && b_ == o.b_; }
    bool operator!=(const QuadRational& o) const { return !(*this == o); }
    bool operator<(const QuadRational& o) const { return (*this - o).sign() < 0; }
    bool operator<=(const QuadRational& o) const { return (*this - o).sign() <= 0; }
    bool operator>(const QuadRational& o) const { return (*this - o).sign() > 0; }
    bool operator>=(const QuadRational& o) const { return (*this - o).sign() >= 0; }

    double to_double() const;

    /// "a", "b*sqrt2" or "a+b*sqrt2"; comma-free so it can sit in a CSV cell.
    std::string to_string() const;

private:
    Rational a_, b_;
};

inline QuadRational operator*(const Rational& r, const QuadRational& q) {
    return QuadRational(r) * q;
}

/// max of the two, exact.
inline const QuadRational& max(const QuadRational& x, const QuadRational& y) {
    return x < y ? y : x;
}

} // namespace mtype

#include "mtype_lab/rational.hpp"

#include "mtype_lab/errors.hpp"

#include <cctype>
#include <stdexcept>

namespace mtype {

Rational make_rational(long num, long den) {
    if (den == 0) throw std::domain_error("rational with zero denominator");
    Rational r(num, den);
    r.canonicalize();
    return r;
}

namespace {

bool is_integer_literal(const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

} // namespace

Rational parse_rational(const std::string& text) {
    if (text.empty()) throw ParseError("empty rational literal");
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        std::string num = text.substr(0, slash);
        std::string den = text.substr(slash + 1);
        if (!is_integer_literal(num) || !is_integer_literal(den))
            throw ParseError("bad rational literal: " + text);
        Rational r;
        if (mpq_set_str(r.get_mpq_t(), text.c_str(), 10) != 0)
            throw ParseError("bad rational literal: " + text);
        if (sgn(r.get_den()) == 0) throw ParseError("zero denominator: " + text);
        r.canonicalize();
        return r;
    }
    auto dot = text.find('.');
    if (dot != std::string::npos) {
        std::string head = text.substr(0, dot);
        std::string tail = text.substr(dot + 1);
        if (head.empty() || head == "-" || head == "+") head += "0";
        if (!is_integer_literal(head)) throw ParseError("bad rational literal: " + text);
        for (char c : tail)
            if (!std::isdigit(static_cast<unsigned char>(c)))
                throw ParseError("bad rational literal: " + text);
        Rational r(head);
        if (!tail.empty()) {
            mpz_class digits(tail);
            mpz_class den;
            mpz_ui_pow_ui(den.get_mpz_t(), 10, tail.size());
            Rational frac(digits, den);
            frac.canonicalize();
            bool negative = !head.empty() && head[0] == '-';
            r += negative ? Rational(-frac) : frac;
        }
        return r;
    }
    if (!is_integer_literal(text)) throw ParseError("bad rational literal: " + text);
    return Rational(text);
}

std::string to_string(const Rational& r) {
    return r.get_str();
}

double to_double(const Rational& r) {
    return r.get_d();
}

int sign(const Rational& r) {
    return sgn(r);
}

Rational abs(const Rational& r) {
    return sgn(r) < 0 ? Rational(-r) : r;
}

Rational pow2(long e) {
    Rational r(1);
    if (e >= 0)
        mpq_mul_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<unsigned long>(e));
    else
        mpq_div_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<unsigned long>(-e));
    return r;
}

Rational pow_int(const Rational& r, unsigned long e) {
    Rational acc(1), base(r);
    while (e > 0) {
        if (e & 1) acc *= base;
        base *= base;
        e >>= 1;
    }
    return acc;
}

} // namespace mtype

#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

#include "semistable/errors.hpp"

namespace semistable {

// Exact arithmetic everywhere; no floating point in the library.
using Int = mpz_class;
using Rat = mpq_class;

inline Int int_gcd(const Int& a, const Int& b) {
    Int r;
    mpz_gcd(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

inline Int int_lcm(const Int& a, const Int& b) {
    Int r;
    mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

// Floor division (rounds toward negative infinity), exact.
inline Int int_fdiv(const Int& a, const Int& b) {
    Int q;
    mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

inline Rat make_rat(const Int& num, const Int& den) {
    if (den == 0) throw Error("rational with zero denominator");
    Rat q(num, den);
    q.canonicalize();
    return q;
}

inline Int rat_floor(const Rat& q) { return int_fdiv(q.get_num(), q.get_den()); }

inline Int rat_ceil(const Rat& q) {
    Int c;
    mpz_cdiv_q(c.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
    return c;
}

inline std::string int_to_string(const Int& v) { return v.get_str(); }

// Canonical text form: "p" when the denominator is 1, "p/q" otherwise.
inline std::string rat_to_string(const Rat& v) {
    if (v.get_den() == 1) return v.get_num().get_str();
    return v.get_num().get_str() + "/" + v.get_den().get_str();
}

Int parse_int(const std::string& text);
Rat parse_rat(const std::string& text);

}  // namespace semistable

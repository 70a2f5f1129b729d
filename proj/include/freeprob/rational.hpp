#pragma once

// Exact rational scalars. All symbolic computation in this library runs over
// GMP rationals; doubles appear only in the spectral layer.

#include <gmpxx.h>

#include <stdexcept>
#include <string>

namespace freeprob {

using Rational = mpq_class;

inline Rational rat(long p, long q = 1) {
    if (q == 0) throw std::invalid_argument("rational with zero denominator");
    Rational r(p, q);
    r.canonicalize();
    return r;
}

// Accepts "p", "-p", "p/q". Throws on malformed input or zero denominator.
inline Rational parse_rational(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty rational literal");
    Rational r;
    if (r.set_str(s, 10) != 0)
        throw std::invalid_argument("malformed rational literal: '" + s + "'");
    if (r.get_den() == 0)
        throw std::invalid_argument("zero denominator in rational literal: '" + s + "'");
    r.canonicalize();
    return r;
}

inline std::string to_string(const Rational& r) { return r.get_str(); }

inline double to_double(const Rational& r) { return r.get_d(); }

inline bool is_zero(const Rational& r) { return sgn(r) == 0; }

}  // namespace freeprob

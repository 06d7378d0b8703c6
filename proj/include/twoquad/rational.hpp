#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

#include "twoquad/errors.hpp"

namespace twoquad {

using Int = mpz_class;
using Rat = mpq_class;
using RatVec = std::vector<Rat>;
using IntVec = std::vector<Int>;

inline Rat make_rat(long num, long den = 1) {
    Rat r(num, den);
    r.canonicalize();
    return r;
}

inline Rat make_rat(const Int& num, const Int& den) {
    if (den == 0) {
        throw PreconditionViolation("zero denominator");
    }
    Rat r(num, den);
    r.canonicalize();
    return r;
}

inline std::string to_string(const Rat& r) { return r.get_str(); }

/// Parses "p" or "p/q" with an optional leading sign. Returns false on malformed text.
inline bool try_parse_rat(std::string_view text, Rat& out) {
    if (text.empty()) {
        return false;
    }
    std::size_t slash = text.find('/');
    auto valid_int = [](std::string_view s, bool allow_sign) {
        if (s.empty()) {
            return false;
        }
        std::size_t i = 0;
        if (allow_sign && (s[0] == '-' || s[0] == '+')) {
            i = 1;
        }
        if (i == s.size()) {
            return false;
        }
        for (; i < s.size(); ++i) {
            if (s[i] < '0' || s[i] > '9') {
                return false;
            }
        }
        return true;
    };
    std::string_view num = text.substr(0, slash);
    std::string_view den = slash == std::string_view::npos ? std::string_view{} : text.substr(slash + 1);
    if (!valid_int(num, true) || (slash != std::string_view::npos && !valid_int(den, false))) {
        return false;
    }
    std::string num_s(num.front() == '+' ? num.substr(1) : num);
    Int n(num_s, 10);
    Int d(1);
    if (slash != std::string_view::npos) {
        d = Int(std::string(den), 10);
        if (d == 0) {
            return false;
        }
    }
    out = Rat(n, d);
    out.canonicalize();
    return true;
}

inline Rat parse_rat(std::string_view text) {
    Rat r;
    if (!try_parse_rat(text, r)) {
        throw ParseError("malformed rational '" + std::string(text) + "'", 1, 1);
    }
    return r;
}

/// Bit size of numerator plus denominator.
inline std::size_t bit_size(const Rat& r) {
    std::size_t a = r.get_num() == 0 ? 1 : mpz_sizeinbase(r.get_num_mpz_t(), 2);
    return a + mpz_sizeinbase(r.get_den_mpz_t(), 2);
}

inline std::size_t bit_size(const Int& z) { return z == 0 ? 1 : mpz_sizeinbase(z.get_mpz_t(), 2); }

inline Int lcm_of_denominators(const RatVec& v) {
    Int l = 1;
    for (const Rat& x : v) {
        mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
    }
    return l;
}

/// Scales v to a primitive integer vector (gcd 1). The direction and sign are kept.
inline IntVec primitive_integer(const RatVec& v) {
    Int l = lcm_of_denominators(v);
    IntVec out(v.size());
    Int g = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = v[i].get_num() * (l / v[i].get_den());
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), out[i].get_mpz_t());
    }
    if (g > 1) {
        for (Int& x : out) {
            x /= g;
        }
    }
    return out;
}

inline IntVec primitive_integer(const IntVec& v) {
    Int g = 0;
    for (const Int& x : v) {
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_mpz_t());
    }
    IntVec out = v;
    if (g > 1) {
        for (Int& x : out) {
            x /= g;
        }
    }
    return out;
}

inline RatVec to_rat(const IntVec& v) { return RatVec(v.begin(), v.end()); }

/// Primitive integer vector with first nonzero coordinate positive.
inline RatVec content_normalized(const RatVec& v) {
    IntVec w = primitive_integer(v);
    auto it = std::find_if(w.begin(), w.end(), [](const Int& x) { return x != 0; });
    if (it != w.end() && *it < 0) {
        for (Int& x : w) {
            x = -x;
        }
    }
    return to_rat(w);
}

inline bool is_zero_vector(const RatVec& v) {
    return std::all_of(v.begin(), v.end(), [](const Rat& x) { return sgn(x) == 0; });
}

inline Int floor_rat(const Rat& r) {
    Int q;
    mpz_fdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
    return q;
}

/// Nearest integer, ties rounded toward +infinity.
inline Int round_rat(const Rat& r) { return floor_rat(r + Rat(1, 2)); }

inline Rat abs_rat(const Rat& r) { return sgn(r) < 0 ? Rat(-r) : r; }

}  // namespace twoquad

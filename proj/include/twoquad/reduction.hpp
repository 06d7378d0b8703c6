#pragma once

#include <functional>
#include <string>
#include <vector>

#include "twoquad/ball_linalg.hpp"
#include "twoquad/inertia.hpp"
#include "twoquad/lll.hpp"

namespace twoquad {

namespace field {

enum class Zeroness { zero, nonzero, unknown };

inline Zeroness classify(const Rat& x) { return sgn(x) == 0 ? Zeroness::zero : Zeroness::nonzero; }
inline Zeroness classify(const RealBall& x) {
    if (x.exact_zero()) {
        return Zeroness::zero;
    }
    return x.certainly_nonzero() ? Zeroness::nonzero : Zeroness::unknown;
}

inline bool may_be_zero(const Rat& x) { return sgn(x) == 0; }
inline bool may_be_zero(const RealBall& x) { return x.contains(0); }

template <class T>
void require_nonzero(const T& x, const std::string& what) {
    switch (classify(x)) {
    case Zeroness::nonzero:
        return;
    case Zeroness::zero:
        throw PreconditionViolation(what + " is zero");
    case Zeroness::unknown:
        throw InsufficientPrecision(what + " is not certified nonzero");
    }
}

template <class T>
void require_zero(const T& x, const std::string& what) {
    if (!may_be_zero(x)) {
        throw PreconditionViolation(what + " is not zero");
    }
}

/// Replaces an entry that is known to equal v by construction with the exact value.
inline void settle(Rat& x, long v, const char* what) {
    if (x != v) {
        throw InternalError(std::string(what) + ": expected " + std::to_string(v) + ", got " + to_string(x));
    }
}
inline void settle(RealBall& x, long v, const char* what) {
    if (!x.contains(Rat(v))) {
        throw InternalError(std::string(what) + ": enclosure " + x.str() + " misses " + std::to_string(v));
    }
    x = RealBall(v);
}

template <class T>
void settle_sym(Matrix<T>& m, std::size_t i, std::size_t j, long v, const char* what) {
    settle(m(i, j), v, what);
    if (i != j) {
        settle(m(j, i), v, what);
    }
}

/// Smallest index >= from whose entry is certified nonzero. Entries that cannot be certified
/// either way are skipped; if nothing qualifies and some entry was uncertain, more precision helps.
template <class T>
std::optional<std::size_t> first_nonzero(const std::vector<T>& v, std::size_t from, bool& uncertain) {
    uncertain = false;
    for (std::size_t i = from; i < v.size(); ++i) {
        Zeroness z = classify(v[i]);
        if (z == Zeroness::nonzero) {
            return i;
        }
        uncertain = uncertain || z == Zeroness::unknown;
    }
    return std::nullopt;
}

}  // namespace field

namespace detail {

template <class T>
Matrix<T> identity_of(std::size_t n) {
    return identity_matrix<T>(n, T(1), T(0));
}

template <class T>
Matrix<T> base_witt_impl(const Matrix<T>& q, const std::vector<T>& y) {
    const std::size_t n = q.rows();
    if (y.size() != n) {
        throw DimensionMismatch("base_witt");
    }
    bool uncertain = false;
    auto pivot = field::first_nonzero(y, 0, uncertain);
    if (!pivot) {
        if (uncertain) {
            throw InsufficientPrecision("base_witt: no certified nonzero coordinate");
        }
        throw PreconditionViolation("base_witt: y = 0");
    }
    field::require_zero(bilinear(q, y, y), "base_witt: q(y)");
    Matrix<T> p(n, n, T(0));
    p.set_row(0, y);
    std::size_t r = 1;
    for (std::size_t j = 0; j < n; ++j) {
        if (j != *pivot) {
            p(r++, j) = T(1);
        }
    }
    Matrix<T> qp = congruence(p, q);
    field::settle(qp(0, 0), 0, "base_witt: q(y)");
    auto i = field::first_nonzero(qp.row(0), 1, uncertain);
    if (!i) {
        if (uncertain) {
            throw InsufficientPrecision("base_witt: no certified nonzero entry in the first row");
        }
        throw PreconditionViolation("base_witt: y lies in the radical; the form is degenerate");
    }
    p.swap_rows(1, *i);
    return p;
}

template <class T>
Matrix<T> clear_first_row_impl(const Matrix<T>& q) {
    const std::size_t n = q.rows();
    if (n < 2) {
        throw PreconditionViolation("clear_first_row: n < 2");
    }
    field::require_zero(q(0, 0), "clear_first_row: a11");
    field::require_nonzero(q(0, 1), "clear_first_row: a12");
    Matrix<T> p = identity_of<T>(n);
    p(0, 0) = T(1) / q(0, 1);
    Matrix<T> qp = congruence(p, q);
    Matrix<T> pp = identity_of<T>(n);
    for (std::size_t i = 2; i < n; ++i) {
        pp(i, 1) = -qp(i, 0);
    }
    return pp * p;
}

template <class T>
void require_canonical_first_row(const Matrix<T>& q, std::size_t one_at, const char* what) {
    for (std::size_t j = 0; j < q.rows(); ++j) {
        const bool ok = j == one_at ? (field::may_be_zero(q(0, j) - T(1))) : field::may_be_zero(q(0, j));
        if (!ok) {
            throw PreconditionViolation(std::string(what) + ": first row is not canonical");
        }
    }
}

template <class T>
Matrix<T> split_h_impl(const Matrix<T>& q) {
    const std::size_t n = q.rows();
    if (n < 2) {
        throw PreconditionViolation("split_h: n < 2");
    }
    require_canonical_first_row(q, 1, "split_h");
    Matrix<T> p = identity_of<T>(n);
    for (std::size_t i = 1; i < n; ++i) {
        p(i, 0) = -q(i, 1);
    }
    Matrix<T> q3 = congruence(p, q);
    Matrix<T> s = identity_of<T>(n);
    const T c = q3(1, 1);
    for (std::size_t i = 0; i < n; ++i) {
        s(1, i) = T(2) * s(1, i) - c * s(0, i);
    }
    s(0, 0) = T(1) / T(2);
    return s * p;
}

// Entry-exact H block on coordinates (k, k+1): zeros on the diagonal, 1 off it, zero elsewhere in those rows.
template <class T>
void settle_h_block(Matrix<T>& q, std::size_t k, const char* what) {
    for (std::size_t j = 0; j < q.rows(); ++j) {
        for (std::size_t i : {k, k + 1}) {
            long v = (i == k && j == k + 1) || (i == k + 1 && j == k) ? 1 : 0;
            field::settle_sym(q, i, j, v, what);
        }
    }
}

template <class T>
Matrix<T> reduce_qf_impl(const Matrix<T>& q, const std::vector<T>& y) {
    Matrix<T> p = base_witt_impl(q, y);
    Matrix<T> q1 = congruence(p, q);
    field::settle(q1(0, 0), 0, "reduce_qf");
    Matrix<T> p1 = clear_first_row_impl(q1);
    p = p1 * p;
    Matrix<T> q2 = congruence(p1, q1);
    field::settle_sym(q2, 0, 0, 0, "reduce_qf");
    field::settle_sym(q2, 0, 1, 1, "reduce_qf");
    for (std::size_t j = 2; j < q.rows(); ++j) {
        field::settle_sym(q2, 0, j, 0, "reduce_qf");
    }
    return split_h_impl(q2) * p;
}

template <class T>
Matrix<T> mordell3_impl(const Matrix<T>& q) {
    const std::size_t n = q.rows();
    if (n < 3) {
        throw PreconditionViolation("mordell3: n < 3");
    }
    field::require_zero(q(0, 0), "mordell3: a11");
    field::require_nonzero(q(0, 2), "mordell3: a13");
    Matrix<T> p = identity_of<T>(n);
    p(2, 2) = T(1) / q(0, 2);
    Matrix<T> qp = congruence(p, q);
    Matrix<T> pp = identity_of<T>(n);
    pp(1, 2) = -qp(0, 1);
    for (std::size_t i = 3; i < n; ++i) {
        pp(i, 2) = -qp(i, 0);
    }
    return pp * p;
}

template <class T>
Matrix<T> double_witt_impl(const Matrix<T>& q0, const Matrix<T>& q1, const std::vector<T>& z) {
    const std::size_t n = q0.rows();
    if (n < 3 || q1.rows() != n || z.size() != n) {
        throw PreconditionViolation("double_witt needs n >= 3 and matching sizes");
    }
    field::require_zero(bilinear(q1, z, z), "double_witt: q1(z)");
    Matrix<T> p = base_witt_impl(q0, z);
    Matrix<T> a0 = congruence(p, q0);
    field::settle(a0(0, 0), 0, "double_witt: q0(z)");
    Matrix<T> p1 = clear_first_row_impl(a0);
    p = p1 * p;
    Matrix<T> b = congruence(p, q1);
    field::settle_sym(b, 0, 0, 0, "double_witt: q1(z)");
    bool uncertain = false;
    auto i = field::first_nonzero(b.row(0), 2, uncertain);
    if (!i) {
        if (uncertain) {
            throw InsufficientPrecision("double_witt: first row of Q1 not certified");
        }
        throw HypothesisViolation("double_witt: z is a singular point of the intersection");
    }
    p.swap_rows(2, *i);
    b.swap_rows(2, *i);
    b.swap_cols(2, *i);
    p = mordell3_impl(b) * p;
    return p;
}

// Exact shape check of the final forms of double_witt (imposes exact values over balls).
template <class T>
void settle_double_witt(Matrix<T>& a, Matrix<T>& b) {
    for (std::size_t j = 0; j < a.rows(); ++j) {
        field::settle_sym(a, 0, j, j == 1 ? 1 : 0, "double_witt: Q0 first row");
        field::settle_sym(b, 0, j, j == 2 ? 1 : 0, "double_witt: Q1 first row");
    }
}

}  // namespace detail

/// Invertible P with first row y such that P Q P^t has entry (1,1) = 0 and (1,2) != 0.
inline Transform base_witt(const SymMatrix& q, const RatVec& y) {
    if (sgn(determinant(q.matrix())) == 0) {
        throw PreconditionViolation("base_witt: det(Q) = 0");
    }
    if (y.size() != q.n()) {
        throw DimensionMismatch("base_witt");
    }
    if (!is_zero_vector(y) && sgn(evaluate_form(q, y)) != 0) {
        throw PreconditionViolation("base_witt: y is not isotropic");
    }
    return Transform(detail::base_witt_impl(q.matrix(), y));
}

/// Needs a11 = 0 and a12 != 0; P Q P^t then has first row (0, 1, 0, ..., 0).
inline Transform clear_first_row(const SymMatrix& q) {
    if (sgn(q(0, 0)) != 0) {
        throw PreconditionViolation("clear_first_row: a11 != 0");
    }
    return Transform(detail::clear_first_row_impl(q.matrix()));
}

/// Needs first row (0, 1, 0, ..., 0); P Q P^t is then H + Q2.
inline Transform split_h(const SymMatrix& q) { return Transform(detail::split_h_impl(q.matrix())); }

/// P with P Q P^t = H + Q2 for a nonzero isotropic y of a nondegenerate Q.
inline Transform reduce_qf(const SymMatrix& q, const RatVec& y) {
    base_witt(q, y);
    Transform p(detail::reduce_qf_impl(q.matrix(), y));
    RatMatrix out = congruence(p.matrix(), q.matrix());
    detail::settle_h_block(out, 0, "reduce_qf");
    return p;
}

/// Needs a11 = 0 and a13 != 0; P Q P^t then has first row (0, 0, 1, 0, ..., 0), and the first
/// two columns of P are those of the identity.
inline Transform mordell3(const SymMatrix& q) { return Transform(detail::mordell3_impl(q.matrix())); }

/// First rows of P Q0 P^t and P Q1 P^t become (0,1,0,...,0) and (0,0,1,0,...,0).
inline Transform double_witt(const SymMatrix& q0, const SymMatrix& q1, const RatVec& z) {
    if (is_zero_vector(z)) {
        throw PreconditionViolation("double_witt: z = 0");
    }
    if (sgn(evaluate_form(q0, z)) != 0 || sgn(evaluate_form(q1, z)) != 0) {
        throw PreconditionViolation("double_witt: z is not a common zero");
    }
    Transform p(detail::double_witt_impl(q0.matrix(), q1.matrix(), z));
    RatMatrix a = congruence(p.matrix(), q0.matrix());
    RatMatrix b = congruence(p.matrix(), q1.matrix());
    detail::settle_double_witt(a, b);
    return p;
}

/// Ball version: returns P together with the transformed forms, first rows exact.
struct BallDoubleWitt {
    BallMatrix p;
    BallMatrix q0;
    BallMatrix q1;
};

inline BallDoubleWitt double_witt(const SymMatrix& q0, const SymMatrix& q1, const BallVec& z) {
    BallMatrix b0 = to_ball(q0);
    BallMatrix b1 = to_ball(q1);
    field::require_zero(bilinear(b0, z, z), "double_witt: q0(z)");
    BallDoubleWitt out{detail::double_witt_impl(b0, b1, z), {}, {}};
    out.q0 = congruence(out.p, b0);
    out.q1 = congruence(out.p, b1);
    detail::settle_double_witt(out.q0, out.q1);
    return out;
}

/// True when rows/columns 0..2k-1 of q form k exact hyperbolic planes orthogonal to the rest.
inline bool has_hyperbolic_prefix(const SymMatrix& q, std::size_t k) {
    for (std::size_t b = 0; b < k; ++b) {
        for (std::size_t i : {2 * b, 2 * b + 1}) {
            for (std::size_t j = 0; j < q.n(); ++j) {
                bool one = (i == 2 * b && j == 2 * b + 1) || (i == 2 * b + 1 && j == 2 * b);
                if (q(i, j) != (one ? 1 : 0)) {
                    return false;
                }
            }
        }
    }
    return true;
}

using IsotropicFn = std::function<RatVec(const SymMatrix&)>;

namespace detail {

// Integer w with y_g . w = g where g is the positive gcd of the integer vector y_g.
inline RatVec gcd_partner(const IntVec& a) {
    const std::size_t n = a.size();
    RatVec w(n, Rat(0));
    Int g = 0;
    for (std::size_t j = 0; j < n; ++j) {
        if (a[j] == 0) {
            continue;
        }
        if (g == 0) {
            g = a[j];
            w[j] = 1;
            continue;
        }
        Int ng, s, t;
        mpz_gcdext(ng.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), g.get_mpz_t(), a[j].get_mpz_t());
        for (Rat& x : w) {
            x *= Rat(s);
        }
        w[j] = Rat(t);
        g = ng;
    }
    if (g < 0) {
        for (Rat& x : w) {
            x = -x;
        }
    }
    return w;
}

// Invertible matrix with rows a, b followed by unit vectors.
inline RatMatrix complete_basis(const RatVec& a, const RatVec& b) {
    const std::size_t n = a.size();
    RatMatrix two = RatMatrix::from_rows({a, b});
    std::vector<std::size_t> piv = rref(two);
    if (piv.size() != 2) {
        throw InternalError("complete_basis: dependent rows");
    }
    RatMatrix out(n, n, Rat(0));
    out.set_row(0, a);
    out.set_row(1, b);
    std::size_t r = 2;
    for (std::size_t j = 0; j < n; ++j) {
        if (j != piv[0] && j != piv[1]) {
            out(r++, j) = 1;
        }
    }
    return out;
}

}  // namespace detail

/// Splits hyperbolic planes off a balanced nondegenerate rational form until the remainder has
/// size 3 (n odd) or 4 (n even). Each plane is spanned by an oracle vector y of the current
/// remainder lattice and a partner w with the smallest positive B(y, w); the remainder is then
/// re-based on a reduced integer basis of the orthogonal complement.
inline Transform hyperbolic_chain(const SymMatrix& q, const IsotropicFn& oracle) {
    const std::size_t n = q.n();
    if (n < 5) {
        throw PreconditionViolation("hyperbolic_chain needs n >= 5");
    }
    if (sgn(determinant(q.matrix())) == 0) {
        throw PreconditionViolation("hyperbolic_chain: det(Q) = 0");
    }
    const Signature sig = inertia(q);
    if (std::abs(sig.d()) > 1) {
        throw PreconditionViolation("hyperbolic_chain: form is not balanced, signature " + sig.str());
    }
    std::vector<RatVec> planes;
    RatMatrix rest = identity_rat(n);
    RatMatrix p = identity_rat(n);
    while (rest.rows() >= 5) {
        SymMatrix g(congruence(rest, q.matrix()));
        RatVec y = content_normalized(oracle(g));
        RatVec w = detail::gcd_partner(primitive_integer(row_times(y, g.matrix())));
        RatMatrix u = detail::complete_basis(y, w);
        SymMatrix gu(congruence(u, g.matrix()));
        Transform local = reduce_qf(gu, unit_vector(gu.n(), 0));
        RatMatrix rows = local.matrix() * u * rest;
        planes.push_back(rows.row(0));
        planes.push_back(rows.row(1));

        RatMatrix cond(n, planes.size());
        for (std::size_t a = 0; a < planes.size(); ++a) {
            RatVec col = row_times(planes[a], q.matrix());
            for (std::size_t b = 0; b < n; ++b) {
                cond(b, a) = col[b];
            }
        }
        std::vector<RatVec> comp = integer_left_kernel(cond);
        if (comp.size() != n - planes.size()) {
            throw InternalError("hyperbolic_chain: complement has the wrong dimension");
        }
        rest = RatMatrix::from_rows(comp);
        for (std::size_t a = 0; a < planes.size(); ++a) {
            p.set_row(a, planes[a]);
        }
        for (std::size_t a = 0; a < comp.size(); ++a) {
            p.set_row(planes.size() + a, comp[a]);
        }
        SymMatrix cur(congruence(p, q.matrix()));
        const std::size_t k = planes.size() / 2;
        if (!has_hyperbolic_prefix(cur, k)) {
            throw InternalError("hyperbolic_chain: hyperbolic block is not exact");
        }
        Signature s2 = inertia(SymMatrix(congruence(rest, q.matrix())));
        if (s2.r != sig.r - static_cast<int>(k) || s2.s != sig.s - static_cast<int>(k)) {
            throw InternalError("hyperbolic_chain: remainder signature " + s2.str() + " breaks the bookkeeping");
        }
    }
    return Transform(p);
}

}  // namespace twoquad

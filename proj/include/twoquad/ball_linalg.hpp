#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "twoquad/ball.hpp"
#include "twoquad/matrix.hpp"

namespace twoquad {

using BallVec = std::vector<RealBall>;
using BallMatrix = Matrix<RealBall>;
using ComplexBallVec = std::vector<ComplexBall>;
using ComplexBallMatrix = Matrix<ComplexBall>;

inline BallVec to_ball(const RatVec& v) {
    BallVec out;
    out.reserve(v.size());
    for (const Rat& x : v) {
        out.emplace_back(x);
    }
    return out;
}

inline BallMatrix to_ball(const RatMatrix& m) {
    BallMatrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out(i, j) = RealBall(m(i, j));
        }
    }
    return out;
}

inline BallMatrix to_ball(const SymMatrix& m) { return to_ball(m.matrix()); }

inline BallMatrix ball_identity(std::size_t n) { return identity_matrix<RealBall>(n, RealBall(1), RealBall()); }

inline std::complex<double> approx(const RealBall& x) { return {x.mid_double(), 0.0}; }
inline std::complex<double> approx(const ComplexBall& z) { return {z.re.mid_double(), z.im.mid_double()}; }

inline bool certainly_nonzero(const RealBall& x) { return x.certainly_nonzero(); }
inline bool certainly_nonzero(const ComplexBall& z) { return z.certainly_nonzero(); }

/// Largest upper bound on |entry| over a ball matrix.
inline Rat max_mag(const BallMatrix& m) {
    Rat best = 0;
    for (const RealBall& x : m.data()) {
        Rat v = x.mag();
        if (v > best) {
            best = v;
        }
    }
    return best;
}

inline Rat max_mag(const BallVec& v) {
    Rat best = 0;
    for (const RealBall& x : v) {
        Rat m = x.mag();
        if (m > best) {
            best = m;
        }
    }
    return best;
}

/// Solves A x = b by Gaussian elimination with partial pivoting on midpoint magnitude.
/// Every pivot must be certified nonzero, otherwise InsufficientPrecision is raised.
template <class S>
std::vector<S> ball_solve(Matrix<S> a, std::vector<S> b) {
    const std::size_t n = a.rows();
    if (!a.square() || b.size() != n) {
        throw DimensionMismatch("ball_solve");
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        double best = -1;
        for (std::size_t i = c; i < n; ++i) {
            double v = std::abs(approx(a(i, c)));
            if (v > best && certainly_nonzero(a(i, c))) {
                best = v;
                p = i;
            }
        }
        if (best < 0) {
            throw InsufficientPrecision("ball elimination found no certified pivot");
        }
        a.swap_rows(p, c);
        std::swap(b[p], b[c]);
        for (std::size_t i = c + 1; i < n; ++i) {
            if (a(i, c).exact_zero()) {
                continue;
            }
            S f = a(i, c) / a(c, c);
            for (std::size_t j = c + 1; j < n; ++j) {
                a(i, j) = a(i, j) - f * a(c, j);
            }
            b[i] = b[i] - f * b[c];
        }
    }
    std::vector<S> x(n);
    for (std::size_t i = n; i-- > 0;) {
        S acc = b[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            acc = acc - a(i, j) * x[j];
        }
        x[i] = acc / a(i, i);
    }
    return x;
}

namespace detail {

/// Index of the largest coordinate of an approximate kernel vector of the matrix `m`,
/// obtained by one step of inverse iteration in double precision.
inline std::size_t dominant_kernel_index(const std::vector<std::vector<std::complex<double>>>& m) {
    const std::size_t n = m.size();
    auto a = m;
    std::vector<std::complex<double>> x(n, 1.0);
    std::vector<std::size_t> perm(n);
    double scale = 0;
    for (const auto& row : a) {
        for (const auto& v : row) {
            scale = std::max(scale, std::abs(v));
        }
    }
    const double tiny = scale > 0 ? scale * 1e-300 : 1e-300;
    for (std::size_t i = 0; i < n; ++i) {
        perm[i] = i;
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t i = c + 1; i < n; ++i) {
            if (std::abs(a[i][c]) > std::abs(a[p][c])) {
                p = i;
            }
        }
        std::swap(a[p], a[c]);
        std::swap(x[p], x[c]);
        if (std::abs(a[c][c]) < tiny) {
            a[c][c] = tiny;
        }
        for (std::size_t i = c + 1; i < n; ++i) {
            std::complex<double> f = a[i][c] / a[c][c];
            for (std::size_t j = c; j < n; ++j) {
                a[i][j] -= f * a[c][j];
            }
            x[i] -= f * x[c];
        }
    }
    std::vector<std::complex<double>> y(n);
    for (std::size_t i = n; i-- > 0;) {
        std::complex<double> acc = x[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            acc -= a[i][j] * y[j];
        }
        y[i] = acc / a[i][i];
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (std::abs(y[i]) > std::abs(y[best])) {
            best = i;
        }
    }
    return best;
}

}  // namespace detail

/// Enclosure of a generator of ker(lam Q0 + Q1) for lam enclosing a simple root of
/// det(lambda Q0 + Q1). The coordinate of largest magnitude is fixed to exactly 1 and the
/// others solve the complementary principal system.
template <class S>
std::vector<S> ball_kernel(const SymMatrix& q0, const SymMatrix& q1, const S& lam) {
    const std::size_t n = q0.n();
    if (q1.n() != n) {
        throw DimensionMismatch("ball_kernel");
    }
    Matrix<S> m(n, n);
    std::vector<std::vector<std::complex<double>>> approx_m(n, std::vector<std::complex<double>>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            S v = lam * S(RealBall(q0(i, j))) + S(RealBall(q1(i, j)));
            approx_m[i][j] = approx_m[j][i] = approx(v);
            m(i, j) = v;
            m(j, i) = v;
        }
    }
    const std::size_t piv = detail::dominant_kernel_index(approx_m);
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < n; ++i) {
        if (i != piv) {
            rest.push_back(i);
        }
    }
    Matrix<S> a = submatrix(m, rest, rest);
    std::vector<S> rhs(rest.size());
    for (std::size_t k = 0; k < rest.size(); ++k) {
        rhs[k] = -m(rest[k], piv);
    }
    std::vector<S> sol = ball_solve(std::move(a), std::move(rhs));
    std::vector<S> v(n);
    v[piv] = S(RealBall(1));
    for (std::size_t k = 0; k < rest.size(); ++k) {
        v[rest[k]] = sol[k];
    }
    return v;
}

/// Ball evaluation of x Q y^t for rational Q.
template <class S>
S ball_bilinear(const SymMatrix& q, const std::vector<S>& x, const std::vector<S>& y) {
    const std::size_t n = q.n();
    S acc{};
    for (std::size_t i = 0; i < n; ++i) {
        S row{};
        for (std::size_t j = 0; j < n; ++j) {
            if (sgn(q(i, j)) == 0) {
                continue;
            }
            row = row + S(RealBall(q(i, j))) * y[j];
        }
        acc = acc + x[i] * row;
    }
    return acc;
}

inline RealBall ball_form(const SymMatrix& q, const BallVec& x) { return ball_bilinear(q, x, x); }

}  // namespace twoquad

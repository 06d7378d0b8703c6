#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "twoquad/ball_linalg.hpp"
#include "twoquad/pencil.hpp"
#include "twoquad/roots.hpp"

namespace twoquad {

/// One diagonal block of the simultaneous normal form.
struct BlockDescriptor {
    std::size_t position = 0;
    std::size_t size = 1;
    /// D0 entry of a 1x1 block; +1 for a 2x2 block, which always faces diag(1, -1).
    int d0_sign = 1;
};

/// P with P Q0 P^t = D0 = diag(+-1) and P Q1 P^t = D1, block diagonal with m scalar blocks
/// (one per real root of Delta, increasing) followed by trace-zero 2x2 blocks.
struct BlockDiagPair {
    BallMatrix p;
    BallMatrix d0;
    BallMatrix d1;
    std::size_t m = 0;
    std::vector<BlockDescriptor> blocks;
    BallVec real_roots;
    /// One root per conjugate pair (positive imaginary part), in block order.
    std::vector<ComplexBall> complex_roots;
    /// Upper bounds of max |(P Qi P^t - Di)_jk|.
    Rat residual0;
    Rat residual1;
    long bits = 0;
};

inline ComplexBall complex_sqrt(const ComplexBall& z) {
    if (z.im.exact_zero() && z.re.certainly_positive()) {
        return {ball_sqrt(z.re), RealBall()};
    }
    RealBall r = ball_sqrt(z.re * z.re + z.im * z.im);
    RealBall two(2);
    // Either formula is a continuous square root on its half plane.
    if (z.re.mid_double() >= 0) {
        RealBall re = ball_sqrt((r + z.re) / two);
        return {re, z.im / (two * re)};
    }
    RealBall im = ball_sqrt((r - z.re) / two);
    return {z.im / (two * im), im};
}

namespace detail {

inline Rat pow2_neg(long bits) {
    Rat t(1);
    mpz_mul_2exp(t.get_den_mpz_t(), t.get_den_mpz_t(), static_cast<mp_bitcnt_t>(bits));
    return t;
}

/// Largest |entry| of a - b, after checking every entry encloses zero.
inline Rat certified_residual(const BallMatrix& a, const BallMatrix& b, const char* what) {
    Rat worst = 0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            RealBall d = a(i, j) - b(i, j);
            if (!d.contains_zero()) {
                throw InternalError(std::string(what) + ": residual excludes zero");
            }
            worst = std::max(worst, d.mag());
        }
    }
    return worst;
}

inline BlockDiagPair block_diag_at(const SymMatrix& q0, const SymMatrix& q1, const Poly& delta,
                                   const std::vector<IsolatingInterval>& intervals, long bits, int target_bits) {
    const std::size_t n = q0.n();
    BlockDiagPair out;
    out.bits = bits;
    out.m = intervals.size();
    out.p = BallMatrix(n, n);
    out.d0 = BallMatrix(n, n);
    out.d1 = BallMatrix(n, n);
    for (const IsolatingInterval& iv : intervals) {
        out.real_roots.push_back(refine_root(iv, bits));
    }
    out.complex_roots = certified_complex_roots(delta, out.real_roots, bits);

    std::size_t row = 0;
    for (const RealBall& lam : out.real_roots) {
        BallVec v = ball_kernel(q0, q1, lam);
        RealBall c = ball_form(q0, v);
        int s = require_sign(c, "q0 on a real kernel vector");
        RealBall scale = ball_sqrt(ball_abs(c));
        for (std::size_t j = 0; j < n; ++j) {
            out.p(row, j) = v[j] / scale;
        }
        out.d0(row, row) = RealBall(s);
        out.d1(row, row) = s > 0 ? -lam : lam;
        out.blocks.push_back({row, 1, s});
        ++row;
    }
    for (const ComplexBall& lam : out.complex_roots) {
        ComplexBallVec v = ball_kernel(q0, q1, lam);
        ComplexBall c = ball_bilinear(q0, v, v);
        if (!c.certainly_nonzero()) {
            throw InsufficientPrecision("q0 on a complex kernel vector");
        }
        // Scaling v by mu with mu^2 q0(v, v) = 2 makes the real and imaginary parts
        // q0-orthonormal with norms +1 and -1.
        ComplexBall mu = complex_sqrt(ComplexBall(RealBall(2)) / c);
        for (std::size_t j = 0; j < n; ++j) {
            ComplexBall x = mu * v[j];
            out.p(row, j) = x.re;
            out.p(row + 1, j) = x.im;
        }
        out.d0(row, row) = RealBall(1);
        out.d0(row + 1, row + 1) = RealBall(-1);
        out.d1(row, row) = -lam.re;
        out.d1(row + 1, row + 1) = lam.re;
        out.d1(row, row + 1) = -lam.im;
        out.d1(row + 1, row) = -lam.im;
        out.blocks.push_back({row, 2, 1});
        row += 2;
    }
    if (row != n) {
        throw InternalError("root count does not match the dimension");
    }
    out.residual0 = certified_residual(congruence(out.p, to_ball(q0)), out.d0, "P Q0 P^t");
    out.residual1 = certified_residual(congruence(out.p, to_ball(q1)), out.d1, "P Q1 P^t");
    const Rat tol = pow2_neg(target_bits);
    if (out.residual0 > tol || out.residual1 > tol) {
        throw InsufficientPrecision("block diagonalization residual above target");
    }
    return out;
}

}  // namespace detail

/// Simultaneous block diagonalization of a smooth pair, certified to the policy's residual target.
inline BlockDiagPair simultaneous_block_diag(const SymMatrix& q0, const SymMatrix& q1,
                                             const PrecisionPolicy& policy = {}) {
    require_hypothesis_h(q0, q1);
    Poly delta = pencil_determinant(q0, q1);
    std::vector<IsolatingInterval> intervals = isolate_real_roots(delta);
    return with_precision(policy, [&](long bits) {
        return detail::block_diag_at(q0, q1, delta, intervals, bits, policy.target_residual_bits);
    });
}

/// A common zero produced by one of the closed-form solvers, with its substituted values.
/// A residue that vanishes by construction is an exact zero ball.
struct SolverOutput {
    BallVec v;
    RealBall q0_residue;
    RealBall q1_residue;
};

namespace detail {

/// Sum of coef_i v_i^2, squaring each distinct ball once so that a paired +x^2 - x^2 cancels exactly.
inline RealBall diagonal_form(const std::vector<RealBall>& coef, const BallVec& v) {
    std::unordered_map<std::uint64_t, RealBall> squares;
    RealBall acc;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i].exact_zero() || coef[i].exact_zero()) {
            continue;
        }
        auto it = squares.find(v[i].node());
        if (it == squares.end()) {
            it = squares.emplace(v[i].node(), v[i] * v[i]).first;
        }
        const RealBall& sq = it->second;
        if (coef[i] == RealBall(1) && coef[i].exact()) {
            acc = acc + sq;
        } else if (coef[i] == RealBall(-1) && coef[i].exact()) {
            acc = acc - sq;
        } else {
            acc = acc + coef[i] * sq;
        }
    }
    return acc;
}

inline std::vector<RealBall> unit_signs(std::initializer_list<int> s) {
    std::vector<RealBall> out;
    for (int x : s) {
        out.emplace_back(x);
    }
    return out;
}

}  // namespace detail

/// Common zero of q0 = x^2 - y^2 + z^2 - w^2 and q1 = a x^2 - 2b xy - a y^2 + c z^2 - 2d zw - c w^2.
inline SolverOutput solve_two_complex_blocks(const RealBall& a, const RealBall& b, const RealBall& c,
                                             const RealBall& d) {
    auto eps = b.certified_sign();
    auto eps2 = d.certified_sign();
    if (!eps || !eps2 || *eps == 0 || *eps2 == 0) {
        throw InsufficientPrecision("two complex blocks: b and d must be certified nonzero");
    }
    // |b| x^2 = |d| w^2 with w = 1.
    RealBall x = ball_sqrt(ball_abs(d) / ball_abs(b));
    RealBall w(1);
    RealBall z = (*eps) * (*eps2) > 0 ? -w : w;
    SolverOutput out;
    out.v = {x, x, z, w};
    out.q0_residue = detail::diagonal_form(detail::unit_signs({1, -1, 1, -1}), out.v);
    RealBall two(2);
    out.q1_residue = a * x * x - two * b * x * x - a * x * x + c * z * z - two * d * z * w - c * w * w;
    return out;
}

/// Common zero of q0 = x^2 + y^2 - z^2 and q1 = lam1 x^2 + a y^2 - 2b yz - a z^2, with z = 1.
inline SolverOutput solve_mixed(const RealBall& lam1, const RealBall& a, const RealBall& b) {
    SolverOutput out;
    RealBall delta = a - lam1;
    const std::vector<RealBall> signs = detail::unit_signs({1, 1, -1});
    if (delta.exact_zero()) {
        out.v = {RealBall(1), RealBall(), RealBall(1)};
        out.q0_residue = detail::diagonal_form(signs, out.v);
        out.q1_residue = -delta;
        return out;
    }
    // delta y^2 - 2b y - delta = 0 has roots y1 y2 = -1; the one with |y| <= 1 is
    // -delta / (b + sgn(b) sqrt(b^2 + delta^2)), continuous through delta = 0.
    RealBall y;
    auto sb = b.certified_sign();
    if (!sb) {
        throw InsufficientPrecision("mixed block: sign of b");
    }
    if (*sb == 0) {
        int sd = require_sign(delta, "mixed block: a - lam1");
        y = RealBall(sd);
    } else {
        RealBall root = ball_sqrt(b * b + delta * delta);
        y = -delta / (*sb > 0 ? b + root : b - root);
    }
    RealBall t = RealBall(1) - y * y;
    if (t.certainly_negative()) {
        throw InternalError("mixed block: selected root has |y| > 1");
    }
    RealBall x = ball_sqrt(t);
    RealBall one(1);
    out.v = {x, y, one};
    out.q0_residue = detail::diagonal_form(signs, out.v);
    RealBall two(2);
    out.q1_residue = lam1 * x * x + a * y * y - two * b * y - a;
    return out;
}

/// q0 = sum a_i x_i^2 with a_i = +-1 and q1 = sum b_i x_i^2.
struct DiagonalPairView {
    std::vector<int> a;
    BallVec b;
    /// Exact values of b when known; comparisons then never need precision.
    std::vector<Rat> exact_b;

    static DiagonalPairView from_rational(std::vector<int> a, const RatVec& b) {
        DiagonalPairView v;
        v.a = std::move(a);
        v.exact_b = b;
        for (const Rat& x : b) {
            v.b.emplace_back(x);
        }
        v.check();
        return v;
    }
    static DiagonalPairView from_balls(std::vector<int> a, BallVec b) {
        DiagonalPairView v;
        v.a = std::move(a);
        v.b = std::move(b);
        v.check();
        return v;
    }

    std::size_t size() const { return a.size(); }
    bool exact() const { return !exact_b.empty(); }

    /// Certified sign of b_i + s b_j.
    int sign_of(std::size_t i, int s, std::size_t j) const {
        if (exact()) {
            return sgn(exact_b[i] + Rat(s) * exact_b[j]);
        }
        RealBall x = s > 0 ? b[i] + b[j] : b[i] - b[j];
        return require_sign(x, "comparison of diagonal coefficients");
    }
    int compare(std::size_t i, std::size_t j) const { return i == j ? 0 : sign_of(i, -1, j); }

    std::vector<std::size_t> indices(int sign) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i] == sign) {
                out.push_back(i);
            }
        }
        return out;
    }
    /// First index of the class with minimal (want = -1) or maximal (want = +1) coefficient.
    std::optional<std::size_t> extreme(int sign, int want) const {
        std::optional<std::size_t> best;
        for (std::size_t i : indices(sign)) {
            if (!best || compare(i, *best) == want) {
                best = i;
            }
        }
        return best;
    }

    /// Some lambda q0 + q1 is positive definite iff -m_- < m_+ (an empty class imposes nothing).
    bool has_positive_definite_member() const {
        auto mp = extreme(1, -1);
        auto mm = extreme(-1, -1);
        if (!mp || !mm) {
            return true;
        }
        return sign_of(*mp, 1, *mm) > 0;
    }
    /// q0 = q1 = 0 has a nonzero real solution iff -m_- >= m_+ and -M_- <= M_+.
    bool has_real_common_zero() const {
        auto mp = extreme(1, -1);
        auto mm = extreme(-1, -1);
        auto Mp = extreme(1, 1);
        auto Mm = extreme(-1, 1);
        if (!mp || !mm) {
            return false;
        }
        return sign_of(*mp, 1, *mm) <= 0 && sign_of(*Mp, 1, *Mm) >= 0;
    }

private:
    void check() const {
        if (a.size() != b.size() || (!exact_b.empty() && exact_b.size() != a.size())) {
            throw DimensionMismatch("diagonal pair view");
        }
        for (int s : a) {
            if (s != 1 && s != -1) {
                throw PreconditionViolation("q0 coefficients must be +1 or -1");
            }
        }
    }
};

/// Common zero of a diagonal pair with all q0 coefficients +-1.
inline SolverOutput solve_all_real(const DiagonalPairView& view) {
    if (!view.has_real_common_zero()) {
        throw PreconditionViolation("diagonal pair has no nonzero real common zero");
    }
    const std::size_t n = view.size();
    DiagonalPairView cur = view;
    for (int flips = 0; flips < 2; ++flips) {
        std::size_t m = *cur.extreme(1, -1);
        std::size_t big = *cur.extreme(1, 1);
        std::optional<std::size_t> k;
        for (std::size_t j : cur.indices(-1)) {
            // b_m <= -b_j <= b_M
            if (cur.sign_of(m, 1, j) <= 0 && cur.sign_of(big, 1, j) >= 0) {
                k = j;
                break;
            }
        }
        if (!k) {
            for (int& s : cur.a) {
                s = -s;
            }
            continue;
        }
        SolverOutput out;
        out.v.assign(n, RealBall());
        if (cur.sign_of(m, 1, *k) == 0) {
            out.v[m] = RealBall(1);
            out.v[*k] = RealBall(1);
        } else {
            // (b_M + b_k) >= 0 > (b_m + b_k)
            RealBall ratio;
            if (cur.exact()) {
                ratio = RealBall((-cur.exact_b[big] - cur.exact_b[*k]) / (cur.exact_b[m] + cur.exact_b[*k]));
            } else {
                ratio = (-cur.b[big] - cur.b[*k]) / (cur.b[m] + cur.b[*k]);
            }
            RealBall xm = ball_sqrt(ratio);
            RealBall xk2 = ratio + RealBall(1);
            out.v[big] = RealBall(1);
            out.v[m] = xm;
            out.v[*k] = ball_sqrt(xk2);
        }
        std::vector<RealBall> signs;
        for (int s : view.a) {
            signs.emplace_back(s);
        }
        out.q0_residue = detail::diagonal_form(signs, out.v);
        out.q1_residue = detail::diagonal_form(view.b, out.v);
        return out;
    }
    throw InternalError("all-real solver: no admissible index after changing the sign of q0");
}

enum class RealPath { all_complex, mixed, all_real };

inline const char* to_string(RealPath p) {
    switch (p) {
    case RealPath::all_complex:
        return "all-complex";
    case RealPath::mixed:
        return "mixed";
    case RealPath::all_real:
        return "all-real";
    }
    return "?";
}

struct RealPoint {
    /// Common zero in the original coordinates, y = z P.
    BallVec y;
    /// Solution in the block-diagonal coordinates.
    BallVec z;
    RealPath path = RealPath::all_real;
    BlockDiagPair diag;
    RealBall q0_residue;
    RealBall q1_residue;
};

namespace detail {

inline RealPoint real_point_at(const SymMatrix& q0, const SymMatrix& q1, const Poly& delta,
                               const std::vector<IsolatingInterval>& intervals, long bits, int target_bits) {
    const std::size_t n = q0.n();
    RealPoint out;
    out.diag = block_diag_at(q0, q1, delta, intervals, bits, target_bits);
    const BlockDiagPair& d = out.diag;
    const std::size_t m = d.m;
    out.z.assign(n, RealBall());
    if (m == 0) {
        if (n < 4) {
            throw PreconditionViolation("a single pair of complex roots has no real common zero");
        }
        out.path = RealPath::all_complex;
        SolverOutput s = solve_two_complex_blocks(d.d1(0, 0), -d.d1(0, 1), d.d1(2, 2), -d.d1(2, 3));
        for (std::size_t i = 0; i < 4; ++i) {
            out.z[i] = s.v[i];
        }
    } else if (m < n) {
        out.path = RealPath::mixed;
        const std::size_t r = m - 1;
        const std::size_t c = m;
        int s = d.blocks[r].d0_sign;
        if (s > 0) {
            SolverOutput sol = solve_mixed(d.d1(r, r), d.d1(c, c), -d.d1(c, c + 1));
            out.z[r] = sol.v[0];
            out.z[c] = sol.v[1];
            out.z[c + 1] = sol.v[2];
        } else {
            // Negating q0 and swapping the complex pair gives the x^2 + y^2 - z^2 shape.
            SolverOutput sol = solve_mixed(d.d1(r, r), d.d1(c + 1, c + 1), -d.d1(c, c + 1));
            out.z[r] = sol.v[0];
            out.z[c + 1] = sol.v[1];
            out.z[c] = sol.v[2];
        }
    } else {
        out.path = RealPath::all_real;
        std::vector<int> a;
        BallVec b;
        for (std::size_t i = 0; i < n; ++i) {
            a.push_back(d.blocks[i].d0_sign);
            b.push_back(d.d1(i, i));
        }
        DiagonalPairView view = DiagonalPairView::from_balls(std::move(a), std::move(b));
        if (!view.has_real_common_zero()) {
            throw PreconditionViolation("all roots real but the diagonal pair has no real common zero");
        }
        out.z = solve_all_real(view).v;
    }
    out.y = row_times(out.z, d.p);
    out.q0_residue = ball_form(q0, out.y);
    out.q1_residue = ball_form(q1, out.y);
    if (!out.q0_residue.contains_zero() || !out.q1_residue.contains_zero()) {
        throw InternalError("real point does not enclose a common zero");
    }
    const Rat tol = pow2_neg(target_bits);
    if (out.q0_residue.mag() > tol || out.q1_residue.mag() > tol) {
        throw InsufficientPrecision("real point residual above target");
    }
    return out;
}

}  // namespace detail

/// Nonzero real common zero of q0 and q1, certified to the policy's residual target.
/// Raises RealInsolvable with a definite pencil member when none exists.
inline RealPoint real_point(const SymMatrix& q0, const SymMatrix& q1, const PrecisionPolicy& policy = {}) {
    SolvabilityReport rep = is_real_solvable(q0, q1);
    if (!rep.hypothesis_h) {
        throw HypothesisViolation("hypothesis H fails: " + rep.hypothesis_reason);
    }
    if (!rep.solvable_over_r) {
        throw RealInsolvable(*rep.definite_lambda, rep.witness_signature.r, rep.witness_signature.s);
    }
    Poly delta = pencil_determinant(q0, q1);
    std::vector<IsolatingInterval> intervals = isolate_real_roots(delta);
    return with_precision(policy, [&](long bits) {
        return detail::real_point_at(q0, q1, delta, intervals, bits, policy.target_residual_bits);
    });
}

}  // namespace twoquad

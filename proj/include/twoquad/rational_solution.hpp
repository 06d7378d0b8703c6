#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <cstdio>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "twoquad/lll.hpp"
#include "twoquad/oracle.hpp"
#include "twoquad/real_solution.hpp"
#include "twoquad/reduction.hpp"

namespace twoquad {

namespace detail {

inline bool exactly_zero(const Rat& x) { return sgn(x) == 0; }
inline bool exactly_zero(const RealBall& x) { return x.exact_zero(); }
inline bool certainly_negative(const Rat& x) { return sgn(x) < 0; }
inline bool certainly_negative(const RealBall& x) { return x.certainly_negative(); }
inline int certain_sign(const Rat& x) { return sgn(x); }
inline int certain_sign(const RealBall& x) { return require_sign(x, "pos_neg: sign of F22"); }
inline Rat upper_abs(const Rat& x) { return abs_rat(x); }
inline Rat upper_abs(const RealBall& x) { return x.mag(); }
inline Rat lower_abs(const Rat& x) { return abs_rat(x); }
inline Rat lower_abs(const RealBall& x) { return x.mig(); }

/// Given first rows (0,1,0,...) of A = P Q0 P^t and (0,0,1,0,...) of B = P Q1 P^t, returns z P with
/// q0(z P) = 0 and q1(z P) < 0.
template <class T>
std::vector<T> pos_neg_impl(const Matrix<T>& p, const Matrix<T>& a, const Matrix<T>& b) {
    const std::size_t n = a.rows();
    std::vector<T> z(n, T(0));
    if (exactly_zero(a(2, 2))) {
        z[0] = (T(-1) - b(2, 2)) / T(2);
        z[2] = T(1);
        return row_times(z, p);
    }
    const int eps = certain_sign(a(2, 2));
    Rat big = 1;
    for (std::size_t i = 1; i <= 2; ++i) {
        for (std::size_t j = 1; j <= 2; ++j) {
            big = std::max({big, upper_abs(a(i, j)), upper_abs(b(i, j))});
        }
    }
    const long cap = 64 + static_cast<long>(bit_size(Int(floor_rat(big / lower_abs(a(2, 2))) + 1)));
    // h(y) = g(y) - y2 f(y) on y = (1, y2, 0, ...) is cubic in y2 with leading coefficient -F22.
    T y2 = T(eps);
    for (long it = 0;; ++it) {
        T f = a(1, 1) + T(2) * a(1, 2) * y2 + a(2, 2) * y2 * y2;
        T g = b(1, 1) + T(2) * b(1, 2) * y2 + b(2, 2) * y2 * y2;
        if (certainly_negative(g - y2 * f)) {
            z[0] = -f / T(2);
            z[1] = T(1);
            z[2] = y2;
            return row_times(z, p);
        }
        if (it >= cap) {
            throw InsufficientPrecision("pos_neg: doubling did not certify a negative value");
        }
        y2 = y2 * T(2);
    }
}

}  // namespace detail

/// Nonzero z- with q0(z-) = 0 and q1(z-) < 0, from a real common zero z (ball version).
inline BallVec pos_neg(const SymMatrix& q0, const SymMatrix& q1, const BallVec& z) {
    if (q0.n() < 5) {
        throw PreconditionViolation("pos_neg needs n >= 5");
    }
    if (!ball_form(q0, z).contains_zero() || !ball_form(q1, z).contains_zero()) {
        throw PreconditionViolation("pos_neg: z is not a common zero");
    }
    BallDoubleWitt dw = double_witt(q0, q1, z);
    BallVec out = detail::pos_neg_impl(dw.p, dw.q0, dw.q1);
    if (!ball_form(q1, out).certainly_negative()) {
        throw InsufficientPrecision("pos_neg: q1 not certified negative");
    }
    return out;
}

/// Exact version for a rational common zero.
inline RatVec pos_neg(const SymMatrix& q0, const SymMatrix& q1, const RatVec& z) {
    if (q0.n() < 5) {
        throw PreconditionViolation("pos_neg needs n >= 5");
    }
    Transform p = double_witt(q0, q1, z);
    RatVec out = detail::pos_neg_impl(p.matrix(), p.apply(q0).matrix(), p.apply(q1).matrix());
    if (sgn(evaluate_form(q0, out)) != 0 || sgn(evaluate_form(q1, out)) >= 0) {
        throw InternalError("pos_neg: exact result fails its postcondition");
    }
    return out;
}

namespace detail {

/// A q0-isotropic rational vector w' with B0(w', y) certified nonzero, built from w and a
/// small t via w' = t - q0(t) / (2 B0(w, t)) w.
inline std::optional<RatVec> isotropic_towards(const SymMatrix& q0, const RatVec& w, const BallVec& y) {
    const std::size_t n = q0.n();
    for (long s : {0L, 1L, -1L, 2L}) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < n; ++k) {
                if ((s == 0) != (k == 0) || k == j) {
                    continue;
                }
                RatVec t = unit_vector(n, j);
                t[k] += s;
                Rat bwt = evaluate_bilinear(q0, w, t);
                if (sgn(bwt) == 0) {
                    continue;
                }
                RatVec cand = t;
                Rat c = evaluate_form(q0, t) / (2 * bwt);
                for (std::size_t i = 0; i < n; ++i) {
                    cand[i] -= c * w[i];
                }
                if (ball_bilinear(q0, to_ball(cand), y).certainly_nonzero()) {
                    return content_normalized(cand);
                }
            }
        }
    }
    return std::nullopt;
}

inline Rat round_to_grid(const RealBall& x, long k) {
    Rat scaled = x.mid();
    mpz_mul_2exp(scaled.get_num_mpz_t(), scaled.get_num_mpz_t(), static_cast<mp_bitcnt_t>(k));
    scaled.canonicalize();
    Rat r(round_rat(scaled));
    mpz_mul_2exp(r.get_den_mpz_t(), r.get_den_mpz_t(), static_cast<mp_bitcnt_t>(k));
    r.canonicalize();
    return r;
}

}  // namespace detail

struct ApproxResult {
    RatVec z;
    /// Grid exponent k of the accepted approximation (entries rounded to multiples of 2^-k).
    long grid_bits = 0;
    /// Isotropic vector used for the hyperbolic split.
    RatVec w;
};

/// Rational z with q0(z) = 0 and q1(z) < 0 exactly, near a real y with q0(y) = 0 and q1(y) < 0.
/// `w` is a rational q0-isotropic vector; when empty it is requested from the oracle.
inline ApproxResult rational_isotropic_near(const SymMatrix& q0, const SymMatrix& q1, const BallVec& y,
                                           const IsotropicFn& oracle, RatVec w = {}) {
    const std::size_t n = q0.n();
    if (n < 5) {
        throw PreconditionViolation("rational_isotropic_near needs n >= 5");
    }
    if (!ball_form(q0, y).contains_zero()) {
        throw PreconditionViolation("rational_isotropic_near: q0(y) != 0");
    }
    if (!ball_form(q1, y).certainly_negative()) {
        throw PreconditionViolation("rational_isotropic_near: q1(y) not certified negative");
    }
    if (w.empty()) {
        w = oracle(q0);
    }
    w = content_normalized(verify_isotropic(q0, w, "rational_isotropic_near"));
    ApproxResult out;
    if (!ball_bilinear(q0, to_ball(w), y).certainly_nonzero()) {
        // y on the line of w: w itself answers when q1(w) < 0.
        if (sgn(evaluate_form(q1, w)) < 0) {
            out.z = w;
            out.w = w;
            return out;
        }
        auto alt = detail::isotropic_towards(q0, w, y);
        if (!alt) {
            throw InsufficientPrecision("rational_isotropic_near: no isotropic vector with B0(w, y) != 0");
        }
        w = *alt;
    }
    out.w = w;
    Transform p = reduce_qf(q0, w);
    SymMatrix a = p.apply(q0);
    SymMatrix b = p.apply(q1);
    BallVec yp = row_times(y, to_ball(p.inverse_matrix()));
    if (!yp[1].certainly_nonzero()) {
        throw InsufficientPrecision("rational_isotropic_near: second coordinate not certified");
    }
    // Scale by a power of two so the largest coordinate is in [1, 2).
    double top = 0;
    for (const RealBall& c : yp) {
        top = std::max(top, std::abs(c.mid_double()));
    }
    const long shift = static_cast<long>(std::floor(std::log2(top)));
    RealBall factor(shift >= 0 ? Rat(1) / Rat(Int(1) << shift) : Rat(Int(1) << -shift));
    Rat rad = 0;
    for (RealBall& c : yp) {
        c = c * factor;
        rad = std::max(rad, c.radius());
    }
    for (long k = 0;; ++k) {
        Rat eps = Rat(1) / Rat(Int(1) << k);
        if (eps < 4 * rad || k > 4 * working_precision()) {
            throw InsufficientPrecision("rational_isotropic_near: approximation finer than the enclosure");
        }
        RatVec z(n);
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = detail::round_to_grid(yp[i], k);
        }
        if (sgn(z[1]) == 0 || sgn(evaluate_form(b, z)) >= 0) {
            continue;
        }
        // a = H + F, so u1 = -f(z3..zn) / (2 z2) makes u isotropic.
        Rat f = 0;
        for (std::size_t i = 2; i < n; ++i) {
            for (std::size_t j = 2; j < n; ++j) {
                f += a(i, j) * z[i] * z[j];
            }
        }
        RatVec u = z;
        u[0] = -f / (2 * z[1]);
        if (sgn(evaluate_form(b, u)) < 0) {
            out.z = content_normalized(p.map_row(u));
            out.grid_bits = k;
            if (sgn(evaluate_form(q0, out.z)) != 0 || sgn(evaluate_form(q1, out.z)) >= 0) {
                throw InternalError("rational_isotropic_near: result fails its postcondition");
            }
            return out;
        }
    }
}

/// One step of the solving pipeline, recorded for replay and hashing.
struct TranscriptStage {
    std::string name;
    std::string note;
    std::optional<Rat> scalar;
    std::optional<RatVec> vector;
    std::optional<RatMatrix> transform;
};

struct SolutionCertificate {
    RatVec x;
    Rat residue0;
    Rat residue1;
    std::vector<TranscriptStage> transcript;
    std::uint64_t digest = 0;
};

inline std::uint64_t fnv1a64(const std::string& s, std::uint64_t h = 14695981039346656037ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t transcript_digest(const std::vector<TranscriptStage>& stages) {
    std::uint64_t h = fnv1a64("");
    for (const TranscriptStage& st : stages) {
        std::ostringstream os;
        os << st.name << '|' << st.note << '|';
        if (st.scalar) {
            os << st.scalar->get_str();
        }
        os << '|';
        if (st.vector) {
            for (const Rat& v : *st.vector) {
                os << v.get_str() << ',';
            }
        }
        os << '|';
        if (st.transform) {
            for (const Rat& v : st.transform->data()) {
                os << v.get_str() << ',';
            }
        }
        os << '\n';
        h = fnv1a64(os.str(), h);
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

struct SolveOptions {
    std::uint64_t seed = 0;
    PrecisionPolicy precision{};
};

namespace detail {

inline std::vector<std::size_t> isotropic_pattern(bool use_z) {
    // Coordinates 2, 3, 5, 7, 9 (or 1, 3, 5, 7, 9) counted from one.
    return use_z ? std::vector<std::size_t>{1, 2, 4, 6, 8} : std::vector<std::size_t>{0, 2, 4, 6, 8};
}

/// Nonzero rational zero of a 5-variable form: a zero diagonal entry or a kernel vector answers
/// directly, an indefinite nondegenerate form goes to the oracle, a definite one has no zero.
inline std::optional<RatVec> restricted_zero(const SymMatrix& g, const IsotropicFn& oracle, std::string& how) {
    for (std::size_t i = 0; i < g.n(); ++i) {
        if (sgn(g(i, i)) == 0) {
            how = "basis vector";
            return unit_vector(g.n(), i);
        }
    }
    if (sgn(determinant(g.matrix())) == 0) {
        how = "kernel vector";
        std::vector<RatVec> k = right_kernel(g.matrix());
        return content_normalized(k.front());
    }
    Signature s = inertia(g);
    if (s.r == 0 || s.s == 0) {
        return std::nullopt;
    }
    how = "oracle";
    return verify_isotropic(g, oracle(g), "restricted solve");
}

/// Reduced basis of the integer points of the row span of `rows`.
inline RatMatrix saturated_basis(const RatMatrix& rows) {
    std::vector<RatVec> ann = right_kernel(rows);
    const std::size_t n = rows.cols();
    RatMatrix m(n, ann.size());
    for (std::size_t j = 0; j < ann.size(); ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            m(i, j) = ann[j][i];
        }
    }
    std::vector<RatVec> k = integer_left_kernel(m);
    RatMatrix out(k.size(), n);
    for (std::size_t i = 0; i < k.size(); ++i) {
        out.set_row(i, k[i]);
    }
    return out;
}

/// Reduced integer basis of {x : x Q v^t = 0 for every v in vs}.
inline RatMatrix orthogonal_lattice(const SymMatrix& q, const std::vector<RatVec>& vs) {
    const std::size_t n = q.n();
    RatMatrix cond(n, vs.size());
    for (std::size_t a = 0; a < vs.size(); ++a) {
        RatVec col = row_times(vs[a], q.matrix());
        for (std::size_t i = 0; i < n; ++i) {
            cond(i, a) = col[i];
        }
    }
    return RatMatrix::from_rows(integer_left_kernel(cond));
}

/// `count` vectors that together with `base` span a totally isotropic subspace of q0 (when base is),
/// each found by the oracle on a nondegenerate section of the lattice orthogonal to base and the
/// earlier vectors.
inline std::vector<RatVec> short_isotropic_flag(const SymMatrix& q0, const std::vector<RatVec>& base,
                                                std::size_t count, const IsotropicFn& oracle) {
    std::vector<RatVec> flag;
    while (flag.size() < count) {
        std::vector<RatVec> vs = base;
        vs.insert(vs.end(), flag.begin(), flag.end());
        RatMatrix basis = orthogonal_lattice(q0, vs);
        RatMatrix gram = congruence(basis, q0.matrix());
        // Rows outside the pivot columns of the radical span a complement of it.
        std::vector<bool> skip(basis.rows(), false);
        std::vector<RatVec> rad = integer_left_kernel(gram);
        if (!rad.empty()) {
            RatMatrix r = RatMatrix::from_rows(rad);
            for (std::size_t c : rref(r)) {
                skip[c] = true;
            }
        }
        std::vector<RatVec> rows;
        for (std::size_t i = 0; i < basis.rows(); ++i) {
            if (!skip[i]) {
                rows.push_back(basis.row(i));
            }
        }
        RatMatrix section = RatMatrix::from_rows(rows);
        RatVec s = verify_isotropic(SymMatrix(congruence(section, q0.matrix())),
                                    oracle(SymMatrix(congruence(section, q0.matrix()))), "isotropic flag");
        flag.push_back(content_normalized(row_times(s, section)));
    }
    return flag;
}

inline SolutionCertificate finish(const SymMatrix& q0, const SymMatrix& q1, RatVec x,
                                  std::vector<TranscriptStage> stages) {
    SolutionCertificate cert;
    cert.x = content_normalized(std::move(x));
    if (is_zero_vector(cert.x)) {
        throw InternalError("solution is the zero vector");
    }
    cert.residue0 = evaluate_form(q0, cert.x);
    cert.residue1 = evaluate_form(q1, cert.x);
    if (sgn(cert.residue0) != 0 || sgn(cert.residue1) != 0) {
        throw InternalError("solution fails exact verification on the input forms");
    }
    stages.push_back({"result", "", std::nullopt, cert.x, std::nullopt});
    cert.transcript = std::move(stages);
    cert.digest = transcript_digest(cert.transcript);
    return cert;
}

}  // namespace detail

/// Nonzero rational common zero of q0 and q1 (n >= 13, hypothesis H over Q), checked exactly
/// against the input forms. Failures: RealInsolvable, OracleBudgetExhausted, PrecisionExhausted.
inline SolutionCertificate solve_pair(const SymMatrix& q0_in, const SymMatrix& q1_in, const IsotropicFn& oracle,
                                      const SolveOptions& opt = {}) {
    const std::size_t n = q0_in.n();
    if (q1_in.n() != n) {
        throw DimensionMismatch("forms of different sizes");
    }
    if (n < 13) {
        throw PreconditionViolation("solve_pair needs n >= 13");
    }
    require_hypothesis_h(q0_in, q1_in);
    SolvabilityReport rep = is_real_solvable(q0_in, q1_in);
    if (!rep.solvable_over_r) {
        throw RealInsolvable(*rep.definite_lambda, rep.witness_signature.r, rep.witness_signature.s);
    }
    std::vector<TranscriptStage> stages;

    const Rat lambda0 = find_balanced_lambda(q1_in, q0_in);
    SymMatrix q0 = pencil_member(q1_in, q0_in, lambda0);
    SymMatrix q1 = q1_in;
    stages.push_back({"balanced-shift", "q0 <- q0 + lambda0 q1, signature " + inertia(q0).str(), lambda0,
                      std::nullopt, std::nullopt});

    RatVec y = content_normalized(verify_isotropic(q0, oracle(q0), "isotropic vector of q0"));
    stages.push_back({"isotropic-q0", "", std::nullopt, y, std::nullopt});
    const int s1 = sgn(evaluate_form(q1, y));
    if (s1 == 0) {
        return detail::finish(q0_in, q1_in, y, std::move(stages));
    }
    if (s1 < 0) {
        q1 = -q1;
    }
    stages.push_back({"sign", s1 < 0 ? "q1 <- -q1" : "q1 kept", std::nullopt, std::nullopt, std::nullopt});

    Poly delta = pencil_determinant(q0, q1);
    std::vector<IsolatingInterval> intervals = isolate_real_roots(delta);
    RealPath path{};
    long real_bits = 0;
    ApproxResult approx = with_precision(opt.precision, [&](long bits) {
        RealPoint rp = detail::real_point_at(q0, q1, delta, intervals, bits, opt.precision.target_residual_bits);
        path = rp.path;
        real_bits = bits;
        BallVec v = pos_neg(q0, q1, rp.y);
        return rational_isotropic_near(q0, q1, v, oracle, y);
    });
    RatVec z = approx.z;
    stages.push_back({"real-point", to_string(path), Rat(real_bits), std::nullopt, std::nullopt});
    stages.push_back({"approx", "grid 2^-" + std::to_string(approx.grid_bits), std::nullopt, z, std::nullopt});

    // Make y and z non-orthogonal for q0, keeping q1(y) > 0 > q1(z).
    std::mt19937_64 rng(opt.seed);
    long box = 1;
    int repairs = 0;
    while (sgn(evaluate_bilinear(q0, y, z)) == 0) {
        if (++repairs > 10000) {
            throw InternalError("non-orthogonality repair did not terminate");
        }
        RatVec yp(n);
        for (Rat& c : yp) {
            c = std::uniform_int_distribution<long>(-box, box)(rng);
        }
        Rat byy = evaluate_bilinear(q0, y, yp);
        if (sgn(byy) == 0) {
            box = std::min<long>(box * 2, 1L << 40);
            continue;
        }
        RatVec w = yp;
        Rat c = evaluate_form(q0, yp) / (2 * byy);
        for (std::size_t i = 0; i < n; ++i) {
            w[i] -= c * y[i];
        }
        w = content_normalized(w);
        const int sw = sgn(evaluate_form(q1, w));
        if (sw == 0) {
            stages.push_back({"repair", "common zero found", std::nullopt, w, std::nullopt});
            return detail::finish(q0_in, q1_in, w, std::move(stages));
        }
        (sw > 0 ? y : z) = w;
    }
    stages.push_back({"repair", std::to_string(repairs) + " steps", std::nullopt, y, std::nullopt});

    // Basis: q0-orthogonal complement of <y, z>, then y and z moved to the front.
    RatMatrix cond(n, 2);
    RatVec qy = row_times(y, q0.matrix());
    RatVec qz = row_times(z, q0.matrix());
    for (std::size_t i = 0; i < n; ++i) {
        cond(i, 0) = qy[i];
        cond(i, 1) = qz[i];
    }
    std::vector<RatVec> comp = integer_left_kernel(cond);
    if (comp.size() != n - 2) {
        throw InternalError("complement of <y, z> has the wrong dimension");
    }
    RatMatrix p1(n, n);
    for (std::size_t i = 0; i < n - 2; ++i) {
        p1.set_row(i, comp[i]);
    }
    p1.set_row(n - 2, y);
    p1.set_row(n - 1, z);
    if (sgn(determinant(p1)) == 0) {
        throw InternalError("basis adapted to <y, z> is singular");
    }
    RatMatrix p2 = identity_rat(n);
    p2.swap_rows(0, n - 2);
    p2.swap_rows(1, n - 1);
    RatMatrix p = p2 * p1;
    SymMatrix q0_2(congruence(p, q0.matrix()));

    // The coordinate pattern comes first. Its restricted form can have a large determinant, so
    // when the oracle gives up, totally isotropic subspaces spanned by short vectors are tried.
    // Only the pattern and the flag orthogonal to both y and z are guaranteed indefinite.
    auto pattern_rows = [&]() -> std::pair<std::string, RatMatrix> {
        std::vector<std::size_t> tail;
        for (std::size_t i = 2; i < n; ++i) {
            tail.push_back(i);
        }
        SymMatrix q2(submatrix(q0_2.matrix(), tail, tail));
        Transform chain = hyperbolic_chain(q2, oracle);
        RatMatrix p3 = direct_sum(identity_rat(2), chain.matrix()) * p;
        SymMatrix q0_3(congruence(p3, q0.matrix()));
        SymMatrix q1_3(congruence(p3, q1.matrix()));
        stages.push_back({"basis", "", std::nullopt, std::nullopt, p3});

        const bool use_z = sgn(q1_3(2, 2)) > 0;
        std::vector<std::size_t> pattern = detail::isotropic_pattern(use_z);
        for (std::size_t i : pattern) {
            for (std::size_t j : pattern) {
                if (sgn(q0_3(i, j)) != 0) {
                    throw InternalError("coordinate pattern is not totally isotropic for q0");
                }
            }
        }
        RatMatrix span(pattern.size(), n);
        for (std::size_t k = 0; k < pattern.size(); ++k) {
            span.set_row(k, p3.row(pattern[k]));
        }
        return {use_z ? "z-pattern" : "y-pattern", span};
    };
    auto flag_rows = [&](const std::string& label, std::vector<RatVec> base,
                         bool pick_by_sign) -> std::pair<std::string, RatMatrix> {
        std::vector<RatVec> fl = detail::short_isotropic_flag(q0, base, 4, oracle);
        RatVec lead = base.front();
        if (pick_by_sign) {
            lead = sgn(evaluate_form(q1, fl.front())) > 0 ? z : y;
        }
        fl.insert(fl.begin(), lead);
        return {label, RatMatrix::from_rows(fl)};
    };
    struct Candidate {
        std::string name;
        std::function<std::pair<std::string, RatMatrix>()> rows;
        bool guaranteed;
    };
    const std::vector<Candidate> candidates{
        {"pattern", pattern_rows, true},
        {"y-flag", [&] { return flag_rows("y-flag", {y}, false); }, false},
        {"z-flag", [&] { return flag_rows("z-flag", {z}, false); }, false},
        {"yz-flag", [&] { return flag_rows("yz-flag", {y, z}, true); }, true},
    };
    std::string failures;
    for (const Candidate& cand : candidates) {
        std::string label = cand.name;
        try {
            auto [name, rows] = cand.rows();
            label = name;
            RatMatrix w5 = detail::saturated_basis(rows);
            const RatMatrix h0 = congruence(w5, q0.matrix());
            for (const Rat& v : h0.data()) {
                if (sgn(v) != 0) {
                    throw InternalError("restricted subspace is not totally isotropic for q0");
                }
            }
            SymMatrix g(congruence(w5, q1.matrix()));
            std::string how;
            std::optional<RatVec> x5 = detail::restricted_zero(g, oracle, how);
            if (!x5) {
                if (cand.guaranteed) {
                    throw InternalError("restricted q1 is definite on the " + label);
                }
                failures += (failures.empty() ? "" : "; ") + label + ": definite";
                continue;
            }
            stages.push_back({"restricted-solve", label + " " + how, std::nullopt, *x5, w5});
            return detail::finish(q0_in, q1_in, row_times(*x5, w5), std::move(stages));
        } catch (const OracleBudgetExhausted& e) {
            failures += (failures.empty() ? "" : "; ") + label + ": " + e.what();
            if (&cand == &candidates.back()) {
                throw OracleBudgetExhausted("restricted solve failed on every subspace (" + failures + ")",
                                            e.searched_bound, e.nodes);
            }
        } catch (const OracleFailure& e) {
            // An external solver that gives up on one subspace may still answer on the next.
            failures += (failures.empty() ? "" : "; ") + label + ": " + e.what();
            if (&cand == &candidates.back()) {
                throw OracleFailure("restricted solve failed on every subspace (" + failures + ")", e.stderr_text);
            }
        }
    }
    throw OracleBudgetExhausted("restricted solve failed on every subspace (" + failures + ")", 0, 0);
}

/// Recomputes the solution from the recorded stages; true when it matches cert.x.
inline bool replay_transcript(const SolutionCertificate& cert) {
    const TranscriptStage* last_vector = nullptr;
    for (const TranscriptStage& st : cert.transcript) {
        if (st.name == "result") {
            break;
        }
        if (st.vector) {
            last_vector = &st;
        }
    }
    if (!last_vector) {
        return false;
    }
    RatVec x = *last_vector->vector;
    if (last_vector->transform) {
        x = row_times(x, *last_vector->transform);
    }
    return content_normalized(x) == cert.x && transcript_digest(cert.transcript) == cert.digest;
}

}  // namespace twoquad

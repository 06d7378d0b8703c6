#pragma once

#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "twoquad/inertia.hpp"
#include "twoquad/poly.hpp"

namespace twoquad {

/// Delta(lambda) = det(lambda Q0 + Q1), by exact evaluation at lambda = 0..n and interpolation.
inline Poly pencil_determinant(const SymMatrix& q0, const SymMatrix& q1) {
    if (q0.n() != q1.n()) {
        throw DimensionMismatch("pencil of forms of different sizes");
    }
    const std::size_t n = q0.n();
    std::vector<Rat> nodes(n + 1);
    std::vector<Rat> dd(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        nodes[k] = static_cast<long>(k);
        dd[k] = determinant(pencil_member(q0, q1, nodes[k]).matrix());
    }
    // Newton divided differences, then expansion to monomial coefficients.
    for (std::size_t level = 1; level <= n; ++level) {
        for (std::size_t k = n; k >= level; --k) {
            dd[k] = (dd[k] - dd[k - 1]) / (nodes[k] - nodes[k - level]);
        }
    }
    Poly acc = Poly::constant(dd[n]);
    for (std::size_t k = n; k-- > 0;) {
        acc = acc * Poly{-nodes[k], Rat(1)} + Poly::constant(dd[k]);
    }
    return acc;
}

inline Signature signature_at(const SymMatrix& q0, const SymMatrix& q1, const Rat& lambda) {
    return inertia(pencil_member(q0, q1, lambda));
}

struct SmoothnessReport {
    bool holds = false;
    bool det_q0_nonzero = false;
    bool det_q1_nonzero = false;
    bool delta_squarefree = false;
    Poly delta;
    std::string reason;
};

/// Hypothesis H: det(Q0) != 0, det(Q1) != 0 and Delta squarefree.
inline SmoothnessReport check_hypothesis_h(const SymMatrix& q0, const SymMatrix& q1) {
    if (q0.n() != q1.n()) {
        throw DimensionMismatch("forms of different sizes");
    }
    SmoothnessReport rep;
    rep.delta = pencil_determinant(q0, q1);
    rep.det_q0_nonzero = sgn(rep.delta.leading()) != 0 && rep.delta.degree() == static_cast<int>(q0.n());
    rep.det_q1_nonzero = sgn(rep.delta.coeff(0)) != 0;
    rep.delta_squarefree = !rep.delta.is_zero() && is_squarefree(rep.delta);
    if (!rep.det_q0_nonzero) {
        rep.reason = "det(Q0)=0";
    } else if (!rep.det_q1_nonzero) {
        rep.reason = "det(Q1)=0";
    } else if (!rep.delta_squarefree) {
        rep.reason = "Δ not squarefree";
    }
    rep.holds = rep.det_q0_nonzero && rep.det_q1_nonzero && rep.delta_squarefree;
    return rep;
}

inline void require_hypothesis_h(const SymMatrix& q0, const SymMatrix& q1) {
    SmoothnessReport rep = check_hypothesis_h(q0, q1);
    if (!rep.holds) {
        throw HypothesisViolation("hypothesis H fails: " + rep.reason);
    }
}

struct BasepointShift {
    SymMatrix q0;
    SymMatrix q1;
    /// New Q0 = Q0 + c0 Q1, then new Q1 = Q1 + c1 (new Q0). Common zeros are unchanged.
    Rat c0;
    Rat c1;
};

/// Replaces degenerate members of the pair by nondegenerate combinations.
inline BasepointShift pencil_basepoint_shift(const SymMatrix& q0, const SymMatrix& q1) {
    Poly delta = pencil_determinant(q0, q1);
    if (delta.is_zero()) {
        throw PreconditionViolation("degenerate pencil: det(lambda Q0 + Q1) is identically zero");
    }
    auto candidates = [](long k) { return Rat((k + 1) / 2 * (k % 2 == 1 ? 1 : -1)); };
    BasepointShift out{q0, q1, Rat(0), Rat(0)};
    if (sgn(determinant(out.q0.matrix())) == 0) {
        for (long k = 1;; ++k) {
            Rat c = candidates(k);
            SymMatrix cand = pencil_member(q1, q0, c);
            if (sgn(determinant(cand.matrix())) != 0) {
                out.q0 = cand;
                out.c0 = c;
                break;
            }
        }
    }
    if (sgn(determinant(out.q1.matrix())) == 0) {
        for (long k = 1;; ++k) {
            Rat c = candidates(k);
            SymMatrix cand = pencil_member(out.q0, out.q1, c);
            if (sgn(determinant(cand.matrix())) != 0) {
                out.q1 = cand;
                out.c1 = c;
                break;
            }
        }
    }
    return out;
}

/// Segment and root signatures of lambda Q0 + Q1 along the real line.
struct PencilProfile {
    int n = 0;
    Poly delta;
    std::vector<IsolatingInterval> roots;
    /// Rational sample point of each open segment; front/back are the unbounded ends.
    std::vector<Rat> sample_points;
    std::vector<Signature> segments;
    std::vector<Signature> at_roots;

    int m() const { return static_cast<int>(roots.size()); }
};

/// Simplest rational (smallest denominator, then numerator) strictly between a and b, a < b.
inline Rat simplest_between(const Rat& a, const Rat& b) {
    Int fl = floor_rat(a) + 1;
    if (Rat(fl) < b) {
        // An integer fits; pick the one nearest to zero.
        if (sgn(a) < 0 && sgn(b) > 0) {
            return 0;
        }
        if (sgn(a) >= 0) {
            return Rat(fl);
        }
        Int c = -floor_rat(-b) - 1;  // largest integer < b
        return Rat(c);
    }
    // Stern-Brocot descent.
    Int pl = 0, ql = 1, pr = 1, qr = 0;
    Int base = floor_rat(a);
    Rat a0 = a - base;
    Rat b0 = b - base;
    while (true) {
        Int pm = pl + pr;
        Int qm = ql + qr;
        Rat med(pm, qm);
        med.canonicalize();
        if (med <= a0) {
            pl = pm;
            ql = qm;
        } else if (med >= b0) {
            pr = pm;
            qr = qm;
        } else {
            return med + base;
        }
    }
}

namespace detail {

inline std::vector<Rat> segment_samples(const std::vector<IsolatingInterval>& roots, const Rat& bound) {
    std::vector<Rat> pts;
    if (roots.empty()) {
        pts.push_back(0);
        return pts;
    }
    pts.push_back(-bound);
    for (std::size_t i = 0; i + 1 < roots.size(); ++i) {
        const Rat& a = roots[i].hi;
        const Rat& b = roots[i + 1].lo;
        // Endpoints are not roots, so the closed gap [a, b] is root-free.
        pts.push_back(a == b ? a : simplest_between(a, b));
    }
    pts.push_back(bound);
    return pts;
}

}  // namespace detail

inline PencilProfile signature_profile(const SymMatrix& q0, const SymMatrix& q1) {
    require_hypothesis_h(q0, q1);
    PencilProfile prof;
    prof.n = static_cast<int>(q0.n());
    prof.delta = pencil_determinant(q0, q1);
    prof.roots = isolate_real_roots(prof.delta);
    const Rat bound = cauchy_bound(prof.delta) + 1;
    prof.sample_points = detail::segment_samples(prof.roots, bound);
    for (const Rat& t : prof.sample_points) {
        prof.segments.push_back(signature_at(q0, q1, t));
    }
    for (std::size_t i = 0; i < prof.roots.size(); ++i) {
        const Signature& lo = prof.segments[i];
        const Signature& hi = prof.segments[i + 1];
        if (hi.r - lo.r != -(hi.s - lo.s) || std::abs(hi.d() - lo.d()) != 2) {
            throw InternalError("signature jump across a simple root is not +-2");
        }
        // One eigenvalue crosses zero: the root signature keeps the common part.
        Signature at{std::min(lo.r, hi.r), std::min(lo.s, hi.s)};
        if (prof.roots[i].exact() && signature_at(q0, q1, *prof.roots[i].rational_root) != at) {
            throw InternalError("signature at a rational root disagrees with its neighbours");
        }
        prof.at_roots.push_back(at);
    }
    if (prof.segments.front().d() != -prof.segments.back().d()) {
        throw InternalError("d(-inf) != -d(+inf)");
    }
    return prof;
}

/// A rational lambda with lambda Q0 + Q1 definite, if one exists.
inline std::optional<Rat> find_definite_lambda(const SymMatrix& q0, const SymMatrix& q1) {
    require_hypothesis_h(q0, q1);
    const int n = static_cast<int>(q0.n());
    Poly delta = pencil_determinant(q0, q1);
    std::vector<IsolatingInterval> roots = isolate_real_roots(delta);
    if (static_cast<int>(roots.size()) != n) {
        return std::nullopt;
    }
    const Rat a = cauchy_bound(delta);
    std::vector<Rat> samples = detail::segment_samples(roots, a + 1);
    Signature ends = signature_at(q0, q1, -a);
    // With [r,s] at -a, the positive definite candidate is the segment after s roots
    // and the negative definite one the segment after r roots.
    for (int k : {ends.s, ends.r}) {
        const Rat& t = samples.at(static_cast<std::size_t>(k));
        if (signature_at(q0, q1, t).definite(n)) {
            return t;
        }
    }
    return std::nullopt;
}

struct SolvabilityReport {
    bool solvable_over_r = false;
    std::optional<Rat> definite_lambda;
    Signature witness_signature;
    bool hypothesis_h = false;
    std::string hypothesis_reason;
};

/// Whether q0 = q1 = 0 has a nonzero real solution (n >= 3).
inline SolvabilityReport is_real_solvable(const SymMatrix& q0, const SymMatrix& q1) {
    if (q0.n() != q1.n()) {
        throw DimensionMismatch("forms of different sizes");
    }
    if (q0.n() < 3) {
        throw PreconditionViolation("real solvability is decided from the pencil only for n >= 3");
    }
    SolvabilityReport rep;
    SmoothnessReport h = check_hypothesis_h(q0, q1);
    rep.hypothesis_h = h.holds;
    rep.hypothesis_reason = h.reason;
    if (!h.holds) {
        return rep;
    }
    rep.definite_lambda = find_definite_lambda(q0, q1);
    if (rep.definite_lambda) {
        rep.witness_signature = signature_at(q0, q1, *rep.definite_lambda);
        rep.solvable_over_r = false;
    } else {
        rep.solvable_over_r = true;
    }
    return rep;
}

/// Mediant (p+r)/(q+s) of two rationals in lowest terms.
inline Rat mediant(const Rat& a, const Rat& b) {
    Rat m(a.get_num() + b.get_num(), a.get_den() + b.get_den());
    m.canonicalize();
    return m;
}

struct BalancedLambda {
    Rat lambda;
    int steps = 0;
};

/// Dichotomy for a rational lambda with |r - s| <= 1 and det(lambda Q0 + Q1) != 0.
/// Simplest rational in the open segment between consecutive real roots of delta containing x,
/// where delta(x) != 0.
inline Rat simplest_in_segment(const Poly& delta, const Rat& x) {
    std::optional<Rat> left;
    std::optional<Rat> right;
    for (IsolatingInterval iv : isolate_real_roots(delta)) {
        while (iv.lo <= x && x <= iv.hi) {
            iv = refine_interval(iv, iv.width() / 2);
        }
        if (iv.hi < x) {
            left = left ? std::max(*left, iv.hi) : iv.hi;
        } else {
            right = right ? std::min(*right, iv.lo) : iv.lo;
        }
    }
    if (!left && !right) {
        return 0;
    }
    const Rat lo = left ? *left : Rat(floor_rat(*right) - 2);
    const Rat hi = right ? *right : Rat(floor_rat(*left) + 2);
    return simplest_between(lo, hi);
}

inline BalancedLambda find_balanced_lambda_traced(const SymMatrix& q0, const SymMatrix& q1) {
    require_hypothesis_h(q0, q1);
    Poly delta = pencil_determinant(q0, q1);
    // An integer bound keeps every midpoint dyadic.
    const Rat a = Rat(-floor_rat(-cauchy_bound(delta)));
    Rat lmax = a + 1;
    Rat lmin = -lmax;
    Rat lb = 0;
    int d_min = signature_at(q0, q1, lmin).d();
    const long cap = 64 + static_cast<long>(bit_size(a));
    for (int step = 0; step <= cap; ++step) {
        if (delta.sign_at(lb) == 0) {
            lb = mediant(lb, lmax);
            continue;
        }
        const int d = signature_at(q0, q1, lb).d();
        if (std::abs(d) <= 1) {
            // Every point of the segment has the same signature; the smallest height is kept.
            return {simplest_in_segment(delta, lb), step};
        }
        if ((d > 0 && d_min < 0) || (d < 0 && d_min > 0)) {
            lmax = lb;
        } else {
            lmin = lb;
            d_min = d;
        }
        lb = (lmin + lmax) / 2;
    }
    throw InternalError("balanced lambda dichotomy exceeded its step cap");
}

inline Rat find_balanced_lambda(const SymMatrix& q0, const SymMatrix& q1) {
    return find_balanced_lambda_traced(q0, q1).lambda;
}

}  // namespace twoquad

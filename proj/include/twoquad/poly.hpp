#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "twoquad/rational.hpp"

namespace twoquad {

/// Univariate polynomial over Q, coefficients from degree 0 upward, no trailing zeros.
class Poly {
public:
    Poly() = default;
    explicit Poly(std::vector<Rat> coeffs) : c_(std::move(coeffs)) { trim(); }
    Poly(std::initializer_list<Rat> coeffs) : c_(coeffs) { trim(); }

    static Poly constant(const Rat& a) { return Poly(std::vector<Rat>{a}); }
    static Poly x() { return Poly(std::vector<Rat>{Rat(0), Rat(1)}); }

    bool is_zero() const { return c_.empty(); }
    /// Degree, -1 for the zero polynomial.
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    const std::vector<Rat>& coeffs() const { return c_; }
    Rat coeff(int i) const { return i >= 0 && i < static_cast<int>(c_.size()) ? c_[static_cast<std::size_t>(i)] : Rat(0); }
    Rat leading() const { return c_.empty() ? Rat(0) : c_.back(); }

    Rat eval(const Rat& x) const {
        Rat acc = 0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
            acc = acc * x + *it;
        }
        return acc;
    }

    /// Sign of p(x) computed on the integer-cleared polynomial.
    int sign_at(const Rat& x) const { return sgn(eval(x)); }

    Poly derivative() const {
        std::vector<Rat> d;
        for (std::size_t i = 1; i < c_.size(); ++i) {
            d.push_back(c_[i] * static_cast<long>(i));
        }
        return Poly(std::move(d));
    }

    Poly monic() const {
        if (is_zero()) {
            return *this;
        }
        Rat lc = leading();
        std::vector<Rat> d = c_;
        for (Rat& x : d) {
            x /= lc;
        }
        return Poly(std::move(d));
    }

    /// Positive multiple with integer coprime coefficients.
    Poly primitive() const {
        if (is_zero()) {
            return *this;
        }
        IntVec z = primitive_integer(c_);
        return Poly(to_rat(z));
    }

    friend Poly operator+(const Poly& a, const Poly& b) {
        std::vector<Rat> r(std::max(a.c_.size(), b.c_.size()), Rat(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i) {
            r[i] += a.c_[i];
        }
        for (std::size_t i = 0; i < b.c_.size(); ++i) {
            r[i] += b.c_[i];
        }
        return Poly(std::move(r));
    }
    friend Poly operator-(const Poly& a) {
        std::vector<Rat> r = a.c_;
        for (Rat& x : r) {
            x = -x;
        }
        return Poly(std::move(r));
    }
    friend Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }
    friend Poly operator*(const Poly& a, const Poly& b) {
        if (a.is_zero() || b.is_zero()) {
            return Poly();
        }
        std::vector<Rat> r(a.c_.size() + b.c_.size() - 1, Rat(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i) {
            for (std::size_t j = 0; j < b.c_.size(); ++j) {
                r[i + j] += a.c_[i] * b.c_[j];
            }
        }
        return Poly(std::move(r));
    }
    friend Poly operator*(const Rat& s, const Poly& a) {
        std::vector<Rat> r = a.c_;
        for (Rat& x : r) {
            x *= s;
        }
        return Poly(std::move(r));
    }
    friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }

    /// Euclidean division: a = q b + r with deg r < deg b.
    static std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b) {
        if (b.is_zero()) {
            throw PreconditionViolation("polynomial division by zero");
        }
        std::vector<Rat> r = a.c_;
        const int db = b.degree();
        std::vector<Rat> q(a.degree() >= db ? static_cast<std::size_t>(a.degree() - db + 1) : 0, Rat(0));
        const Rat lb = b.leading();
        for (int k = a.degree(); k >= db; --k) {
            const Rat f = r[static_cast<std::size_t>(k)] / lb;
            q[static_cast<std::size_t>(k - db)] = f;
            if (sgn(f) == 0) {
                continue;
            }
            for (int j = 0; j <= db; ++j) {
                r[static_cast<std::size_t>(k - db + j)] -= f * b.c_[static_cast<std::size_t>(j)];
            }
        }
        return {Poly(std::move(q)), Poly(std::move(r))};
    }

    std::string str(const std::string& var = "x") const {
        if (is_zero()) {
            return "0";
        }
        std::string out;
        for (int i = degree(); i >= 0; --i) {
            const Rat& a = c_[static_cast<std::size_t>(i)];
            if (sgn(a) == 0) {
                continue;
            }
            if (!out.empty()) {
                out += sgn(a) > 0 ? " + " : " - ";
            } else if (sgn(a) < 0) {
                out += "-";
            }
            Rat m = abs_rat(a);
            if (i == 0 || m != 1) {
                out += m.get_str();
            }
            if (i >= 1) {
                out += (i == 0 || m != 1) ? "*" + var : var;
            }
            if (i >= 2) {
                out += "^" + std::to_string(i);
            }
        }
        return out;
    }

private:
    void trim() {
        while (!c_.empty() && sgn(c_.back()) == 0) {
            c_.pop_back();
        }
    }
    std::vector<Rat> c_;
};

inline Poly poly_gcd(Poly a, Poly b) {
    while (!b.is_zero()) {
        Poly r = Poly::divmod(a, b).second;
        a = std::move(b);
        b = r.monic();
    }
    return a.monic();
}

inline bool is_squarefree(const Poly& p) {
    if (p.degree() <= 0) {
        return true;
    }
    return poly_gcd(p, p.derivative()).degree() == 0;
}

/// 1 + max |a_i / a_d|: every complex root has modulus below this bound.
inline Rat cauchy_bound(const Poly& p) {
    if (p.degree() < 1) {
        throw PreconditionViolation("Cauchy bound of a constant polynomial");
    }
    const Rat lc = abs_rat(p.leading());
    Rat m = 0;
    for (int i = 0; i < p.degree(); ++i) {
        Rat v = abs_rat(p.coeff(i)) / lc;
        if (v > m) {
            m = v;
        }
    }
    return m + 1;
}

class SturmSequence {
public:
    explicit SturmSequence(const Poly& p) {
        if (p.is_zero()) {
            throw PreconditionViolation("Sturm sequence of the zero polynomial");
        }
        seq_.push_back(p.primitive());
        Poly d = p.derivative();
        if (d.is_zero()) {
            return;
        }
        seq_.push_back(d.primitive());
        while (true) {
            Poly r = Poly::divmod(seq_[seq_.size() - 2], seq_.back()).second;
            if (r.is_zero()) {
                break;
            }
            seq_.push_back((-r).primitive());
        }
    }

    const std::vector<Poly>& polys() const { return seq_; }

    /// Number of sign changes at x, zeros skipped.
    int variations(const Rat& x) const {
        int v = 0;
        int last = 0;
        for (const Poly& q : seq_) {
            int s = q.sign_at(x);
            if (s == 0) {
                continue;
            }
            if (last != 0 && s != last) {
                ++v;
            }
            last = s;
        }
        return v;
    }

    /// Distinct real roots in the half-open interval (a, b].
    int count(const Rat& a, const Rat& b) const { return variations(a) - variations(b); }

private:
    std::vector<Poly> seq_;
};

/// Rational interval ]lo, hi[ containing exactly one real root of a squarefree polynomial.
/// Endpoints are never roots. A root known to be rational is also stored exactly.
struct IsolatingInterval {
    Rat lo;
    Rat hi;
    std::shared_ptr<const Poly> poly;
    std::optional<Rat> rational_root;

    bool exact() const { return rational_root.has_value(); }
    Rat width() const { return hi - lo; }
};

namespace detail {

/// A rational root of an integer polynomial with leading coefficient c is k/c for an integer k.
/// Once the interval is narrower than 1/c there is at most one candidate.
inline std::optional<Rat> rational_root_in(const Poly& prim, const Rat& lo, const Rat& hi) {
    const Int lc = abs(prim.leading().get_num());
    Rat scaled_lo = lo * lc;
    Int k = floor_rat(scaled_lo) + 1;
    Rat cand(k, lc);
    cand.canonicalize();
    if (cand > lo && cand < hi && prim.sign_at(cand) == 0) {
        return cand;
    }
    return std::nullopt;
}

}  // namespace detail

/// Shrinks an isolating interval by bisection until its width is at most `width`.
inline IsolatingInterval refine_interval(IsolatingInterval iv, const Rat& width) {
    const Poly& p = *iv.poly;
    if (iv.exact()) {
        const Rat r = *iv.rational_root;
        while (iv.hi - iv.lo > width) {
            iv.lo = (iv.lo + r) / 2;
            iv.hi = (iv.hi + r) / 2;
        }
        return iv;
    }
    int slo = p.sign_at(iv.lo);
    while (iv.hi - iv.lo > width) {
        Rat mid = (iv.lo + iv.hi) / 2;
        int sm = p.sign_at(mid);
        if (sm == 0) {
            iv.rational_root = mid;
            return refine_interval(iv, width);
        }
        if (sm == slo) {
            iv.lo = mid;
        } else {
            iv.hi = mid;
        }
    }
    return iv;
}

/// Isolates all real roots of a squarefree polynomial, in increasing order.
inline std::vector<IsolatingInterval> isolate_real_roots(const Poly& p) {
    if (p.is_zero()) {
        throw PreconditionViolation("root isolation of the zero polynomial");
    }
    if (!is_squarefree(p)) {
        throw PreconditionViolation("root isolation requires a squarefree polynomial");
    }
    std::vector<IsolatingInterval> out;
    if (p.degree() < 1) {
        return out;
    }
    auto prim = std::make_shared<const Poly>(p.primitive());
    SturmSequence sturm(*prim);
    const Rat bound = cauchy_bound(*prim) + 1;

    struct Job {
        Rat lo;
        Rat hi;
        int vlo;
        int vhi;
    };
    std::vector<Job> stack{{-bound, bound, sturm.variations(-bound), sturm.variations(bound)}};
    while (!stack.empty()) {
        Job j = stack.back();
        stack.pop_back();
        const int k = j.vlo - j.vhi;
        if (k == 0) {
            continue;
        }
        if (k == 1) {
            // Endpoints are never roots: the starting bounds exceed every root and
            // split points that hit a root are moved away below.
            out.push_back({j.lo, j.hi, prim, std::nullopt});
            continue;
        }
        Rat mid = (j.lo + j.hi) / 2;
        Rat step = (j.hi - j.lo) / 4;
        while (prim->sign_at(mid) == 0) {
            step /= 2;
            mid += step;
        }
        const int vm = sturm.variations(mid);
        stack.push_back({mid, j.hi, vm, j.vhi});
        stack.push_back({j.lo, mid, j.vlo, vm});
    }
    std::sort(out.begin(), out.end(), [](const IsolatingInterval& a, const IsolatingInterval& b) { return a.lo < b.lo; });
    const Rat fine(1, abs(prim->leading().get_num()) + 1);
    for (IsolatingInterval& iv : out) {
        iv = refine_interval(iv, fine);
        if (iv.exact()) {
            continue;
        }
        iv.rational_root = detail::rational_root_in(*prim, iv.lo, iv.hi);
    }
    return out;
}

/// Number of distinct real roots of a squarefree polynomial.
inline int count_real_roots(const Poly& p) {
    if (p.degree() < 1) {
        return 0;
    }
    SturmSequence s(p);
    const Rat b = cauchy_bound(p) + 1;
    return s.count(-b, b);
}

}  // namespace twoquad

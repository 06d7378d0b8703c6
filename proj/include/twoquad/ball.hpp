#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>

#include <gmpxx.h>
#include <mpfr.h>

#include "twoquad/errors.hpp"
#include "twoquad/rational.hpp"

namespace twoquad {

namespace detail {

/// Owning wrapper around mpfr_t.
class Mpfr {
public:
    explicit Mpfr(mpfr_prec_t prec = 64) {
        mpfr_init2(v_, prec);
        mpfr_set_zero(v_, 1);
    }
    Mpfr(const Mpfr& o) {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    Mpfr(Mpfr&& o) noexcept {
        mpfr_init2(v_, MPFR_PREC_MIN);
        mpfr_swap(v_, o.v_);
    }
    Mpfr& operator=(const Mpfr& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    Mpfr& operator=(Mpfr&& o) noexcept {
        mpfr_swap(v_, o.v_);
        return *this;
    }
    ~Mpfr() { mpfr_clear(v_); }

    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }
    mpfr_prec_t prec() const { return mpfr_get_prec(v_); }
    bool is_zero() const { return mpfr_zero_p(v_) != 0; }
    int sign() const { return mpfr_sgn(v_); }

private:
    mpfr_t v_;
};

/// Radii are kept at this precision and always rounded upward.
inline constexpr mpfr_prec_t kRadiusPrec = 64;

inline std::uint64_t next_node() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1, std::memory_order_relaxed);
}

inline thread_local long working_bits = 64;

}  // namespace detail

/// Sets the precision used for constants converted to balls in the current thread.
class PrecisionScope {
public:
    explicit PrecisionScope(long bits) : saved_(detail::working_bits) {
        detail::working_bits = std::max<long>(bits, 2);
    }
    ~PrecisionScope() { detail::working_bits = saved_; }
    PrecisionScope(const PrecisionScope&) = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;

private:
    long saved_;
};

inline long working_precision() { return detail::working_bits; }

struct PrecisionPolicy {
    long initial_bits = 64;
    long max_bits = 16384;
    long growth = 2;
    /// Residual target for enclosures that are refined until they are tight enough.
    int target_residual_bits = 40;
};

/// Real interval [mid - rad, mid + rad] with an MPFR midpoint and an upward-rounded radius.
/// A ball with mid = rad = 0 is an exact (structural) zero. Values carry a node tag:
/// a - a and a + (-a) on the same node give an exact zero.
class RealBall {
public:
    RealBall() : mid_(MPFR_PREC_MIN), rad_(detail::kRadiusPrec), node_(0), negated_(false) {}

    RealBall(long v) : RealBall(Rat(v)) {}
    RealBall(int v) : RealBall(Rat(v)) {}

    explicit RealBall(const Rat& q, long prec = working_precision())
        : mid_(prec), rad_(detail::kRadiusPrec), node_(detail::next_node()), negated_(false) {
        int t = mpfr_set_q(mid_.get(), q.get_mpq_t(), MPFR_RNDN);
        add_rounding(t);
    }

    /// Ball [lo, hi] at the given precision.
    static RealBall from_interval(const Rat& lo, const Rat& hi, long prec = working_precision()) {
        if (hi < lo) {
            throw PreconditionViolation("empty interval");
        }
        RealBall b((lo + hi) / 2, prec);
        detail::Mpfr half(detail::kRadiusPrec);
        Rat h = (hi - lo) / 2;
        mpfr_set_q(half.get(), h.get_mpq_t(), MPFR_RNDU);
        mpfr_add(b.rad_.get(), b.rad_.get(), half.get(), MPFR_RNDU);
        return b;
    }

    /// Ball with a given midpoint and additional radius.
    static RealBall with_radius(const Rat& mid, const Rat& rad, long prec = working_precision()) {
        RealBall b(mid, prec);
        detail::Mpfr r(detail::kRadiusPrec);
        mpfr_set_q(r.get(), abs_rat(rad).get_mpq_t(), MPFR_RNDU);
        mpfr_add(b.rad_.get(), b.rad_.get(), r.get(), MPFR_RNDU);
        return b;
    }

    long prec() const { return static_cast<long>(mid_.prec()); }
    bool exact_zero() const { return mid_.is_zero() && rad_.is_zero(); }
    bool exact() const { return rad_.is_zero(); }
    bool contains_zero() const {
        if (exact_zero()) {
            return true;
        }
        detail::Mpfr a(detail::kRadiusPrec);
        mpfr_abs(a.get(), mid_.get(), MPFR_RNDD);
        return mpfr_cmp(a.get(), rad_.get()) <= 0;
    }

    /// +1 or -1 when the sign is certified, 0 for an exact zero, nullopt otherwise.
    std::optional<int> certified_sign() const {
        if (exact_zero()) {
            return 0;
        }
        if (contains_zero()) {
            return std::nullopt;
        }
        return mid_.sign();
    }
    bool certainly_positive() const { return certified_sign() == 1; }
    bool certainly_negative() const { return certified_sign() == -1; }
    bool certainly_nonzero() const {
        auto s = certified_sign();
        return s.has_value() && *s != 0;
    }

    bool contains(const Rat& q) const {
        Rat lo, hi;
        bounds(lo, hi);
        return lo <= q && q <= hi;
    }

    /// Exact rational lower and upper bounds.
    void bounds(Rat& lo, Rat& hi) const {
        Rat m = mid();
        Rat r = radius();
        lo = m - r;
        hi = m + r;
    }

    Rat mid() const {
        Rat q;
        mpfr_get_q(q.get_mpq_t(), mid_.get());
        return q;
    }
    Rat radius() const {
        Rat q;
        mpfr_get_q(q.get_mpq_t(), rad_.get());
        return q;
    }
    double mid_double() const { return mpfr_get_d(mid_.get(), MPFR_RNDN); }
    double rad_double() const { return mpfr_get_d(rad_.get(), MPFR_RNDU); }

    /// Upper bound of |x|.
    Rat mag() const { return abs_rat(mid()) + radius(); }
    /// Lower bound of |x| (0 if the ball contains zero).
    Rat mig() const {
        if (contains_zero()) {
            return 0;
        }
        return abs_rat(mid()) - radius();
    }
    double log2_mag() const {
        if (exact_zero()) {
            return -INFINITY;
        }
        detail::Mpfr a(detail::kRadiusPrec);
        mpfr_abs(a.get(), mid_.get(), MPFR_RNDU);
        mpfr_add(a.get(), a.get(), rad_.get(), MPFR_RNDU);
        return mpfr_zero_p(a.get()) ? -INFINITY : std::log2(mpfr_get_d(a.get(), MPFR_RNDU));
    }
    double log2_rad() const {
        return rad_.is_zero() ? -INFINITY : std::log2(mpfr_get_d(rad_.get(), MPFR_RNDU));
    }

    std::uint64_t node() const { return node_; }
    bool negated() const { return negated_; }

    std::string str() const {
        char buf[128];
        mpfr_snprintf(buf, sizeof buf, "[%.17Rg +/- %.3Rg]", mid_.get(), rad_.get());
        return buf;
    }

    const detail::Mpfr& mid_mpfr() const { return mid_; }
    const detail::Mpfr& rad_mpfr() const { return rad_; }

    friend RealBall operator-(const RealBall& a) {
        RealBall r = a;
        mpfr_neg(r.mid_.get(), r.mid_.get(), MPFR_RNDN);
        r.negated_ = !r.negated_;
        return r;
    }

    friend RealBall operator+(const RealBall& a, const RealBall& b) {
        if (a.exact_zero()) {
            return b;
        }
        if (b.exact_zero()) {
            return a;
        }
        if (a.node_ == b.node_ && a.negated_ != b.negated_) {
            return RealBall();
        }
        RealBall r(fresh{}, std::max(a.prec(), b.prec()));
        int t = mpfr_add(r.mid_.get(), a.mid_.get(), b.mid_.get(), MPFR_RNDN);
        mpfr_add(r.rad_.get(), a.rad_.get(), b.rad_.get(), MPFR_RNDU);
        r.add_rounding(t);
        return r;
    }

    friend RealBall operator-(const RealBall& a, const RealBall& b) {
        if (b.exact_zero()) {
            return a;
        }
        if (a.exact_zero()) {
            return -b;
        }
        if (a.node_ == b.node_ && a.negated_ == b.negated_) {
            return RealBall();
        }
        RealBall r(fresh{}, std::max(a.prec(), b.prec()));
        int t = mpfr_sub(r.mid_.get(), a.mid_.get(), b.mid_.get(), MPFR_RNDN);
        mpfr_add(r.rad_.get(), a.rad_.get(), b.rad_.get(), MPFR_RNDU);
        r.add_rounding(t);
        return r;
    }

    friend RealBall operator*(const RealBall& a, const RealBall& b) {
        if (a.exact_zero() || b.exact_zero()) {
            return RealBall();
        }
        RealBall r(fresh{}, std::max(a.prec(), b.prec()));
        int t = mpfr_mul(r.mid_.get(), a.mid_.get(), b.mid_.get(), MPFR_RNDN);
        if (!a.rad_.is_zero() || !b.rad_.is_zero()) {
            detail::Mpfr am(detail::kRadiusPrec), bm(detail::kRadiusPrec), x(detail::kRadiusPrec);
            mpfr_abs(am.get(), a.mid_.get(), MPFR_RNDU);
            mpfr_abs(bm.get(), b.mid_.get(), MPFR_RNDU);
            mpfr_mul(x.get(), am.get(), b.rad_.get(), MPFR_RNDU);
            mpfr_add(r.rad_.get(), r.rad_.get(), x.get(), MPFR_RNDU);
            mpfr_mul(x.get(), bm.get(), a.rad_.get(), MPFR_RNDU);
            mpfr_add(r.rad_.get(), r.rad_.get(), x.get(), MPFR_RNDU);
            mpfr_mul(x.get(), a.rad_.get(), b.rad_.get(), MPFR_RNDU);
            mpfr_add(r.rad_.get(), r.rad_.get(), x.get(), MPFR_RNDU);
        }
        r.add_rounding(t);
        return r;
    }

    friend RealBall operator/(const RealBall& a, const RealBall& b) {
        if (b.contains_zero()) {
            throw BallDivisionByZero();
        }
        if (a.exact_zero()) {
            return RealBall();
        }
        if (a.node_ == b.node_ && !b.exact()) {
            RealBall one(fresh{}, std::max(a.prec(), b.prec()));
            mpfr_set_si(one.mid_.get(), a.negated_ == b.negated_ ? 1 : -1, MPFR_RNDN);
            return one;
        }
        RealBall r(fresh{}, std::max(a.prec(), b.prec()));
        int t = mpfr_div(r.mid_.get(), a.mid_.get(), b.mid_.get(), MPFR_RNDN);
        if (!a.rad_.is_zero() || !b.rad_.is_zero()) {
            detail::Mpfr am(detail::kRadiusPrec), bm(detail::kRadiusPrec), bl(detail::kRadiusPrec),
                num(detail::kRadiusPrec), x(detail::kRadiusPrec), den(detail::kRadiusPrec);
            mpfr_abs(am.get(), a.mid_.get(), MPFR_RNDU);
            mpfr_abs(bm.get(), b.mid_.get(), MPFR_RNDU);
            mpfr_mul(num.get(), am.get(), b.rad_.get(), MPFR_RNDU);
            mpfr_mul(x.get(), bm.get(), a.rad_.get(), MPFR_RNDU);
            mpfr_add(num.get(), num.get(), x.get(), MPFR_RNDU);
            mpfr_abs(bl.get(), b.mid_.get(), MPFR_RNDD);
            mpfr_sub(den.get(), bl.get(), b.rad_.get(), MPFR_RNDD);
            mpfr_mul(den.get(), den.get(), bl.get(), MPFR_RNDD);
            if (mpfr_sgn(den.get()) <= 0) {
                throw BallDivisionByZero();
            }
            mpfr_div(x.get(), num.get(), den.get(), MPFR_RNDU);
            mpfr_add(r.rad_.get(), r.rad_.get(), x.get(), MPFR_RNDU);
        }
        r.add_rounding(t);
        return r;
    }

    RealBall& operator+=(const RealBall& b) { return *this = *this + b; }
    RealBall& operator-=(const RealBall& b) { return *this = *this - b; }
    RealBall& operator*=(const RealBall& b) { return *this = *this * b; }
    RealBall& operator/=(const RealBall& b) { return *this = *this / b; }

    /// Equality as values: same midpoint and radius. Used for structural comparisons only.
    friend bool operator==(const RealBall& a, const RealBall& b) {
        return mpfr_equal_p(a.mid_.get(), b.mid_.get()) && mpfr_equal_p(a.rad_.get(), b.rad_.get());
    }

    friend RealBall ball_sqrt(const RealBall& a);
    friend RealBall ball_abs(const RealBall& a);
    friend RealBall midpoint_of(const RealBall& a);
    friend RealBall widen(const RealBall& a, const Rat& extra);

private:
    struct fresh {};
    RealBall(fresh, long prec) : mid_(prec), rad_(detail::kRadiusPrec), node_(detail::next_node()), negated_(false) {}

    /// Adds the rounding error of the last midpoint operation (ternary t != 0 means inexact).
    void add_rounding(int t) {
        if (t == 0 || mid_.is_zero()) {
            return;
        }
        detail::Mpfr ulp(detail::kRadiusPrec);
        mpfr_set_ui_2exp(ulp.get(), 1, mpfr_get_exp(mid_.get()) - mid_.prec(), MPFR_RNDU);
        mpfr_add(rad_.get(), rad_.get(), ulp.get(), MPFR_RNDU);
    }

    detail::Mpfr mid_;
    detail::Mpfr rad_;
    std::uint64_t node_;
    bool negated_;
};

/// Square root. A ball straddling zero yields an enclosure of [0, sqrt(upper)].
inline RealBall ball_sqrt(const RealBall& a) {
    if (a.exact_zero()) {
        return RealBall();
    }
    if (a.certainly_negative()) {
        throw NegativeSqrt();
    }
    const long p = a.prec();
    RealBall r(RealBall::fresh{}, p);
    if (a.contains_zero()) {
        detail::Mpfr hi(p);
        mpfr_add(hi.get(), a.mid_.get(), a.rad_.get(), MPFR_RNDU);
        mpfr_sqrt(hi.get(), hi.get(), MPFR_RNDU);
        mpfr_div_2ui(r.mid_.get(), hi.get(), 1, MPFR_RNDN);
        mpfr_div_2ui(r.rad_.get(), hi.get(), 1, MPFR_RNDU);
        return r;
    }
    int t = mpfr_sqrt(r.mid_.get(), a.mid_.get(), MPFR_RNDN);
    if (!a.rad_.is_zero()) {
        // |sqrt(x) - sqrt(m)| <= |x - m| / sqrt(m).
        detail::Mpfr s(detail::kRadiusPrec), x(detail::kRadiusPrec);
        mpfr_sqrt(s.get(), a.mid_.get(), MPFR_RNDD);
        mpfr_div(x.get(), a.rad_.get(), s.get(), MPFR_RNDU);
        mpfr_add(r.rad_.get(), r.rad_.get(), x.get(), MPFR_RNDU);
    }
    r.add_rounding(t);
    return r;
}

inline RealBall ball_abs(const RealBall& a) {
    if (a.mid_.sign() < 0) {
        return -a;
    }
    return a;
}

/// The exact midpoint as a ball of radius zero.
inline RealBall midpoint_of(const RealBall& a) {
    RealBall r(RealBall::fresh{}, a.prec());
    mpfr_set(r.mid_.get(), a.mid_.get(), MPFR_RNDN);
    return r;
}

/// The same ball with its radius enlarged by |extra|.
inline RealBall widen(const RealBall& a, const Rat& extra) {
    RealBall r = a;
    r.node_ = detail::next_node();
    r.negated_ = false;
    detail::Mpfr e(detail::kRadiusPrec);
    mpfr_set_q(e.get(), abs_rat(extra).get_mpq_t(), MPFR_RNDU);
    mpfr_add(r.rad_.get(), r.rad_.get(), e.get(), MPFR_RNDU);
    return r;
}

/// Complex ball as a pair of real balls (rectangular enclosure).
struct ComplexBall {
    RealBall re;
    RealBall im;

    ComplexBall() = default;
    ComplexBall(RealBall r) : re(std::move(r)) {}
    ComplexBall(int v) : re(v) {}
    ComplexBall(RealBall r, RealBall i) : re(std::move(r)), im(std::move(i)) {}

    bool exact_zero() const { return re.exact_zero() && im.exact_zero(); }
    bool contains_zero() const { return re.contains_zero() && im.contains_zero(); }
    bool certainly_nonzero() const { return re.certainly_nonzero() || im.certainly_nonzero(); }
    long prec() const { return std::max(re.prec(), im.prec()); }
    /// Upper bound of |z| (via |re| + |im|).
    Rat mag() const { return re.mag() + im.mag(); }
    double approx_abs() const { return std::hypot(re.mid_double(), im.mid_double()); }

    friend ComplexBall operator+(const ComplexBall& a, const ComplexBall& b) { return {a.re + b.re, a.im + b.im}; }
    friend ComplexBall operator-(const ComplexBall& a, const ComplexBall& b) { return {a.re - b.re, a.im - b.im}; }
    friend ComplexBall operator-(const ComplexBall& a) { return {-a.re, -a.im}; }
    friend ComplexBall operator*(const ComplexBall& a, const ComplexBall& b) {
        if (a.im.exact_zero() && b.im.exact_zero()) {
            return {a.re * b.re, RealBall()};
        }
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend ComplexBall operator/(const ComplexBall& a, const ComplexBall& b) {
        if (b.im.exact_zero()) {
            return {a.re / b.re, a.im / b.re};
        }
        RealBall den = b.re * b.re + b.im * b.im;
        ComplexBall num = a * ComplexBall(b.re, -b.im);
        return {num.re / den, num.im / den};
    }
    ComplexBall& operator+=(const ComplexBall& b) { return *this = *this + b; }
    ComplexBall& operator-=(const ComplexBall& b) { return *this = *this - b; }

    friend bool operator==(const ComplexBall& a, const ComplexBall& b) { return a.re == b.re && a.im == b.im; }
};

inline ComplexBall conj(const ComplexBall& z) { return {z.re, -z.im}; }

/// Runs `attempt(bits)` with growing precision until it stops raising InsufficientPrecision.
template <class F>
auto with_precision(const PrecisionPolicy& policy, F&& attempt) -> decltype(attempt(64L)) {
    long bits = std::max<long>(2, std::min(policy.initial_bits, policy.max_bits));
    while (true) {
        try {
            PrecisionScope scope(bits);
            return attempt(bits);
        } catch (const InsufficientPrecision& e) {
            if (bits >= policy.max_bits) {
                throw PrecisionExhausted(e.what(), policy.max_bits);
            }
            long next = bits * std::max<long>(policy.growth, 2);
            bits = std::min(std::max(next, bits + 1), policy.max_bits);
        } catch (const BallDivisionByZero& e) {
            if (bits >= policy.max_bits) {
                throw PrecisionExhausted(e.what(), policy.max_bits);
            }
            long next = bits * std::max<long>(policy.growth, 2);
            bits = std::min(std::max(next, bits + 1), policy.max_bits);
        }
    }
}

/// Certified sign of a real quantity. `refine(bits)` recomputes an enclosure at higher precision.
/// Returns 0 only for an exact zero.
inline int ball_sign(const RealBall& a, const std::function<RealBall(long)>& refine,
                     const PrecisionPolicy& policy = {}) {
    RealBall cur = a;
    long bits = std::max(cur.prec(), policy.initial_bits);
    while (true) {
        if (auto s = cur.certified_sign()) {
            return *s;
        }
        if (!refine || bits >= policy.max_bits) {
            throw PrecisionExhausted("sign could not be certified", policy.max_bits);
        }
        long next = bits * std::max<long>(policy.growth, 2);
        bits = std::min(std::max(next, bits + 1), policy.max_bits);
        PrecisionScope scope(bits);
        cur = refine(bits);
    }
}

/// Decides whether a ball is nonzero at the current precision; raises InsufficientPrecision otherwise.
inline int require_sign(const RealBall& a, const char* what) {
    auto s = a.certified_sign();
    if (!s) {
        throw InsufficientPrecision(std::string("uncertified sign: ") + what);
    }
    return *s;
}

}  // namespace twoquad

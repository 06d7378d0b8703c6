#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "twoquad/ball.hpp"
#include "twoquad/poly.hpp"

namespace twoquad {

/// Ball of radius at most 2^-bits around the root isolated by `iv`.
inline RealBall refine_root(const IsolatingInterval& iv, long bits) {
    if (iv.exact()) {
        return RealBall(*iv.rational_root, std::max<long>(bits, 64));
    }
    Rat width = Rat(1);
    mpz_mul_2exp(width.get_den_mpz_t(), width.get_den_mpz_t(), static_cast<mp_bitcnt_t>(bits));
    IsolatingInterval r = refine_interval(iv, width);
    if (r.exact()) {
        return RealBall(*r.rational_root, std::max<long>(bits, 64));
    }
    Rat mid = (r.lo + r.hi) / 2;
    long mag_bits = static_cast<long>(bit_size(Int(floor_rat(abs_rat(mid)) + 1)));
    long prec = bits + mag_bits + 4;
    return RealBall::from_interval(r.lo, r.hi, prec);
}

namespace detail {

template <class C>
C horner(const std::vector<C>& c, const C& z) {
    C acc = c.back();
    for (std::size_t i = c.size() - 1; i-- > 0;) {
        acc = acc * z + c[i];
    }
    return acc;
}

/// Aberth-Ehrlich iteration in long double: approximations of all complex roots.
inline std::vector<std::complex<long double>> aberth(const Poly& p) {
    using C = std::complex<long double>;
    const int n = p.degree();
    std::vector<C> c(static_cast<std::size_t>(n) + 1);
    const long double lc = p.leading().get_d();
    for (int i = 0; i <= n; ++i) {
        c[static_cast<std::size_t>(i)] = C(static_cast<long double>(p.coeff(i).get_d()) / lc, 0);
    }
    std::vector<C> dc(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) {
        dc[static_cast<std::size_t>(i - 1)] = c[static_cast<std::size_t>(i)] * static_cast<long double>(i);
    }
    long double radius = 0;
    for (int i = 0; i < n; ++i) {
        radius = std::max(radius, std::pow(std::abs(c[static_cast<std::size_t>(i)]), 1.0L / (n - i)));
    }
    radius = std::max(radius, 1.0L);
    std::vector<C> z(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        long double angle = 2 * 3.14159265358979323846L * k / n + 0.4L;
        z[static_cast<std::size_t>(k)] = std::polar(radius, angle);
    }
    for (int iter = 0; iter < 2000; ++iter) {
        long double moved = 0;
        for (std::size_t k = 0; k < z.size(); ++k) {
            C pv = horner(c, z[k]);
            C dv = horner(dc, z[k]);
            if (pv == C(0)) {
                continue;
            }
            C ratio = pv / dv;
            C sum(0);
            for (std::size_t j = 0; j < z.size(); ++j) {
                if (j != k) {
                    sum += 1.0L / (z[k] - z[j]);
                }
            }
            C step = ratio / (1.0L - ratio * sum);
            z[k] -= step;
            moved = std::max(moved, std::abs(step) / std::max(1.0L, std::abs(z[k])));
        }
        if (moved < 1e-18L) {
            break;
        }
    }
    return z;
}

inline Rat to_rat_ld(long double x) {
    Rat q;
    mpq_set_d(q.get_mpq_t(), static_cast<double>(x));
    return q;
}

}  // namespace detail

/// Certified enclosures of the non-real roots of a squarefree p with positive imaginary part.
/// Each returned ball contains exactly one root, and its conjugate ball the conjugate root.
/// `real_roots` are balls for the real roots (one per isolating interval).
inline std::vector<ComplexBall> certified_complex_roots(const Poly& p, const std::vector<RealBall>& real_roots,
                                                         long bits) {
    const int n = p.degree();
    const std::size_t m = real_roots.size();
    if ((static_cast<std::size_t>(n) - m) % 2 != 0) {
        throw InternalError("odd number of non-real roots");
    }
    const std::size_t pairs = (static_cast<std::size_t>(n) - m) / 2;
    if (pairs == 0) {
        return {};
    }
    PrecisionScope scope(bits);
    std::vector<std::complex<long double>> approx = detail::aberth(p);
    std::sort(approx.begin(), approx.end(),
              [](const auto& a, const auto& b) { return std::abs(a.imag()) < std::abs(b.imag()); });

    std::vector<ComplexBall> coeffs;
    for (int i = 0; i <= n; ++i) {
        coeffs.emplace_back(RealBall(p.coeff(i)));
    }
    std::vector<ComplexBall> dcoeffs;
    for (int i = 1; i <= n; ++i) {
        dcoeffs.emplace_back(RealBall(p.coeff(i) * i));
    }

    struct Disk {
        Rat re;
        Rat im;
        Rat rho;
    };
    std::vector<Disk> disks;
    std::vector<ComplexBall> out;
    for (std::size_t k = m; k < approx.size(); ++k) {
        if (approx[k].imag() <= 0) {
            continue;
        }
        ComplexBall z(RealBall(detail::to_rat_ld(approx[k].real())), RealBall(detail::to_rat_ld(approx[k].imag())));
        // Newton polishing on exact midpoints at the working precision.
        for (int it = 0; it < 200; ++it) {
            ComplexBall pv = detail::horner(coeffs, z);
            ComplexBall dv = detail::horner(dcoeffs, z);
            if (!dv.certainly_nonzero()) {
                break;
            }
            ComplexBall step = pv / dv;
            ComplexBall next(midpoint_of(z.re - midpoint_of(step.re)), midpoint_of(z.im - midpoint_of(step.im)));
            double sz = step.approx_abs();
            double zz = std::max(1.0, z.approx_abs());
            z = next;
            if (sz == 0 || std::log2(sz / zz) < -static_cast<double>(bits) + 4) {
                break;
            }
        }
        ComplexBall pv = detail::horner(coeffs, z);
        ComplexBall dv = detail::horner(dcoeffs, z);
        Rat dlow = std::max(dv.re.mig(), dv.im.mig());
        if (sgn(dlow) == 0) {
            throw InsufficientPrecision("derivative not certified nonzero at a complex root");
        }
        Rat rho = Rat(n) * pv.mag() / dlow;
        disks.push_back({z.re.mid(), z.im.mid(), rho});
        out.emplace_back(RealBall::with_radius(z.re.mid(), rho, bits), RealBall::with_radius(z.im.mid(), rho, bits));
    }
    if (out.size() != pairs) {
        throw InsufficientPrecision("complex root approximation did not separate the conjugate pairs");
    }
    std::vector<Disk> all = disks;
    for (const Disk& d : disks) {
        if (d.im <= d.rho) {
            throw InsufficientPrecision("complex root disk meets the real axis");
        }
        all.push_back({d.re, -d.im, d.rho});
    }
    for (const RealBall& r : real_roots) {
        all.push_back({r.mid(), Rat(0), r.radius()});
    }
    for (std::size_t i = 0; i < all.size(); ++i) {
        for (std::size_t j = i + 1; j < all.size(); ++j) {
            Rat dr = all[i].re - all[j].re;
            Rat di = all[i].im - all[j].im;
            Rat s = all[i].rho + all[j].rho;
            if (dr * dr + di * di <= s * s) {
                throw InsufficientPrecision("root inclusion disks overlap");
            }
        }
    }
    return out;
}

}  // namespace twoquad

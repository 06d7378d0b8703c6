#pragma once

#include <cstdlib>
#include <optional>
#include <vector>

#include "twoquad/matrix.hpp"

namespace twoquad {

/// Result of lattice reduction with respect to a Gram matrix G: rows of `basis` are the
/// reduced vectors (integer combinations of the input rows, unimodular change of basis).
struct LllResult {
    RatMatrix basis;
    /// Set when G is indefinite and a Gram-Schmidt vector turned out isotropic.
    std::optional<RatVec> isotropic;
};

namespace detail {

inline Rat gram_entry(const RatMatrix& b, const RatMatrix& g, std::size_t i, std::size_t j) {
    return bilinear(g, b.row(i), b.row(j));
}

// Explicit Gram-Schmidt vector b*_k, recomputed from scratch (only needed when it is isotropic).
inline RatVec gram_schmidt_vector(const RatMatrix& b, const RatMatrix& g, std::size_t k) {
    std::vector<RatVec> star;
    std::vector<Rat> norms;
    for (std::size_t i = 0; i <= k; ++i) {
        RatVec v = b.row(i);
        for (std::size_t j = 0; j < i; ++j) {
            Rat mu = bilinear(g, b.row(i), star[j]) / norms[j];
            for (std::size_t c = 0; c < v.size(); ++c) {
                v[c] -= mu * star[j][c];
            }
        }
        norms.push_back(bilinear(g, v, v));
        star.push_back(v);
        if (i < k && sgn(norms.back()) == 0) {
            throw InternalError("isotropic Gram-Schmidt vector before the reported index");
        }
    }
    return star[k];
}

}  // namespace detail

/// LLL reduction of the rows of `b` for the symmetric form G (delta = 3/4). For indefinite G the
/// Lovasz test uses absolute values; the run stops early if some b*_k is isotropic.
inline LllResult lll_reduce(RatMatrix b, const RatMatrix& g) {
    const std::size_t n = b.rows();
    if (g.rows() != b.cols() || !g.square()) {
        throw DimensionMismatch("lll_reduce");
    }
    LllResult out;
    if (n == 0) {
        out.basis = b;
        return out;
    }
    RatMatrix mu(n, n, Rat(0));
    std::vector<Rat> bn(n);
    const Rat delta(3, 4);

    auto isotropic_at = [&](std::size_t k) {
        out.basis = b;
        out.isotropic = content_normalized(detail::gram_schmidt_vector(b, g, k));
        return out;
    };
    auto reduce = [&](std::size_t k, std::size_t l) {
        if (abs_rat(mu(k, l)) * 2 <= 1) {
            return;
        }
        Int q = round_rat(mu(k, l));
        Rat qr(q);
        for (std::size_t c = 0; c < b.cols(); ++c) {
            b(k, c) -= qr * b(l, c);
        }
        mu(k, l) -= qr;
        for (std::size_t i = 0; i < l; ++i) {
            mu(k, i) -= qr * mu(l, i);
        }
    };

    bn[0] = detail::gram_entry(b, g, 0, 0);
    if (sgn(bn[0]) == 0) {
        return isotropic_at(0);
    }
    std::size_t k = 1;
    std::size_t kmax = 0;
    const long cap = 100000 + 1000 * static_cast<long>(n * n);
    long iterations = 0;
    while (k < n) {
        if (++iterations > cap) {
            throw InternalError("lattice reduction did not terminate");
        }
        if (k > kmax) {
            kmax = k;
            for (std::size_t j = 0; j < k; ++j) {
                Rat s = detail::gram_entry(b, g, k, j);
                for (std::size_t i = 0; i < j; ++i) {
                    s -= mu(j, i) * mu(k, i) * bn[i];
                }
                mu(k, j) = s / bn[j];
            }
            Rat s = detail::gram_entry(b, g, k, k);
            for (std::size_t j = 0; j < k; ++j) {
                s -= mu(k, j) * mu(k, j) * bn[j];
            }
            bn[k] = s;
            if (sgn(bn[k]) == 0) {
                return isotropic_at(k);
            }
        }
        reduce(k, k - 1);
        Rat m = mu(k, k - 1);
        Rat merged = bn[k] + m * m * bn[k - 1];
        if (abs_rat(merged) < delta * abs_rat(bn[k - 1])) {
            if (sgn(merged) == 0) {
                // b*_k + mu b*_{k-1} is isotropic; it becomes b*_{k-1} after the swap.
                b.swap_rows(k, k - 1);
                return isotropic_at(k - 1);
            }
            b.swap_rows(k, k - 1);
            for (std::size_t j = 0; j + 1 < k; ++j) {
                std::swap(mu(k, j), mu(k - 1, j));
            }
            Rat old_km1 = bn[k - 1];
            mu(k, k - 1) = m * old_km1 / merged;
            bn[k] = old_km1 * bn[k] / merged;
            bn[k - 1] = merged;
            for (std::size_t i = k + 1; i <= kmax; ++i) {
                Rat t = mu(i, k);
                mu(i, k) = mu(i, k - 1) - m * t;
                mu(i, k - 1) = t + mu(k, k - 1) * mu(i, k);
            }
            if (k > 1) {
                --k;
            }
        } else {
            for (std::size_t l = k - 1; l-- > 0;) {
                reduce(k, l);
            }
            ++k;
        }
    }
    out.basis = b;
    return out;
}

/// Reduced integer basis of the left kernel {x in Z^n : x M = 0} of a rational n x m matrix,
/// obtained by reducing [I | W M] with a growing weight W.
inline std::vector<RatVec> integer_left_kernel(const RatMatrix& m) {
    const std::size_t n = m.rows();
    const std::size_t cols = m.cols();
    const std::size_t dim = n - rank(m);
    if (dim == 0) {
        return {};
    }
    Int scale = 1;
    for (const Rat& x : m.data()) {
        scale = lcm(scale, Int(x.get_den()));
    }
    Int weight = Int(1) << 8;
    for (int attempt = 0; attempt < 64; ++attempt, weight *= weight) {
        RatMatrix b(n, n + cols, Rat(0));
        for (std::size_t i = 0; i < n; ++i) {
            b(i, i) = 1;
            for (std::size_t j = 0; j < cols; ++j) {
                b(i, n + j) = m(i, j) * Rat(scale * weight);
            }
        }
        LllResult r = lll_reduce(b, identity_rat(n + cols));
        std::vector<RatVec> kernel;
        for (std::size_t i = 0; i < n; ++i) {
            bool zero_tail = true;
            for (std::size_t j = 0; j < cols && zero_tail; ++j) {
                zero_tail = sgn(r.basis(i, n + j)) == 0;
            }
            if (zero_tail) {
                RatVec v(n);
                for (std::size_t j = 0; j < n; ++j) {
                    v[j] = r.basis(i, j);
                }
                kernel.push_back(std::move(v));
            }
        }
        if (kernel.size() == dim) {
            return kernel;
        }
    }
    throw InternalError("integer kernel basis not found");
}

}  // namespace twoquad

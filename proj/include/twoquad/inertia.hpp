#pragma once

#include <string>
#include <vector>

#include "twoquad/matrix.hpp"

namespace twoquad {

/// Inertia of a real symmetric matrix: r positive and s negative eigenvalues.
struct Signature {
    int r = 0;
    int s = 0;

    int d() const { return r - s; }
    int rank() const { return r + s; }
    bool definite(int n) const { return (r == n && s == 0) || (r == 0 && s == n); }
    std::string str() const { return "[" + std::to_string(r) + "," + std::to_string(s) + "]"; }

    friend bool operator==(const Signature&, const Signature&) = default;
};

/// Exact inertia by symmetric elimination over Q. A zero diagonal with a nonzero
/// off-diagonal entry is eliminated as a 2x2 hyperbolic pivot contributing one of each sign.
inline Signature inertia(const SymMatrix& q) {
    const std::size_t n = q.n();
    RatMatrix a = q.matrix();
    std::vector<std::size_t> active(n);
    for (std::size_t i = 0; i < n; ++i) {
        active[i] = i;
    }
    Signature sig;
    while (!active.empty()) {
        std::size_t pos = active.size();
        for (std::size_t k = 0; k < active.size(); ++k) {
            if (sgn(a(active[k], active[k])) != 0) {
                pos = k;
                break;
            }
        }
        if (pos < active.size()) {
            const std::size_t p = active[pos];
            const Rat piv = a(p, p);
            if (sgn(piv) > 0) {
                ++sig.r;
            } else {
                ++sig.s;
            }
            active.erase(active.begin() + static_cast<std::ptrdiff_t>(pos));
            for (std::size_t x : active) {
                if (sgn(a(x, p)) == 0) {
                    continue;
                }
                Rat f = a(x, p) / piv;
                for (std::size_t y : active) {
                    a(x, y) -= f * a(p, y);
                }
            }
            continue;
        }
        std::size_t pi = active.size();
        std::size_t pj = active.size();
        for (std::size_t k = 0; k < active.size() && pi == active.size(); ++k) {
            for (std::size_t l = k + 1; l < active.size(); ++l) {
                if (sgn(a(active[k], active[l])) != 0) {
                    pi = k;
                    pj = l;
                    break;
                }
            }
        }
        if (pi == active.size()) {
            break;
        }
        const std::size_t i = active[pi];
        const std::size_t j = active[pj];
        const Rat b = a(i, j);
        ++sig.r;
        ++sig.s;
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(pj));
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(pi));
        // Schur complement of [[0,b],[b,0]].
        for (std::size_t x : active) {
            for (std::size_t y : active) {
                a(x, y) -= (a(x, i) * a(j, y) + a(x, j) * a(i, y)) / b;
            }
        }
    }
    return sig;
}

/// Generator of the kernel of a corank-one symmetric matrix, as a primitive integer
/// vector with first nonzero coordinate positive.
inline RatVec kernel_vector(const SymMatrix& m) {
    std::vector<RatVec> k = right_kernel(m.matrix());
    if (k.size() != 1) {
        throw PreconditionViolation("kernel_vector expects corank 1, got corank " + std::to_string(k.size()));
    }
    return content_normalized(k.front());
}

}  // namespace twoquad

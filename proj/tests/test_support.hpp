#pragma once

#include <cstdint>
#include <random>

#include "twoquad/matrix.hpp"
#include "twoquad/pencil.hpp"

namespace testsupport {

using namespace twoquad;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : g_(seed) {}
    long uniform(long lo, long hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<long>(g_() % span);
    }
    std::mt19937_64& engine() { return g_; }

private:
    std::mt19937_64 g_;
};

inline SymMatrix random_sym(Rng& rng, std::size_t n, long bound) {
    SymMatrix s(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            s.set(i, j, Rat(rng.uniform(-bound, bound)));
        }
    }
    return s;
}

inline RatMatrix random_invertible(Rng& rng, std::size_t n, long bound) {
    while (true) {
        RatMatrix p(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                p(i, j) = rng.uniform(-bound, bound);
            }
        }
        if (sgn(determinant(p)) != 0) {
            return p;
        }
    }
}

inline RatVec vec(std::initializer_list<long> xs) {
    RatVec v;
    for (long x : xs) {
        v.emplace_back(x);
    }
    return v;
}

inline SymMatrix diag(std::initializer_list<long> xs) { return SymMatrix::diagonal(vec(xs)); }

/// Random symmetric integer pair satisfying hypothesis H.
inline std::pair<SymMatrix, SymMatrix> random_smooth_pair(Rng& rng, std::size_t n, long bound) {
    while (true) {
        SymMatrix q0 = random_sym(rng, n, bound);
        SymMatrix q1 = random_sym(rng, n, bound);
        if (check_hypothesis_h(q0, q1).holds) {
            return {q0, q1};
        }
    }
}

inline SymMatrix hyperbolic_plane() { return SymMatrix{{0, 1}, {1, 0}}; }

}  // namespace testsupport

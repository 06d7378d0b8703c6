#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string>

#include "twoquad/instance_io.hpp"
#include "twoquad/pencil.hpp"

namespace twoquad {

enum class Requirement { none, solvable, insolvable };

inline const char* to_string(Requirement r) {
    switch (r) {
    case Requirement::none:
        return "none";
    case Requirement::solvable:
        return "real-solvable";
    case Requirement::insolvable:
        return "real-insolvable";
    }
    return "?";
}

struct GenerateParams {
    std::size_t n = 13;
    long bound = 5;
    std::uint64_t seed = 1;
    Requirement require = Requirement::none;
    long max_tries = 10000;
};

namespace detail {

/// Uniform integer in [lo, hi] from raw engine output, so the stream is the same on every
/// standard library.
inline long uniform_long(std::mt19937_64& g, long lo, long hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t u = g();
    while (u >= limit) {
        u = g();
    }
    return lo + static_cast<long>(u % span);
}

inline SymMatrix uniform_sym(std::mt19937_64& g, std::size_t n, long bound) {
    SymMatrix s(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            s.set(i, j, Rat(uniform_long(g, -bound, bound)));
        }
    }
    return s;
}

/// sign * D - t Q0 with D strictly diagonally dominant, so t Q0 + Q1 = sign * D is definite.
inline SymMatrix definite_shifted(std::mt19937_64& g, const SymMatrix& q0, long bound) {
    const std::size_t n = q0.n();
    SymMatrix d(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            d.set(i, j, Rat(uniform_long(g, -bound, bound)));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        Rat row = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                row += abs_rat(d(i, j));
            }
        }
        d.set(i, i, row + Rat(uniform_long(g, 1, bound)));
    }
    const long sign = uniform_long(g, 0, 1) == 0 ? -1 : 1;
    const long t = uniform_long(g, -bound, bound);
    return Rat(sign) * d + Rat(-t) * q0;
}

}  // namespace detail

/// Random symmetric integer pair satisfying hypothesis H, deterministic per seed. Plain draws have
/// entries in [-bound, bound]. With Requirement::insolvable, Q1 is built so that a pencil member is
/// definite; its entries then exceed the bound.
inline Instance generate_instance(const GenerateParams& p) {
    if (p.n < 13) {
        throw PreconditionViolation("generator needs n >= 13");
    }
    if (p.bound < 1) {
        throw PreconditionViolation("entry bound must be at least 1");
    }
    if (p.max_tries < 1) {
        throw PreconditionViolation("rejection cap must be at least 1");
    }
    std::mt19937_64 g(p.seed);
    for (long tries = 1; tries <= p.max_tries; ++tries) {
        SymMatrix q0 = detail::uniform_sym(g, p.n, p.bound);
        SymMatrix q1 = p.require == Requirement::insolvable ? detail::definite_shifted(g, q0, p.bound)
                                                            : detail::uniform_sym(g, p.n, p.bound);
        if (!check_hypothesis_h(q0, q1).holds) {
            continue;
        }
        if (p.require != Requirement::none) {
            const bool solvable = is_real_solvable(q0, q1).solvable_over_r;
            if (solvable != (p.require == Requirement::solvable)) {
                continue;
            }
        }
        Instance inst{q0, q1, {}};
        inst.metadata = {{"generator", p.require == Requirement::insolvable ? "definite-member" : "uniform"},
                         {"seed", std::to_string(p.seed)},
                         {"n", std::to_string(p.n)},
                         {"bound", std::to_string(p.bound)},
                         {"require", to_string(p.require)},
                         {"tries", std::to_string(tries)}};
        return inst;
    }
    throw RejectionCapExceeded("no instance with the requested properties after " + std::to_string(p.max_tries) +
                               " draws");
}

}  // namespace twoquad

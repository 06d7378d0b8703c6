#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "test_support.hpp"
#include "twoquad/real_solution.hpp"

using namespace twoquad;
using namespace testsupport;

namespace {

const Rat kTol = Rat(1, 1) / Rat(Int(1) << 40);

bool tiny(const RealBall& x) { return x.contains_zero() && x.mag() <= kTol; }

RealBall ball(long v) { return RealBall(Rat(v)); }

// Real solvability of a diagonal pair straight from the definition: no sample lambda between
// or beyond the rational roots -b_i / a_i gives a definite member.
bool diagonal_has_definite_member(const std::vector<int>& a, const RatVec& b, bool positive_only = false) {
    std::vector<Rat> roots;
    for (std::size_t i = 0; i < a.size(); ++i) {
        roots.push_back(-b[i] / Rat(a[i]));
    }
    std::sort(roots.begin(), roots.end());
    std::vector<Rat> samples{roots.front() - 1, roots.back() + 1};
    for (std::size_t i = 0; i + 1 < roots.size(); ++i) {
        samples.push_back((roots[i] + roots[i + 1]) / 2);
    }
    for (const Rat& t : samples) {
        int pos = 0;
        int neg = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            int s = sgn(t * Rat(a[i]) + b[i]);
            pos += s > 0;
            neg += s < 0;
        }
        if (pos == static_cast<int>(a.size()) || (!positive_only && neg == static_cast<int>(a.size()))) {
            return true;
        }
    }
    return false;
}

struct DiagonalCase {
    std::vector<int> a;
    RatVec b;
};

DiagonalCase random_diagonal_case(Rng& rng, std::size_t n) {
    while (true) {
        DiagonalCase c;
        std::vector<Rat> roots;
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            c.a.push_back(rng.uniform(0, 1) ? 1 : -1);
            long v = rng.uniform(-9, 9);
            c.b.emplace_back(v);
            Rat r = -Rat(v) / Rat(c.a.back());
            ok = v != 0 && std::find(roots.begin(), roots.end(), r) == roots.end();
            roots.push_back(r);
        }
        if (ok) {
            return c;
        }
    }
}

SymMatrix block_sum(const std::vector<SymMatrix>& blocks) {
    RatMatrix acc = blocks.front().matrix();
    for (std::size_t i = 1; i < blocks.size(); ++i) {
        acc = direct_sum(acc, blocks[i].matrix());
    }
    return SymMatrix(acc);
}

void check_block_diag(const BlockDiagPair& d, std::size_t n) {
    REQUIRE(d.p.rows() == n);
    CHECK(d.residual0 <= kTol);
    CHECK(d.residual1 <= kTol);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(d.d0(i, i).exact());
        CHECK((d.d0(i, i) == RealBall(1) || d.d0(i, i) == RealBall(-1)));
    }
    std::vector<std::size_t> block_of(n);
    for (std::size_t b = 0; b < d.blocks.size(); ++b) {
        for (std::size_t k = 0; k < d.blocks[b].size; ++k) {
            block_of[d.blocks[b].position + k] = b;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j) {
                CHECK(d.d0(i, j).exact_zero());
            }
            if (block_of[i] != block_of[j]) {
                CHECK(d.d1(i, j).exact_zero());
            }
        }
    }
    for (const BlockDescriptor& b : d.blocks) {
        if (b.size == 2) {
            CHECK(b.position >= d.m);
            CHECK(d.d0(b.position, b.position) == RealBall(1));
            CHECK(d.d0(b.position + 1, b.position + 1) == RealBall(-1));
            CHECK((d.d1(b.position, b.position) + d.d1(b.position + 1, b.position + 1)).exact_zero());
        } else {
            CHECK(b.position < d.m);
        }
    }
    for (std::size_t i = 1; i < d.m; ++i) {
        CHECK(d.real_roots[i - 1].mid() < d.real_roots[i].mid());
    }
}

}  // namespace

TEST_CASE("two complex blocks") {
    SolverOutput s = solve_two_complex_blocks(ball(3), ball(1), ball(-2), ball(1));
    REQUIRE(s.v.size() == 4);
    CHECK(s.v[0].contains(1));
    CHECK(s.v[1].contains(1));
    CHECK(s.v[2] == RealBall(-1));
    CHECK(s.v[3] == RealBall(1));
    CHECK(s.q0_residue.exact_zero());
    CHECK(tiny(s.q1_residue));

    s = solve_two_complex_blocks(ball(0), ball(1), ball(5), ball(4));
    CHECK(s.v[0].contains(2));
    CHECK(s.v[1].contains(2));
    CHECK(s.v[2] == RealBall(-1));
    CHECK(s.q0_residue.exact_zero());
    CHECK(tiny(s.q1_residue));

    s = solve_two_complex_blocks(ball(1), ball(-1), ball(1), ball(1));
    CHECK(s.v[2] == RealBall(1));
    CHECK(tiny(s.q1_residue));

    CHECK_THROWS_AS(solve_two_complex_blocks(ball(1), RealBall(), ball(1), ball(1)), InsufficientPrecision);
}

TEST_CASE("mixed block") {
    SolverOutput s = solve_mixed(ball(2), ball(2), ball(7));
    CHECK(s.v[0] == RealBall(1));
    CHECK(s.v[1].exact_zero());
    CHECK(s.v[2] == RealBall(1));
    CHECK(s.q0_residue.exact_zero());
    CHECK(s.q1_residue.exact_zero());

    s = solve_mixed(ball(0), ball(3), ball(4));
    CHECK(s.v[1].contains(Rat(-1, 3)));
    CHECK((s.v[0] * s.v[0]).contains(Rat(8, 9)));
    CHECK(s.v[2] == RealBall(1));
    CHECK(tiny(s.q0_residue));
    CHECK(tiny(s.q1_residue));

    s = solve_mixed(ball(0), ball(0), ball(1));
    CHECK(s.v[1].exact_zero());

    // b = 0 with a != lam1 picks y = sgn(a - lam1), so x = 0.
    s = solve_mixed(ball(1), ball(3), RealBall());
    CHECK(s.v[1] == RealBall(1));
    CHECK(tiny(s.q1_residue));
}

TEST_CASE("all-real diagonal solver") {
    auto view = DiagonalPairView::from_rational({1, 1, -1}, vec({1, 2, -1}));
    SolverOutput s = solve_all_real(view);
    CHECK(s.v[0] == RealBall(1));
    CHECK(s.v[1].exact_zero());
    CHECK(s.v[2] == RealBall(1));
    CHECK(s.q0_residue.exact_zero());
    CHECK(s.q1_residue.exact_zero());

    view = DiagonalPairView::from_rational({1, 1, -1}, vec({1, 3, -2}));
    s = solve_all_real(view);
    CHECK(s.v[0].contains(1));
    CHECK(s.v[1] == RealBall(1));
    CHECK((s.v[2] * s.v[2]).contains(2));
    CHECK(tiny(s.q0_residue));
    CHECK(tiny(s.q1_residue));

    // Every -b_k over the negative class misses [1, 2]; the solver has to swap the classes.
    view = DiagonalPairView::from_rational({1, 1, -1, -1}, RatVec{1, 2, -3, Rat(-1, 2)});
    REQUIRE(view.has_real_common_zero());
    s = solve_all_real(view);
    CHECK(tiny(s.q0_residue));
    CHECK(tiny(s.q1_residue));
    CHECK(std::any_of(s.v.begin(), s.v.end(), [](const RealBall& x) { return x == RealBall(1); }));

    view = DiagonalPairView::from_rational({1, 1, -1}, vec({1, 2, 3}));
    CHECK_FALSE(view.has_real_common_zero());
    CHECK_THROWS_AS(solve_all_real(view), PreconditionViolation);
}

TEST_CASE("diagonal predicates agree with brute force") {
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = static_cast<std::size_t>(rng.uniform(2, 8));
        DiagonalCase c = random_diagonal_case(rng, n);
        auto view = DiagonalPairView::from_rational(c.a, c.b);
        RatVec a_rat;
        for (int s : c.a) {
            a_rat.emplace_back(s);
        }
        SymMatrix q0 = SymMatrix::diagonal(a_rat);
        SymMatrix q1 = SymMatrix::diagonal(c.b);
        // A negative definite witness rules out a positive definite member unless q0 is definite.
        auto lam = find_definite_lambda(q0, q1);
        bool q0_definite = inertia(q0).definite(static_cast<int>(n));
        bool pd = lam && (inertia(pencil_member(q0, q1, *lam)).r == static_cast<int>(n) || q0_definite);
        CHECK(view.has_positive_definite_member() == pd);
        CHECK(view.has_positive_definite_member() == diagonal_has_definite_member(c.a, c.b, true));
        CHECK(view.has_real_common_zero() == !diagonal_has_definite_member(c.a, c.b));
        if (view.has_real_common_zero()) {
            SolverOutput s = solve_all_real(view);
            CHECK(tiny(s.q0_residue));
            CHECK(tiny(s.q1_residue));
        }
    }
}

TEST_CASE("block diagonalization examples") {
    BlockDiagPair d = simultaneous_block_diag(diag({1, 1}), diag({1, 2}));
    CHECK(d.m == 2);
    check_block_diag(d, 2);
    CHECK(d.d1(0, 0).contains(2));
    CHECK(d.d1(1, 1).contains(1));

    d = simultaneous_block_diag(diag({1, -1}), hyperbolic_plane());
    CHECK(d.m == 0);
    check_block_diag(d, 2);
    // The conjugate roots are +-i, so the block is [[0, -1], [-1, 0]].
    CHECK(d.d1(0, 0).contains(0));
    CHECK(d.d1(0, 1).contains(-1));

    d = simultaneous_block_diag(block_sum({diag({1, 1}), diag({1, -1})}),
                                block_sum({diag({1, 2}), hyperbolic_plane()}));
    CHECK(d.m == 2);
    REQUIRE(d.blocks.size() == 3);
    CHECK(d.blocks[2].size == 2);
    check_block_diag(d, 4);

    CHECK_THROWS_AS(simultaneous_block_diag(diag({1, 1}), diag({1, 1})), HypothesisViolation);
}

TEST_CASE("block diagonalization of random smooth pairs") {
    Rng rng(606);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = static_cast<std::size_t>(rng.uniform(2, 8));
        auto [q0, q1] = random_smooth_pair(rng, n, 9);
        BlockDiagPair d = simultaneous_block_diag(q0, q1);
        CHECK(d.m == static_cast<std::size_t>(count_real_roots(pencil_determinant(q0, q1))));
        check_block_diag(d, n);
    }
}

TEST_CASE("real point on each path") {
    std::vector<int> signs{1, 1, 1, 1, 1, 1, 1, -1, -1, -1, -1, -1, -1};
    RatVec a_rat;
    for (int s : signs) {
        a_rat.emplace_back(s);
    }
    SymMatrix q0 = SymMatrix::diagonal(a_rat);
    SymMatrix q1 = diag({1, 3, 5, 7, 9, 11, 13, -2, -4, -6, -8, -10, -12});
    RealPoint p = real_point(q0, q1);
    CHECK(p.path == RealPath::all_real);
    CHECK(tiny(p.q0_residue));
    CHECK(tiny(p.q1_residue));

    SymMatrix c0 = block_sum({diag({1, -1}), diag({1, -1}), diag({1, -1})});
    SymMatrix c1 = block_sum({SymMatrix{{1, 2}, {2, -1}}, SymMatrix{{3, 1}, {1, -3}}, SymMatrix{{0, 5}, {5, 0}}});
    p = real_point(c0, c1);
    CHECK(p.path == RealPath::all_complex);
    CHECK(tiny(p.q0_residue));
    CHECK(tiny(p.q1_residue));
    CHECK(p.z[4].exact_zero());

    SymMatrix m0 = block_sum({diag({1}), diag({1, -1})});
    SymMatrix m1 = block_sum({diag({2}), SymMatrix{{1, 3}, {3, -1}}});
    p = real_point(m0, m1);
    CHECK(p.path == RealPath::mixed);
    CHECK(tiny(p.q0_residue));
    CHECK(tiny(p.q1_residue));

    // Negative sign on the last real coordinate.
    m0 = block_sum({diag({-1}), diag({1, -1})});
    p = real_point(m0, m1);
    CHECK(p.path == RealPath::mixed);
    CHECK(tiny(p.q1_residue));

    try {
        real_point(diag({1, 1, 1}), diag({1, 2, 3}));
        FAIL("expected real insolvability");
    } catch (const RealInsolvable& e) {
        CHECK(inertia(pencil_member(diag({1, 1, 1}), diag({1, 2, 3}), Rat(e.witness))).definite(3));
    }
}

TEST_CASE("real point on random solvable pairs") {
    Rng rng(31337);
    int solved = 0;
    for (int trial = 0; trial < 80; ++trial) {
        const std::size_t n = static_cast<std::size_t>(rng.uniform(3, 8));
        auto [q0, q1] = random_smooth_pair(rng, n, 5);
        if (!is_real_solvable(q0, q1).solvable_over_r) {
            continue;
        }
        RealPoint p = real_point(q0, q1);
        CHECK(tiny(p.q0_residue));
        CHECK(tiny(p.q1_residue));
        CHECK(std::any_of(p.z.begin(), p.z.end(), [](const RealBall& x) { return x == RealBall(1); }));
        ++solved;
    }
    CHECK(solved > 20);
}

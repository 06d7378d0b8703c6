#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"
#include "twoquad/rational_solution.hpp"

using namespace twoquad;
using namespace testsupport;

namespace {

// q0 = diag(+1 x7, -1 x6), q1 = diag(1, 3, ..., 13, -2, ..., -12): real solvable, all roots real.
std::pair<SymMatrix, SymMatrix> diagonal_13() {
    RatVec a(13);
    RatVec b(13);
    for (std::size_t i = 0; i < 7; ++i) {
        a[i] = 1;
        b[i] = static_cast<long>(2 * i + 1);
    }
    for (std::size_t i = 7; i < 13; ++i) {
        a[i] = -1;
        b[i] = -static_cast<long>(2 * (i - 6));
    }
    return {SymMatrix::diagonal(a), SymMatrix::diagonal(b)};
}

SymMatrix sym_from(const RatMatrix& m) { return SymMatrix(m); }

// Matrices with first rows (0,1,0,...) and (0,0,1,0,...) as produced by the double Witt step.
std::pair<RatMatrix, RatMatrix> witt_shaped(Rng& rng, std::size_t n, bool zero_f22) {
    RatMatrix a = random_sym(rng, n, 6).matrix();
    RatMatrix b = random_sym(rng, n, 6).matrix();
    for (std::size_t j = 0; j < n; ++j) {
        a(0, j) = a(j, 0) = 0;
        b(0, j) = b(j, 0) = 0;
    }
    a(0, 1) = a(1, 0) = 1;
    b(0, 2) = b(2, 0) = 1;
    if (zero_f22) {
        a(2, 2) = 0;
    } else if (sgn(a(2, 2)) == 0) {
        a(2, 2) = 3;
    }
    return {a, b};
}

void check_certificate(const SymMatrix& q0, const SymMatrix& q1, const SolutionCertificate& cert) {
    REQUIRE_FALSE(is_zero_vector(cert.x));
    CHECK(evaluate_form(q0, cert.x) == 0);
    CHECK(evaluate_form(q1, cert.x) == 0);
    CHECK(cert.residue0 == 0);
    CHECK(cert.residue1 == 0);
    CHECK(content_normalized(cert.x) == cert.x);
    CHECK(replay_transcript(cert));
}

}  // namespace

TEST_CASE("pos_neg on double Witt shapes") {
    Rng rng(5);
    for (int trial = 0; trial < 60; ++trial) {
        const bool zero_f22 = trial % 2 == 0;
        auto [a, b] = witt_shaped(rng, 5 + static_cast<std::size_t>(trial % 4), zero_f22);
        RatVec z = detail::pos_neg_impl(identity_rat(a.rows()), a, b);
        CHECK(evaluate_form(sym_from(a), z) == 0);
        const Rat v = evaluate_form(sym_from(b), z);
        CHECK(sgn(v) < 0);
        if (zero_f22) {
            CHECK(v == -1);
        }
    }
}

TEST_CASE("pos_neg from a rational common zero") {
    Rng rng(17);
    int done = 0;
    for (int trial = 0; trial < 400 && done < 25; ++trial) {
        // e_1 is a common zero once both (1,1) entries vanish.
        RatMatrix m0 = random_sym(rng, 6, 5).matrix();
        RatMatrix m1 = random_sym(rng, 6, 5).matrix();
        m0(0, 0) = 0;
        m1(0, 0) = 0;
        SymMatrix q0(m0);
        SymMatrix q1(m1);
        if (!check_hypothesis_h(q0, q1).holds) {
            continue;
        }
        RatVec z = pos_neg(q0, q1, unit_vector(6, 0));
        CHECK(evaluate_form(q0, z) == 0);
        CHECK(sgn(evaluate_form(q1, z)) < 0);
        ++done;
    }
    CHECK(done == 25);
}

TEST_CASE("pos_neg preconditions") {
    SymMatrix q0 = diag({1, -1, 1, -1});
    SymMatrix q1 = diag({1, 2, 3, 4});
    CHECK_THROWS_AS(pos_neg(q0, q1, vec({1, 1, 0, 0})), PreconditionViolation);
    SymMatrix p0 = diag({1, -1, 1, -1, 1});
    SymMatrix p1 = diag({1, 2, -3, 4, 5});
    CHECK_THROWS_AS(pos_neg(p0, p1, vec({1, 0, 0, 0, 0})), PreconditionViolation);
}

TEST_CASE("ball pos_neg and rational approximation from a real common zero") {
    auto [q0, q1] = diagonal_13();
    Oracle oracle;
    ApproxResult approx = with_precision(PrecisionPolicy{}, [&](long bits) {
        RealPoint rp = real_point(q0, q1, PrecisionPolicy{bits, bits, 2, 40});
        CHECK(ball_form(q0, rp.y).contains_zero());
        CHECK(ball_form(q1, rp.y).contains_zero());
        BallVec v = pos_neg(q0, q1, rp.y);
        CHECK(ball_form(q0, v).contains_zero());
        CHECK(ball_form(q1, v).certainly_negative());
        return rational_isotropic_near(q0, q1, v, oracle);
    });
    CHECK(evaluate_form(q0, approx.z) == 0);
    CHECK(sgn(evaluate_form(q1, approx.z)) < 0);
    CHECK(evaluate_form(q0, approx.w) == 0);
    CHECK(approx.grid_bits >= 0);
}

TEST_CASE("rational approximation edge cases") {
    SymMatrix q0 = diag({1, -1, 1, -1, 1});
    Oracle oracle;
    const RatVec w = vec({1, 1, 0, 0, 0});

    SECTION("y orthogonal to w: w is replaced") {
        SymMatrix q1 = diag({1, 1, -1, -1, 1});
        BallVec y = to_ball(vec({0, 0, 1, 1, 0}));
        ApproxResult r = rational_isotropic_near(q0, q1, y, oracle, w);
        CHECK(evaluate_form(q0, r.z) == 0);
        CHECK(sgn(evaluate_form(q1, r.z)) < 0);
        CHECK(r.w != w);
        CHECK(evaluate_form(q0, r.w) == 0);
    }
    SECTION("y on the line of w with q1(w) < 0") {
        SymMatrix q1 = diag({-1, -1, 1, 1, 1});
        BallVec y = to_ball(vec({3, 3, 0, 0, 0}));
        ApproxResult r = rational_isotropic_near(q0, q1, y, oracle, w);
        CHECK(r.z == w);
    }
    SECTION("rational y is reproduced up to scaling") {
        SymMatrix q1 = diag({2, 1, -1, -3, 1});
        RatVec yr = vec({1, 0, 0, 1, 0});
        ApproxResult r = rational_isotropic_near(q0, q1, to_ball(yr), oracle);
        CHECK(evaluate_form(q0, r.z) == 0);
        CHECK(sgn(evaluate_form(q1, r.z)) < 0);
    }
    SECTION("preconditions") {
        SymMatrix q1 = diag({1, 1, -1, -1, 1});
        CHECK_THROWS_AS(rational_isotropic_near(q0, q1, to_ball(vec({1, 0, 0, 0, 0})), oracle),
                        PreconditionViolation);
        CHECK_THROWS_AS(rational_isotropic_near(q0, q1, to_ball(vec({1, 1, 0, 0, 0})), oracle),
                        PreconditionViolation);
    }
}

TEST_CASE("solve_pair on a diagonal instance") {
    auto [q0, q1] = diagonal_13();
    SolutionCertificate cert = solve_pair(q0, q1, Oracle{});
    check_certificate(q0, q1, cert);
    CHECK(cert.transcript.back().name == "result");
}

TEST_CASE("solve_pair reports real insolvability with a witness") {
    SymMatrix q0 = SymMatrix::diagonal(RatVec(13, Rat(1)));
    RatVec b(13);
    for (std::size_t i = 0; i < 13; ++i) {
        b[i] = static_cast<long>(i) + 1;
    }
    SymMatrix q1 = SymMatrix::diagonal(b);
    try {
        solve_pair(q0, q1, Oracle{});
        FAIL("expected RealInsolvable");
    } catch (const RealInsolvable& e) {
        Signature s = inertia(pencil_member(q0, q1, e.witness));
        CHECK(((s.r == 13 && s.s == 0) || (s.r == 0 && s.s == 13)));
    }
}

TEST_CASE("solve_pair preconditions") {
    Rng rng(3);
    auto [q0, q1] = random_smooth_pair(rng, 12, 5);
    CHECK_THROWS_AS(solve_pair(q0, q1, Oracle{}), PreconditionViolation);
    SymMatrix s13 = SymMatrix::diagonal(RatVec(13, Rat(1)));
    CHECK_THROWS_AS(solve_pair(s13, s13, Oracle{}), HypothesisViolation);
}

TEST_CASE("solve_pair on dense random instances") {
    Rng rng(2024);
    for (std::size_t n : {13, 14}) {
        auto pr = random_smooth_pair(rng, n, 5);
        while (!is_real_solvable(pr.first, pr.second).solvable_over_r) {
            pr = random_smooth_pair(rng, n, 5);
        }
        SolutionCertificate cert = solve_pair(pr.first, pr.second, Oracle{}, SolveOptions{7, {}});
        check_certificate(pr.first, pr.second, cert);
    }
}

TEST_CASE("solve_pair is deterministic and its transcript is tamper evident") {
    Rng rng(99);
    auto pr = random_smooth_pair(rng, 13, 5);
    while (!is_real_solvable(pr.first, pr.second).solvable_over_r) {
        pr = random_smooth_pair(rng, 13, 5);
    }
    SolutionCertificate a = solve_pair(pr.first, pr.second, Oracle{}, SolveOptions{1, {}});
    SolutionCertificate b = solve_pair(pr.first, pr.second, Oracle{}, SolveOptions{1, {}});
    CHECK(a.digest == b.digest);
    CHECK(a.x == b.x);
    CHECK(hex64(a.digest).size() == 16);

    SolutionCertificate c = a;
    c.x[0] += 1;
    CHECK_FALSE(replay_transcript(c));
    SolutionCertificate d = a;
    d.transcript.front().note += "x";
    CHECK_FALSE(replay_transcript(d));
}

TEST_CASE("transcript digest is FNV-1a") {
    // Reference values of the 64-bit FNV-1a hash.
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

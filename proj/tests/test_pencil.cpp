#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"
#include "twoquad/pencil.hpp"

using namespace twoquad;
using namespace testsupport;

namespace {

SymMatrix random_smooth_pair_member(Rng& rng, std::size_t n, long bound, SymMatrix& other) {
    while (true) {
        SymMatrix a = random_sym(rng, n, bound);
        SymMatrix b = random_sym(rng, n, bound);
        if (check_hypothesis_h(a, b).holds) {
            other = b;
            return a;
        }
    }
}

// Independent oracle: exact inertia at the simplest rational of each root gap and at both ends.
bool brute_force_definite_member(const SymMatrix& q0, const SymMatrix& q1) {
    Poly delta = pencil_determinant(q0, q1);
    auto roots = isolate_real_roots(delta);
    const int n = static_cast<int>(q0.n());
    Rat b = cauchy_bound(delta) + 1;
    std::vector<Rat> pts{-b, b, Rat(0)};
    for (std::size_t i = 0; i + 1 < roots.size(); ++i) {
        pts.push_back(mediant(roots[i].hi, roots[i + 1].lo));
    }
    for (const Rat& t : pts) {
        if (delta.sign_at(t) != 0 && signature_at(q0, q1, t).definite(n)) {
            return true;
        }
    }
    return false;
}

}  // namespace

TEST_CASE("hypothesis H") {
    CHECK(check_hypothesis_h(diag({1, 1}), diag({1, 2})).holds);
    auto twice = check_hypothesis_h(diag({1, 1}), diag({1, 1}));
    CHECK_FALSE(twice.holds);
    CHECK(twice.reason == "Δ not squarefree");
    auto sing = check_hypothesis_h(diag({1, 0}), diag({1, 2}));
    CHECK_FALSE(sing.holds);
    CHECK(sing.reason == "det(Q0)=0");
    CHECK(check_hypothesis_h(diag({1, 2}), diag({0, 1})).reason == "det(Q1)=0");
}

TEST_CASE("basepoint shift") {
    auto same = pencil_basepoint_shift(diag({1, 2}), diag({3, 1}));
    CHECK(same.q0 == diag({1, 2}));
    CHECK(same.c0 == 0);
    auto shifted = pencil_basepoint_shift(diag({0, 1}), diag({1, 1}));
    CHECK(shifted.c0 == 1);
    CHECK(shifted.q0 == diag({1, 2}));
    CHECK_THROWS_AS(pencil_basepoint_shift(SymMatrix(2), SymMatrix(2)), PreconditionViolation);
}

TEST_CASE("signature profile examples") {
    PencilProfile p = signature_profile(diag({1, -1}), diag({1, 1}));
    REQUIRE(p.m() == 2);
    CHECK(*p.roots[0].rational_root == -1);
    CHECK(*p.roots[1].rational_root == 1);
    REQUIRE(p.segments.size() == 3);
    CHECK(p.segments[0].d() == 0);
    CHECK(p.segments[1].d() == 2);
    CHECK(p.segments[2].d() == 0);
    REQUIRE(p.at_roots.size() == 2);
    CHECK(p.at_roots[0] == Signature{1, 0});
    CHECK(p.at_roots[1] == Signature{1, 0});

    PencilProfile q = signature_profile(diag({1, -1}), hyperbolic_plane());
    CHECK(q.m() == 0);
    REQUIRE(q.segments.size() == 1);
    CHECK(q.segments[0].d() == 0);
}

TEST_CASE("signature profile invariants on random pencils") {
    Rng rng(101);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = static_cast<std::size_t>(rng.uniform(2, 7));
        SymMatrix q1;
        SymMatrix q0 = random_smooth_pair_member(rng, n, 6, q1);
        PencilProfile p = signature_profile(q0, q1);
        REQUIRE(p.segments.size() == static_cast<std::size_t>(p.m()) + 1);
        CHECK(p.segments.front().d() == -p.segments.back().d());
        CHECK(p.segments.back() == inertia(q0));
        for (int i = 0; i < p.m(); ++i) {
            const Signature& lo = p.segments[static_cast<std::size_t>(i)];
            const Signature& hi = p.segments[static_cast<std::size_t>(i) + 1];
            const Signature& at = p.at_roots[static_cast<std::size_t>(i)];
            CHECK(hi.r - lo.r == -(hi.s - lo.s));
            CHECK(std::abs(hi.d() - lo.d()) == 2);
            CHECK(at.rank() == static_cast<int>(n) - 1);
            CHECK(2 * at.d() == lo.d() + hi.d());
        }
        for (std::size_t k = 0; k < p.sample_points.size(); ++k) {
            CHECK(p.delta.sign_at(p.sample_points[k]) != 0);
        }
    }
}

TEST_CASE("definite lambda examples") {
    auto l = find_definite_lambda(diag({1, -1}), diag({1, 1}));
    REQUIRE(l);
    CHECK(*l > -1);
    CHECK(*l < 1);
    CHECK(signature_at(diag({1, -1}), diag({1, 1}), *l) == Signature{2, 0});

    CHECK_FALSE(find_definite_lambda(diag({1, -1}), hyperbolic_plane()));

    auto big = find_definite_lambda(diag({1, 1}), diag({1, 2}));
    REQUIRE(big);
    CHECK(*big > -1);
    CHECK(signature_at(diag({1, 1}), diag({1, 2}), *big).definite(2));
}

TEST_CASE("definite lambda agrees with a full profile scan") {
    Rng rng(202);
    int definite = 0;
    for (int trial = 0; trial < 80; ++trial) {
        const std::size_t n = static_cast<std::size_t>(rng.uniform(2, 5));
        SymMatrix q1;
        SymMatrix q0 = random_smooth_pair_member(rng, n, 4, q1);
        auto lam = find_definite_lambda(q0, q1);
        PencilProfile prof = signature_profile(q0, q1);
        bool any = false;
        for (const Signature& s : prof.segments) {
            any = any || s.definite(static_cast<int>(n));
        }
        CHECK(lam.has_value() == any);
        CHECK(any == brute_force_definite_member(q0, q1));
        if (lam) {
            ++definite;
            CHECK(signature_at(q0, q1, *lam).definite(static_cast<int>(n)));
        }
    }
    CHECK(definite > 0);
}

TEST_CASE("real solvability") {
    auto rep = is_real_solvable(diag({1, 1, 1}), diag({1, 2, 3}));
    CHECK_FALSE(rep.solvable_over_r);
    REQUIRE(rep.definite_lambda);
    CHECK(rep.witness_signature.definite(3));

    auto yes = is_real_solvable(diag({1, -1, 1, -1}), diag({1, 2, -3, -5}));
    CHECK(yes.solvable_over_r);
    CHECK_THROWS_AS(is_real_solvable(diag({1, -1}), diag({1, 2})), PreconditionViolation);
}

TEST_CASE("balanced lambda") {
    Rat l = find_balanced_lambda(diag({1, -1}), diag({1, 1}));
    CHECK(std::abs(signature_at(diag({1, -1}), diag({1, 1}), l).d()) <= 1);

    CHECK(find_balanced_lambda(diag({1, 1, -1}), diag({2, -1, -3})) == 0);

    Rng rng(303);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = static_cast<std::size_t>(rng.uniform(2, 8));
        SymMatrix q1;
        SymMatrix q0 = random_smooth_pair_member(rng, n, 9, q1);
        BalancedLambda b = find_balanced_lambda_traced(q0, q1);
        CHECK(std::abs(signature_at(q0, q1, b.lambda).d()) <= 1);
        CHECK(pencil_determinant(q0, q1).sign_at(b.lambda) != 0);
        CHECK(b.steps <= 200);
    }
}

TEST_CASE("simplest rational between two bounds") {
    CHECK(simplest_between(Rat(1, 3), Rat(1, 2)) == Rat(2, 5));
    CHECK(simplest_between(Rat(-5, 2), Rat(7, 3)) == 0);
    CHECK(simplest_between(Rat(3, 2), Rat(7, 2)) == 2);
    CHECK(simplest_between(Rat(-7, 2), Rat(-3, 2)) == -2);
    CHECK(simplest_between(Rat(-1, 2), Rat(-1, 3)) == Rat(-2, 5));
}

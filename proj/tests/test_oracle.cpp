#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>

#include "test_support.hpp"
#include "twoquad/oracle.hpp"

using namespace twoquad;
using namespace testsupport;

namespace {

std::string stub(const std::string& mode) { return std::string(STUB_ORACLE_PATH) + " " + mode; }

SymMatrix random_indefinite_diagonal(Rng& rng, std::size_t n, long bound) {
    while (true) {
        RatVec d(n);
        bool pos = false;
        bool neg = false;
        for (Rat& x : d) {
            long v = 0;
            while (v == 0) {
                v = rng.uniform(-bound, bound);
            }
            x = v;
            pos = pos || v > 0;
            neg = neg || v < 0;
        }
        if (pos && neg) {
            return SymMatrix::diagonal(d);
        }
    }
}

}  // namespace

TEST_CASE("lll on a Euclidean lattice") {
    RatMatrix b{{1, 1, 1}, {-1, 0, 2}, {3, 5, 6}};
    LllResult r = lll_reduce(b, identity_rat(3));
    CHECK_FALSE(r.isotropic);
    CHECK(abs_rat(determinant(r.basis)) == abs_rat(determinant(b)));
    // Textbook example: the reduced basis is (0,1,0), (1,0,1), (-1,0,2).
    for (std::size_t i = 0; i < 3; ++i) {
        Rat norm = 0;
        for (std::size_t j = 0; j < 3; ++j) {
            norm += r.basis(i, j) * r.basis(i, j);
        }
        CHECK(norm <= 5);
    }
}

TEST_CASE("indefinite lll reports isotropic Gram-Schmidt vectors") {
    LllResult r = lll_reduce(identity_rat(2), hyperbolic_plane().matrix());
    REQUIRE(r.isotropic);
    CHECK(evaluate_form(hyperbolic_plane(), *r.isotropic) == 0);

    Rng rng(41);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = static_cast<std::size_t>(rng.uniform(2, 6));
        SymMatrix q = random_sym(rng, n, 30);
        if (sgn(determinant(q.matrix())) == 0) {
            continue;
        }
        LllResult red = lll_reduce(identity_rat(n), q.matrix());
        if (red.isotropic) {
            CHECK_FALSE(is_zero_vector(*red.isotropic));
            CHECK(evaluate_form(q, *red.isotropic) == 0);
        } else {
            CHECK(abs_rat(determinant(red.basis)) == 1);
        }
    }
}

TEST_CASE("integer left kernel") {
    RatMatrix m{{1, 0}, {0, 1}, {1, 1}, {2, Rat(1, 2)}};
    auto k = integer_left_kernel(m);
    REQUIRE(k.size() == 2);
    for (const RatVec& v : k) {
        CHECK(is_zero_vector(row_times(v, m)));
        for (const Rat& x : v) {
            CHECK(x.get_den() == 1);
        }
    }
    RatMatrix basis = RatMatrix::from_rows(k);
    CHECK(rank(basis) == 2);
    // The kernel lattice is saturated: (-1,-1,1,0) and (-4,-1,0,2) generate it.
    RatMatrix target = RatMatrix::from_rows({vec({-1, -1, 1, 0}), vec({-4, -1, 0, 2})});
    RatMatrix both = RatMatrix::from_rows({k[0], k[1], target.row(0), target.row(1)});
    CHECK(rank(both) == 2);
    CHECK(integer_left_kernel(identity_rat(3)).empty());
}

TEST_CASE("baseline oracle examples") {
    CHECK(baseline_isotropic(diag({1, -1, 2, -2, 3}), kDefaultOracleBudget).y == vec({1, 1, 0, 0, 0}));
    SymMatrix h5 = SymMatrix{{0, 1, 0}, {1, 0, 0}, {0, 0, 5}};
    CHECK(isotropic_vector({h5}).y == vec({1, 0, 0}));

    RatVec y = isotropic_vector({diag({1, 1, 1, -6})}).y;
    CHECK(evaluate_form(diag({1, 1, 1, -6}), y) == 0);

    // x^2 + y^2 + z^2 = 7 w^2 has no rational solution, so the search can only run out of budget.
    try {
        isotropic_vector({diag({1, 1, 1, -7}), 20000});
        FAIL("expected budget exhaustion");
    } catch (const OracleBudgetExhausted& e) {
        CHECK(e.nodes > 20000);
        CHECK(e.searched_bound >= 1);
    }

    CHECK_THROWS_AS(isotropic_vector({diag({1, 2, 3})}), PreconditionViolation);
    CHECK_THROWS_AS(isotropic_vector({diag({1, -1, 0})}), PreconditionViolation);
}

TEST_CASE("baseline oracle is deterministic and content-normalized") {
    Rng rng(77);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = static_cast<std::size_t>(rng.uniform(5, 9));
        SymMatrix q = random_sym(rng, n, 7);
        if (sgn(determinant(q.matrix())) == 0) {
            continue;
        }
        Signature sig = inertia(q);
        if (sig.r == 0 || sig.s == 0) {
            continue;
        }
        RatVec a = isotropic_vector({q}).y;
        RatVec b = isotropic_vector({q}).y;
        CHECK(a == b);
        CHECK(evaluate_form(q, a) == 0);
        CHECK(content_normalized(a) == a);
    }
}

TEST_CASE("baseline finds isotropic vectors of desk-scale diagonal forms") {
    Rng rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = static_cast<std::size_t>(rng.uniform(5, 13));
        SymMatrix q = random_indefinite_diagonal(rng, n, 10);
        OracleResult r = isotropic_vector({q});
        CHECK(r.verified);
        CHECK(evaluate_form(q, r.y) == 0);
        CHECK_FALSE(is_zero_vector(r.y));
    }
}

TEST_CASE("external solver protocol") {
    SymMatrix q = diag({1, -1, 2, -2, 3});
    ExternalSolver echo{"cat > /dev/null; echo '1 1 0 0 0'", 10};
    OracleResult r = isotropic_vector({q, kDefaultOracleBudget, true}, &echo);
    CHECK(r.y == vec({1, 1, 0, 0, 0}));
    CHECK(r.verified);

    ExternalSolver real = ExternalSolver::from_env(stub("solve"));
    SymMatrix g{{3, 1, 0, 0, 0}, {1, -2, 1, 0, 0}, {0, 1, 5, 2, 0}, {0, 0, 2, -7, 1}, {0, 0, 0, 1, 4}};
    RatVec y = external_solve(g, real).y;
    CHECK(evaluate_form(g, y) == 0);

    CHECK_THROWS_AS(external_solve(q, ExternalSolver{"cat > /dev/null; echo '1 0 0 0 0'", 10}), VerificationFailure);
    CHECK_THROWS_AS(external_solve(q, ExternalSolver{stub("wrong"), 10}), VerificationFailure);
    CHECK_THROWS_AS(external_solve(q, ExternalSolver{"cat > /dev/null; echo '0 0 0 0 0'", 10}), VerificationFailure);
    CHECK_THROWS_AS(external_solve(q, ExternalSolver{stub("garbage"), 10}), OracleFailure);
    try {
        external_solve(q, ExternalSolver{stub("fail"), 10});
        FAIL("expected FAIL to surface");
    } catch (const OracleFailure& e) {
        CHECK(e.stderr_text.find("no solution") != std::string::npos);
    }
    CHECK_THROWS_AS(external_solve(q, ExternalSolver{stub("crash"), 10}), OracleFailure);
    CHECK_THROWS_AS(external_solve(q, ExternalSolver{"sleep 5", 1}), OracleBudgetExhausted);

    setenv("ORACLE_TIMEOUT_SECS", "7", 1);
    CHECK(ExternalSolver::from_env("x").timeout_secs == 7);
    unsetenv("ORACLE_TIMEOUT_SECS");
    CHECK(ExternalSolver::from_env("x").timeout_secs == 60);
}

TEST_CASE("wire request format") {
    SymMatrix q{{1, Rat(1, 2)}, {Rat(1, 2), -3}};
    CHECK(wire_request(q) == "2\n1/1 1/2\n1/2 -3/1\n");
}

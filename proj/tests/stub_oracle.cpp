// Stand-in external solver speaking the oracle wire protocol.
// Modes: solve (default), wrong, fail, garbage, crash.
#include <iostream>
#include <string>

#include "twoquad/oracle.hpp"

int main(int argc, char** argv) {
    using namespace twoquad;
    const std::string mode = argc > 1 ? argv[1] : "solve";
    std::size_t n = 0;
    std::cin >> n;
    SymMatrix q(n);
    RatMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            std::string tok;
            std::cin >> tok;
            m(i, j) = parse_rat(tok);
        }
    }
    q = SymMatrix(m);
    if (mode == "fail") {
        std::cerr << "no solution found\n";
        std::cout << "FAIL\n";
        return 0;
    }
    if (mode == "garbage") {
        std::cout << "1 two 3\n";
        return 0;
    }
    if (mode == "crash") {
        std::cerr << "stub crashed\n";
        return 3;
    }
    RatVec y = baseline_isotropic(q, kDefaultOracleBudget).y;
    if (mode == "wrong") {
        y[0] += 1;
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::cout << (i ? " " : "") << to_string(y[i]);
    }
    std::cout << "\n";
    return 0;
}

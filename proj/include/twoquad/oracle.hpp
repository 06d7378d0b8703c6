#pragma once

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fcntl.h>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "twoquad/inertia.hpp"
#include "twoquad/lll.hpp"

namespace twoquad {

inline constexpr long kDefaultOracleBudget = 10'000'000;

struct OracleRequest {
    SymMatrix q;
    long effort = kDefaultOracleBudget;
    bool allow_external = false;
};

struct OracleResult {
    RatVec y;
    bool verified = false;
};

/// Command line of an external isotropic-vector solver, run through /bin/sh.
struct ExternalSolver {
    std::string command;
    long timeout_secs = 60;

    /// Reads the timeout from ORACLE_TIMEOUT_SECS when set.
    static ExternalSolver from_env(std::string command) {
        ExternalSolver s{std::move(command), 60};
        if (const char* env = std::getenv("ORACLE_TIMEOUT_SECS")) {
            char* end = nullptr;
            long v = std::strtol(env, &end, 10);
            if (end != env && *end == '\0' && v > 0) {
                s.timeout_secs = v;
            }
        }
        return s;
    }
};

/// Request wire format: n, then n rows of n rationals written as p/q.
inline std::string wire_request(const SymMatrix& q) {
    std::ostringstream os;
    os << q.n() << '\n';
    for (std::size_t i = 0; i < q.n(); ++i) {
        for (std::size_t j = 0; j < q.n(); ++j) {
            if (j > 0) {
                os << ' ';
            }
            os << q(i, j).get_num().get_str() << '/' << q(i, j).get_den().get_str();
        }
        os << '\n';
    }
    return os.str();
}

/// Returns y unchanged after checking y != 0 and y Q y^t = 0 exactly.
inline RatVec verify_isotropic(const SymMatrix& q, const RatVec& y, const std::string& source) {
    if (y.size() != q.n()) {
        throw VerificationFailure(source + ": vector has wrong length");
    }
    if (is_zero_vector(y)) {
        throw VerificationFailure(source + ": zero vector");
    }
    if (sgn(evaluate_form(q, y)) != 0) {
        throw VerificationFailure(source + ": q(y) = " + to_string(evaluate_form(q, y)) + " is not zero");
    }
    return y;
}

namespace detail {

struct ProcessOutput {
    int exit_code = -1;
    bool timed_out = false;
    std::string out;
    std::string err;
};

inline ProcessOutput run_shell(const std::string& command, const std::string& input, long timeout_secs) {
    int in_pipe[2];
    int out_pipe[2];
    int err_pipe[2];
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0 || pipe(err_pipe) != 0) {
        throw OracleFailure("pipe failed", std::strerror(errno));
    }
    pid_t pid = fork();
    if (pid < 0) {
        throw OracleFailure("fork failed", std::strerror(errno));
    }
    if (pid == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        dup2(err_pipe[1], STDERR_FILENO);
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) {
            close(fd);
        }
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[1]);
    for (int fd : {in_pipe[1], out_pipe[0], err_pipe[0]}) {
        fcntl(fd, F_SETFL, fcntl(fd, F_GETFL) | O_NONBLOCK);
    }
    // A child that exits without reading stdin must not kill us.
    struct sigaction ignore {};
    struct sigaction previous {};
    ignore.sa_handler = SIG_IGN;
    sigaction(SIGPIPE, &ignore, &previous);

    ProcessOutput res;
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(timeout_secs);
    std::size_t written = 0;
    int wfd = in_pipe[1];
    int ofd = out_pipe[0];
    int efd = err_pipe[0];
    if (input.empty()) {
        close(wfd);
        wfd = -1;
    }
    char buf[4096];
    while (ofd >= 0 || efd >= 0) {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            res.timed_out = true;
            break;
        }
        std::vector<pollfd> fds;
        if (wfd >= 0) {
            fds.push_back({wfd, POLLOUT, 0});
        }
        if (ofd >= 0) {
            fds.push_back({ofd, POLLIN, 0});
        }
        if (efd >= 0) {
            fds.push_back({efd, POLLIN, 0});
        }
        int rc = poll(fds.data(), fds.size(), static_cast<int>(std::min<long>(left.count(), 1000)));
        if (rc < 0 && errno != EINTR) {
            break;
        }
        for (const pollfd& p : fds) {
            if (p.revents == 0) {
                continue;
            }
            if (p.fd == wfd) {
                ssize_t k = write(wfd, input.data() + written, input.size() - written);
                if (k > 0) {
                    written += static_cast<std::size_t>(k);
                }
                if (k < 0 && errno != EAGAIN) {
                    written = input.size();
                }
                if (written == input.size()) {
                    close(wfd);
                    wfd = -1;
                }
            } else {
                ssize_t k = read(p.fd, buf, sizeof buf);
                if (k > 0) {
                    (p.fd == ofd ? res.out : res.err).append(buf, static_cast<std::size_t>(k));
                } else if (k == 0 || errno != EAGAIN) {
                    close(p.fd);
                    (p.fd == ofd ? ofd : efd) = -1;
                }
            }
        }
    }
    for (int fd : {wfd, ofd, efd}) {
        if (fd >= 0) {
            close(fd);
        }
    }
    if (res.timed_out) {
        kill(pid, SIGKILL);
    }
    int status = 0;
    waitpid(pid, &status, 0);
    sigaction(SIGPIPE, &previous, nullptr);
    if (WIFEXITED(status)) {
        res.exit_code = WEXITSTATUS(status);
    }
    return res;
}

}  // namespace detail

/// Delegates to an external solver and re-verifies its answer exactly.
inline OracleResult external_solve(const SymMatrix& q, const ExternalSolver& solver) {
    if (solver.command.empty()) {
        throw PreconditionViolation("no external solver configured");
    }
    detail::ProcessOutput p = detail::run_shell(solver.command, wire_request(q), solver.timeout_secs);
    if (p.timed_out) {
        throw OracleBudgetExhausted("external solver timed out after " + std::to_string(solver.timeout_secs) + " s",
                                    0, 0);
    }
    if (p.exit_code != 0) {
        throw OracleFailure("external solver exited with code " + std::to_string(p.exit_code), p.err);
    }
    std::istringstream is(p.out);
    std::vector<std::string> tokens;
    for (std::string t; is >> t;) {
        tokens.push_back(t);
    }
    if (tokens.size() == 1 && tokens[0] == "FAIL") {
        throw OracleFailure("external solver reported FAIL", p.err);
    }
    if (tokens.size() != q.n()) {
        throw OracleFailure("malformed external response: expected " + std::to_string(q.n()) + " rationals, got " +
                                std::to_string(tokens.size()),
                            p.err);
    }
    RatVec y(q.n());
    for (std::size_t i = 0; i < q.n(); ++i) {
        if (!try_parse_rat(tokens[i], y[i])) {
            throw OracleFailure("malformed external response: '" + tokens[i] + "'", p.err);
        }
    }
    verify_isotropic(q, y, "external solver");
    return {content_normalized(y), true};
}

namespace detail {

// Integer Gram matrix with the same isotropic vectors as q.
inline Matrix<Int> integral_gram(const SymMatrix& q) {
    Int l = lcm_of_denominators(q.matrix().data());
    Int g = 0;
    const std::size_t n = q.n();
    Matrix<Int> out(n, n, Int(0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            out(i, j) = q(i, j).get_num() * (l / q(i, j).get_den());
            mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), out(i, j).get_mpz_t());
        }
    }
    if (g > 1) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                out(i, j) /= g;
            }
        }
    }
    return out;
}

inline Int to_int(__int128 v) {
    bool neg = v < 0;
    unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
    Int hi(static_cast<unsigned long>(u >> 64));
    Int lo(static_cast<unsigned long>(u & 0xFFFFFFFFFFFFFFFFULL));
    Int r = (hi << 64) + lo;
    return neg ? Int(-r) : r;
}

inline __int128 to_i128(const Int& z) {
    Int a = abs(z);
    Int hi = a >> 64;
    Int lo = a - (hi << 64);
    unsigned __int128 u = (static_cast<unsigned __int128>(hi.get_ui()) << 64) | lo.get_ui();
    __int128 v = static_cast<__int128>(u);
    return z < 0 ? -v : v;
}

inline bool exact_sqrt(const Int& d, Int& s) {
    if (d < 0) {
        return false;
    }
    mpz_sqrt(s.get_mpz_t(), d.get_mpz_t());
    return s * s == d;
}

inline bool exact_sqrt(__int128 d, __int128& s) {
    if (d < 0) {
        return false;
    }
    if (d < (static_cast<__int128>(1) << 100)) {
        __int128 r = static_cast<__int128>(std::sqrt(static_cast<long double>(d)));
        while (r > 0 && r * r > d) {
            --r;
        }
        while ((r + 1) * (r + 1) <= d) {
            ++r;
        }
        s = r;
        return r * r == d;
    }
    Int t;
    bool ok = exact_sqrt(to_int(d), t);
    s = to_i128(t);
    return ok;
}

inline Int to_int(const Int& v) { return v; }

using RealMatrix = std::vector<std::vector<long double>>;

// Positive definite majorant |G| = V |Lambda| V^t, from a cyclic Jacobi eigendecomposition.
inline RealMatrix abs_majorant(const Matrix<Int>& g) {
    const std::size_t n = g.rows();
    RealMatrix a(n, std::vector<long double>(n));
    RealMatrix v(n, std::vector<long double>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        v[i][i] = 1;
        for (std::size_t j = 0; j < n; ++j) {
            a[i][j] = static_cast<long double>(g(i, j).get_d());
        }
    }
    auto rotate = [](long double& x, long double& y, long double c, long double s) {
        const long double t = x;
        x = c * t - s * y;
        y = s * t + c * y;
    };
    for (int sweep = 0; sweep < 64; ++sweep) {
        long double off = 0;
        long double total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                (i == j ? total : off) += a[i][j] * a[i][j];
            }
        }
        if (off <= 1e-30L * total) {
            break;
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a[p][q] == 0) {
                    continue;
                }
                const long double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
                const long double t = (theta >= 0 ? 1 : -1) / (std::fabs(theta) + std::sqrt(theta * theta + 1));
                const long double c = 1 / std::sqrt(t * t + 1);
                const long double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    rotate(a[k][p], a[k][q], c, s);
                }
                for (std::size_t k = 0; k < n; ++k) {
                    rotate(a[p][k], a[q][k], c, s);
                }
                for (std::size_t k = 0; k < n; ++k) {
                    rotate(v[k][p], v[k][q], c, s);
                }
            }
        }
    }
    RealMatrix m(n, std::vector<long double>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < n; ++k) {
                m[i][j] += v[i][k] * std::fabs(a[k][k]) * v[j][k];
            }
        }
    }
    return m;
}

inline RealMatrix real_inverse(RealMatrix a) {
    const std::size_t n = a.size();
    RealMatrix inv(n, std::vector<long double>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        inv[i][i] = 1;
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) {
                piv = r;
            }
        }
        std::swap(a[c], a[piv]);
        std::swap(inv[c], inv[piv]);
        const long double d = a[c][c];
        for (std::size_t k = 0; k < n; ++k) {
            a[c][k] /= d;
            inv[c][k] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r != c && a[r][c] != 0) {
                const long double f = a[r][c];
                for (std::size_t k = 0; k < n; ++k) {
                    a[r][k] -= f * a[c][k];
                    inv[r][k] -= f * inv[c][k];
                }
            }
        }
    }
    return inv;
}

// Fincke-Pohst walk over x_{n-1}, ..., x_1 inside the ellipsoid x M x^t <= r of the majorant M;
// x_0 is then solved exactly from G[x] = 0. The outermost nonzero coordinate is kept positive so
// each line through the origin is met once.
template <class N>
class EllipsoidSearch {
public:
    EllipsoidSearch(const Matrix<N>& g, const RealMatrix& m, std::uint64_t& nodes, std::uint64_t budget)
        : g_(g), n_(g.rows()), nodes_(nodes), budget_(budget), x_(n_, N(0)), xi_(n_, 0), d_(n_, 0),
          mu_(n_, std::vector<long double>(n_, 0)) {
        // x M x^t = sum_i d_i (x_i + sum_{j>i} mu_ij x_j)^2.
        RealMatrix w = m;
        for (std::size_t i = 0; i < n_; ++i) {
            d_[i] = w[i][i];
            for (std::size_t j = i + 1; j < n_; ++j) {
                mu_[i][j] = w[i][j] / w[i][i];
            }
            for (std::size_t j = i + 1; j < n_; ++j) {
                for (std::size_t k = i + 1; k < n_; ++k) {
                    w[j][k] -= mu_[i][j] * w[i][k];
                }
            }
        }
    }

    bool run(long double r) {
        r_ = r;
        return walk(n_ - 1, 0, true);
    }
    const std::vector<N>& solution() const { return x_; }
    bool exhausted() const { return exhausted_; }

private:
    bool walk(std::size_t i, long double partial, bool all_zero) {
        if (++nodes_ > budget_) {
            exhausted_ = true;
            return false;
        }
        if (i == 0) {
            return !all_zero && solve_first();
        }
        long double c = 0;
        for (std::size_t j = i + 1; j < n_; ++j) {
            c -= mu_[i][j] * static_cast<long double>(xi_[j]);
        }
        const long double room = (r_ - partial) / d_[i];
        if (!(room >= 0)) {
            return false;
        }
        const long double h = std::sqrt(room);
        long lo = static_cast<long>(std::ceil(c - h));
        const long hi = static_cast<long>(std::floor(c + h));
        if (all_zero) {
            lo = std::max(lo, 0L);
        }
        for (long v = lo; v <= hi; ++v) {
            const long double t = static_cast<long double>(v) - c;
            xi_[i] = v;
            x_[i] = N(v);
            if (walk(i - 1, partial + d_[i] * t * t, all_zero && v == 0)) {
                return true;
            }
            if (exhausted_) {
                return false;
            }
        }
        xi_[i] = 0;
        x_[i] = N(0);
        return false;
    }

    bool solve_first() {
        const N& a = g_(0, 0);
        N b(0);
        N c(0);
        for (std::size_t j = 1; j < n_; ++j) {
            if (x_[j] == N(0)) {
                continue;
            }
            b += N(2) * g_(0, j) * x_[j];
            N row(0);
            for (std::size_t k = 1; k < n_; ++k) {
                row += g_(j, k) * x_[k];
            }
            c += row * x_[j];
        }
        if (a == N(0)) {
            if (b == N(0)) {
                return false;
            }
            if (c % b == N(0)) {
                x_[0] = N(-c / b);
                return true;
            }
            return false;
        }
        N s;
        if (!exact_sqrt(N(b * b - N(4) * a * c), s)) {
            return false;
        }
        for (const N& num : {N(-b - s), N(-b + s)}) {
            if (num % (N(2) * a) == N(0)) {
                x_[0] = N(num / (N(2) * a));
                return true;
            }
        }
        return false;
    }

    const Matrix<N>& g_;
    std::size_t n_;
    std::uint64_t& nodes_;
    std::uint64_t budget_;
    std::vector<N> x_;
    std::vector<long> xi_;
    std::vector<long double> d_;
    RealMatrix mu_;
    long double r_ = 0;
    bool exhausted_ = false;
};

// True when the discriminant of every quadratic met with coordinates up to `extent` fits in 128 bits.
inline bool fits_i128(const Matrix<Int>& g, long double extent) {
    Int m = 0;
    for (const Int& x : g.data()) {
        if (abs(x) > m) {
            m = abs(x);
        }
    }
    const double bits = 2 * static_cast<double>(mpz_sizeinbase(m.get_mpz_t(), 2)) +
                        2 * std::log2(static_cast<double>(g.rows()) * (static_cast<double>(extent) + 1)) + 4;
    return bits < 124;
}

struct EllipsoidOutcome {
    std::optional<std::vector<Int>> x;
    /// Square root of the largest radius searched completely.
    long searched = 0;
    std::uint64_t nodes = 0;
};

// Isotropic integer vector of an integral Gram matrix, walking ellipsoids of the majorant |G| with
// doubling radius until the node budget runs out. The solved coordinate is the one with the
// longest extent in the ellipsoid.
inline EllipsoidOutcome enumerate_isotropic(const Matrix<Int>& g0, long budget) {
    const std::size_t n = g0.rows();
    RealMatrix m0 = abs_majorant(g0);
    RealMatrix inv = real_inverse(m0);
    std::size_t lead = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (inv[i][i] > inv[lead][lead]) {
            lead = i;
        }
    }
    std::vector<std::size_t> order{lead};
    for (std::size_t i = 0; i < n; ++i) {
        if (i != lead) {
            order.push_back(i);
        }
    }
    Matrix<Int> g(n, n);
    RealMatrix m(n, std::vector<long double>(n));
    long double widest = 0;
    long double r = m0[0][0];
    for (std::size_t i = 0; i < n; ++i) {
        widest = std::max(widest, inv[i][i]);
        r = std::min(r, m0[i][i]);
        for (std::size_t j = 0; j < n; ++j) {
            g(i, j) = g0(order[i], order[j]);
            m[i][j] = m0[order[i]][order[j]];
        }
    }
    EllipsoidOutcome out;
    std::optional<Matrix<__int128>> small;
    for (;; r *= 2) {
        const long double extent = std::sqrt(r * widest);
        std::optional<std::vector<Int>> found;
        bool exhausted = false;
        if (fits_i128(g, extent)) {
            if (!small) {
                small = Matrix<__int128>(n, n, 0);
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                        (*small)(i, j) = to_i128(g(i, j));
                    }
                }
            }
            EllipsoidSearch<__int128> s(*small, m, out.nodes, static_cast<std::uint64_t>(budget));
            if (s.run(r)) {
                found.emplace();
                for (__int128 v : s.solution()) {
                    found->push_back(to_int(v));
                }
            }
            exhausted = s.exhausted();
        } else {
            EllipsoidSearch<Int> s(g, m, out.nodes, static_cast<std::uint64_t>(budget));
            if (s.run(r)) {
                found = s.solution();
            }
            exhausted = s.exhausted();
        }
        if (found) {
            std::vector<Int> x(n);
            for (std::size_t i = 0; i < n; ++i) {
                x[order[i]] = (*found)[i];
            }
            out.x = std::move(x);
            return out;
        }
        if (exhausted) {
            return out;
        }
        out.searched = static_cast<long>(std::floor(std::sqrt(r)));
    }
}

}  // namespace detail

/// Baseline search: zero diagonal entries, opposite pairs e_i +- e_j, isotropic vectors met during
/// indefinite lattice reduction, then ellipsoid enumeration in the reduced basis.
inline OracleResult baseline_isotropic(const SymMatrix& q, long budget) {
    const std::size_t n = q.n();
    auto done = [&](const RatVec& y) {
        return OracleResult{content_normalized(verify_isotropic(q, y, "baseline oracle")), true};
    };
    for (std::size_t i = 0; i < n; ++i) {
        if (sgn(q(i, i)) == 0) {
            return done(unit_vector(n, i));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            for (int sign : {1, -1}) {
                if (sgn(q(i, i) + q(j, j) + Rat(2 * sign) * q(i, j)) == 0) {
                    RatVec y(n, Rat(0));
                    y[i] = 1;
                    y[j] = sign;
                    return done(y);
                }
            }
        }
    }
    Matrix<Int> g = detail::integral_gram(q);
    RatMatrix gr(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            gr(i, j) = g(i, j);
        }
    }
    LllResult red = lll_reduce(identity_rat(n), gr);
    if (red.isotropic) {
        return done(*red.isotropic);
    }
    RatMatrix reduced = congruence(red.basis, gr);
    Matrix<Int> gi(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            gi(i, j) = reduced(i, j).get_num();
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (gi(i, i) == 0) {
            return done(red.basis.row(i));
        }
    }
    detail::EllipsoidOutcome e = detail::enumerate_isotropic(gi, budget);
    if (!e.x) {
        throw OracleBudgetExhausted("isotropic search budget of " + std::to_string(budget) +
                                        " nodes exhausted after radius " + std::to_string(e.searched),
                                    e.searched, e.nodes);
    }
    return done(row_times(RatVec(e.x->begin(), e.x->end()), red.basis));
}

/// Nonzero rational isotropic vector of a nondegenerate indefinite form. With allow_external and a
/// configured solver, the external solver answers instead of the baseline.
inline OracleResult isotropic_vector(const OracleRequest& req, const ExternalSolver* solver = nullptr) {
    const std::size_t n = req.q.n();
    if (n == 0 || sgn(determinant(req.q.matrix())) == 0) {
        throw PreconditionViolation("oracle needs a nondegenerate form");
    }
    Signature sig = inertia(req.q);
    if (sig.r == 0 || sig.s == 0) {
        throw PreconditionViolation("oracle needs an indefinite form, got " + sig.str());
    }
    if (req.effort <= 0) {
        throw PreconditionViolation("oracle budget must be positive");
    }
    if (req.allow_external && solver != nullptr && !solver->command.empty()) {
        return external_solve(req.q, *solver);
    }
    return baseline_isotropic(req.q, req.effort);
}

/// Oracle configuration handed to the reduction and solving stages.
struct Oracle {
    long budget = kDefaultOracleBudget;
    std::optional<ExternalSolver> external;

    RatVec operator()(const SymMatrix& q) const {
        OracleRequest req{q, budget, external.has_value()};
        return isotropic_vector(req, external ? &*external : nullptr).y;
    }
};

}  // namespace twoquad

// twoquad: check, analyze, solve and verify pairs of rational quadratic forms, and generate instances.
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "twoquad/generate.hpp"
#include "twoquad/instance_io.hpp"
#include "twoquad/rational_solution.hpp"

namespace {

using namespace twoquad;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kInsolvable = 2,
    kOracleBudget = 3,
    kPrecisionCap = 4,
    kVerifyFail = 5,
};

struct IoError : Error {
    using Error::Error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) {
        throw IoError("cannot write " + path);
    }
}

Instance load_instance(const std::string& path) {
    try {
        return parse_instance_any(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what(), e.line, e.column);
    }
}

double approx(const Rat& r) { return r.get_d(); }

// Long rationals are shown as decimals so the table stays aligned.
std::string short_rat(const Rat& r) {
    std::string s = r.get_str();
    if (s.size() <= 14) {
        return s;
    }
    std::ostringstream os;
    os << std::setprecision(8) << "~" << approx(r);
    return os.str();
}

std::string root_label(std::size_t k) { return "r" + std::to_string(k + 1); }

std::string format_approx(const IsolatingInterval& iv) {
    std::ostringstream os;
    os << std::setprecision(8) << approx((iv.lo + iv.hi) / 2);
    return os.str();
}

json signature_json(const Signature& s) { return json::array({s.r, s.s}); }

// Exit code and one-line message for a failure of the pipeline.
std::pair<int, std::string> classify(const std::exception_ptr& ep) {
    try {
        std::rethrow_exception(ep);
    } catch (const RealInsolvable& e) {
        return {kInsolvable, "REAL-INSOLVABLE, witness λ = " + e.witness.get_str() + ", signature " +
                                 Signature{e.r, e.s}.str()};
    } catch (const OracleBudgetExhausted& e) {
        return {kOracleBudget, std::string("oracle budget exhausted: ") + e.what()};
    } catch (const OracleFailure& e) {
        std::string msg = std::string("oracle failure: ") + e.what();
        if (!e.stderr_text.empty()) {
            msg += " (solver stderr: " + e.stderr_text + ")";
        }
        return {kOracleBudget, msg};
    } catch (const VerificationFailure& e) {
        return {kOracleBudget, std::string("oracle answer rejected: ") + e.what()};
    } catch (const PrecisionExhausted& e) {
        return {kPrecisionCap, std::string("precision cap reached: ") + e.what()};
    } catch (const HypothesisViolation& e) {
        return {kUsage, std::string("hypothesis H fails: ") + e.what()};
    } catch (const InternalError& e) {
        return {kUsage, std::string("internal error: ") + e.what()};
    } catch (const std::exception& e) {
        return {kUsage, std::string("error: ") + e.what()};
    }
}

int report_failure(const std::exception_ptr& ep) {
    auto [code, msg] = classify(ep);
    (code == kInsolvable ? std::cout : std::cerr) << msg << '\n';
    return code;
}

int cmd_check(const std::string& path, bool as_json) {
    Instance inst = load_instance(path);
    SmoothnessReport h = check_hypothesis_h(inst.q0, inst.q1);
    const int degree = h.delta.is_zero() ? -1 : h.delta.degree();
    json out;
    out["n"] = inst.n();
    out["hypothesis_h"] = h.holds;
    out["degree"] = degree;
    if (!h.holds) {
        out["reason"] = h.reason;
        if (as_json) {
            std::cout << out.dump(1) << '\n';
        } else {
            std::cout << "H: FAIL " << h.reason << '\n';
            std::cout << "degree of Δ: " << degree << '\n';
        }
        return kUsage;
    }
    PencilProfile prof = signature_profile(inst.q0, inst.q1);
    if (as_json) {
        out["m"] = prof.m();
        json segs = json::array();
        for (std::size_t k = 0; k < prof.segments.size(); ++k) {
            segs.push_back({{"sample", prof.sample_points[k].get_str()},
                            {"signature", signature_json(prof.segments[k])},
                            {"d", prof.segments[k].d()}});
        }
        json roots = json::array();
        for (std::size_t k = 0; k < prof.roots.size(); ++k) {
            roots.push_back({{"lo", prof.roots[k].lo.get_str()},
                             {"hi", prof.roots[k].hi.get_str()},
                             {"signature", signature_json(prof.at_roots[k])}});
        }
        out["segments"] = std::move(segs);
        out["roots"] = std::move(roots);
        std::cout << out.dump(1) << '\n';
        return kOk;
    }
    std::cout << "H: OK, m = " << prof.m() << ", profile:";
    for (const Signature& s : prof.segments) {
        std::cout << ' ' << s.str();
    }
    std::cout << '\n';
    std::cout << "degree of Δ: " << degree << '\n';
    std::cout << "real roots: " << prof.m() << '\n';
    std::cout << std::left << std::setw(22) << "segment or root" << std::setw(16) << "sample" << std::setw(12)
              << "signature"
              << "d" << '\n';
    for (std::size_t k = 0; k < prof.segments.size(); ++k) {
        std::string seg = "(" + (k == 0 ? std::string("-inf") : root_label(k - 1)) + ", " +
                          (k == prof.roots.size() ? std::string("+inf") : root_label(k)) + ")";
        std::cout << std::setw(22) << seg << std::setw(16) << short_rat(prof.sample_points[k]) << std::setw(12)
                  << prof.segments[k].str() << prof.segments[k].d() << '\n';
        if (k < prof.roots.size()) {
            std::cout << std::setw(22) << (root_label(k) + " ~ " + format_approx(prof.roots[k])) << std::setw(16) << ""
                      << std::setw(12) << prof.at_roots[k].str() << prof.at_roots[k].d() << '\n';
        }
    }
    return kOk;
}

int cmd_analyze(const std::string& path, bool as_json) {
    Instance inst = load_instance(path);
    SolvabilityReport rep = is_real_solvable(inst.q0, inst.q1);
    if (!rep.hypothesis_h) {
        throw HypothesisViolation(rep.hypothesis_reason);
    }
    BalancedLambda bal = find_balanced_lambda_traced(inst.q0, inst.q1);
    Signature bal_sig = signature_at(inst.q0, inst.q1, bal.lambda);
    if (as_json) {
        json out;
        out["n"] = inst.n();
        out["real_solvable"] = rep.solvable_over_r;
        if (!rep.solvable_over_r) {
            out["witness"] = rep.definite_lambda->get_str();
            out["witness_signature"] = signature_json(rep.witness_signature);
        }
        out["balanced_lambda"] = bal.lambda.get_str();
        out["balanced_signature"] = signature_json(bal_sig);
        out["dichotomy_steps"] = bal.steps;
        std::cout << out.dump(1) << '\n';
    } else {
        if (rep.solvable_over_r) {
            std::cout << "REAL-SOLVABLE\n";
        } else {
            std::cout << "REAL-INSOLVABLE, witness λ = " << rep.definite_lambda->get_str() << ", signature "
                      << rep.witness_signature.str() << '\n';
        }
        std::cout << "balanced λ = " << bal.lambda.get_str() << ", signature " << bal_sig.str() << ", "
                  << bal.steps << " dichotomy steps\n";
    }
    return rep.solvable_over_r ? kOk : kInsolvable;
}

struct SolveConfig {
    long budget = kDefaultOracleBudget;
    std::string oracle_cmd;
    long precision_bits = PrecisionPolicy{}.max_bits;
    std::uint64_t seed = 0;
    std::string output;
    unsigned jobs = 1;
    bool json = false;
};

struct SolveOutcome {
    int code = kOk;
    std::string message;
    std::string certificate;
    std::string target;
};

SolveOutcome solve_one(const std::string& path, const SolveConfig& cfg, const std::string& target) {
    SolveOutcome out;
    out.target = target;
    try {
        Instance inst = load_instance(path);
        Oracle oracle;
        oracle.budget = cfg.budget;
        if (!cfg.oracle_cmd.empty()) {
            oracle.external = ExternalSolver::from_env(cfg.oracle_cmd);
        }
        SolveOptions opt;
        opt.seed = cfg.seed;
        opt.precision.max_bits = cfg.precision_bits;
        opt.precision.initial_bits = std::min(opt.precision.initial_bits, cfg.precision_bits);
        SolutionCertificate cert = solve_pair(inst.q0, inst.q1, oracle, opt);
        CertificateFile file{cert.x, cert.residue0, cert.residue1, hex64(cert.digest)};
        out.certificate = cfg.json ? emit_certificate_json(file) : emit_certificate(file);
        out.message = "SOLVED, digest " + file.digest;
    } catch (...) {
        auto [code, msg] = classify(std::current_exception());
        out.code = code;
        out.message = msg;
    }
    return out;
}

int cmd_solve(const std::vector<std::string>& inputs, const SolveConfig& cfg) {
    if (cfg.budget <= 0) {
        throw PreconditionViolation("--budget must be positive");
    }
    if (cfg.precision_bits < 16) {
        throw PreconditionViolation("--precision-bits must be at least 16");
    }
    const std::string ext = cfg.json ? ".cert.json" : ".cert";
    std::vector<std::string> targets;
    if (inputs.size() == 1) {
        targets.push_back(cfg.output);
    } else {
        if (!cfg.output.empty()) {
            fs::create_directories(cfg.output);
        }
        for (const std::string& in : inputs) {
            fs::path p(in);
            targets.push_back(cfg.output.empty() ? in + ext : (fs::path(cfg.output) / (p.filename().string() + ext)).string());
        }
    }

    std::vector<SolveOutcome> results(inputs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < inputs.size(); i = next++) {
            results[i] = solve_one(inputs[i], cfg, targets[i]);
        }
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(cfg.jobs, static_cast<unsigned>(inputs.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < jobs; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (std::thread& t : pool) {
        t.join();
    }

    int first_failure = kOk;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const SolveOutcome& r = results[i];
        const std::string prefix = inputs.size() > 1 ? inputs[i] + ": " : "";
        if (r.code == kOk) {
            write_output(r.target, r.certificate);
            if (!r.target.empty() && r.target != "-") {
                std::cout << prefix << r.message << ", written to " << r.target << '\n';
            }
        } else {
            (r.code == kInsolvable ? std::cout : std::cerr) << prefix << r.message << '\n';
            if (first_failure == kOk) {
                first_failure = r.code;
            }
        }
    }
    return first_failure;
}

int cmd_verify(const std::string& instance_path, const std::string& cert_path, bool as_json) {
    Instance inst = load_instance(instance_path);
    CertificateFile cert;
    try {
        cert = parse_certificate_any(read_file(cert_path));
    } catch (const ParseError& e) {
        throw ParseError(cert_path + ": " + e.what(), e.line, e.column);
    }
    if (cert.x.size() != inst.n()) {
        throw DimensionMismatch("certificate has " + std::to_string(cert.x.size()) + " coordinates, instance has n = " +
                                std::to_string(inst.n()));
    }
    const Rat v0 = evaluate_form(inst.q0, cert.x);
    const Rat v1 = evaluate_form(inst.q1, cert.x);
    const bool nonzero = !is_zero_vector(cert.x);
    const bool pass = nonzero && sgn(v0) == 0 && sgn(v1) == 0;
    if (as_json) {
        json out;
        out["q0"] = v0.get_str();
        out["q1"] = v1.get_str();
        out["nonzero"] = nonzero;
        out["stored_residues_match"] = cert.residue0 == v0 && cert.residue1 == v1;
        out["verdict"] = pass ? "PASS" : "FAIL";
        std::cout << out.dump(1) << '\n';
    } else {
        std::cout << "q0(x) = " << v0.get_str() << '\n';
        std::cout << "q1(x) = " << v1.get_str() << '\n';
        std::cout << "x nonzero: " << (nonzero ? "yes" : "no") << '\n';
        if (cert.residue0 != v0 || cert.residue1 != v1) {
            std::cout << "stored residues " << cert.residue0.get_str() << ", " << cert.residue1.get_str()
                      << " differ from the recomputed values\n";
        }
        std::cout << (pass ? "PASS" : "FAIL") << '\n';
    }
    return pass ? kOk : kVerifyFail;
}

int cmd_generate(const GenerateParams& p, const std::string& output, bool as_json) {
    Instance inst = generate_instance(p);
    write_output(output, as_json ? emit_instance_json(inst) : emit_instance(inst));
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rational common zeros of pairs of quadratic forms"};
    app.require_subcommand(1);
    app.fallthrough();
    bool as_json = false;
    app.add_flag("--json", as_json, "Read and write JSON instead of plain text")->capture_default_str();

    std::string check_file;
    CLI::App* check = app.add_subcommand("check", "Hypothesis H diagnostics and the signature profile of the pencil");
    check->add_option("instance", check_file, "Instance file")->required();

    std::string analyze_file;
    CLI::App* analyze = app.add_subcommand("analyze", "Decide real solvability and report a balanced pencil member");
    analyze->add_option("instance", analyze_file, "Instance file")->required();

    std::vector<std::string> solve_files;
    SolveConfig cfg;
    CLI::App* solve = app.add_subcommand("solve", "Compute an exact rational common zero (n >= 13)");
    solve->add_option("instances", solve_files, "Instance files")->required();
    solve->add_option("--budget", cfg.budget, "Node budget of each isotropic-vector search")->capture_default_str();
    solve->add_option("--oracle-cmd", cfg.oracle_cmd, "External isotropic-vector solver, run through /bin/sh");
    solve->add_option("--precision-bits", cfg.precision_bits, "Precision cap of the ball stages")
        ->capture_default_str();
    solve->add_option("--seed", cfg.seed, "Seed of the solver's randomized choices")->capture_default_str();
    solve->add_option("-o,--output", cfg.output,
                      "Certificate file (one instance) or directory (several); default stdout or <instance>.cert");
    solve->add_option("-j,--jobs", cfg.jobs, "Instances solved concurrently")->capture_default_str();

    std::string verify_instance;
    std::string verify_cert;
    CLI::App* verify = app.add_subcommand("verify", "Check a certificate against an instance exactly");
    verify->add_option("instance", verify_instance, "Instance file")->required();
    verify->add_option("certificate", verify_cert, "Certificate file")->required();

    GenerateParams gen;
    std::string gen_output;
    bool require_solvable = false;
    bool require_insolvable = false;
    CLI::App* generate = app.add_subcommand("generate", "Random integer instance satisfying hypothesis H");
    generate->add_option("-n,--n", gen.n, "Number of variables")->capture_default_str();
    generate->add_option("-B,--bound", gen.bound, "Entries are drawn from [-B, B]")->capture_default_str();
    generate->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
    generate->add_option("--max-tries", gen.max_tries, "Rejection cap")->capture_default_str();
    auto* rs = generate->add_flag("--require-solvable", require_solvable, "Only emit real-solvable instances");
    auto* ri = generate->add_flag("--require-insolvable", require_insolvable,
                                  "Emit an instance with a definite pencil member");
    rs->excludes(ri);
    generate->add_option("-o,--output", gen_output, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }
    cfg.json = as_json;

    try {
        if (*check) {
            return cmd_check(check_file, as_json);
        }
        if (*analyze) {
            return cmd_analyze(analyze_file, as_json);
        }
        if (*solve) {
            return cmd_solve(solve_files, cfg);
        }
        if (*verify) {
            return cmd_verify(verify_instance, verify_cert, as_json);
        }
        if (*generate) {
            gen.require = require_solvable     ? Requirement::solvable
                          : require_insolvable ? Requirement::insolvable
                                               : Requirement::none;
            return cmd_generate(gen, gen_output, as_json);
        }
    } catch (...) {
        return report_failure(std::current_exception());
    }
    return kUsage;
}

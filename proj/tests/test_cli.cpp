// Runs the twoquad executable and checks exit codes, messages and files.
#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <regex>

#include "twoquad/instance_io.hpp"
#include "twoquad/oracle.hpp"
#include "twoquad/pencil.hpp"

using namespace twoquad;
namespace fs = std::filesystem;

namespace {

const std::string kCli = TWOQUAD_CLI_PATH;
const std::string kStub = STUB_ORACLE_PATH;
const fs::path kData = TWOQUAD_DATA_DIR;

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::string& args) {
    detail::ProcessOutput p = detail::run_shell(kCli + " " + args, "", 300);
    REQUIRE_FALSE(p.timed_out);
    return {p.exit_code, p.out, p.err};
}

std::string sh_quote(const fs::path& p) { return "'" + p.string() + "'"; }

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("twoquad_cli_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path operator/(const std::string& name) const { return path / name; }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("check reports hypothesis H and the profile") {
    Run ok = run("check " + sh_quote(kData / "n13_seed1.txt"));
    CHECK(ok.code == 0);
    CHECK(ok.out.rfind("H: OK, m = 1, profile: [6,7] [7,6]", 0) == 0);
    CHECK(contains(ok.out, "degree of Δ: 13"));

    Run det0 = run("check " + sh_quote(kData / "singular_q0.txt"));
    CHECK(det0.code == 1);
    CHECK(det0.out.rfind("H: FAIL det(Q0)=0", 0) == 0);

    Run dbl = run("check " + sh_quote(kData / "double_root.txt"));
    CHECK(dbl.code == 1);
    CHECK(dbl.out.rfind("H: FAIL Δ not squarefree", 0) == 0);

    Run js = run("--json check " + sh_quote(kData / "n13_seed2.json"));
    CHECK(js.code == 0);
    auto doc = nlohmann::json::parse(js.out);
    CHECK(doc["m"] == 3);
    CHECK(doc["segments"].size() == 4);
}

TEST_CASE("parse errors exit 1 with line and column") {
    TempDir tmp;
    spit(tmp / "bad.txt", "2\n1 0\n0 q\n1 0\n0 1\n");
    Run r = run("check " + sh_quote(tmp / "bad.txt"));
    CHECK(r.code == 1);
    CHECK(contains(r.err, "line 3, column 3"));
    Run missing = run("check " + sh_quote(tmp / "nope.txt"));
    CHECK(missing.code == 1);
}

TEST_CASE("analyze gives the verdict, the witness and a balanced member") {
    Run ok = run("analyze " + sh_quote(kData / "n13_seed1.txt"));
    CHECK(ok.code == 0);
    CHECK(ok.out.rfind("REAL-SOLVABLE\n", 0) == 0);
    CHECK(contains(ok.out, "balanced λ = "));

    const fs::path defin = kData / "n13_definite_seed3.txt";
    Run bad = run("analyze " + sh_quote(defin));
    CHECK(bad.code == 2);
    std::smatch m;
    REQUIRE(std::regex_search(bad.out, m, std::regex("REAL-INSOLVABLE, witness λ = (\\S+), signature \\[(\\d+),(\\d+)\\]")));
    Instance inst = parse_instance(slurp(defin));
    Signature s = inertia(pencil_member(inst.q0, inst.q1, parse_rat(m[1].str())));
    CHECK(s.definite(13));
    CHECK(s.str() == "[" + m[2].str() + "," + m[3].str() + "]");

    Run h = run("analyze " + sh_quote(kData / "double_root.txt"));
    CHECK(h.code == 1);
}

TEST_CASE("solve writes a certificate that verify accepts") {
    TempDir tmp;
    const fs::path inst = kData / "n13_seed1.txt";
    Run s = run("solve " + sh_quote(inst) + " -o " + sh_quote(tmp / "c.cert"));
    REQUIRE(s.code == 0);
    const std::string cert = slurp(tmp / "c.cert");
    CHECK(cert == slurp(kData / "n13_seed1.cert"));
    CHECK(contains(cert, "residue0 0\n"));
    CHECK(contains(cert, "residue1 0\n"));

    Run v = run("verify " + sh_quote(inst) + " " + sh_quote(tmp / "c.cert"));
    CHECK(v.code == 0);
    CHECK(contains(v.out, "PASS"));

    CertificateFile c = parse_certificate(cert);
    CertificateFile bumped = c;
    bumped.x[0] += 1;
    spit(tmp / "bumped.cert", emit_certificate(bumped));
    Run vb = run("verify " + sh_quote(inst) + " " + sh_quote(tmp / "bumped.cert"));
    CHECK(vb.code == 5);
    CHECK(contains(vb.out, "FAIL"));

    CertificateFile zero = c;
    zero.x.assign(c.x.size(), Rat(0));
    spit(tmp / "zero.cert", emit_certificate(zero));
    Run vz = run("verify " + sh_quote(inst) + " " + sh_quote(tmp / "zero.cert"));
    CHECK(vz.code == 5);

    CertificateFile shorter = c;
    shorter.x.pop_back();
    spit(tmp / "short.cert", emit_certificate(shorter));
    Run vs = run("verify " + sh_quote(inst) + " " + sh_quote(tmp / "short.cert"));
    CHECK(vs.code == 1);
}

TEST_CASE("solve failure exit codes") {
    Run ins = run("solve " + sh_quote(kData / "n13_definite_seed3.txt"));
    CHECK(ins.code == 2);
    CHECK(contains(ins.out, "REAL-INSOLVABLE, witness λ = "));

    Run budget = run("solve " + sh_quote(kData / "n13_seed1.txt") + " --budget 1");
    CHECK(budget.code == 3);

    Run prec = run("solve " + sh_quote(kData / "n13_seed1.txt") + " --precision-bits 16");
    CHECK(prec.code == 4);

    Run small = run("solve " + sh_quote(kData / "n4_small.txt"));
    CHECK(small.code == 1);

    Run lying = run("solve " + sh_quote(kData / "n13_seed1.txt") + " --oracle-cmd " + sh_quote(kStub + " wrong"));
    CHECK(lying.code == 3);
}

TEST_CASE("solve through an external oracle") {
    TempDir tmp;
    const fs::path inst = kData / "n13_seed1.txt";
    Run s = run("solve " + sh_quote(inst) + " --oracle-cmd " + sh_quote(kStub) + " -o " + sh_quote(tmp / "e.cert"));
    REQUIRE(s.code == 0);
    CHECK(run("verify " + sh_quote(inst) + " " + sh_quote(tmp / "e.cert")).code == 0);
}

TEST_CASE("batch solve and JSON files") {
    TempDir tmp;
    const fs::path a = kData / "n13_seed2.json";
    const fs::path b = kData / "n14_seed5.txt";
    Run s = run("--json solve -j 2 " + sh_quote(a) + " " + sh_quote(b) + " -o " + sh_quote(tmp / "out"));
    REQUIRE(s.code == 0);
    const fs::path ca = tmp / "out" / "n13_seed2.json.cert.json";
    const fs::path cb = tmp / "out" / "n14_seed5.txt.cert.json";
    CHECK(nlohmann::json::parse(slurp(ca))["residue0"] == "0");
    CHECK(run("verify " + sh_quote(a) + " " + sh_quote(ca)).code == 0);
    CHECK(run("verify " + sh_quote(b) + " " + sh_quote(cb)).code == 0);
}

TEST_CASE("generate is deterministic and validates parameters") {
    TempDir tmp;
    Run g1 = run("generate --seed 1 --require-solvable -o " + sh_quote(tmp / "g1.txt"));
    REQUIRE(g1.code == 0);
    CHECK(slurp(tmp / "g1.txt") == slurp(kData / "n13_seed1.txt"));
    Run g2 = run("generate --seed 1 --require-solvable");
    CHECK(g2.out == slurp(kData / "n13_seed1.txt"));
    CHECK(run("check " + sh_quote(tmp / "g1.txt")).code == 0);
    CHECK(run("analyze " + sh_quote(tmp / "g1.txt")).code == 0);

    CHECK(run("generate -B 0").code == 1);
    CHECK(run("generate --n 12").code == 1);
    CHECK(run("generate --require-solvable --require-insolvable").code == 1);

    Run gi = run("generate --seed 4 --require-insolvable -o " + sh_quote(tmp / "gi.txt"));
    REQUIRE(gi.code == 0);
    CHECK(run("analyze " + sh_quote(tmp / "gi.txt")).code == 2);

    Run j = run("--json generate --seed 9");
    CHECK(parse_instance_json(j.out) == parse_instance(run("generate --seed 9").out));
}

TEST_CASE("usage errors") {
    CHECK(run("").code == 1);
    CHECK(run("frobnicate").code == 1);
    CHECK(run("--help").code == 0);
    CHECK(run("solve").code == 1);
}

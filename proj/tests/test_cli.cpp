#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

// path of the CLI binary under test, passed as the trailing command-line
// argument by the test driver
const char* g_cli = nullptr;

int main(int argc, char** argv) {
    doctest::Context ctx;
    if (argc > 1 && argv[argc - 1][0] != '-') {
        g_cli = argv[argc - 1];
        --argc;
    }
    ctx.applyCommandLine(argc, argv);
    return ctx.run();
}

namespace {

std::string tmpdir() {
    static std::string dir = [] {
        std::string d = "/tmp/kbil_cli_test_" + std::to_string(::getpid());
        if (std::system(("mkdir -p " + d).c_str()) != 0) d = "/tmp";
        return d;
    }();
    return dir;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

/// Run `kbil <args>`, capturing stdout and stderr; returns the exit code.
int run(const std::string& args, std::string* out = nullptr,
        std::string* err = nullptr) {
    const std::string so = tmpdir() + "/stdout.txt";
    const std::string se = tmpdir() + "/stderr.txt";
    const std::string cmd =
        std::string(g_cli) + " " + args + " > " + so + " 2> " + se;
    const int status = std::system(cmd.c_str());
    if (out) *out = slurp(so);
    if (err) *err = slurp(se);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream ss(text);
    for (std::string line; std::getline(ss, line);) out.push_back(line);
    return out;
}

std::string focused_table() {
    static std::string path = [] {
        const std::string p = tmpdir() + "/focused.json";
        spit(p,
             R"({"type":"ellipse","center":[0.4,0.0],"semi_axes":[1.04,0.96],"rotation":0.0})");
        return p;
    }();
    return path;
}

std::string circle_table() {
    static std::string path = [] {
        const std::string p = tmpdir() + "/circle.json";
        spit(p,
             R"({"type":"ellipse","center":[0.0,0.0],"semi_axes":[2.0,2.0],"rotation":0.0})");
        return p;
    }();
    return path;
}

const std::string kHeader =
    "index,t,x,y,in_dx,in_dy,out_dx,out_dy,s,phi,energy_residual,abs_L,"
    "j_invariant";

}  // namespace

TEST_CASE("help and argument validation exit codes") {
    REQUIRE(g_cli != nullptr);
    CHECK(run("--help") == 0);
    CHECK(run("") == 1);                                 // missing subcommand
    CHECK(run("simulate") == 1);                         // missing --table
    CHECK(run("simulate --table /nonexistent.json") == 1);
    CHECK(run("simulate --table " + focused_table() + " --mode quantum") == 1);
    CHECK(run("simulate --table " + focused_table() + " --angle 0") == 1);
    CHECK(run("simulate --table " + focused_table() + " --angle 3.2") == 1);

    const std::string bad = tmpdir() + "/bad.json";
    spit(bad, "{\"type\":\"ellipse\"");
    CHECK(run("simulate --table " + bad) == 1);
}

TEST_CASE("simulate: csv schema and jsonl output") {
    const std::string out = tmpdir() + "/orbit.csv";
    const int rc = run("simulate --table " + focused_table() +
                       " --t0 0.13 --angle 1.1 --bounces 50 --out " + out);
    REQUIRE(rc == 0);
    const std::vector<std::string> ls = lines_of(slurp(out));
    REQUIRE(ls.size() == 52);  // header + launch + 50 bounces
    CHECK(ls[0] == kHeader);
    CHECK(ls[1].rfind("0,", 0) == 0);
    CHECK(ls[51].rfind("50,", 0) == 0);

    const std::string outj = tmpdir() + "/orbit.jsonl";
    REQUIRE(run("simulate --table " + focused_table() +
                " --t0 0.13 --angle 1.1 --bounces 50 --format jsonl --out " +
                outj) == 0);
    const std::vector<std::string> js = lines_of(slurp(outj));
    REQUIRE(js.size() == 51);
    for (const std::string& l : js) {
        CHECK(l.front() == '{');
        CHECK(l.back() == '}');
    }
    CHECK(js[0].find("\"index\":") != std::string::npos);
    CHECK(js[0].find("\"j_invariant\":") != std::string::npos);
}

TEST_CASE("simulate: birkhoff and lifted modes") {
    CHECK(run("simulate --table " + circle_table() +
              " --mode birkhoff --t0 0.1 --angle 0.9 --bounces 30 --out " +
              tmpdir() + "/b.csv") == 0);
    CHECK(run("simulate --table " + focused_table() +
              " --mode lifted --t0 0.1 --angle 0.9 --bounces 30 --out " +
              tmpdir() + "/l.csv") == 0);
    const std::vector<std::string> ls = lines_of(slurp(tmpdir() + "/l.csv"));
    REQUIRE(ls.size() == 32);
    CHECK(ls[0] == kHeader);
}

TEST_CASE("simulate: early termination reports exit code 2") {
    const std::string out = tmpdir() + "/tang.csv";
    const int rc = run("simulate --table " + circle_table() +
                       " --angle 0.2 --bounces 20 --tol-tangency 0.9 --out " +
                       out);
    CHECK(rc == 2);
    const std::string text = slurp(out);
    CHECK(text.find("# terminated: tangency") != std::string::npos);
}

TEST_CASE("kconvex: classifiers agree on the reference tables") {
    std::string out;
    REQUIRE(run("kconvex --table " + focused_table(), &out) == 0);
    CHECK(out.find("curvature classifier: KConvex") != std::string::npos);
    CHECK(out.find("brute-force oracle:   KConvex") != std::string::npos);
    CHECK(out.find("agreement: yes") != std::string::npos);

    const std::string flat = tmpdir() + "/flat.json";
    spit(flat,
         R"({"type":"ellipse","center":[0.0,0.0],"semi_axes":[5.0,0.3],"rotation":0.0})");
    REQUIRE(run("kconvex --table " + flat, &out) == 0);
    CHECK(out.find("NotKConvex") != std::string::npos);
    CHECK(out.find("witness theta0=") != std::string::npos);
    CHECK(out.find("agreement: yes") != std::string::npos);
}

TEST_CASE("conjugacy: direct and lifted runs stay within tolerance") {
    std::string out;
    const int rc = run("conjugacy --table " + focused_table() +
                       " --t0 0.13 --angle 1.1 --bounces 100",
                       &out);
    CHECK(rc == 0);
    CHECK(out.find("conjugacy: OK") != std::string::npos);
    CHECK(out.find("max bounce-point deviation:") != std::string::npos);
}

TEST_CASE("portrait: grid parsing and row count") {
    const std::string out = tmpdir() + "/portrait.csv";
    REQUIRE(run("portrait --table " + focused_table() +
                " --grid 3x2 --bounces 2 --out " + out) == 0);
    const std::vector<std::string> ls = lines_of(slurp(out));
    REQUIRE(ls.size() == 19);  // header + 6 seeds x 3 rows
    CHECK(ls[0] == "seed,k,s,phi");

    CHECK(run("portrait --table " + focused_table() + " --grid axb") == 1);
    CHECK(run("portrait --table " + focused_table() + " --grid 8") == 1);
}

TEST_CASE("fit-integral: residual output and failure modes") {
    std::string text;
    const std::string out = tmpdir() + "/fit.csv";
    REQUIRE(run("fit-integral --table " + focused_table() +
                " --t0 0.1 --angle 0.9 --bounces 400 --out " + out) == 0);
    text = slurp(out);
    CHECK(text.find("residual") != std::string::npos);

    // too few bounces for the fit
    CHECK(run("fit-integral --table " + focused_table() +
              " --t0 0.1 --angle 0.9 --bounces 100") == 1);
    // period-2 diameter orbit on the lifted circle is degenerate
    std::string err;
    CHECK(run("fit-integral --table " + circle_table() +
              " --t0 0 --angle 1.5707963267948966 --bounces 300",
              nullptr, &err) == 1);
    CHECK(err.find("error:") != std::string::npos);
}

TEST_CASE("repeated runs are byte-identical") {
    const std::string a = tmpdir() + "/rep_a.csv";
    const std::string b = tmpdir() + "/rep_b.csv";
    const std::string args = "simulate --table " + focused_table() +
                             " --t0 0.29 --angle 0.83 --bounces 200 --out ";
    REQUIRE(run(args + a) == 0);
    REQUIRE(run(args + b) == 0);
    const std::string ca = slurp(a), cb = slurp(b);
    REQUIRE(!ca.empty());
    CHECK(ca == cb);

    const std::string pa = tmpdir() + "/rep_pa.csv";
    const std::string pb = tmpdir() + "/rep_pb.csv";
    const std::string pargs = "portrait --table " + focused_table() +
                              " --grid 4x3 --bounces 20 --out ";
    REQUIRE(run(pargs + pa) == 0);
    REQUIRE(run(pargs + pb) == 0);
    CHECK(slurp(pa) == slurp(pb));
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

const char* kCli = SEMISTABLE_CLI_PATH;
const char* kFixtures = SEMISTABLE_FIXTURE_DIR;

struct RunResult {
    int exit_code;
    std::string out;
};

RunResult run(const std::string& args) {
    std::string cmd = std::string(kCli) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    int status = pclose(pipe);
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return {code, out};
}

std::string fixture(const std::string& name) { return std::string(kFixtures) + "/" + name; }

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("classify exits 0 and reports almost-semistable with the index-2 witness") {
    auto r = run("classify " + fixture("example_8_2.json"));
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"almost-semistable\"") != std::string::npos);
    CHECK(r.out.find("multiplicity 2") != std::string::npos);
}

TEST_CASE("check properties and exit codes") {
    CHECK(run("check --property semistable " + fixture("example_8_2.json")).exit_code == 1);
    CHECK(run("check --property almost " + fixture("example_8_2.json")).exit_code == 0);
    CHECK(run("check --property weak " + fixture("example_8_2.json")).exit_code == 0);
    CHECK(run("check --property reduced " + fixture("double_cover.json")).exit_code == 1);
    CHECK(run("check --property no-horizontal " + fixture("example_8_2.json")).exit_code == 0);
    CHECK(run("check --property gorenstein " + fixture("example_8_2.json")).exit_code == 0);
    CHECK(run("check --property equidimensional " + fixture("blowup.json")).exit_code == 1);
}

TEST_CASE("validate") {
    CHECK(run("validate " + fixture("example_8_2.json")).exit_code == 0);
    CHECK(run("validate " + fixture("square_cone.json")).exit_code == 0);
    CHECK(run("validate /nonexistent.json").exit_code == 2);
    // Semantic violations are reported as data with exit code 1.
    std::string bad = "/tmp/semistable_cli_unsat.json";
    std::ofstream(bad) << R"({
      "format": "semistable/v1",
      "kind": "complex",
      "mode": "abstract",
      "cones": [{"id": 0, "rank": 0, "rays": []},
                {"id": 1, "rank": 1, "rays": [["1"]]},
                {"id": 2, "rank": 2, "rays": [["1","0"],["0","1"]]}],
      "faces": [{"face": 0, "parent": 1, "embedding": [[]]},
                {"face": 0, "parent": 2, "embedding": [[],[]]},
                {"face": 1, "parent": 2, "embedding": [["2"],["0"]]}]
    })";
    auto r = run("validate " + bad);
    CHECK(r.exit_code == 1);
    CHECK(r.out.find("\"valid\":false") != std::string::npos);
    std::remove(bad.c_str());
}

TEST_CASE("schema errors exit 2") {
    std::string bad = "/tmp/semistable_cli_bad.json";
    std::ofstream(bad) << "{\"kind\": \"morphism\"";
    auto r = run("classify " + bad);
    CHECK(r.exit_code == 2);
    CHECK(r.out.find("schema") != std::string::npos);
    std::remove(bad.c_str());
}

TEST_CASE("subdivide, simplicialize, resolve emit subdivision documents") {
    std::string out = "/tmp/semistable_cli_sub.json";
    {
        auto r = run("simplicialize " + fixture("square_cone.json") + " -o " + out);
        CHECK(r.exit_code == 0);
        CHECK(slurp(out).find("\"kind\": \"subdivision\"") != std::string::npos);
    }
    {
        auto r = run("resolve " + fixture("square_cone.json") + " -o " + out);
        CHECK(r.exit_code == 0);
    }
    {
        // Cone 9 is the maximal cone of the square-cone complex.
        auto r = run("subdivide --star 9 --at 1,1,1 " + fixture("square_cone.json") + " -o " + out);
        CHECK(r.exit_code == 0);
    }
    {
        auto r = run("subdivide --star 9 --at 1,0,0 " + fixture("square_cone.json") + " -o " + out);
        CHECK(r.exit_code == 2);  // point on the boundary of the named cone
    }
    std::remove(out.c_str());
}

TEST_CASE("pipeline then verify-cert round-trips, tampering is rejected") {
    std::string out = "/tmp/semistable_cli_out.json";
    std::string cert = "/tmp/semistable_cli_cert.json";
    for (const char* fx : {"double_cover.json", "blowup.json", "lcm_two_rays.json"}) {
        auto r = run("pipeline " + fixture(fx) + " -o " + out + " --cert " + cert);
        CHECK(r.exit_code == 0);
        auto v = run("verify-cert " + fixture(fx) + " " + cert);
        CHECK(v.exit_code == 0);
        CHECK(v.out.find("\"valid\":true") != std::string::npos);
    }
    // Single-field tampering of a recorded lattice basis entry.
    std::string text = slurp(cert);
    auto pos = text.find("\"6\"");  // the lcm target witness entry m = 6
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 3, "\"7\"");
    std::ofstream(cert) << text;
    auto v = run("verify-cert " + fixture("lcm_two_rays.json") + " " + cert);
    CHECK(v.exit_code == 1);
    std::remove(out.c_str());
    std::remove(cert.c_str());
}

TEST_CASE("pipeline outputs are byte-identical across runs") {
    std::string o1 = "/tmp/semistable_det1.json", c1 = "/tmp/semistable_det1c.json";
    std::string o2 = "/tmp/semistable_det2.json", c2 = "/tmp/semistable_det2c.json";
    CHECK(run("pipeline " + fixture("blowup.json") + " -o " + o1 + " --cert " + c1).exit_code == 0);
    CHECK(run("pipeline " + fixture("blowup.json") + " -o " + o2 + " --cert " + c2).exit_code == 0);
    CHECK(slurp(o1) == slurp(o2));
    CHECK(slurp(c1) == slurp(c2));
    for (const auto& p : {o1, c1, o2, c2}) std::remove(p.c_str());
}

TEST_CASE("recipe-8-2 reaches semistable on the fixture") {
    std::string out = "/tmp/semistable_recipe.json";
    auto r = run("recipe-8-2 " + fixture("example_8_2.json") +
                 " --barycenter 1,1 --center 1,0,0,0 -o " + out);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"semistable\"") != std::string::npos);
    std::remove(out.c_str());
}

TEST_CASE("equidimensionalize and reduce-fibers subcommands") {
    std::string out = "/tmp/semistable_step.json";
    std::string cert = "/tmp/semistable_step_cert.json";
    CHECK(run("equidimensionalize " + fixture("blowup.json") + " -o " + out + " --cert " + cert)
              .exit_code == 0);
    CHECK(run("classify " + out).out.find("\"semistable\"") != std::string::npos);
    CHECK(run("reduce-fibers " + fixture("double_cover.json") + " -o " + out + " --cert " + cert)
              .exit_code == 0);
    CHECK(run("classify " + out).out.find("\"semistable\"") != std::string::npos);
    CHECK(run("reduce-fibers " + fixture("blowup.json") + " -o " + out + " --cert " + cert)
              .exit_code == 2);
    std::remove(out.c_str());
    std::remove(cert.c_str());
}
